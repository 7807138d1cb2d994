//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints its verdict line; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use mcmullen_core::dynamics::{
    classify_parameter, internal_ray_point, phi_j, superattracting_coefficient, Outcome, SliceSpec,
};
use mcmullen_core::geometry::{center_a_k, regime_thresholds, v_minus_bound_near_eighth};
use mcmullen_core::maps::MapParams;
use mcmullen_core::palette::Palette;
use mcmullen_core::regions::label_components;
use mcmullen_core::render::{
    classify_grid, encode_image, render_plane_with_workers, ImageFormat, PlaneKind, PlaneSpec, Viewport,
};
use mcmullen_core::verify::{
    boettcher_functional_residual, bounded_parameters, k_annulus_grid_check, middle_even_centers, phi_grid_values,
};
use mcmullen_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn random_a(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..=hi), rng.gen_range(-PI..PI))
}

fn unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

fn fixed_point_construction() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        for _ in 0..200 {
            let p = MapParams::subfamily(n, random_a(&mut rng, 0.01, 1.0)).unwrap();
            let vp = p.v_plus();
            worst = worst.max((p.eval(vp).unwrap() - vp).norm() / (1.0 + vp.norm()));
        }
    }
    let t = start.elapsed();
    verdict(
        worst < 1e-10 && t < Duration::from_secs(1),
        format!("max relative residual {worst:.3e} (< 1e-10), {t:?} (< 1 s)"),
    )
}

fn c_patterns() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        for k in 1..2 * n {
            let p = MapParams::subfamily(n, center_a_k(n, k).unwrap()).unwrap();
            let target = if k % 2 == 1 { p.v_minus() } else { p.v_plus() };
            worst = worst.max((p.eval(p.v_minus()).unwrap() - target).norm() / (1.0 + target.norm()));
        }
    }
    let exact = MapParams::general(3, Complex64::new(0.125, 0.0), Complex64::new(0.0, 0.0)).unwrap();
    let vm = exact.v_minus();
    let exact_residual = (exact.eval(vm).unwrap() - vm).norm();
    let t = start.elapsed();
    verdict(
        worst < 1e-9 && exact_residual < 1e-12 && t < Duration::from_secs(1),
        format!("max residual {worst:.3e} (< 1e-9), a=1/8 b=0 residual {exact_residual:.3e} (< 1e-12), {t:?}"),
    )
}

fn regime() -> Verdict {
    let all: Vec<_> = (3..=12).map(|n| regime_thresholds(n).unwrap()).collect();
    let (q3, r3) = (all[0].q_n, all[0].rho_n);
    let monotone = all.windows(2).all(|w| w[1].q_n > w[0].q_n && w[1].rho_n < w[0].rho_n);
    verdict(
        (q3 - 3.6163).abs() <= 5e-4 && (r3 - 4.3739).abs() <= 5e-4 && monotone,
        format!("q_3={q3:.6} rho_3={r3:.6} (±5e-4 of 3.6163, 4.3739), monotone for n=3..12: {monotone}"),
    )
}

fn table_bounds() -> Verdict {
    let bounds = [(3, 0.95), (4, 0.87), (5, 0.82), (7, 0.77), (100, 0.63)];
    let ok = bounds.iter().all(|&(n, b)| v_minus_bound_near_eighth(n) < b);
    let l3 = v_minus_bound_near_eighth(3);
    let listed: Vec<String> = bounds
        .iter()
        .map(|&(n, _)| format!("L({n})={:.5}", v_minus_bound_near_eighth(n)))
        .collect();
    verdict(ok && 0.93 < l3 && l3 < 0.95, listed.join(" "))
}

fn involution() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(3..=12);
        let a = random_a(&mut rng, 0.01, 4.0);
        let b = Complex64::from_polar(2.0 * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI));
        let p = MapParams::general(n, a, b).unwrap();
        let z = random_a(&mut rng, 0.1, 2.5);
        let rz = p.eval(z).unwrap();
        let rh = p.eval(p.involution(z).unwrap()).unwrap();
        worst = worst.max((rh - rz).norm() / (1.0 + rz.norm()));
    }
    verdict(worst < 1e-9, format!("10^4 samples, max relative residual {worst:.3e} (< 1e-9)"))
}

fn k_annulus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let (mut bounded, mut violations) = (0usize, 0u64);
    for _ in 0..50 {
        let n = rng.gen_range(3..=8);
        let a = unit_disk(&mut rng);
        let p = MapParams::subfamily(n, a).unwrap();
        let (b, v) = k_annulus_grid_check(&p, 200, 500);
        bounded += b;
        violations += v;
    }
    verdict(
        violations == 0,
        format!("50 parameters, 200^2 seeds each, {bounded} bounded seeds, {violations} iterates outside the annulus"),
    )
}

fn boettcher() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let (mut worst_eq, mut worst_phi, mut worst_c2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut short = false;
    for n in 4..=6 {
        for k in middle_even_centers(n) {
            let a = center_a_k(n, k).unwrap();
            let p = MapParams::subfamily(n, a).unwrap();
            let (eq, used) = boettcher_functional_residual(&p, 100, &mut rng);
            short |= used < 100;
            worst_eq = worst_eq.max(eq);
            let phi = phi_j(n, k / 2, a).map(|v| v.value.norm()).unwrap_or(f64::INFINITY);
            worst_phi = worst_phi.max(phi);
            // Central second difference with a step where truncation and
            // rounding errors are both near 1e-8.
            let vp = p.v_plus();
            let h = 1e-4 * vp.norm();
            let second = (p.eval(vp + h).unwrap() - 2.0 * p.eval(vp).unwrap() + p.eval(vp - h).unwrap()) / (h * h);
            let c2 = superattracting_coefficient(&p);
            worst_c2 = worst_c2.max((second / 2.0 - c2).norm() / c2.norm());
        }
    }
    verdict(
        worst_eq < 1e-6 && worst_phi < 1e-8 && worst_c2 < 1e-6 && !short,
        format!(
            "|phi(r z) - phi(z)^2| max {worst_eq:.3e} (< 1e-6), |Phi_j(center)| max {worst_phi:.3e} (< 1e-8), c2 relative error {worst_c2:.3e} (< 1e-6)"
        ),
    )
}

fn ray_doubling() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 4..=6 {
        for k in middle_even_centers(n) {
            let p = MapParams::subfamily(n, center_a_k(n, k).unwrap()).unwrap();
            for t in [0.0, 1.0 / 8.0, 1.0 / 3.0, 0.5, 5.0 / 7.0] {
                let here = internal_ray_point(&p, t, 0.9, 10);
                let there = internal_ray_point(&p, (2.0 * t).fract(), 0.81, 9);
                let r = match (here, there) {
                    (Ok(z), Ok(w)) => (p.eval(z).unwrap() - w).norm(),
                    _ => f64::INFINITY,
                };
                worst = worst.max(r);
            }
        }
    }
    verdict(worst < 1e-6, format!("max |r(Gamma_0.9(t)) - Gamma_0.81(2t)| = {worst:.3e} (< 1e-6)"))
}

fn n6_slice_spec() -> (PlaneSpec, Viewport) {
    let spec = PlaneSpec::new(PlaneKind::ParameterSlice(SliceSpec::FixedCrit { n: 6 }), 512);
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 0.7, 800).unwrap();
    (spec, vp)
}

fn figure_n6() -> Verdict {
    let start = Instant::now();
    let (spec, vp) = n6_slice_spec();
    let grid = classify_grid(&spec, &vp);
    let mask: Vec<bool> = grid.samples.iter().map(|s| s.is_bounded()).collect();
    let labels = label_components(&mask, vp.px_w, vp.px_h);
    let mut even_labels = Vec::new();
    for j in 1..6 {
        let a = center_a_k(6, 2 * j).unwrap();
        let l = vp.pixel_of(a).map(|(i, jj)| labels.at(i, jj)).unwrap_or(0);
        even_labels.push(l);
    }
    let mut distinct = even_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let evens_ok = even_labels.iter().all(|&l| l > 0) && distinct.len() == 5;
    let pal = Palette::default();
    let odd_ok = [3, 5, 7, 9].iter().all(|&k| {
        let c = classify_parameter(&SliceSpec::FixedCrit { n: 6 }, center_a_k(6, k).unwrap(), 512, &pal).unwrap();
        c.plus.is_bounded() && c.minus.outcome == Outcome::FixedVMinus
    });
    let t = start.elapsed();
    verdict(
        labels.count >= 9 && evens_ok && odd_ok && t < Duration::from_secs(60),
        format!(
            "{} bounded components (>= 9), even-center labels {even_labels:?}, odd centers 3,5,7,9 fixed: {odd_ok}, {t:?} (< 60 s)",
            labels.count
        ),
    )
}

fn m_annulus_n20() -> Verdict {
    let pts: Vec<_> = bounded_parameters(20, 400, 0.6, 512)
        .into_iter()
        .filter(|a| a.norm() <= 0.6)
        .collect();
    let bad = pts
        .iter()
        .filter(|a| {
            let d = (**a - 0.125).norm();
            !(0.028 < d && d < 0.40)
        })
        .count();
    verdict(
        bad == 0 && !pts.is_empty(),
        format!("{} bounded parameters with |a| <= 0.6, {bad} outside 0.028 < |a - 1/8| < 0.40", pts.len()),
    )
}

fn determinism() -> Verdict {
    let (spec, vp) = n6_slice_spec();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(4);
    let one = encode_image(&render_plane_with_workers(&spec, &vp, 1).unwrap(), ImageFormat::Ppm).unwrap();
    let many = encode_image(&render_plane_with_workers(&spec, &vp, workers).unwrap(), ImageFormat::Ppm).unwrap();
    verdict(
        one == many && one.len() == 15 + 3 * 800 * 800,
        format!("PPM of {} bytes, 1 worker vs {workers} workers identical: {}", one.len(), one == many),
    )
}

fn phi_injectivity() -> Verdict {
    let mut worst_gap = f64::INFINITY;
    let mut all_found = true;
    for (n, j) in [(4, 1), (4, 2), (4, 3), (5, 2)] {
        match phi_grid_values(n, j, 500) {
            Some(v) => {
                for (i, x) in v.iter().enumerate() {
                    for y in &v[i + 1..] {
                        worst_gap = worst_gap.min((x - y).norm());
                    }
                }
                all_found &= v.iter().all(|x| x.norm() < 1.0);
            }
            None => all_found = false,
        }
    }
    verdict(
        all_found && worst_gap > 1e-9,
        format!("500-point grids, smallest pairwise |Phi_j| gap {worst_gap:.3e} (> 1e-9)"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("criterion 1 fixed-point construction", fixed_point_construction),
        ("criterion 2 center critical patterns", c_patterns),
        ("criterion 3 regime thresholds", regime),
        ("criterion 4 table of |v-| bounds", table_bounds),
        ("criterion 5 involution", involution),
        ("criterion 6 K-annulus containment", k_annulus),
        ("criterion 7 Boettcher conjugacy", boettcher),
        ("criterion 8 ray doubling", ray_doubling),
        ("criterion 9 n=6 slice components", figure_n6),
        ("criterion 10 n=20 annulus (EMPIRICAL)", m_annulus_n20),
        ("criterion 11 render determinism", determinism),
        ("supplement Phi_j sampled injectivity", phi_injectivity),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let v = run();
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failures += 1;
        }
    }
    println!("acceptance: {} of {} passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
