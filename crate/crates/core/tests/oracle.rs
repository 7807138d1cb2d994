//! Closed-form values checked against a 256-bit fixed-point reference.

mod common;

use common::{cos_sin, dist, eval, pi, C, R};
use mcmullen_core::dynamics::superattracting_coefficient;
use mcmullen_core::geometry::{
    center_a_k, k_annulus, regime_thresholds, spine_point, v_minus_bound_near_eighth, v_minus_bound_near_eighth_limit,
    SpineOrder,
};
use mcmullen_core::maps::{principal_root, MapParams};
use mcmullen_core::Complex64;

/// Subfamily data at full precision for `a = |a| e^{iψ}` with `ψ = psi_num/psi_den · π`.
struct HpMap {
    n: u32,
    a: C,
    b: C,
    v_plus: C,
    v_minus: C,
}

fn hp_subfamily(n: u32, modulus: &R, psi_num: i64, psi_den: i64) -> HpMap {
    let pi = pi();
    let psi = R(&pi.0 * psi_num / psi_den);
    let a = C::polar(modulus, &psi);
    let root_2n = C::polar(&modulus.root(2 * n), &R(&psi.0 / (2 * n as i64)));
    let sqrt_a = C::polar(&modulus.sqrt(), &R(&psi.0 / 2));
    let two_sqrt = &sqrt_a + &sqrt_a;
    let b = &root_2n - &two_sqrt;
    HpMap {
        n,
        a,
        v_plus: &b + &two_sqrt,
        v_minus: &b - &two_sqrt,
        b,
    }
}

/// `a_k = (sin(kπ/2n)/2)^{2n/(n-1)} e^{iπ(k-n)/(n-1)}`, from
/// `1 - e^{iφ} = 2 sin(φ/2) e^{i(φ-π)/2}`. Returns the modulus and the
/// argument as a rational multiple of π, moved into `(-π, π]`.
fn hp_center(n: u32, k: u32) -> (R, i64, i64) {
    let pi = pi();
    let (_, s) = cos_sin(&R(&pi.0 * k as i64 / (2 * n as i64)));
    let base = R(&s.0 / 2);
    let modulus = base.pow_ratio(2 * n, n - 1);
    let (mut num, den) = (k as i64 - n as i64, n as i64 - 1);
    if num == -den {
        num = den;
    }
    (modulus, num, den)
}

fn hp_r(m: &HpMap, z: &C) -> C {
    eval(m.n, &m.a, &m.b, z)
}

#[test]
fn eval_fixes_v_plus_at_sixteen_hundredths() {
    let p = MapParams::subfamily(4, Complex64::new(0.16, 0.0)).unwrap();
    let hp = hp_subfamily(4, &R::from_f64(0.16), 0, 1);
    assert!(dist(&hp.b, p.b()) < 1e-15);
    assert!(dist(&hp.v_plus, p.v_plus()) < 1e-15);
    assert!((&hp_r(&hp, &hp.v_plus) - &hp.v_plus).norm().to_f64() < 1e-60);
    assert!(dist(&hp.v_plus, p.eval(p.v_plus()).unwrap()) < 1e-12);
}

#[test]
fn principal_roots_match_reference() {
    let (c, s) = cos_sin(&R(&pi().0 / 6));
    let e = C::new(c, s);
    let z = principal_root(Complex64::new(-1.0, 0.0), 6).unwrap();
    assert!(dist(&e, z) < 1e-15);
    for n in 3..=9 {
        let hp = hp_subfamily(n, &R::ratio(3, 7), -5, 9);
        let a = hp.a.to_c64();
        let p = MapParams::subfamily(n, a).unwrap();
        assert!(dist(&hp.v_plus, p.v_plus()) < 1e-14, "n={n}");
        assert!(dist(&hp.v_minus, p.v_minus()) < 1e-14, "n={n}");
    }
}

#[test]
fn centers_match_closed_form() {
    for n in 3..=8 {
        for k in 1..2 * n {
            let (modulus, num, den) = hp_center(n, k);
            let hp = C::polar(&modulus, &R(&pi().0 * num / den));
            let a = center_a_k(n, k).unwrap();
            assert!(dist(&hp, a) < 1e-15, "n={n} k={k} {a}");
        }
    }
}

#[test]
fn centers_satisfy_the_critical_relation_at_full_precision() {
    for n in 3..=8 {
        for k in 1..2 * n {
            let (modulus, num, den) = hp_center(n, k);
            let m = hp_subfamily(n, &modulus, num, den);
            let image = hp_r(&m, &m.v_minus);
            let target = if k % 2 == 1 { &m.v_minus } else { &m.v_plus };
            let residual = (&image - target).norm().to_f64();
            assert!(residual < 1e-60, "n={n} k={k} residual {residual}");
        }
    }
}

#[test]
fn center_examples() {
    assert!((center_a_k(3, 3).unwrap() - 0.125).norm() < 1e-16);
    let three_root_three = R::int(3).powu(3).sqrt();
    let expect = C::new(R::zero(), &(-&three_root_three) / &R::int(64));
    assert!(dist(&expect, center_a_k(3, 2).unwrap()) < 1e-16);
    assert!((center_a_k(3, 2).unwrap().im + 0.081189).abs() < 1e-6);
    let half_pow = R::ratio(1, 2).pow_ratio(12, 5);
    assert!(dist(&C::real(half_pow), center_a_k(6, 6).unwrap()) < 1e-16);
    assert!((center_a_k(6, 6).unwrap().re - 0.18946).abs() < 1e-5);
}

#[test]
fn spine_at_zero_angle_for_cubic() {
    // Real fixed point of a = ((a^{1/6} + 1)/4)^2.
    let mut a = R::ratio(1, 4);
    for _ in 0..400 {
        let t = &(&a.root(6) + &R::int(1)) / &R::int(4);
        a = &t * &t;
    }
    let m = hp_subfamily(3, &a, 0, 1);
    let defect = (&m.v_minus.norm() - &R::int(1)).abs().to_f64();
    assert!(defect < 1e-60);
    let lib = spine_point(SpineOrder::Finite(3), 0.0).unwrap();
    assert!(dist(&C::real(a), lib) < 1e-12);
    let p = MapParams::subfamily(3, lib).unwrap();
    assert!(((p.b() - 2.0 * p.sqrt_a()).norm() - 1.0).abs() < 1e-9);
}

fn hp_h(n: u32, x: &R) -> R {
    (&(&R::int(4) * x) + &x.root(n)).sqrt()
}

fn hp_bisect(mut lo: R, mut hi: R, f: impl Fn(&R) -> R) -> R {
    let f_lo_neg = f(&lo).0.sign() == num_bigint::Sign::Minus;
    for _ in 0..120 {
        let mid = R((&lo.0 + &hi.0) / 2);
        let neg = f(&mid).0.sign() == num_bigint::Sign::Minus;
        if neg == f_lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn regime_thresholds_for_cubic() {
    let q = hp_bisect(R::ratio(36, 10), R::int(4), |x| &hp_h(3, x) - &R::int(4));
    let rho = hp_bisect(R::int(4), R::ratio(44, 10), |x| &hp_h(3, x) - x);
    let t = regime_thresholds(3).unwrap();
    assert!((t.q_n - q.to_f64()).abs() < 1e-10);
    assert!((t.rho_n - rho.to_f64()).abs() < 1e-10);
    assert!((q.to_f64() - 3.6163).abs() < 5e-4);
    assert!((rho.to_f64() - 4.3739).abs() < 5e-4);
}

fn hp_l(n: Option<u32>) -> f64 {
    let pi = pi();
    let left = C::polar(&R::ratio(5, 2).sqrt(), &R(&pi.0 * 19 / 20));
    let right = match n {
        Some(n) => C::polar(&R::ratio(3, 32).root(2 * n), &R(&pi.0 / (20 * n as i64))),
        None => C::real(R::int(1)),
    };
    (&left + &right).norm().to_f64()
}

#[test]
fn table_bounds_recomputed() {
    for n in [3, 4, 5, 6, 7, 10, 15, 25, 50, 100] {
        assert!((v_minus_bound_near_eighth(n) - hp_l(Some(n))).abs() < 1e-14, "n={n}");
    }
    assert!((v_minus_bound_near_eighth_limit() - hp_l(None)).abs() < 1e-14);
    let l3 = hp_l(Some(3));
    assert!(0.93 < l3 && l3 < 0.95);
}

#[test]
fn superattracting_coefficient_is_half_second_derivative() {
    // r''(z)/2 = (n(n-1) z^{n-2} + n(n+1) a z^{-n-2}) / 2 at z = v_plus.
    for (n, num, den) in [(3u32, 1i64, 3i64), (4, -2, 5), (6, 0, 1), (7, 7, 8)] {
        let m = hp_subfamily(n, &R::ratio(2, 9), num, den);
        let p = MapParams::subfamily(n, m.a.to_c64()).unwrap();
        let z = &m.v_plus;
        let t1 = &C::real(R::int((n * (n - 1)) as i64)) * &z.powu(n - 2);
        let t2 = &(&C::real(R::int((n * (n + 1)) as i64)) * &m.a) / &z.powu(n + 2);
        let half = &(&t1 + &t2) / &C::real(R::int(2));
        let c2 = superattracting_coefficient(&p);
        assert!(dist(&half, c2) < 1e-13 * c2.norm(), "n={n}");
    }
}

#[test]
fn tightened_annulus_for_cubic_half() {
    let p = MapParams::subfamily(3, Complex64::new(0.5, 0.0)).unwrap();
    let ann = k_annulus(&p);
    let inner = &R::from_f64(0.5).root(3) / &R::int(2);
    assert!((ann.inner - inner.to_f64()).abs() < 1e-15);
    assert!((ann.inner - 0.3969).abs() < 1e-4);
    assert_eq!(ann.outer, 2.0);
}
