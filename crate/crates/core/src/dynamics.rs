//! Orbit iteration and classification, Böttcher coordinates at the
//! super-attracting fixed point `v_plus`, the component map `Φ_j` and
//! internal rays.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cmath::powu;
use crate::geometry::{k_annulus, AnnulusBounds};
use crate::maps::{MapError, MapParams, POLE_RADIUS};
use crate::palette::Palette;

/// Default radius of the attraction disk around `v_plus`.
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Relative tolerance for declaring an iterate a fixed point.
pub const FIXED_POINT_RTOL: f64 = 1e-12;
pub const DEFAULT_BOETTCHER_EPS: f64 = 1e-8;
/// Iteration cap when following an orbit into the `eps0`-disk.
pub const BOETTCHER_MAX_DEPTH: u32 = 10_000;
/// Budget for deciding that `v_minus` is attracted before evaluating `Φ_j`.
pub const PHI_ORBIT_BUDGET: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("operation requires a map from the fixed-critical-point subfamily")]
    NotSubfamily,
    #[error("orbit of {z} does not reach the attraction disk of v+")]
    NotInBasin { z: Complex64 },
    #[error("v- is not attracted to v+ at a = {a}")]
    OutsideComponent { a: Complex64 },
    #[error("preimage branches {first} and {second} are equidistant from the prediction")]
    Ambiguous { first: Complex64, second: Complex64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    /// Some iterate left the annulus that contains the filled Julia set.
    Escaped,
    /// Entered the validated attraction disk around `v_plus` while contracting.
    AttractedToVPlus,
    /// Landed on a fixed point other than `v_plus`; at odd centers this is
    /// `v_minus` itself.
    FixedVMinus,
    /// Budget exhausted without a verdict.
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitResult {
    pub outcome: Outcome,
    /// Number of map applications performed.
    pub iterations: u32,
    /// Index of the first iterate inside the attraction disk, or of the
    /// iterate found to be fixed.
    pub entry_iter: Option<u32>,
    pub final_value: Complex64,
    /// The orbit hit the pole `z = 0`.
    pub pole: bool,
}

impl OrbitResult {
    pub fn is_bounded(&self) -> bool {
        self.outcome != Outcome::Escaped
    }

    fn at(outcome: Outcome, iterations: u32, entry_iter: Option<u32>, z: Complex64) -> Self {
        OrbitResult {
            outcome,
            iterations,
            entry_iter,
            final_value: z,
            pole: false,
        }
    }
}

/// Largest `δ = 10^{-3} / 2^j` (`j ≤ 10`) for which 16 sampled points on the
/// circle `|z - v_plus| = δ` map to within `δ/2` of `v_plus`.
pub fn attraction_radius(p: &MapParams) -> Option<f64> {
    if !p.is_subfamily() {
        return None;
    }
    let mut delta = DEFAULT_DELTA;
    for _ in 0..=10 {
        let ok = (0..16).all(|i| {
            let u = Complex64::from_polar(delta, 2.0 * PI * i as f64 / 16.0);
            p.deviation(u).norm() < delta / 2.0
        });
        if ok {
            return Some(delta);
        }
        delta /= 2.0;
    }
    None
}

/// Per-map iteration state: the bailout annulus and the attraction disk.
#[derive(Debug, Clone, Copy)]
pub struct Orbiter {
    params: MapParams,
    annulus: AnnulusBounds,
    delta: Option<f64>,
}

impl Orbiter {
    pub fn new(params: MapParams) -> Self {
        Orbiter {
            annulus: k_annulus(&params),
            delta: attraction_radius(&params),
            params,
        }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn annulus(&self) -> AnnulusBounds {
        self.annulus
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn run(&self, z0: Complex64, max_iter: u32) -> OrbitResult {
        let p = &self.params;
        let vp = p.v_plus();
        let (inner, outer) = (self.annulus.inner, self.annulus.outer);
        let mut z = z0;
        let mut k = 0u32;
        loop {
            let r = z.norm();
            if r < POLE_RADIUS || !r.is_finite() {
                return OrbitResult {
                    pole: true,
                    ..OrbitResult::at(Outcome::Escaped, k, None, z)
                };
            }
            if r > outer || r < inner {
                return OrbitResult::at(Outcome::Escaped, k, None, z);
            }
            if k >= max_iter {
                return OrbitResult::at(Outcome::Unresolved, k, None, z);
            }
            let next = p.step(z);
            if let Some(delta) = self.delta {
                let dist = (z - vp).norm();
                let slack = 8.0 * f64::EPSILON * (1.0 + vp.norm());
                if dist < delta && (next - vp).norm() <= dist + slack {
                    return OrbitResult::at(Outcome::AttractedToVPlus, k, Some(k), z);
                }
            }
            if (next - z).norm() <= FIXED_POINT_RTOL * (1.0 + r) {
                return OrbitResult::at(Outcome::FixedVMinus, k, Some(k), z);
            }
            z = next;
            k += 1;
        }
    }
}

pub fn iterate_orbit(p: &MapParams, z0: Complex64, max_iter: u32) -> Result<OrbitResult, DynamicsError> {
    if max_iter < 1 {
        return Err(DynamicsError::InvalidArgument("max_iter must be at least 1"));
    }
    Ok(Orbiter::new(*p).run(z0, max_iter))
}

/// How a plane point determines `(n, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SliceSpec {
    /// Point is `a`, with `b = b_{n,0}(a)`.
    FixedCrit { n: u32 },
    /// Point is `a`, with `b` held fixed.
    ASlice { n: u32, b: Complex64 },
    /// Point is `b`, with `a` held fixed.
    BSlice { n: u32, a: Complex64 },
    /// Point is `a`, with `b = t·a`.
    Linear { n: u32, t: Complex64 },
}

impl SliceSpec {
    pub fn n(&self) -> u32 {
        match *self {
            SliceSpec::FixedCrit { n }
            | SliceSpec::ASlice { n, .. }
            | SliceSpec::BSlice { n, .. }
            | SliceSpec::Linear { n, .. } => n,
        }
    }

    pub fn params_at(&self, point: Complex64) -> Result<MapParams, MapError> {
        match *self {
            SliceSpec::FixedCrit { n } => MapParams::subfamily(n, point),
            SliceSpec::ASlice { n, b } => MapParams::general(n, point, b),
            SliceSpec::BSlice { n, a } => MapParams::general(n, a, point),
            SliceSpec::Linear { n, t } => MapParams::general(n, point, t * point),
        }
    }
}

/// Joint verdict on both critical orbits of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamClassification {
    pub plus: OrbitResult,
    pub minus: OrbitResult,
    pub color: [u8; 3],
}

/// Orbits of both critical values for an already-built map. In the subfamily
/// `v_plus` is fixed by construction, so its orbit is not iterated.
pub fn critical_orbits(p: &MapParams, max_iter: u32) -> (OrbitResult, OrbitResult) {
    let orbiter = Orbiter::new(*p);
    let plus = if p.is_subfamily() {
        OrbitResult::at(Outcome::AttractedToVPlus, 0, Some(0), p.v_plus())
    } else {
        orbiter.run(p.v_plus(), max_iter)
    };
    let minus = orbiter.run(p.v_minus(), max_iter);
    (plus, minus)
}

pub fn classify_parameter(
    slice: &SliceSpec,
    point: Complex64,
    max_iter: u32,
    palette: &Palette,
) -> Result<ParamClassification, DynamicsError> {
    if max_iter < 1 {
        return Err(DynamicsError::InvalidArgument("max_iter must be at least 1"));
    }
    let p = slice.params_at(point)?;
    let (plus, minus) = critical_orbits(&p, max_iter);
    Ok(ParamClassification {
        plus,
        minus,
        color: palette.parameter_color(&plus, &minus, &p, max_iter),
    })
}

/// `c₂ = n² v_plus^{n-2}`, half the second derivative at `v_plus`; from
/// `r''(z) = n(n-1) z^{n-2} + n(n+1) a z^{-n-2}` and `v_plus^{2n} = a`.
pub fn superattracting_coefficient(p: &MapParams) -> Complex64 {
    let n = p.n();
    (n * n) as f64 * powu(p.v_plus(), n - 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoettcherValue {
    pub value: Complex64,
    pub modulus: f64,
    /// Iterations needed to reach the `eps0`-disk.
    pub depth: u32,
    pub argument_reliable: bool,
}

/// Böttcher coordinate `φ(z)` conjugating `r` near `v_plus` to `w ↦ w²`,
/// normalized by `φ(v_plus) = 0` and `φ'(v_plus) = c₂`.
///
/// The orbit is followed in deviations `u_k = r^k(z) - v_plus` until
/// `|u_m| < eps0`. Then `φ(r^m z) ≈ c₂ u_m`, and `m` square roots recover
/// `φ(z)`, each taking the sign closer to the first-order estimate `c₂ u_j`.
pub fn boettcher_value(p: &MapParams, z: Complex64, eps0: f64) -> Result<BoettcherValue, DynamicsError> {
    if !p.is_subfamily() {
        return Err(DynamicsError::NotSubfamily);
    }
    if eps0.is_nan() || eps0 <= 0.0 {
        return Err(DynamicsError::InvalidArgument("eps0 must be positive"));
    }
    let vp = p.v_plus();
    let annulus = k_annulus(p);
    let c2 = superattracting_coefficient(p);

    let mut orbit = vec![z - vp];
    while orbit.last().unwrap().norm() >= eps0 {
        if orbit.len() as u32 > BOETTCHER_MAX_DEPTH {
            return Err(DynamicsError::NotInBasin { z });
        }
        let u = p.deviation(*orbit.last().unwrap());
        if !u.is_finite() || !annulus.contains(vp + u) {
            return Err(DynamicsError::NotInBasin { z });
        }
        orbit.push(u);
    }
    let depth = orbit.len() as u32 - 1;
    let mut w = c2 * orbit[depth as usize];
    let modulus = if w.norm() == 0.0 {
        0.0
    } else {
        (w.norm().ln() / 2f64.powi(depth as i32)).exp()
    };
    let mut reliable = true;
    for u in orbit[..depth as usize].iter().rev() {
        let root = w.sqrt();
        let estimate = c2 * u;
        let keep = (root - estimate).norm();
        let flip = (root + estimate).norm();
        if (keep - flip).abs() < 0.1 * keep.max(flip) {
            reliable = false;
        }
        w = if keep <= flip { root } else { -root };
    }
    Ok(BoettcherValue {
        value: w,
        modulus,
        depth,
        argument_reliable: reliable,
    })
}

/// `Φ_j(a) = φ_a(r(v_minus))` on the component `H_{2j}`.
pub fn phi_j(n: u32, j: u32, a: Complex64) -> Result<BoettcherValue, DynamicsError> {
    if j < 1 || j >= n {
        return Err(DynamicsError::InvalidArgument("component index j must lie in 1..n"));
    }
    let p = MapParams::subfamily(n, a)?;
    phi_of_map(&p)
}

/// `φ_a(r(v_minus))` for any subfamily map whose free critical value is
/// attracted to `v_plus`.
pub fn phi_of_map(p: &MapParams) -> Result<BoettcherValue, DynamicsError> {
    let orbit = Orbiter::new(*p).run(p.v_minus(), PHI_ORBIT_BUDGET);
    if orbit.outcome != Outcome::AttractedToVPlus {
        return Err(DynamicsError::OutsideComponent { a: p.a() });
    }
    boettcher_value(p, p.step(p.v_minus()), DEFAULT_BOETTCHER_EPS)
}

/// Point `Γ_ρ(t)` of the internal ray of angle `t` (in turns) at Böttcher
/// radius `ρ`, by pulling the first-order local inverse at level `m` back
/// `m` times through `r`.
pub fn internal_ray_point(p: &MapParams, t: f64, rho: f64, m: u32) -> Result<Complex64, DynamicsError> {
    if !p.is_subfamily() {
        return Err(DynamicsError::NotSubfamily);
    }
    if !(0.0..1.0).contains(&t) {
        return Err(DynamicsError::InvalidArgument("angle must lie in [0, 1)"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(DynamicsError::InvalidArgument("radius must lie in (0, 1)"));
    }
    if m < 1 {
        return Err(DynamicsError::InvalidArgument("pull-back depth must be at least 1"));
    }
    // Targets φ(z_j) = ρ^{2^j} e^{2πi 2^j t}; doubling t mod 1 is exact.
    let mut targets = Vec::with_capacity(m as usize + 1);
    let (mut radius, mut angle) = (rho, t);
    for _ in 0..=m {
        targets.push(Complex64::from_polar(radius, 2.0 * PI * angle));
        radius *= radius;
        angle = (2.0 * angle).fract();
    }
    if targets[m as usize].norm() < 1e-300 {
        return Err(DynamicsError::InvalidArgument("rho^(2^m) underflows"));
    }
    let c2 = superattracting_coefficient(p);
    let vp = p.v_plus();
    let mut u = targets[m as usize] / c2;
    for target in targets[..m as usize].iter().rev() {
        let prediction = target / c2;
        let mut candidates: Vec<(f64, Complex64)> = p
            .deviation_preimages(u)
            .into_iter()
            .map(|c| ((c - prediction).norm(), c))
            .collect();
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (best, second) = (candidates[0], candidates[1]);
        if second.0 - best.0 < 0.01 * second.0 {
            return Err(DynamicsError::Ambiguous {
                first: vp + best.1,
                second: vp + second.1,
            });
        }
        u = best.1;
    }
    Ok(vp + u)
}
