//! Closed-form and implicitly defined loci of the subfamily: component
//! centers, spines, escape annuli, the critical-value ellipse, the polar
//! rectangles around critical points and the boundary curves of the `W_k`
//! parameter regions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cmath::{principal_arg, wrap_angle};
use crate::maps::{principal_root, MapError, MapParams};

/// Cap on fixed-point iterations for the implicit curves.
pub const FIXED_POINT_MAX_ITER: usize = 200;
/// Successive-iterate tolerance for the implicit curves.
pub const FIXED_POINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("center index k = {k} must lie in 1..={max}")]
    DegenerateCenter { k: u32, max: u32 },
    #[error("fixed-point iteration did not converge; last iterate {last}")]
    NoConvergence { last: Complex64 },
    /// The fixed point was found, but `(a^{1/2n} - ξ)/4` is not the principal
    /// square root of it, so the point does not satisfy the curve's defining
    /// property for `v_minus`.
    #[error("fixed point {a} lies on the non-principal square-root branch")]
    OffBranch { a: Complex64 },
    #[error("parameter {0} outside the curve's domain")]
    ParameterOutOfRange(f64),
}

/// Order of a spine: finite `n` or the limiting cardioid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpineOrder {
    Finite(u32),
    Infinite,
}

/// `a_k = ((1 - e^{ikπ/n}) / 4)^{2n/(n-1)}` with the principal power.
///
/// At `a_k` the free critical value `v_minus` is the critical point `w_k`:
/// fixed when `k` is odd, mapped onto `v_plus` when `k` is even.
pub fn center_a_k(n: u32, k: u32) -> Result<Complex64, GeometryError> {
    if n < 3 {
        return Err(MapError::DegreeTooSmall(n).into());
    }
    if k == 0 || k >= 2 * n {
        return Err(GeometryError::DegenerateCenter { k, max: 2 * n - 1 });
    }
    // Principal power of (1 - e^{ikπ/n})/4 = (sin(kπ/2n)/2) e^{i(kπ/n - π)/2},
    // whose argument already lies in (-π/2, π/2).
    let (nf, kf) = (n as f64, k as f64);
    let modulus = ((kf * PI / (2.0 * nf)).sin() / 2.0).powf(2.0 * nf / (nf - 1.0));
    let mut arg = PI * (kf - nf) / (nf - 1.0);
    if arg <= -PI {
        arg += 2.0 * PI;
    }
    Ok(Complex64::from_polar(modulus, arg))
}

/// Which relation holds at the center `a_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CenterRelation {
    /// `r(v_minus) = v_minus` (odd `k`).
    VMinusFixed,
    /// `r(v_minus) = v_plus` (even `k`).
    VMinusToVPlus,
}

impl CenterRelation {
    pub fn for_index(k: u32) -> Self {
        if k % 2 == 1 {
            CenterRelation::VMinusFixed
        } else {
            CenterRelation::VMinusToVPlus
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CenterRelation::VMinusFixed => "v- fixed",
            CenterRelation::VMinusToVPlus => "v- -> v+",
        }
    }
}

/// One center together with the residual of its defining relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterRecord {
    pub k: u32,
    pub a: Complex64,
    pub relation: CenterRelation,
    /// `|r(v_minus) - target| / (1 + |target|)`.
    pub residual: f64,
}

pub fn center_record(n: u32, k: u32) -> Result<CenterRecord, GeometryError> {
    let a = center_a_k(n, k)?;
    let p = MapParams::subfamily(n, a)?;
    let relation = CenterRelation::for_index(k);
    let target = match relation {
        CenterRelation::VMinusFixed => p.v_minus(),
        CenterRelation::VMinusToVPlus => p.v_plus(),
    };
    let image = p.eval(p.v_minus())?;
    Ok(CenterRecord {
        k,
        a,
        relation,
        residual: (image - target).norm() / (1.0 + target.norm()),
    })
}

/// All `2n - 1` centers.
pub fn centers(n: u32) -> Result<Vec<CenterRecord>, GeometryError> {
    (1..2 * n).map(|k| center_record(n, k)).collect()
}

/// Solve `a = ((a^{1/2n} - ξ(a)) / 4)^2` by plain fixed-point iteration and
/// check that the solution is on the principal square-root branch, which is
/// what makes `v_minus(a) = ξ(a)`.
fn solve_v_minus_curve<F>(n: u32, seed: Complex64, xi: F) -> Result<Complex64, GeometryError>
where
    F: Fn(Complex64) -> Complex64,
{
    // The iteration needs a ≠ 0 to form roots; a tiny positive seed is pushed
    // away from the origin by the map itself.
    let mut a = if seed.norm() < 1e-10 {
        Complex64::new(1e-8, 0.0)
    } else {
        seed
    };
    for _ in 0..FIXED_POINT_MAX_ITER {
        let root = principal_root(a, 2 * n)?;
        let half = (root - xi(a)) / 4.0;
        let next = half * half;
        if next.norm() < 1e-300 {
            return Err(GeometryError::NoConvergence { last: next });
        }
        if (next - a).norm() <= FIXED_POINT_TOL * (1.0 + a.norm()) {
            let root = principal_root(next, 2 * n)?;
            let half = (root - xi(next)) / 4.0;
            let principal = principal_root(next, 2)?;
            if (half - principal).norm() > (half + principal).norm() {
                return Err(GeometryError::OffBranch { a: next });
            }
            return Ok(next);
        }
        a = next;
    }
    Err(GeometryError::NoConvergence { last: a })
}

/// A point of the spine `S_n` (where `|v_minus| = 1`) or of the cardioid
/// `S_∞ = (1 + e^{iθ})^2 / 16`.
pub fn spine_point(order: SpineOrder, theta: f64) -> Result<Complex64, GeometryError> {
    if !(0.0..=2.0 * PI).contains(&theta) {
        return Err(GeometryError::ParameterOutOfRange(theta));
    }
    let e = Complex64::from_polar(1.0, theta);
    let cardioid = (Complex64::new(1.0, 0.0) + e) * (Complex64::new(1.0, 0.0) + e) / 16.0;
    match order {
        SpineOrder::Infinite => Ok(cardioid),
        SpineOrder::Finite(n) => {
            if n < 3 {
                return Err(MapError::DegreeTooSmall(n).into());
            }
            solve_v_minus_curve(n, cardioid, |_| -e)
        }
    }
}

/// One sample of a spine polyline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpineSample {
    pub theta: f64,
    pub a: Complex64,
}

/// `samples` equally spaced angles in `[0, 2π)`. For finite `n` the angles
/// with no principal-branch solution are omitted: either the fixed point
/// falls on the other square-root branch, or the iteration settles into a
/// two-cycle across the cut of `a^{1/2n}`.
pub fn spine_polyline(order: SpineOrder, samples: usize) -> Result<Vec<SpineSample>, GeometryError> {
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let theta = 2.0 * PI * i as f64 / samples as f64;
        match spine_point(order, theta) {
            Ok(a) => out.push(SpineSample { theta, a }),
            Err(GeometryError::OffBranch { .. } | GeometryError::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Annulus `{ inner < |z - center| < outer }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusBounds {
    pub inner: f64,
    pub outer: f64,
    pub center: Complex64,
}

impl AnnulusBounds {
    pub fn contains(&self, z: Complex64) -> bool {
        let r = (z - self.center).norm();
        self.inner < r && r < self.outer
    }
}

/// Annulus `A(t, s)` containing the filled Julia set.
///
/// In general `s = max{4, |b|, |a|}` and `t = |a|^{1/n}/s`; for the subfamily
/// with `|a| < 1` the tighter `A(|a|^{1/n}/2, 2)` applies.
pub fn k_annulus(p: &MapParams) -> AnnulusBounds {
    let a_abs = p.a().norm();
    let a_root_n = a_abs.powf(1.0 / p.n() as f64);
    let origin = Complex64::new(0.0, 0.0);
    if p.is_subfamily() && a_abs < 1.0 {
        return AnnulusBounds {
            inner: a_root_n / 2.0,
            outer: 2.0,
            center: origin,
        };
    }
    let s = 4.0f64.max(p.b().norm()).max(a_abs);
    AnnulusBounds {
        inner: a_root_n / s,
        outer: s,
        center: origin,
    }
}

/// The annulus around `1/8` that contains the boundedness locus for large `n`,
/// with the radii used by the empirical checks.
pub fn m_annulus(inner: f64, outer: f64) -> AnnulusBounds {
    AnnulusBounds {
        inner,
        outer,
        center: Complex64::new(0.125, 0.0),
    }
}

/// `h_n(x) = √(4x + x^{1/n})`, the bound on `|b|` as a function of `|a|`.
pub fn h_n(n: u32, x: f64) -> f64 {
    (4.0 * x + x.powf(1.0 / n as f64)).sqrt()
}

/// Lower and upper bounds on `|b_{n,0}(a)|` in terms of `|a|`.
pub fn subfamily_b_bounds(n: u32, a_abs: f64) -> (f64, f64) {
    let lower = (a_abs.powf(1.0 / (2 * n) as f64) - 2.0 * a_abs.sqrt()).abs();
    (lower, h_n(n, a_abs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    pub n: u32,
    /// Solves `h_n(q) = 4`.
    pub q_n: f64,
    /// Solves `h_n(ρ) = ρ`.
    pub rho_n: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= 0.0, "root not bracketed");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if (f_mid <= 0.0) == (f_lo <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn regime_thresholds(n: u32) -> Result<RegimeThresholds, MapError> {
    if n < 3 {
        return Err(MapError::DegreeTooSmall(n));
    }
    let q_n = bisect(|x| h_n(n, x) - 4.0, 3.6, 4.0, 1e-12);
    let rho_n = bisect(|x| h_n(n, x) - x, 4.0, 4.4, 1e-12);
    Ok(RegimeThresholds { n, q_n, rho_n })
}

/// The ellipse whose two halves are the images of the polar rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseSpec {
    pub center: Complex64,
    pub rotation: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub foci: (Complex64, Complex64),
}

impl EllipseSpec {
    /// Semi-axes `2^n ± |a|/2^n`; these are the ones whose focal distance is
    /// `2√|a|`, so the foci land on the critical values.
    pub fn for_map(p: &MapParams) -> Self {
        let two_n = 2f64.powi(p.n() as i32);
        let a_abs = p.a().norm();
        EllipseSpec {
            center: p.b(),
            rotation: p.psi() / 2.0,
            semi_major: two_n + a_abs / two_n,
            semi_minor: two_n - a_abs / two_n,
            foci: (p.v_plus(), p.v_minus()),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.foci.0).norm() + (z - self.foci.1).norm() < 2.0 * self.semi_major
    }

    /// Point at parameter `θ` of the rotated, shifted boundary.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        let local = Complex64::new(self.semi_major * theta.cos(), self.semi_minor * theta.sin());
        self.center + local * Complex64::from_polar(1.0, self.rotation)
    }
}

pub fn ellipse_contains(p: &MapParams, z: Complex64) -> bool {
    EllipseSpec::for_map(p).contains(z)
}

/// `g_n(x) = x^{2n} - 2^{n-1} x + 2^n (2^n - 3)`, positive on `(0, 4]`.
pub fn ellipse_margin_poly(n: u32, x: f64) -> f64 {
    let two_n = 2f64.powi(n as i32);
    x.powi(2 * n as i32) - two_n / 2.0 * x + two_n * (two_n - 3.0)
}

/// The critical point `(2^{n-2}/n)^{1/(2n-1)}` of `g_n`.
pub fn ellipse_margin_minimizer(n: u32) -> f64 {
    (2f64.powi(n as i32 - 2) / n as f64).powf(1.0 / (2 * n - 1) as f64)
}

/// Upper bound on `|v_minus|` when `|a - 1/8| < 1/32`:
/// `|√(5/2) e^{i19π/20} + (3/32)^{1/2n} e^{iπ/20n}|`.
pub fn v_minus_bound_near_eighth(n: u32) -> f64 {
    let left = Complex64::from_polar((2.5f64).sqrt(), 19.0 * PI / 20.0);
    let right = Complex64::from_polar(
        (3.0f64 / 32.0).powf(1.0 / (2 * n) as f64),
        PI / (20.0 * n as f64),
    );
    (left + right).norm()
}

/// Limit of [`v_minus_bound_near_eighth`] as `n → ∞`.
pub fn v_minus_bound_near_eighth_limit() -> f64 {
    let left = Complex64::from_polar((2.5f64).sqrt(), 19.0 * PI / 20.0);
    (left + 1.0).norm()
}

/// The polar rectangle `U'_{a,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarRegion {
    pub k: u32,
    pub modulus_lo: f64,
    pub modulus_hi: f64,
    pub arg_center: f64,
    pub arg_half_width: f64,
}

impl PolarRegion {
    pub fn new(n: u32, a: Complex64, k: u32) -> Result<Self, MapError> {
        if a == Complex64::new(0.0, 0.0) {
            return Err(MapError::ZeroCoefficient);
        }
        if k >= 2 * n {
            return Err(MapError::IndexOutOfRange { n, k });
        }
        let two_n = 2.0 * n as f64;
        Ok(PolarRegion {
            k,
            modulus_lo: a.norm().powf(1.0 / n as f64) / 2.0,
            modulus_hi: 2.0,
            arg_center: (principal_arg(a) + 2.0 * k as f64 * PI) / two_n,
            arg_half_width: PI / two_n,
        })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        if !(self.modulus_lo < r && r < self.modulus_hi) {
            return false;
        }
        wrap_angle(principal_arg(z) - self.arg_center).abs() < self.arg_half_width
    }
}

pub fn u_prime_contains(n: u32, a: Complex64, k: u32, z: Complex64) -> Result<bool, MapError> {
    Ok(PolarRegion::new(n, a, k)?.contains(z))
}

/// The four boundary curves of `W_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WCurve {
    /// `|v_minus| = |a|^{1/n}/2`, parameterized by `θ ∈ [0, 2π]`.
    Beta,
    /// `|v_minus| = 2`, parameterized by `θ ∈ [0, 2π]`.
    Tau,
    /// `Arg v_minus = Arg w_k + π/2n`, parameterized by modulus `x ∈ (0, 2]`.
    RhoPlus,
    /// `Arg v_minus = Arg w_k - π/2n`, parameterized by modulus `x ∈ (0, 2]`.
    RhoMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WBoundarySpec {
    pub k: u32,
    pub curve: WCurve,
}

impl WBoundarySpec {
    pub fn domain(&self) -> (f64, f64) {
        match self.curve {
            WCurve::Beta | WCurve::Tau => (0.0, 2.0 * PI),
            WCurve::RhoPlus | WCurve::RhoMinus => (0.0, 2.0),
        }
    }

    /// How far `a` is from satisfying the curve's defining property.
    pub fn residual(&self, n: u32, a: Complex64) -> Result<f64, MapError> {
        let p = MapParams::subfamily(n, a)?;
        let vm = p.v_minus();
        Ok(match self.curve {
            WCurve::Beta => (vm.norm() - a.norm().powf(1.0 / n as f64) / 2.0).abs(),
            WCurve::Tau => (vm.norm() - 2.0).abs(),
            WCurve::RhoPlus | WCurve::RhoMinus => {
                let sign = if self.curve == WCurve::RhoPlus { 1.0 } else { -1.0 };
                let wk = p.critical_point(self.k % (2 * n))?;
                let target = principal_arg(wk) + sign * PI / (2.0 * n as f64);
                wrap_angle(principal_arg(vm) - target).abs()
            }
        })
    }
}

/// Solve for the point of a `W_k` boundary curve at the given parameter.
pub fn w_boundary_point(spec: WBoundarySpec, n: u32, param: f64) -> Result<Complex64, GeometryError> {
    if n < 3 {
        return Err(MapError::DegreeTooSmall(n).into());
    }
    let (lo, hi) = spec.domain();
    let in_domain = match spec.curve {
        WCurve::Beta | WCurve::Tau => (lo..=hi).contains(&param),
        WCurve::RhoPlus | WCurve::RhoMinus => lo < param && param <= hi,
    };
    if !in_domain {
        return Err(GeometryError::ParameterOutOfRange(param));
    }
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    let half_width = PI / (2.0 * nf);
    match spec.curve {
        WCurve::Beta => {
            let e = Complex64::from_polar(1.0, param);
            let seed = (one - e / 2.0) * (one - e / 2.0) / 16.0;
            solve_v_minus_curve(n, seed, |a| e * (a.norm().powf(1.0 / nf) / 2.0))
        }
        WCurve::Tau => {
            let e = Complex64::from_polar(2.0, param);
            solve_v_minus_curve(n, (one - e) * (one - e) / 16.0, |_| e)
        }
        WCurve::RhoPlus | WCurve::RhoMinus => {
            let sign = if spec.curve == WCurve::RhoPlus { 1.0 } else { -1.0 };
            let k = spec.k as f64;
            let arg_wk = |a: Complex64| {
                wrap_angle((principal_arg(a) + 2.0 * k * PI) / (2.0 * nf))
            };
            let seed_xi = Complex64::from_polar(param, wrap_angle(k * PI / nf) + sign * half_width);
            let seed = (one - seed_xi) * (one - seed_xi) / 16.0;
            solve_v_minus_curve(n, seed, |a| {
                Complex64::from_polar(param, arg_wk(a) + sign * half_width)
            })
        }
    }
}
