//! The family `R(z) = z^n + a/z^n + b` and its fixed-critical-point subfamily.
//!
//! Every root in this crate comes from one branch convention: `Arg` takes
//! values in `(-π, π]`, with `π` on the negative real axis.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::cmath::{self, powu, principal_arg};

/// Points closer to the origin than this are treated as the pole.
pub const POLE_RADIUS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MapError {
    #[error("coefficient must be nonzero")]
    ZeroCoefficient,
    #[error("root degree must be at least 1")]
    ZeroDegree,
    #[error("map half-degree must be at least 3, got {0}")]
    DegreeTooSmall(u32),
    #[error("point is at the pole z = 0")]
    Pole,
    #[error("critical point index {k} out of range for n = {n}")]
    IndexOutOfRange { n: u32, k: u32 },
}

/// Which slice of the family a map belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    General,
    /// `b = b_{n,0}(a)`, so that `v_plus` is a super-attracting fixed point.
    FixedCritSubfamily,
}

/// `|a|^{1/d} · e^{i·Arg(a)/d}`.
pub fn principal_root(a: Complex64, d: u32) -> Result<Complex64, MapError> {
    if d == 0 {
        return Err(MapError::ZeroDegree);
    }
    if a == Complex64::new(0.0, 0.0) {
        return Err(MapError::ZeroCoefficient);
    }
    let d = d as f64;
    Ok(Complex64::from_polar(
        a.norm().powf(1.0 / d),
        principal_arg(a) / d,
    ))
}

/// The additive parameter that makes `v_plus` equal to the principal critical
/// point: `a^{1/2n} - 2√a`.
pub fn subfamily_b(n: u32, a: Complex64) -> Result<Complex64, MapError> {
    if n < 3 {
        return Err(MapError::DegreeTooSmall(n));
    }
    Ok(principal_root(a, 2 * n)? - 2.0 * principal_root(a, 2)?)
}

/// One map of the family together with its cached roots and critical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapParams {
    n: u32,
    a: Complex64,
    b: Complex64,
    family: Family,
    sqrt_a: Complex64,
    root_2n: Complex64,
}

impl MapParams {
    pub fn general(n: u32, a: Complex64, b: Complex64) -> Result<Self, MapError> {
        if n < 3 {
            return Err(MapError::DegreeTooSmall(n));
        }
        Ok(Self {
            n,
            a,
            b,
            family: Family::General,
            sqrt_a: principal_root(a, 2)?,
            root_2n: principal_root(a, 2 * n)?,
        })
    }

    /// The map `r_{n,a}` with `b = b_{n,0}(a)`.
    pub fn subfamily(n: u32, a: Complex64) -> Result<Self, MapError> {
        let b = subfamily_b(n, a)?;
        Ok(Self {
            family: Family::FixedCritSubfamily,
            b,
            ..Self::general(n, a, b)?
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_subfamily(&self) -> bool {
        self.family == Family::FixedCritSubfamily
    }

    /// Principal square root of `a`.
    pub fn sqrt_a(&self) -> Complex64 {
        self.sqrt_a
    }

    /// Principal `2n`-th root of `a`, i.e. the critical point `w_0`.
    pub fn principal_critical_point(&self) -> Complex64 {
        self.root_2n
    }

    pub fn v_plus(&self) -> Complex64 {
        self.b + 2.0 * self.sqrt_a
    }

    pub fn v_minus(&self) -> Complex64 {
        self.b - 2.0 * self.sqrt_a
    }

    /// `ψ = Arg(a)`.
    pub fn psi(&self) -> f64 {
        principal_arg(self.a)
    }

    /// Evaluate the map, reporting the pole at `z = 0`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, MapError> {
        if z.norm() < POLE_RADIUS {
            return Err(MapError::Pole);
        }
        Ok(self.step(z))
    }

    /// Evaluate the map without the pole check. Used by the iteration loops,
    /// which bail out long before an orbit can approach the pole.
    #[inline]
    pub fn step(&self, z: Complex64) -> Complex64 {
        let zn = powu(z, self.n);
        zn + self.a / zn + self.b
    }

    /// `R'(z) = n(z^{2n} - a) / z^{n+1}`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let zn = powu(z, self.n);
        let n = self.n as f64;
        n * (zn * zn - self.a) / (zn * z)
    }

    /// The `k`-th critical point `|a|^{1/2n} e^{i(ψ+2kπ)/2n}`.
    pub fn critical_point(&self, k: u32) -> Result<Complex64, MapError> {
        if k >= 2 * self.n {
            return Err(MapError::IndexOutOfRange { n: self.n, k });
        }
        let two_n = 2.0 * self.n as f64;
        let angle = (self.psi() + 2.0 * k as f64 * std::f64::consts::PI) / two_n;
        Ok(Complex64::from_polar(self.root_2n.norm(), angle))
    }

    pub fn critical_set(&self) -> CriticalSet {
        let points = (0..2 * self.n)
            .map(|k| self.critical_point(k).expect("index in range"))
            .collect();
        CriticalSet {
            points,
            v_plus: self.v_plus(),
            v_minus: self.v_minus(),
            psi: self.psi(),
        }
    }

    /// The involution `h_a(z) = a^{1/n} / z`, under which the map is symmetric.
    pub fn involution(&self, z: Complex64) -> Result<Complex64, MapError> {
        if z.norm() < POLE_RADIUS {
            return Err(MapError::Pole);
        }
        Ok(principal_root(self.a, self.n)? / z)
    }

    /// `r(v_plus + u) - v_plus` for the subfamily, evaluated without the
    /// cancellation that the direct difference suffers near `v_plus`.
    ///
    /// With `x = u / v_plus` and `P = (1+x)^n` this is
    /// `v_plus^n (P - 1)^2 / P`, which uses `v_plus^{2n} = a`.
    pub fn deviation(&self, u: Complex64) -> Complex64 {
        debug_assert!(self.is_subfamily());
        let vp = self.root_2n;
        let x = u / vp;
        let one_plus = Complex64::new(1.0, 0.0) + x;
        let p_minus_one = if x.norm() < 0.5 {
            // (1+x)^n - 1 = x · Σ_{k<n} (1+x)^k
            let mut pow = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for _ in 0..self.n {
                sum += pow;
                pow *= one_plus;
            }
            x * sum
        } else {
            powu(one_plus, self.n) - 1.0
        };
        let p = Complex64::new(1.0, 0.0) + p_minus_one;
        powu(vp, self.n) * p_minus_one * p_minus_one / p
    }

    /// All `2n` solutions `u` of `deviation(u) = w`, i.e. the preimages of
    /// `v_plus + w` written relative to `v_plus`. The first two entries are
    /// the pair that tends to `0` as `w → 0`.
    pub fn deviation_preimages(&self, w: Complex64) -> Vec<Complex64> {
        debug_assert!(self.is_subfamily());
        let vp = self.root_2n;
        let omega = w / powu(vp, self.n);
        let s = (omega * (Complex64::new(1.0, 0.0) + omega / 4.0)).sqrt();
        let n = self.n as f64;
        let mut near = Vec::with_capacity(2);
        let mut far = Vec::with_capacity(2 * self.n as usize);
        for p_minus_one in [omega / 2.0 + s, omega / 2.0 - s] {
            // Principal n-th root of P written as 1 + x0.
            let x0 = cmath::expm1(cmath::log1p(p_minus_one) / n);
            near.push(vp * x0);
            for k in 1..self.n {
                let zeta = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n);
                far.push(vp * ((Complex64::new(1.0, 0.0) + x0) * zeta - 1.0));
            }
        }
        near.extend(far);
        near
    }
}

/// The `2n` critical points and the two critical values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet {
    pub points: Vec<Complex64>,
    pub v_plus: Complex64,
    pub v_minus: Complex64,
    pub psi: f64,
}
