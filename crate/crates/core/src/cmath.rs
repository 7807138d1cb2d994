//! Small complex helpers that `num_complex` does not provide with the
//! accuracy or branch conventions this crate relies on.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Principal argument in `(-π, π]`.
///
/// `atan2` returns `-π` for a negative real number carrying a negative-zero
/// imaginary part; that value is folded onto `π` so the negative real axis
/// always has argument `π`.
#[inline]
pub fn principal_arg(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t <= -PI {
        PI
    } else {
        t
    }
}

/// Reduce an angle difference into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut t = theta.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    t
}

/// `z^n` by binary exponentiation. Bitwise reproducible for a given `(z, n)`.
#[inline]
pub fn powu(z: Complex64, mut n: u32) -> Complex64 {
    let mut base = z;
    let mut acc = Complex64::new(1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        n >>= 1;
        if n > 0 {
            base = base * base;
        }
    }
    acc
}

/// Principal power `exp(p · (ln|z| + i·Arg z))` for a real exponent.
pub fn principal_powf(z: Complex64, p: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar((p * r.ln()).exp(), p * principal_arg(z))
}

const SERIES_RADIUS: f64 = 1e-2;

/// `ln(1 + z)` without cancellation for small `z` (principal branch).
pub fn log1p(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Alternating series; ten terms leave a relative error below 1e-20.
        let mut term = z;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..=10 {
            let kf = k as f64;
            if k % 2 == 1 {
                sum += term / kf;
            } else {
                sum -= term / kf;
            }
            term *= z;
        }
        sum
    } else {
        let w = Complex64::new(1.0, 0.0) + z;
        Complex64::new(w.norm().ln(), principal_arg(w))
    }
}

/// `exp(z) - 1` without cancellation for small `z`.
pub fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        let mut term = z;
        let mut sum = z;
        for k in 2..=10 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        z.exp() - 1.0
    }
}
