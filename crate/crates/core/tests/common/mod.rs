//! Fixed-point reals and complexes with 256 fractional bits, used as an
//! independent high-precision reference.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const FRAC_BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct R(pub BigInt);

impl R {
    pub fn zero() -> R {
        R(BigInt::zero())
    }

    pub fn int(v: i64) -> R {
        R(BigInt::from(v) << FRAC_BITS)
    }

    pub fn ratio(p: i64, q: i64) -> R {
        R((BigInt::from(p) << FRAC_BITS) / BigInt::from(q))
    }

    /// Exact value of a double.
    pub fn from_f64(x: f64) -> R {
        assert!(x.is_finite());
        if x == 0.0 {
            return R::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = e + FRAC_BITS as i64;
        R(if shift >= 0 { m << shift as u32 } else { m >> (-shift) as u32 })
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits before converting so the scale factor is exact.
        let bits = self.0.bits() as i64;
        let drop = (bits - 64).max(0);
        let top = (&self.0 >> drop as u32).to_f64().unwrap();
        top * 2f64.powi(drop as i32 - FRAC_BITS as i32)
    }

    pub fn abs(&self) -> R {
        R(self.0.abs())
    }

    pub fn sqrt(&self) -> R {
        assert!(!self.0.is_negative());
        R((&self.0 << FRAC_BITS).sqrt())
    }

    /// Real `d`-th root of a nonnegative value.
    pub fn root(&self, d: u32) -> R {
        assert!(!self.0.is_negative());
        R((&self.0 << (FRAC_BITS * (d - 1))).nth_root(d))
    }

    pub fn powu(&self, n: u32) -> R {
        let mut acc = R::int(1);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `self^(p/q)` for a positive base.
    pub fn pow_ratio(&self, p: u32, q: u32) -> R {
        self.powu(p).root(q)
    }
}

impl Add for &R {
    type Output = R;
    fn add(self, o: &R) -> R {
        R(&self.0 + &o.0)
    }
}

impl Sub for &R {
    type Output = R;
    fn sub(self, o: &R) -> R {
        R(&self.0 - &o.0)
    }
}

impl Mul for &R {
    type Output = R;
    fn mul(self, o: &R) -> R {
        R((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Div for &R {
    type Output = R;
    fn div(self, o: &R) -> R {
        R((&self.0 << FRAC_BITS) / &o.0)
    }
}

impl Neg for &R {
    type Output = R;
    fn neg(self) -> R {
        R(-&self.0)
    }
}

fn atan_inv(x: i64) -> R {
    // atan(1/x) = Σ (-1)^k / ((2k+1) x^{2k+1})
    let mut power = R::ratio(1, x);
    let x2 = BigInt::from(x * x);
    let mut sum = R::zero();
    let mut k = 0i64;
    while !power.0.is_zero() {
        let term = R(&power.0 / BigInt::from(2 * k + 1));
        sum = if k % 2 == 0 { &sum + &term } else { &sum - &term };
        power = R(&power.0 / &x2);
        k += 1;
    }
    sum
}

pub fn pi() -> R {
    let a = atan_inv(5);
    let b = atan_inv(239);
    R(a.0 * 16 - b.0 * 4)
}

/// `(cos θ, sin θ)` by Taylor series; intended for `|θ| ≤ 8`.
pub fn cos_sin(theta: &R) -> (R, R) {
    let mut term = R::int(1);
    let mut cos = R::zero();
    let mut sin = R::zero();
    let mut k = 0i64;
    while !term.0.is_zero() || k < 4 {
        match k % 4 {
            0 => cos = &cos + &term,
            1 => sin = &sin + &term,
            2 => cos = &cos - &term,
            _ => sin = &sin - &term,
        }
        k += 1;
        term = R((&term * theta).0 / BigInt::from(k));
    }
    (cos, sin)
}

#[derive(Clone, Debug, PartialEq)]
pub struct C {
    pub re: R,
    pub im: R,
}

impl C {
    pub fn new(re: R, im: R) -> C {
        C { re, im }
    }

    pub fn real(re: R) -> C {
        C { re, im: R::zero() }
    }

    pub fn from_f64(z: num_complex::Complex64) -> C {
        C::new(R::from_f64(z.re), R::from_f64(z.im))
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn polar(r: &R, theta: &R) -> C {
        let (c, s) = cos_sin(theta);
        C::new(r * &c, r * &s)
    }

    pub fn norm_sqr(&self) -> R {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn norm(&self) -> R {
        self.norm_sqr().sqrt()
    }

    pub fn powu(&self, n: u32) -> C {
        let mut acc = C::real(R::int(1));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn inv(&self) -> C {
        let d = self.norm_sqr();
        C::new(&self.re / &d, &(-&self.im) / &d)
    }
}

impl Add for &C {
    type Output = C;
    fn add(self, o: &C) -> C {
        C::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &C {
    type Output = C;
    fn sub(self, o: &C) -> C {
        C::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &C {
    type Output = C;
    fn mul(self, o: &C) -> C {
        C::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }
}

impl Div for &C {
    type Output = C;
    fn div(self, o: &C) -> C {
        let d = o.norm_sqr();
        let re = &(&self.re * &o.re) + &(&self.im * &o.im);
        let im = &(&self.im * &o.re) - &(&self.re * &o.im);
        C::new(&re / &d, &im / &d)
    }
}

/// Distance between a high-precision value and a double complex, as a double.
pub fn dist(hp: &C, z: num_complex::Complex64) -> f64 {
    (hp - &C::from_f64(z)).norm().to_f64()
}

/// `R(z) = z^n + a/z^n + b` at full precision.
pub fn eval(n: u32, a: &C, b: &C, z: &C) -> C {
    let zn = z.powu(n);
    &(&zn + &(a / &zn)) + b
}
