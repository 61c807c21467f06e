//! Double-double numbers with an unbounded binary exponent.
//!
//! The antenna-selection recurrence cancels by a factor that grows
//! geometrically with the coefficient index, so its rounding errors need
//! roughly 32 significant digits; the coefficients themselves span far more
//! decades than an `f64` exponent covers.

use std::ops::{Add, Mul, Neg, Sub};

use super::logsign::LogSigned;

/// Ratio of double-double to `f64` unit roundoff, `2^-51`.
pub const PRECISION_GAIN: f64 = 4.440_892_098_500_626e-16;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `x = m · 2^e` with `0.5 <= |m| < 1`; zero maps to `(0, 0)`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, biased - 1022)
}

/// `x · 2^n` for moderate `n`.
fn ldexp(x: f64, n: i64) -> f64 {
    let mut x = x;
    let mut n = n;
    while n > 1000 {
        x *= 2f64.powi(1000);
        n -= 1000;
    }
    while n < -1000 {
        x *= 2f64.powi(-1000);
        n += 1000;
    }
    x * 2f64.powi(n as i32)
}

/// `(hi + lo) · 2^exp` with `0.5 <= |hi| < 1` unless zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtDouble {
    hi: f64,
    lo: f64,
    exp: i64,
}

impl ExtDouble {
    pub const ZERO: Self = Self {
        hi: 0.0,
        lo: 0.0,
        exp: 0,
    };

    fn normalized(hi: f64, lo: f64, exp: i64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        if hi == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(hi);
        Self {
            hi: m,
            lo: ldexp(lo, -e),
            exp: exp + e,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::normalized(x, 0.0, 0)
    }

    pub fn from_log(x: LogSigned) -> Self {
        if x.is_zero() {
            return Self::ZERO;
        }
        let ln2 = std::f64::consts::LN_2;
        let e = (x.ln_abs() / ln2).floor();
        let frac = x.ln_abs() - e * ln2;
        Self::normalized(f64::from(x.sign()) * frac.exp(), 0.0, e as i64)
    }

    pub fn to_log(self) -> LogSigned {
        if self.hi == 0.0 {
            return LogSigned::ZERO;
        }
        let ln = self.hi.abs().ln() + self.lo / self.hi + self.exp as f64 * std::f64::consts::LN_2;
        LogSigned::new(if self.hi > 0.0 { 1 } else { -1 }, ln)
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.hi + self.lo, self.exp)
    }

    /// Drops the low word, leaving plain `f64` precision.
    pub fn rounded(self) -> Self {
        Self::normalized(self.hi, 0.0, self.exp)
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::from_f64(1.0);
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Reciprocal by two Newton-style correction steps on the f64 quotient.
    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        let one = Self::from_f64(1.0);
        // self = (hi + lo) 2^exp; work on the mantissa pair and negate exp
        let b = Self {
            hi: self.hi,
            lo: self.lo,
            exp: 0,
        };
        let q1 = 1.0 / b.hi;
        let r = one - b * Self::from_f64(q1);
        let q2 = r.to_f64() / b.hi;
        let r = r - b * Self::from_f64(q2);
        let q3 = r.to_f64() / b.hi;
        let q = Self::from_f64(q1) + Self::from_f64(q2) + Self::from_f64(q3);
        Self { exp: q.exp - self.exp, ..q }
    }
}

impl Mul for ExtDouble {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        Self::normalized(p, e, self.exp + rhs.exp)
    }
}

impl Add for ExtDouble {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = big.exp - small.exp;
        if shift > 110 {
            return big;
        }
        let (bh, bl) = (ldexp(small.hi, -shift), ldexp(small.lo, -shift));
        let (s, mut e) = two_sum(big.hi, bh);
        let (t, f) = two_sum(big.lo, bl);
        e += t;
        let (s, mut e) = quick_two_sum(s, e);
        e += f;
        Self::normalized(s, e, big.exp)
    }
}

impl Neg for ExtDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
            exp: self.exp,
        }
    }
}

impl Sub for ExtDouble {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}
