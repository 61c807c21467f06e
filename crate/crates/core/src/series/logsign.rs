//! Sign/log-magnitude numbers and compensated summation over them.

use std::ops::{Mul, Neg};

/// A real number stored as `sign · exp(ln_mag)`.
///
/// Series coefficients range over hundreds of decades (Γ of arguments in the
/// hundreds), well past what an `f64` holds directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSigned {
    sign: i8,
    ln_mag: f64,
}

impl LogSigned {
    pub const ZERO: Self = Self {
        sign: 0,
        ln_mag: f64::NEG_INFINITY,
    };

    pub const ONE: Self = Self {
        sign: 1,
        ln_mag: 0.0,
    };

    /// `sign` is reduced to `{-1, 0, 1}`.
    pub fn new(sign: i8, ln_mag: f64) -> Self {
        if sign == 0 || ln_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                ln_mag,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        self.ln_mag
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_mag / std::f64::consts::LN_10
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_mag.exp(),
        }
    }

    /// Multiplies by the positive number `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        Self::new(self.sign, self.ln_mag + ln_factor)
    }
}

impl Mul for LogSigned {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.ln_mag + rhs.ln_mag)
    }
}

impl Neg for LogSigned {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Result of summing [`LogSigned`] terms.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    pub total: LogSigned,
    /// `ln Σ|t_i|`
    pub ln_abs_total: f64,
}

impl LogSum {
    /// `Σ|t_i| / |Σ t_i|`; one when no cancellation happened.
    pub fn cancellation(&self) -> f64 {
        if self.ln_abs_total == f64::NEG_INFINITY {
            return 1.0;
        }
        (self.ln_abs_total - self.total.ln_abs()).exp()
    }
}

/// Compensated sum of sign/log terms, rescaled by the largest magnitude.
pub fn log_sum(terms: &[LogSigned]) -> LogSum {
    let peak = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return LogSum {
            total: LogSigned::ZERO,
            ln_abs_total: f64::NEG_INFINITY,
        };
    }
    let mut signed = Neumaier::default();
    let mut abs = Neumaier::default();
    for t in terms.iter().filter(|t| !t.is_zero()) {
        let m = (t.ln_abs() - peak).exp();
        signed.add(f64::from(t.sign()) * m);
        abs.add(m);
    }
    LogSum {
        total: LogSigned::from_f64(signed.total()).scale_ln(peak),
        ln_abs_total: abs.total().ln() + peak,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_absorbing() {
        assert!((LogSigned::ZERO * LogSigned::from_f64(3.0)).is_zero());
        assert_eq!(LogSigned::new(0, 5.0), LogSigned::ZERO);
        assert_eq!(LogSigned::from_f64(0.0).to_f64(), 0.0);
    }

    #[test]
    fn sum_beyond_f64_range() {
        let big = LogSigned::new(1, 2000.0);
        let s = log_sum(&[big, big, -big.scale_ln(-(3.0f64).ln())]);
        let expected = 2000.0 + (2.0 - 1.0 / 3.0f64).ln();
        assert!((s.total.ln_abs() - expected).abs() < 1e-12);
        assert!((s.cancellation() - (7.0 / 3.0) / (5.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_sum_is_zero() {
        let s = log_sum(&[]);
        assert!(s.total.is_zero());
        assert_eq!(s.cancellation(), 1.0);
    }

    #[test]
    fn neumaier_recovers_small_addends() {
        let mut acc = Neumaier::default();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.total(), 2.0);
    }

    proptest! {
        #[test]
        fn f64_round_trip(x in -1e300f64..1e300) {
            let back = LogSigned::from_f64(x).to_f64();
            prop_assert!((back - x).abs() <= 1e-13 * x.abs());
        }

        #[test]
        fn product_matches_f64(a in -1e100f64..1e100, b in -1e100f64..1e100) {
            let p = (LogSigned::from_f64(a) * LogSigned::from_f64(b)).to_f64();
            prop_assert!((p - a * b).abs() <= 1e-12 * (a * b).abs());
        }
    }
}
