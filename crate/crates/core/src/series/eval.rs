use super::logsign::{LogSigned, Neumaier};
use super::{SeriesDistribution, SeriesOptions};
use crate::error::{Error, Result};

/// A series evaluation with its error diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Estimated magnitude of the omitted tail.
    pub truncation_error: f64,
    /// Estimated floating-point error of the summed terms.
    pub rounding_error: f64,
    /// `max|term| / |sum|` over the terms actually summed.
    pub cancellation_ratio: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// Raised when `cancellation_ratio` exceeds the flag factor or the
    /// rounding estimate exceeds the error tolerance.
    pub cancellation_flag: bool,
}

impl SeriesValue {
    /// A value known in closed form (no series involved).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            truncation_error: 0.0,
            rounding_error: 0.0,
            cancellation_ratio: 1.0,
            terms_used: 0,
            converged: true,
            cancellation_flag: false,
        }
    }

    /// True when the value should not be trusted.
    pub fn flagged(&self) -> bool {
        self.cancellation_flag || !self.converged
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
            reason: "must be finite and strictly positive",
        });
    }
    Ok(())
}

/// Distribution function at `phi`, clamped to `[0, 1]`.
///
/// `k` is `(E_s/N_0) · g`. Errors with [`Error::PrecisionLoss`] when the
/// largest summed term exceeds the result by more than the guard factor.
pub fn eval_cdf<S: SeriesDistribution + ?Sized>(
    series: &S,
    k: f64,
    phi: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    check_k(k)?;
    if phi.is_nan() || phi < 0.0 {
        return Err(Error::Domain {
            op: "eval_cdf",
            value: phi,
        });
    }
    if phi == 0.0 {
        return Ok(SeriesValue::exact(0.0));
    }
    if phi.is_infinite() {
        return Ok(SeriesValue::exact(1.0));
    }
    let ln_w = series.alpha() / 2.0 * (phi / k).ln();
    let mut v = sum_series(
        series.cdf_coefficients(),
        series.coefficient_errors(),
        series.ln_scale(),
        series.lead(),
        ln_w,
        opts,
        "distribution series",
    )?;
    v.value = v.value.clamp(0.0, 1.0);
    Ok(v)
}

/// Density at `phi > 0`.
pub fn eval_pdf<S: SeriesDistribution + ?Sized>(
    series: &S,
    k: f64,
    phi: f64,
    opts: &SeriesOptions,
) -> Result<SeriesValue> {
    check_k(k)?;
    if !(phi > 0.0) {
        return Err(Error::Domain {
            op: "eval_pdf",
            value: phi,
        });
    }
    if phi.is_infinite() {
        return Ok(SeriesValue::exact(0.0));
    }
    let ln_w = series.alpha() / 2.0 * (phi / k).ln();
    let mut v = sum_series(
        series.pdf_coefficients(),
        series.coefficient_errors(),
        series.ln_scale() - phi.ln(),
        series.lead(),
        ln_w,
        opts,
        "density series",
    )?;
    v.value = v.value.max(0.0);
    Ok(v)
}

/// `e^ln_prefactor · Σ_i coeffs[i] · w^(i + lead)` with `ln w = ln_w`;
/// `errors[i]` is an extra relative error carried by `coeffs[i]`.
///
/// Terms are summed in natural order with Neumaier compensation. The
/// alternating structure pairs neighbouring terms, so sorting by magnitude
/// would not help.
fn sum_series(
    coeffs: &[LogSigned],
    errors: &[f64],
    ln_prefactor: f64,
    lead: f64,
    ln_w: f64,
    opts: &SeriesOptions,
    context: &'static str,
) -> Result<SeriesValue> {
    struct Term {
        sign: f64,
        ln_mag: f64,
        rel_err: f64,
    }
    let terms: Vec<Term> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| {
            let power = (i as f64 + lead) * ln_w;
            Term {
                sign: f64::from(c.sign()),
                ln_mag: ln_prefactor + c.ln_abs() + power,
                // a log-magnitude carries an absolute error of a few ulps of itself
                rel_err: f64::EPSILON * (8.0 + c.ln_abs().abs() + power.abs() + ln_prefactor.abs())
                    + errors.get(i).copied().unwrap_or(0.0),
            }
        })
        .collect();
    let peak = terms
        .iter()
        .map(|t| t.ln_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        if peak == f64::NEG_INFINITY {
            return Ok(SeriesValue::exact(0.0));
        }
        return Err(Error::PrecisionLoss {
            context,
            ratio: f64::INFINITY,
            guard: opts.guard_factor,
        });
    }

    let mut sum = Neumaier::default();
    let mut rounding = 0.0;
    let mut max_term: f64 = 0.0;
    let mut run = 0usize;
    let mut run_mass = 0.0;
    let mut used = 0usize;
    let mut last = 0.0;
    let mut before_last = 0.0;
    let mut stopped = false;
    for t in &terms {
        let mag = (t.ln_mag - peak).exp();
        sum.add(t.sign * mag);
        rounding += mag * t.rel_err;
        max_term = max_term.max(mag);
        used += 1;
        before_last = last;
        last = mag;
        if mag < opts.stop_tolerance * sum.total().abs() {
            run += 1;
            run_mass += mag;
            if run >= opts.stop_run {
                stopped = true;
                break;
            }
        } else {
            run = 0;
            run_mass = 0.0;
        }
    }

    let total = sum.total();
    let ratio = if total > 0.0 { max_term / total } else { f64::INFINITY };
    if !(ratio <= opts.guard_factor) {
        return Err(Error::PrecisionLoss {
            context,
            ratio,
            guard: opts.guard_factor,
        });
    }

    let truncation = if stopped {
        run_mass
    } else if used >= 2 && last < before_last {
        let r = last / before_last;
        last * r / (1.0 - r)
    } else {
        f64::INFINITY
    };

    let scale = peak.exp();
    let value = total * scale;
    let truncation_error = truncation * scale;
    let rounding_error = (rounding + f64::EPSILON * total.abs()) * scale;
    Ok(SeriesValue {
        value,
        truncation_error,
        rounding_error,
        cancellation_ratio: ratio,
        terms_used: used,
        converged: truncation_error <= opts.convergence_tolerance * value.abs(),
        cancellation_flag: ratio > opts.flag_factor
            || rounding_error > opts.error_tolerance * value.abs().max(1.0),
    })
}
