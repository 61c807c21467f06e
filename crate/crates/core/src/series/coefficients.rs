use std::io::Write;

use statrs::function::gamma::ln_gamma;

use super::extended::{ExtDouble, PRECISION_GAIN};
use super::logsign::{log_sum, LogSigned};
use super::{Combiner, SeriesDistribution, SeriesOptions};
use crate::error::{Error, Result};
use crate::fading::AlphaMuParams;

fn check_count(name: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::InvalidParameter {
            name,
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(())
}

fn check_magnitude(c: LogSigned, opts: &SeriesOptions, context: &'static str) -> Result<LogSigned> {
    let ln = c.ln_abs();
    if ln.is_nan() || (!c.is_zero() && ln.abs() > opts.max_ln_magnitude) {
        return Err(Error::PrecisionLoss {
            context,
            ratio: ln.abs(),
            guard: opts.max_ln_magnitude,
        });
    }
    Ok(c)
}

fn alternating(i: usize) -> i8 {
    if i.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Γ-normalized coefficients `û_j = Γ(P_j) (-μ ĥ^-α)^j / j!` of the density
/// of `|h|^ϑ`, for `j = 0 .. opts.max_terms`.
pub fn build_normalized_series(
    params: &AlphaMuParams,
    combiner: Combiner,
    opts: &SeriesOptions,
) -> Result<Vec<LogSigned>> {
    check_count("max_terms", opts.max_terms)?;
    let (alpha, mu) = (params.alpha(), params.mu());
    let theta = combiner.exponent();
    let ln_rate = mu.ln() - alpha * params.h_hat().ln();
    (0..opts.max_terms)
        .map(|j| {
            let jf = j as f64;
            let p = alpha * (jf + mu) / theta;
            let ln = jf * ln_rate - ln_gamma(jf + 1.0) + ln_gamma(p);
            check_magnitude(LogSigned::new(alternating(j), ln), opts, "single-branch series")
        })
        .collect()
}

/// Truncated Cauchy product of two sign/log series.
fn cauchy_product(
    a: &[LogSigned],
    b: &[LogSigned],
    len: usize,
    opts: &SeriesOptions,
) -> Result<Vec<LogSigned>> {
    let mut out = Vec::with_capacity(len);
    let mut scratch = Vec::with_capacity(len);
    for i in 0..len {
        scratch.clear();
        scratch.extend(
            (0..=i)
                .filter(|&k| k < a.len() && i - k < b.len())
                .map(|k| a[k] * b[i - k]),
        );
        let s = log_sum(&scratch);
        if s.cancellation() > opts.guard_factor {
            return Err(Error::PrecisionLoss {
                context: "series convolution",
                ratio: s.cancellation(),
                guard: opts.guard_factor,
            });
        }
        out.push(check_magnitude(s.total, opts, "series convolution")?);
    }
    Ok(out)
}

/// Series of Φ₁: coefficients c_i of the N-branch sum in the Γ-normalized
/// basis, together with the derived distribution and density coefficients.
#[derive(Clone, Debug)]
pub struct SeriesCoefficients {
    terms: Vec<LogSigned>,
    cdf_terms: Vec<LogSigned>,
    pdf_terms: Vec<LogSigned>,
    num_branches: usize,
    combiner: Combiner,
    params: AlphaMuParams,
    ln_beta: f64,
}

/// `c = û^{*N}` truncated to `opts.max_terms` coefficients.
///
/// `single` must come from [`build_normalized_series`] for the same
/// `params` and `combiner`.
pub fn sum_power_coeffs(
    single: &[LogSigned],
    params: &AlphaMuParams,
    combiner: Combiner,
    num_branches: usize,
    opts: &SeriesOptions,
) -> Result<SeriesCoefficients> {
    check_count("num_rx_antennas", num_branches)?;
    check_count("max_terms", opts.max_terms)?;
    if single.is_empty() {
        return Err(Error::InvalidParameter {
            name: "single",
            value: 0.0,
            reason: "single-branch series is empty",
        });
    }
    let len = opts.max_terms.min(single.len());
    let mut terms = single[..len].to_vec();
    for _ in 1..num_branches {
        terms = cauchy_product(&terms, single, len, opts)?;
    }

    let (alpha, mu) = (params.alpha(), params.mu());
    let theta = combiner.exponent();
    let n = num_branches as f64;
    let ln_b0 = alpha.ln() + mu * mu.ln() - ln_gamma(mu) - theta.ln() - alpha * mu * params.h_hat().ln();

    let mut cdf_terms = Vec::with_capacity(len);
    let mut pdf_terms = Vec::with_capacity(len);
    for (i, c) in terms.iter().enumerate() {
        let q = alpha * (i as f64 + n * mu) / theta;
        let ln_gq = ln_gamma(q);
        // Γ(Q + 1) = Q Γ(Q)
        cdf_terms.push(c.scale_ln(-ln_gq - q.ln()));
        pdf_terms.push(c.scale_ln((theta / 2.0).ln() - ln_gq));
    }

    Ok(SeriesCoefficients {
        terms,
        cdf_terms,
        pdf_terms,
        num_branches,
        combiner,
        params: *params,
        ln_beta: n * ln_b0,
    })
}

impl SeriesCoefficients {
    /// Builds the single-branch series and its N-th convolution power.
    pub fn new(
        params: &AlphaMuParams,
        combiner: Combiner,
        num_branches: usize,
        opts: &SeriesOptions,
    ) -> Result<Self> {
        let single = build_normalized_series(params, combiner, opts)?;
        sum_power_coeffs(&single, params, combiner, num_branches, opts)
    }

    /// The c_i.
    pub fn terms(&self) -> &[LogSigned] {
        &self.terms
    }

    /// `η_i = c_i / Γ(Q_i + 1)`.
    pub fn eta(&self) -> &[LogSigned] {
        &self.cdf_terms
    }

    pub fn truncation_count(&self) -> usize {
        self.terms.len()
    }

    pub fn num_branches(&self) -> usize {
        self.num_branches
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn params(&self) -> &AlphaMuParams {
        &self.params
    }

    /// `ln β`, with `β = (α μ^μ / (Γ(μ) ϑ ĥ^(αμ)))^N`.
    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }

    /// `Q_i = α (i + Nμ) / ϑ`.
    pub fn shape(&self, i: usize) -> f64 {
        self.params.alpha() * (i as f64 + self.num_branches as f64 * self.params.mu())
            / self.combiner.exponent()
    }

    /// Dumps `index,sign,log10_magnitude` rows of the c_i.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_coefficients_csv(&self.terms, out)
    }
}

impl SeriesDistribution for SeriesCoefficients {
    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    fn ln_scale(&self) -> f64 {
        self.ln_beta
    }

    fn lead(&self) -> f64 {
        self.num_branches as f64 * self.params.mu()
    }

    fn cdf_coefficients(&self) -> &[LogSigned] {
        &self.cdf_terms
    }

    fn pdf_coefficients(&self) -> &[LogSigned] {
        &self.pdf_terms
    }
}

/// Series of Φ₂: coefficients ϱ_i of the A-th power of the η-series.
#[derive(Clone, Debug)]
pub struct TasCoefficients {
    terms: Vec<LogSigned>,
    pdf_terms: Vec<LogSigned>,
    errors: Vec<f64>,
    num_antennas: usize,
    num_branches: usize,
    combiner: Combiner,
    params: AlphaMuParams,
    ln_beta: f64,
    max_cancellation: f64,
    max_relative_error: f64,
    requested_terms: usize,
}

/// Retained prefixes shorter than this are reported as a precision failure.
const MIN_RELIABLE_TERMS: usize = 8;

/// Safety factor on the error estimate derived from the low-precision rerun.
const ESTIMATE_SAFETY: f64 = 16.0;

/// The recurrence proper. With `coarse` every intermediate is rounded to
/// `f64` precision. Also returns the worst `Σ|t| / |Σt|` of the weighted sums.
fn power_recurrence(eta: &[ExtDouble], a: u32, coarse: bool) -> (Vec<ExtDouble>, f64) {
    let round = |x: ExtDouble| if coarse { x.rounded() } else { x };
    let af = f64::from(a);
    let mut rho = Vec::with_capacity(eta.len());
    rho.push(round(eta[0].powi(a)));
    let mut worst: f64 = 1.0;
    for i in 1..eta.len() {
        let mut acc = ExtDouble::ZERO;
        let mut mass = ExtDouble::ZERO;
        for k in 1..=i {
            let weight = ExtDouble::from_f64((k as f64) * (af + 1.0) - i as f64);
            let t = round(round(weight * eta[k]) * rho[i - k]);
            acc = round(acc + t);
            mass = mass + t.abs();
        }
        if !acc.is_zero() {
            worst = worst.max((mass * acc.abs().recip()).to_f64());
        }
        let denom = ExtDouble::from_f64(i as f64) * eta[0];
        rho.push(round(acc * round(denom.recip())));
    }
    (rho, worst)
}

/// ϱ_i of `(Σ_i η_i w^i)^A` from the power-of-a-series recurrence
///
/// ```text
/// ϱ_0 = η_0^A
/// ϱ_i = 1/(i η_0) Σ_{k=1..i} (kA - i + k) η_k ϱ_{i-k}
/// ```
///
/// Rounding errors in the recurrence grow faster than geometrically with i,
/// so it runs in double-double arithmetic. A second pass at `f64` precision
/// measures the amplification: the relative gap between the passes, scaled by
/// the ratio of unit roundoffs, estimates the error of the first. The series
/// is cut before the first coefficient whose estimate exceeds
/// `opts.recurrence_tolerance`. The estimates of the retained coefficients
/// feed the evaluation's rounding estimate, and its truncation estimate
/// reports whether the cut matters. Fails with [`Error::PrecisionLoss`] when
/// fewer than eight coefficients (or fewer than requested, if smaller) survive.
pub fn tas_power_coeffs(
    series: &SeriesCoefficients,
    num_antennas: usize,
    opts: &SeriesOptions,
) -> Result<TasCoefficients> {
    check_count("num_tx_antennas", num_antennas)?;
    check_count("max_terms", opts.max_terms)?;
    let eta = series.eta();
    let len = opts.max_terms.min(eta.len());
    let eta0 = eta[0];
    if eta0.sign() <= 0 {
        return Err(Error::InvalidParameter {
            name: "c_0",
            value: eta0.to_f64(),
            reason: "leading coefficient must be positive",
        });
    }
    let a = num_antennas as f64;
    let a_pow = u32::try_from(num_antennas).map_err(|_| Error::InvalidParameter {
        name: "num_tx_antennas",
        value: a,
        reason: "too large",
    })?;
    let (rho, errors, max_cancellation) = if num_antennas == 1 {
        // the first power is the series itself, at full length
        (eta[..len].to_vec(), Vec::new(), 1.0)
    } else {
        reliable_power(&eta[..len], a_pow, opts)?
    };
    if rho.len() < len.min(MIN_RELIABLE_TERMS) {
        return Err(Error::PrecisionLoss {
            context: "antenna-selection recurrence",
            ratio: rho.len() as f64,
            guard: len.min(MIN_RELIABLE_TERMS) as f64,
        });
    }

    let alpha = series.params().alpha();
    let lead = a * series.lead();
    let pdf_terms = rho
        .iter()
        .enumerate()
        .map(|(i, r)| r.scale_ln((alpha / 2.0 * (i as f64 + lead)).ln()))
        .collect();

    let max_relative_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(TasCoefficients {
        terms: rho,
        pdf_terms,
        errors,
        num_antennas,
        num_branches: series.num_branches(),
        combiner: series.combiner(),
        params: *series.params(),
        ln_beta: series.ln_beta(),
        max_cancellation,
        max_relative_error,
        requested_terms: len,
    })
}

/// Runs the recurrence at both precisions and keeps the prefix whose
/// estimated error stays within tolerance, along with those estimates.
fn reliable_power(
    eta: &[LogSigned],
    a: u32,
    opts: &SeriesOptions,
) -> Result<(Vec<LogSigned>, Vec<f64>, f64)> {
    let eta_x: Vec<ExtDouble> = eta.iter().map(|&e| ExtDouble::from_log(e)).collect();
    let (fine, max_cancellation) = power_recurrence(&eta_x, a, false);
    let (coarse, _) = power_recurrence(&eta_x, a, true);

    let mut rho = Vec::with_capacity(eta.len());
    let mut errors = Vec::with_capacity(eta.len());
    for (f, c) in fine.iter().zip(&coarse) {
        if f.is_zero() {
            break;
        }
        let gap = ((*c - *f) * f.abs().recip()).to_f64().abs();
        let estimate = ESTIMATE_SAFETY * PRECISION_GAIN * gap.max(f64::EPSILON);
        if !(estimate <= opts.recurrence_tolerance) {
            break;
        }
        errors.push(estimate);
        rho.push(check_magnitude(f.to_log(), opts, "antenna-selection recurrence")?);
    }
    Ok((rho, errors, max_cancellation))
}

impl TasCoefficients {
    /// The ϱ_i.
    pub fn terms(&self) -> &[LogSigned] {
        &self.terms
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_branches(&self) -> usize {
        self.num_branches
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn params(&self) -> &AlphaMuParams {
        &self.params
    }

    /// `ln β` of the single-antenna series this was raised from.
    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }

    /// Worst `Σ|t| / |Σt|` seen inside the recurrence.
    pub fn max_cancellation(&self) -> f64 {
        self.max_cancellation
    }

    /// Largest estimated relative error among the retained ϱ_i.
    pub fn max_relative_error(&self) -> f64 {
        self.max_relative_error
    }

    /// Number of ϱ_i kept; below [`requested_terms`](Self::requested_terms)
    /// when the recurrence was cut for accuracy.
    pub fn truncation_count(&self) -> usize {
        self.terms.len()
    }

    pub fn requested_terms(&self) -> usize {
        self.requested_terms
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_coefficients_csv(&self.terms, out)
    }
}

impl SeriesDistribution for TasCoefficients {
    fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    fn ln_scale(&self) -> f64 {
        self.num_antennas as f64 * self.ln_beta
    }

    fn lead(&self) -> f64 {
        (self.num_antennas * self.num_branches) as f64 * self.params.mu()
    }

    fn cdf_coefficients(&self) -> &[LogSigned] {
        &self.terms
    }

    fn pdf_coefficients(&self) -> &[LogSigned] {
        &self.pdf_terms
    }

    fn coefficient_errors(&self) -> &[f64] {
        &self.errors
    }
}

fn write_coefficients_csv<W: Write>(terms: &[LogSigned], mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,sign,log10_magnitude")?;
    for (i, t) in terms.iter().enumerate() {
        writeln!(out, "{},{},{:.16e}", i, t.sign(), t.log10_abs())?;
    }
    Ok(())
}
