//! Exact and asymptotic outage probabilities.
//!
//! With power split ρ (near user U1) and residual-interference level ξ, the
//! SINRs are
//!
//! ```text
//! γ₁ = ρ / (ξ²(1-ρ) + 1/Φ₁)        γ₂ = (1-ρ) / (ρ + 1/Φ₂)
//! ```
//!
//! so `γ₁ ≤ R̃₁` iff `Φ₁ ≤ 1/m₁` with margin `m₁ = ρ/R̃₁ - ξ²(1-ρ)`, and
//! likewise for U2 with `m₂ = (1-ρ)/R̃₂ - ρ`. A non-positive margin means the
//! SINR ceiling sits below the threshold and outage is certain.
//!
//! Thresholds are linear SINR values. [`sinr_threshold_from_rate`] converts a
//! spectral-efficiency target, but nothing here applies it implicitly.

use crate::error::{Error, Result, User};
use crate::fading::AlphaMuParams;
use crate::series::{
    eval_cdf, tas_power_coeffs, Combiner, SeriesCoefficients, SeriesDistribution, SeriesOptions,
    SeriesValue, TasCoefficients,
};

/// A complete two-user scenario at one SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// A, transmit antennas at the base station.
    pub num_tx_antennas: usize,
    /// N, receive antennas per user.
    pub num_rx_antennas: usize,
    /// ρ, fraction of power given to U1.
    pub rho: f64,
    /// ξ, residual fraction of U2's signal after imperfect SIC.
    pub xi: f64,
    /// R̃₁, linear SINR threshold of U1.
    pub threshold_u1: f64,
    /// R̃₂, linear SINR threshold of U2.
    pub threshold_u2: f64,
    /// E_s/N_0, linear.
    pub snr: f64,
    pub fading: AlphaMuParams,
    pub combiner: Combiner,
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_tx_antennas == 0 {
            return Err(invalid("num_tx_antennas", 0.0, "must be at least 1"));
        }
        if self.num_rx_antennas == 0 {
            return Err(invalid("num_rx_antennas", 0.0, "must be at least 1"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(invalid("rho", self.rho, "must lie strictly between 0 and 1"));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(invalid("xi", self.xi, "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("threshold_u1", self.threshold_u1),
            ("threshold_u2", self.threshold_u2),
            ("snr", self.snr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, v, "must be finite and strictly positive"));
            }
        }
        Ok(())
    }

    /// Non-fatal remarks about the scenario.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rho >= 0.5 {
            out.push(format!(
                "rho = {} gives the near user at least half the power; NOMA ordering normally wants rho < 0.5",
                self.rho
            ));
        }
        out
    }

    /// `m₁ = ρ/R̃₁ - ξ²(1-ρ)`.
    pub fn margin_u1(&self) -> f64 {
        self.rho / self.threshold_u1 - self.xi * self.xi * (1.0 - self.rho)
    }

    /// `m₂ = (1-ρ)/R̃₂ - ρ`.
    pub fn margin_u2(&self) -> f64 {
        (1.0 - self.rho) / self.threshold_u2 - self.rho
    }

    /// Combining gain g (1/N for EGC, 1 for MRC).
    pub fn gain(&self) -> f64 {
        self.combiner.gain(self.num_rx_antennas)
    }

    /// `K = snr · g`.
    pub fn k(&self) -> f64 {
        self.snr * self.gain()
    }

    pub fn with_snr(&self, snr: f64) -> Self {
        Self {
            snr,
            ..self.clone()
        }
    }
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// SINR threshold `2^R - 1` for a spectral efficiency of `R` bit/s/Hz.
pub fn sinr_threshold_from_rate(bits_per_hz: f64) -> f64 {
    bits_per_hz.exp2() - 1.0
}

/// `1 - (1-p₁)(1-p₂)`: outage of at least one user, the users being
/// independent.
pub fn op_overall(p1: f64, p2: f64) -> f64 {
    // a + b(1 - a) keeps full relative accuracy for small probabilities and
    // is exactly 1 when either user is certainly in outage
    let (a, b) = if p1 >= p2 { (p1, p2) } else { (p2, p1) };
    a + b * (1.0 - a)
}

fn check_series(config: &SystemConfig, params: &AlphaMuParams, combiner: Combiner, n: usize) -> Result<()> {
    if *params != config.fading || combiner != config.combiner || n != config.num_rx_antennas {
        return Err(Error::InvalidConfig(
            "coefficients were built for a different fading, combiner or receive-antenna count".into(),
        ));
    }
    Ok(())
}

/// Outage probability of U1. Does not depend on the number of transmit
/// antennas.
pub fn op_u1(config: &SystemConfig, coeffs: &SeriesCoefficients, opts: &SeriesOptions) -> Result<SeriesValue> {
    check_series(config, coeffs.params(), coeffs.combiner(), coeffs.num_branches())?;
    let margin = config.margin_u1();
    if margin <= 0.0 {
        return Ok(SeriesValue::exact(1.0));
    }
    eval_cdf(coeffs, config.k(), 1.0 / margin, opts)
}

/// Outage probability of U2 under antenna selection.
pub fn op_u2(config: &SystemConfig, tas: &TasCoefficients, opts: &SeriesOptions) -> Result<SeriesValue> {
    check_series(config, tas.params(), tas.combiner(), tas.num_branches())?;
    if tas.num_antennas() != config.num_tx_antennas {
        return Err(Error::InvalidConfig(
            "antenna-selection coefficients were built for a different antenna count".into(),
        ));
    }
    let margin = config.margin_u2();
    if margin <= 0.0 {
        return Ok(SeriesValue::exact(1.0));
    }
    eval_cdf(tas, config.k(), 1.0 / margin, opts)
}

/// Diversity order O_d and coding gain O_c of one user.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gains {
    pub diversity: f64,
    pub coding: f64,
}

impl Gains {
    /// `(O_c · snr)^(-O_d)`, clamped to `[0, 1]`.
    pub fn outage(&self, snr: f64) -> f64 {
        (self.coding * snr).powf(-self.diversity).clamp(0.0, 1.0)
    }
}

fn leading_gains<S: SeriesDistribution>(series: &S, margin: f64, gain: f64, user: User) -> Result<Gains> {
    if !(margin > 0.0) {
        return Err(Error::InfeasibleThreshold { user, margin });
    }
    let diversity = series.alpha() * series.lead() / 2.0;
    let ln_first = series.ln_scale() + series.cdf_coefficients()[0].ln_abs();
    Ok(Gains {
        diversity,
        coding: gain * margin * (-ln_first / diversity).exp(),
    })
}

/// `(O_d1, O_c1)` and `(O_d2, O_c2)` from the leading series terms.
///
/// Errors with [`Error::InfeasibleThreshold`] when either margin is not
/// positive: outage is then certain and has no power-law asymptote.
pub fn asymptotic_gains(
    config: &SystemConfig,
    coeffs: &SeriesCoefficients,
    tas: &TasCoefficients,
) -> Result<(Gains, Gains)> {
    check_series(config, coeffs.params(), coeffs.combiner(), coeffs.num_branches())?;
    check_series(config, tas.params(), tas.combiner(), tas.num_branches())?;
    Ok((
        leading_gains(coeffs, config.margin_u1(), config.gain(), User::Near)?,
        leading_gains(tas, config.margin_u2(), config.gain(), User::Far)?,
    ))
}

/// Asymptotic `(p₁, p₂, p_overall)` at `config.snr`.
pub fn asymptotic_op(config: &SystemConfig, gains: &(Gains, Gains)) -> (f64, f64, f64) {
    let p1 = gains.0.outage(config.snr);
    let p2 = gains.1.outage(config.snr);
    (p1, p2, op_overall(p1, p2))
}

/// Analytical results at one SNR point.
///
/// A probability is NaN when its series could not be evaluated; the matching
/// flag is then set and `error_*` holds the reason. Asymptotes of a user with
/// an infeasible threshold are 1, the exact value at every SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct OutageReport {
    pub snr_db: f64,
    pub p_u1: f64,
    pub p_u2: f64,
    pub p_overall: f64,
    pub asym_u1: f64,
    pub asym_u2: f64,
    pub asym_overall: f64,
    pub gains_u1: Option<Gains>,
    pub gains_u2: Option<Gains>,
    /// Set when U1's value is unconverged, cancellation-prone or missing.
    pub flag_u1: bool,
    pub flag_u2: bool,
    pub detail_u1: Option<SeriesValue>,
    pub detail_u2: Option<SeriesValue>,
    pub error_u1: Option<String>,
    pub error_u2: Option<String>,
}

impl OutageReport {
    pub fn flagged(&self) -> bool {
        self.flag_u1 || self.flag_u2
    }
}

/// Coefficients of one scenario, built once and reused across SNR points.
#[derive(Clone, Debug)]
pub struct OutageAnalysis {
    config: SystemConfig,
    series: SeriesCoefficients,
    tas: TasCoefficients,
    opts: SeriesOptions,
}

type Evaluated = (f64, bool, Option<SeriesValue>, Option<String>);

fn split(r: Result<SeriesValue>) -> Evaluated {
    match r {
        Ok(v) => (v.value, v.flagged(), Some(v), None),
        Err(e) => (f64::NAN, true, None, Some(e.to_string())),
    }
}

impl OutageAnalysis {
    pub fn new(config: &SystemConfig, opts: &SeriesOptions) -> Result<Self> {
        config.validate()?;
        let series = SeriesCoefficients::new(&config.fading, config.combiner, config.num_rx_antennas, opts)?;
        let tas = tas_power_coeffs(&series, config.num_tx_antennas, opts)?;
        Ok(Self {
            config: config.clone(),
            series,
            tas,
            opts: opts.clone(),
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn series(&self) -> &SeriesCoefficients {
        &self.series
    }

    pub fn tas(&self) -> &TasCoefficients {
        &self.tas
    }

    pub fn op_u1(&self, snr: f64) -> Result<SeriesValue> {
        op_u1(&self.config.with_snr(snr), &self.series, &self.opts)
    }

    pub fn op_u2(&self, snr: f64) -> Result<SeriesValue> {
        op_u2(&self.config.with_snr(snr), &self.tas, &self.opts)
    }

    /// Per-user gains; `None` for a user whose threshold is infeasible.
    pub fn gains(&self) -> (Option<Gains>, Option<Gains>) {
        let g = self.config.gain();
        (
            leading_gains(&self.series, self.config.margin_u1(), g, User::Near).ok(),
            leading_gains(&self.tas, self.config.margin_u2(), g, User::Far).ok(),
        )
    }

    /// Exact and asymptotic results at `snr_db`; evaluation failures are
    /// reported in the returned record rather than as an error.
    pub fn evaluate(&self, snr_db: f64) -> OutageReport {
        let snr = db_to_linear(snr_db);
        let (p_u1, flag_u1, detail_u1, error_u1) = split(self.op_u1(snr));
        let (p_u2, flag_u2, detail_u2, error_u2) = split(self.op_u2(snr));
        let (gains_u1, gains_u2) = self.gains();
        let asym_u1 = gains_u1.map_or(1.0, |g| g.outage(snr));
        let asym_u2 = gains_u2.map_or(1.0, |g| g.outage(snr));
        OutageReport {
            snr_db,
            p_u1,
            p_u2,
            p_overall: op_overall(p_u1, p_u2),
            asym_u1,
            asym_u2,
            asym_overall: op_overall(asym_u1, asym_u2),
            gains_u1,
            gains_u2,
            flag_u1,
            flag_u2,
            detail_u1,
            detail_u2,
            error_u1,
            error_u2,
        }
    }

    /// One report per grid point (dB), in grid order.
    pub fn sweep(&self, snr_grid_db: &[f64]) -> Result<Vec<OutageReport>> {
        check_grid(snr_grid_db)?;
        Ok(snr_grid_db.iter().map(|&db| self.evaluate(db)).collect())
    }
}

/// Requires a nonempty, finite, strictly increasing grid.
pub fn check_grid(snr_grid_db: &[f64]) -> Result<()> {
    if snr_grid_db.is_empty() {
        return Err(Error::InvalidConfig("SNR grid is empty".into()));
    }
    if snr_grid_db.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("SNR grid contains a non-finite value".into()));
    }
    if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("SNR grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Builds the coefficients for `config` and evaluates every grid point.
pub fn sweep(config: &SystemConfig, snr_grid_db: &[f64], opts: &SeriesOptions) -> Result<Vec<OutageReport>> {
    check_grid(snr_grid_db)?;
    OutageAnalysis::new(config, opts)?.sweep(snr_grid_db)
}
