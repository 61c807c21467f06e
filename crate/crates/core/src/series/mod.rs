//! Power-series distributions of the post-combining SNR.
//!
//! For `Y = |h|^ϑ` (ϑ = 1 for EGC, 2 for MRC) the α-μ density expands as
//!
//! ```text
//! f_Y(y) = B₀ Σ_j û_j y^(P_j - 1) / Γ(P_j),   P_j = α (j + μ) / ϑ
//! û_j    = Γ(P_j) (-μ ĥ^-α)^j / j!
//! B₀     = α μ^μ / (Γ(μ) ϑ ĥ^(αμ))
//! ```
//!
//! Convolving power terms obeys `y^(p-1)/Γ(p) * y^(q-1)/Γ(q) = y^(p+q-1)/Γ(p+q)`,
//! so in this Γ-normalized basis the N-fold convolution that gives the density
//! of `S = Σ_n |h_n|^ϑ` is the plain N-th Cauchy power `c = û^{*N}`:
//!
//! ```text
//! f_S(s) = β Σ_i c_i s^(Q_i - 1) / Γ(Q_i),   Q_i = α (i + Nμ) / ϑ,   β = B₀^N
//! ```
//!
//! With `Φ = K S^(2/ϑ)` and `w = (φ/K)^(α/2)` the distribution of Φ₁ is
//! `β w^(Nμ) Σ_i η_i w^i` with `η_i = c_i / Γ(Q_i + 1)`. Antenna selection
//! over A i.i.d. antennas raises that CDF to the A-th power, whose
//! coefficients ϱ_i follow from the power-of-a-series recurrence.
//!
//! All coefficients alternate in sign (`(-1)^i`), so the Cauchy products never
//! cancel; evaluation at large `φ/K` does, and is guarded.

mod coefficients;
mod eval;
mod extended;
mod logsign;

pub use coefficients::{
    build_normalized_series, sum_power_coeffs, tas_power_coeffs, SeriesCoefficients,
    TasCoefficients,
};
pub use eval::{eval_cdf, eval_pdf, SeriesValue};
pub use logsign::{log_sum, LogSigned, LogSum, Neumaier};

use serde::{Deserialize, Serialize};

/// Receive diversity combining scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    /// Equal-gain combining.
    Egc,
    /// Maximal-ratio combining.
    Mrc,
}

impl Combiner {
    /// The branch exponent ϑ: 1 for EGC, 2 for MRC.
    pub fn exponent(self) -> f64 {
        match self {
            Combiner::Egc => 1.0,
            Combiner::Mrc => 2.0,
        }
    }

    /// SNR gain g: `1/N` for EGC, 1 for MRC.
    pub fn gain(self, num_branches: usize) -> f64 {
        match self {
            Combiner::Egc => 1.0 / num_branches as f64,
            Combiner::Mrc => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Combiner::Egc => "egc",
            Combiner::Mrc => "mrc",
        }
    }
}

impl std::fmt::Display for Combiner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Combiner::Egc => "EGC",
            Combiner::Mrc => "MRC",
        })
    }
}

/// Truncation and precision controls for series construction and evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Number of coefficients kept (c_0 .. c_{max_terms-1}).
    pub max_terms: usize,
    /// Largest tolerated `max|term| / |sum|` before evaluation errors out.
    pub guard_factor: f64,
    /// `max|term| / |sum|` above which a result is returned but flagged.
    pub flag_factor: f64,
    /// Largest tolerated natural-log magnitude of a coefficient.
    pub max_ln_magnitude: f64,
    /// Early stop once `stop_run` consecutive terms fall below
    /// `stop_tolerance · |partial sum|`.
    pub stop_tolerance: f64,
    pub stop_run: usize,
    /// A value is converged when its truncation estimate is at most this
    /// fraction of the value.
    pub convergence_tolerance: f64,
    /// Estimated relative error at which the antenna-selection recurrence is
    /// cut. Smaller errors are carried into the evaluation's rounding estimate.
    pub recurrence_tolerance: f64,
    /// Estimated absolute error (relative for values above one) above which
    /// an evaluation is flagged.
    pub error_tolerance: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            max_terms: 200,
            guard_factor: 1e12,
            flag_factor: 1e6,
            max_ln_magnitude: 1e4,
            stop_tolerance: 1e-14,
            stop_run: 5,
            convergence_tolerance: 1e-10,
            recurrence_tolerance: 1e-10,
            error_tolerance: 1e-9,
        }
    }
}

impl SeriesOptions {
    pub fn with_terms(max_terms: usize) -> Self {
        Self {
            max_terms,
            ..Self::default()
        }
    }
}

/// A distribution function of the form `e^scale · Σ_i a_i w^(i + lead)`
/// with `w = (φ/K)^(α/2)`; its density is `(e^scale/φ) Σ_i b_i w^(i + lead)`.
pub trait SeriesDistribution {
    /// α of the underlying fading.
    fn alpha(&self) -> f64;
    /// `ln` of the constant prefactor (β or β^A).
    fn ln_scale(&self) -> f64;
    /// Leading power of w (Nμ or ANμ).
    fn lead(&self) -> f64;
    /// The `a_i`.
    fn cdf_coefficients(&self) -> &[LogSigned];
    /// The `b_i`.
    fn pdf_coefficients(&self) -> &[LogSigned];
    /// Estimated relative error of each coefficient beyond plain rounding,
    /// shared by `a_i` and `b_i`. Missing entries count as zero.
    fn coefficient_errors(&self) -> &[f64] {
        &[]
    }
}
