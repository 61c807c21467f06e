//! α-μ fading envelope primitives.
//!
//! The envelope density is
//!
//! ```text
//! f(h) = α μ^μ h^(αμ-1) exp(-μ (h/ĥ)^α) / (Γ(μ) ĥ^(αμ))
//! ```
//!
//! where ĥ is the α-root mean value, i.e. `E[h^α] = ĥ^α`. The variate
//! `μ (h/ĥ)^α` is Gamma(μ, 1) distributed, which gives both the closed-form
//! distribution function (a regularized lower incomplete gamma function) and
//! an exact sampler.
//!
//! Rayleigh is `(α=2, μ=1)`, Nakagami-m is `(α=2, μ=m)` and Weibull with
//! shape `a` is `(α=a, μ=1)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaMuParams {
    alpha: f64,
    mu: f64,
    h_hat: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be strictly positive",
        });
    }
    Ok(value)
}

impl AlphaMuParams {
    pub fn new(alpha: f64, mu: f64, h_hat: f64) -> Result<Self> {
        Ok(Self {
            alpha: positive("alpha", alpha)?,
            mu: positive("mu", mu)?,
            h_hat: positive("h_hat", h_hat)?,
        })
    }

    /// Unit-power Rayleigh envelope.
    pub fn rayleigh() -> Self {
        Self {
            alpha: 2.0,
            mu: 1.0,
            h_hat: 1.0,
        }
    }

    /// Nakagami-m envelope with mean power `omega`.
    pub fn nakagami(m: f64, omega: f64) -> Result<Self> {
        Self::new(2.0, m, positive("omega", omega)?.sqrt())
    }

    /// Weibull envelope with shape `shape` and scale `scale`.
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(shape, 1.0, scale)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn h_hat(&self) -> f64 {
        self.h_hat
    }

    fn check_arg(op: &'static str, h: f64) -> Result<()> {
        if h.is_nan() || h < 0.0 {
            return Err(Error::Domain { op, value: h });
        }
        Ok(())
    }

    /// Envelope density at `h`.
    ///
    /// At `h = 0` the density is zero for `αμ > 1`, finite for `αμ = 1` and
    /// infinite for `αμ < 1`.
    pub fn pdf(&self, h: f64) -> Result<f64> {
        Self::check_arg("pdf", h)?;
        let (a, m, hh) = (self.alpha, self.mu, self.h_hat);
        let ln_norm = a.ln() + m * m.ln() - ln_gamma(m) - a * m * hh.ln();
        if h == 0.0 {
            let order = a * m - 1.0;
            return Ok(if order > 0.0 {
                0.0
            } else if order == 0.0 {
                ln_norm.exp()
            } else {
                f64::INFINITY
            });
        }
        if h.is_infinite() {
            return Ok(0.0);
        }
        let ln_pdf = ln_norm + (a * m - 1.0) * h.ln() - m * (h / hh).powf(a);
        Ok(ln_pdf.exp())
    }

    /// Envelope distribution function, `P(μ, μ (h/ĥ)^α)`.
    pub fn cdf(&self, h: f64) -> Result<f64> {
        Self::check_arg("cdf", h)?;
        if h == 0.0 {
            return Ok(0.0);
        }
        if h.is_infinite() {
            return Ok(1.0);
        }
        let x = self.mu * (h / self.h_hat).powf(self.alpha);
        if x == 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        Ok(gamma_lr(self.mu, x))
    }

    /// Raw moment `E[h^k] = ĥ^k Γ(μ + k/α) / (μ^(k/α) Γ(μ))`.
    pub fn moment(&self, k: f64) -> Result<f64> {
        let shifted = self.mu + k / self.alpha;
        if k.is_nan() || shifted <= 0.0 {
            return Err(Error::Domain {
                op: "moment",
                value: k,
            });
        }
        let r = k / self.alpha;
        let ln_m = k * self.h_hat.ln() + ln_gamma(shifted) - r * self.mu.ln() - ln_gamma(self.mu);
        Ok(ln_m.exp())
    }

    /// Draws one envelope from `rng`.
    ///
    /// Builds the gamma sampler on every call; hot loops should hold an
    /// [`EnvelopeSampler`] instead.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        EnvelopeSampler::new(*self, 1.0).sample(rng)
    }

    pub fn sampler(&self) -> EnvelopeSampler {
        EnvelopeSampler::new(*self, 1.0)
    }
}

/// Exact sampler of `h^p` for an α-μ envelope `h`.
///
/// `h = ĥ (G/μ)^(1/α)` with `G ~ Gamma(μ, 1)`, so `h^p = ĥ^p (G/μ)^(p/α)`
/// costs one gamma variate and one `powf` whatever `p` is.
#[derive(Clone, Debug)]
pub struct EnvelopeSampler {
    gamma: Gamma<f64>,
    inv_mu: f64,
    exponent: f64,
    scale: f64,
}

impl EnvelopeSampler {
    /// Sampler of `h^power`; `power = 1` yields the envelope itself.
    pub fn new(params: AlphaMuParams, power: f64) -> Self {
        // shape > 0 and scale 1 are validated by AlphaMuParams
        let gamma = Gamma::new(params.mu, 1.0).expect("validated gamma shape");
        Self {
            gamma,
            inv_mu: 1.0 / params.mu,
            exponent: power / params.alpha,
            scale: params.h_hat.powf(power),
        }
    }
}

impl Distribution<f64> for EnvelopeSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g = self.gamma.sample(rng);
        self.scale * (g * self.inv_mu).powf(self.exponent)
    }
}
