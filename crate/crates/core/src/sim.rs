//! Monte Carlo oracle for the outage probabilities.
//!
//! Each trial draws every envelope `h_{k,n,a}` (user k, receive antenna n,
//! transmit antenna a), selects the transmit antenna maximising U2's
//! combiner metric `Σ_n |h_{2,n,a}|^ϑ`, forms both SINRs and records the
//! outage events. Trial `t` uses its own ChaCha8 stream (key from the seed,
//! stream id `t`), so the counts depend only on `(seed, trials)` and never on
//! how trials are split across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::fading::EnvelopeSampler;
use crate::outage::SystemConfig;
use crate::stats;

/// Simulation size and reproducibility controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("mc.trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("mc.workers must be at least 1".into()));
        }
        Ok(())
    }

    fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Available parallelism, or 1 if unknown.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// A binomial proportion with its normal-approximation 95% interval.
///
/// The interval is unreliable when fewer than about ten events were seen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub events: u64,
    pub trials: u64,
}

impl McEstimate {
    pub fn from_counts(events: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p_hat = events as f64 / n;
        let std_error = (p_hat * (1.0 - p_hat) / n).sqrt();
        Self {
            p_hat,
            std_error,
            ci95_low: (p_hat - 1.96 * std_error).max(0.0),
            ci95_high: (p_hat + 1.96 * std_error).min(1.0),
            events,
            trials,
        }
    }

    /// True when at least `10` events back the estimate.
    pub fn resolvable(&self) -> bool {
        self.events >= 10
    }
}

/// Raw outage event counters of one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub trials: u64,
    pub u1: u64,
    pub u2: u64,
    pub both: u64,
    pub union: u64,
}

impl EventCounts {
    fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.u1 += other.u1;
        self.u2 += other.u2;
        self.both += other.both;
        self.union += other.union;
    }
}

/// Estimates for U1, U2 and the system at one SNR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOutage {
    pub snr: f64,
    pub u1: McEstimate,
    pub u2: McEstimate,
    pub overall: McEstimate,
    pub counts: EventCounts,
}

impl McOutage {
    fn from_counts(snr: f64, counts: EventCounts) -> Self {
        Self {
            snr,
            u1: McEstimate::from_counts(counts.u1, counts.trials),
            u2: McEstimate::from_counts(counts.u2, counts.trials),
            overall: McEstimate::from_counts(counts.union, counts.trials),
            counts,
        }
    }
}

/// Channel draws for one scenario: per-branch `|h|^ϑ` sampler plus shape.
struct ChannelModel {
    sampler: EnvelopeSampler,
    exponent: f64,
    n: usize,
    a: usize,
}

impl ChannelModel {
    fn new(config: &SystemConfig) -> Self {
        let exponent = config.combiner.exponent();
        Self {
            sampler: EnvelopeSampler::new(config.fading, exponent),
            exponent,
            n: config.num_rx_antennas,
            a: config.num_tx_antennas,
        }
    }

    /// `(Σ_n |h_{1,n,a*}|^ϑ, Σ_n |h_{2,n,a*}|^ϑ)`.
    ///
    /// Draw order: all of U1's envelopes (antenna-major), then U2's.
    fn sample_sums<R: Rng + ?Sized>(&self, rng: &mut R, u1: &mut Vec<f64>) -> (f64, f64) {
        u1.clear();
        for _ in 0..self.a {
            let s: f64 = (0..self.n).map(|_| self.sampler.sample(rng)).sum();
            u1.push(s);
        }
        let mut best = 0usize;
        let mut best_metric = f64::NEG_INFINITY;
        for a in 0..self.a {
            let s: f64 = (0..self.n).map(|_| self.sampler.sample(rng)).sum();
            if s > best_metric {
                best = a;
                best_metric = s;
            }
        }
        (u1[best], best_metric)
    }

    fn phi(&self, k: f64, sum: f64) -> f64 {
        k * sum.powf(2.0 / self.exponent)
    }
}

/// One trial's `(Φ₁, Φ₂)` drawn from `rng`.
pub fn sample_phis<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> (f64, f64) {
    let model = ChannelModel::new(config);
    let (s1, s2) = model.sample_sums(rng, &mut Vec::with_capacity(model.a));
    let k = config.k();
    (model.phi(k, s1), model.phi(k, s2))
}

struct StreamFactory {
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl StreamFactory {
    fn new(seed: u64) -> Self {
        Self {
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(trial);
        rng
    }
}

/// Splits `0..trials` into contiguous ranges, runs `work` on each range in
/// its own thread and returns the results in range order.
fn run_parallel<T, F>(trials: u64, workers: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let workers = (workers as u64).clamp(1, trials.max(1));
    let chunk = trials.div_ceil(workers);
    let ranges: Vec<_> = (0..workers)
        .map(|w| (w * chunk).min(trials)..((w + 1) * chunk).min(trials))
        .collect();
    if ranges.len() == 1 {
        return vec![work(ranges[0].clone())];
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let work = &work;
                scope.spawn(move || work(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    })
}

fn sinr_u1(config: &SystemConfig, phi1: f64) -> f64 {
    config.rho / (config.xi * config.xi * (1.0 - config.rho) + 1.0 / phi1)
}

fn sinr_u2(config: &SystemConfig, phi2: f64) -> f64 {
    (1.0 - config.rho) / (config.rho + 1.0 / phi2)
}

/// Outage estimates at several linear SNRs from one set of channel draws.
///
/// `config.snr` is ignored. Because the same channels serve every SNR, the
/// estimates along the grid are positively correlated.
pub fn estimate_outage_sweep(config: &SystemConfig, snrs: &[f64], mc: &McConfig) -> Result<Vec<McOutage>> {
    config.validate()?;
    mc.validate()?;
    if let Some(&bad) = snrs.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "snr",
            value: bad,
            reason: "must be finite and strictly positive",
        });
    }
    let model = ChannelModel::new(config);
    let streams = StreamFactory::new(mc.seed);
    let ks: Vec<f64> = snrs.iter().map(|&s| s * config.gain()).collect();
    let parts = run_parallel(mc.trials, mc.workers, |range| {
        let mut counts = vec![EventCounts::default(); ks.len()];
        let mut scratch = Vec::with_capacity(model.a);
        for t in range {
            let mut rng = streams.stream(t);
            let (s1, s2) = model.sample_sums(&mut rng, &mut scratch);
            for (c, &k) in counts.iter_mut().zip(&ks) {
                let out1 = sinr_u1(config, model.phi(k, s1)) <= config.threshold_u1;
                let out2 = sinr_u2(config, model.phi(k, s2)) <= config.threshold_u2;
                c.trials += 1;
                c.u1 += u64::from(out1);
                c.u2 += u64::from(out2);
                c.both += u64::from(out1 && out2);
                c.union += u64::from(out1 || out2);
            }
        }
        counts
    });
    let mut total = vec![EventCounts::default(); ks.len()];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(snrs
        .iter()
        .zip(total)
        .map(|(&snr, c)| McOutage::from_counts(snr, c))
        .collect())
}

/// Outage estimates at `config.snr`.
pub fn estimate_outage(config: &SystemConfig, mc: &McConfig) -> Result<McOutage> {
    Ok(estimate_outage_sweep(config, &[config.snr], mc)?.remove(0))
}

/// `(Φ₁, Φ₂)` for every trial, in trial order.
pub fn sample_phi_pairs(config: &SystemConfig, mc: &McConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    mc.validate()?;
    let model = ChannelModel::new(config);
    let streams = StreamFactory::new(mc.seed);
    let k = config.k();
    let parts = run_parallel(mc.trials, mc.workers, |range| {
        let mut scratch = Vec::with_capacity(model.a);
        range
            .map(|t| {
                let (s1, s2) = model.sample_sums(&mut streams.stream(t), &mut scratch);
                (model.phi(k, s1), model.phi(k, s2))
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Statistical check that antenna selection leaves U1's SNR untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndependenceReport {
    /// Two-sample KS statistic between Φ₁ at A = 1 and at the configured A.
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub ks_pvalue: f64,
    /// Sample correlation of Φ₁ and Φ₂ at the configured A.
    pub correlation: f64,
    /// `4/√trials`.
    pub correlation_bound: f64,
}

impl IndependenceReport {
    pub fn ks_accepts(&self) -> bool {
        self.ks_statistic <= self.ks_critical
    }

    pub fn correlation_accepts(&self) -> bool {
        self.correlation.abs() <= self.correlation_bound
    }

    pub fn passed(&self) -> bool {
        self.ks_accepts() && self.correlation_accepts()
    }
}

/// Offset applied to the seed of the single-antenna reference run, so the
/// two samples compared by the KS test come from unrelated streams.
const REFERENCE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// KS test of Φ₁ at A = 1 against Φ₁ at `config.num_tx_antennas`, plus the
/// Φ₁/Φ₂ correlation, each at the 1% level (correlation bound `4/√n`).
pub fn independence_check(config: &SystemConfig, mc: &McConfig) -> Result<IndependenceReport> {
    let pairs = sample_phi_pairs(config, mc)?;
    let single = SystemConfig {
        num_tx_antennas: 1,
        ..config.clone()
    };
    let reference = sample_phi_pairs(&single, &mc.with_seed(mc.seed ^ REFERENCE_SEED_OFFSET))?;

    let (phi1, phi2): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let correlation = stats::correlation(&phi1, &phi2);
    let mut a = phi1;
    let mut b: Vec<f64> = reference.into_iter().map(|p| p.0).collect();
    let ks_statistic = stats::ks_two_sample(&mut a, &mut b);
    let n = mc.trials as usize;
    let effective = (n as f64 / 2.0).sqrt();
    Ok(IndependenceReport {
        ks_statistic,
        ks_critical: stats::ks_critical_two_sample(n, n),
        ks_pvalue: stats::kolmogorov_pvalue(effective * ks_statistic),
        correlation,
        correlation_bound: 4.0 / (mc.trials as f64).sqrt(),
    })
}
