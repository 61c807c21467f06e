mod common;

use proptest::prelude::*;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;
use tasnoma::fading::EnvelopeSampler;
use tasnoma::{AlphaMuParams, Error};

const SHAPES: [(f64, f64, f64); 5] = [(0.7, 0.5, 2.0), (0.5, 1.0, 2.0), (2.0, 1.0, 1.0), (2.0, 2.5, 0.7), (3.5, 0.6, 1.4)];

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    for (seed, &(alpha, mu, h_hat)) in SHAPES.iter().enumerate() {
        let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
        let mut xs: Vec<f64> = (0..100_000).map(|_| p.sample(&mut rng)).collect();
        let d = common::ks_statistic(&mut xs, |h| common::alpha_mu_cdf(alpha, mu, h_hat, h));
        assert!(d < common::ks_critical(xs.len()), "{alpha},{mu},{h_hat}: D = {d}");
    }
}

#[test]
fn power_sampler_draws_powers_of_the_envelope() {
    let (alpha, mu, h_hat) = (0.7, 0.5, 2.0);
    let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs: Vec<f64> = EnvelopeSampler::new(p, 2.0).sample_iter(&mut rng).take(100_000).collect();
    let d = common::ks_statistic(&mut xs, |x| common::alpha_mu_cdf(alpha, mu, h_hat, x.sqrt()));
    assert!(d < common::ks_critical(xs.len()), "D = {d}");
}

#[test]
fn density_matches_direct_formula_and_integrates_to_one() {
    for &(alpha, mu, h_hat) in &SHAPES {
        let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
        for &x in &[0.01, 0.3, 1.0, 2.5] {
            let h = x * h_hat;
            let want = common::alpha_mu_pdf(alpha, mu, h_hat, h);
            assert!((p.pdf(h).unwrap() / want - 1.0).abs() < 1e-12);
        }
        let q = (2.0 / (alpha * mu)).max(1.0);
        let upper = h_hat * (60.0 / mu).powf(1.0 / alpha);
        let total = common::integrate_from_singular(|h| p.pdf(h).unwrap(), 0.0, upper, q, 1e-12);
        assert!((total - 1.0).abs() < 1e-9, "{alpha},{mu},{h_hat}: {total}");
    }
}

#[test]
fn distribution_is_integral_of_density() {
    for &(alpha, mu, h_hat) in &SHAPES {
        let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
        let q = (2.0 / (alpha * mu)).max(1.0);
        for &x in &[0.2, 1.0, 1.7] {
            let h = x * h_hat;
            let integral = common::integrate_from_singular(|t| p.pdf(t).unwrap(), 0.0, h, q, 1e-13);
            assert!((p.cdf(h).unwrap() - integral).abs() < 1e-10, "{alpha},{mu} h={h}");
        }
    }
}

#[test]
fn moments_match_gamma_ratio_and_simulation() {
    for (seed, &(alpha, mu, h_hat)) in SHAPES.iter().enumerate() {
        let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
        for &k in &[1.0, 2.0] {
            let exact = h_hat.powf(k) * gamma(mu + k / alpha) / (mu.powf(k / alpha) * gamma(mu));
            assert!((p.moment(k).unwrap() / exact - 1.0).abs() < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed as u64);
            let n = 400_000;
            let xs: Vec<f64> = (0..n).map(|_| p.sample(&mut rng).powf(k)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mean - exact).abs() < 5.0 * se, "{alpha},{mu} k={k}: {mean} vs {exact}");
        }
    }
}

#[test]
fn special_cases() {
    let r = AlphaMuParams::rayleigh();
    assert!((r.cdf(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    // Nakagami-m with spread Ω: |h|² ~ Gamma(m, Ω/m)
    let n = AlphaMuParams::nakagami(2.5, 3.0).unwrap();
    let h: f64 = 1.3;
    let want = statrs::function::gamma::gamma_lr(2.5, 2.5 * h * h / 3.0);
    assert!((n.cdf(h).unwrap() - want).abs() < 1e-14);
    // Weibull: 1 - exp(-(h/λ)^k)
    let w = AlphaMuParams::weibull(1.7, 0.9).unwrap();
    assert!((w.cdf(h).unwrap() - (1.0 - (-(h / 0.9f64).powf(1.7)).exp())).abs() < 1e-14);
}

#[test]
fn invalid_parameters_are_rejected() {
    for &(a, m, h) in &[(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, f64::NAN), (f64::INFINITY, 1.0, 1.0)] {
        assert!(matches!(AlphaMuParams::new(a, m, h), Err(Error::InvalidParameter { .. })));
    }
    let p = AlphaMuParams::rayleigh();
    assert!(matches!(p.pdf(-1.0), Err(Error::Domain { .. })));
    assert!(matches!(p.cdf(f64::NAN), Err(Error::Domain { .. })));
}

proptest! {
    #[test]
    fn distribution_is_monotone_in_unit_range(
        alpha in 0.2f64..6.0,
        mu in 0.2f64..6.0,
        h_hat in 0.1f64..10.0,
        x in 0.0f64..5.0,
        dx in 0.0f64..1.0,
    ) {
        let p = AlphaMuParams::new(alpha, mu, h_hat).unwrap();
        let (lo, hi) = (p.cdf(x * h_hat).unwrap(), p.cdf((x + dx) * h_hat).unwrap());
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(lo <= hi);
        prop_assert!(p.pdf(x * h_hat).unwrap() >= 0.0);
    }

    #[test]
    fn samples_are_positive_and_finite(alpha in 0.2f64..6.0, mu in 0.2f64..6.0, seed in any::<u64>()) {
        let p = AlphaMuParams::new(alpha, mu, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            let h = p.sample(&mut rng);
            prop_assert!(h.is_finite() && h >= 0.0);
        }
    }
}
