//! Reference computations that share no code with the library: adaptive
//! quadrature, closed-form distributions and brute-force series powers.
#![allow(dead_code)]

use statrs::function::gamma::gamma_lr;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod integral of `f` over `[a, b]`: the
/// interval with the largest error estimate is bisected until the summed
/// estimate drops below `tol` or the interval budget runs out.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut parts = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    while parts.len() < 4000 {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol {
            break;
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Integral over `[a, b]` after `x = a + (b - a) v^q`, which smooths an
/// integrable power singularity at `a` when `q` is large enough.
pub fn integrate_from_singular<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, q: f64, tol: f64) -> f64 {
    let w = b - a;
    integrate(
        |v| {
            if v <= 0.0 {
                return 0.0;
            }
            w * q * v.powf(q - 1.0) * f(a + w * v.powf(q))
        },
        0.0,
        1.0,
        tol,
    )
}

/// α-μ envelope density, written out directly.
pub fn alpha_mu_pdf(alpha: f64, mu: f64, h_hat: f64, h: f64) -> f64 {
    use statrs::function::gamma::gamma;
    if h <= 0.0 {
        return 0.0;
    }
    alpha * mu.powf(mu) * h.powf(alpha * mu - 1.0) * (-mu * (h / h_hat).powf(alpha)).exp()
        / (gamma(mu) * h_hat.powf(alpha * mu))
}

/// α-μ envelope distribution function `P(μ, μ (h/ĥ)^α)`.
pub fn alpha_mu_cdf(alpha: f64, mu: f64, h_hat: f64, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    gamma_lr(mu, mu * (h / h_hat).powf(alpha))
}

/// `P(h₁ + h₂ + h₃ ≤ s)` for i.i.d. α-μ envelopes by nested quadrature.
pub fn egc3_cdf(alpha: f64, mu: f64, h_hat: f64, s: f64, tol: f64) -> f64 {
    let q = (2.0 / (alpha * mu)).max(1.0);
    let pdf = |x: f64| alpha_mu_pdf(alpha, mu, h_hat, x);
    let cdf = |x: f64| alpha_mu_cdf(alpha, mu, h_hat, x);
    // P(h₁ + h₂ ≤ t) = ∫ f(x) F(t - x) dx, split so each half has its
    // singular endpoint at the origin of the substitution
    let pair = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let half = 0.5 * t;
        integrate_from_singular(|x| pdf(x) * cdf(t - x), 0.0, half, q, tol * 0.1)
            + integrate_from_singular(|y| pdf(t - y) * cdf(y), 0.0, half, q, tol * 0.1)
    };
    let half = 0.5 * s;
    integrate_from_singular(|x| pdf(x) * pair(s - x), 0.0, half, q, tol)
        + integrate_from_singular(|y| pdf(s - y) * pair(y), 0.0, half, q, tol)
}

/// `(Σ a_i x^i)^power` truncated to `a.len()` terms by repeated Cauchy
/// products in plain `f64`.
pub fn brute_power(a: &[f64], power: usize) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = 1.0;
    for _ in 0..power {
        let mut next = vec![0.0; n];
        for i in 0..n {
            next[i] = (0..=i).map(|k| out[k] * a[i - k]).sum();
        }
        out = next;
    }
    out
}

/// Nakagami-m power sum: `P(Σ_{n≤N} |h_n|² ≤ x)` for unit mean power is the
/// Gamma(Nm, 1/m) distribution function.
pub fn nakagami_sum_cdf(m: f64, n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(n as f64 * m, m * x)
}

/// One-sample Kolmogorov–Smirnov statistic; sorts `samples` in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample statistic for large `n`.
pub fn ks_critical(n: usize) -> f64 {
    1.627_62 / (n as f64).sqrt()
}
