//! Power-law fitting of degree sequences: maximum-likelihood exponent,
//! KS-based choice of `x_min`, and a semiparametric bootstrap p-value.
//!
//! The pipeline treats degrees as discrete data with tail law
//! `P(X = x) = x^{-γ} / ζ(γ, x_min)` for `x ≥ x_min`, where `ζ(s, q)` is the
//! Hurwitz zeta function; the exponent is its exact maximum-likelihood
//! value. [`fit_gamma`] keeps the plain continuous estimator.

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::kv::KvBlock;
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Smallest tail the pipeline will fit.
pub const MIN_TAIL: usize = 10;
/// Distinct values `select_xmin` needs.
pub const MIN_DISTINCT: usize = 10;
pub const MIN_RESAMPLES: usize = 100;
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Exponent search interval for the discrete MLE.
const GAMMA_RANGE: (f64, f64) = (1.0 + 1e-6, 20.0);

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples at or above x_min, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("every sample equals x_min; the estimator is undefined")]
    Degenerate,
    #[error("need at least {need} distinct values, got {got}")]
    TooFewDistinct { need: usize, got: usize },
    #[error("x_min must be positive, got {0}")]
    InvalidXmin(f64),
    #[error("need at least {min} bootstrap resamples, got {got}")]
    Resamples { min: usize, got: usize },
}

/// Continuous MLE `1 + k / Σ ln(x_i / x_min)` over the samples `≥ x_min`.
pub fn fit_gamma(samples: &[f64], x_min: f64) -> Result<f64, FitError> {
    if x_min.is_nan() || x_min <= 0.0 {
        return Err(FitError::InvalidXmin(x_min));
    }
    let tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < 2 {
        return Err(FitError::TooFewSamples { need: 2, got: tail.len() });
    }
    let s: f64 = tail.iter().map(|x| (x / x_min).ln()).sum();
    if s <= 0.0 {
        return Err(FitError::Degenerate);
    }
    Ok(1.0 + tail.len() as f64 / s)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    // Bernoulli numbers B_2 .. B_12
    const B: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let direct = if q < 10.0 { (10.0 - q).ceil() as usize } else { 0 };
    let mut sum: f64 = (0..direct).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + direct as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    let mut factorial = 1.0;
    let mut rising = s;
    let mut power = a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        let j = j + 1;
        factorial *= ((2 * j - 1) * (2 * j)) as f64;
        sum += b / factorial * rising * power;
        rising *= (s + (2 * j - 1) as f64) * (s + (2 * j) as f64);
        power /= a * a;
    }
    sum
}

/// Maximize the concave log-likelihood `-γ·log_sum − k·ln ζ(γ, x_min)`.
fn zeta_mle(k: usize, log_sum: f64, x_min: u64) -> f64 {
    let q = x_min as f64;
    let ll = |g: f64| -g * log_sum - k as f64 * hurwitz_zeta(g, q).ln();
    let (mut a, mut b) = GAMMA_RANGE;
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (ll(c), ll(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = ll(d);
        }
    }
    (a + b) / 2.0
}

/// Exact discrete MLE of the exponent over the samples `≥ x_min`.
pub fn fit_gamma_discrete(samples: &[u64], x_min: u64) -> Result<f64, FitError> {
    if x_min == 0 {
        return Err(FitError::InvalidXmin(0.0));
    }
    let tail: Vec<u64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < 2 {
        return Err(FitError::TooFewSamples { need: 2, got: tail.len() });
    }
    if tail.iter().all(|&x| x == x_min) {
        return Err(FitError::Degenerate);
    }
    let log_sum: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    Ok(zeta_mle(tail.len(), log_sum, x_min))
}

/// Model CDF `P(X ≤ x)` of the discrete tail law.
fn tail_cdf(x: u64, gamma: f64, norm: f64) -> f64 {
    1.0 - hurwitz_zeta(gamma, (x + 1) as f64) / norm
}

/// Sorted samples grouped as `(value, count)`.
fn histogram(samples: &[u64]) -> Vec<(u64, usize)> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(u64, usize)> = Vec::new();
    for x in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// KS distance between the empirical tail (histogram entries from `x_min`
/// up) and the fitted law. Both CDFs are step functions on the integers, so
/// the supremum is attained at an observed value or just before the next.
fn ks_on_tail(tail: &[(u64, usize)], x_min: u64, gamma: f64) -> f64 {
    let norm = hurwitz_zeta(gamma, x_min as f64);
    let n: usize = tail.iter().map(|&(_, c)| c).sum();
    let mut seen = 0usize;
    let mut ks: f64 = 0.0;
    for (i, &(x, c)) in tail.iter().enumerate() {
        seen += c;
        let s = seen as f64 / n as f64;
        ks = ks.max((s - tail_cdf(x, gamma, norm)).abs());
        if let Some(&(next, _)) = tail.get(i + 1) {
            if next > x + 1 {
                ks = ks.max((s - tail_cdf(next - 1, gamma, norm)).abs());
            }
        }
    }
    ks
}

/// KS distance of the samples `≥ x_min` to the discrete law with exponent `gamma`.
pub fn ks_statistic(samples: &[u64], x_min: u64, gamma: f64) -> f64 {
    let hist = histogram(samples);
    let start = hist.partition_point(|&(x, _)| x < x_min);
    ks_on_tail(&hist[start..], x_min, gamma)
}

/// Fit over every candidate `x_min` from a sorted histogram; returns
/// `(x_min, gamma, ks, n_tail)` for the smallest KS (ties to smaller `x_min`).
fn scan_xmin(hist: &[(u64, usize)]) -> Option<(u64, f64, f64, usize)> {
    // suffix sums of count and count·ln(x)
    let m = hist.len();
    let mut count = vec![0usize; m + 1];
    let mut log_sum = vec![0f64; m + 1];
    for i in (0..m).rev() {
        let (x, c) = hist[i];
        count[i] = count[i + 1] + c;
        log_sum[i] = log_sum[i + 1] + c as f64 * (x as f64).ln();
    }
    let mut best: Option<(u64, f64, f64, usize)> = None;
    for i in 0..m {
        let (x_min, _) = hist[i];
        let k = count[i];
        if x_min == 0 || k < MIN_TAIL || i + 1 >= m {
            continue;
        }
        let gamma = zeta_mle(k, log_sum[i], x_min);
        let ks = ks_on_tail(&hist[i..], x_min, gamma);
        if best.is_none_or(|b| ks < b.2) {
            best = Some((x_min, gamma, ks, k));
        }
    }
    best
}

/// Choose `x_min` minimizing the KS distance between the tail and its
/// fitted law. Candidates are the observed positive values leaving at least
/// [`MIN_TAIL`] samples and two distinct values in the tail.
pub fn select_xmin(samples: &[u64]) -> Result<(u64, f64), FitError> {
    let hist = histogram(samples);
    if hist.len() < MIN_DISTINCT {
        return Err(FitError::TooFewDistinct { need: MIN_DISTINCT, got: hist.len() });
    }
    scan_xmin(&hist).map(|(x, _, ks, _)| (x, ks)).ok_or(FitError::TooFewSamples { need: MIN_TAIL, got: 0 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub x_min: u64,
    pub ks: f64,
    pub n_tail: usize,
    pub n: usize,
    /// `None` when no bootstrap was run.
    pub p_value: Option<f64>,
}

impl PowerLawFit {
    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::default();
        kv.insert("gamma", format!("{:.6}", self.gamma));
        kv.insert("xmin", self.x_min);
        kv.insert("ks", format!("{:.6}", self.ks));
        kv.insert("ntail", self.n_tail);
        kv.insert("n", self.n);
        match self.p_value {
            Some(p) => kv.insert("pvalue", format!("{p:.4}")),
            None => kv.insert("pvalue", "none"),
        }
        kv
    }
}

/// Select `x_min`, fit the exponent, and optionally bootstrap a p-value
/// (`resamples = 0` skips it).
pub fn fit_power_law(samples: &[u64], resamples: usize, seed: u64) -> Result<PowerLawFit, FitError> {
    let hist = histogram(samples);
    if hist.len() < MIN_DISTINCT {
        return Err(FitError::TooFewDistinct { need: MIN_DISTINCT, got: hist.len() });
    }
    let (x_min, gamma, ks, n_tail) = scan_xmin(&hist).ok_or(FitError::TooFewSamples { need: MIN_TAIL, got: 0 })?;
    let mut fit = PowerLawFit { gamma, x_min, ks, n_tail, n: samples.len(), p_value: None };
    if resamples > 0 {
        fit.p_value = Some(bootstrap_pvalue(samples, &fit, resamples, seed)?);
    }
    Ok(fit)
}

/// One draw from the discrete tail law by inversion: the continuous
/// approximation gives a starting point that is then corrected against the
/// exact survival function `ζ(γ, x) / ζ(γ, x_min)`.
fn draw_tail(rng: &mut Rng, x_min: u64, gamma: f64, norm: f64) -> u64 {
    let u: f64 = rng.random();
    let target = (1.0 - u) * norm; // want the largest x with ζ(γ, x) ≥ target
    let guess = (x_min as f64 - 0.5) * (1.0 - u).powf(-1.0 / (gamma - 1.0)) + 0.5;
    if guess.is_nan() || guess >= 1e15 {
        return guess.min(u64::MAX as f64) as u64;
    }
    let mut x = (guess.floor() as u64).max(x_min);
    while x > x_min && hurwitz_zeta(gamma, x as f64) < target {
        x -= 1;
    }
    while hurwitz_zeta(gamma, (x + 1) as f64) >= target {
        x += 1;
    }
    x
}

/// `n` draws from the discrete power law with exponent `gamma` on `x ≥ x_min`.
pub fn sample_discrete_power_law(n: usize, gamma: f64, x_min: u64, seed: u64) -> Vec<u64> {
    assert!(gamma > 1.0 && x_min >= 1);
    let norm = hurwitz_zeta(gamma, x_min as f64);
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| draw_tail(&mut rng, x_min, gamma, norm)).collect()
}

/// Semiparametric bootstrap: each synthetic data set replaces every point,
/// with probability `n_tail / n`, by a draw from the fitted tail law and
/// otherwise by a uniform pick among the observed values below `x_min`.
/// Each set is refit from scratch (including `x_min`); the p-value is the
/// share of sets whose KS distance exceeds the observed one. A set that
/// cannot be fit counts as exceeding.
pub fn bootstrap_pvalue(samples: &[u64], fit: &PowerLawFit, resamples: usize, seed: u64) -> Result<f64, FitError> {
    if resamples < MIN_RESAMPLES {
        return Err(FitError::Resamples { min: MIN_RESAMPLES, got: resamples });
    }
    let body: Vec<u64> = samples.iter().copied().filter(|&x| x < fit.x_min).collect();
    let n = samples.len();
    let tail_share = fit.n_tail as f64 / n as f64;
    let norm = hurwitz_zeta(fit.gamma, fit.x_min as f64);
    let exceed: usize = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(seed, &[b as u64]));
            let synthetic: Vec<u64> = (0..n)
                .map(|_| {
                    if body.is_empty() || rng.random_bool(tail_share) {
                        draw_tail(&mut rng, fit.x_min, fit.gamma, norm)
                    } else {
                        body[rng.random_range(0..body.len())]
                    }
                })
                .collect();
            let hist = histogram(&synthetic);
            match scan_xmin(&hist) {
                Some((_, _, ks, _)) if hist.len() >= MIN_DISTINCT => usize::from(ks > fit.ks),
                _ => 1,
            }
        })
        .sum();
    Ok(exceed as f64 / resamples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_estimator_example() {
        let g = fit_gamma(&[2.0, 4.0], 2.0).unwrap();
        assert!((g - (1.0 + 2.0 / 2f64.ln())).abs() < 1e-12);
        assert!((g - 3.885).abs() < 1e-3);
        assert_eq!(fit_gamma(&[3.0, 3.0, 3.0], 3.0), Err(FitError::Degenerate));
        assert_eq!(fit_gamma(&[1.0, 5.0], 2.0), Err(FitError::TooFewSamples { need: 2, got: 1 }));
    }

    #[test]
    fn continuous_estimator_is_scale_free() {
        let xs = [3.0, 4.0, 9.0, 12.0, 30.0];
        let a = fit_gamma(&xs, 3.0).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * 7.0).collect();
        assert!((a - fit_gamma(&scaled, 21.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_zeta_values() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((hurwitz_zeta(2.0, 1.0) - pi2 / 6.0).abs() < 1e-12);
        assert!((hurwitz_zeta(4.0, 1.0) - pi2 * pi2 / 90.0).abs() < 1e-12);
        // ζ(2, 1/2) = π²/2
        assert!((hurwitz_zeta(2.0, 0.5) - pi2 / 2.0).abs() < 1e-11);
        // shift identity ζ(s, q) = q^{-s} + ζ(s, q + 1)
        for &(s, q) in &[(2.5, 5.0), (1.3, 17.0), (3.7, 2.0), (2.75, 1234.0)] {
            let lhs = hurwitz_zeta(s, q);
            let rhs = q.powf(-s) + hurwitz_zeta(s, q + 1.0);
            assert!((lhs - rhs).abs() < 1e-12 * lhs, "{s} {q}");
        }
    }

    #[test]
    fn discrete_estimator_solves_the_score_equation() {
        let xs: Vec<u64> = vec![1, 2, 4, 4, 3, 9, 2, 2, 5];
        let g = fit_gamma_discrete(&xs, 2).unwrap();
        let tail: Vec<f64> = xs.iter().filter(|&&x| x >= 2).map(|&x| x as f64).collect();
        let mean_log = tail.iter().map(|x| x.ln()).sum::<f64>() / tail.len() as f64;
        // d/dγ ln ζ(γ, 2) = -E[ln X] at the MLE
        let h = 1e-5;
        let dlog = (hurwitz_zeta(g + h, 2.0).ln() - hurwitz_zeta(g - h, 2.0).ln()) / (2.0 * h);
        assert!((dlog + mean_log).abs() < 1e-6, "{dlog} {mean_log}");
        assert_eq!(fit_gamma_discrete(&[5, 5], 5), Err(FitError::Degenerate));
    }

    #[test]
    fn ks_matches_brute_force() {
        let xs: Vec<u64> = vec![5, 5, 6, 7, 7, 7, 9, 12, 20, 33, 5, 8];
        let (x_min, gamma) = (5, 2.3);
        let norm = hurwitz_zeta(gamma, 5.0);
        let n = xs.len() as f64;
        let mut brute: f64 = 0.0;
        let mut below = 0.0;
        for t in 5..=200u64 {
            below += (t as f64).powf(-gamma) / norm;
            let s = xs.iter().filter(|&&x| x <= t).count() as f64 / n;
            brute = brute.max((s - below).abs());
        }
        assert!((ks_statistic(&xs, x_min, gamma) - brute).abs() < 1e-9);
    }

    #[test]
    fn sampler_has_the_exact_mass_function() {
        let xs = sample_discrete_power_law(200_000, 2.5, 5, 1);
        assert!(xs.iter().all(|&x| x >= 5));
        let norm = hurwitz_zeta(2.5, 5.0);
        for x in [5u64, 6, 8, 12, 30] {
            let emp = xs.iter().filter(|&&v| v >= x).count() as f64 / xs.len() as f64;
            let model = hurwitz_zeta(2.5, x as f64) / norm;
            let sd = (model * (1.0 - model) / xs.len() as f64).sqrt();
            assert!((emp - model).abs() <= 4.0 * sd + 1e-12, "x={x}: {emp} vs {model}");
        }
    }

    #[test]
    fn select_xmin_errors() {
        assert_eq!(select_xmin(&[4; 50]), Err(FitError::TooFewDistinct { need: 10, got: 1 }));
        let few: Vec<u64> = (1..=9).collect();
        assert!(matches!(select_xmin(&few), Err(FitError::TooFewDistinct { .. })));
    }

    #[test]
    fn recovers_exponent_and_cutoff() {
        let xs = sample_discrete_power_law(50_000, 2.5, 5, 3);
        let fit = fit_power_law(&xs, 0, 0).unwrap();
        assert!((fit.gamma - 2.5).abs() < 0.05, "{fit:?}");
        assert!((3..=8).contains(&fit.x_min), "{fit:?}");
    }

    #[test]
    fn bootstrap_is_deterministic_and_checks_resamples() {
        let xs = sample_discrete_power_law(2_000, 2.5, 3, 9);
        let fit = fit_power_law(&xs, 0, 0).unwrap();
        let p = bootstrap_pvalue(&xs, &fit, 100, 4).unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(p, bootstrap_pvalue(&xs, &fit, 100, 4).unwrap());
        assert_eq!(bootstrap_pvalue(&xs, &fit, 0, 4), Err(FitError::Resamples { min: 100, got: 0 }));
    }
}
