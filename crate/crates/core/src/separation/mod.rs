//! Degree-class thresholds, vertex labels and separation checks.
//!
//! High-degree vertices are the top `h` by degree and are told apart by
//! degree rank. Medium-degree vertices follow them and are told apart by the
//! bit vector of their adjacencies to the high-degree vertices.

mod check;
pub(crate) mod label;

pub use check::{
    check_separation, degree_concentration, neighborhood_distance, unique_degree_prefix, ConcentrationReport, ConcentrationRow,
    SeparationReport, Witness,
};
pub use label::{label, max_collision_free_medium, HighLabel, LabelFailure, LabelMode, LabelSet, MediumLabel};

use std::fmt;

use thiserror::Error;

use crate::kv::KvBlock;
use crate::models::{big_gamma, PowerLawParams};

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("epsilon = {0} must lie in (0, 1/9)")]
    ErEpsilon(f64),
    #[error("edge probability p = {0} must lie in (0, 1/2]")]
    ErProbability(f64),
    #[error("{name} = {value} out of range: {reason}")]
    Constant { name: &'static str, value: f64, reason: &'static str },
    #[error("infeasible thresholds: {0}")]
    Infeasible(String),
    #[error("need at least one high-degree vertex")]
    NoHighVertices,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdWarning {
    /// `log(K₀^{γ-1} K₁^{γ-2})` is negative, so the medium-degree constant
    /// leans on the large-n regime.
    NegativeLogTerm(f64),
}

impl fmt::Display for ThresholdWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdWarning::NegativeLogTerm(v) => {
                write!(f, "log(K0^(g-1) K1^(g-2)) = {v:.4} is negative; medium threshold only meaningful for large n")
            }
        }
    }
}

/// Constants the thresholds were derived from, kept for reporting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThresholdConstants {
    pub epsilon: Option<f64>,
    pub epsilon2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub big_gamma: Option<f64>,
    /// Real-valued thresholds before flooring.
    pub high_real: Option<f64>,
    pub last_medium_real: Option<f64>,
}

/// Sizes of the degree classes plus the separation targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    /// Number of high-degree vertices `h`.
    pub high: usize,
    /// Number of medium-degree vertices.
    pub medium: usize,
    /// Last medium rank `m_l` (power-law model only).
    pub last_medium: Option<usize>,
    /// Required degree gap `d` between high-degree vertices.
    pub degree_gap: f64,
    /// Required neighborhood distance `d′` between medium-degree vertices.
    pub neighborhood_gap: f64,
    pub constants: ThresholdConstants,
    pub warnings: Vec<ThresholdWarning>,
}

impl Thresholds {
    /// Explicit class sizes, as tuned for experiments. Separation targets
    /// default to 1.
    pub fn with_counts(high: usize, medium: usize) -> Result<Self, ThresholdError> {
        if high == 0 {
            return Err(ThresholdError::NoHighVertices);
        }
        Ok(Thresholds {
            high,
            medium,
            last_medium: None,
            degree_gap: 1.0,
            neighborhood_gap: 1.0,
            constants: ThresholdConstants::default(),
            warnings: Vec::new(),
        })
    }

    /// Total number of labeled vertices `x`.
    pub fn labeled(&self) -> usize {
        self.high + self.medium
    }

    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::default();
        kv.insert("high", self.high);
        kv.insert("medium", self.medium);
        if let Some(ml) = self.last_medium {
            kv.insert("last_medium", ml);
        }
        kv.insert("d", self.degree_gap);
        kv.insert("d_prime", self.neighborhood_gap);
        let c = &self.constants;
        for (k, v) in [
            ("epsilon", c.epsilon),
            ("epsilon2", c.epsilon2),
            ("c1", c.c1),
            ("c2", c.c2),
            ("big_gamma", c.big_gamma),
            ("high_real", c.high_real),
            ("last_medium_real", c.last_medium_real),
        ] {
            if let Some(v) = v {
                kv.insert(k, v);
            }
        }
        kv
    }
}

/// Real-valued high-degree count `n^{(1-ε)/8}` for G(n, p).
pub fn er_high_threshold(n: usize, epsilon: f64) -> f64 {
    (n as f64).powf((1.0 - epsilon) / 8.0)
}

/// Thresholds for G(n, p): `h = ⌊n^{(1-ε)/8}⌋`, every other vertex medium,
/// `d = 3`, `d′ = 3 log n`.
pub fn er_thresholds(n: usize, p: f64, epsilon: f64) -> Result<Thresholds, ThresholdError> {
    if !(epsilon > 0.0 && epsilon < 1.0 / 9.0) {
        return Err(ThresholdError::ErEpsilon(epsilon));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(ThresholdError::ErProbability(p));
    }
    let real = er_high_threshold(n, epsilon);
    let high = (real.floor() as usize).max(1).min(n.max(1));
    Ok(Thresholds {
        high,
        medium: n.saturating_sub(high),
        last_medium: None,
        degree_gap: 3.0,
        neighborhood_gap: 3.0 * (n as f64).ln(),
        constants: ThresholdConstants { epsilon: Some(epsilon), high_real: Some(real), ..Default::default() },
        warnings: Vec::new(),
    })
}

/// `K₁(ε₁, C₁)`.
pub fn k1(w: f64, gamma: f64, epsilon1: f64, c1: f64) -> f64 {
    ((gamma - 2.0) / (gamma - 1.0).powi(3) * w * epsilon1 * epsilon1 / (16.0 * c1)).powf((gamma - 1.0) / (2.0 * gamma - 1.0))
}

/// Real-valued high-degree threshold
/// `h_m = K₁ n^{1/(2γ-1)} (log n)^{-(γ-1)/(2γ-1)}`.
pub fn high_threshold(n: usize, w: f64, gamma: f64, epsilon1: f64, c1: f64) -> f64 {
    let nf = n as f64;
    k1(w, gamma, epsilon1, c1) * nf.powf(1.0 / (2.0 * gamma - 1.0)) * nf.ln().powf(-(gamma - 1.0) / (2.0 * gamma - 1.0))
}

/// Real-valued medium-degree threshold `m_l`, or `None` when the base of
/// the `K₂` denominator is not positive. The second value is
/// `log(K₀^{γ-1} K₁^{γ-2})`.
pub fn medium_threshold(params: &PowerLawParams, epsilon1: f64, c1: f64, epsilon2: f64, c2: f64) -> (Option<f64>, f64) {
    let gamma = params.gamma();
    let nf = params.n() as f64;
    let big = big_gamma(gamma);
    let product = params.k0().powf(gamma - 1.0) * k1(params.average_degree(), gamma, epsilon1, c1).powf(gamma - 2.0);
    let log_term = product.ln();
    let base = c2 + 2.0 * big + 2.0 * log_term + 2.0 * epsilon2;
    if base <= 0.0 {
        return (None, log_term);
    }
    let k2 = product / base.powf(gamma - 1.0);
    let ml = k2 * nf.powf(big) * nf.ln().powf(-3.0 * (gamma - 1.0).powi(2) / (2.0 * gamma - 1.0));
    (Some(ml), log_term)
}

/// Thresholds for the random power-law model from the separation bounds.
pub fn plg_thresholds(
    params: &PowerLawParams,
    epsilon1: f64,
    c1: f64,
    epsilon2: f64,
    c2: f64,
) -> Result<Thresholds, ThresholdError> {
    if !(epsilon1 > 0.0 && epsilon1 <= 1.0) {
        return Err(ThresholdError::Constant { name: "epsilon1", value: epsilon1, reason: "must lie in (0, 1]" });
    }
    for (name, value) in [("c1", c1), ("epsilon2", epsilon2), ("c2", c2)] {
        if value.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(ThresholdError::Constant { name, value, reason: "must be positive" });
        }
    }
    let n = params.n();
    let gamma = params.gamma();
    let hm = high_threshold(n, params.average_degree(), gamma, epsilon1, c1);
    let (ml, log_term) = medium_threshold(params, epsilon1, c1, epsilon2, c2);
    let mut warnings = Vec::new();
    if log_term < 0.0 {
        warnings.push(ThresholdWarning::NegativeLogTerm(log_term));
    }
    let ml = ml.ok_or_else(|| ThresholdError::Infeasible("medium-degree constant K2 is undefined".into()))?;
    if hm <= params.i0() {
        return Err(ThresholdError::Infeasible(format!("h_m = {hm:.3} does not exceed i0 = {:.3}", params.i0())));
    }
    if hm >= ml {
        return Err(ThresholdError::Infeasible(format!("h_m = {hm:.3} is not below m_l = {ml:.3}")));
    }
    let high = (hm.floor() as usize).max(1).min(n);
    let last = (ml.floor() as usize).min(n).max(high);
    let nf = n as f64;
    Ok(Thresholds {
        high,
        medium: last - high,
        last_medium: Some(last),
        degree_gap: nf.powf(1.0 / (2.0 * gamma - 1.0)),
        neighborhood_gap: epsilon2 * nf.ln(),
        constants: ThresholdConstants {
            epsilon: Some(epsilon1),
            epsilon2: Some(epsilon2),
            c1: Some(c1),
            c2: Some(c2),
            big_gamma: Some(big_gamma(gamma)),
            high_real: Some(hm),
            last_medium_real: Some(ml),
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_high_count() {
        // n^{1/8} at n = 2^24 is 8; any positive epsilon floors just below it
        assert!((er_high_threshold(1 << 24, 1e-4) - 8.0).abs() < 0.01);
        assert_eq!(er_thresholds(1 << 24, 0.1, 1e-4).unwrap().high, 7);
        assert!((er_high_threshold(256, 1e-12) - 2.0).abs() < 1e-9);
        assert_eq!(er_thresholds(256, 0.1, 0.05).unwrap().high, 1);
        assert_eq!(er_thresholds(256, 0.1, 0.5), Err(ThresholdError::ErEpsilon(0.5)));
        assert_eq!(er_thresholds(256, 0.7, 0.05), Err(ThresholdError::ErProbability(0.7)));
        let t = er_thresholds(2000, 0.1, 0.01).unwrap();
        assert_eq!(t.high + t.medium, 2000);
        assert_eq!(t.degree_gap, 3.0);
        assert!((t.neighborhood_gap - 3.0 * 2000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn high_threshold_at_a_million() {
        let hm = high_threshold(1_000_000, 20.0, 2.75, 1.0, 1.0);
        // K1 = (0.75 / 1.75^3 * 20 / 16)^(1.75/4.5)
        let k1 = (0.75f64 / 5.359375 * 1.25).powf(1.75 / 4.5);
        let expected = k1 * 1e6f64.powf(1.0 / 4.5) * 1e6f64.ln().powf(-1.75 / 4.5);
        assert!((hm - expected).abs() < 1e-12);
        assert!((hm - 3.94).abs() < 0.01, "h_m = {hm}");
        assert_eq!(hm.floor() as usize, 3);
    }

    #[test]
    fn plg_thresholds_infeasible_at_desk_scale() {
        let p = PowerLawParams::derive_clamped(1_000_000, 1000.0, 20.0, 2.75).unwrap();
        let err = plg_thresholds(&p, 1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, ThresholdError::Infeasible(_)), "{err}");
        assert!(matches!(plg_thresholds(&p, 1.5, 1.0, 1.0, 1.0), Err(ThresholdError::Constant { .. })));
        assert!(matches!(plg_thresholds(&p, 1.0, 0.0, 1.0, 1.0), Err(ThresholdError::Constant { .. })));
    }

    #[test]
    fn medium_threshold_formula() {
        let p = PowerLawParams::derive_clamped(1_000_000, 1000.0, 20.0, 2.75).unwrap();
        let (ml, log_term) = medium_threshold(&p, 1.0, 1.0, 1.0, 1.0);
        let g = 2.75f64;
        let k1v = k1(20.0, g, 1.0, 1.0);
        let prod = p.k0().powf(g - 1.0) * k1v.powf(g - 2.0);
        assert!((log_term - prod.ln()).abs() < 1e-12);
        let base = 1.0 + 2.0 * big_gamma(g) + 2.0 * prod.ln() + 2.0;
        let expected = prod / base.powf(g - 1.0) * 1e6f64.powf(big_gamma(g)) * 1e6f64.ln().powf(-3.0 * 1.75 * 1.75 / 4.5);
        assert!((ml.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn fixed_counts() {
        let t = Thresholds::with_counts(64, 374).unwrap();
        assert_eq!(t.labeled(), 438);
        assert_eq!(Thresholds::with_counts(0, 3), Err(ThresholdError::NoHighVertices));
        assert_eq!(t.to_kv().raw("high"), Some("64"));
    }
}
