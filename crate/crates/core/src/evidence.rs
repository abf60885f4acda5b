//! Model selection between Exponential and Weibull failure-time models.
//!
//! Both models put the scale-invariant prior on `λ`, whose normalizing
//! constant is shared and cancels, as do the differentials of the data. The
//! Weibull shape prior `C_k / k` must be proper: as its range widens, `C_k`
//! shrinks toward zero and the Weibull model is penalized without bound, so
//! open ranges are refused rather than silently scored.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::dataset::ReliabilityData;
use crate::error::{Error, Result};
use crate::quadrature::{linspace, Integrator};

pub const DEFAULT_K_RANGE: (f64, f64) = (0.2, 5.0);
pub const CANCELLED_FACTORS: &str = "C_lambda,(r-1)!,prod dx_i";

/// Range of the Weibull shape prior `C_k / k` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for PriorRange {
    fn default() -> Self {
        Self { lo: DEFAULT_K_RANGE.0, hi: DEFAULT_K_RANGE.1 }
    }
}

impl PriorRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidInput("prior range bounds must be numbers".into()));
        }
        if lo <= 0.0 || hi.is_infinite() {
            return Err(Error::ImproperPrior(format!(
                "shape range [{lo}, {hi}] makes the 1/k prior improper; its normalizer \
                 1/log(hi/lo) goes to zero and would drive the Weibull model's posterior \
                 probability to zero whatever the data. Give a finite range with lo > 0"
            )));
        }
        if !(hi > lo) {
            return Err(Error::InvalidInput(format!("prior range needs hi > lo, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn log_normalizer(&self) -> f64 {
        -(self.hi / self.lo).ln().ln()
    }
}

fn check_failures(data: &ReliabilityData) -> Result<usize> {
    match data.r() {
        0 => Err(Error::DivergentEvidence("at least one failure is needed".into())),
        r => Ok(r),
    }
}

/// Log evidence of the Exponential model with the shared factors except
/// `(r-1)!` dropped: `log[(r-1)! / (Σx + Σy)^r]`.
pub fn exponential_evidence_core(data: &ReliabilityData) -> Result<f64> {
    let r = check_failures(data)? as f64;
    Ok(ln_gamma(r) - r * data.exposure().ln())
}

/// `log(Σ x_i^k + Σ y_j^k)` without overflow.
fn log_power_sum(logs: &[f64], k: f64) -> f64 {
    let max = logs.iter().map(|l| k * l).fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (k * l - max).exp()).sum::<f64>().ln()
}

/// Log evidence of the Weibull model with the same factors dropped:
/// `log[C_k (r-1)! ∫ k^{r-2} Π x_i^{k-1} / (Σx^k + Σy^k)^r dk]`.
pub fn weibull_evidence_core(data: &ReliabilityData, range: &PriorRange) -> Result<f64> {
    let range = PriorRange::new(range.lo, range.hi)?;
    let r = check_failures(data)? as f64;
    let all_logs: Vec<f64> = data.failures.iter().chain(&data.survivals).map(|t| t.ln()).collect();
    let sum_log_failures: f64 = data.failures.iter().map(|x| x.ln()).sum();
    let exponent = |k: f64| (r - 2.0) * k.ln() + (k - 1.0) * sum_log_failures - r * log_power_sum(&all_logs, k);

    // Locate the peak on a log-spaced scan, then integrate the rescaled
    // integrand on either side of it.
    let scan: Vec<f64> = linspace(range.lo.ln(), range.hi.ln(), 2001).into_iter().map(f64::exp).collect();
    let (peak_k, peak) = scan
        .iter()
        .map(|&k| (k, exponent(k)))
        .fold((range.lo, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if !peak.is_finite() {
        return Err(Error::Numerical("Weibull evidence integrand is not finite".into()));
    }
    let quad = Integrator::with_rel_tol(1e-8);
    let f = |k: f64| (exponent(k) - peak).exp();
    let integral = quad.integrate(f, range.lo, peak_k)? + quad.integrate(f, peak_k, range.hi)?;
    Ok(range.log_normalizer() + ln_gamma(r) + peak + integral.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEvidence {
    pub name: String,
    pub log_core: f64,
    pub posterior: f64,
}

/// Posterior model probabilities and the log evidence each rests on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport {
    pub models: Vec<ModelEvidence>,
    pub k_range: (f64, f64),
    /// Factors common to both evidences, cancelled rather than computed.
    pub cancelled: String,
}

impl EvidenceReport {
    pub fn posterior_of(&self, name: &str) -> Option<f64> {
        self.models.iter().find(|m| m.name == name).map(|m| m.posterior)
    }
}

/// Posterior probabilities of the Exponential (`prior_m1`) and Weibull
/// (`prior_m2`) models.
pub fn model_posterior(data: &ReliabilityData, range: &PriorRange, prior_m1: f64, prior_m2: f64) -> Result<EvidenceReport> {
    for p in [prior_m1, prior_m2] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("model prior {p} outside [0, 1]")));
        }
    }
    if (prior_m1 + prior_m2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("model priors sum to {}, not 1", prior_m1 + prior_m2)));
    }
    let cores = [exponential_evidence_core(data)?, weibull_evidence_core(data, range)?];
    let logs = [prior_m1.ln() + cores[0], prior_m2.ln() + cores[1]];
    let max = logs[0].max(logs[1]);
    let weights = logs.map(|l| if l == f64::NEG_INFINITY { 0.0 } else { (l - max).exp() });
    let total = weights[0] + weights[1];
    let posteriors = weights.map(|w| w / total);
    let models = ["exponential", "weibull"]
        .iter()
        .zip(cores.iter().zip(posteriors))
        .map(|(name, (&log_core, posterior))| ModelEvidence { name: name.to_string(), log_core, posterior })
        .collect();
    Ok(EvidenceReport { models, k_range: (range.lo, range.hi), cancelled: CANCELLED_FACTORS.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(failures: &[f64], survivals: &[f64]) -> ReliabilityData {
        ReliabilityData::new(failures.to_vec(), survivals.to_vec(), None).unwrap()
    }

    #[test]
    fn exponential_core_examples() {
        let v = exponential_evidence_core(&rel(&[1.0, 1.0, 1.0], &[])).unwrap();
        assert!((v - (2f64.ln() - 3.0 * 3f64.ln())).abs() < 1e-14);
        assert!((v + 2.60269).abs() < 1e-5);
        let v = exponential_evidence_core(&rel(&[2.0], &[3.0])).unwrap();
        assert!((v + 5f64.ln()).abs() < 1e-14);
        let a = exponential_evidence_core(&rel(&[1.0, 2.5], &[4.0])).unwrap();
        let b = exponential_evidence_core(&rel(&[3.0, 7.5], &[12.0])).unwrap();
        assert!((b - a + 2.0 * 3f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn no_failures_diverges() {
        let d = rel(&[], &[1.0]);
        let err = exponential_evidence_core(&d).unwrap_err();
        assert!(err.to_string().contains("evidence diverges under Jeffreys prior"));
        assert!(weibull_evidence_core(&d, &PriorRange::default()).is_err());
    }

    #[test]
    fn improper_ranges_refused() {
        assert!(matches!(PriorRange::new(0.0, 5.0), Err(Error::ImproperPrior(_))));
        assert!(matches!(PriorRange::new(0.5, f64::INFINITY), Err(Error::ImproperPrior(_))));
        assert!(matches!(PriorRange::new(2.0, 1.0), Err(Error::InvalidInput(_))));
        let bad = PriorRange { lo: 0.0, hi: 1.0 };
        assert!(weibull_evidence_core(&rel(&[1.0], &[]), &bad).is_err());
    }

    #[test]
    fn weibull_core_closed_cases() {
        let range = PriorRange::new(0.5, 4.0).unwrap();
        // x = [1, 1]: integrand is 1/4 everywhere.
        let v = weibull_evidence_core(&rel(&[1.0, 1.0], &[]), &range).unwrap();
        assert!((v - (range.log_normalizer() + (3.5f64 / 4.0).ln())).abs() < 1e-9);
        // x = [1]: integrand 1/k integrates to log(hi/lo) = 1/C_k.
        let v = weibull_evidence_core(&rel(&[1.0], &[]), &range).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn narrow_shape_range_reduces_to_exponential() {
        let d = rel(&[0.7, 1.9, 2.4], &[3.0, 0.5]);
        let eps = 1e-4;
        let range = PriorRange::new(1.0 - eps, 1.0 + eps).unwrap();
        let w = weibull_evidence_core(&d, &range).unwrap();
        let e = exponential_evidence_core(&d).unwrap();
        assert!((w - (e + range.log_normalizer() + (2.0 * eps).ln())).abs() < 1e-6);
    }

    #[test]
    fn large_times_do_not_overflow() {
        let d = rel(&[1e4, 2e4, 5e3], &[3e4]);
        let v = weibull_evidence_core(&d, &PriorRange::new(0.2, 50.0).unwrap()).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn model_posterior_limits() {
        let d = rel(&[0.7, 1.9, 2.4], &[3.0]);
        let eps = 1e-3;
        let range = PriorRange::new(1.0 - eps, 1.0 + eps).unwrap();
        let rep = model_posterior(&d, &range, 0.5, 0.5).unwrap();
        // C_k · 2ε → 1 as the range narrows around k = 1.
        let shift = range.log_normalizer() + (2.0 * eps).ln();
        assert!(shift.abs() < 1e-6);
        assert!((rep.posterior_of("exponential").unwrap() - 0.5).abs() < 2e-3);

        let rep = model_posterior(&d, &PriorRange::default(), 1.0, 0.0).unwrap();
        assert_eq!(rep.posterior_of("exponential"), Some(1.0));
        assert_eq!(rep.posterior_of("weibull"), Some(0.0));
        let sum: f64 = rep.models.iter().map(|m| m.posterior).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(rep.cancelled, CANCELLED_FACTORS);
        assert!(model_posterior(&d, &PriorRange::default(), 0.7, 0.7).is_err());
    }
}
