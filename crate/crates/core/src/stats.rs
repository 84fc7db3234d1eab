//! Statistical checks used by batch summaries and tests.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Result of a chi-square goodness-of-fit test against the uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquareTest {
    /// True when uniformity is not rejected at significance `alpha`.
    pub fn accepts(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Chi-square test of `counts` against equal expected frequencies.
///
/// Panics if fewer than two categories or zero total count are given.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquareTest {
    assert!(counts.len() >= 2, "need at least two categories");
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "no observations");
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = counts.len() as u64 - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    }
}

/// Two-sided normal quantile for the given confidence level (0.99 → 2.5758…).
pub fn z_for_confidence(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

/// Whether `successes` out of `trials` is consistent with probability `p`
/// under a normal-approximation binomial interval. Degenerate `p` (0 or 1)
/// requires an exact match.
pub fn within_binomial_confidence(successes: u64, trials: u64, p: f64, confidence: f64) -> bool {
    assert!(trials > 0);
    let observed = successes as f64 / trials as f64;
    if p <= 0.0 || p >= 1.0 {
        return observed == p;
    }
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (observed - p).abs() <= z_for_confidence(confidence) * sigma
}
