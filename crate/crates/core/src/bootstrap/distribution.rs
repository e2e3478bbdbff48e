use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{draw_weights, BootstrapWeights, ResampleKernel};
use crate::error::{Error, Result};
use crate::model::BivariateSample;
use crate::rank::TieBreak;
use crate::rng::stream_rng;
use crate::xi::xi_general;

/// Redraws allowed per replicate before a degenerate resample is an error.
const MAX_REDRAWS: u32 = 10_000;

/// Which replicate statistic [`bootstrap_distribution`] records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ReplicateStatistic {
    /// The general form on the resample.
    #[default]
    Direct,
    /// The fixed-denominator variant; needs tie-free data.
    Hat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub values: Vec<f64>,
    pub source_xi: f64,
    pub source_n: usize,
    /// Resamples with every Y tied that were discarded and redrawn.
    pub degenerate_redraws: u64,
}

impl BootstrapDistribution {
    pub fn b_count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn require_replicates(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::param(
                "bootstrap_size",
                format!("need at least 2 replicates, have {}", self.values.len()),
            ));
        }
        Ok(())
    }
}

/// Draws `b` resamples; replicate `r` uses stream `r` under `seed`, so the
/// result does not depend on how rayon schedules the work.
pub fn bootstrap_distribution(
    sample: &BivariateSample,
    b: usize,
    seed: u64,
    statistic: ReplicateStatistic,
) -> Result<BootstrapDistribution> {
    if b < 2 {
        return Err(Error::param(
            "bootstrap_size",
            format!("need B >= 2, got {b}"),
        ));
    }
    let source_xi = xi_general(sample, TieBreak::ByIndex)?.value;
    let kernel = ResampleKernel::new(sample);
    let n = sample.len();
    let draws: Vec<(f64, u32)> = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let mut redraws = 0;
            loop {
                let w = draw_weights(n, &mut rng);
                match replicate(&kernel, &w, statistic) {
                    Ok(v) => return Ok((v, redraws)),
                    Err(Error::DegenerateDenominator) if redraws < MAX_REDRAWS => redraws += 1,
                    Err(e) => return Err(e),
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(BootstrapDistribution {
        values: draws.iter().map(|d| d.0).collect(),
        source_xi,
        source_n: n,
        degenerate_redraws: draws.iter().map(|d| u64::from(d.1)).sum(),
    })
}

fn replicate(
    kernel: &ResampleKernel,
    w: &BootstrapWeights,
    stat: ReplicateStatistic,
) -> Result<f64> {
    match stat {
        ReplicateStatistic::Direct => kernel.xi_tilde(w),
        ReplicateStatistic::Hat => kernel.xi_hat(w),
    }
}

/// `n * mean (value - xi_n)^2`.
pub fn var_b1(dist: &BootstrapDistribution) -> Result<f64> {
    dist.require_replicates()?;
    let msd = dist
        .values
        .iter()
        .map(|v| (v - dist.source_xi).powi(2))
        .sum::<f64>()
        / dist.b_count() as f64;
    Ok(dist.source_n as f64 * msd)
}

/// `n * Var(values)`, with the divide-by-B variance.
pub fn var_b2(dist: &BootstrapDistribution) -> Result<f64> {
    dist.require_replicates()?;
    let m = dist.mean();
    let var = dist.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / dist.b_count() as f64;
    Ok(dist.source_n as f64 * var)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CiMethod {
    /// Hybrid bootstrap centred at the original-sample statistic.
    #[serde(rename = "HB1")]
    Hb1,
    /// Hybrid bootstrap centred at the bootstrap mean.
    #[serde(rename = "HB2")]
    Hb2,
    /// Normal interval with a supplied asymptotic variance.
    OracleVar,
}

impl CiMethod {
    pub fn label(self) -> &'static str {
        match self {
            CiMethod::Hb1 => "HB1",
            CiMethod::Hb2 => "HB2",
            CiMethod::OracleVar => "OracleVar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: CiMethod,
}

impl ConfidenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    Ok(())
}

/// Linear-interpolation empirical quantile of sorted data.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn hybrid(
    dist: &BootstrapDistribution,
    centre: f64,
    alpha: f64,
    method: CiMethod,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    dist.require_replicates()?;
    let root_n = (dist.source_n as f64).sqrt();
    let mut t: Vec<f64> = dist.values.iter().map(|v| root_n * (v - centre)).collect();
    t.sort_by(|a, b| a.partial_cmp(b).expect("finite replicates"));
    let q_lo = empirical_quantile(&t, alpha / 2.0);
    let q_hi = empirical_quantile(&t, 1.0 - alpha / 2.0);
    Ok(ConfidenceInterval {
        lower: dist.source_xi - q_hi / root_n,
        upper: dist.source_xi - q_lo / root_n,
        alpha,
        method,
    })
}

/// Interval from the quantiles of `sqrt(n) (value - xi_n)`.
pub fn ci_hybrid1(dist: &BootstrapDistribution, alpha: f64) -> Result<ConfidenceInterval> {
    hybrid(dist, dist.source_xi, alpha, CiMethod::Hb1)
}

/// Interval from the quantiles of `sqrt(n) (value - mean of values)`.
pub fn ci_hybrid2(dist: &BootstrapDistribution, alpha: f64) -> Result<ConfidenceInterval> {
    dist.require_replicates()?;
    hybrid(dist, dist.mean(), alpha, CiMethod::Hb2)
}

/// `xi_n -/+ z_{1 - alpha/2} sqrt(variance / n)`.
pub fn ci_oracle_var(xi_n: f64, n: usize, variance: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::param(
            "variance",
            format!("must be finite and >= 0, got {variance}"),
        ));
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let half = z * (variance / n as f64).sqrt();
    Ok(ConfidenceInterval {
        lower: xi_n - half,
        upper: xi_n + half,
        alpha,
        method: CiMethod::OracleVar,
    })
}
