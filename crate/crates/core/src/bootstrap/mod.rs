//! Multinomial resampling of the rank correlation.
//!
//! A resample is represented by its multinomial count vector over the
//! original indices. Because resampling never reorders X and copies of one
//! unit share their Y value, the rank-gap sum of a materialized resample
//! equals a sum over consecutive *present* units in the original X-ordering:
//!
//! ```text
//! sum_i |R_b[i+1] - R_b[i]|  ==  sum_i 1(W[i] > 0) |R~[i + k(i)] - R~[i]|
//! ```
//!
//! where `R~_i = 1(W_i > 0) * sum_j W_j 1(Y_j <= Y_i)` and `i + k(i)` is the
//! next present unit. [`ResampleKernel`] evaluates every bootstrap statistic
//! through this representation in O(n) per replicate; [`xi_boot_direct`]
//! materializes the resample and is kept as the reference path.

mod distribution;

pub use distribution::{
    bootstrap_distribution, ci_hybrid1, ci_hybrid2, ci_oracle_var, empirical_quantile, var_b1,
    var_b2, BootstrapDistribution, CiMethod, ConfidenceInterval, ReplicateStatistic,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BivariateSample;
use crate::rank::{argsort, TieBreak};
use crate::xi::{general_sums, general_value, simple_value, xi_general};

/// Multiplicities of the original units in one resample; they sum to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapWeights(Vec<u32>);

impl BootstrapWeights {
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
        if total != counts.len() as u64 {
            return Err(Error::param(
                "weights",
                format!("counts sum to {total}, expected {}", counts.len()),
            ));
        }
        Ok(Self(counts))
    }

    /// The identity resample.
    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `n` uniform index draws tallied into counts.
pub fn draw_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BootstrapWeights {
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    BootstrapWeights(w)
}

/// Integer building blocks of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateSums {
    /// `sum 1(W[i]>0) |R~[i+k(i)] - R~[i]|`, the rank-gap sum of the resample.
    pub gap_sum: u64,
    /// `sum 1(W[i]>0) sum_j W_j 1(Y strictly between Y[i] and Y[i+k(i)])`.
    pub window_sum: u64,
    /// `sum_i W_i L~_i (n - L~_i)`, the reversed-rank mass of the resample.
    pub mass: u64,
}

/// Precomputed orderings of one sample for fast replicate evaluation.
#[derive(Debug, Clone)]
pub struct ResampleKernel {
    n: usize,
    x_order: Vec<usize>,
    y_group: Vec<usize>,
    groups: usize,
    continuous: bool,
}

impl ResampleKernel {
    /// X-ties in the original sample are ordered by index, which matches
    /// [`xi_boot_direct`] with [`TieBreak::ByIndex`].
    pub fn new(sample: &BivariateSample) -> Self {
        let n = sample.len();
        let y = sample.y();
        let y_order = argsort(y);
        let mut y_group = vec![0; n];
        let mut g = 0;
        for (pos, &i) in y_order.iter().enumerate() {
            if pos > 0 && y[i] != y[y_order[pos - 1]] {
                g += 1;
            }
            y_group[i] = g;
        }
        Self {
            n,
            x_order: argsort(sample.x()),
            y_group,
            groups: g + 1,
            continuous: sample.is_continuous(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sums(&self, weights: &BootstrapWeights) -> ReplicateSums {
        let w = weights.counts();
        assert_eq!(w.len(), self.n, "weights length does not match sample");
        // cum[g] = total weight on Y-groups 0..=g
        let mut cum = vec![0u64; self.groups];
        for (i, &wi) in w.iter().enumerate() {
            cum[self.y_group[i]] += u64::from(wi);
        }
        for g in 1..self.groups {
            cum[g] += cum[g - 1];
        }
        let total = cum[self.groups - 1];
        let below = |g: usize| if g == 0 { 0 } else { cum[g - 1] };

        let mut mass = 0u64;
        for (i, &wi) in w.iter().enumerate() {
            if wi > 0 {
                let l = total - below(self.y_group[i]);
                mass += u64::from(wi) * l * (total - l);
            }
        }

        let mut gap_sum = 0u64;
        let mut window_sum = 0u64;
        let mut prev: Option<usize> = None;
        for &i in &self.x_order {
            if w[i] == 0 {
                continue;
            }
            if let Some(p) = prev {
                let (gp, gi) = (self.y_group[p], self.y_group[i]);
                gap_sum += cum[gp].abs_diff(cum[gi]);
                let (lo, hi) = (gp.min(gi), gp.max(gi));
                if hi > lo {
                    window_sum += cum[hi - 1] - cum[lo];
                }
            }
            prev = Some(i);
        }
        ReplicateSums {
            gap_sum,
            window_sum,
            mass,
        }
    }

    /// The bootstrapped statistic: the general form evaluated on the resample.
    pub fn xi_tilde(&self, weights: &BootstrapWeights) -> Result<f64> {
        let s = self.sums(weights);
        general_value(self.n, s.gap_sum, s.mass)
    }

    /// The resample's rank-gap sum scaled by the fixed tie-free constant
    /// `3 / (n^2 - 1)`.
    pub fn xi_hat(&self, weights: &BootstrapWeights) -> Result<f64> {
        self.require_tie_free()?;
        require_present(weights)?;
        Ok(simple_value(self.n, self.sums(weights).gap_sum))
    }

    /// Like [`Self::xi_hat`] but counting only units strictly inside each
    /// nearest-neighbour window.
    pub fn xi_bar(&self, weights: &BootstrapWeights) -> Result<f64> {
        self.require_tie_free()?;
        Ok(simple_value(self.n, self.sums(weights).window_sum))
    }

    fn require_tie_free(&self) -> Result<()> {
        if !self.continuous {
            return Err(Error::Precondition(
                "the tie-free reformulations need distinct X and Y values".into(),
            ));
        }
        Ok(())
    }
}

fn require_present(weights: &BootstrapWeights) -> Result<()> {
    if weights.counts().iter().all(|&c| c == 0) {
        return Err(Error::Precondition("all weights are zero".into()));
    }
    Ok(())
}

/// The bootstrapped statistic computed on the explicitly materialized
/// resample, with X-ties of the resample ordered by `tie_break`.
pub fn xi_boot_direct(
    sample: &BivariateSample,
    weights: &BootstrapWeights,
    tie_break: TieBreak,
) -> Result<f64> {
    let resample = sample.repeat_by(weights.counts())?;
    Ok(xi_general(&resample, tie_break)?.value)
}

/// Rank-gap sum of the materialized resample under `tie_break`.
pub fn materialized_gap_sum(
    sample: &BivariateSample,
    weights: &BootstrapWeights,
    tie_break: TieBreak,
) -> Result<u64> {
    let resample = sample.repeat_by(weights.counts())?;
    Ok(general_sums(&resample, tie_break)?.0)
}

pub fn xi_hat_b(sample: &BivariateSample, weights: &BootstrapWeights) -> Result<f64> {
    ResampleKernel::new(sample).xi_hat(weights)
}

pub fn xi_bar_b(sample: &BivariateSample, weights: &BootstrapWeights) -> Result<f64> {
    ResampleKernel::new(sample).xi_bar(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_rotation_sample, ModelSpec};
    use crate::rng::stream_rng;
    use crate::xi::xi_simple;
    use proptest::prelude::*;

    fn gaussian(n: usize, seed: u64) -> BivariateSample {
        gaussian_rotation_sample(&ModelSpec::new(0.4, n, seed).unwrap()).unwrap()
    }

    /// Literal double-sum definition of the window reformulation, with the
    /// sample re-indexed in X order.
    fn xi_bar_literal(sample: &BivariateSample, w: &[u32]) -> f64 {
        let n = sample.len();
        let ord = argsort(sample.x());
        let y: Vec<f64> = ord.iter().map(|&i| sample.y()[i]).collect();
        let wx: Vec<u32> = ord.iter().map(|&i| w[i]).collect();
        let mut total = 0u64;
        for i in 0..n - 1 {
            if wx[i] == 0 {
                continue;
            }
            for k in 1..n - i {
                let gap_empty = (1..k).all(|l| wx[i + l] == 0);
                if !gap_empty || wx[i + k] == 0 {
                    continue;
                }
                let (lo, hi) = (y[i].min(y[i + k]), y[i].max(y[i + k]));
                for j in 0..n {
                    if lo < y[j] && y[j] < hi {
                        total += u64::from(wx[j]);
                    }
                }
            }
        }
        simple_value(n, total)
    }

    #[test]
    fn single_point_weights() {
        let mut rng = stream_rng(0, 0);
        assert_eq!(draw_weights(1, &mut rng).counts(), &[1]);
    }

    #[test]
    fn weights_conserve_mass() {
        let mut rng = stream_rng(3, 0);
        for n in [2usize, 5, 17, 300] {
            let w = draw_weights(n, &mut rng);
            assert_eq!(w.counts().iter().map(|&c| c as usize).sum::<usize>(), n);
        }
    }

    #[test]
    fn empty_cell_probability_n4() {
        let mut rng = stream_rng(4, 0);
        let draws = 1_000_000;
        let zeros = (0..draws)
            .filter(|_| draw_weights(4, &mut rng).counts()[0] == 0)
            .count();
        let p = 0.316_406_25;
        let phat = zeros as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((phat - p).abs() < 3.0 * se, "{phat}");
    }

    #[test]
    fn from_counts_checks_total() {
        assert!(BootstrapWeights::from_counts(vec![2, 0, 0]).is_err());
        assert!(BootstrapWeights::from_counts(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn identity_weights_recover_xi_n() {
        let s = gaussian(40, 1);
        let ones = BootstrapWeights::ones(40);
        let xi_n = xi_simple(&s, TieBreak::ByIndex).unwrap().value;
        let k = ResampleKernel::new(&s);
        assert_eq!(xi_boot_direct(&s, &ones, TieBreak::ByIndex).unwrap(), xi_n);
        assert_eq!(k.xi_hat(&ones).unwrap(), xi_n);
        assert!((k.xi_tilde(&ones).unwrap() - xi_n).abs() < 1e-14);
    }

    #[test]
    fn concentrated_weights_are_degenerate() {
        let s = gaussian(6, 2);
        let w = BootstrapWeights::from_counts(vec![0, 0, 6, 0, 0, 0]).unwrap();
        assert!(matches!(
            xi_boot_direct(&s, &w, TieBreak::ByIndex),
            Err(Error::DegenerateDenominator)
        ));
        assert!(matches!(
            ResampleKernel::new(&s).xi_tilde(&w),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn identity_window_sum_drops_endpoints() {
        // n = 4, y along x = [1, 4, 2, 3]: gaps 3, 2, 1 -> windows hold 2, 1, 0
        let s = BivariateSample::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 4.0, 2.0, 3.0]).unwrap();
        let ones = BootstrapWeights::ones(4);
        let k = ResampleKernel::new(&s);
        assert_eq!(k.sums(&ones).gap_sum, 6);
        assert_eq!(k.sums(&ones).window_sum, 3);
        assert!((k.xi_bar(&ones).unwrap() - (1.0 - 3.0 * 3.0 / 15.0)).abs() < 1e-15);
        assert_eq!(k.xi_bar(&ones).unwrap(), xi_bar_literal(&s, &[1, 1, 1, 1]));
    }

    #[test]
    fn tie_free_statistics_refuse_ties() {
        let s = BivariateSample::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 2.0]).unwrap();
        let ones = BootstrapWeights::ones(3);
        assert!(xi_hat_b(&s, &ones).is_err());
        assert!(xi_bar_b(&s, &ones).is_err());
    }

    proptest! {
        #[test]
        fn kernel_matches_materialized_path(n in 2usize..40, seed in any::<u64>()) {
            let s = gaussian(n, seed);
            let w = draw_weights(n, &mut stream_rng(seed, 1));
            let k = ResampleKernel::new(&s);
            let sums = k.sums(&w);
            let direct = xi_boot_direct(&s, &w, TieBreak::ByIndex);
            match direct {
                Ok(v) => prop_assert_eq!(v, k.xi_tilde(&w).unwrap()),
                Err(_) => prop_assert_eq!(sums.mass, 0),
            }
            prop_assert_eq!(sums.gap_sum, materialized_gap_sum(&s, &w, TieBreak::ByIndex).unwrap());
        }

        #[test]
        fn kernel_matches_materialized_path_with_ties(
            x in prop::collection::vec(0u8..4, 2..30),
            y in prop::collection::vec(0u8..4, 2..30),
            seed in any::<u64>(),
        ) {
            let n = x.len().min(y.len());
            let s = BivariateSample::new(
                x[..n].iter().map(|&v| f64::from(v)).collect(),
                y[..n].iter().map(|&v| f64::from(v)).collect(),
            ).unwrap();
            let w = draw_weights(n, &mut stream_rng(seed, 2));
            let k = ResampleKernel::new(&s);
            prop_assert_eq!(k.sums(&w).gap_sum, materialized_gap_sum(&s, &w, TieBreak::ByIndex).unwrap());
        }

        #[test]
        fn window_form_matches_literal_sum(n in 2usize..30, seed in any::<u64>()) {
            let s = gaussian(n, seed);
            let w = draw_weights(n, &mut stream_rng(seed, 3));
            prop_assert_eq!(xi_bar_b(&s, &w).unwrap(), xi_bar_literal(&s, w.counts()));
        }

        #[test]
        fn window_and_gap_forms_are_close(n in 2usize..200, seed in any::<u64>()) {
            let s = gaussian(n, seed);
            let w = draw_weights(n, &mut stream_rng(seed, 4));
            let k = ResampleKernel::new(&s);
            let nf = n as f64;
            let diff = (k.xi_bar(&w).unwrap() - k.xi_hat(&w).unwrap()).abs();
            prop_assert!(diff <= 6.0 * nf / (nf * nf - 1.0) + 1e-12);
        }
    }
}
