//! The weighted reversed-rank mass `sum_i W_i L~_i (n - L~_i)`, the denominator
//! of the resampled statistic's general form.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::coeff::rat;
use super::enumerate::weighted_l_sum;
use crate::bootstrap::draw_weights;
use crate::rng::{derive_seed, stream_rng};

/// `(n-1)^2 (n^2 + 2n - 2) / (6n)`
pub fn weighted_l_mean_exact(n: u64) -> BigRational {
    let n = n as i64;
    rat((n - 1) * (n - 1) * (n * n + 2 * n - 2), 6 * n)
}

pub fn weighted_l_mean(n: u64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * (nf - 1.0) * (nf * nf + 2.0 * nf - 2.0) / (6.0 * nf)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedLEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
}

/// Monte Carlo over weight draws, each paired with a fresh random ordering of
/// the responses.
pub fn weighted_l_monte_carlo(n: usize, draws: usize, seed: u64) -> WeightedLEstimate {
    const CHUNK: usize = 20_000;
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(derive_seed(seed, &[c as u64]), 0);
            let mut ranks: Vec<usize> = (0..n).collect();
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..CHUNK.min(draws - c * CHUNK) {
                ranks.shuffle(&mut rng);
                let w = draw_weights(n, &mut rng);
                let v = weighted_l_sum(w.counts(), &ranks) as f64;
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let d = draws as f64;
    let mean = s1 / d;
    let variance = (s2 / d - mean * mean) * d / (d - 1.0);
    WeightedLEstimate {
        mean,
        stderr: (variance / d).sqrt(),
        variance,
    }
}
