//! Conditional moments of the window-count statistic given the sample.
//!
//! The mean is exact:
//!
//! ```text
//! E[xibar | data] = 1 - 3/(n^2-1) * sum_i sum_k |S(i,k)| c_{n,n-1,k}
//! ```
//!
//! The variance expression keeps the leading terms only and carries an
//! `O(1/n^2)` remainder. [`ConditionalVariance`] reports that scale next to the
//! value so callers can attach a tolerance band.

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::coeff::{coeff_c, coeff_c_exact, neumaier_sum, rat, CoefficientTable};
use super::window::{window_size_sums, y_in_x_order, RankGrid};
use crate::error::{Error, Result};
use crate::model::BivariateSample;

/// Default sample-size ceiling for [`cond_var_xibar`].
pub const COND_VAR_MAX_N: usize = 60;
/// Largest `n` accepted by [`cond_exp_xibar_exact`].
pub const EXACT_MEAN_MAX_N: usize = 400;
/// Constant `C` in the `C / n^2` band allowed around the leading-order
/// conditional variance. Calibrated on seeds disjoint from the test suite,
/// where `n^2` times the gap to Monte Carlo never exceeded 6.0 for n up to 160.
pub const COND_VAR_REMAINDER_CONSTANT: f64 = 8.0;

/// `sum_k c_{n,n-1,k} sum_i |S(i,k)|`.
fn weighted_window_total(y: &[f64]) -> Result<f64> {
    let n = y.len() as i64;
    let sums = window_size_sums(y)?;
    Ok(neumaier_sum(
        (1..y.len()).map(|k| sums[k] as f64 * coeff_c(n, n - 1, k as i64)),
    ))
}

pub fn cond_exp_xibar(sample: &BivariateSample) -> Result<f64> {
    let y = y_in_x_order(sample)?;
    let n = y.len() as f64;
    Ok(1.0 - 3.0 / (n * n - 1.0) * weighted_window_total(&y)?)
}

pub fn cond_exp_xibar_exact(sample: &BivariateSample) -> Result<BigRational> {
    let y = y_in_x_order(sample)?;
    let n = y.len();
    if n > EXACT_MEAN_MAX_N {
        return Err(Error::param(
            "n",
            format!("exact evaluation is limited to n <= {EXACT_MEAN_MAX_N}"),
        ));
    }
    let sums = window_size_sums(&y)?;
    let ni = n as i64;
    let mut total = BigRational::zero();
    for (k, &s) in sums.iter().enumerate().skip(1) {
        if s > 0 {
            total += coeff_c_exact(ni, ni - 1, k as i64) * rat(s as i64, 1);
        }
    }
    Ok(rat(1, 1) - rat(3, ni * ni - 1) * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalVariance {
    /// The leading-order expression.
    pub value: f64,
    pub n: usize,
    /// `1/n^2`, the order of the neglected remainder.
    pub remainder_scale: f64,
    /// `sum_i sum_k (|S| c1 + |S|^2 c2 (1 - 1/n))`
    pub single_terms: f64,
    /// `sum_{i<j} sum_k sum_l T(i,j,k,l)`, before doubling.
    pub cross_terms: f64,
    /// `sum_i sum_k |S| c1`
    pub mean_term: f64,
}

impl ConditionalVariance {
    /// Half-width of the band `c / n^2` around [`Self::value`].
    pub fn band(&self, c: f64) -> f64 {
        c * self.remainder_scale
    }
}

pub fn cond_var_xibar(sample: &BivariateSample) -> Result<ConditionalVariance> {
    cond_var_xibar_with_limit(sample, COND_VAR_MAX_N)
}

/// As [`cond_var_xibar`] with a caller-chosen ceiling on `n`. The work grows
/// like `n^4 / 24`.
pub fn cond_var_xibar_with_limit(
    sample: &BivariateSample,
    max_n: usize,
) -> Result<ConditionalVariance> {
    let n = sample.len();
    if n > max_n {
        return Err(Error::param(
            "n",
            format!(
                "the conditional variance sum is quartic in n; n = {n} exceeds the limit {max_n}. \
                 Use a smaller sample or raise the limit explicitly"
            ),
        ));
    }
    let y = y_in_x_order(sample)?;
    let grid = RankGrid::new(&y)?;
    let table = CoefficientTable::new(n);
    let shrink = 1.0 - 1.0 / n as f64;

    let mut single = Vec::new();
    let mut mean = Vec::new();
    for i in 0..n - 1 {
        for k in 1..n - i {
            let s = grid.s_ik(i, k) as f64;
            mean.push(s * table.c1(k));
            single.push(s * table.c1(k) + s * s * table.c2(k) * shrink);
        }
    }

    let per_i: Vec<f64> = (0..n.saturating_sub(2))
        .into_par_iter()
        .map(|i| cross_terms_from(&grid, &table, shrink, i))
        .collect();

    let single_terms = neumaier_sum(single);
    let mean_term = neumaier_sum(mean);
    let cross_terms = neumaier_sum(per_i);
    let nf = n as f64;
    let scale = 9.0 / ((nf * nf - 1.0) * (nf * nf - 1.0));
    Ok(ConditionalVariance {
        value: scale * (single_terms + 2.0 * cross_terms - mean_term * mean_term),
        n,
        remainder_scale: 1.0 / (nf * nf),
        single_terms,
        cross_terms,
        mean_term,
    })
}

fn cross_terms_from(grid: &RankGrid, t: &CoefficientTable, shrink: f64, i: usize) -> f64 {
    let n = grid.len();
    let mut acc = Vec::new();
    for j in i + 1..n - 1 {
        // k > j - i contributes nothing
        for k in 1..=j - i {
            for l in 1..n - j {
                let w = grid.sets(i, k, j, l);
                let cap = w.s_cap as f64;
                let left = cap + w.s_diff_ij as f64;
                let right = cap + w.s_diff_ji as f64;
                let term = if k == j - i {
                    cap * t.a1(k, l) + left * right * t.a2(k, l) * shrink
                } else {
                    let ind_ij =
                        u8::from(grid.contains(i, k, j)) + u8::from(grid.contains(i, k, j + l));
                    let ind_ji =
                        u8::from(grid.contains(j, l, i)) + u8::from(grid.contains(j, l, i + k));
                    cap * t.b1(k, l)
                        + left * right * t.b2(k, l) * shrink
                        + f64::from(ind_ij) * right * t.a2(k, l) * shrink
                        + f64::from(ind_ji) * left * t.a2(k, l) * shrink
                };
                acc.push(term);
            }
        }
    }
    neumaier_sum(acc)
}

/// Unconditional mean for i.i.d. continuous data, using `E|S(i,k)| = (n-k-1)/3`:
/// `1 - 1/(n^2-1) * sum_k (n-k)(n-k-1) c_{n,n-1,k}`.
pub fn xibar_unconditional_mean(n: usize) -> f64 {
    let ni = n as i64;
    let nf = n as f64;
    let total =
        neumaier_sum((1..ni).map(|k| ((ni - k) * (ni - k - 1)) as f64 * coeff_c(ni, ni - 1, k)));
    1.0 - total / (nf * nf - 1.0)
}

/// The two-term expansion `1/e + (3 - 1/(2e)) / n`.
pub fn xibar_mean_expansion(n: usize) -> f64 {
    let e = std::f64::consts::E;
    1.0 / e + (3.0 - 1.0 / (2.0 * e)) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::{draw_weights, ResampleKernel};
    use crate::model::{gaussian_rotation_sample, ModelSpec};
    use crate::rng::stream_rng;
    use crate::theory::coeff::to_f64;
    use crate::theory::enumerate::{xibar_mean_by_index_draws, xibar_moments_by_enumeration};

    fn sample(n: usize, rho: f64, seed: u64) -> BivariateSample {
        gaussian_rotation_sample(&ModelSpec::new(rho, n, seed).unwrap()).unwrap()
    }

    #[test]
    fn two_points_give_one() {
        let s = BivariateSample::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(cond_exp_xibar(&s).unwrap(), 1.0);
        assert_eq!(cond_exp_xibar_exact(&s).unwrap(), rat(1, 1));
    }

    #[test]
    fn ties_are_refused() {
        let s = BivariateSample::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(cond_exp_xibar(&s), Err(Error::Precondition(_))));
        assert!(cond_var_xibar(&s).is_err());
    }

    #[test]
    fn exact_mean_equals_index_draw_enumeration() {
        for n in 2..=5 {
            for seed in 0..4 {
                let s = sample(n, 0.3, seed);
                assert_eq!(
                    cond_exp_xibar_exact(&s).unwrap(),
                    xibar_mean_by_index_draws(&s).unwrap(),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn exact_mean_equals_composition_enumeration() {
        for n in [6, 7, 8] {
            let s = sample(n, -0.5, 9);
            let e = xibar_moments_by_enumeration(&s).unwrap();
            assert_eq!(cond_exp_xibar_exact(&s).unwrap(), e.mean);
            assert!((cond_exp_xibar(&s).unwrap() - to_f64(&e.mean)).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_matches_monte_carlo_at_thirty() {
        let s = sample(30, 0.5, 4);
        let kernel = ResampleKernel::new(&s);
        let draws = 100_000;
        let mut rng = stream_rng(77, 0);
        let vals: Vec<f64> = (0..draws)
            .map(|_| kernel.xi_bar(&draw_weights(30, &mut rng)).unwrap())
            .collect();
        let m = vals.iter().sum::<f64>() / draws as f64;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (v / draws as f64).sqrt();
        let exact = cond_exp_xibar(&s).unwrap();
        assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact} (se {se})");
    }

    #[test]
    fn unconditional_mean_tracks_expansion() {
        for n in [200, 1000, 5000] {
            let diff = xibar_unconditional_mean(n) - xibar_mean_expansion(n);
            assert!(diff.abs() < 5.0 / (n * n) as f64, "n={n}: {diff}");
        }
    }

    #[test]
    fn variance_guard() {
        let s = sample(61, 0.0, 1);
        let err = cond_var_xibar(&s).unwrap_err();
        assert!(err.to_string().contains("limit"));
        assert!(cond_var_xibar_with_limit(&s, 61).is_ok());
    }

    #[test]
    fn variance_mean_term_matches_conditional_mean() {
        let s = sample(25, 0.2, 8);
        let v = cond_var_xibar(&s).unwrap();
        let n = 25.0f64;
        let from_var = 1.0 - 3.0 / (n * n - 1.0) * v.mean_term;
        assert!((from_var - cond_exp_xibar(&s).unwrap()).abs() < 1e-13);
    }
}
