//! Chatterjee's rank correlation.
//!
//! The general form handles ties in Y:
//!
//! ```text
//! xi_n = 1 - n * sum_i |R_[i+1] - R_[i]| / (2 * sum_i L_i (n - L_i))
//! ```
//!
//! and on tie-free data it reduces to `1 - 3 * sum_i |R_[i+1] - R_[i]| / (n^2 - 1)`.
//! Both sums are accumulated in integers and only the final ratio is
//! floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BivariateSample;
use crate::rank::{compute_ranks, order_by_x, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XiForm {
    General,
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiEstimate {
    pub value: f64,
    pub form: XiForm,
    pub n: usize,
    pub tie_break: TieBreak,
}

/// `sum_i |R_[i+1] - R_[i]|` along `perm`.
pub fn rank_gap_sum(r: &[usize], perm: &[usize]) -> u64 {
    perm.windows(2)
        .map(|w| r[w[1]].abs_diff(r[w[0]]) as u64)
        .sum()
}

/// `sum_i L_i (n - L_i)`.
pub fn reversed_rank_mass(l: &[usize]) -> u64 {
    let n = l.len();
    l.iter().map(|&li| (li * (n - li)) as u64).sum()
}

/// Integer parts of the general form: the rank-gap sum along the X-ordering
/// and the reversed-rank denominator.
pub fn general_sums(sample: &BivariateSample, tie_break: TieBreak) -> Result<(u64, u64)> {
    let ranks = compute_ranks(sample.y())?;
    let ordering = order_by_x(sample.x(), tie_break);
    Ok((
        rank_gap_sum(&ranks.r, &ordering.perm),
        reversed_rank_mass(&ranks.l),
    ))
}

pub(crate) fn general_value(n: usize, gap_sum: u64, mass: u64) -> Result<f64> {
    if mass == 0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(1.0 - (n as f64 * gap_sum as f64) / (2.0 * mass as f64))
}

pub(crate) fn simple_value(n: usize, gap_sum: u64) -> f64 {
    let n = n as f64;
    1.0 - 3.0 * gap_sum as f64 / (n * n - 1.0)
}

pub fn xi_general(sample: &BivariateSample, tie_break: TieBreak) -> Result<XiEstimate> {
    let (gap, mass) = general_sums(sample, tie_break)?;
    Ok(XiEstimate {
        value: general_value(sample.len(), gap, mass)?,
        form: XiForm::General,
        n: sample.len(),
        tie_break,
    })
}

/// Tie-free form; refuses data with tied Y values.
pub fn xi_simple(sample: &BivariateSample, tie_break: TieBreak) -> Result<XiEstimate> {
    let ranks = compute_ranks(sample.y())?;
    if !ranks.tie_free() {
        return Err(Error::Precondition(
            "Y contains ties; use xi_general for tied data".into(),
        ));
    }
    let ordering = order_by_x(sample.x(), tie_break);
    Ok(XiEstimate {
        value: simple_value(sample.len(), rank_gap_sum(&ranks.r, &ordering.perm)),
        form: XiForm::Simple,
        n: sample.len(),
        tie_break,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_rotation_sample, ModelSpec};
    use proptest::prelude::*;

    fn sample(x: &[f64], y: &[f64]) -> BivariateSample {
        BivariateSample::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn monotone_five_points() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(general_sums(&s, TieBreak::ByIndex).unwrap(), (4, 20));
        assert_eq!(xi_general(&s, TieBreak::ByIndex).unwrap().value, 0.5);
        assert_eq!(xi_simple(&s, TieBreak::ByIndex).unwrap().value, 0.5);
    }

    #[test]
    fn two_points_evaluate_to_zero() {
        // hand evaluation: gap sum 1, sum L(n-L) = 2*0 + 1*1 = 1, 1 - 2*1/(2*1) = 0
        let up = sample(&[0.0, 1.0], &[0.0, 1.0]);
        let down = sample(&[0.0, 1.0], &[1.0, 0.0]);
        for s in [&up, &down] {
            assert_eq!(general_sums(s, TieBreak::ByIndex).unwrap(), (1, 1));
            assert_eq!(xi_general(s, TieBreak::ByIndex).unwrap().value, 0.0);
            assert_eq!(xi_simple(s, TieBreak::ByIndex).unwrap().value, 0.0);
        }
    }

    #[test]
    fn monotone_and_antitone_any_n() {
        for n in [3usize, 7, 20] {
            let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let rev: Vec<f64> = x.iter().rev().copied().collect();
            let expect = 1.0 - 3.0 / (n as f64 + 1.0);
            for y in [&x, &rev] {
                let v = xi_simple(&sample(&x, y), TieBreak::ByIndex).unwrap().value;
                assert!((v - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn all_tied_y_is_degenerate() {
        let s = sample(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]);
        assert!(matches!(
            xi_general(&s, TieBreak::ByIndex),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn simple_form_refuses_ties() {
        let s = sample(&[1.0, 2.0, 3.0], &[4.0, 4.0, 5.0]);
        assert!(matches!(
            xi_simple(&s, TieBreak::ByIndex),
            Err(Error::Precondition(_))
        ));
        assert!(xi_general(&s, TieBreak::ByIndex).is_ok());
    }

    #[test]
    fn tied_x_uses_tie_break() {
        let s = sample(&[0.0, 0.0, 1.0], &[3.0, 1.0, 2.0]);
        // ByIndex: order 0,1,2 -> ranks 3,1,2 -> gaps 2 + 1
        assert_eq!(general_sums(&s, TieBreak::ByIndex).unwrap().0, 3);
        let e = xi_general(&s, TieBreak::Seeded(1)).unwrap();
        assert_eq!(e.tie_break, TieBreak::Seeded(1));
    }

    #[test]
    fn null_mean_is_centred() {
        let reps = 10_000u64;
        let vals: Vec<f64> = (0..reps)
            .map(|seed| {
                let s =
                    gaussian_rotation_sample(&ModelSpec::new(0.0, 1000, seed).unwrap()).unwrap();
                xi_simple(&s, TieBreak::ByIndex).unwrap().value
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    fn distinct_pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                Just(n),
                prop::sample::subsequence((0..1000).collect::<Vec<u32>>(), n),
                prop::sample::subsequence((0..1000).collect::<Vec<u32>>(), n),
                any::<u64>(),
            )
                .prop_map(|(_, xs, ys, seed)| {
                    use rand::seq::SliceRandom;
                    let mut rng = crate::rng::stream_rng(seed, 0);
                    let mut xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
                    let mut ys: Vec<f64> = ys.into_iter().map(f64::from).collect();
                    xs.shuffle(&mut rng);
                    ys.shuffle(&mut rng);
                    (xs, ys)
                })
        })
    }

    proptest! {
        #[test]
        fn forms_agree_on_tie_free_data((x, y) in distinct_pairs()) {
            let s = sample(&x, &y);
            let g = xi_general(&s, TieBreak::ByIndex).unwrap().value;
            let simple = xi_simple(&s, TieBreak::ByIndex).unwrap().value;
            prop_assert!((g - simple).abs() < 1e-12);
            let n = x.len() as f64;
            prop_assert!(simple <= 1.0 && simple >= 1.0 - 3.0 * (n - 1.0) / (n + 1.0) - 1e-12);
        }

        #[test]
        fn invariant_to_monotone_maps((x, y) in distinct_pairs()) {
            let base = xi_simple(&sample(&x, &y), TieBreak::ByIndex).unwrap().value;
            let x2: Vec<f64> = x.iter().map(|v| (v / 100.0).exp()).collect();
            let y2: Vec<f64> = y.iter().map(|v| v.powi(3) - 7.0).collect();
            prop_assert_eq!(base, xi_simple(&sample(&x2, &y), TieBreak::ByIndex).unwrap().value);
            prop_assert_eq!(base, xi_simple(&sample(&x, &y2), TieBreak::ByIndex).unwrap().value);
        }

        #[test]
        fn invariant_to_pair_order((x, y) in distinct_pairs(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let base = xi_simple(&sample(&x, &y), TieBreak::ByIndex).unwrap().value;
            let mut idx: Vec<usize> = (0..x.len()).collect();
            idx.shuffle(&mut crate::rng::stream_rng(seed, 1));
            let xp: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let yp: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            prop_assert_eq!(base, xi_simple(&sample(&xp, &yp), TieBreak::ByIndex).unwrap().value);
        }

        #[test]
        fn general_value_in_range(x in prop::collection::vec(0u8..5, 2..40), y in prop::collection::vec(0u8..5, 2..40)) {
            let n = x.len().min(y.len());
            let xs: Vec<f64> = x[..n].iter().map(|&v| f64::from(v)).collect();
            let ys: Vec<f64> = y[..n].iter().map(|&v| f64::from(v)).collect();
            if let Ok(e) = xi_general(&sample(&xs, &ys), TieBreak::ByIndex) {
                prop_assert!(e.value <= 1.0 && e.value >= -2.0, "{}", e.value);
            }
        }
    }
}
