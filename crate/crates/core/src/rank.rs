//! Ranks and X-orderings with explicit tie-breaking.
//!
//! All indices are 0-based.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// `r[i] = #{j : y_j <= y_i}`, `l[i] = #{j : y_j >= y_i}`, `tie_mult[i] = #{j : y_j = y_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVectors {
    pub r: Vec<usize>,
    pub l: Vec<usize>,
    pub tie_mult: Vec<usize>,
}

impl RankVectors {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// True when no two y values coincide.
    pub fn tie_free(&self) -> bool {
        self.tie_mult.iter().all(|&t| t == 1)
    }
}

pub fn compute_ranks(y: &[f64]) -> Result<RankVectors> {
    let n = y.len();
    if n == 0 {
        return Err(Error::param("y", "empty input"));
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::param("y", "NaN value"));
    }
    let order = argsort(y);
    let mut r = vec![0; n];
    let mut l = vec![0; n];
    let mut tie_mult = vec![0; n];
    let mut start = 0;
    while start < n {
        let v = y[order[start]];
        let mut end = start + 1;
        while end < n && y[order[end]] == v {
            end += 1;
        }
        for &i in &order[start..end] {
            r[i] = end;
            l[i] = n - start;
            tie_mult[i] = end - start;
        }
        start = end;
    }
    Ok(RankVectors { r, l, tie_mult })
}

/// Stable ascending argsort; equal values keep index order.
pub(crate) fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("NaN in argsort"));
    idx
}

/// How ties in X are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// Tied x values keep their original index order.
    #[default]
    ByIndex,
    /// Each block of tied x values is shuffled with a generator seeded here.
    Seeded(u64),
}

/// A permutation `perm` with `x[perm[0]] <= x[perm[1]] <= ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XOrdering {
    pub perm: Vec<usize>,
    pub tie_break: TieBreak,
}

pub fn order_by_x(x: &[f64], tie_break: TieBreak) -> XOrdering {
    let mut perm = argsort(x);
    if let TieBreak::Seeded(seed) = tie_break {
        let mut rng = stream_rng(seed, 0);
        let mut start = 0;
        while start < perm.len() {
            let v = x[perm[start]];
            let mut end = start + 1;
            while end < perm.len() && x[perm[end]] == v {
                end += 1;
            }
            if end - start > 1 {
                perm[start..end].shuffle(&mut rng);
            }
            start = end;
        }
    }
    XOrdering { perm, tie_break }
}

/// Number of values that share their value with at least one other entry,
/// and the number of distinct tied groups.
pub fn tie_summary(v: &[f64]) -> (usize, usize) {
    let order = argsort(v);
    let (mut tied, mut groups) = (0, 0);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            tied += end - start;
            groups += 1;
        }
        start = end;
    }
    (tied, groups)
}
