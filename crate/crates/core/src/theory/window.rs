//! Window sets over a tie-free sample listed in X order.
//!
//! With `y` the responses sorted by their X values and 0-based positions,
//! `S(i,k)` holds the positions `t` whose response lies strictly between
//! `y[i]` and `y[i+k]`, minus the positions strictly inside `(i, i+k)`.
//! For two pairs `(i,k)` and `(j,l)` the intersection and difference sets
//! drop the positions inside either gap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::BivariateSample;
use crate::rank::{argsort, compute_ranks, order_by_x, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct WindowSets {
    /// `|S(i,k)|`
    pub s_ik: usize,
    /// `|S(i,k) cap S(j,l)|`, response strictly inside both windows.
    pub s_cap: usize,
    /// `|S(i,k) minus S(j,l)|`, inside the first window and outside the closed second.
    pub s_diff_ij: usize,
    /// `|S(j,l) minus S(i,k)|`
    pub s_diff_ji: usize,
}

/// Responses listed in increasing X order. Requires distinct X and Y.
pub fn y_in_x_order(sample: &BivariateSample) -> Result<Vec<f64>> {
    if !sample.is_continuous() {
        return Err(Error::Precondition(
            "window sets are defined for samples without ties in X or Y".into(),
        ));
    }
    let perm = order_by_x(sample.x(), TieBreak::ByIndex).perm;
    Ok(perm.iter().map(|&p| sample.y()[p]).collect())
}

fn check_pair(n: usize, i: usize, k: usize, name: &str) -> Result<()> {
    if n < 2 || i + 1 >= n {
        return Err(Error::param(
            name,
            format!("index {i} outside 0..={}", n.saturating_sub(2)),
        ));
    }
    if k == 0 || i + k >= n {
        return Err(Error::param(
            name,
            format!("offset {k} outside 1..={}", n - 1 - i),
        ));
    }
    Ok(())
}

/// Open interval between two values.
fn between(v: f64, a: f64, b: f64) -> bool {
    a.min(b) < v && v < a.max(b)
}

pub fn window_contains(y: &[f64], i: usize, k: usize, t: usize) -> bool {
    between(y[t], y[i], y[i + k]) && !(i < t && t < i + k)
}

/// `|S(i,k)|` by a direct scan.
pub fn window_size(y: &[f64], i: usize, k: usize) -> Result<usize> {
    check_pair(y.len(), i, k, "i,k")?;
    Ok((0..y.len())
        .filter(|&t| window_contains(y, i, k, t))
        .count())
}

/// All four cardinalities for the pairs `(i,k)` and `(j,l)` by a direct scan.
pub fn window_sets(y: &[f64], i: usize, k: usize, j: usize, l: usize) -> Result<WindowSets> {
    let n = y.len();
    check_pair(n, i, k, "i,k")?;
    check_pair(n, j, l, "j,l")?;
    let in_gap = |t: usize| (i < t && t < i + k) || (j < t && t < j + l);
    let (a_lo, a_hi) = (y[i].min(y[i + k]), y[i].max(y[i + k]));
    let (b_lo, b_hi) = (y[j].min(y[j + l]), y[j].max(y[j + l]));
    let mut out = WindowSets {
        s_ik: window_size(y, i, k)?,
        ..Default::default()
    };
    for (t, &v) in y.iter().enumerate() {
        if in_gap(t) {
            continue;
        }
        let in_a = a_lo < v && v < a_hi;
        let in_b = b_lo < v && v < b_hi;
        let out_a = v > a_hi || v < a_lo;
        let out_b = v > b_hi || v < b_lo;
        if in_a && in_b {
            out.s_cap += 1;
        }
        if in_a && out_b {
            out.s_diff_ij += 1;
        }
        if in_b && out_a {
            out.s_diff_ji += 1;
        }
    }
    Ok(out)
}

/// 0-based ranks of a tie-free vector.
pub(crate) fn dense_ranks(y: &[f64]) -> Vec<usize> {
    let mut r = vec![0; y.len()];
    for (rank, &p) in argsort(y).iter().enumerate() {
        r[p] = rank;
    }
    r
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Self(vec![0; n + 1])
    }
    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    /// Entries with index `< i`.
    fn prefix(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i &= i - 1;
        }
        s
    }
}

/// `sums[k] = sum_i |S(i,k)|` for `k = 1..n-1` (entry 0 unused).
///
/// Runs in `O(n^2 log n)` time and `O(n)` memory.
pub fn window_size_sums(y: &[f64]) -> Result<Vec<u64>> {
    let n = y.len();
    if !compute_ranks(y)?.tie_free() {
        return Err(Error::Precondition(
            "window sets need distinct responses".into(),
        ));
    }
    let r = dense_ranks(y);
    let mut sums = vec![0u64; n];
    for i in 0..n.saturating_sub(1) {
        let mut bit = Fenwick::new(n);
        for k in 1..n - i {
            if k >= 2 {
                bit.add(r[i + k - 1]);
            }
            let (lo, hi) = (r[i].min(r[i + k]), r[i].max(r[i + k]));
            let inside_gap = bit.prefix(hi) - bit.prefix(lo + 1);
            sums[k] += (hi - lo - 1) as u64 - u64::from(inside_gap);
        }
    }
    Ok(sums)
}

/// Constant-time window counts backed by a 2-D prefix table of ranks.
///
/// Memory is `(n+1)^2` counters, so this is meant for the small samples the
/// conditional variance is evaluated on.
#[derive(Debug, Clone)]
pub struct RankGrid {
    n: usize,
    rank: Vec<usize>,
    /// `grid[p * (n + 1) + r] = #{t < p : rank[t] < r}`
    grid: Vec<u32>,
}

impl RankGrid {
    pub fn new(y: &[f64]) -> Result<Self> {
        if !compute_ranks(y)?.tie_free() {
            return Err(Error::Precondition(
                "window sets need distinct responses".into(),
            ));
        }
        let n = y.len();
        let rank = dense_ranks(y);
        let w = n + 1;
        let mut grid = vec![0u32; w * w];
        for p in 1..=n {
            for r in 0..=n {
                grid[p * w + r] = grid[(p - 1) * w + r] + u32::from(rank[p - 1] < r);
            }
        }
        Ok(Self { n, rank, grid })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rank(&self, t: usize) -> usize {
        self.rank[t]
    }

    fn g(&self, p: usize, r: usize) -> u32 {
        self.grid[p * (self.n + 1) + r]
    }

    /// Positions in `p_lo..p_hi` whose rank lies in the open interval `(lo, hi)`.
    fn block(&self, p_lo: usize, p_hi: usize, lo: usize, hi: usize) -> usize {
        if p_hi <= p_lo || hi <= lo + 1 {
            return 0;
        }
        (self.g(p_hi, hi) + self.g(p_lo, lo + 1) - self.g(p_lo, hi) - self.g(p_hi, lo + 1)) as usize
    }

    /// Open rank interval spanned by the pair `(i, i+k)`.
    pub fn span(&self, i: usize, k: usize) -> (usize, usize) {
        let (a, b) = (self.rank[i], self.rank[i + k]);
        (a.min(b), a.max(b))
    }

    /// Ranks in `(lo, hi)` over all positions except the open gaps listed.
    fn count(&self, lo: usize, hi: usize, gaps: &[(usize, usize)]) -> usize {
        if hi <= lo + 1 {
            return 0;
        }
        let all = hi - lo - 1;
        all - gaps
            .iter()
            .map(|&(a, b)| self.block(a + 1, b, lo, hi))
            .sum::<usize>()
    }

    pub fn s_ik(&self, i: usize, k: usize) -> usize {
        let (lo, hi) = self.span(i, k);
        self.count(lo, hi, &[(i, i + k)])
    }

    /// The four cardinalities; the two gaps must not overlap (`i + k <= j`).
    pub fn sets(&self, i: usize, k: usize, j: usize, l: usize) -> WindowSets {
        debug_assert!(i + k <= j);
        let gaps = [(i, i + k), (j, j + l)];
        let (alo, ahi) = self.span(i, k);
        let (blo, bhi) = self.span(j, l);
        let cap = self.count(alo.max(blo), ahi.min(bhi), &gaps);
        // closed [blo, bhi] in integer ranks is the open (blo - 1, bhi + 1)
        let a_in_closed_b = self.count(alo.max(blo.saturating_sub(1)), ahi.min(bhi + 1), &gaps);
        let b_in_closed_a = self.count(blo.max(alo.saturating_sub(1)), bhi.min(ahi + 1), &gaps);
        WindowSets {
            s_ik: self.s_ik(i, k),
            s_cap: cap,
            s_diff_ij: self.count(alo, ahi, &gaps) - a_in_closed_b,
            s_diff_ji: self.count(blo, bhi, &gaps) - b_in_closed_a,
        }
    }

    /// Whether position `t` belongs to `S(i,k)`.
    pub fn contains(&self, i: usize, k: usize, t: usize) -> bool {
        let (lo, hi) = self.span(i, k);
        lo < self.rank[t] && self.rank[t] < hi && !(i < t && t < i + k)
    }
}
