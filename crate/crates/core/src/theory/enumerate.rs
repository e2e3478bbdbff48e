//! Brute-force oracles over every bootstrap outcome.
//!
//! Two enumerations are provided. [`IndexDraws`] walks all `n^n` equally
//! likely sequences of resampled indices, which is the literal definition of
//! the standard bootstrap. [`compositions`] walks the distinct weight vectors
//! with their multinomial probabilities, which is much cheaper and is used
//! where the sample size makes `n^n` impractical.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::coeff::rat;
use crate::bootstrap::{BootstrapWeights, ResampleKernel};
use crate::error::{Error, Result};
use crate::model::BivariateSample;

/// Largest `n` accepted by the `n^n` walk.
pub const INDEX_DRAW_LIMIT: usize = 7;
/// Largest `n` accepted by the composition walk.
pub const COMPOSITION_LIMIT: usize = 10;

/// Odometer over `{0..n}^n`, yielding the tallied weight vector of each draw.
pub struct IndexDraws {
    n: usize,
    digits: Vec<usize>,
    counts: Vec<u32>,
    done: bool,
}

impl IndexDraws {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > INDEX_DRAW_LIMIT {
            return Err(Error::param(
                "n",
                format!("index-draw enumeration needs 1 <= n <= {INDEX_DRAW_LIMIT}"),
            ));
        }
        let mut counts = vec![0; n];
        counts[0] = n as u32;
        Ok(Self {
            n,
            digits: vec![0; n],
            counts,
            done: false,
        })
    }

    /// `n^n` as an exact rational, the common denominator of every draw.
    pub fn total(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.n).pow(self.n as u32))
    }
}

impl Iterator for IndexDraws {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.counts.clone();
        let mut pos = 0;
        loop {
            if pos == self.n {
                self.done = true;
                break;
            }
            self.counts[self.digits[pos]] -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < self.n {
                self.counts[self.digits[pos]] += 1;
                break;
            }
            self.digits[pos] = 0;
            self.counts[0] += 1;
            pos += 1;
        }
        Some(out)
    }
}

/// Every weight vector summing to `n` with its multinomial probability
/// `n! / (prod w_i!) / n^n`.
pub fn compositions(n: usize) -> Result<Vec<(Vec<u32>, BigRational)>> {
    if n == 0 || n > COMPOSITION_LIMIT {
        return Err(Error::param(
            "n",
            format!("composition enumeration needs 1 <= n <= {COMPOSITION_LIMIT}"),
        ));
    }
    let fact: Vec<BigInt> = (0..=n)
        .scan(BigInt::one(), |acc, i| {
            if i > 0 {
                *acc *= i;
            }
            Some(acc.clone())
        })
        .collect();
    let denom = BigInt::from(n).pow(n as u32);
    let mut out = Vec::new();
    let mut w = vec![0u32; n];
    fn rec(
        pos: usize,
        left: u32,
        w: &mut Vec<u32>,
        fact: &[BigInt],
        denom: &BigInt,
        out: &mut Vec<(Vec<u32>, BigRational)>,
    ) {
        let n = w.len();
        if pos == n - 1 {
            w[pos] = left;
            let mut d = denom.clone();
            for &c in w.iter() {
                d *= &fact[c as usize];
            }
            out.push((w.clone(), BigRational::new(fact[n].clone(), d)));
            return;
        }
        for c in 0..=left {
            w[pos] = c;
            rec(pos + 1, left - c, w, fact, denom, out);
        }
    }
    rec(0, n as u32, &mut w, &fact, &denom, &mut out);
    Ok(out)
}

/// The multinomial moments by walking all `n^n` draws with `S`, `S'`, `T` taken
/// as consecutive blocks of indices.
pub fn multinomial_moments_by_enumeration(
    s: u64,
    s2: u64,
    t: u64,
    n: u64,
) -> Result<super::multinomial::ExactMultinomialMoments> {
    if s + s2 + t > n {
        return Err(Error::param("sizes", "blocks exceed n"));
    }
    let draws = IndexDraws::new(n as usize)?;
    let total = draws.total();
    let (s, s2, t) = (s as usize, s2 as usize, t as usize);
    let (mut m1, mut m2, mut mc) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    for w in draws {
        if w[s + s2..s + s2 + t].iter().any(|&c| c > 0) {
            continue;
        }
        let ws: u64 = w[..s].iter().map(|&c| u64::from(c)).sum();
        let ws2: u64 = w[s..s + s2].iter().map(|&c| u64::from(c)).sum();
        m1 += ws;
        m2 += ws * ws;
        mc += ws * ws2;
    }
    Ok(super::multinomial::ExactMultinomialMoments {
        m1: BigRational::from_integer(m1) / &total,
        m2: BigRational::from_integer(m2) / &total,
        m_cross: BigRational::from_integer(mc) / total,
    })
}

/// Exact conditional moments of a replicate statistic over all weight outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMoments {
    pub mean: BigRational,
    pub variance: BigRational,
}

fn moments_of(items: impl Iterator<Item = (BigRational, BigRational)>) -> ExactMoments {
    let (mut m1, mut m2) = (BigRational::zero(), BigRational::zero());
    for (v, p) in items {
        m1 += &v * &p;
        m2 += &v * &v * p;
    }
    let variance = &m2 - &m1 * &m1;
    ExactMoments { mean: m1, variance }
}

fn window_value(n: usize, window: u64) -> BigRational {
    let n = n as i64;
    rat(1, 1) - rat(3 * window as i64, n * n - 1)
}

/// Conditional mean of the window-count statistic over all `n^n` index draws.
pub fn xibar_mean_by_index_draws(sample: &BivariateSample) -> Result<BigRational> {
    let kernel = tie_free_kernel(sample)?;
    let draws = IndexDraws::new(sample.len())?;
    let total = draws.total();
    let mut acc = BigInt::zero();
    for w in draws {
        acc += kernel.sums(&BootstrapWeights::from_counts(w)?).window_sum;
    }
    let n = sample.len();
    Ok(rat(1, 1) - rat(3, (n * n - 1) as i64) * BigRational::from_integer(acc) / total)
}

/// Exact conditional mean and variance of the window-count statistic.
pub fn xibar_moments_by_enumeration(sample: &BivariateSample) -> Result<ExactMoments> {
    let kernel = tie_free_kernel(sample)?;
    let n = sample.len();
    let mut items = Vec::new();
    for (w, p) in compositions(n)? {
        let s = kernel.sums(&BootstrapWeights::from_counts(w)?);
        items.push((window_value(n, s.window_sum), p));
    }
    Ok(moments_of(items.into_iter()))
}

/// Exact conditional mean and variance of the nearest-neighbour statistic.
pub fn xihat_moments_by_enumeration(sample: &BivariateSample) -> Result<ExactMoments> {
    let kernel = tie_free_kernel(sample)?;
    let n = sample.len();
    let mut items = Vec::new();
    for (w, p) in compositions(n)? {
        let s = kernel.sums(&BootstrapWeights::from_counts(w)?);
        items.push((window_value(n, s.gap_sum), p));
    }
    Ok(moments_of(items.into_iter()))
}

fn tie_free_kernel(sample: &BivariateSample) -> Result<ResampleKernel> {
    if !sample.is_continuous() {
        return Err(Error::Precondition(
            "enumeration oracles need a tie-free sample".into(),
        ));
    }
    Ok(ResampleKernel::new(sample))
}

/// `E[sum_i W_i L~_i (n - L~_i)]` averaged over all `n^n` draws and all
/// `n!` orderings of a tie-free response vector.
pub fn weighted_l_mean_by_enumeration(n: usize) -> Result<BigRational> {
    let draws = IndexDraws::new(n)?;
    let total = draws.total();
    let perms = permutations(n);
    let mut acc = BigInt::zero();
    for w in draws {
        for ranks in &perms {
            acc += weighted_l_sum(&w, ranks);
        }
    }
    Ok(BigRational::from_integer(acc)
        / (total * BigRational::from_integer(BigInt::from(perms.len()))))
}

/// `sum_i W_i L~_i (n - L~_i)` where `ranks` orders the responses.
pub(crate) fn weighted_l_sum(w: &[u32], ranks: &[usize]) -> u64 {
    let n = w.len() as u64;
    let mut by_rank = vec![0u64; w.len()];
    for (i, &r) in ranks.iter().enumerate() {
        by_rank[r] = u64::from(w[i]);
    }
    // L~ at rank r is the weight on ranks >= r
    let mut above = 0u64;
    let mut out = 0u64;
    for r in (0..w.len()).rev() {
        above += by_rank[r];
        out += by_rank[r] * above * (n - above);
    }
    out
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            let swap = if k.is_multiple_of(2) { i } else { 0 };
            p.swap(swap, k - 1);
        }
    }
    heap(n, &mut p, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn odometer_visits_every_draw_once() {
        let draws: Vec<Vec<u32>> = IndexDraws::new(3).unwrap().collect();
        assert_eq!(draws.len(), 27);
        assert!(draws.iter().all(|w| w.iter().sum::<u32>() == 3));
        assert_eq!(draws.iter().filter(|w| **w == vec![1, 1, 1]).count(), 6);
    }

    #[test]
    fn composition_probabilities_sum_to_one() {
        for n in 1..=6 {
            let c = compositions(n).unwrap();
            let total: BigRational = c.iter().map(|(_, p)| p.clone()).sum();
            assert!(total.is_one());
        }
        assert_eq!(compositions(5).unwrap().len(), 126);
    }

    #[test]
    fn permutations_are_complete() {
        let mut p = permutations(4);
        assert_eq!(p.len(), 24);
        p.sort();
        p.dedup();
        assert_eq!(p.len(), 24);
    }

    #[test]
    fn weighted_l_at_two() {
        assert_eq!(weighted_l_mean_by_enumeration(2).unwrap(), rat(1, 2));
    }

    #[test]
    fn index_draws_and_compositions_agree() {
        let s = BivariateSample::new(vec![0.1, 0.4, 0.2, 0.9, 0.5], vec![3.0, 1.0, 5.0, 2.0, 4.0])
            .unwrap();
        let a = xibar_mean_by_index_draws(&s).unwrap();
        let b = xibar_moments_by_enumeration(&s).unwrap().mean;
        assert_eq!(a, b);
    }

    #[test]
    fn limits_are_enforced() {
        assert!(IndexDraws::new(0).is_err());
        assert!(IndexDraws::new(INDEX_DRAW_LIMIT + 1).is_err());
        assert!(compositions(COMPOSITION_LIMIT + 1).is_err());
    }
}
