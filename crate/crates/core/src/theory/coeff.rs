//! Finite-difference coefficients of `f(x) = (1 - x/n)^m`.
//!
//! ```text
//! c_{n,m,k}   = f(k-1) - 2 f(k) + f(k+1)
//! a_{n,m,k,l} = f(k+l-2) - 3 f(k+l-1) + 3 f(k+l) - f(k+l+1)
//! b_{n,m,k,l} = f(k+l-2) - 4 f(k+l-1) + 6 f(k+l) - 4 f(k+l+1) + f(k+l+2)
//! ```
//!
//! Bases may be negative; they are raised to integer powers exactly as
//! written.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Largest `n` for which [`CoefficientTable`] evaluates in exact rationals.
pub const EXACT_LIMIT: i64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientParams {
    pub n: i64,
    pub m: i64,
    pub k: i64,
    pub l: i64,
}

impl CoefficientParams {
    pub fn a(&self) -> f64 {
        coeff_a(self.n, self.m, self.k, self.l)
    }
    pub fn b(&self) -> f64 {
        coeff_b(self.n, self.m, self.k, self.l)
    }
    pub fn c(&self) -> f64 {
        coeff_c(self.n, self.m, self.k)
    }
}

const C_STENCIL: [(i64, i64); 3] = [(-1, 1), (0, -2), (1, 1)];
const A_STENCIL: [(i64, i64); 4] = [(-2, 1), (-1, -3), (0, 3), (1, -1)];
const B_STENCIL: [(i64, i64); 5] = [(-2, 1), (-1, -4), (0, 6), (1, -4), (2, 1)];

pub(crate) fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `(1 - x/n)^m` exactly. `m` must be non-negative unless the base is nonzero.
pub fn base_pow_exact(n: i64, m: i64, x: i64) -> BigRational {
    let base = rat(n - x, n);
    if m < 0 && base.is_zero() {
        panic!("zero base raised to a negative power");
    }
    num_traits::Pow::pow(&base, m as i32)
}

pub fn base_pow(n: i64, m: i64, x: i64) -> f64 {
    let base = 1.0 - x as f64 / n as f64;
    if base > 0.0 && m.abs() > 64 {
        (m as f64 * (-(x as f64) / n as f64).ln_1p()).exp()
    } else {
        base.powi(m as i32)
    }
}

fn stencil_exact(n: i64, m: i64, centre: i64, stencil: &[(i64, i64)]) -> BigRational {
    stencil
        .iter()
        .map(|&(off, w)| base_pow_exact(n, m, centre + off) * rat(w, 1))
        .fold(BigRational::zero(), |acc, t| acc + t)
}

fn stencil_f64(n: i64, m: i64, centre: i64, stencil: &[(i64, i64)]) -> f64 {
    neumaier_sum(
        stencil
            .iter()
            .map(|&(off, w)| w as f64 * base_pow(n, m, centre + off)),
    )
}

pub fn coeff_c_exact(n: i64, m: i64, k: i64) -> BigRational {
    stencil_exact(n, m, k, &C_STENCIL)
}

pub fn coeff_a_exact(n: i64, m: i64, k: i64, l: i64) -> BigRational {
    stencil_exact(n, m, k + l, &A_STENCIL)
}

pub fn coeff_b_exact(n: i64, m: i64, k: i64, l: i64) -> BigRational {
    stencil_exact(n, m, k + l, &B_STENCIL)
}

pub fn coeff_c(n: i64, m: i64, k: i64) -> f64 {
    if n <= EXACT_LIMIT {
        to_f64(&coeff_c_exact(n, m, k))
    } else {
        stencil_f64(n, m, k, &C_STENCIL)
    }
}

pub fn coeff_a(n: i64, m: i64, k: i64, l: i64) -> f64 {
    if n <= EXACT_LIMIT {
        to_f64(&coeff_a_exact(n, m, k, l))
    } else {
        stencil_f64(n, m, k + l, &A_STENCIL)
    }
}

pub fn coeff_b(n: i64, m: i64, k: i64, l: i64) -> f64 {
    if n <= EXACT_LIMIT {
        to_f64(&coeff_b_exact(n, m, k, l))
    } else {
        stencil_f64(n, m, k + l, &B_STENCIL)
    }
}

pub(crate) fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Compensated summation.
pub(crate) fn neumaier_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Coefficients for one `n`, indexed by `k` (for `c`) or `k + l` (for `a`, `b`),
/// with `m = n - 1` and `m = n - 2`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub n: i64,
    c1: Vec<f64>,
    c2: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(n: usize) -> Self {
        let n = n as i64;
        let fill = |f: &dyn Fn(i64) -> f64| (0..=2 * n).map(f).collect::<Vec<_>>();
        Self {
            n,
            c1: fill(&|k| coeff_c(n, n - 1, k)),
            c2: fill(&|k| coeff_c(n, n - 2, k)),
            a1: fill(&|s| coeff_a(n, n - 1, s, 0)),
            a2: fill(&|s| coeff_a(n, n - 2, s, 0)),
            b1: fill(&|s| coeff_b(n, n - 1, s, 0)),
            b2: fill(&|s| coeff_b(n, n - 2, s, 0)),
        }
    }

    pub fn c1(&self, k: usize) -> f64 {
        self.c1[k]
    }
    pub fn c2(&self, k: usize) -> f64 {
        self.c2[k]
    }
    pub fn a1(&self, k: usize, l: usize) -> f64 {
        self.a1[k + l]
    }
    pub fn a2(&self, k: usize, l: usize) -> f64 {
        self.a2[k + l]
    }
    pub fn b1(&self, k: usize, l: usize) -> f64 {
        self.b1[k + l]
    }
    pub fn b2(&self, k: usize, l: usize) -> f64 {
        self.b2[k + l]
    }
}

/// Both sides of `sum_i sum_k c_{n,n-1,k} = (n-1)(1 - (1-1/n)^{n-1}) - (1-1/n)^{n-1}`.
pub fn c_double_sum_identity(n: i64) -> (BigRational, BigRational) {
    let mut lhs = BigRational::zero();
    for i in 1..n {
        for k in 1..=n - i {
            lhs += coeff_c_exact(n, n - 1, k);
        }
    }
    let q = base_pow_exact(n, n - 1, 1);
    let rhs = rat(n - 1, 1) * (rat(1, 1) - q.clone()) - q;
    (lhs, rhs)
}

/// Both sides of `sum_i sum_k k c_{n,n-1,k} = n - 1 - 2 sum_{i<n} i^{n-1} / n^{n-1}`.
pub fn kc_double_sum_identity(n: i64) -> (BigRational, BigRational) {
    let mut lhs = BigRational::zero();
    for i in 1..n {
        for k in 1..=n - i {
            lhs += coeff_c_exact(n, n - 1, k) * rat(k, 1);
        }
    }
    let mut powers = BigRational::zero();
    for i in 1..n {
        powers += base_pow_exact(n, n - 1, n - i);
    }
    let rhs = rat(n - 1, 1) - rat(2, 1) * powers;
    (lhs, rhs)
}

/// Both sides of the inner telescoping sum
/// `sum_{k=1}^{n-i} c_{n,n-1,k} = 1 - (1-1/n)^{n-1} - (i/n)^{n-1} + ((i-1)/n)^{n-1}`.
pub fn c_inner_sum_identity(n: i64, i: i64) -> (BigRational, BigRational) {
    let lhs = (1..=n - i).fold(BigRational::zero(), |acc, k| {
        acc + coeff_c_exact(n, n - 1, k)
    });
    let rhs = rat(1, 1) - base_pow_exact(n, n - 1, 1) - base_pow_exact(n, n - 1, n - i)
        + base_pow_exact(n, n - 1, n - i + 1);
    (lhs, rhs)
}
