//! Expected window cardinalities for i.i.d. continuous data.
//!
//! With `Z_1..Z_n, Y_1..Y_4` i.i.d., each quantity counts the `Z_i` that fall
//! inside (or between) intervals spanned by pairs of the `Y`s. The closed
//! forms are polynomials in `n` and the Monte Carlo oracle simulates uniforms
//! directly.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::rng::{derive_seed, stream_rng};

/// Names in the order used by [`card_expectation_table`] and [`card_monte_carlo`].
pub const CARD_NAMES: [&str; 14] = [
    "E[S12]",
    "E[S12^2]",
    "E[S1234]",
    "E[S1234^2]",
    "E[S1234*S12\\34]",
    "E[S1234*S34\\12]",
    "E[S12\\34*S34\\12]",
    "E[S1223]",
    "E[S1223^2]",
    "E[S1223*S12\\23]",
    "E[S1223*S23\\12]",
    "E[S12\\23*S23\\12]",
    "E[1(Y3 in Y1:Y2)*S1234]",
    "E[1(Y3 in Y1:Y2)*S34\\12]",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardMoment {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardEstimate {
    pub name: &'static str,
    pub mean: f64,
    pub stderr: f64,
}

pub fn card_expectation_table(n: u64) -> Vec<CardMoment> {
    let n = n as f64;
    let n2 = n * n;
    let values = [
        n / 3.0,
        n2 / 6.0 + n / 6.0,
        2.0 * n / 15.0,
        2.0 * n2 / 45.0 + 4.0 * n / 45.0,
        (n2 - n) / 45.0,
        (n2 - n) / 45.0,
        (n2 - n) / 45.0,
        n / 6.0,
        n2 / 15.0 + n / 10.0,
        (n2 - n) / 60.0,
        (n2 - n) / 60.0,
        (n2 - n) / 60.0,
        n / 15.0,
        n / 30.0,
    ];
    CARD_NAMES
        .iter()
        .zip(values)
        .map(|(&name, value)| CardMoment { name, value })
        .collect()
}

struct Interval(f64, f64);

impl Interval {
    fn of(a: f64, b: f64) -> Self {
        Interval(a.min(b), a.max(b))
    }
    fn inside(&self, z: f64) -> bool {
        self.0 < z && z < self.1
    }
    fn outside(&self, z: f64) -> bool {
        z < self.0 || z > self.1
    }
    fn cap(&self, o: &Interval, z: f64) -> bool {
        self.0.max(o.0) < z && z < self.1.min(o.1)
    }
}

/// The 14 products for one draw of `(Z_1..Z_n, Y_1..Y_4)`.
fn one_draw<R: Rng>(n: usize, rng: &mut R) -> [f64; 14] {
    let y: [f64; 4] = std::array::from_fn(|_| rng.random());
    let (i12, i34, i23) = (
        Interval::of(y[0], y[1]),
        Interval::of(y[2], y[3]),
        Interval::of(y[1], y[2]),
    );
    let mut c = [0u32; 7];
    for _ in 0..n {
        let z: f64 = rng.random();
        c[0] += u32::from(i12.inside(z));
        c[1] += u32::from(i12.cap(&i34, z));
        c[2] += u32::from(i12.inside(z) && i34.outside(z));
        c[3] += u32::from(i34.inside(z) && i12.outside(z));
        c[4] += u32::from(i12.cap(&i23, z));
        c[5] += u32::from(i12.inside(z) && i23.outside(z));
        c[6] += u32::from(i23.inside(z) && i12.outside(z));
    }
    let [s12, s1234, s12m34, s34m12, s1223, s12m23, s23m12] = c.map(f64::from);
    let ind = if i12.inside(y[2]) { 1.0 } else { 0.0 };
    [
        s12,
        s12 * s12,
        s1234,
        s1234 * s1234,
        s1234 * s12m34,
        s1234 * s34m12,
        s12m34 * s34m12,
        s1223,
        s1223 * s1223,
        s1223 * s12m23,
        s1223 * s23m12,
        s12m23 * s23m12,
        ind * s1234,
        ind * s34m12,
    ]
}

/// Monte Carlo means and standard errors of the 14 quantities.
///
/// Draws are split into fixed chunks with their own streams, so the result
/// does not depend on the thread count.
pub fn card_monte_carlo(n: usize, draws: usize, seed: u64) -> Vec<CardEstimate> {
    const CHUNK: usize = 20_000;
    let chunks = draws.div_ceil(CHUNK);
    let partial: Vec<([f64; 14], [f64; 14])> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(derive_seed(seed, &[c as u64]), 0);
            let m = CHUNK.min(draws - c * CHUNK);
            let (mut s1, mut s2) = ([0.0; 14], [0.0; 14]);
            for _ in 0..m {
                let v = one_draw(n, &mut rng);
                for q in 0..14 {
                    s1[q] += v[q];
                    s2[q] += v[q] * v[q];
                }
            }
            (s1, s2)
        })
        .collect();
    let (mut s1, mut s2) = ([0.0; 14], [0.0; 14]);
    for (a, b) in &partial {
        for q in 0..14 {
            s1[q] += a[q];
            s2[q] += b[q];
        }
    }
    let d = draws as f64;
    (0..14)
        .map(|q| {
            let mean = s1[q] / d;
            let var = (s2[q] / d - mean * mean) * d / (d - 1.0);
            CardEstimate {
                name: CARD_NAMES[q],
                mean,
                stderr: (var.max(0.0) / d).sqrt(),
            }
        })
        .collect()
}
