//! Agreement checks between closed forms and their oracles.
//!
//! Each check is a plain function with explicit sizes so it can be run at
//! smoke scale from the command line or at full scale from the test suite.
//! [`verify_theory`] bundles them at one of two preset sizes.

use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::{draw_weights, materialized_gap_sum, BootstrapWeights, ResampleKernel};
use crate::error::Result;
use crate::model::{gaussian_rotation_sample, BivariateSample, ModelSpec};
use crate::rank::{compute_ranks, TieBreak};
use crate::rng::{derive_seed, stream_rng};
use crate::theory::coeff::{c_double_sum_identity, c_inner_sum_identity, kc_double_sum_identity};
use crate::theory::enumerate::{
    compositions, multinomial_moments_by_enumeration, permutations, weighted_l_mean_by_enumeration,
    xibar_mean_by_index_draws,
};
use crate::theory::moments::COND_VAR_REMAINDER_CONSTANT;
use crate::theory::{
    asymptotic_constants, card_expectation_table, card_monte_carlo, cond_exp_xibar,
    cond_exp_xibar_exact, cond_var_xibar, multinomial_moments_exact, weighted_l_mean,
    weighted_l_mean_exact, weighted_l_monte_carlo, xibar_mean_expansion,
};
use crate::xi::rank_gap_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn within(
        name: impl Into<String>,
        observed: f64,
        expected: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            observed,
            expected,
            tolerance,
            passed: (observed - expected).abs() <= tolerance,
            detail: detail.into(),
        }
    }

    fn failures(name: impl Into<String>, failures: usize, cases: usize) -> Self {
        Self {
            name: name.into(),
            observed: failures as f64,
            expected: 0.0,
            tolerance: 0.0,
            passed: failures == 0,
            detail: format!("{failures} failures in {cases} cases"),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: observed {:.6e}, expected {:.6e}, tolerance {:.3e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn model_sample(rho: f64, n: usize, seed: u64) -> Result<BivariateSample> {
    gaussian_rotation_sample(&ModelSpec::new(rho, n, seed)?)
}

/// Kernel gap sum against the materialized resample under a seeded X
/// tie-break, with every input drawn at random.
pub fn check_key_identity_random(n: usize, triples: usize, seed: u64) -> Result<CheckOutcome> {
    let failures: usize = (0..triples)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let s = derive_seed(seed, &[n as u64, t as u64]);
            // every fourth sample has heavily tied responses
            let sample = if t % 4 == 3 {
                let base = model_sample(0.4, n, s)?;
                let y: Vec<f64> = base.y().iter().map(|v| (v * 2.0).round()).collect();
                BivariateSample::new(base.x().to_vec(), y)?
            } else {
                model_sample(0.6, n, s)?
            };
            let mut rng = stream_rng(s, 1);
            let w = draw_weights(n, &mut rng);
            let tb = TieBreak::Seeded(rng.random());
            let direct = materialized_gap_sum(&sample, &w, tb)?;
            Ok(usize::from(
                direct != ResampleKernel::new(&sample).sums(&w).gap_sum,
            ))
        })
        .sum::<Result<usize>>()?;
    Ok(CheckOutcome::failures(
        format!("key identity, random tie-breaks, n={n}"),
        failures,
        triples,
    ))
}

/// Every weight vector and every ordering of duplicated units in the
/// resample, for `samples` random samples of size `n`.
pub fn check_key_identity_exhaustive(n: usize, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let comps = compositions(n)?;
    let perms: Vec<Vec<Vec<usize>>> = (0..=n).map(permutations).collect();
    let mut failures = 0;
    let mut cases = 0;
    for s in 0..samples {
        let sample = model_sample(0.5, n, derive_seed(seed, &[s as u64]))?;
        let kernel = ResampleKernel::new(&sample);
        let mut units: Vec<usize> = (0..n).collect();
        units.sort_by(|&a, &b| sample.x()[a].partial_cmp(&sample.x()[b]).unwrap());
        for (w, _) in &comps {
            let expect = kernel
                .sums(&BootstrapWeights::from_counts(w.clone())?)
                .gap_sum;
            // resampled y values and ranks, laid out block by block in x order
            let ys: Vec<f64> = units
                .iter()
                .flat_map(|&u| std::iter::repeat_n(sample.y()[u], w[u] as usize))
                .collect();
            let r = compute_ranks(&ys)?.r;
            let blocks: Vec<(usize, usize)> = {
                let mut start = 0;
                units
                    .iter()
                    .filter(|&&u| w[u] > 0)
                    .map(|&u| {
                        let b = (start, w[u] as usize);
                        start += w[u] as usize;
                        b
                    })
                    .collect()
            };
            let mut choice = vec![0usize; blocks.len()];
            loop {
                let mut perm = Vec::with_capacity(n);
                for (bi, &(start, len)) in blocks.iter().enumerate() {
                    perm.extend(perms[len][choice[bi]].iter().map(|&p| start + p));
                }
                cases += 1;
                failures += usize::from(rank_gap_sum(&r, &perm) != expect);
                // advance the mixed-radix counter over per-block permutations
                let mut pos = 0;
                while pos < blocks.len() {
                    choice[pos] += 1;
                    if choice[pos] < perms[blocks[pos].1].len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
                if pos == blocks.len() {
                    break;
                }
            }
        }
    }
    Ok(CheckOutcome::failures(
        format!("key identity, exhaustive tie-breaks, n={n}"),
        failures,
        cases,
    ))
}

/// `|xibar - xihat| <= 6n/(n^2-1)` over randomly drawn cases.
pub fn check_window_bound(cases: usize, seed: u64) -> Result<CheckOutcome> {
    let worst = (0..cases)
        .into_par_iter()
        .map(|c| -> Result<(usize, f64)> {
            let s = derive_seed(seed, &[c as u64]);
            let mut rng = stream_rng(s, 0);
            let n = rng.random_range(2..=200usize);
            let sample = model_sample(rng.random_range(-0.95..0.95), n, s)?;
            let kernel = ResampleKernel::new(&sample);
            let w = draw_weights(n, &mut rng);
            let gap = (kernel.xi_bar(&w)? - kernel.xi_hat(&w)?).abs();
            let nf = n as f64;
            Ok((
                usize::from(gap > 6.0 * nf / (nf * nf - 1.0)),
                gap / (6.0 * nf / (nf * nf - 1.0)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = worst.iter().map(|w| w.0).sum();
    let ratio = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let mut out = CheckOutcome::failures("window bound 6n/(n^2-1)", failures, cases);
    out.detail
        .push_str(&format!("; largest gap/bound {ratio:.3}"));
    Ok(out)
}

/// `n * mean (xihat - xitilde)^2` over `samples` samples and `draws` weight
/// draws each, at independence.
pub fn hat_tilde_msd(n: usize, samples: usize, draws: usize, seed: u64) -> Result<f64> {
    let sums = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let sd = derive_seed(seed, &[n as u64, s as u64]);
            let kernel = ResampleKernel::new(&model_sample(0.0, n, sd)?);
            let mut rng = stream_rng(sd, 1);
            let mut acc = 0.0;
            for _ in 0..draws {
                let w = draw_weights(n, &mut rng);
                acc += (kernel.xi_hat(&w)? - kernel.xi_tilde(&w)?).powi(2);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(n as f64 * sums.iter().sum::<f64>() / (samples * draws) as f64)
}

pub fn check_hat_tilde_decay(
    ns: &[usize],
    samples: usize,
    draws: usize,
    limit: f64,
    seed: u64,
) -> Result<CheckOutcome> {
    let vals: Vec<f64> = ns
        .iter()
        .map(|&n| hat_tilde_msd(n, samples, draws, seed))
        .collect::<Result<_>>()?;
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    let last = *vals.last().unwrap_or(&f64::NAN);
    Ok(CheckOutcome {
        name: "n E[(xihat - xitilde)^2] decays".into(),
        observed: last,
        expected: 0.0,
        tolerance: limit,
        passed: decreasing && last < limit,
        detail: format!("values {vals:.5?} at n = {ns:?}; decreasing = {decreasing}"),
    })
}

pub fn check_multinomial_moments(max_n: u64) -> Result<CheckOutcome> {
    let (mut failures, mut cases) = (0, 0);
    for n in 1..=max_n {
        for s in 0..=n {
            for s2 in 0..=n - s {
                for t in 0..=n - s - s2 {
                    cases += 1;
                    let closed = multinomial_moments_exact(s, s2, t, n)?;
                    failures +=
                        usize::from(closed != multinomial_moments_by_enumeration(s, s2, t, n)?);
                }
            }
        }
    }
    Ok(CheckOutcome::failures(
        format!("multinomial moments exact, n<={max_n}"),
        failures,
        cases,
    ))
}

pub fn check_telescoping(max_n: i64) -> CheckOutcome {
    let (mut failures, mut cases) = (0, 0);
    for n in 2..=max_n {
        let (a, b) = c_double_sum_identity(n);
        let (c, d) = kc_double_sum_identity(n);
        failures += usize::from(a != b) + usize::from(c != d);
        cases += 2;
        for i in 1..n {
            let (l, r) = c_inner_sum_identity(n, i);
            failures += usize::from(l != r);
            cases += 1;
        }
    }
    CheckOutcome::failures(
        format!("telescoping sums exact, n<={max_n}"),
        failures,
        cases,
    )
}

/// Exact conditional mean against the literal `n^n` walk.
pub fn check_cond_exp_enumeration(max_n: usize, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let (mut failures, mut cases) = (0, 0);
    for n in 2..=max_n {
        for s in 0..samples {
            let sample = model_sample(0.3, n, derive_seed(seed, &[n as u64, s as u64]))?;
            cases += 1;
            failures +=
                usize::from(cond_exp_xibar_exact(&sample)? != xibar_mean_by_index_draws(&sample)?);
        }
    }
    Ok(CheckOutcome::failures(
        format!("conditional mean exact, n<={max_n}"),
        failures,
        cases,
    ))
}

/// Monte Carlo mean and variance of the window statistic for one sample.
pub fn xibar_monte_carlo(
    sample: &BivariateSample,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64, f64, f64)> {
    const CHUNK: usize = 10_000;
    let kernel = ResampleKernel::new(sample);
    let n = sample.len();
    let parts = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut rng = stream_rng(seed, c as u64);
            (0..CHUNK.min(draws - c * CHUNK))
                .map(|_| kernel.xi_bar(&draw_weights(n, &mut rng)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let vals: Vec<f64> = parts.into_iter().flatten().collect();
    let d = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / d;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d - 1.0);
    let m4 = vals.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / d;
    let var_se = ((m4 - var * var) / d).max(0.0).sqrt();
    Ok((mean, (var / d).sqrt(), var, var_se))
}

pub fn check_cond_exp_monte_carlo(n: usize, draws: usize, seed: u64) -> Result<CheckOutcome> {
    let sample = model_sample(0.5, n, seed)?;
    let (mean, se, _, _) = xibar_monte_carlo(&sample, draws, derive_seed(seed, &[1]))?;
    Ok(CheckOutcome::within(
        format!("conditional mean vs Monte Carlo, n={n}"),
        mean,
        cond_exp_xibar(&sample)?,
        4.0 * se,
        format!("{draws} draws, 4 SE"),
    ))
}

/// Leading-order conditional variance against Monte Carlo, allowing 4 SE
/// plus the calibrated `C / n^2` remainder band. Reports the worst sample.
pub fn check_cond_var(n: usize, samples: usize, draws: usize, seed: u64) -> Result<CheckOutcome> {
    let mut worst: Option<CheckOutcome> = None;
    let mut failures = 0;
    for s in 0..samples {
        let sd = derive_seed(seed, &[s as u64]);
        let rho = [0.0, 0.3, 0.5, 0.7, 0.9][s % 5];
        let sample = model_sample(rho, n, sd)?;
        let cv = cond_var_xibar(&sample)?;
        let (_, _, var, var_se) = xibar_monte_carlo(&sample, draws, derive_seed(sd, &[1]))?;
        let tol = 4.0 * var_se + cv.band(COND_VAR_REMAINDER_CONSTANT);
        let c = CheckOutcome::within(
            format!("conditional variance vs Monte Carlo, n={n}"),
            var,
            cv.value,
            tol,
            String::new(),
        );
        failures += usize::from(!c.passed);
        let excess = (c.observed - c.expected).abs() / c.tolerance;
        if worst
            .as_ref()
            .is_none_or(|w| excess > (w.observed - w.expected).abs() / w.tolerance)
        {
            worst = Some(c);
        }
    }
    let mut out = worst.expect("at least one sample");
    out.passed = failures == 0;
    out.detail = format!(
        "{failures} of {samples} samples outside 4 SE + {COND_VAR_REMAINDER_CONSTANT}/n^2; worst sample shown; {draws} draws each"
    );
    Ok(out)
}

/// The 14 expectations, one outcome each.
pub fn check_card_table(n: usize, draws: usize, seed: u64) -> Vec<CheckOutcome> {
    card_monte_carlo(n, draws, seed)
        .into_iter()
        .zip(card_expectation_table(n as u64))
        .map(|(mc, closed)| {
            CheckOutcome::within(
                format!("{} at n={n}", closed.name),
                mc.mean,
                closed.value,
                4.0 * mc.stderr,
                format!("{draws} draws, 4 SE"),
            )
        })
        .collect()
}

pub fn check_weighted_l(mc_n: usize, draws: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for n in [2usize, 3] {
        let exact = weighted_l_mean_by_enumeration(n)?;
        let closed = weighted_l_mean_exact(n as u64);
        out.push(CheckOutcome::within(
            format!("weighted reversed-rank mean exact, n={n}"),
            exact.to_f64().unwrap_or(f64::NAN),
            closed.to_f64().unwrap_or(f64::NAN),
            0.0,
            if exact == closed {
                "rational equality"
            } else {
                "rationals differ"
            },
        ));
        out.last_mut().unwrap().passed = exact == closed;
    }
    let e = weighted_l_monte_carlo(mc_n, draws, seed);
    out.push(CheckOutcome::within(
        format!("weighted reversed-rank mean vs Monte Carlo, n={mc_n}"),
        e.mean,
        weighted_l_mean(mc_n as u64),
        4.0 * e.stderr,
        format!("{draws} draws, 4 SE"),
    ));
    Ok(out)
}

/// Average conditional mean over fresh independent samples against the
/// two-term expansion.
pub fn check_bias_expansion(n: usize, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let vals = (0..samples)
        .into_par_iter()
        .map(|s| cond_exp_xibar(&model_sample(0.0, n, derive_seed(seed, &[s as u64]))?))
        .collect::<Result<Vec<_>>>()?;
    let mean = vals.iter().sum::<f64>() / samples as f64;
    Ok(CheckOutcome::within(
        format!("mean of conditional means vs 1/e + (3 - 1/(2e))/n, n={n}"),
        mean,
        xibar_mean_expansion(n),
        0.01,
        format!("{samples} samples"),
    ))
}

/// `n E[Var(xibar | data)]` from the leading-order formula at independence,
/// which should stay below the limit-superior bound.
pub fn check_variance_deficit(ns: &[usize], samples: usize, seed: u64) -> Result<CheckOutcome> {
    let bound = asymptotic_constants().var_bound;
    let mut vals = Vec::new();
    for &n in ns {
        let v = (0..samples)
            .into_par_iter()
            .map(|s| {
                Ok(cond_var_xibar(&model_sample(
                    0.0,
                    n,
                    derive_seed(seed, &[n as u64, s as u64]),
                )?)?
                .value)
            })
            .collect::<Result<Vec<f64>>>()?;
        vals.push(n as f64 * v.iter().sum::<f64>() / samples as f64);
    }
    let top = vals.iter().copied().fold(f64::MIN, f64::max);
    Ok(CheckOutcome {
        name: "n E[conditional variance] below 3/5 - 8/(5e^2)".into(),
        observed: top,
        expected: bound,
        tolerance: 0.0,
        passed: top < bound && top < 0.4,
        detail: format!("values {vals:.4?} at n = {ns:?}, {samples} samples each"),
    })
}

struct Sizes {
    key_triples: usize,
    bound_cases: usize,
    decay: (usize, usize),
    cond_mean_draws: usize,
    cond_var: (usize, usize),
    card_draws: usize,
    weighted_draws: usize,
    bias_samples: usize,
    deficit_samples: usize,
    telescoping_n: i64,
}

const FAST: Sizes = Sizes {
    key_triples: 1_000,
    bound_cases: 1_000,
    decay: (8, 100),
    cond_mean_draws: 100_000,
    cond_var: (4, 100_000),
    card_draws: 200_000,
    weighted_draws: 200_000,
    bias_samples: 40,
    deficit_samples: 4,
    telescoping_n: 30,
};

const FULL: Sizes = Sizes {
    key_triples: 10_000,
    bound_cases: 10_000,
    decay: (20, 200),
    cond_mean_draws: 100_000,
    cond_var: (20, 200_000),
    card_draws: 1_000_000,
    weighted_draws: 1_000_000,
    bias_samples: 200,
    deficit_samples: 10,
    telescoping_n: 50,
};

pub fn verify_theory(level: VerifyLevel, seed: u64) -> Result<VerifyReport> {
    let z = match level {
        VerifyLevel::Fast => &FAST,
        VerifyLevel::Full => &FULL,
    };
    let sub = |tag: u64| derive_seed(seed, &[tag]);
    let mut checks = vec![
        check_multinomial_moments(6)?,
        check_telescoping(z.telescoping_n),
        check_cond_exp_enumeration(5, 3, sub(1))?,
        check_cond_exp_monte_carlo(30, z.cond_mean_draws, sub(2))?,
        check_cond_var(30, z.cond_var.0, z.cond_var.1, sub(3))?,
    ];
    checks.extend(check_card_table(6, z.card_draws, sub(4)));
    checks.extend(check_weighted_l(5, z.weighted_draws, sub(5))?);
    checks.push(check_bias_expansion(1000, z.bias_samples, sub(6))?);
    checks.push(check_variance_deficit(
        &[20, 30, 40, 50],
        z.deficit_samples,
        sub(7),
    )?);
    for n in [5, 50, 200] {
        checks.push(check_key_identity_random(n, z.key_triples, sub(8))?);
    }
    checks.push(check_key_identity_exhaustive(6, 2, sub(9))?);
    checks.push(check_window_bound(z.bound_cases, sub(10))?);
    checks.push(check_hat_tilde_decay(
        &[100, 400, 1600],
        z.decay.0,
        z.decay.1,
        0.01,
        sub(11),
    )?);
    let c = asymptotic_constants();
    checks.push(CheckOutcome::within(
        "limit of the bootstrap mean",
        c.one_over_e,
        0.367_879_441_2,
        1e-10,
        "1/e",
    ));
    checks.push(CheckOutcome::within(
        "conditional variance bound",
        c.var_bound,
        0.3835,
        5e-5,
        "3/5 - 8/(5e^2)",
    ));
    Ok(VerifyReport {
        level,
        seed,
        checks,
    })
}
