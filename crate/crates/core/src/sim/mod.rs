//! Coverage study for the bootstrapped statistic.
//!
//! For each `(rho, n)` cell the harness bootstraps `R` fresh samples from the
//! Gaussian rotation model `B` times each. It records how well the two
//! bootstrap variance estimators track the limiting variance and how often
//! the hybrid intervals cover the population value. A normal interval built
//! from the known limiting variance runs alongside as a baseline.
//!
//! Every random stream is derived from the master seed and the cell and
//! replication indices, so output does not depend on the worker count.

mod config;
mod report;
pub mod verify;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bootstrap::{
    bootstrap_distribution, ci_hybrid1, ci_hybrid2, ci_oracle_var, var_b1, var_b2, CiMethod,
    ReplicateStatistic,
};
use crate::error::{Error, Result};
use crate::model::{gaussian_rotation_sample_traced, true_xi_oracle, ModelSpec, OracleSettings};
use crate::rank::TieBreak;
use crate::rng::derive_seed;
use crate::xi::xi_general;

pub use config::{parse_config_overrides, SimulationConfig, DEFAULT_VARIANCE_TARGETS};
pub use report::{write_csv, write_json, CSV_HEADER, SCHEMA_VERSION};

/// A Monte Carlo average with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    pub method: CiMethod,
    pub alpha: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Aggregates for one `(rho, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub rho: f64,
    pub n: usize,
    pub replications: usize,
    pub bootstrap_size: usize,
    pub variance_target: f64,
    pub true_xi: f64,
    pub rmse_b1: Estimate,
    pub rmse_b2: Estimate,
    pub mean_var_b1: Estimate,
    pub mean_var_b2: Estimate,
    pub mean_xi_n: Estimate,
    pub mean_xib: Estimate,
    pub coverage: Vec<Coverage>,
    pub degenerate_redraws: u64,
    pub sample_regenerations: u64,
}

impl CellResult {
    pub fn coverage_of(&self, method: CiMethod, alpha: f64) -> Option<f64> {
        self.coverage
            .iter()
            .find(|c| c.method == method && (c.alpha - alpha).abs() < 1e-12)
            .map(|c| c.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub config: SimulationConfig,
    pub cells: Vec<CellResult>,
    /// Elapsed time; reported on the side and kept out of output files.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Per-replication record, reduced in replication order.
#[derive(Debug, Clone)]
struct Replication {
    xi_n: f64,
    var_b1: f64,
    var_b2: f64,
    mean_xib: f64,
    /// `covered[method][alpha]`
    covered: Vec<Vec<bool>>,
    redraws: u64,
    regenerations: u32,
}

const METHODS: [CiMethod; 3] = [CiMethod::Hb1, CiMethod::Hb2, CiMethod::OracleVar];

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let started = Instant::now();
    let oracle = OracleSettings::default();
    // Resolve every cell's inputs before any sampling starts.
    let mut plan = Vec::new();
    for (ri, &rho) in config.rho_grid.iter().enumerate() {
        let target = config.variance_target(rho)?;
        let truth = true_xi_oracle(rho, &oracle)?.value;
        for (ni, &n) in config.n_grid.iter().enumerate() {
            plan.push((ri, ni, rho, n, target, truth));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    let cells = pool.install(|| {
        plan.iter()
            .map(|&(ri, ni, rho, n, target, truth)| run_cell(config, ri, ni, rho, n, target, truth))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SimulationResult {
        config: config.clone(),
        cells,
        wall_time: started.elapsed(),
    })
}

fn run_cell(
    config: &SimulationConfig,
    ri: usize,
    ni: usize,
    rho: f64,
    n: usize,
    target: f64,
    truth: f64,
) -> Result<CellResult> {
    let reps: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let path = [ri as u64, ni as u64, rep as u64];
            let sample_seed = derive_seed(config.master_seed, &[path[0], path[1], path[2], 0]);
            let boot_seed = derive_seed(config.master_seed, &[path[0], path[1], path[2], 1]);
            replicate_once(config, rho, n, target, truth, sample_seed, boot_seed)
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(config, rho, n, target, truth, &reps))
}

fn replicate_once(
    config: &SimulationConfig,
    rho: f64,
    n: usize,
    target: f64,
    truth: f64,
    sample_seed: u64,
    boot_seed: u64,
) -> Result<Replication> {
    let (sample, regenerations) =
        gaussian_rotation_sample_traced(&ModelSpec::new(rho, n, sample_seed)?)?;
    let xi_n = xi_general(&sample, TieBreak::ByIndex)?.value;
    let dist = bootstrap_distribution(
        &sample,
        config.bootstrap_size,
        boot_seed,
        ReplicateStatistic::Direct,
    )?;
    let mut covered = vec![Vec::with_capacity(config.alphas.len()); METHODS.len()];
    for &alpha in &config.alphas {
        covered[0].push(ci_hybrid1(&dist, alpha)?.contains(truth));
        covered[1].push(ci_hybrid2(&dist, alpha)?.contains(truth));
        covered[2].push(ci_oracle_var(xi_n, n, target, alpha)?.contains(truth));
    }
    Ok(Replication {
        xi_n,
        var_b1: var_b1(&dist)?,
        var_b2: var_b2(&dist)?,
        mean_xib: dist.mean(),
        covered,
        redraws: dist.degenerate_redraws,
        regenerations,
    })
}

fn mean_se(values: impl Iterator<Item = f64> + Clone) -> Estimate {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

/// `sqrt(mean (v - target)^2)` with a delta-method standard error.
pub fn rmse(values: &[f64], target: f64) -> Estimate {
    let sq = mean_se(values.iter().map(|v| (v - target).powi(2)));
    let value = sq.value.sqrt();
    let stderr = if value > 0.0 {
        sq.stderr / (2.0 * value)
    } else {
        0.0
    };
    Estimate { value, stderr }
}

fn aggregate(
    config: &SimulationConfig,
    rho: f64,
    n: usize,
    target: f64,
    truth: f64,
    reps: &[Replication],
) -> CellResult {
    let r = reps.len() as f64;
    let v1: Vec<f64> = reps.iter().map(|x| x.var_b1).collect();
    let v2: Vec<f64> = reps.iter().map(|x| x.var_b2).collect();
    let mut coverage = Vec::new();
    for (mi, &method) in METHODS.iter().enumerate() {
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            let hits = reps.iter().filter(|x| x.covered[mi][ai]).count() as f64;
            let p = hits / r;
            coverage.push(Coverage {
                method,
                alpha,
                value: p,
                stderr: (p * (1.0 - p) / r).sqrt(),
            });
        }
    }
    CellResult {
        rho,
        n,
        replications: reps.len(),
        bootstrap_size: config.bootstrap_size,
        variance_target: target,
        true_xi: truth,
        rmse_b1: rmse(&v1, target),
        rmse_b2: rmse(&v2, target),
        mean_var_b1: mean_se(v1.iter().copied()),
        mean_var_b2: mean_se(v2.iter().copied()),
        mean_xi_n: mean_se(reps.iter().map(|x| x.xi_n)),
        mean_xib: mean_se(reps.iter().map(|x| x.mean_xib)),
        coverage,
        degenerate_redraws: reps.iter().map(|x| x.redraws).sum(),
        sample_regenerations: reps.iter().map(|x| u64::from(x.regenerations)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SimulationConfig {
        SimulationConfig {
            rho_grid: vec![0.0, 0.5],
            n_grid: vec![10],
            replications: 2,
            bootstrap_size: 2,
            workers: 2,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn rmse_of_exact_estimates_is_zero() {
        assert_eq!(rmse(&[0.4, 0.4, 0.4], 0.4).value, 0.0);
        let e = rmse(&[1.0, 3.0], 0.0);
        assert!((e.value - 5.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn smoke_run_has_valid_coverage() {
        let res = run_simulation(&tiny()).unwrap();
        assert_eq!(res.cells.len(), 2);
        for cell in &res.cells {
            assert_eq!(cell.coverage.len(), 3 * 2);
            for c in &cell.coverage {
                assert!([0.0, 0.5, 1.0].contains(&c.value), "{c:?}");
            }
            assert!(cell.rmse_b1.value >= 0.0 && cell.rmse_b2.value >= 0.0);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut a = tiny();
        a.replications = 6;
        a.bootstrap_size = 20;
        let mut b = a.clone();
        b.workers = 1;
        let (ra, rb) = (run_simulation(&a).unwrap(), run_simulation(&b).unwrap());
        assert_eq!(ra.cells, rb.cells);
    }

    #[test]
    fn nested_intervals_give_monotone_coverage() {
        let mut c = tiny();
        c.rho_grid = vec![0.3];
        c.n_grid = vec![50];
        c.replications = 40;
        c.bootstrap_size = 50;
        let cell = &run_simulation(&c).unwrap().cells[0];
        for m in METHODS {
            assert!(cell.coverage_of(m, 0.05).unwrap() >= cell.coverage_of(m, 0.1).unwrap());
        }
    }

    #[test]
    fn invalid_config_names_the_field() {
        let mut c = tiny();
        c.bootstrap_size = 1;
        let msg = run_simulation(&c).unwrap_err().to_string();
        assert!(msg.contains("bootstrap_size"), "{msg}");
    }
}
