use serde::Serialize;

use crate::error::{Error, Result};

/// Limiting `n Var(xi_n)` under the Gaussian rotation model, keyed by `|rho|`.
pub const DEFAULT_VARIANCE_TARGETS: [(f64, f64); 5] = [
    (0.0, 0.4),
    (0.3, 0.46),
    (0.5, 0.51),
    (0.7, 0.47),
    (0.9, 0.24),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub rho_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub bootstrap_size: usize,
    pub alphas: Vec<f64>,
    pub master_seed: u64,
    /// `(|rho|, target)` pairs.
    pub variance_targets: Vec<(f64, f64)>,
    pub workers: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            rho_grid: vec![0.0, 0.3, 0.5, 0.7, 0.9],
            n_grid: vec![1000],
            replications: 500,
            bootstrap_size: 500,
            alphas: vec![0.05, 0.1],
            master_seed: 20_240_101,
            variance_targets: DEFAULT_VARIANCE_TARGETS.to_vec(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho_grid.is_empty() {
            return Err(Error::param("rho_grid", "empty"));
        }
        if let Some(r) = self.rho_grid.iter().find(|r| r.is_nan() || r.abs() >= 1.0) {
            return Err(Error::param("rho_grid", format!("{r} is outside (-1, 1)")));
        }
        if self.n_grid.is_empty() {
            return Err(Error::param("n_grid", "empty"));
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n < 2) {
            return Err(Error::param(
                "n_grid",
                format!("sample size {n} is below 2"),
            ));
        }
        if self.replications < 2 {
            return Err(Error::param("replications", "need at least 2"));
        }
        if self.bootstrap_size < 2 {
            return Err(Error::param("bootstrap_size", "need at least 2"));
        }
        if self.alphas.is_empty() {
            return Err(Error::param("alphas", "empty"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::param("alphas", format!("{a} is outside (0, 1)")));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "need at least 1"));
        }
        if let Some((r, t)) = self
            .variance_targets
            .iter()
            .find(|(r, t)| r.is_nan() || r.abs() >= 1.0 || t.is_nan() || *t <= 0.0)
        {
            return Err(Error::param(
                "variance_targets",
                format!("invalid entry {r}:{t}"),
            ));
        }
        for &rho in &self.rho_grid {
            self.variance_target(rho)?;
        }
        Ok(())
    }

    pub fn variance_target(&self, rho: f64) -> Result<f64> {
        self.variance_targets
            .iter()
            .find(|(r, _)| (r.abs() - rho.abs()).abs() < 1e-9)
            .map(|&(_, t)| t)
            .ok_or_else(|| {
                Error::param(
                    "variance_targets",
                    format!(
                        "no target for rho = {rho}; add one with variance_targets={}:<value>",
                        rho.abs()
                    ),
                )
            })
    }

    /// Applies `key=value` lines on top of `self`.
    ///
    /// Recognised keys: `rho`, `n`, `reps`, `boot`, `alpha` (lists are comma
    /// separated), `seed`, `workers`, and `variance_targets` as a list of
    /// `rho:target` pairs which are merged into the existing table. `#` starts
    /// a comment.
    pub fn apply_overrides(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: "config".into(),
                line: lineno as u64 + 1,
                reason: format!("expected key=value, found {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad =
                |field: &str, e: String| Error::param(field, format!("line {}: {e}", lineno + 1));
            match key {
                "rho" | "rho_grid" => {
                    self.rho_grid = list(value).map_err(|e| bad("rho_grid", e))?
                }
                "n" | "n_grid" => self.n_grid = list(value).map_err(|e| bad("n_grid", e))?,
                "reps" | "replications" => {
                    self.replications = scalar(value).map_err(|e| bad("replications", e))?
                }
                "boot" | "bootstrap_size" => {
                    self.bootstrap_size = scalar(value).map_err(|e| bad("bootstrap_size", e))?
                }
                "alpha" | "alphas" => self.alphas = list(value).map_err(|e| bad("alphas", e))?,
                "seed" | "master_seed" => {
                    self.master_seed = scalar(value).map_err(|e| bad("master_seed", e))?
                }
                "workers" => self.workers = scalar(value).map_err(|e| bad("workers", e))?,
                "variance_targets" => {
                    for pair in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                        let (r, t) = pair.split_once(':').ok_or_else(|| {
                            bad(
                                "variance_targets",
                                format!("expected rho:target, found {pair:?}"),
                            )
                        })?;
                        let r: f64 = scalar(r.trim()).map_err(|e| bad("variance_targets", e))?;
                        let t: f64 = scalar(t.trim()).map_err(|e| bad("variance_targets", e))?;
                        self.variance_targets
                            .retain(|(x, _)| (x.abs() - r.abs()).abs() >= 1e-9);
                        self.variance_targets.push((r.abs(), t));
                    }
                }
                other => {
                    return Err(Error::Parse {
                        path: "config".into(),
                        line: lineno as u64 + 1,
                        reason: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Reads a config file and applies it over `base`.
pub fn parse_config_overrides(
    base: &SimulationConfig,
    path: &std::path::Path,
) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = base.clone();
    cfg.apply_overrides(&text).map_err(|e| match e {
        Error::Parse { line, reason, .. } => Error::Parse {
            path: path.display().to_string(),
            line,
            reason,
        },
        other => other,
    })?;
    Ok(cfg)
}

fn scalar<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| format!("cannot parse {s:?}: {e}"))
}

fn list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|p| scalar(p.trim())).collect()
}
