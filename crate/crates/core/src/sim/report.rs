use std::io::Write;

use serde::Serialize;

use super::{CellResult, SimulationResult};
use crate::error::Result;

pub const CSV_HEADER: [&str; 10] = [
    "rho",
    "n",
    "method",
    "metric",
    "alpha",
    "value",
    "stderr",
    "replications",
    "bootstrap_size",
    "seed",
];

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV record per metric; `alpha` is empty where it does not apply.
pub fn write_csv<W: Write>(result: &SimulationResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let seed = result.config.master_seed.to_string();
    for cell in &result.cells {
        for (method, metric, alpha, value, stderr) in rows(cell) {
            w.write_record([
                cell.rho.to_string(),
                cell.n.to_string(),
                method.to_string(),
                metric.to_string(),
                alpha.map(|a| a.to_string()).unwrap_or_default(),
                value.to_string(),
                stderr.to_string(),
                cell.replications.to_string(),
                cell.bootstrap_size.to_string(),
                seed.clone(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

type Row = (&'static str, &'static str, Option<f64>, f64, f64);

fn rows(c: &CellResult) -> Vec<Row> {
    let mut out: Vec<Row> = vec![
        ("V-B1", "rmse", None, c.rmse_b1.value, c.rmse_b1.stderr),
        ("V-B2", "rmse", None, c.rmse_b2.value, c.rmse_b2.stderr),
        (
            "V-B1",
            "mean",
            None,
            c.mean_var_b1.value,
            c.mean_var_b1.stderr,
        ),
        (
            "V-B2",
            "mean",
            None,
            c.mean_var_b2.value,
            c.mean_var_b2.stderr,
        ),
    ];
    for cov in &c.coverage {
        out.push((
            cov.method.label(),
            "coverage",
            Some(cov.alpha),
            cov.value,
            cov.stderr,
        ));
    }
    out.extend([
        ("xi_n", "mean", None, c.mean_xi_n.value, c.mean_xi_n.stderr),
        (
            "bootstrap",
            "mean_replicate",
            None,
            c.mean_xib.value,
            c.mean_xib.stderr,
        ),
        (
            "bootstrap",
            "degenerate_redraws",
            None,
            c.degenerate_redraws as f64,
            0.0,
        ),
        (
            "sample",
            "regenerations",
            None,
            c.sample_regenerations as f64,
            0.0,
        ),
        ("oracle", "true_xi", None, c.true_xi, 0.0),
        ("oracle", "variance_target", None, c.variance_target, 0.0),
    ]);
    out
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    schema_version: u32,
    #[serde(flatten)]
    result: &'a SimulationResult,
}

pub fn write_json<W: Write>(result: &SimulationResult, mut out: W) -> Result<()> {
    let doc = JsonDoc {
        schema_version: SCHEMA_VERSION,
        result,
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_simulation, SimulationConfig};

    fn result() -> SimulationResult {
        run_simulation(&SimulationConfig {
            rho_grid: vec![0.0],
            n_grid: vec![10],
            replications: 2,
            bootstrap_size: 2,
            workers: 1,
            ..SimulationConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn csv_has_fixed_columns() {
        let mut buf = Vec::new();
        write_csv(&result(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        for l in lines {
            assert_eq!(l.split(',').count(), 10, "{l}");
        }
        assert!(text.contains(",HB2,coverage,0.05,"));
    }

    #[test]
    fn json_carries_schema_version_and_no_timing() {
        let mut buf = Vec::new();
        write_json(&result(), &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["cells"][0]["n"], 10);
        assert!(v.get("wall_time").is_none());
    }
}
