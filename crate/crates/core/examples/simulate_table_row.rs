//! One row of the coverage table at desk scale.
//!
//! ```text
//! cargo run --release --example simulate_table_row -- 0.7 1000 500 500
//! ```
//! Arguments are rho, n, replications and bootstrap size.

use xiboot::bootstrap::CiMethod;
use xiboot::sim::{run_simulation, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let config = SimulationConfig {
        rho_grid: vec![arg(0, "0").parse()?],
        n_grid: vec![arg(1, "1000").parse()?],
        replications: arg(2, "200").parse()?,
        bootstrap_size: arg(3, "200").parse()?,
        ..SimulationConfig::default()
    };
    let result = run_simulation(&config)?;
    let c = &result.cells[0];
    println!(
        "rho = {}, n = {}, R = {}, B = {}",
        c.rho, c.n, c.replications, c.bootstrap_size
    );
    println!(
        "target n Var(xi_n) = {}, population xi = {:.4}",
        c.variance_target, c.true_xi
    );
    println!(
        "RMSE V-B1 {:8.2} +- {:.2}",
        c.rmse_b1.value, c.rmse_b1.stderr
    );
    println!(
        "RMSE V-B2 {:8.4} +- {:.4}",
        c.rmse_b2.value, c.rmse_b2.stderr
    );
    println!("{:<10} {:>6} {:>6}", "coverage", ".05", ".10");
    for m in [CiMethod::Hb1, CiMethod::Hb2, CiMethod::OracleVar] {
        println!(
            "{:<10} {:>6.3} {:>6.3}",
            m.label(),
            c.coverage_of(m, 0.05).unwrap_or(f64::NAN),
            c.coverage_of(m, 0.1).unwrap_or(f64::NAN)
        );
    }
    eprintln!("finished in {:.1?}", result.wall_time);
    Ok(())
}
