//! Runs the closed-form versus oracle checks and prints one line per check.
//!
//! ```text
//! cargo run --release --example verify_theory -- [fast|full] [seed]
//! ```

use xiboot::sim::verify::{verify_theory, VerifyLevel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let level = match args.next().as_deref() {
        Some("full") => VerifyLevel::Full,
        _ => VerifyLevel::Fast,
    };
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let started = std::time::Instant::now();
    let report = verify_theory(level, seed)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    println!(
        "{} of {} checks passed in {:.1?}",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        started.elapsed()
    );
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
