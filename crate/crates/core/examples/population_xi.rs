//! Population value of the coefficient under the Gaussian model, from the
//! quadrature oracle, beside the sample statistic at growing n.

use xiboot::model::{gaussian_rotation_sample, true_xi_oracle, ModelSpec, OracleSettings};
use xiboot::rank::TieBreak;
use xiboot::xi::xi_general;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = OracleSettings::default();
    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10}",
        "rho", "xi(rho)", "n=100", "n=1000", "n=10000"
    );
    for rho in [0.0, 0.3, 0.5, 0.7, 0.9] {
        let truth = true_xi_oracle(rho, &settings)?;
        print!("{rho:>5} {:>10.5}", truth.value);
        for n in [100, 1000, 10_000] {
            let s = gaussian_rotation_sample(&ModelSpec::new(rho, n, 9)?)?;
            print!(" {:>10.5}", xi_general(&s, TieBreak::ByIndex)?.value);
        }
        println!();
    }
    Ok(())
}
