//! Closed-form conditional mean and variance of the window statistic given
//! one sample, set against exact enumeration at n = 5 and Monte Carlo at
//! n = 30.

use num_traits::ToPrimitive;
use xiboot::model::{gaussian_rotation_sample, ModelSpec};
use xiboot::sim::verify::xibar_monte_carlo;
use xiboot::theory::enumerate::xibar_moments_by_enumeration;
use xiboot::theory::moments::COND_VAR_REMAINDER_CONSTANT;
use xiboot::theory::{cond_exp_xibar, cond_exp_xibar_exact, cond_var_xibar};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let small = gaussian_rotation_sample(&ModelSpec::new(0.3, 5, 1)?)?;
    let exact = cond_exp_xibar_exact(&small)?;
    let enumerated = xibar_moments_by_enumeration(&small)?;
    println!(
        "n = 5: closed-form mean {exact} (enumeration {})",
        enumerated.mean
    );
    println!(
        "       variance: leading-order {:.6}, enumeration {:.6}",
        cond_var_xibar(&small)?.value,
        enumerated.variance.to_f64().unwrap_or(f64::NAN)
    );

    let n = 30;
    let sample = gaussian_rotation_sample(&ModelSpec::new(0.0, n, 2)?)?;
    let cv = cond_var_xibar(&sample)?;
    let (mc_mean, mc_se, mc_var, var_se) = xibar_monte_carlo(&sample, 200_000, 3)?;
    println!("n = {n}:");
    println!(
        "  mean     closed form {:.5}, Monte Carlo {mc_mean:.5} +- {mc_se:.5}",
        cond_exp_xibar(&sample)?
    );
    println!(
        "  variance leading order {:.5} (band +- {:.5}), Monte Carlo {mc_var:.5} +- {var_se:.5}",
        cv.value,
        cv.band(COND_VAR_REMAINDER_CONSTANT)
    );
    println!(
        "  n * variance = {:.4}; its limit superior is 3/5 - 8/(5e^2) = 0.3835",
        n as f64 * cv.value
    );
    Ok(())
}
