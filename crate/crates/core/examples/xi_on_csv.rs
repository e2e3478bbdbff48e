//! The statistic on a two-column file, or on a built-in sine curve when no
//! path is given.
//!
//! ```text
//! cargo run --example xi_on_csv -- data.csv
//! ```

use xiboot::data::{read_sample, read_sample_from};
use xiboot::rank::{tie_summary, TieBreak};
use xiboot::xi::{xi_general, xi_simple};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sample = match std::env::args().nth(1) {
        Some(path) => read_sample(path.as_ref())?,
        None => {
            // y = sin(6x) is a noiseless but non-monotone function of x
            let mut text = String::from("x,y\n");
            for i in 0..400 {
                let x = i as f64 / 400.0;
                text.push_str(&format!("{x},{}\n", (6.0 * x).sin()));
            }
            read_sample_from(text.as_bytes(), b',', "built-in")?
        }
    };
    let general = xi_general(&sample, TieBreak::ByIndex)?;
    println!("n = {}", general.n);
    println!("xi_n (general form) = {:.6}", general.value);
    if sample.is_continuous() {
        println!(
            "xi_n (simple form)  = {:.6}",
            xi_simple(&sample, TieBreak::ByIndex)?.value
        );
    }
    let (tx, gx) = tie_summary(sample.x());
    let (ty, gy) = tie_summary(sample.y());
    println!("ties: {tx} x values in {gx} groups, {ty} y values in {gy} groups");
    Ok(())
}
