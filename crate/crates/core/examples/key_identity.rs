//! The rank-gap sum of a materialized resample does not depend on how its
//! duplicated x values are ordered, and the index-space kernel reproduces it
//! without building the resample.

use rand::Rng;
use xiboot::bootstrap::{draw_weights, materialized_gap_sum, ResampleKernel};
use xiboot::model::{gaussian_rotation_sample, ModelSpec};
use xiboot::rank::TieBreak;
use xiboot::rng::stream_rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 12;
    let sample = gaussian_rotation_sample(&ModelSpec::new(0.5, n, 5)?)?;
    let kernel = ResampleKernel::new(&sample);
    let mut rng = stream_rng(5, 1);
    for draw in 0..5 {
        let w = draw_weights(n, &mut rng);
        let sums = kernel.sums(&w);
        let orderings: Vec<u64> = (0..4)
            .map(|_| materialized_gap_sum(&sample, &w, TieBreak::Seeded(rng.random())))
            .collect::<Result<_, _>>()?;
        println!(
            "draw {draw}: weights {:?}\n  kernel gap sum {}, materialized under 4 random tie-breaks {:?}",
            w.counts(),
            sums.gap_sum,
            orderings
        );
        assert!(orderings.iter().all(|&g| g == sums.gap_sum));
    }
    Ok(())
}
