//! Closed-form moments of the resampled statistic and their brute-force
//! counterparts.
//!
//! Every closed form here has an independent oracle: exhaustive enumeration
//! over bootstrap outcomes where the sample is small, exact rational
//! arithmetic for polynomial identities, and seeded Monte Carlo otherwise.

pub mod card;
pub mod coeff;
pub mod enumerate;
pub mod moments;
pub mod multinomial;
pub mod weighted;
pub mod window;

use serde::Serialize;

pub use card::{card_expectation_table, card_monte_carlo, CardEstimate, CardMoment};
pub use coeff::{coeff_a, coeff_b, coeff_c, CoefficientParams, CoefficientTable};
pub use moments::{
    cond_exp_xibar, cond_exp_xibar_exact, cond_var_xibar, cond_var_xibar_with_limit,
    xibar_mean_expansion, xibar_unconditional_mean, ConditionalVariance,
};
pub use multinomial::{multinomial_moments, multinomial_moments_exact, MultinomialMoments};
pub use weighted::{weighted_l_mean, weighted_l_mean_exact, weighted_l_monte_carlo};
pub use window::{window_sets, window_size, WindowSets};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    /// Limit of the bootstrap mean under independence.
    pub one_over_e: f64,
    /// Upper bound on the limit superior of `n E[Var(xibar | data)]`.
    pub var_bound: f64,
    /// Limiting variance of `sqrt(n) xi_n` under independence.
    pub null_var: f64,
}

pub fn asymptotic_constants() -> AsymptoticConstants {
    let e = std::f64::consts::E;
    AsymptoticConstants {
        one_over_e: 1.0 / e,
        var_bound: 0.6 - 1.6 / (e * e),
        null_var: 0.4,
    }
}
