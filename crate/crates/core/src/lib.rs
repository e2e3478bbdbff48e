//! Chatterjee's rank correlation and the standard bootstrap applied to it.
//!
//! The crate is organised around five pieces:
//!
//! - [`model`]: the Gaussian rotation model with a quadrature oracle for the
//!   population dependence measure.
//! - [`rank`] and [`xi`]: the statistic in its general (tied) and simple
//!   (tie-free) forms.
//! - [`bootstrap`]: multinomial resampling weights and the bootstrapped
//!   statistic, along with the variance estimators and hybrid intervals built
//!   from its replicates.
//! - [`theory`]: closed-form conditional moments of the resampled statistic,
//!   each paired with an enumeration or Monte Carlo oracle.
//! - [`sim`]: the coverage study harness and the theory-verification suite.
//!
//! Data files are read by [`data`] and the command line lives in [`cli`].

pub mod bootstrap;
pub mod cli;
pub mod data;
pub mod error;
pub mod model;
pub mod rank;
pub mod rng;
pub mod sim;
pub mod theory;
pub mod xi;

pub use error::{Error, Result};
pub use model::BivariateSample;
pub use rank::TieBreak;
