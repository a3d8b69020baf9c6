//! Simulation and estimation toolkit for the discrete-time stochastic SIR
//! model, focused on quantifying uncertainty in the reproduction ratio
//! R0 = a/c.
//!
//! The model tracks daily counts of susceptible (N1), infected (N2), and
//! recovered (N3) individuals. Given yesterday's counts, the new infections
//! N12 and recoveries N23 are independent binomials with success
//! probabilities a N2/n and c. Everything else in the crate builds on that
//! kernel: likelihood-based estimators of (a, c), forward-looking effective
//! reproduction ratios, deterministic mechanistic limits, renewal-equation
//! estimators of instantaneous reproduction, two-population extensions,
//! conjugate Bayesian inference, and Monte Carlo studies of estimator
//! sampling distributions.

pub mod bayes;
pub mod csv;
pub mod epiestim;
pub mod error;
pub mod estimators;
pub mod hetero;
pub mod mechanistic;
pub mod montecarlo;
pub mod reproduction;
pub mod rng;
pub mod sir;
pub mod solve;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use sir::{CountPath, EpidemicState, ModelParams, TransitionCounts};
