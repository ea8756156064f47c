//! Simulation and drift estimation for linear stochastic PDEs driven by
//! fractional noise, observed through their spectral coordinates.
//!
//! Each coordinate is a stationary fractional Ornstein-Uhlenbeck process with
//! speed `alpha * theta_k` and noise scale `sigma_k`. The crate samples those
//! coordinates exactly on a time grid, computes weighted minimum-contrast
//! estimates of `alpha`, and runs seeded Monte Carlo experiments against the
//! closed-form rate predictions in [`asymptotics`].
//!
//! ```
//! use std::sync::Arc;
//! use spectral_mce::{sample_stationary_paths, wmce_discrete, RngPolicy, SamplingMethod, SpectralModel};
//!
//! let model = Arc::new(SpectralModel::heat(1.0, 0.5, 1, 50).unwrap());
//! let grid: Vec<f64> = (0..=10).map(f64::from).collect();
//! let paths = sample_stationary_paths(model.clone(), &grid, &RngPolicy::new(7), SamplingMethod::Auto).unwrap();
//! let est = wmce_discrete(&paths, &model, 50, 10).unwrap();
//! assert!((est.alpha_star - 1.0).abs() < 0.2);
//! ```

// NaN must fail range checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod autocov;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod model;
pub mod paths;
pub mod quadrature;
pub mod sampler;
pub mod stats;

pub use asymptotics::{
    continuous_var_rate, predicted_alpha_var_discrete, predicted_var_yn_discrete, reference_rates, standardize,
    standardize_estimate, zeta_bound, RateKind, RatePrediction, ReferenceEstimator,
};
pub use autocov::{canonical_autocov, coordinate_autocov, AutocovTable};
pub use error::{Error, Result};
pub use estimators::{
    continuous_weights, optimal_weights, s_squared_discrete, unweighted_mce, wmce_continuous, wmce_discrete,
    wmce_two_term_drift, y_stat_continuous, y_stat_discrete, Eq34Normalizer, EstimateResult, EstimatorKind,
    SamplingScheme, WeightVector,
};
pub use harness::{run_experiment, ExperimentConfig, ExperimentSummary};
pub use model::{hurst_constant, HurstRegime, InitialCondition, SpectralModel};
pub use paths::CoordinatePaths;
pub use sampler::{sample_nonstationary_paths, sample_stationary_paths, RngPolicy, SamplingMethod};
pub use stats::{ks_statistic, rate_regression};
