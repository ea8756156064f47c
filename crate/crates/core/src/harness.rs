//! Seeded, replication-parallel Monte Carlo experiments.
//!
//! Replication `r` draws one field with substream `(master_seed, r)` for the
//! largest `N` in the grid. Every smaller `N` reuses its leading rows. Results
//! are reduced in replication order, so a summary depends only on its config.

use std::collections::HashSet;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{predicted_var_yn_discrete, reference_rates, standardize, ReferenceEstimator};
use crate::error::{Error, Result};
use crate::estimators::{continuous_weights, estimate, log_theta_t, Eq34Normalizer, EstimatorKind, SamplingScheme};
use crate::model::{HurstRegime, InitialCondition, SpectralModel};
use crate::paths::CoordinatePaths;
use crate::sampler::{NonstationarySampler, RngPolicy, SamplingMethod, StationarySampler};
use crate::stats::{excess_kurtosis, ks_statistic, mean, rate_regression, sample_variance, KURTOSIS_MIN_SAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: SpectralModel,
    pub init: InitialCondition,
    pub scheme: SamplingScheme,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub eq34_normalizer: Eq34Normalizer,
    #[serde(default)]
    pub sampler: SamplingMethod,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.init.validate(&self.model)?;
        self.scheme.validate()?;
        if self.replications < 2 {
            return Err(Error::invalid(format!(
                "replications must be >= 2 (got {})",
                self.replications
            )));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::invalid("N_grid must be a non-empty list of positive integers"));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("N_grid must be strictly increasing"));
        }
        let max_n = self.max_n();
        self.model.check_coords(max_n)?;
        if let (SamplingScheme::Continuous { horizon, .. }, HurstRegime::Eq34) = (self.scheme, self.model.regime()) {
            log_theta_t(&self.model.thetas()[..max_n], horizon)?;
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimator set must not be empty"));
        }
        let mut seen = HashSet::new();
        for &e in &self.estimators {
            if !seen.insert(e) {
                return Err(Error::invalid(format!("estimator {} listed twice", e.name())));
            }
            match (e, self.scheme) {
                (EstimatorKind::WeightedDiscrete | EstimatorKind::TwoTermDrift, SamplingScheme::Continuous { .. }) => {
                    return Err(Error::invalid(format!("estimator {} needs a discrete scheme", e.name())));
                }
                (EstimatorKind::WeightedContinuous, SamplingScheme::Discrete { .. }) => {
                    return Err(Error::invalid("estimator weighted_continuous needs a continuous scheme"));
                }
                (EstimatorKind::WeightedContinuous, SamplingScheme::Continuous { horizon, .. }) => {
                    continuous_weights(&self.model, max_n, horizon, self.eq34_normalizer)?;
                }
                (EstimatorKind::TwoTermDrift, _) if self.model.nus().is_none() => {
                    return Err(Error::invalid("estimator two_term_drift needs model.nus"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn max_n(&self) -> usize {
        self.n_grid.last().copied().unwrap_or(0)
    }
}

/// Per-replication estimates, indexed `[estimator][N]`.
type ReplicationDraw = Vec<Vec<(f64, f64)>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub n_coords: usize,
    pub replications: usize,
    pub mean_alpha: f64,
    pub bias: f64,
    /// Variance of `alpha*` with divisor `R`, so `rmse^2 = bias^2 + variance`.
    pub variance: f64,
    pub rmse: f64,
    pub mean_y: f64,
    /// Sample variance of `Y_N` (divisor `R - 1`).
    pub var_y: f64,
    /// `var(Y_N)` used for standardization.
    pub standardizing_var: f64,
    pub standardized_from_theory: bool,
    pub standardized_mean: f64,
    pub standardized_var: f64,
    pub ks_statistic: Option<f64>,
    pub ks_pvalue: Option<f64>,
    /// Excess kurtosis of `Y_N`; needs at least 500 replications.
    pub y_excess_kurtosis: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSlope {
    pub estimator: EstimatorKind,
    /// `"N"` or `"sum_theta"`.
    pub regressor: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n_coords: usize,
    pub estimator: EstimatorKind,
    pub rmse: f64,
    /// `sqrt` of the predicted `alpha*` variance; order-only for continuous data.
    pub predicted_sd: f64,
    pub mle_rate: f64,
    pub tfe_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub rows: Vec<SummaryRow>,
    pub rate_slopes: Vec<RateSlope>,
    pub comparison: Vec<ComparisonRow>,
    /// Raw draws, indexed `[estimator][N][replication]` as `(alpha*, Y_N)`.
    pub samples: Vec<Vec<Vec<(f64, f64)>>>,
    pub estimators: Vec<EstimatorKind>,
    pub n_grid: Vec<usize>,
}

impl ExperimentSummary {
    pub fn row(&self, estimator: EstimatorKind, n_coords: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n_coords == n_coords)
    }

    pub fn slope(&self, estimator: EstimatorKind, regressor: &str) -> Option<&RateSlope> {
        self.rate_slopes
            .iter()
            .find(|s| s.estimator == estimator && s.regressor == regressor)
    }

    /// `(alpha*, Y_N)` draws for one estimator and `N`, in replication order.
    pub fn draws(&self, estimator: EstimatorKind, n_coords: usize) -> Option<&[(f64, f64)]> {
        let e = self.estimators.iter().position(|x| *x == estimator)?;
        let j = self.n_grid.iter().position(|x| *x == n_coords)?;
        Some(&self.samples[e][j])
    }

    pub const SUMMARY_HEADER: [&'static str; 17] = [
        "estimator",
        "N",
        "replications",
        "mean_alpha",
        "bias",
        "variance",
        "rmse",
        "mean_y",
        "var_y",
        "standardizing_var",
        "standardized_from_theory",
        "standardized_mean",
        "standardized_var",
        "ks_statistic",
        "ks_pvalue",
        "y_excess_kurtosis",
        "rmse_identity_residual",
    ];

    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::SUMMARY_HEADER)?;
        for r in &self.rows {
            let residual = r.rmse * r.rmse - (r.bias * r.bias + r.variance);
            w.write_record([
                r.estimator.name().to_string(),
                r.n_coords.to_string(),
                r.replications.to_string(),
                num(r.mean_alpha),
                num(r.bias),
                num(r.variance),
                num(r.rmse),
                num(r.mean_y),
                num(r.var_y),
                num(r.standardizing_var),
                r.standardized_from_theory.to_string(),
                num(r.standardized_mean),
                num(r.standardized_var),
                opt(r.ks_statistic),
                opt(r.ks_pvalue),
                opt(r.y_excess_kurtosis),
                num(residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `replication,estimator,N,alpha_star,y_stat`.
    pub fn write_samples_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replication", "estimator", "N", "alpha_star", "y_stat"])?;
        for (e, est) in self.estimators.iter().enumerate() {
            for (j, n) in self.n_grid.iter().enumerate() {
                for (r, (a, y)) in self.samples[e][j].iter().enumerate() {
                    w.write_record([r.to_string(), est.name().to_string(), n.to_string(), num(*a), num(*y)])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `estimator,regressor,slope,intercept,r2` for `log var(Y_N)`.
    pub fn write_rates_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["estimator", "regressor", "slope", "intercept", "r2"])?;
        for s in &self.rate_slopes {
            w.write_record([
                s.estimator.name().to_string(),
                s.regressor.clone(),
                num(s.slope),
                num(s.intercept),
                num(s.r2),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `N,estimator,rmse,predicted_sd,mle_rate,tfe_spread`.
    pub fn write_comparison_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["N", "estimator", "rmse", "predicted_sd", "mle_rate", "tfe_spread"])?;
        for c in &self.comparison {
            w.write_record([
                c.n_coords.to_string(),
                c.estimator.name().to_string(),
                num(c.rmse),
                num(c.predicted_sd),
                num(c.mle_rate),
                opt(c.tfe_spread),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

enum FieldSampler {
    Stationary(StationarySampler),
    Coupled(NonstationarySampler),
}

impl FieldSampler {
    fn sample(&self, rng: &RngPolicy) -> CoordinatePaths {
        match self {
            FieldSampler::Stationary(s) => s.sample(rng),
            FieldSampler::Coupled(s) => s.sample(rng),
        }
    }
}

/// Runs the experiment on `threads` worker threads (`0` = rayon default).
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentSummary> {
    cfg.validate()?;
    if threads == 0 {
        return run_inner(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let model = Arc::new(cfg.model.clone());
    let max_n = cfg.max_n();
    let grid = cfg.scheme.grid();
    let stationary = StationarySampler::new(model.clone(), &grid, cfg.sampler, max_n)
        .map_err(|e| experiment_error(0, max_n, e))?;
    let sampler = if cfg.init.is_stationary() {
        FieldSampler::Stationary(stationary)
    } else {
        FieldSampler::Coupled(NonstationarySampler::new(stationary, cfg.init.clone())?)
    };
    let base = RngPolicy::new(cfg.master_seed);

    let draws: Vec<ReplicationDraw> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let paths = sampler.sample(&base.replication(r as u64));
            cfg.estimators
                .iter()
                .map(|&kind| {
                    cfg.n_grid
                        .iter()
                        .map(|&n| {
                            estimate(kind, &paths, &model, n, &cfg.scheme, cfg.eq34_normalizer)
                                .map(|e| (e.alpha_star, e.y_stat))
                                .map_err(|e| experiment_error(r, n, e))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    // transpose to [estimator][N][replication]
    let samples: Vec<Vec<Vec<(f64, f64)>>> = (0..cfg.estimators.len())
        .map(|e| {
            (0..cfg.n_grid.len())
                .map(|j| draws.iter().map(|d| d[e][j]).collect())
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut rate_slopes = Vec::new();
    for (e, &kind) in cfg.estimators.iter().enumerate() {
        for (j, &n) in cfg.n_grid.iter().enumerate() {
            rows.push(summarize(cfg, kind, n, &samples[e][j]));
        }
        if cfg.n_grid.len() >= 3 {
            let var_points: Vec<(f64, f64)> = cfg
                .n_grid
                .iter()
                .map(|&n| {
                    let r = rows.iter().find(|r| r.estimator == kind && r.n_coords == n).unwrap();
                    (n as f64, r.var_y)
                })
                .collect();
            let sum_points: Vec<(f64, f64)> = var_points
                .iter()
                .map(|&(n, v)| (cfg.model.thetas()[..n as usize].iter().sum(), v))
                .collect();
            for (name, pts) in [("N", var_points), ("sum_theta", sum_points)] {
                if let Ok(fit) = rate_regression(&pts) {
                    rate_slopes.push(RateSlope {
                        estimator: kind,
                        regressor: name.to_string(),
                        slope: fit.slope,
                        intercept: fit.intercept,
                        r2: fit.r2,
                    });
                }
            }
        }
    }

    let comparison = comparison_rows(cfg, &rows)?;
    Ok(ExperimentSummary {
        rows,
        rate_slopes,
        comparison,
        samples,
        estimators: cfg.estimators.clone(),
        n_grid: cfg.n_grid.clone(),
    })
}

fn experiment_error(replication: usize, n_coords: usize, source: Error) -> Error {
    Error::Experiment {
        replication,
        n_coords,
        source: Box::new(source),
    }
}

fn summarize(cfg: &ExperimentConfig, kind: EstimatorKind, n: usize, draws: &[(f64, f64)]) -> SummaryRow {
    let alpha = cfg.model.alpha();
    let r = draws.len() as f64;
    let alphas: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let ys: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let mean_alpha = mean(&alphas);
    let bias = mean_alpha - alpha;
    let variance = alphas.iter().map(|a| (a - mean_alpha).powi(2)).sum::<f64>() / r;
    let rmse = (alphas.iter().map(|a| (a - alpha).powi(2)).sum::<f64>() / r).sqrt();
    let var_y = sample_variance(&ys);

    let theory = match (kind, cfg.scheme) {
        (EstimatorKind::WeightedDiscrete, SamplingScheme::Discrete { n: steps }) => {
            Some(predicted_var_yn_discrete(&cfg.model, steps, n))
        }
        _ => None,
    };
    let standardizing_var = theory.unwrap_or(var_y);
    let standardized: Vec<f64> = alphas
        .iter()
        .map(|&a| standardize(a, &cfg.model, standardizing_var))
        .collect();
    let ks = if standardizing_var > 0.0 {
        ks_statistic(&standardized).ok()
    } else {
        None
    };
    let kurtosis = (draws.len() >= KURTOSIS_MIN_SAMPLES && var_y > 0.0).then(|| excess_kurtosis(&ys));

    SummaryRow {
        estimator: kind,
        n_coords: n,
        replications: draws.len(),
        mean_alpha,
        bias,
        variance,
        rmse,
        mean_y: mean(&ys),
        var_y,
        standardizing_var,
        standardized_from_theory: theory.is_some(),
        standardized_mean: mean(&standardized),
        standardized_var: sample_variance(&standardized),
        ks_statistic: ks.map(|k| k.statistic),
        ks_pvalue: ks.map(|k| k.pvalue),
        y_excess_kurtosis: kurtosis,
    }
}

fn comparison_rows(cfg: &ExperimentConfig, rows: &[SummaryRow]) -> Result<Vec<ComparisonRow>> {
    let mle = &reference_rates(&cfg.model, &cfg.n_grid, ReferenceEstimator::Mle)?[0];
    let tfe = match cfg.model.dimension_hint() {
        Some(_) => Some(reference_rates(&cfg.model, &cfg.n_grid, ReferenceEstimator::Tfe)?.remove(0)),
        None => None,
    };
    let h = cfg.model.hurst();
    let alpha = cfg.model.alpha();
    let delta_factor = alpha.powf(1.0 + 2.0 * h) / (2.0 * h);
    let mut out = Vec::new();
    for (j, &n) in cfg.n_grid.iter().enumerate() {
        for row in rows.iter().filter(|r| r.n_coords == n) {
            let var_yn = match cfg.scheme {
                SamplingScheme::Discrete { n: steps } => predicted_var_yn_discrete(&cfg.model, steps, n),
                SamplingScheme::Continuous { horizon, .. } => {
                    crate::asymptotics::continuous_var_rate(&cfg.model, horizon, n)?
                }
            };
            out.push(ComparisonRow {
                n_coords: n,
                estimator: row.estimator,
                rmse: row.rmse,
                predicted_sd: delta_factor * var_yn.sqrt(),
                mle_rate: mle.values[j],
                tfe_spread: tfe.as_ref().map(|t| t.values[j]),
            });
        }
    }
    Ok(out)
}
