//! Weighted minimum-contrast estimators of the drift parameter.
//!
//! Every estimator here has the same shape: time-average the squared
//! coordinate paths, combine the averages with coordinate weights into a
//! statistic `Y_N` whose expectation is `alpha^(-2H)`, and invert the power
//! map `alpha* = Y_N^(-1/(2H))`. The true `alpha` of the model is never read.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::gamma;

use crate::autocov::{canonical_autocov, AutocovTable};
use crate::error::{Error, Result};
use crate::model::{hurst_constant, HurstRegime, SpectralModel};
use crate::paths::CoordinatePaths;
use crate::quadrature::integrate_breaks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Observations at `t = 1, ..., n`.
    Discrete { n: usize },
    /// Observation window `[0, T]` on a grid of step `h`; the first `delta`
    /// time units are discarded.
    Continuous {
        #[serde(rename = "T")]
        horizon: f64,
        h: f64,
        #[serde(default)]
        delta: f64,
    },
}

impl SamplingScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplingScheme::Discrete { n } => {
                if n == 0 {
                    return Err(Error::invalid("discrete scheme needs n >= 1"));
                }
            }
            SamplingScheme::Continuous { horizon, h, delta } => {
                if !(h > 0.0 && h <= horizon && horizon.is_finite()) {
                    return Err(Error::invalid(format!(
                        "continuous scheme needs 0 < h <= T (got h = {h}, T = {horizon})"
                    )));
                }
                if !(delta >= 0.0 && delta < horizon) {
                    return Err(Error::invalid(format!(
                        "continuous scheme needs 0 <= delta < T (got delta = {delta})"
                    )));
                }
                if !is_multiple(horizon, h) {
                    return Err(Error::invalid(format!("T = {horizon} is not a multiple of h = {h}")));
                }
                if !is_multiple(delta, h) {
                    return Err(Error::invalid(format!("delta = {delta} is not a multiple of h = {h}")));
                }
            }
        }
        Ok(())
    }

    /// Simulation grid. Both schemes start at `t = 0` so the non-stationary
    /// coupling can use the initial value.
    pub fn grid(&self) -> Vec<f64> {
        match *self {
            SamplingScheme::Discrete { n } => (0..=n).map(|i| i as f64).collect(),
            SamplingScheme::Continuous { horizon, h, .. } => {
                let steps = (horizon / h).round() as usize;
                (0..=steps).map(|i| i as f64 * h).collect()
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, SamplingScheme::Discrete { .. })
    }

    pub fn describe(&self) -> String {
        match *self {
            SamplingScheme::Discrete { n } => format!("discrete(n={n})"),
            SamplingScheme::Continuous { horizon, h, delta } => {
                format!("continuous(T={horizon},h={h},delta={delta})")
            }
        }
    }
}

/// Burn-in used when a continuous scheme leaves `delta` unspecified: none for
/// stationary data, otherwise `0.1 T` rounded to the nearest grid multiple.
pub fn default_burn_in(horizon: f64, h: f64, stationary: bool) -> f64 {
    if stationary {
        0.0
    } else {
        let steps = (0.1 * horizon / h).round().max(1.0);
        (steps * h).min(horizon - h)
    }
}

fn is_multiple(x: f64, h: f64) -> bool {
    let q = x / h;
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

/// Normalizing constant used by the `H = 3/4` continuous-time estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eq34Normalizer {
    /// `(3/4) Gamma(3/4)` as printed in the estimator definition.
    #[default]
    Printed,
    /// `H Gamma(2H) = (3/4) Gamma(3/2)`, which makes `E Y_N = alpha^(-3/2)`.
    Generic,
}

impl Eq34Normalizer {
    pub fn constant(self) -> f64 {
        match self {
            Eq34Normalizer::Printed => 0.75 * gamma(0.75),
            Eq34Normalizer::Generic => 0.75 * gamma(1.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    WeightedDiscrete,
    WeightedContinuous,
    Unweighted,
    TwoTermDrift,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::WeightedDiscrete => "weighted_discrete",
            EstimatorKind::WeightedContinuous => "weighted_continuous",
            EstimatorKind::Unweighted => "unweighted",
            EstimatorKind::TwoTermDrift => "two_term_drift",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub regime: HurstRegime,
    /// Denominator of `Y_N`.
    pub normalizer: f64,
}

impl WeightVector {
    fn new(weights: Vec<f64>, regime: HurstRegime, normalizer: f64) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid(format!("weights must be positive and finite (got {w})")));
        }
        if !(normalizer.is_finite() && normalizer > 0.0) {
            return Err(Error::invalid(format!("weight normalizer must be positive (got {normalizer})")));
        }
        Ok(WeightVector {
            weights,
            regime,
            normalizer,
        })
    }

    /// Hex SHA-256 of the little-endian weight bytes.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.weights {
            hasher.update(w.to_le_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimator: EstimatorKind,
    pub alpha_star: f64,
    /// `Y_N`; for the implicit two-term estimator the implied `alpha*^(-2H)`.
    pub y_stat: f64,
    pub n_coords: usize,
    pub scheme: SamplingScheme,
    pub weights: WeightVector,
}

impl EstimateResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "estimator": self.estimator.name(),
            "alpha_star": self.alpha_star,
            "y_stat": self.y_stat,
            "N": self.n_coords,
            "scheme": self.scheme,
            "regime": self.weights.regime,
            "normalizer": self.weights.normalizer,
            "weights_digest": self.weights.digest(),
        })
    }

    pub const CSV_HEADER: [&'static str; 7] =
        ["estimator", "N", "scheme", "regime", "alpha_star", "y_stat", "weights_digest"];

    pub fn csv_record(&self) -> [String; 7] {
        [
            self.estimator.name().to_string(),
            self.n_coords.to_string(),
            self.scheme.describe(),
            format!("{:?}", self.weights.regime),
            self.alpha_star.to_string(),
            self.y_stat.to_string(),
            self.weights.digest(),
        ]
    }
}

/// `alpha* = y^(-1/(2H))`.
pub fn power_map(y: f64, hurst: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Degenerate(format!(
            "statistic Y_N = {y} is not positive; all-zero observations cannot identify alpha"
        )));
    }
    Ok(y.powf(-1.0 / (2.0 * hurst)))
}

fn check_n(paths: &CoordinatePaths, model: &SpectralModel, n_coords: usize) -> Result<()> {
    model.check_coords(n_coords)?;
    if n_coords > paths.n_coords() {
        return Err(Error::invalid(format!(
            "N = {n_coords} exceeds the {} simulated coordinates",
            paths.n_coords()
        )));
    }
    Ok(())
}

/// `(1/n) sum_{t=1..n} path_k(t)^2` for each of the first `n_coords` rows. The
/// grid may be finer than unit steps as long as it contains every `t = 1..n`.
fn discrete_means(paths: &CoordinatePaths, n_coords: usize, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("discrete observation count n must be >= 1"));
    }
    let grid = paths.grid();
    let mut idx = Vec::with_capacity(n);
    let mut i = 0;
    for t in 1..=n {
        let tf = t as f64;
        let tol = 1e-9 * tf;
        while i < grid.len() && grid[i] < tf - tol {
            i += 1;
        }
        if i == grid.len() || (grid[i] - tf).abs() > tol {
            return Err(Error::invalid(format!(
                "paths do not contain the observation time t = {t} needed for n = {n}"
            )));
        }
        idx.push(i);
    }
    Ok((0..n_coords)
        .map(|k| {
            let row = paths.row(k);
            idx.iter().map(|&i| row[i] * row[i]).sum::<f64>() / n as f64
        })
        .collect())
}

/// Trapezoid approximation of `(1/(T - delta)) int_delta^T path_k(t)^2 dt`.
fn continuous_means(paths: &CoordinatePaths, n_coords: usize, horizon: f64, delta: f64) -> Result<Vec<f64>> {
    let i0 = paths
        .index_of(delta)
        .ok_or_else(|| Error::invalid(format!("grid does not contain the burn-in end delta = {delta}")))?;
    let i1 = paths
        .index_of(horizon)
        .ok_or_else(|| Error::invalid(format!("grid does not contain the horizon T = {horizon}")))?;
    if i1 <= i0 {
        return Err(Error::invalid("fewer than 2 grid points in [delta, T]"));
    }
    let grid = &paths.grid()[i0..=i1];
    let span = grid[grid.len() - 1] - grid[0];
    Ok((0..n_coords)
        .map(|k| {
            let row = &paths.row(k)[i0..=i1];
            let area: f64 = grid
                .windows(2)
                .zip(row.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] * v[0] + v[1] * v[1]))
                .sum();
            area / span
        })
        .collect())
}

fn time_means(paths: &CoordinatePaths, n_coords: usize, scheme: &SamplingScheme) -> Result<Vec<f64>> {
    scheme.validate()?;
    match *scheme {
        SamplingScheme::Discrete { n } => discrete_means(paths, n_coords, n),
        SamplingScheme::Continuous { horizon, delta, .. } => continuous_means(paths, n_coords, horizon, delta),
    }
}

fn weighted_stat(means: &[f64], weights: &WeightVector) -> Result<f64> {
    if weights.weights.len() != means.len() {
        return Err(Error::invalid(format!(
            "weight vector has {} entries for {} coordinates",
            weights.weights.len(),
            means.len()
        )));
    }
    let num: f64 = weights.weights.iter().zip(means).map(|(w, m)| w * m).sum();
    Ok(num / weights.normalizer)
}

/// Weights `theta_k^(2H) / sigma_k^2` with normalizer `N H Gamma(2H)`.
pub fn discrete_weights(model: &SpectralModel, n_coords: usize) -> Result<WeightVector> {
    model.check_coords(n_coords)?;
    let h = model.hurst();
    let w = (0..n_coords)
        .map(|k| model.thetas()[k].powf(2.0 * h) / model.sigmas()[k].powi(2))
        .collect();
    WeightVector::new(w, model.regime(), n_coords as f64 * hurst_constant(h))
}

pub fn y_stat_discrete(paths: &CoordinatePaths, model: &SpectralModel, n_coords: usize, n: usize) -> Result<f64> {
    check_n(paths, model, n_coords)?;
    let means = discrete_means(paths, n_coords, n)?;
    weighted_stat(&means, &discrete_weights(model, n_coords)?)
}

pub fn wmce_discrete(paths: &CoordinatePaths, model: &SpectralModel, n_coords: usize, n: usize) -> Result<EstimateResult> {
    let y = y_stat_discrete(paths, model, n_coords, n)?;
    Ok(EstimateResult {
        estimator: EstimatorKind::WeightedDiscrete,
        alpha_star: power_map(y, model.hurst())?,
        y_stat: y,
        n_coords,
        scheme: SamplingScheme::Discrete { n },
        weights: discrete_weights(model, n_coords)?,
    })
}

/// Regime-dependent weights of the continuous-time estimator.
pub fn continuous_weights(
    model: &SpectralModel,
    n_coords: usize,
    horizon: f64,
    eq34: Eq34Normalizer,
) -> Result<WeightVector> {
    model.check_coords(n_coords)?;
    let h = model.hurst();
    let regime = model.regime();
    let th = &model.thetas()[..n_coords];
    let s2: Vec<f64> = model.sigmas()[..n_coords].iter().map(|s| s * s).collect();
    let (w, denom): (Vec<f64>, f64) = match regime {
        HurstRegime::Sub34 => (
            th.iter().zip(&s2).map(|(t, s)| t.powf(2.0 * h + 1.0) / s).collect(),
            hurst_constant(h) * th.iter().sum::<f64>(),
        ),
        HurstRegime::Eq34 => {
            let logs = log_theta_t(th, horizon)?;
            (
                th.iter().zip(&s2).zip(&logs).map(|((t, s), l)| t.powf(2.5) / (s * l)).collect(),
                eq34.constant() * th.iter().zip(&logs).map(|(t, l)| t / l).sum::<f64>(),
            )
        }
        HurstRegime::Super34 => (
            th.iter().zip(&s2).map(|(t, s)| t.powf(4.0 - 2.0 * h) / s).collect(),
            hurst_constant(h) * th.iter().map(|t| t.powf(4.0 - 4.0 * h)).sum::<f64>(),
        ),
    };
    WeightVector::new(w, regime, denom)
}

/// `ln(theta_k T)` for each coordinate, rejecting non-positive values.
pub(crate) fn log_theta_t(thetas: &[f64], horizon: f64) -> Result<Vec<f64>> {
    thetas
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = t * horizon;
            if p > 1.0 {
                Ok(p.ln())
            } else {
                Err(Error::LogSingularity {
                    coordinate: k + 1,
                    product: p,
                })
            }
        })
        .collect()
}

pub fn y_stat_continuous(
    paths: &CoordinatePaths,
    model: &SpectralModel,
    n_coords: usize,
    scheme: &SamplingScheme,
    weights: &WeightVector,
) -> Result<f64> {
    check_n(paths, model, n_coords)?;
    if scheme.is_discrete() {
        return Err(Error::invalid("y_stat_continuous needs a continuous scheme"));
    }
    let means = time_means(paths, n_coords, scheme)?;
    weighted_stat(&means, weights)
}

pub fn wmce_continuous(
    paths: &CoordinatePaths,
    model: &SpectralModel,
    n_coords: usize,
    scheme: &SamplingScheme,
    eq34: Eq34Normalizer,
) -> Result<EstimateResult> {
    let SamplingScheme::Continuous { horizon, .. } = *scheme else {
        return Err(Error::invalid("continuous estimator needs a continuous scheme"));
    };
    let weights = continuous_weights(model, n_coords, horizon, eq34)?;
    let y = y_stat_continuous(paths, model, n_coords, scheme, &weights)?;
    Ok(EstimateResult {
        estimator: EstimatorKind::WeightedContinuous,
        alpha_star: power_map(y, model.hurst())?,
        y_stat: y,
        n_coords,
        scheme: *scheme,
        weights,
    })
}

/// Variance-minimizing weights `(sigma_k^2 / theta_k^(2H)) / s_k^2` for given
/// time-average variances `s_k^2`.
pub fn optimal_weights(model: &SpectralModel, n_coords: usize, s_squared: &[f64]) -> Result<WeightVector> {
    model.check_coords(n_coords)?;
    if s_squared.len() < n_coords {
        return Err(Error::invalid("need one s_k^2 per coordinate"));
    }
    if let Some(s) = s_squared[..n_coords].iter().find(|s| !(**s > 0.0)) {
        return Err(Error::invalid(format!("s_k^2 must be positive (got {s})")));
    }
    let h = model.hurst();
    let scale: Vec<f64> = (0..n_coords)
        .map(|k| model.sigmas()[k].powi(2) / model.thetas()[k].powf(2.0 * h))
        .collect();
    let w: Vec<f64> = scale.iter().zip(s_squared).map(|(c, s)| c / s).collect();
    let denom = hurst_constant(h) * w.iter().zip(&scale).map(|(w, c)| w * c).sum::<f64>();
    WeightVector::new(w, model.regime(), denom)
}

/// `var Y_N(w) = sum w_k^2 s_k^2 / (H Gamma(2H) sum w_k sigma_k^2 / theta_k^(2H))^2`.
pub fn var_y_general(model: &SpectralModel, weights: &[f64], s_squared: &[f64]) -> Result<f64> {
    let n = weights.len();
    model.check_coords(n)?;
    if s_squared.len() != n {
        return Err(Error::invalid("weights and s_k^2 must have equal length"));
    }
    let h = model.hurst();
    let num: f64 = weights.iter().zip(s_squared).map(|(w, s)| w * w * s).sum();
    let den: f64 = (0..n)
        .map(|k| weights[k] * model.sigmas()[k].powi(2) / model.thetas()[k].powf(2.0 * h))
        .sum::<f64>()
        * hurst_constant(h);
    Ok(num / (den * den))
}

/// `var((1/n) sum_{t=1..n} z_k(t)^2) = (2/n) sum_{|i|<n} (1 - |i|/n) r_k(i)^2`
/// from a canonical table at the dilated lags `alpha theta_k i`.
pub fn s_squared_discrete(model: &SpectralModel, k: usize, n: usize, autocov: &AutocovTable) -> Result<f64> {
    model.check_coords(k + 1)?;
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if autocov.values.len() < n || (autocov.hurst - model.hurst()).abs() > 0.0 {
        return Err(Error::invalid("autocovariance table does not cover lags 0..n-1 for this model"));
    }
    let speed = model.speed(k);
    for i in 0..n {
        let want = speed * i as f64;
        if (autocov.lags[i] - want).abs() > 1e-9 * want.max(1.0) {
            return Err(Error::invalid(format!(
                "autocovariance lag {i} is {} but coordinate {} needs {want}",
                autocov.lags[i],
                k + 1
            )));
        }
    }
    let scale = model.sigmas()[k].powi(2) * speed.powf(-2.0 * model.hurst());
    let nf = n as f64;
    let mut sum = (scale * autocov.values[0]).powi(2);
    for i in 1..n {
        sum += 2.0 * (1.0 - i as f64 / nf) * (scale * autocov.values[i]).powi(2);
    }
    Ok(2.0 / nf * sum)
}

/// `var((1/T) int_0^T z_k(t)^2 dt)` via
/// `sigma^4 (a)^(-4H) (4 / (a T)) int_0^{a T} r(s)^2 (1 - s/(a T)) ds`, `a = alpha theta_k`.
pub fn s_squared_continuous(model: &SpectralModel, k: usize, horizon: f64, tol: f64) -> Result<f64> {
    model.check_coords(k + 1)?;
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon T must be positive"));
    }
    let h = model.hurst();
    let speed = model.speed(k);
    let len = speed * horizon;
    let mut breaks = vec![0.0];
    let mut b = 1.0f64.min(len);
    while b < len {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(len);
    let f = |s: f64| {
        let r = canonical_autocov(h, s, tol * 1e-2).unwrap_or(f64::NAN);
        r * r * (1.0 - s / len)
    };
    let (integral, _) = integrate_breaks(f, &breaks, tol * len / 4.0)?;
    Ok(model.sigmas()[k].powi(4) * speed.powf(-4.0 * h) * 4.0 / len * integral)
}

/// Unweighted minimum-contrast estimator restricted to `N` coordinates:
/// `Y = sum_k m_k / (H Gamma(2H) sum_k sigma_k^2 / theta_k^(2H))`.
pub fn unweighted_mce(
    paths: &CoordinatePaths,
    model: &SpectralModel,
    n_coords: usize,
    scheme: &SamplingScheme,
) -> Result<EstimateResult> {
    check_n(paths, model, n_coords)?;
    let h = model.hurst();
    let denom = hurst_constant(h)
        * (0..n_coords)
            .map(|k| model.sigmas()[k].powi(2) / model.thetas()[k].powf(2.0 * h))
            .sum::<f64>();
    let weights = WeightVector::new(vec![1.0; n_coords], model.regime(), denom)?;
    let means = time_means(paths, n_coords, scheme)?;
    let y = weighted_stat(&means, &weights)?;
    Ok(EstimateResult {
        estimator: EstimatorKind::Unweighted,
        alpha_star: power_map(y, h)?,
        y_stat: y,
        n_coords,
        scheme: *scheme,
        weights,
    })
}

/// Relative bisection tolerance of the implicit two-term estimator.
pub const TWO_TERM_REL_TOL: f64 = 1e-10;
/// Maximum number of bracket doublings.
pub const TWO_TERM_MAX_EXPANSIONS: usize = 60;

/// Implicit estimator for drift `alpha A_0 + A_1`: the root in `a` of
/// `sum_k ((a theta_k + nu_k)^(2H) / sigma_k^2) m_k / (N H Gamma(2H)) = 1`.
/// Experimental.
pub fn wmce_two_term_drift(
    paths: &CoordinatePaths,
    model: &SpectralModel,
    n_coords: usize,
    n: usize,
    bracket: (f64, f64),
) -> Result<EstimateResult> {
    let nus = model
        .nus()
        .ok_or_else(|| Error::invalid("two-term drift estimator needs the nu_k sequence"))?;
    wmce_two_term_drift_with(paths, model, nus, n_coords, n, bracket)
}

/// As [`wmce_two_term_drift`] with an explicit `nu_k >= 0` sequence, which
/// allows the degenerate `nu_k = 0` case.
pub fn wmce_two_term_drift_with(
    paths: &CoordinatePaths,
    model: &SpectralModel,
    nus: &[f64],
    n_coords: usize,
    n: usize,
    bracket: (f64, f64),
) -> Result<EstimateResult> {
    check_n(paths, model, n_coords)?;
    if nus.len() < n_coords || nus[..n_coords].iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("nu_k must be given and nonnegative for every coordinate"));
    }
    let (lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(format!("bracket must satisfy 0 <= lo < hi (got ({lo}, {hi}))")));
    }
    let means = discrete_means(paths, n_coords, n)?;
    if means.iter().all(|m| *m == 0.0) {
        return Err(Error::Degenerate("all observations are zero".into()));
    }
    let h = model.hurst();
    let target = n_coords as f64 * hurst_constant(h);
    let lhs = |a: f64| -> f64 {
        (0..n_coords)
            .map(|k| (a * model.thetas()[k] + nus[k]).powf(2.0 * h) / model.sigmas()[k].powi(2) * means[k])
            .sum::<f64>()
            / target
    };
    if lhs(lo) >= 1.0 {
        return Err(Error::Bracket(format!(
            "moment equation is already >= 1 at the lower end {lo}; no root above it"
        )));
    }
    let mut expansions = 0;
    while lhs(hi) < 1.0 {
        if expansions == TWO_TERM_MAX_EXPANSIONS {
            return Err(Error::Bracket(format!(
                "upper end still below the target after {TWO_TERM_MAX_EXPANSIONS} doublings (hi = {hi})"
            )));
        }
        hi *= 2.0;
        expansions += 1;
    }
    let mut lo = lo;
    while hi - lo > TWO_TERM_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha_star = 0.5 * (lo + hi);
    let weights = WeightVector::new(
        (0..n_coords)
            .map(|k| (alpha_star * model.thetas()[k] + nus[k]).powf(2.0 * h) / model.sigmas()[k].powi(2))
            .collect(),
        model.regime(),
        target,
    )?;
    Ok(EstimateResult {
        estimator: EstimatorKind::TwoTermDrift,
        alpha_star,
        y_stat: alpha_star.powf(-2.0 * h),
        n_coords,
        scheme: SamplingScheme::Discrete { n },
        weights,
    })
}

/// Dispatches one estimator on a path sample.
pub fn estimate(
    kind: EstimatorKind,
    paths: &CoordinatePaths,
    model: &SpectralModel,
    n_coords: usize,
    scheme: &SamplingScheme,
    eq34: Eq34Normalizer,
) -> Result<EstimateResult> {
    match (kind, *scheme) {
        (EstimatorKind::WeightedDiscrete, SamplingScheme::Discrete { n }) => wmce_discrete(paths, model, n_coords, n),
        (EstimatorKind::WeightedContinuous, SamplingScheme::Continuous { .. }) => {
            wmce_continuous(paths, model, n_coords, scheme, eq34)
        }
        (EstimatorKind::Unweighted, _) => unweighted_mce(paths, model, n_coords, scheme),
        (EstimatorKind::TwoTermDrift, SamplingScheme::Discrete { n }) => {
            wmce_two_term_drift(paths, model, n_coords, n, (0.0, 1.0))
        }
        (k, s) => Err(Error::invalid(format!(
            "estimator {} is not defined for scheme {}",
            k.name(),
            s.describe()
        ))),
    }
}
