//! Model family in spectral coordinates.
//!
//! A diagonalizable linear evolution equation with additive fractional noise is
//! described entirely by its drift parameter `alpha`, the Hurst index, and the
//! eigenvalue sequences `theta_k` (drift operator) and `sigma_k` (noise
//! operator). Each coordinate is then an independent fractional
//! Ornstein-Uhlenbeck process with speed `alpha * theta_k` and scale `sigma_k`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::stats::ols;

/// Tolerance used for every Hurst-index regime boundary (5/8 and 3/4).
pub const REGIME_TOL: f64 = 1e-12;

/// `H * Gamma(2H)`, the stationary variance of the canonical fOU process.
pub fn hurst_constant(hurst: f64) -> f64 {
    hurst * gamma(2.0 * hurst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    alpha: f64,
    hurst: f64,
    thetas: Vec<f64>,
    sigmas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension_hint: Option<u32>,
}

impl SpectralModel {
    pub fn new(alpha: f64, hurst: f64, thetas: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        let model = SpectralModel {
            alpha,
            hurst,
            thetas,
            sigmas,
            nus: None,
            dimension_hint: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Heat-equation model on a `d`-dimensional domain: `theta_k = k^(2/d)`, `sigma_k = 1`.
    pub fn heat(alpha: f64, hurst: f64, d: u32, count: usize) -> Result<Self> {
        let thetas = heat_eigenvalues(d, count)?;
        let sigmas = vec![1.0; count];
        Ok(SpectralModel::new(alpha, hurst, thetas, sigmas)?.with_dimension_hint(d))
    }

    pub fn with_nus(mut self, nus: Vec<f64>) -> Result<Self> {
        self.nus = Some(nus);
        self.validate()?;
        Ok(self)
    }

    pub fn with_dimension_hint(mut self, d: u32) -> Self {
        self.dimension_hint = Some(d);
        self
    }

    /// Same model with a different drift parameter.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut m = self.clone();
        m.alpha = alpha;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive (got {})", self.alpha)));
        }
        check_hurst(self.hurst)?;
        if self.thetas.is_empty() {
            return Err(Error::invalid("thetas must contain at least one value"));
        }
        if self.thetas.len() != self.sigmas.len() {
            return Err(Error::invalid(format!(
                "thetas and sigmas must have equal length ({} vs {})",
                self.thetas.len(),
                self.sigmas.len()
            )));
        }
        positive_seq("thetas", &self.thetas)?;
        positive_seq("sigmas", &self.sigmas)?;
        if let Some(nus) = &self.nus {
            if nus.len() != self.thetas.len() {
                return Err(Error::invalid(format!(
                    "nus must have the same length as thetas ({} vs {})",
                    nus.len(),
                    self.thetas.len()
                )));
            }
            positive_seq("nus", nus)?;
        }
        if self.dimension_hint == Some(0) {
            return Err(Error::invalid("dimension_hint must be a positive integer"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn hurst(&self) -> f64 {
        self.hurst
    }
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
    pub fn nus(&self) -> Option<&[f64]> {
        self.nus.as_deref()
    }
    pub fn dimension_hint(&self) -> Option<u32> {
        self.dimension_hint
    }

    /// Number of coordinates the model describes.
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn regime(&self) -> HurstRegime {
        HurstRegime::of(self.hurst)
    }

    /// Speed `alpha * theta_k` of coordinate `k` (zero-based).
    pub fn speed(&self, k: usize) -> f64 {
        self.alpha * self.thetas[k]
    }

    /// `r_k(0) = sigma_k^2 (alpha theta_k)^(-2H) H Gamma(2H)`.
    pub fn stationary_variance(&self, k: usize) -> f64 {
        let s = self.sigmas[k];
        s * s * self.speed(k).powf(-2.0 * self.hurst) * hurst_constant(self.hurst)
    }

    pub(crate) fn check_coords(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len() {
            return Err(Error::invalid(format!(
                "requested {n} coordinates but the model has {}",
                self.len()
            )));
        }
        Ok(())
    }
}

fn positive_seq(name: &str, xs: &[f64]) -> Result<()> {
    if let Some((i, x)) = xs.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::invalid(format!("{name}[{i}] must be positive (got {x})")));
    }
    Ok(())
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid(format!("hurst must lie in open interval (0,1) (got {h})")));
    }
    Ok(())
}

/// Initial condition `x_k(0)` of the coordinate processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// `x_k(0)` drawn from the invariant law, i.e. the stationary solution.
    Stationary,
    Deterministic(Vec<f64>),
    /// Independent `N(mean, std^2)` draws, the same law for every coordinate.
    GaussianIid { mean: f64, std: f64 },
}

impl InitialCondition {
    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        match self {
            InitialCondition::Stationary => Ok(()),
            InitialCondition::Deterministic(values) => {
                if values.len() != model.len() {
                    return Err(Error::invalid(format!(
                        "deterministic initial condition has {} values but the model has {} coordinates",
                        values.len(),
                        model.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("deterministic initial values must be finite"));
                }
                Ok(())
            }
            InitialCondition::GaussianIid { mean, std } => {
                if !mean.is_finite() || !(std.is_finite() && *std >= 0.0) {
                    return Err(Error::invalid(format!(
                        "gaussian initial condition needs finite mean and std >= 0 (got {mean}, {std})"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, InitialCondition::Stationary)
    }

    /// `(E x_k(0)^2, E x_k(0)^4)` for coordinate `k`.
    pub fn moments(&self, model: &SpectralModel, k: usize) -> (f64, f64) {
        match self {
            InitialCondition::Stationary => {
                let v = model.stationary_variance(k);
                (v, 3.0 * v * v)
            }
            InitialCondition::Deterministic(values) => {
                let x2 = values[k] * values[k];
                (x2, x2 * x2)
            }
            InitialCondition::GaussianIid { mean, std } => {
                let (m2, s2) = (mean * mean, std * std);
                (m2 + s2, m2 * m2 + 6.0 * m2 * s2 + 3.0 * s2 * s2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HurstRegime {
    /// H < 3/4
    Sub34,
    /// H = 3/4
    Eq34,
    /// H > 3/4
    Super34,
}

impl HurstRegime {
    /// Classifies an already validated Hurst index.
    pub fn of(h: f64) -> Self {
        if (h - 0.75).abs() <= REGIME_TOL {
            HurstRegime::Eq34
        } else if h < 0.75 {
            HurstRegime::Sub34
        } else {
            HurstRegime::Super34
        }
    }
}

pub fn hurst_regime(h: f64) -> Result<HurstRegime> {
    check_hurst(h)?;
    Ok(HurstRegime::of(h))
}

/// `theta_k = k^(2/d)` for `k = 1..=count`.
pub fn heat_eigenvalues(d: u32, count: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::invalid("heat eigenvalues need dimension d >= 1"));
    }
    if count == 0 {
        return Err(Error::invalid("heat eigenvalues need count >= 1"));
    }
    let p = 2.0 / d as f64;
    Ok((1..=count).map(|k| (k as f64).powf(p)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityMargin {
    pub partial_sum: f64,
    /// Log-log slope of the summands over the last half of the terms. `None`
    /// when fewer than two summands are available.
    pub tail_decay_exponent: Option<f64>,
}

impl StationarityMargin {
    /// Heuristic convergence flag: the summands decay faster than `1/k`.
    pub fn heuristically_convergent(&self) -> bool {
        self.tail_decay_exponent.is_some_and(|s| s < -1.0)
    }
}

/// Partial sum of `sigma_k^2 (1+theta_k)^(-gamma) (1 + 1/theta_k)^(2H)`.
pub fn stationarity_margin(model: &SpectralModel, gamma_exp: f64, terms: usize) -> Result<StationarityMargin> {
    model.check_coords(terms)?;
    let h = model.hurst();
    let summands: Vec<f64> = (0..terms)
        .map(|k| {
            let th = model.thetas()[k];
            let s = model.sigmas()[k];
            s * s * (1.0 + th).powf(-gamma_exp) * (1.0 + 1.0 / th).powf(2.0 * h)
        })
        .collect();
    let partial_sum = summands.iter().sum();
    let start = terms - terms / 2;
    let tail: Vec<(f64, f64)> = (start..terms)
        .map(|i| (((i + 1) as f64).ln(), summands[i].ln()))
        .collect();
    let tail_decay_exponent = if tail.len() >= 2 { Some(ols(&tail).0) } else { None };
    Ok(StationarityMargin {
        partial_sum,
        tail_decay_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservationMode {
    DiscreteD,
    ContinuousC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Asymptote {
    Diverges,
    Vanishes,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionDiagnostic {
    pub name: &'static str,
    pub expected: Asymptote,
    pub values: Vec<f64>,
    pub max: f64,
    pub trend: Trend,
    /// Log-log slope of the sequence over its last half, when defined.
    pub tail_slope: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub mode: ObservationMode,
    pub conditions: Vec<ConditionDiagnostic>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionDiagnostic> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// Finite-truncation diagnostics for the non-stationary consistency conditions.
///
/// These are heuristics on the observed `k = 1..len`: a sequence "diverges" when
/// its tail grows on a log-log scale, "vanishes" when it is identically zero at
/// the end or its tail decays, and is "bounded" when its tail does not grow.
pub fn check_nonstationary_conditions(
    model: &SpectralModel,
    init: &InitialCondition,
    mode: ObservationMode,
) -> Result<ConditionReport> {
    init.validate(model)?;
    let alpha = model.alpha();
    let h = model.hurst();
    let len = model.len();
    let moments: Vec<(f64, f64)> = (0..len).map(|k| init.moments(model, k)).collect();

    let mut conditions = Vec::new();
    match mode {
        ObservationMode::DiscreteD => {
            conditions.push(diagnose("D1", Asymptote::Diverges, model.thetas().to_vec()));
            let d2 = (0..len)
                .map(|k| {
                    let th = model.thetas()[k];
                    let s2 = model.sigmas()[k].powi(2);
                    (-2.0 * alpha * th).exp() * th.powf(2.0 * h) * moments[k].0 / s2
                })
                .collect();
            conditions.push(diagnose("D2", Asymptote::Vanishes, d2));
            let d3 = (0..len)
                .map(|k| {
                    let th = model.thetas()[k];
                    let s4 = model.sigmas()[k].powi(4);
                    (-4.0 * alpha * th).exp() * th.powf(4.0 * h) * moments[k].1 / s4
                })
                .collect();
            conditions.push(diagnose("D3", Asymptote::Bounded, d3));
        }
        ObservationMode::ContinuousC => {
            // ln(1) = 0, so the ratio starts at k = 2.
            let c1 = (1..len)
                .map(|k| model.thetas()[k] / ((k + 1) as f64).ln())
                .collect();
            conditions.push(diagnose("C1", Asymptote::Diverges, c1));
            let c2 = (0..len).map(|k| moments[k].0 / model.sigmas()[k].powi(2)).collect();
            conditions.push(diagnose("C2", Asymptote::Bounded, c2));
            let c2p = (0..len).map(|k| moments[k].1 / model.sigmas()[k].powi(4)).collect();
            conditions.push(diagnose("C2'", Asymptote::Bounded, c2p));
        }
    }
    Ok(ConditionReport { mode, conditions })
}

const SLOPE_TOL: f64 = 1e-3;

fn diagnose(name: &'static str, expected: Asymptote, values: Vec<f64>) -> ConditionDiagnostic {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trend = trend_of(&values);
    let start = values.len() - values.len() / 2;
    let tail = &values[start..];
    let tail_slope = if tail.len() >= 2 && tail.iter().all(|v| *v > 0.0 && v.is_finite()) {
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .enumerate()
            .map(|(i, v)| (((start + i + 1) as f64).ln(), v.ln()))
            .collect();
        Some(ols(&pts).0)
    } else {
        None
    };
    let finite = values.iter().all(|v| v.is_finite());
    let last = values.last().copied().unwrap_or(0.0);
    let holds = finite
        && match expected {
            Asymptote::Diverges => tail_slope.is_some_and(|s| s > SLOPE_TOL),
            Asymptote::Vanishes => last == 0.0 || tail_slope.is_some_and(|s| s < -SLOPE_TOL),
            Asymptote::Bounded => tail.iter().all(|v| *v == 0.0) || tail_slope.is_some_and(|s| s <= SLOPE_TOL),
        };
    ConditionDiagnostic {
        name,
        expected,
        values,
        max,
        trend,
        tail_slope,
        holds,
    }
}

fn trend_of(values: &[f64]) -> Trend {
    let (mut up, mut down) = (false, false);
    for w in values.windows(2) {
        if w[1] > w[0] {
            up = true;
        } else if w[1] < w[0] {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (true, true) => Trend::Mixed,
    }
}
