//! Closed-form predictions for the estimators: limiting variances, rate
//! orders, the fourth-cumulant bound `zeta(N)` and reference rates of
//! competing estimators.
//!
//! Formulas that only hold up to a constant (`≍`) are emitted with constant 1
//! and `order_only = true`; compare their slopes, not their levels.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{log_theta_t, EstimateResult};
use crate::model::{HurstRegime, SpectralModel, REGIME_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    DiscreteVarYn,
    DiscreteAlphaVar,
    ContinuousVarRate,
    ZetaBound,
    MleRate,
    /// Spread `b_N` of the trajectory-fitting estimator.
    TfeRate,
    /// Bias `a_N` of the trajectory-fitting estimator.
    TfeBias,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::DiscreteVarYn => "discrete_var_yn",
            RateKind::DiscreteAlphaVar => "discrete_alpha_var",
            RateKind::ContinuousVarRate => "continuous_var_rate",
            RateKind::ZetaBound => "zeta_bound",
            RateKind::MleRate => "mle_rate",
            RateKind::TfeRate => "tfe_rate",
            RateKind::TfeBias => "tfe_bias",
        }
    }

    pub fn order_only(self) -> bool {
        !matches!(self, RateKind::DiscreteVarYn | RateKind::DiscreteAlphaVar)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub kind: RateKind,
    pub n_grid: Vec<usize>,
    pub values: Vec<f64>,
    pub meta: BTreeMap<String, f64>,
    pub order_only: bool,
}

impl RatePrediction {
    fn build(kind: RateKind, n_grid: &[usize], values: Vec<f64>, meta: BTreeMap<String, f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Degenerate(format!("{} produced a non-positive value {v}", kind.name())));
        }
        Ok(RatePrediction {
            kind,
            n_grid: n_grid.to_vec(),
            values,
            meta,
            order_only: kind.order_only(),
        })
    }

    pub const CSV_HEADER: [&'static str; 4] = ["N", "value", "kind", "order_only"];

    /// Writes `N,value,kind,order_only` rows; pass `header = false` to append
    /// to a file that already has one.
    pub fn write_csv<W: Write>(&self, writer: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        if header {
            w.write_record(Self::CSV_HEADER)?;
        }
        for (n, v) in self.n_grid.iter().zip(&self.values) {
            w.write_record([
                n.to_string(),
                format!("{v:?}"),
                self.kind.name().to_string(),
                self.order_only.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(model: &SpectralModel, n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::invalid("N grid must not be empty"));
    }
    for &n in n_grid {
        model.check_coords(n)?;
    }
    Ok(())
}

fn meta(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Limiting `var(Y_N) = (2/n) alpha^(-4H) / N` of the discrete estimator.
/// Exact in the limit `theta_k -> infinity`, where unit lags decorrelate.
pub fn predicted_var_yn_discrete(model: &SpectralModel, n: usize, n_coords: usize) -> f64 {
    2.0 / n as f64 * model.alpha().powf(-4.0 * model.hurst()) / n_coords as f64
}

/// Limiting `var(alpha*_N) = alpha^2 / (2 n H^2) / N`.
pub fn predicted_alpha_var_discrete(model: &SpectralModel, n: usize, n_coords: usize) -> f64 {
    let h = model.hurst();
    model.alpha().powi(2) / (2.0 * n as f64 * h * h) / n_coords as f64
}

/// Order of `var(Y_N)` for the continuous-time estimator: the reciprocal of
/// `sum theta_k`, `sum theta_k / ln(theta_k T)` or `sum theta_k^(4-4H)`.
pub fn continuous_var_rate(model: &SpectralModel, horizon: f64, n_coords: usize) -> Result<f64> {
    model.check_coords(n_coords)?;
    let th = &model.thetas()[..n_coords];
    let sum = match model.regime() {
        HurstRegime::Sub34 => th.iter().sum::<f64>(),
        HurstRegime::Eq34 => {
            let logs = log_theta_t(th, horizon)?;
            th.iter().zip(&logs).map(|(t, l)| t / l).sum()
        }
        HurstRegime::Super34 => {
            let e = 4.0 - 4.0 * model.hurst();
            th.iter().map(|t| t.powf(e)).sum()
        }
    };
    Ok(1.0 / sum)
}

/// Sub-case of the fourth-cumulant bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaCase {
    Below58,
    At58,
    Between,
    At34,
    Above34,
}

impl ZetaCase {
    pub fn of(hurst: f64) -> Self {
        if (hurst - 0.625).abs() <= REGIME_TOL {
            ZetaCase::At58
        } else if (hurst - 0.75).abs() <= REGIME_TOL {
            ZetaCase::At34
        } else if hurst < 0.625 {
            ZetaCase::Below58
        } else if hurst < 0.75 {
            ZetaCase::Between
        } else {
            ZetaCase::Above34
        }
    }
}

/// `zeta(N)` of the fourth-cumulant bound `kappa_4 <= C zeta(N)` for the
/// continuous-time estimator with the regime weights.
pub fn zeta_bound(model: &SpectralModel, horizon: f64, n_coords: usize) -> Result<f64> {
    model.check_coords(n_coords)?;
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon T must be positive"));
    }
    let h = model.hurst();
    let a = model.alpha();
    let t = horizon;
    let th = &model.thetas()[..n_coords];
    let sum_th: f64 = th.iter().sum();
    let value = match ZetaCase::of(h) {
        ZetaCase::Below58 => 1.0 / (t.powi(3) * a.powf(8.0 * h + 3.0) * sum_th),
        ZetaCase::At58 => {
            let mut num = 0.0;
            for (k, &x) in th.iter().enumerate() {
                let p = a * x * t;
                if !(p > 1.0) {
                    return Err(Error::LogSingularity {
                        coordinate: k + 1,
                        product: p,
                    });
                }
                num += x * p.ln().powi(3);
            }
            num / (t.powi(3) * a.powf(8.0 * h + 3.0) * sum_th * sum_th)
        }
        ZetaCase::Between => {
            let num: f64 = th.iter().map(|x| x.powf(8.0 * h - 4.0)).sum();
            num / (t.powf(8.0 - 8.0 * h) * a.powi(8) * sum_th * sum_th)
        }
        ZetaCase::At34 => {
            let logs = log_theta_t(th, t)?;
            let num: f64 = th.iter().zip(&logs).map(|(x, l)| x * x / l.powi(4)).sum();
            let den: f64 = th.iter().zip(&logs).map(|(x, l)| x / l).sum();
            num / (t * t * a.powi(8) * den * den)
        }
        ZetaCase::Above34 => {
            let num: f64 = th.iter().map(|x| x.powf(8.0 - 8.0 * h)).sum();
            let den: f64 = th.iter().map(|x| x.powf(4.0 - 4.0 * h)).sum();
            num / (t.powf(8.0 - 8.0 * h) * a.powi(8) * den * den)
        }
    };
    Ok(value)
}

/// `(alpha* - alpha) / ((alpha^(1+2H) / (2H)) sqrt(var_yn))` with the true
/// `alpha` of the model.
pub fn standardize(alpha_star: f64, model: &SpectralModel, var_yn: f64) -> f64 {
    let a = model.alpha();
    let h = model.hurst();
    (alpha_star - a) / (a.powf(1.0 + 2.0 * h) / (2.0 * h) * var_yn.sqrt())
}

pub fn standardize_estimate(est: &EstimateResult, model: &SpectralModel, var_yn: f64) -> f64 {
    standardize(est.alpha_star, model, var_yn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceEstimator {
    Mle,
    Tfe,
}

/// Order-only convergence curves of competing estimators. The MLE yields one
/// curve, `1/sqrt(sum theta_k)`. The trajectory-fitting estimator yields two:
/// the spread `b_N = N^(-(1+2/d)/2)` and the bias `a_N = N^(-2/d)`.
pub fn reference_rates(model: &SpectralModel, n_grid: &[usize], which: ReferenceEstimator) -> Result<Vec<RatePrediction>> {
    check_grid(model, n_grid)?;
    match which {
        ReferenceEstimator::Mle => {
            let values = n_grid
                .iter()
                .map(|&n| 1.0 / model.thetas()[..n].iter().sum::<f64>().sqrt())
                .collect();
            Ok(vec![RatePrediction::build(
                RateKind::MleRate,
                n_grid,
                values,
                meta(&[("hurst", model.hurst())]),
            )?])
        }
        ReferenceEstimator::Tfe => {
            let d = model.dimension_hint().ok_or_else(|| {
                Error::invalid("trajectory-fitting reference rates need the spatial dimension (dimension_hint)")
            })? as f64;
            let b = n_grid.iter().map(|&n| (n as f64).powf(-(1.0 + 2.0 / d) / 2.0)).collect();
            let a = n_grid.iter().map(|&n| (n as f64).powf(-2.0 / d)).collect();
            Ok(vec![
                RatePrediction::build(RateKind::TfeRate, n_grid, b, meta(&[("d", d)]))?,
                RatePrediction::build(RateKind::TfeBias, n_grid, a, meta(&[("d", d)]))?,
            ])
        }
    }
}

/// All discrete-time predictions over an N grid.
pub fn discrete_predictions(model: &SpectralModel, n: usize, n_grid: &[usize]) -> Result<Vec<RatePrediction>> {
    check_grid(model, n_grid)?;
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let m = meta(&[("alpha", model.alpha()), ("hurst", model.hurst()), ("n", n as f64)]);
    Ok(vec![
        RatePrediction::build(
            RateKind::DiscreteVarYn,
            n_grid,
            n_grid.iter().map(|&k| predicted_var_yn_discrete(model, n, k)).collect(),
            m.clone(),
        )?,
        RatePrediction::build(
            RateKind::DiscreteAlphaVar,
            n_grid,
            n_grid.iter().map(|&k| predicted_alpha_var_discrete(model, n, k)).collect(),
            m,
        )?,
    ])
}

/// Continuous-time variance order and `zeta(N)` over an N grid.
pub fn continuous_predictions(model: &SpectralModel, horizon: f64, n_grid: &[usize]) -> Result<Vec<RatePrediction>> {
    check_grid(model, n_grid)?;
    let m = meta(&[("alpha", model.alpha()), ("hurst", model.hurst()), ("T", horizon)]);
    let var = n_grid
        .iter()
        .map(|&k| continuous_var_rate(model, horizon, k))
        .collect::<Result<Vec<_>>>()?;
    let zeta = n_grid
        .iter()
        .map(|&k| zeta_bound(model, horizon, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        RatePrediction::build(RateKind::ContinuousVarRate, n_grid, var, m.clone())?,
        RatePrediction::build(RateKind::ZetaBound, n_grid, zeta, m)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(alpha: f64, h: f64, n: usize) -> SpectralModel {
        SpectralModel::new(alpha, h, (1..=n).map(|k| (k * k) as f64).collect(), vec![1.0; n]).unwrap()
    }

    #[test]
    fn discrete_variance_examples() {
        let m = sq(1.0, 0.5, 1);
        assert_eq!(predicted_var_yn_discrete(&m, 4, 1), 0.5);
        assert_eq!(predicted_var_yn_discrete(&m, 4, 100), 0.005);
        let m = sq(2.0, 0.5, 1);
        assert_eq!(predicted_var_yn_discrete(&m, 2, 1), 0.25);
        assert!((predicted_alpha_var_discrete(&m, 10, 1) - 0.8).abs() < 1e-15);
        let m = sq(1.0, 0.5f64.sqrt(), 1);
        assert!((predicted_alpha_var_discrete(&m, 1, 1) - 1.0).abs() < 1e-15);
        let m = sq(1.0, 0.5, 1);
        assert!((predicted_alpha_var_discrete(&m, 10, 400) - 5e-4).abs() < 1e-18);
    }

    #[test]
    fn continuous_rate_examples() {
        assert!((continuous_var_rate(&sq(1.0, 0.5, 3), 1.0, 3).unwrap() - 1.0 / 14.0).abs() < 1e-15);
        let r = continuous_var_rate(&sq(1.0, 0.8, 2), 1.0, 2).unwrap();
        assert!((r - 1.0 / (1.0 + 2f64.powf(1.6))).abs() < 1e-15);
        assert!((r - 0.24805).abs() < 1e-5);
        let th = 7.0;
        let m = SpectralModel::new(1.0, 0.75, vec![th], vec![1.0]).unwrap();
        let r = continuous_var_rate(&m, std::f64::consts::E / th, 1).unwrap();
        assert!((r - 1.0 / th).abs() < 1e-15);
        assert!(continuous_var_rate(&m, 0.1, 1).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert!((zeta_bound(&sq(1.0, 0.5, 3), 1.0, 3).unwrap() - 1.0 / 14.0).abs() < 1e-15);
        let z = zeta_bound(&sq(1.0, 0.7, 2), 1.0, 2).unwrap();
        assert!((z - (1.0 + 2f64.powf(3.2)) / 25.0).abs() < 1e-15);
        assert!((z - 0.407_584).abs() < 1e-6);
        assert_eq!(ZetaCase::of(0.625 + 1e-13), ZetaCase::At58);
        assert_eq!(ZetaCase::of(0.75 - 1e-13), ZetaCase::At34);
        assert_eq!(ZetaCase::of(0.7), ZetaCase::Between);
    }

    #[test]
    fn zeta_does_not_vanish_for_exponential_eigenvalues() {
        let n = 20;
        let m = SpectralModel::new(1.0, 0.9, (1..=n).map(|k| (k as f64).exp()).collect(), vec![1.0; n]).unwrap();
        let z: Vec<f64> = (1..=n).map(|k| zeta_bound(&m, 1.0, k).unwrap()).collect();
        // geometric sums: the ratio settles at (1 - e^-0.4)^2 / (1 - e^-0.8)
        let limit = (1.0 - (-0.4f64).exp()).powi(2) / (1.0 - (-0.8f64).exp());
        assert!((z[n - 1] - limit).abs() < 1e-3 * limit);
        assert!(z[n - 1] > 0.5 * z[4]);
    }

    #[test]
    fn zeta_log_cases_need_positive_logs() {
        let m = sq(1.0, 0.625, 3);
        assert!(zeta_bound(&m, 0.5, 3).is_err());
        assert!(zeta_bound(&m, 2.0, 3).is_ok());
        let m = sq(1.0, 0.75, 3);
        assert!(zeta_bound(&m, 1.0, 3).is_err());
    }

    #[test]
    fn standardize_examples() {
        let m = sq(1.0, 0.5, 1);
        assert_eq!(standardize(1.0, &m, 0.04), 0.0);
        assert!((standardize(1.2, &m, 0.04) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_rate_examples() {
        let m = sq(1.0, 0.5, 3);
        let r = reference_rates(&m, &[3], ReferenceEstimator::Mle).unwrap();
        assert!((r[0].values[0] - 0.267_261).abs() < 1e-6);
        assert!(reference_rates(&m, &[3], ReferenceEstimator::Tfe).is_err());

        let m = SpectralModel::heat(1.0, 0.5, 2, 100).unwrap();
        let r = reference_rates(&m, &[100], ReferenceEstimator::Tfe).unwrap();
        assert!((r[0].values[0] - 0.01).abs() < 1e-15);
        assert!((r[1].values[0] - 0.01).abs() < 1e-15);
        let m = SpectralModel::heat(1.0, 0.5, 4, 16).unwrap();
        let r = reference_rates(&m, &[16], ReferenceEstimator::Tfe).unwrap();
        assert!((r[1].values[0] / r[0].values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let m = sq(1.0, 0.5, 4);
        let preds = discrete_predictions(&m, 4, &[1, 2, 4]).unwrap();
        let mut buf = Vec::new();
        preds[0].write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "N,value,kind,order_only\n1,0.5,discrete_var_yn,false\n2,0.25,discrete_var_yn,false\n4,0.125,discrete_var_yn,false\n");
    }
}
