//! Summary statistics used by the Monte Carlo harness: log-log rate
//! regression, a one-sample Kolmogorov-Smirnov test against N(0,1), and sample
//! moments.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Ordinary least squares `y = slope * x + intercept`; returns `(slope, intercept, r2)`.
pub(crate) fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// OLS on `(ln x, ln y)`.
pub fn rate_regression(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "rate regression needs at least 3 points (got {})",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::invalid(format!(
            "rate regression needs positive finite points (got ({}, {}))",
            p.0, p.1
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    if logs.iter().all(|p| p.0 == logs[0].0) {
        return Err(Error::invalid("rate regression needs at least two distinct x values"));
    }
    let (slope, intercept, r2) = ols(&logs);
    Ok(RateFit { slope, intercept, r2 })
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    const EPS: f64 = 1e-10;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small lambda
        let mut sum = 0.0;
        let c = PI * PI / (8.0 * lambda * lambda);
        for j in 1.. {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * c).exp();
            sum += term;
            if term < EPS {
                break;
            }
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if term < EPS {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub pvalue: f64,
}

/// One-sample Kolmogorov-Smirnov test of `sample` against N(0,1) with the
/// asymptotic p-value `P(K > sqrt(m) D)`.
pub fn ks_statistic(sample: &[f64]) -> Result<KsResult> {
    let m = sample.len();
    if m < 20 {
        return Err(Error::invalid(format!("KS test needs at least 20 observations (got {m})")));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS sample contains NaN"));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let mf = m as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            let lo = f - i as f64 / mf;
            let hi = (i + 1) as f64 / mf - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        pvalue: kolmogorov_sf(mf.sqrt() * statistic),
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor `m - 1`).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample excess kurtosis `m4 / m2^2 - 3` with central moments.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in xs {
        let d = (x - mu) * (x - mu);
        m2 += d;
        m4 += d * d;
    }
    let n = xs.len() as f64;
    (m4 / n) / (m2 / n).powi(2) - 3.0
}

/// Minimum sample size per N for the kurtosis diagnostic.
pub const KURTOSIS_MIN_SAMPLES: usize = 500;

/// Excess kurtosis of each sample of `Y_N` (one sample per N). Standardizing by
/// the mean and standard deviation does not change the value.
pub fn empirical_kurtosis_diag(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| {
            if s.len() < KURTOSIS_MIN_SAMPLES {
                Err(Error::invalid(format!(
                    "kurtosis diagnostic needs at least {KURTOSIS_MIN_SAMPLES} samples per N (got {})",
                    s.len()
                )))
            } else {
                Ok(excess_kurtosis(s))
            }
        })
        .collect()
}
