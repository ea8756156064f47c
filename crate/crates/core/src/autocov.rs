//! Autocovariance of the canonical fractional Ornstein-Uhlenbeck process and
//! of the spectral coordinates.
//!
//! The canonical process solves `dz = -z dt + d beta^H` and has spectral density
//! proportional to `|l|^(1-2H) / (1 + l^2)`:
//!
//! ```text
//! r(t) = Gamma(2H+1) sin(pi H) / (2 pi) * int_R cos(t l) |l|^(1-2H) / (1 + l^2) dl
//! ```
//!
//! The Fourier integral is evaluated after rotating the half-line contour onto
//! the positive imaginary axis. The pole at `l = i` sits on the rotated path and
//! contributes half a residue, leaving a non-oscillatory principal-value
//! integral:
//!
//! ```text
//! int_0^inf cos(t l) g(l) dl = (pi/2) e^-t sin(pi H) - cos(pi H) PV int_0^inf e^-ty y^(1-2H) / (1 - y^2) dy
//! ```
//!
//! which stays cheap for every lag, including the very large dilated lags
//! `alpha * theta_k * t` that high coordinates need.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{check_hurst, hurst_constant, SpectralModel};
use crate::quadrature::integrate_breaks;

/// Default absolute tolerance for autocovariance quadrature.
pub const DEFAULT_TOL: f64 = 1e-12;

/// `r(t)` of the canonical fOU process, to absolute error `tol`.
pub fn canonical_autocov(hurst: f64, t: f64, tol: f64) -> Result<f64> {
    check_hurst(hurst)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("lag must be a nonnegative real (got {t})")));
    }
    if hurst == 0.5 {
        return Ok(0.5 * (-t).exp());
    }
    if t == 0.0 {
        return Ok(hurst_constant(hurst));
    }
    let (s, c) = (PI * hurst).sin_cos();
    let prefactor = gamma(2.0 * hurst + 1.0) * s / PI;
    // the PV integral is multiplied by prefactor * |cos|, so tighten accordingly
    let inner_tol = tol / (prefactor * c.abs()).max(1e-300);
    let pv = principal_value(hurst, t, inner_tol)?;
    Ok(prefactor * (0.5 * PI * (-t).exp() * s - c * pv))
}

/// `PV int_0^inf e^(-t y) y^(1-2H) / (1 - y^2) dy` for `t > 0`.
fn principal_value(hurst: f64, t: f64, tol: f64) -> Result<f64> {
    let q = 1.0 - 2.0 * hurst;
    let g = |y: f64| (-t * y).exp() * y.powf(q) / (1.0 + y);
    let tol3 = tol / 3.0;

    // [0, 1/2] with y = u^m, which absorbs the y^(1-2H) endpoint behaviour.
    let m = 1.0 / (2.0 - 2.0 * hurst);
    let u_max = 0.5f64.powf(1.0 / m);
    let near = move |u: f64| {
        let y = u.powf(m);
        m * (-t * y).exp() / ((1.0 + y) * (1.0 - y))
    };
    // geometric breakpoints down to the Laplace scale of e^(-t u^m)
    let u_scale = t.powf(-1.0 / m);
    let mut breaks = vec![u_max];
    let mut b = u_max;
    while b > 1e-3 * u_scale && breaks.len() < 200 {
        b *= 0.25;
        breaks.push(b);
    }
    breaks.push(0.0);
    breaks.reverse();
    let (low, _) = integrate_breaks(near, &breaks, tol3)?;

    // [1/2, 3/2]: symmetric around the pole, so PV int 1/(1-y) vanishes there.
    let g1 = g(1.0);
    let dg1 = g1 * (-t + q - 0.5);
    let mid = |y: f64| {
        let d = 1.0 - y;
        if d.abs() < 1e-12 {
            -dg1
        } else {
            (g(y) - g1) / d
        }
    };
    let (middle, _) = integrate_breaks(mid, &[0.5, 1.0, 1.5], tol3)?;

    // [3/2, inf) with y = (3/2) v^(-1/(2H)), which flattens the y^(-1-2H) tail.
    let p = 1.0 / (2.0 * hurst);
    let far = move |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let y = 1.5 * v.powf(-p);
        let e = (-t * y).exp();
        if e == 0.0 || !y.is_finite() {
            return 0.0;
        }
        let dy = 1.5 * p * v.powf(-p - 1.0);
        e * y.powf(q) / ((1.0 + y) * (1.0 - y)) * dy
    };
    let (high, _) = integrate_breaks(far, &[0.0, 0.5, 1.0], tol3)?;

    Ok(low + middle + high)
}

/// `r_k(t) = sigma_k^2 (alpha theta_k)^(-2H) r(alpha theta_k t)` for the
/// zero-based coordinate `k`.
pub fn coordinate_autocov(model: &SpectralModel, k: usize, t: f64) -> Result<f64> {
    coordinate_autocov_tol(model, k, t, DEFAULT_TOL)
}

pub fn coordinate_autocov_tol(model: &SpectralModel, k: usize, t: f64, tol: f64) -> Result<f64> {
    if k >= model.len() {
        return Err(Error::invalid(format!(
            "coordinate index {k} out of range (model has {})",
            model.len()
        )));
    }
    let speed = model.speed(k);
    let scale = model.sigmas()[k].powi(2) * speed.powf(-2.0 * model.hurst());
    Ok(scale * canonical_autocov(model.hurst(), speed * t.abs(), tol / scale)?)
}

/// Canonical autocovariance tabulated at a sorted set of nonnegative lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocovTable {
    pub hurst: f64,
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
}

impl AutocovTable {
    pub fn canonical(hurst: f64, lags: Vec<f64>, tol: f64) -> Result<Self> {
        if lags.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("autocovariance lags must be sorted"));
        }
        let values = lags
            .iter()
            .map(|&t| canonical_autocov(hurst, t, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(AutocovTable { hurst, lags, values })
    }

    /// Table at the dilated integer lags `alpha theta_k i`, `i = 0..n`, that the
    /// discrete-time variance of coordinate `k` needs.
    pub fn for_coordinate(model: &SpectralModel, k: usize, n: usize, tol: f64) -> Result<Self> {
        let speed = model.speed(k);
        let lags = (0..n).map(|i| speed * i as f64).collect();
        Self::canonical(model.hurst(), lags, tol)
    }
}
