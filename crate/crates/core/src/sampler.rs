//! Exact-in-distribution sampling of the coordinate processes on a time grid.
//!
//! Each coordinate is drawn in canonical units, i.e. as the canonical fOU
//! process on the dilated grid `alpha theta_k t`, then rescaled by
//! `sigma_k (alpha theta_k)^(-H)`. The law is identical to sampling with
//! covariance `r_k(|t_i - t_j|)` directly, and the circulant eigenvalue
//! threshold stays on a fixed scale for every coordinate.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::autocov::{canonical_autocov, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::model::{InitialCondition, SpectralModel};
use crate::paths::CoordinatePaths;

/// Eigenvalues of the circulant embedding below this are rejected; those in
/// `[-CIRCULANT_EIG_TOL, 0)` are clamped to zero.
pub const CIRCULANT_EIG_TOL: f64 = 1e-10;

/// Diagonal jitter tried in turn when the dense Cholesky factorization fails.
pub const CHOLESKY_JITTER: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Circulant,
    Cholesky,
    #[default]
    Auto,
}

/// Independent substream families derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Path,
    Initial,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Path => 0x5041_5448,
            Stream::Initial => 0x494e_4954,
        }
    }
}

/// Seeding rule: every `(replication, coordinate)` pair gets its own ChaCha
/// stream, so results do not depend on evaluation order or thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPolicy {
    pub master_seed: u64,
    pub replication: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        RngPolicy {
            master_seed,
            replication: 0,
        }
    }

    pub fn replication(self, replication: u64) -> Self {
        RngPolicy { replication, ..self }
    }

    pub fn rng(&self, coordinate: usize, stream: Stream) -> ChaCha12Rng {
        assert!(self.replication < 1 << 32, "replication index exceeds 2^32");
        assert!((coordinate as u64) < 1 << 32, "coordinate index exceeds 2^32");
        let mut state = self.master_seed ^ stream.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(seed);
        rng.set_stream((self.replication << 32) | coordinate as u64);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

enum Factor {
    Point(f64),
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Dense(DMatrix<f64>),
}

impl Factor {
    /// Draws one canonical-unit path of length `m`.
    fn draw(&self, m: usize, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        match self {
            Factor::Point(sd) => {
                let z: f64 = StandardNormal.sample(rng);
                out[0] = sd * z;
            }
            Factor::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let a: f64 = StandardNormal.sample(rng);
                        let b: f64 = StandardNormal.sample(rng);
                        Complex::new(s * a, s * b)
                    })
                    .collect();
                fft.process(&mut buf);
                for (o, c) in out.iter_mut().zip(&buf[..m]) {
                    *o = c.re;
                }
            }
            Factor::Dense(l) => {
                let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
                for i in 0..m {
                    out[i] = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
                }
            }
        }
    }
}

/// Precomputed per-coordinate factorizations for repeated stationary draws on
/// one grid.
pub struct StationarySampler {
    model: Arc<SpectralModel>,
    grid: Vec<f64>,
    factors: Vec<Factor>,
    scales: Vec<f64>,
}

fn is_equispaced(grid: &[f64]) -> bool {
    if grid.len() < 3 {
        return true;
    }
    let h = grid[1] - grid[0];
    grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
}

impl StationarySampler {
    pub fn new(model: Arc<SpectralModel>, grid: &[f64], method: SamplingMethod, n_coords: usize) -> Result<Self> {
        model.check_coords(n_coords)?;
        if grid.is_empty() {
            return Err(Error::invalid("sampling grid must contain at least one time point"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("sampling grid must be strictly increasing"));
        }
        let equispaced = is_equispaced(grid);
        if method == SamplingMethod::Circulant && !equispaced {
            return Err(Error::invalid("circulant sampling requires an equispaced grid"));
        }
        let m = grid.len();
        let mut planner = FftPlanner::new();
        let fft = (m > 1).then(|| planner.plan_fft_forward(2 * (m - 1)));
        let factors = (0..n_coords)
            .into_par_iter()
            .map(|k| build_factor(&model, k, grid, method, equispaced, fft.clone()))
            .collect::<Result<Vec<_>>>()?;
        let h = model.hurst();
        let scales = (0..n_coords)
            .map(|k| model.sigmas()[k] * model.speed(k).powf(-h))
            .collect();
        Ok(StationarySampler {
            model,
            grid: grid.to_vec(),
            factors,
            scales,
        })
    }

    pub fn n_coords(&self) -> usize {
        self.factors.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn sample(&self, rng: &RngPolicy) -> CoordinatePaths {
        let m = self.grid.len();
        let mut values = vec![0.0; self.factors.len() * m];
        for (k, row) in values.chunks_exact_mut(m).enumerate() {
            let mut r = rng.rng(k, Stream::Path);
            self.factors[k].draw(m, &mut r, row);
            let s = self.scales[k];
            row.iter_mut().for_each(|v| *v *= s);
        }
        CoordinatePaths::new(self.grid.clone(), values, self.factors.len(), self.model.clone(), true)
            .expect("sampler output has consistent shape")
    }
}

fn build_factor(
    model: &SpectralModel,
    k: usize,
    grid: &[f64],
    method: SamplingMethod,
    equispaced: bool,
    fft: Option<Arc<dyn Fft<f64>>>,
) -> Result<Factor> {
    let h = model.hurst();
    let speed = model.speed(k);
    let m = grid.len();
    if m == 1 {
        return Ok(Factor::Point(canonical_autocov(h, 0.0, DEFAULT_TOL)?.sqrt()));
    }
    let lag_values = if equispaced {
        let step = grid[1] - grid[0];
        Some(
            (0..m)
                .map(|i| canonical_autocov(h, speed * step * i as f64, DEFAULT_TOL))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };
    if let (Some(lags), true) = (&lag_values, method != SamplingMethod::Cholesky) {
        match circulant_factor(lags, fft.expect("fft planned for m > 1")) {
            Ok(f) => return Ok(f),
            Err(min_eigenvalue) if method == SamplingMethod::Circulant => {
                return Err(Error::Circulant {
                    coordinate: k + 1,
                    min_eigenvalue,
                })
            }
            Err(_) => {}
        }
    }
    let cov = match &lag_values {
        Some(lags) => DMatrix::from_fn(m, m, |i, j| lags[i.abs_diff(j)]),
        None => {
            let mut c = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in 0..=i {
                    let v = canonical_autocov(h, speed * (grid[i] - grid[j]), DEFAULT_TOL)?;
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
            c
        }
    };
    for jitter in CHOLESKY_JITTER {
        let mut a = cov.clone();
        for i in 0..m {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            return Ok(Factor::Dense(ch.l()));
        }
    }
    Err(Error::Cholesky {
        coordinate: k + 1,
        jitter: *CHOLESKY_JITTER.last().unwrap(),
    })
}

/// Circulant embedding of the Toeplitz covariance with first row `lags`.
/// Returns the minimum eigenvalue on failure.
fn circulant_factor(lags: &[f64], fft: Arc<dyn Fft<f64>>) -> std::result::Result<Factor, f64> {
    let m = lags.len();
    let big = 2 * (m - 1);
    let mut row: Vec<Complex<f64>> = (0..big)
        .map(|j| {
            let lag = if j < m { j } else { big - j };
            Complex::new(lags[lag], 0.0)
        })
        .collect();
    fft.process(&mut row);
    let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if !(min >= -CIRCULANT_EIG_TOL) {
        return Err(min);
    }
    let norm = 1.0 / big as f64;
    let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) * norm).sqrt()).collect();
    Ok(Factor::Circulant { sqrt_eig, fft })
}

/// Stationary draw of every model coordinate on `grid`.
pub fn sample_stationary_paths(
    model: Arc<SpectralModel>,
    grid: &[f64],
    rng: &RngPolicy,
    method: SamplingMethod,
) -> Result<CoordinatePaths> {
    let n = model.len();
    Ok(StationarySampler::new(model, grid, method, n)?.sample(rng))
}

/// Non-stationary sampler: a stationary draw `z_k` coupled with an independent
/// initial value through `x_k(t) = z_k(t) - e^(-a t) z_k(0) + e^(-a t) x_k(0)`,
/// `a = alpha theta_k`. The grid must start at `t = 0`.
pub struct NonstationarySampler {
    stationary: StationarySampler,
    init: InitialCondition,
}

impl NonstationarySampler {
    pub fn new(stationary: StationarySampler, init: InitialCondition) -> Result<Self> {
        init.validate(stationary.model())?;
        if !init.is_stationary() && stationary.grid()[0] != 0.0 {
            return Err(Error::invalid(
                "non-stationary sampling needs a grid starting at t = 0 for the coupling",
            ));
        }
        Ok(NonstationarySampler { stationary, init })
    }

    pub fn n_coords(&self) -> usize {
        self.stationary.n_coords()
    }

    pub fn grid(&self) -> &[f64] {
        self.stationary.grid()
    }

    pub fn sample(&self, rng: &RngPolicy) -> CoordinatePaths {
        let z = self.stationary.sample(rng);
        if self.init.is_stationary() {
            return z;
        }
        let model = self.stationary.model().clone();
        let grid = z.grid().to_vec();
        let m = grid.len();
        let n = z.n_coords();
        let mut values = z.values().to_vec();
        for (k, row) in values.chunks_exact_mut(m).enumerate() {
            let x0 = match &self.init {
                InitialCondition::Deterministic(v) => v[k],
                InitialCondition::GaussianIid { mean, std } => {
                    let e: f64 = StandardNormal.sample(&mut rng.rng(k, Stream::Initial));
                    mean + std * e
                }
                InitialCondition::Stationary => unreachable!(),
            };
            let z0 = row[0];
            let speed = model.speed(k);
            for (v, t) in row.iter_mut().zip(&grid) {
                let decay = (-speed * t).exp();
                *v = *v - decay * z0 + decay * x0;
            }
        }
        CoordinatePaths::new(grid, values, n, model, false).expect("coupled paths keep their shape")
    }
}

pub fn sample_nonstationary_paths(
    model: Arc<SpectralModel>,
    init: &InitialCondition,
    grid: &[f64],
    rng: &RngPolicy,
) -> Result<CoordinatePaths> {
    let n = model.len();
    let st = StationarySampler::new(model, grid, SamplingMethod::Auto, n)?;
    Ok(NonstationarySampler::new(st, init.clone())?.sample(rng))
}
