//! Independent stochastic validation of the dephasing rate.
//!
//! Samples stationary Gaussian noise realizations with covariance
//! `Cov(delta(t), delta(t')) = Phi_env(|t - t'|)` through a dense symmetric
//! square root of the covariance matrix, then estimates the rate directly
//! from the ensemble average it defines. The estimator shares the trapezoid
//! weights of `rate_time_domain`, so its expectation equals the
//! deterministic quadrature value exactly.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

use crate::control::{standard_normal, ControlField};
use crate::grid::{trapz_weight, TimeGrid};
use crate::linalg::sym_eigen;
use crate::spectra::CorrelationFunction;
use crate::{Error, Result};

/// Eigenvalues above `-EIGEN_CLAMP_REL * Phi_env(0)` are clamped to zero;
/// anything more negative is an invalid covariance.
pub const EIGEN_CLAMP_REL: f64 = 1e-10;

/// Reusable symmetric square root `B` of the covariance matrix, so that
/// realizations are `delta = B z` with `z` standard normal.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    grid: TimeGrid,
    /// Row-major `N x N` square root; `B B^T = Cov` within clamp tolerance.
    factor: Vec<f64>,
    scale: f64,
}

impl CovarianceFactor {
    pub fn new(c: &CorrelationFunction, grid: TimeGrid) -> Result<Self> {
        let n = grid.len();
        let h = grid.spacing();
        let scale = c.variance_scale();
        let mut cov = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = c.envelope((i - j) as f64 * h);
                cov[i * n + j] = v;
                cov[j * n + i] = v;
            }
        }
        let (mut w, v) = sym_eigen(&cov, n);
        let clamp = EIGEN_CLAMP_REL * scale.max(f64::MIN_POSITIVE);
        for lam in &mut w {
            if *lam < 0.0 {
                if -*lam <= clamp {
                    *lam = 0.0;
                } else {
                    return Err(Error::InvalidCovariance(format!(
                        "covariance eigenvalue {lam:e} below clamp tolerance -{clamp:e}"
                    )));
                }
            }
        }
        // B = V diag(sqrt(w)) V^T
        let sqrt_w: Vec<f64> = w.iter().map(|x| libm::sqrt(*x)).collect();
        let mut factor = alloc::vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let vik = v[i * n + k] * sqrt_w[k];
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    factor[i * n + j] += vik * v[j * n + k];
                }
            }
        }
        Ok(Self { grid, factor, scale })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Max-norm reconstruction error `|B B^T - Cov|` against the target
    /// covariance, for diagnostics.
    pub fn reconstruction_error(&self, c: &CorrelationFunction) -> f64 {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let mut max_err = 0.0_f64;
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.factor[i * n + k] * self.factor[j * n + k];
                }
                let err = libm::fabs(acc - c.envelope((i - j) as f64 * h));
                if err > max_err {
                    max_err = err;
                }
            }
        }
        max_err
    }

    fn realization(&self, seed: u64, index: u64) -> Vec<f64> {
        let n = self.grid.len();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(index.wrapping_add(1));
        let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mut out = alloc::vec![0.0; n];
        if self.scale == 0.0 {
            return out;
        }
        for i in 0..n {
            let row = &self.factor[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (bv, zv) in row.iter().zip(z.iter()) {
                acc += bv * zv;
            }
            out[i] = acc;
        }
        out
    }
}

/// A batch of noise realizations, deterministic per `(seed, index)`.
#[derive(Debug, Clone)]
pub struct NoiseBatch {
    grid: TimeGrid,
    realizations: Vec<Vec<f64>>,
    seed: u64,
    /// True when the correlation carried a nonzero spectral center: the
    /// batch then samples only the real envelope process.
    envelope_only: bool,
}

impl NoiseBatch {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn envelope_only(&self) -> bool {
        self.envelope_only
    }

    pub fn realizations(&self) -> &[Vec<f64>] {
        &self.realizations
    }
}

/// Draws `count` stationary Gaussian realizations with covariance
/// `Phi_env(|t - t'|)` on the grid.
pub fn sample_noise(
    c: &CorrelationFunction,
    grid: TimeGrid,
    count: usize,
    seed: u64,
) -> Result<NoiseBatch> {
    if count < 1 {
        return Err(Error::InvalidParameter("realization count must be >= 1".into()));
    }
    let factor = CovarianceFactor::new(c, grid)?;
    Ok(sample_noise_with(&factor, c, count, seed))
}

/// Same as [`sample_noise`] but reuses a prebuilt covariance factor.
pub fn sample_noise_with(
    factor: &CovarianceFactor,
    c: &CorrelationFunction,
    count: usize,
    seed: u64,
) -> NoiseBatch {
    let realizations = (0..count).map(|k| factor.realization(seed, k as u64)).collect();
    NoiseBatch {
        grid: factor.grid(),
        realizations,
        seed,
        envelope_only: c.spectral_center() != 0.0,
    }
}

/// Per-realization rate sample
/// `r_k = (2/T) Re integral_0^T dt1 delta(t1) eps*(t1) integral_0^{t1} dt2 delta(t2) eps(t2)`,
/// evaluated in `O(N)` via a cumulative inner integral with the same
/// trapezoid weights as `rate_time_domain`.
fn rate_sample(delta: &[f64], eps: &[Complex64], grid: &TimeGrid) -> f64 {
    let n = grid.len();
    let h = grid.spacing();
    let y: Vec<Complex64> = delta.iter().zip(eps.iter()).map(|(d, e)| e * d).collect();
    // cumulative trapezoid of y
    let mut acc = Complex64::new(0.0, 0.0);
    let mut outer = 0.0;
    let mut prev = y[0];
    for i in 1..n {
        acc += 0.5 * h * (prev + y[i]);
        prev = y[i];
        let w = trapz_weight(i, n);
        outer += w * (delta[i] * eps[i].conj() * acc).re;
    }
    2.0 / grid.duration() * outer * h
}

/// Monte-Carlo rate estimate: sample mean of the per-realization rates and
/// its standard error.
pub fn mc_rate(batch: &NoiseBatch, field: &ControlField) -> Result<(f64, f64)> {
    if batch.grid() != field.grid() {
        return Err(Error::GridMismatch(
            "noise batch and control field must share the time grid".into(),
        ));
    }
    let grid = batch.grid();
    let eps = field.epsilon();
    let samples: Vec<f64> =
        batch.realizations().iter().map(|d| rate_sample(d, &eps, &grid)).collect();
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    if samples.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (k - 1.0);
    Ok((mean, libm::sqrt(var / k)))
}

/// Per-realization rate samples, for CSV export.
pub fn rate_samples(batch: &NoiseBatch, field: &ControlField) -> Result<Vec<f64>> {
    if batch.grid() != field.grid() {
        return Err(Error::GridMismatch(
            "noise batch and control field must share the time grid".into(),
        ));
    }
    let grid = batch.grid();
    let eps = field.epsilon();
    Ok(batch.realizations().iter().map(|d| rate_sample(d, &eps, &grid)).collect())
}
