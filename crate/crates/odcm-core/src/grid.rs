//! Uniform time and frequency grids plus trapezoid quadrature helpers.
//!
//! All integrals in this crate are composite trapezoid sums on uniform
//! grids, summed in fixed index order so results are bit-reproducible.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Uniform discretization of the modulation window `[0, T]`.
///
/// `N` samples, spacing `h = T/(N-1)`, sample times `t_i = i*h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_total: f64,
    n: usize,
}

impl TimeGrid {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(t_total: f64, n: usize) -> Result<Self> {
        if !(t_total > 0.0) || !t_total.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "total duration must be positive and finite, got {t_total}"
            )));
        }
        if n < Self::MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "time grid needs at least {} samples, got {n}",
                Self::MIN_SAMPLES
            )));
        }
        Ok(Self { t_total, n })
    }

    #[inline]
    pub fn duration(&self) -> f64 {
        self.t_total
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample spacing `h = T/(N-1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.t_total / (self.n - 1) as f64
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.n).map(move |i| i as f64 * h)
    }

    /// Same window, twice the resolution (`2N - 1` samples keeps the
    /// original samples as a subset).
    pub fn refined(&self) -> Self {
        Self { t_total: self.t_total, n: 2 * self.n - 1 }
    }
}

/// Uniform frequency grid, symmetric about 0: `2M + 1` samples on
/// `[-omega_max, +omega_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    omega_max: f64,
    half: usize,
}

impl FrequencyGrid {
    pub fn new(omega_max: f64, half: usize) -> Result<Self> {
        if !(omega_max > 0.0) || !omega_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega_max must be positive and finite, got {omega_max}"
            )));
        }
        if half < 8 {
            return Err(Error::InvalidParameter(format!(
                "frequency grid needs at least 8 half-points, got {half}"
            )));
        }
        Ok(Self { omega_max, half })
    }

    #[inline]
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Total number of samples (odd, so omega = 0 is a grid point).
    #[inline]
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.omega_max / self.half as f64
    }

    #[inline]
    pub fn omega(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.spacing()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.omega(i))
    }

    /// Validates a raw grid array as uniform and symmetric about 0, to
    /// within `1e-9` relative spacing.
    pub fn validate_raw(grid: &[f64]) -> Result<()> {
        if grid.len() < 3 {
            return Err(Error::InvalidInput("tabulated grid needs >= 3 points".into()));
        }
        let h = grid[1] - grid[0];
        if !(h > 0.0) {
            return Err(Error::InvalidInput("grid must be strictly increasing".into()));
        }
        for w in grid.windows(2) {
            let d = w[1] - w[0];
            if libm::fabs(d - h) > 1e-9 * libm::fabs(h) {
                return Err(Error::InvalidInput(format!(
                    "grid spacing not uniform: {d} vs {h}"
                )));
            }
        }
        let mid = grid[0] + grid[grid.len() - 1];
        if libm::fabs(mid) > 1e-9 * libm::fabs(h) * grid.len() as f64 {
            return Err(Error::InvalidInput("grid not symmetric about 0".into()));
        }
        Ok(())
    }
}

/// Composite trapezoid integral of uniformly sampled values.
pub fn trapz(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (values[0] + values[values.len() - 1]);
    for v in &values[1..values.len() - 1] {
        acc += v;
    }
    acc * h
}

/// Cumulative trapezoid integral; output has the same length, starts at 0.
pub fn cumtrapz(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoid weight of sample `i` on a grid of `n` points (1/2 at the ends).
#[inline]
pub fn trapz_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}
