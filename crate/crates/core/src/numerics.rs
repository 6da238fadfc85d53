//! Numerical settings shared by both characterizations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_grid, LogDyadicGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Annulus range of the log-dyadic grid.
    pub k_min: i32,
    pub k_max: i32,
    pub points_per_annulus: usize,
    /// Frequency levels `0..=j_max`.
    pub j_max: u32,
    /// Time levels `t = 2^-l`, `l_min..=l_max`.
    pub l_min: u32,
    pub l_max: u32,
    /// Gauss-Legendre nodes per smooth piece of the ball-mean integral.
    pub quad_points: usize,
    /// Difference order override; `None` picks `max(2, floor(s)+1)`.
    pub order: Option<u32>,
    /// Uniform samples per `2^-j` in the spectral block computation.
    pub oversample: usize,
    /// Output half-window, in units of `2^-j`, once the full support is too large.
    pub window: f64,
    /// Kernel reach in units of the kernel scale `2^(1-j)`.
    pub kernel_reach: f64,
    /// Dyadic pieces and nodes per piece for the singular inner part.
    pub inner_pieces: usize,
    pub inner_gl: usize,
    /// Largest FFT (as a power of two) used before switching to a local window.
    pub max_fft_log2: u32,
    /// Trailing fraction of levels used by the classifier.
    pub window_fraction: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            k_min: -60,
            k_max: 2,
            points_per_annulus: 64,
            j_max: 40,
            l_min: 1,
            l_max: 40,
            quad_points: 16,
            order: None,
            oversample: 8,
            window: 256.0,
            kernel_reach: 256.0,
            inner_pieces: 48,
            inner_gl: 32,
            max_fft_log2: 17,
            window_fraction: 0.5,
        }
    }
}

impl Numerics {
    pub fn grid(&self) -> Result<Arc<LogDyadicGrid>> {
        Ok(Arc::new(build_grid(self.k_min, self.k_max, self.points_per_annulus)?))
    }

    pub fn check(&self) -> Result<()> {
        if self.l_min < 1 || self.l_min > self.l_max {
            return Err(Error::InvalidParams("time levels need 1 ≤ l_min ≤ l_max".into()));
        }
        if self.j_max < 1 {
            return Err(Error::InvalidParams("j_max ≥ 1 required".into()));
        }
        if self.quad_points < 1 || self.inner_gl < 2 || self.inner_pieces < 1 {
            return Err(Error::InvalidParams("quadrature sizes must be positive".into()));
        }
        if self.oversample < 4 {
            return Err(Error::InvalidParams("oversample ≥ 4 required".into()));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::InvalidParams("window_fraction must lie in (0, 1]".into()));
        }
        if let Some(m) = self.order {
            if !(1..=8).contains(&m) {
                return Err(Error::InvalidParams("difference order must lie in 1..=8".into()));
            }
        }
        Ok(())
    }

    /// Doubled grid density and quadrature, used for refinement checks.
    pub fn refined(&self) -> Numerics {
        Numerics {
            points_per_annulus: self.points_per_annulus * 2,
            quad_points: self.quad_points * 2,
            oversample: self.oversample * 2,
            inner_gl: self.inner_gl * 2,
            ..*self
        }
    }
}
