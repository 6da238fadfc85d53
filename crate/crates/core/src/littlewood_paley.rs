//! Smooth dyadic resolution of unity and the Fourier-analytic summands
//! `a_j = 2^(jsq) ||F^-1 phi_j * f||^q_{L^p(|x|^alpha)}`.
//!
//! Blocks are computed spectrally. `f` is split into a smooth outer part,
//! sampled uniformly and transformed by FFT, and a singular inner part
//! near the origin whose transform is integrated on dyadic Gauss-Legendre
//! pieces. The sum is multiplied by `phi_j`, transformed back, and
//! interpolated onto the log-dyadic grid.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::bump::smooth_step;
use crate::diagnostics::{SequenceKind, SummandSequence};
use crate::differences::{resolved_norms, LevelNorm};
use crate::error::{Error, Result};
use crate::grid::{sample, GridFunction, LogDyadicGrid};
use crate::numerics::Numerics;
use crate::params::{validate_space, SpaceParams};
use crate::quadrature::{gauss_legendre, push_mapped};
use crate::testfns::{Parity, PointwiseFunction, Regularity};
use crate::weighted_lp::lp_norm_dyadic;

/// `psi = 1` on `|x| ≤ 1`, `0` on `|x| ≥ 3/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BumpPsi;

impl BumpPsi {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        smooth_step(x.abs(), 1.0, 1.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiFamily {
    pub psi: BumpPsi,
    pub j_max: u32,
}

pub fn make_phi_family(j_max: u32) -> Result<PhiFamily> {
    if j_max < 1 {
        return Err(Error::InvalidParams("j_max ≥ 1 required".into()));
    }
    Ok(PhiFamily { psi: BumpPsi, j_max })
}

impl PhiFamily {
    /// `phi_0 = psi`, `phi_j(xi) = psi(2^-j xi) - psi(2^(1-j) xi)`.
    #[inline]
    pub fn phi(&self, j: u32, xi: f64) -> f64 {
        if j == 0 {
            self.psi.eval(xi)
        } else {
            let a = xi * 2f64.powi(-(j as i32));
            self.psi.eval(a) - self.psi.eval(2.0 * a)
        }
    }

    /// Closed frequency interval outside which `phi_j` vanishes (`|xi|`).
    pub fn band(&self, j: u32) -> (f64, f64) {
        if j == 0 {
            (0.0, 1.5)
        } else {
            let b = 2f64.powi(j as i32 - 1);
            (b, 3.0 * b)
        }
    }
}

pub const DEFAULT_KERNEL_SPACING: f64 = 1.0 / 256.0;
pub const DEFAULT_KERNEL_HALF_WIDTH: f64 = 512.0;
const KERNEL_TAIL_TOL: f64 = 1e-10;

/// `K_j = F^-1 phi_j` tabulated for `j ∈ {0, 1}`; higher levels are read
/// through `K_j(x) = 2^(j-1) K_1(2^(j-1) x)`.
#[derive(Clone, Debug)]
pub struct BandKernel {
    pub j: u32,
    base_spacing: f64,
    base_half_width: f64,
    scale: f64,
    /// `K_base(i * base_spacing)` for `i = 0..=n`; the kernel is even.
    base: Arc<Vec<f64>>,
}

impl BandKernel {
    /// Sample spacing of `K_j` itself.
    pub fn spacing(&self) -> f64 {
        self.base_spacing / self.scale
    }

    pub fn half_width(&self) -> f64 {
        self.base_half_width / self.scale
    }

    /// `K_j` at the nodes `i * spacing()`, `i = -n..=n`.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let h = self.spacing();
        let n = self.base.len() as i64 - 1;
        (-n..=n).map(|i| (i as f64 * h, self.scale * self.base[i.unsigned_abs() as usize])).collect()
    }

    /// Cubic interpolation of `K_j`; errors beyond the tabulated range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let u = (x * self.scale).abs() / self.base_spacing;
        let n = self.base.len() - 1;
        if u > n as f64 {
            return Err(Error::OutOfRange(format!(
                "kernel evaluated at |x| = {:e} beyond half-width {:e}",
                x.abs(),
                self.half_width()
            )));
        }
        let i = (u.floor() as usize).min(n.saturating_sub(2)).max(1);
        let t = u - i as f64;
        let at = |k: isize| self.base[(i as isize + k).unsigned_abs()];
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        let v = p1
            + 0.5
                * t
                * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
        Ok(self.scale * v)
    }

    /// Trapezoidal `∫ K_j` over the tabulated range.
    pub fn integral(&self) -> f64 {
        let h = self.base_spacing;
        let interior: f64 = self.base[1..].iter().sum();
        let end = *self.base.last().unwrap();
        h * (self.base[0] + 2.0 * interior - end)
    }
}

fn base_table(family: &PhiFamily, base_j: u32, h: f64, half_width: f64) -> Result<Vec<f64>> {
    let (_, hi) = family.band(base_j);
    if std::f64::consts::PI / h <= hi {
        return Err(Error::NumericalLimit(format!(
            "kernel spacing {h:e} puts the Nyquist frequency below the band edge {hi}"
        )));
    }
    let n_half = (half_width / h).round() as usize;
    let n = (4 * n_half).next_power_of_two();
    let period = n as f64 * h;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            Complex64::new(family.phi(base_j, 2.0 * std::f64::consts::PI * kk / period), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let table: Vec<f64> = buf[..=n_half].iter().map(|c| c.re / period).collect();
    let peak = table.iter().fold(0f64, |m, v| m.max(v.abs()));
    let tail_start = (0.9 * n_half as f64) as usize;
    let tail = table[tail_start..].iter().fold(0f64, |m, v| m.max(v.abs()));
    if tail > KERNEL_TAIL_TOL * peak.max(1.0) {
        return Err(Error::NumericalLimit(format!(
            "kernel tail {tail:e} near half-width {half_width} exceeds {KERNEL_TAIL_TOL:e}"
        )));
    }
    Ok(table)
}

fn default_tables() -> &'static [Result<Arc<Vec<f64>>>; 2] {
    static TABLES: OnceLock<[Result<Arc<Vec<f64>>>; 2]> = OnceLock::new();
    TABLES.get_or_init(|| {
        let fam = PhiFamily { psi: BumpPsi, j_max: 1 };
        [0, 1].map(|j| base_table(&fam, j, DEFAULT_KERNEL_SPACING, DEFAULT_KERNEL_HALF_WIDTH).map(Arc::new))
    })
}

/// Tabulates `K_j`. `h_k` and `r_k` describe the base table of `K_0` or
/// `K_1`; levels `j ≥ 2` reuse `K_1` through the scaling law.
pub fn make_band_kernel(family: &PhiFamily, j: u32, h_k: f64, r_k: f64) -> Result<BandKernel> {
    if j > family.j_max {
        return Err(Error::OutOfRange(format!("level {j} beyond j_max = {}", family.j_max)));
    }
    let base_j = j.min(1);
    let base = if h_k == DEFAULT_KERNEL_SPACING && r_k == DEFAULT_KERNEL_HALF_WIDTH {
        default_tables()[base_j as usize].clone()?
    } else {
        Arc::new(base_table(family, base_j, h_k, r_k)?)
    };
    let scale = if j <= 1 { 1.0 } else { 2f64.powi(j as i32 - 1) };
    Ok(BandKernel { j, base_spacing: h_k, base_half_width: r_k, scale, base })
}

pub fn default_band_kernel(family: &PhiFamily, j: u32) -> Result<BandKernel> {
    make_band_kernel(family, j, DEFAULT_KERNEL_SPACING, DEFAULT_KERNEL_HALF_WIDTH)
}

/// Geometry of one spectral block computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockLayout {
    pub n: usize,
    pub h: f64,
    /// Output half-window: values beyond are reported as zero.
    pub out_radius: f64,
    /// Input half-window; the outer part is tapered to zero before it.
    pub in_radius: f64,
    pub taper: Option<(f64, f64)>,
    /// Inner/outer split radius `r`: the singular part lives on `|y| < 2r`.
    pub split: f64,
}

fn layout(f: &PointwiseFunction, j: u32, grid: &LogDyadicGrid, num: &Numerics) -> Result<BlockLayout> {
    let sigma = 2f64.powi(-(j as i32));
    let ell = if j == 0 { 1.0 } else { 2.0 * sigma };
    let h = sigma / num.oversample as f64;
    let reach = num.kernel_reach * ell;
    let support = f.support_radius;
    let full_out = grid.outer_radius().min(support + reach);
    let size = |out: f64, inn: f64| -> usize {
        let period = (out + inn + reach).max(2.0 * out.max(inn)) + 16.0 * h;
        ((period / h).ceil() as usize).next_power_of_two()
    };
    let n_full = size(full_out, support);
    let local_ok = f.regularity == Regularity::SmoothAwayFromOrigin;
    let local_out = num.window * sigma;
    if n_full <= 1usize << num.max_fft_log2 || !local_ok || local_out >= full_out {
        if n_full > 1usize << 24 {
            return Err(Error::NumericalLimit(format!(
                "level {j} needs an FFT of {n_full} points for a function without a localized singularity"
            )));
        }
        return Ok(BlockLayout { n: n_full, h, out_radius: full_out, in_radius: support, taper: None, split: 8.0 * sigma });
    }
    let in_radius = support.min(local_out + reach);
    let taper = if support > local_out + 0.5 * reach {
        Some((local_out + 0.5 * reach, local_out + reach))
    } else {
        None
    };
    Ok(BlockLayout {
        n: size(local_out, in_radius),
        h,
        out_radius: local_out,
        in_radius,
        taper,
        split: 8.0 * sigma,
    })
}

/// `(K_j * f)(x)` at every grid node.
pub fn band_convolve(f: &PointwiseFunction, kernel: &BandKernel, grid: &Arc<LogDyadicGrid>) -> Result<GridFunction> {
    band_convolve_with(f, kernel.j, grid, &Numerics::default())
}

pub fn band_convolve_with(
    f: &PointwiseFunction,
    j: u32,
    grid: &Arc<LogDyadicGrid>,
    num: &Numerics,
) -> Result<GridFunction> {
    if f.is_zero() {
        return Ok(GridFunction::zeros(grid.clone()));
    }
    if let Regularity::Oscillating { beta } = f.regularity {
        return Err(Error::NumericalLimit(format!(
            "{}: oscillation |x|^-{beta} near the origin cannot be resolved spectrally; use the difference method",
            f.label
        )));
    }
    let family = PhiFamily { psi: BumpPsi, j_max: j.max(1) };
    let lay = layout(f, j, grid, num)?;
    let (n, h) = (lay.n, lay.h);
    let period = n as f64 * h;
    let dxi = 2.0 * std::f64::consts::PI / period;
    let split = lay.split;

    // Outer part on the uniform grid, in FFT order (y_k = k h, wrapped).
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut any_outer = false;
    let kmax = ((lay.in_radius / h).ceil() as usize).min(n / 2 - 1);
    let kmin = (split / h).floor() as usize;
    for k in kmin.max(1)..=kmax {
        let y = k as f64 * h;
        let cut = (1.0 - smooth_step(y, split, 2.0 * split))
            * lay.taper.map_or(1.0, |(a, b)| smooth_step(y, a, b));
        if cut == 0.0 {
            continue;
        }
        let (fp, fm) = match f.parity {
            Parity::Even => {
                let v = f.eval(y);
                (v, v)
            }
            Parity::Odd => {
                let v = f.eval(y);
                (v, -v)
            }
            Parity::None => (f.eval(y), f.eval(-y)),
        };
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!("{} at y = ±{y:e}", f.label)));
        }
        buf[k] = Complex64::new(fp * cut, 0.0);
        buf[n - k] = Complex64::new(fm * cut, 0.0);
        any_outer |= fp != 0.0 || fm != 0.0;
    }
    let mut planner = FftPlanner::new();
    if any_outer {
        planner.plan_fft_forward(n).process(&mut buf);
        for c in buf.iter_mut() {
            *c *= h;
        }
    }

    // Inner part: transform at the band frequencies by dyadic Gauss-Legendre.
    let (band_lo, band_hi) = family.band(j);
    let r_lo = (band_lo / dxi).ceil() as usize;
    let r_hi = ((band_hi / dxi).floor() as usize).min(n / 2 - 1);
    let count = r_hi + 1 - r_lo;
    let mut cos_part = vec![0.0; count];
    let mut sin_part = vec![0.0; count];
    let rule = gauss_legendre(num.inner_gl);
    let mut nodes = Vec::with_capacity(num.inner_pieces * num.inner_gl);
    let top = (2.0 * split).min(f.support_radius);
    for i in 0..num.inner_pieces {
        let b = top * 2f64.powi(-(i as i32));
        push_mapped(&rule, 0.5 * b, b, &mut nodes);
    }
    for &(y, w) in &nodes {
        let eta = smooth_step(y, split, 2.0 * split);
        if eta == 0.0 {
            continue;
        }
        let (fp, fm) = match f.parity {
            Parity::Even => {
                let v = f.eval(y);
                (v, v)
            }
            Parity::Odd => {
                let v = f.eval(y);
                (v, -v)
            }
            Parity::None => (f.eval(y), f.eval(-y)),
        };
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!("{} at y = ±{y:e}", f.label)));
        }
        let even = w * eta * (fp + fm);
        let odd = w * eta * (fp - fm);
        if even == 0.0 && odd == 0.0 {
            continue;
        }
        let mut z = Complex64::from_polar(1.0, r_lo as f64 * dxi * y);
        let step = Complex64::from_polar(1.0, dxi * y);
        for r in 0..count {
            cos_part[r] += even * z.re;
            sin_part[r] += odd * z.im;
            z *= step;
        }
    }

    // Band-limit and invert.
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (idx, r) in (r_lo..=r_hi).enumerate() {
        let phi = family.phi(j, r as f64 * dxi);
        if phi == 0.0 {
            continue;
        }
        let inner = Complex64::new(cos_part[idx], -sin_part[idx]);
        spec[r] = phi * (buf[r] + inner);
        if r != 0 {
            spec[n - r] = phi * (buf[n - r] + inner.conj());
        }
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    let inv = 1.0 / period;

    let sample = |k: i64| -> f64 { spec[k.rem_euclid(n as i64) as usize].re * inv };
    let values = grid
        .nodes()
        .iter()
        .map(|node| {
            if node.x.abs() > lay.out_radius {
                return 0.0;
            }
            lagrange6(node.x / h, sample)
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// Six-point Lagrange interpolation of integer-indexed samples at `u`.
fn lagrange6(u: f64, sample: impl Fn(i64) -> f64) -> f64 {
    let i0 = u.floor() as i64;
    let t = u - i0 as f64;
    if t == 0.0 {
        return sample(i0);
    }
    let offsets = [-2i64, -1, 0, 1, 2, 3];
    let mut acc = 0.0;
    for (a, &oa) in offsets.iter().enumerate() {
        let mut w = 1.0;
        for (b, &ob) in offsets.iter().enumerate() {
            if a != b {
                w *= (t - ob as f64) / (oa - ob) as f64;
            }
        }
        acc += w * sample(i0 + oa);
    }
    acc
}

/// Block norms `||K_j * f||_{L^p(|x|^alpha)}` (dyadic norm) with a rounding
/// scale: the norm of `sup |f|` over the input window, spread over the output
/// window.
pub fn fourier_block_levels(
    f: &PointwiseFunction,
    p: f64,
    alpha: f64,
    j_max: u32,
    num: &Numerics,
) -> Result<Vec<LevelNorm>> {
    num.check()?;
    let grid = num.grid()?;
    let sampled = if f.is_zero() { GridFunction::zeros(grid.clone()) } else { sample(f, &grid)? };
    (0..=j_max)
        .into_par_iter()
        .map(|j| {
            let block = band_convolve_with(f, j, &grid, num)?;
            let norm = lp_norm_dyadic(&block, p, alpha)?.value;
            let scale = if norm == 0.0 {
                0.0
            } else {
                let lay = layout(f, j, &grid, num)?;
                let peak = grid
                    .nodes()
                    .iter()
                    .zip(&sampled.values)
                    .filter(|(node, _)| node.x.abs() <= lay.in_radius)
                    .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
                let flat = GridFunction::from_fn(grid.clone(), |x| if x.abs() <= lay.out_radius { peak } else { 0.0 })?;
                lp_norm_dyadic(&flat, p, alpha)?.value
            };
            Ok(LevelNorm { l: j, norm, scale })
        })
        .collect()
}

/// `||K_j * f||_{L^p(|x|^alpha)}` for `j = 0..=j_max`, zero from the first
/// block lost in rounding.
pub fn fourier_block_norms(
    f: &PointwiseFunction,
    p: f64,
    alpha: f64,
    j_max: u32,
    num: &Numerics,
) -> Result<Vec<f64>> {
    Ok(resolved_norms(&fourier_block_levels(f, p, alpha, j_max, num)?))
}

/// `a_j = 2^(jsq) ||F^-1 phi_j * f||^q` (`2^(js) ||.||` for `q = inf`), `j = 0..=j_max`.
pub fn besov_summands_fourier(
    f: &PointwiseFunction,
    params: &SpaceParams,
    j_max: u32,
    num: &Numerics,
) -> Result<SummandSequence> {
    validate_space(params)?;
    if params.n != 1 {
        return Err(Error::InvalidParams("Besov summands are implemented for n = 1".into()));
    }
    let norms = fourier_block_norms(f, params.p.value(), params.alpha.value(), j_max, num)?;
    Ok(SummandSequence::from_norms(
        SequenceKind::FrequencyLevels,
        (0..=j_max as i64).collect(),
        &norms,
        params.s.value(),
        params.q,
    ))
}
