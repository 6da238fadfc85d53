//! Differences `Δ^M_h`, ball means `d^M_t` and the summands
//! `b_l = 2^(lsq) ||d^M_t f||^q_{L^p(|x|^alpha)}`, `t = 2^-l`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{SequenceKind, SummandSequence};
use crate::error::{Error, Result};
use crate::grid::{sample, GridFunction, LogDyadicGrid};
use crate::numerics::Numerics;
use crate::params::{validate_space, SpaceParams};
use crate::quadrature::{gauss_legendre, push_mapped};
use crate::testfns::{Parity, PointwiseFunction};
use crate::weighted_lp::lp_norm_dyadic;

pub const MAX_ORDER: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceOrder(u32);

impl DifferenceOrder {
    pub fn new(m: u32) -> Result<DifferenceOrder> {
        if !(1..=MAX_ORDER).contains(&m) {
            return Err(Error::InvalidParams(format!("difference order must lie in 1..={MAX_ORDER}, got {m}")));
        }
        Ok(DifferenceOrder(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `(-1)^i C(M, i)` for `i = 0..=M`.
    fn coefficients(self) -> Vec<f64> {
        let m = self.0 as usize;
        let mut c = vec![1.0; m + 1];
        for i in 1..=m {
            c[i] = -c[i - 1] * (m + 1 - i) as f64 / i as f64;
        }
        c
    }
}

/// `max(2, floor(s) + 1)`, capped at the implementation limit.
pub fn default_order(s: f64) -> DifferenceOrder {
    let m = (s.floor().max(0.0) as u32 + 1).clamp(2, MAX_ORDER);
    DifferenceOrder(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TimeLevels {
    pub l_min: u32,
    pub l_max: u32,
}

impl TimeLevels {
    pub fn new(l_min: u32, l_max: u32) -> Result<TimeLevels> {
        if l_min < 1 || l_min > l_max {
            return Err(Error::InvalidParams("time levels need 1 ≤ l_min ≤ l_max".into()));
        }
        if l_max > 1000 {
            return Err(Error::OutOfRange(format!("l_max = {l_max} underflows t = 2^-l")));
        }
        Ok(TimeLevels { l_min, l_max })
    }

    pub fn t(l: u32) -> f64 {
        2f64.powi(-(l as i32))
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        self.l_min..=self.l_max
    }
}

impl Default for TimeLevels {
    fn default() -> Self {
        TimeLevels { l_min: 1, l_max: 40 }
    }
}

fn checked(f: &PointwiseFunction, y: f64) -> Result<f64> {
    let v = f.eval(y);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("{} at x = {y:e}", f.label)))
    }
}

fn difference_with(f: &PointwiseFunction, coeffs: &[f64], h: f64, x: f64) -> Result<f64> {
    let m = coeffs.len() - 1;
    let mut acc = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        acc += c * checked(f, x + (m - i) as f64 * h)?;
    }
    Ok(acc)
}

/// `Σ_i (-1)^i C(M,i) f(x + (M-i)h)`.
pub fn difference(f: &PointwiseFunction, m: DifferenceOrder, h: f64, x: f64) -> Result<f64> {
    difference_with(f, &m.coefficients(), h, x)
}

/// `h = 0`, where the difference vanishes, and the offsets `h ∈ (-t, t)` at
/// which some sample point `x + kh` hits the origin.
fn breakpoints(m: u32, t: f64, x: f64) -> Vec<f64> {
    let mut b = vec![-t, 0.0, t];
    if x != 0.0 {
        for k in 1..=m {
            let h = -x / k as f64;
            if h.abs() < t {
                b.push(h);
            }
        }
    }
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup();
    b
}

struct BallMean<'a> {
    f: &'a PointwiseFunction,
    m: u32,
    coeffs: Vec<f64>,
    rule: Arc<Vec<(f64, f64)>>,
    nodes: Vec<(f64, f64)>,
}

impl<'a> BallMean<'a> {
    fn new(f: &'a PointwiseFunction, m: DifferenceOrder, quad_points: usize) -> Self {
        BallMean { f, m: m.get(), coeffs: m.coefficients(), rule: gauss_legendre(quad_points), nodes: Vec::new() }
    }

    fn eval(&mut self, t: f64, x: f64) -> Result<f64> {
        Ok(self.eval_with_scale(t, x)?.0)
    }

    /// The ball mean and the same mean of `Σ_i C(M,i) |f(x + (M-i)h)|`, which
    /// bounds the rounding error of the difference up to a factor `eps`.
    fn eval_with_scale(&mut self, t: f64, x: f64) -> Result<(f64, f64)> {
        let reach = self.m as f64 * t;
        let r = self.f.support_radius;
        if x - reach >= r || x + reach <= -r {
            return Ok((0.0, 0.0));
        }
        self.nodes.clear();
        let b = breakpoints(self.m, t, x);
        for w in b.windows(2) {
            push_mapped(&self.rule, w[0], w[1], &mut self.nodes);
        }
        let m = self.m as usize;
        let (mut acc, mut mag) = (0.0, 0.0);
        for &(h, w) in &self.nodes {
            let (mut d, mut a) = (0.0, 0.0);
            for (i, c) in self.coeffs.iter().enumerate() {
                let v = checked(self.f, x + (m - i) as f64 * h)?;
                d += c * v;
                a += (c * v).abs();
            }
            acc += w * d.abs();
            mag += w * a;
        }
        Ok((acc / t, mag / t))
    }
}

/// `(1/t) ∫_{-t}^{t} |Δ^M_h f(x)| dh` by Gauss-Legendre on the pieces between
/// the breakpoints above.
pub fn ball_mean(f: &PointwiseFunction, m: DifferenceOrder, t: f64, x: f64, quad_points: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams("ball radius t > 0 required".into()));
    }
    if quad_points < 1 {
        return Err(Error::InvalidParams("quad_points ≥ 1 required".into()));
    }
    BallMean::new(f, m, quad_points).eval(t, x)
}

/// `d^M_t f` at every node of `grid`.
pub fn ball_mean_on_grid(
    f: &PointwiseFunction,
    m: DifferenceOrder,
    t: f64,
    grid: &Arc<LogDyadicGrid>,
    quad_points: usize,
) -> Result<GridFunction> {
    Ok(ball_mean_with_scale(f, m, t, grid, quad_points)?.0)
}

fn ball_mean_with_scale(
    f: &PointwiseFunction,
    m: DifferenceOrder,
    t: f64,
    grid: &Arc<LogDyadicGrid>,
    quad_points: usize,
) -> Result<(GridFunction, GridFunction)> {
    let mut bm = BallMean::new(f, m, quad_points);
    let nodes = grid.nodes();
    let mut values = vec![0.0; nodes.len()];
    let mut scale = vec![0.0; nodes.len()];
    if !f.is_zero() {
        if f.parity == Parity::None {
            for (i, node) in nodes.iter().enumerate() {
                (values[i], scale[i]) = bm.eval_with_scale(t, node.x)?;
            }
        } else {
            for i in grid.positive_range() {
                let (v, a) = bm.eval_with_scale(t, nodes[i].x)?;
                let j = grid.mirror(i);
                (values[i], scale[i], values[j], scale[j]) = (v, a, v, a);
            }
        }
    }
    Ok((GridFunction::new(grid.clone(), values)?, GridFunction::new(grid.clone(), scale)?))
}

/// Relative size below which a ball-mean norm is indistinguishable from
/// rounding in the differences.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Norm at one level (time level or frequency block) with its rounding scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelNorm {
    pub l: u32,
    pub norm: f64,
    /// Norm of the ball mean of the unsigned terms of the difference.
    pub scale: f64,
}

impl LevelNorm {
    pub fn resolved(&self) -> bool {
        self.norm == 0.0 || self.norm > ROUNDING_FLOOR * self.scale
    }
}

/// Norms and rounding scales of `d^M_t f` for every level `t = 2^-l`.
pub fn ball_mean_levels(
    f: &PointwiseFunction,
    p: f64,
    alpha: f64,
    m: DifferenceOrder,
    levels: TimeLevels,
    num: &Numerics,
) -> Result<Vec<LevelNorm>> {
    let grid = num.grid()?;
    levels
        .levels()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| {
            let (d, a) = ball_mean_with_scale(f, m, TimeLevels::t(l), &grid, num.quad_points)?;
            Ok(LevelNorm { l, norm: lp_norm_dyadic(&d, p, alpha)?.value, scale: lp_norm_dyadic(&a, p, alpha)?.value })
        })
        .collect()
}

/// `||d^M_t f||_{L^p(|x|^alpha)}` (dyadic norm) for every level `t = 2^-l`.
pub fn ball_mean_norms(
    f: &PointwiseFunction,
    p: f64,
    alpha: f64,
    m: DifferenceOrder,
    levels: TimeLevels,
    num: &Numerics,
) -> Result<Vec<f64>> {
    Ok(ball_mean_levels(f, p, alpha, m, levels, num)?.into_iter().map(|v| v.norm).collect())
}

/// Norms with every level from the first one lost in rounding onward set to 0.
pub fn resolved_norms(levels: &[LevelNorm]) -> Vec<f64> {
    let cut = levels.iter().position(|v| !v.resolved()).unwrap_or(levels.len());
    if cut < levels.len() {
        log::debug!("norms below the rounding floor from level {}", levels[cut].l);
    }
    levels.iter().enumerate().map(|(i, v)| if i < cut { v.norm } else { 0.0 }).collect()
}

/// `||f||_{L^p(|x|^alpha)}` on the grid (dyadic norm).
pub fn base_norm(f: &PointwiseFunction, p: f64, alpha: f64, num: &Numerics) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    Ok(lp_norm_dyadic(&sample(f, &num.grid()?)?, p, alpha)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffSummands {
    pub sequence: SummandSequence,
    /// `||f||_{L^p(|x|^alpha)}`, the level-independent term.
    pub base_norm: f64,
    pub order: DifferenceOrder,
}

pub fn check_order(params: &SpaceParams, m: DifferenceOrder) -> Result<()> {
    if params.s.value() >= m.get() as f64 {
        return Err(Error::InvalidParams(format!(
            "s < M required by the difference characterization (s = {}, M = {})",
            params.s,
            m.get()
        )));
    }
    Ok(())
}

/// `b_l = 2^(lsq) ||d^M_{2^-l} f||^q` (`2^(ls) ||.||` for `q = inf`) and the base norm.
/// Levels lost in rounding are reported as 0.
pub fn besov_summands_diff(
    f: &PointwiseFunction,
    params: &SpaceParams,
    m: DifferenceOrder,
    levels: TimeLevels,
    num: &Numerics,
) -> Result<DiffSummands> {
    validate_space(params)?;
    if params.n != 1 {
        return Err(Error::InvalidParams("ball means are implemented for n = 1".into()));
    }
    check_order(params, m)?;
    num.check()?;
    let (p, alpha) = (params.p.value(), params.alpha.value());
    let norms = resolved_norms(&ball_mean_levels(f, p, alpha, m, levels, num)?);
    let base_norm = base_norm(f, p, alpha, num)?;
    let sequence = SummandSequence::from_norms(
        SequenceKind::TimeLevels,
        levels.levels().map(i64::from).collect(),
        &norms,
        params.s.value(),
        params.q,
    );
    Ok(DiffSummands { sequence, base_norm, order: m })
}
