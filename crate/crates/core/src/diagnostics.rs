//! Tail classification of summand sequences and the membership experiments
//! built on top of it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::differences::{ball_mean_levels, base_norm, resolved_norms, check_order, default_order, DifferenceOrder, TimeLevels};
use crate::error::{Error, Result};
use crate::littlewood_paley::fourier_block_norms;
use crate::numerics::Numerics;
use crate::params::{in_uq, si_funct_member, validate_space, LogParams, SpaceParams, Q};
use crate::scalar::Real;
use crate::testfns::{FunctionSpec, PeriodicProfile, PointwiseFunction};

const UNDERFLOW: f64 = 1e-300;
const MIN_FIT_POINTS: usize = 8;
const SLOPE_THRESHOLD: f64 = 0.05;
/// Largest window slope still routed to the power-law branch by the residual test.
const POWER_SLOPE_CAP: f64 = 0.25;
const BORDERLINE_RHO: f64 = 0.2;
const SUP_TOLERANCE: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    FrequencyLevels,
    TimeLevels,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummandSequence {
    pub kind: SequenceKind,
    pub indices: Vec<i64>,
    pub values: Vec<f64>,
    pub q: Q,
}

impl SummandSequence {
    pub fn new(kind: SequenceKind, indices: Vec<i64>, values: Vec<f64>, q: Q) -> Result<SummandSequence> {
        if indices.len() != values.len() {
            return Err(Error::InvalidParams("indices and values differ in length".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("indices must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParams("summands must be nonnegative".into()));
        }
        Ok(SummandSequence { kind, indices, values, q })
    }

    /// `2^(i s q) norm_i^q`, or `2^(i s) norm_i` for `q = inf`.
    pub fn from_norms(kind: SequenceKind, indices: Vec<i64>, norms: &[f64], s: f64, q: Q) -> SummandSequence {
        let pw = q.power();
        let values = indices
            .iter()
            .zip(norms)
            .map(|(&i, &v)| if v == 0.0 { 0.0 } else { (i as f64 * s * pw).exp2() * v.powf(pw) })
            .collect();
        SummandSequence { kind, indices, values, q }
    }

    /// `(Σ a_i)^(1/q)`, or `max a_i` for `q = inf`.
    pub fn truncated_norm(&self) -> f64 {
        match self.q {
            Q::Infinite => self.values.iter().cloned().fold(0.0, f64::max),
            Q::Finite(q) => self.values.iter().sum::<f64>().powf(1.0 / q.value()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    GeometricConvergent,
    PowerLaw,
    Divergent,
}

impl fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictClass::GeometricConvergent => "geometric_convergent",
            VerdictClass::PowerLaw => "power_law",
            VerdictClass::Divergent => "divergent",
        })
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub class: VerdictClass,
    /// Fitted `d log2(value^(1/q)) / d index` on the window; `-inf` for sequences that vanish.
    #[serde(serialize_with = "finite_or_null")]
    pub slope: f64,
    pub power_exponent: Option<f64>,
    pub finite: bool,
    /// Power law with `rho` too close to 1 to decide summability.
    pub inconclusive: bool,
    /// First and last index of the fit window.
    pub window: (i64, i64),
    /// RMS residual of the selected fit in natural-log units.
    pub residual: f64,
}

impl Verdict {
    fn vanishing(window: (i64, i64)) -> Verdict {
        Verdict {
            class: VerdictClass::GeometricConvergent,
            slope: f64::NEG_INFINITY,
            power_exponent: None,
            finite: true,
            inconclusive: false,
            window,
            residual: 0.0,
        }
    }
}

/// Least squares by modified Gram-Schmidt. Returns coefficients and RMS residual.
fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = y.len();
    let k = columns.len();
    if m < k {
        return None;
    }
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            let d: f64 = (0..m).map(|t| q[j][t] * q[i][t]).sum();
            r[j][i] = d;
            let (head, tail) = q.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= d * b;
            }
        }
        let norm = q[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-14 * columns[i].iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300) {
            return None;
        }
        r[i][i] = norm;
        for v in q[i].iter_mut() {
            *v /= norm;
        }
    }
    let qty: Vec<f64> = (0..k).map(|i| (0..m).map(|t| q[i][t] * y[t]).sum()).collect();
    let mut coef = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * coef[j]).sum();
        coef[i] = (qty[i] - s) / r[i][i];
    }
    let rss: f64 = (0..m)
        .map(|t| {
            let fit: f64 = (0..k).map(|i| coef[i] * columns[i][t]).sum();
            (y[t] - fit).powi(2)
        })
        .sum();
    Some((coef, (rss / m as f64).sqrt()))
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Classifies the trailing `window_fraction` of the sequence (at least 8 points),
/// ignoring trailing zeros.
pub fn classify(seq: &SummandSequence, window_fraction: f64) -> Result<Verdict> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParams("window_fraction must lie in (0, 1]".into()));
    }
    let n = seq.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, have: n });
    }
    // Trailing zeros (underflow or levels lost in rounding) shorten the sequence.
    let used = seq.values.iter().rposition(|&v| v > UNDERFLOW).map_or(n, |e| e + 1).clamp(MIN_FIT_POINTS, n);
    let w = ((window_fraction * used as f64).ceil() as usize).clamp(MIN_FIT_POINTS, used);
    classify_window(seq, seq.indices[used - w])
}

/// Classifies using every point with index `≥ from_index`.
pub fn classify_window(seq: &SummandSequence, from_index: i64) -> Result<Verdict> {
    let n = seq.len();
    let start = seq.indices.iter().position(|&i| i >= from_index).unwrap_or(n);
    if n - start < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, have: n - start });
    }
    let last_index = seq.indices[n - 1];
    if seq.values.iter().all(|&v| v == 0.0) {
        return Ok(Verdict::vanishing((seq.indices[start], last_index)));
    }
    // Trailing underflow ends the window; interior zeros are skipped.
    let end = match seq.values[start..].iter().rposition(|&v| v > UNDERFLOW) {
        Some(e) => start + e + 1,
        None => return Ok(Verdict::vanishing((seq.indices[start], last_index))),
    };
    let pts: Vec<(f64, f64)> = (start..end)
        .filter(|&i| seq.values[i] > UNDERFLOW)
        .map(|i| (seq.indices[i] as f64, seq.values[i]))
        .collect();
    let window = (seq.indices[start], seq.indices[end - 1]);
    if pts.len() < MIN_FIT_POINTS {
        return Ok(Verdict::vanishing(window));
    }
    let pw = seq.q.power();
    let ones = vec![1.0; pts.len()];
    let idx: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let lnv: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (lin, res_a) = lstsq(&[ones.clone(), idx.clone()], &lnv)
        .ok_or_else(|| Error::NumericalLimit("degenerate linear fit".into()))?;
    let slope = lin[1] / (pw * std::f64::consts::LN_2);

    let power_fit = if idx[0] >= 1.0 {
        let lnj: Vec<f64> = idx.iter().map(|j| -j.ln()).collect();
        let inv: Vec<f64> = idx.iter().map(|j| 1.0 / j).collect();
        lstsq(&[ones, lnj, inv], &lnv)
    } else {
        None
    };
    let scale = lnv.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let power_like = slope.abs() <= SLOPE_THRESHOLD
        || power_fit.as_ref().is_some_and(|(_, res_b)| {
            slope.abs() <= POWER_SLOPE_CAP && res_a > 1e-9 * scale && *res_b < 0.1 * res_a
        });

    if power_like {
        let (rho, residual) = match &power_fit {
            Some((c, r)) => (c[1], *r),
            None => (0.0, res_a),
        };
        let (finite, inconclusive) = match seq.q {
            Q::Infinite => {
                let positive: Vec<f64> = seq.values.iter().cloned().filter(|&v| v > 0.0).collect();
                let wmax = pts.iter().map(|p| p.1).fold(0.0, f64::max);
                (wmax <= SUP_TOLERANCE * median(&positive), false)
            }
            Q::Finite(_) => (rho > 1.0, (rho - 1.0).abs() <= BORDERLINE_RHO),
        };
        return Ok(Verdict {
            class: VerdictClass::PowerLaw,
            slope,
            power_exponent: Some(rho),
            finite,
            inconclusive,
            window,
            residual,
        });
    }
    let class = if slope < 0.0 { VerdictClass::GeometricConvergent } else { VerdictClass::Divergent };
    Ok(Verdict {
        class,
        slope,
        power_exponent: None,
        finite: class == VerdictClass::GeometricConvergent,
        inconclusive: false,
        window,
        residual: res_a,
    })
}

/// Fit of `ln a_j^(1/q)` by the block profile of the iterated-logarithm functions,
/// `C + (lambda-1) ln L - sigma ln ln L + ln|lambda - sigma/ln L|` with `L = j ln 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogProfileFit {
    pub lambda: f64,
    pub sigma: f64,
    pub constant: f64,
    pub residual: f64,
    /// `lambda` from the plain model `C + (lambda-1) ln j - sigma ln ln j` with sigma held fixed.
    pub lambda_literal: Option<f64>,
    pub finite: bool,
    pub window: (i64, i64),
}

fn profile_residual(ln_l: &[f64], ln_ln_l: &[f64], y: &[f64], lambda: f64, sigma: f64) -> Option<(f64, f64)> {
    let mut sign = 0.0;
    let mut g = Vec::with_capacity(y.len());
    for (a, b) in ln_l.iter().zip(ln_ln_l) {
        let factor = lambda - sigma / a;
        if factor == 0.0 || (sign != 0.0 && factor.signum() != sign) {
            return None;
        }
        sign = factor.signum();
        g.push((lambda - 1.0) * a - sigma * b + factor.abs().ln());
    }
    let c = y.iter().zip(&g).map(|(y, g)| y - g).sum::<f64>() / y.len() as f64;
    let rss = y.iter().zip(&g).map(|(y, g)| (y - g - c).powi(2)).sum::<f64>();
    Some((rss, c))
}

fn critical_lambda(q: Q) -> f64 {
    match q {
        Q::Infinite => 1.0,
        Q::Finite(q) => 1.0 - 1.0 / q.value(),
    }
}

pub fn fit_log_profile(seq: &SummandSequence, window_fraction: f64, sigma_fixed: Option<f64>) -> Result<LogProfileFit> {
    let n = seq.len();
    let w = ((window_fraction * n as f64).ceil() as usize).clamp(MIN_FIT_POINTS, n.max(MIN_FIT_POINTS));
    if n < w {
        return Err(Error::TooFewPoints { needed: w, have: n });
    }
    let pts: Vec<(f64, f64)> = (n - w..n)
        .filter(|&i| seq.values[i] > UNDERFLOW && seq.indices[i] >= 2)
        .map(|i| (seq.indices[i] as f64, seq.values[i].ln() / seq.q.power()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_FIT_POINTS, have: pts.len() });
    }
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let ln_l: Vec<f64> = pts.iter().map(|p| (p.0 * std::f64::consts::LN_2).ln()).collect();
    let ln_ln_l: Vec<f64> = ln_l.iter().map(|v| v.ln()).collect();

    let search = |lam: (f64, f64), sig: (f64, f64), step: f64, best: &mut Option<(f64, f64, f64, f64)>| {
        let nl = ((lam.1 - lam.0) / step).round() as i64;
        let ns = ((sig.1 - sig.0) / step).round() as i64;
        for a in 0..=nl {
            let lambda = lam.0 + a as f64 * step;
            for b in 0..=ns {
                let sigma = sig.0 + b as f64 * step;
                if let Some((rss, c)) = profile_residual(&ln_l, &ln_ln_l, &y, lambda, sigma) {
                    if best.is_none_or(|bst| rss < bst.0) {
                        *best = Some((rss, lambda, sigma, c));
                    }
                }
            }
        }
    };
    let mut best = None;
    search((-1.0, 2.0), (0.0, 3.0), 0.005, &mut best);
    let (_, l0, s0, _) = best.ok_or_else(|| Error::NumericalLimit("log profile fit found no admissible parameters".into()))?;
    search((l0 - 0.005, l0 + 0.005), ((s0 - 0.005).max(0.0), s0 + 0.005), 0.0005, &mut best);
    let (rss, lambda, sigma, constant) = best.unwrap();

    let lambda_literal = sigma_fixed.and_then(|sf| {
        let ones = vec![1.0; pts.len()];
        let lnj: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
        let target: Vec<f64> = pts.iter().map(|p| p.1 + sf * p.0.ln().ln()).collect();
        lstsq(&[ones, lnj], &target).map(|(c, _)| c[1] + 1.0)
    });

    let lc = critical_lambda(seq.q);
    let finite = if lambda < lc - 0.15 {
        true
    } else if lambda > lc + 0.15 {
        false
    } else {
        in_uq(seq.q, &LogParams::new(Real::from_f64(lc), Real::from_f64(sigma)))?
    };
    Ok(LogProfileFit {
        lambda,
        sigma,
        constant,
        residual: (rss / y.len() as f64).sqrt(),
        lambda_literal,
        finite,
        window: (pts[0].0 as i64, pts[pts.len() - 1].0 as i64),
    })
}

/// Regularity index of a periodic profile in the Hölder-Zygmund scale.
fn profile_regularity(profile: &PeriodicProfile) -> f64 {
    match profile {
        PeriodicProfile::One => f64::INFINITY,
        PeriodicProfile::SinePower { exponent } => {
            if exponent.fract() == 0.0 {
                f64::INFINITY
            } else {
                2.0 * exponent
            }
        }
    }
}

/// Critical smoothness `(delta + (n+alpha)/p) / (beta+1)` of the oscillating family.
pub fn oscillatory_critical_index(params: &SpaceParams, delta: Real, beta: Real) -> Real {
    (delta + params.critical_index()) / (beta + Real::from_int(1))
}

/// The membership asserted by the theory, or `None` where it is silent.
pub fn predict_membership(spec: &FunctionSpec, params: &SpaceParams) -> Result<Option<bool>> {
    validate_space(params)?;
    let zero = Real::from_int(0);
    Ok(match spec.canonical() {
        FunctionSpec::Zero | FunctionSpec::LinearCutoff { .. } => Some(true),
        FunctionSpec::PowerLog { mu, delta, .. } => Some(si_funct_member(params, mu, delta)?),
        FunctionSpec::NegativePower { tau } => Some(si_funct_member(params, -tau, zero)?),
        FunctionSpec::LogLog { lambda, sigma } => {
            if lambda.is_zero() && sigma.is_zero() {
                Some(true)
            } else {
                let b = params.critical_index();
                match params.s.cmp_boundary(&b) {
                    std::cmp::Ordering::Less => Some(true),
                    std::cmp::Ordering::Greater => None,
                    std::cmp::Ordering::Equal => {
                        let member = in_uq(params.q, &LogParams { lambda, sigma })?;
                        if params.alpha.lt(&zero) && !member {
                            None
                        } else {
                            Some(member)
                        }
                    }
                }
            }
        }
        FunctionSpec::Oscillatory { delta, beta, profile } => {
            if profile == PeriodicProfile::One {
                return Ok(Some(si_funct_member(params, delta, zero)?));
            }
            let n = params.n_real();
            let cp = params.critical_index();
            let edge = (n / params.p).max(cp) + delta;
            let two_b1 = Real::from_int(2) * (beta + Real::from_int(1));
            let sigma = oscillatory_critical_index(params, delta, beta);
            let conditions = beta.gt(&zero)
                && params.alpha.lt(&(n * (params.p - Real::from_int(1))))
                && edge.gt(&zero)
                && edge.lt(&two_b1)
                && sigma.value() < profile_regularity(&profile);
            if !conditions {
                None
            } else {
                match params.s.cmp_boundary(&sigma) {
                    std::cmp::Ordering::Less => Some(true),
                    std::cmp::Ordering::Greater => Some(false),
                    std::cmp::Ordering::Equal => params.q.is_infinite().then_some(true),
                }
            }
        }
        FunctionSpec::Compose { .. } => unreachable!("canonical form has no nested composition"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fourier,
    Differences,
    Both,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fourier" | "lp" => Ok(Method::Fourier),
            "diff" | "differences" => Ok(Method::Differences),
            "both" => Ok(Method::Both),
            other => Err(Error::Parse(format!("unknown method '{other}' (fourier, diff, both)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fourier => "fourier",
            Method::Differences => "differences",
            Method::Both => "both",
        })
    }
}

/// Unscaled norms of one characterization; independent of `s` and `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawNorms {
    pub kind: SequenceKind,
    pub indices: Vec<i64>,
    pub norms: Vec<f64>,
    pub base_norm: Option<f64>,
    pub order: Option<u32>,
}

impl RawNorms {
    pub fn sequence(&self, params: &SpaceParams) -> SummandSequence {
        SummandSequence::from_norms(self.kind, self.indices.clone(), &self.norms, params.s.value(), params.q)
    }
}

pub fn difference_order_for(params: &SpaceParams, num: &Numerics) -> Result<DifferenceOrder> {
    match num.order {
        Some(m) => DifferenceOrder::new(m),
        None => Ok(default_order(params.s.value())),
    }
}

/// Computes the level norms of `f` for one single-route method.
pub fn raw_norms(f: &PointwiseFunction, params: &SpaceParams, method: Method, num: &Numerics) -> Result<RawNorms> {
    validate_space(params)?;
    num.check()?;
    match method {
        Method::Fourier => {
            if params.n != 1 {
                return Err(Error::InvalidParams("Besov summands are implemented for n = 1".into()));
            }
            let norms = fourier_block_norms(f, params.p.value(), params.alpha.value(), num.j_max, num)?;
            Ok(RawNorms {
                kind: SequenceKind::FrequencyLevels,
                indices: (0..=num.j_max as i64).collect(),
                norms,
                base_norm: None,
                order: None,
            })
        }
        Method::Differences => {
            if params.n != 1 {
                return Err(Error::InvalidParams("ball means are implemented for n = 1".into()));
            }
            let m = difference_order_for(params, num)?;
            check_order(params, m)?;
            let levels = TimeLevels::new(num.l_min, num.l_max)?;
            let (p, alpha) = (params.p.value(), params.alpha.value());
            Ok(RawNorms {
                kind: SequenceKind::TimeLevels,
                indices: levels.levels().map(i64::from).collect(),
                norms: resolved_norms(&ball_mean_levels(f, p, alpha, m, levels, num)?),
                base_norm: Some(base_norm(f, p, alpha, num)?),
                order: Some(m.get()),
            })
        }
        Method::Both => Err(Error::InvalidParams("raw norms need a single method".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summand {
    pub index: i64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub method: Method,
    pub summands: Vec<Summand>,
    pub verdict: Verdict,
    pub methods_agree: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub function: String,
    pub params: SpaceParams,
    pub method: Method,
    pub numerics: Numerics,
    pub summands: Vec<Summand>,
    pub base_norm: Option<f64>,
    pub quasi_norm: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_profile: Option<LogProfileFit>,
    pub predicted: Option<bool>,
    pub agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

impl ExperimentReport {
    /// The finiteness decision: the log-profile fit when present, else the verdict.
    pub fn finite(&self) -> bool {
        self.log_profile.as_ref().map_or(self.verdict.finite, |fit| fit.finite)
    }

    pub fn borderline(&self) -> bool {
        self.log_profile.is_none() && self.verdict.inconclusive
    }
}

fn summands(seq: &SummandSequence) -> Vec<Summand> {
    seq.indices.iter().zip(&seq.values).map(|(&index, &value)| Summand { index, value }).collect()
}

fn uses_log_profile(spec: &FunctionSpec, params: &SpaceParams, method: Method) -> bool {
    method == Method::Fourier
        && matches!(spec.canonical(), FunctionSpec::LogLog { .. })
        && params.s.eq_boundary(&params.critical_index())
}

/// Builds a report from norms already computed for `params.p`, `params.alpha`.
pub fn report_from_norms(
    spec: &FunctionSpec,
    params: &SpaceParams,
    method: Method,
    raw: &RawNorms,
    num: &Numerics,
) -> Result<ExperimentReport> {
    let seq = raw.sequence(params);
    let verdict = classify(&seq, num.window_fraction)?;
    let log_profile = if uses_log_profile(spec, params, method) && seq.values.iter().any(|&v| v > 0.0) {
        let sigma = match spec.canonical() {
            FunctionSpec::LogLog { sigma, .. } => Some(sigma.value()),
            _ => None,
        };
        Some(fit_log_profile(&seq, num.window_fraction, sigma)?)
    } else {
        None
    };
    let predicted = predict_membership(spec, params)?;
    let mut report = ExperimentReport {
        function: spec.to_string(),
        params: *params,
        method,
        numerics: *num,
        summands: summands(&seq),
        base_norm: raw.base_norm,
        quasi_norm: seq.truncated_norm(),
        verdict,
        log_profile,
        predicted,
        agree: None,
        cross_check: None,
    };
    report.agree = predicted.map(|p| p == report.finite());
    Ok(report)
}

/// Computes summands by the requested method(s), classifies them and compares
/// the outcome with the predicted membership. With `Both`, the differences
/// route is primary and the Fourier route is attached as a cross-check.
pub fn run_membership_experiment(
    spec: &FunctionSpec,
    params: &SpaceParams,
    method: Method,
    num: &Numerics,
) -> Result<ExperimentReport> {
    let f = spec.build()?;
    match method {
        Method::Fourier | Method::Differences => {
            let raw = raw_norms(&f, params, method, num)?;
            report_from_norms(spec, params, method, &raw, num)
        }
        Method::Both => {
            let (diff, four) = rayon::join(
                || raw_norms(&f, params, Method::Differences, num),
                || raw_norms(&f, params, Method::Fourier, num),
            );
            let mut report = report_from_norms(spec, params, Method::Differences, &diff?, num)?;
            let other = report_from_norms(spec, params, Method::Fourier, &four?, num)?;
            let decided = !report.borderline() && !other.borderline();
            let methods_agree = decided.then(|| report.finite() == other.finite());
            report.method = Method::Both;
            report.cross_check = Some(CrossCheck {
                method: Method::Fourier,
                summands: other.summands,
                verdict: other.verdict,
                methods_agree,
            });
            Ok(report)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub mu: f64,
    pub base: ExperimentReport,
    pub composed: ExperimentReport,
    /// `f` finite and `|f|^mu` divergent.
    pub signature: bool,
}

pub fn run_composition_experiment(
    spec: &FunctionSpec,
    params: &SpaceParams,
    mu: Real,
    method: Method,
    num: &Numerics,
) -> Result<CompositionReport> {
    if !mu.gt(&Real::from_int(0)) {
        return Err(Error::InvalidParams("μ > 0 required".into()));
    }
    let composed_spec = FunctionSpec::Compose { inner: Box::new(spec.clone()), mu };
    let base = run_membership_experiment(spec, params, method, num)?;
    let composed = run_membership_experiment(&composed_spec, params, method, num)?;
    let signature = base.finite() && !composed.finite();
    Ok(CompositionReport { mu: mu.value(), base, composed, signature })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub sigma: f64,
    /// `max_l 2^(l sigma) ||d_t f||`.
    pub sup_statistic: f64,
    /// Slope of `log2(t^-sigma ||d_t f||)` against `log2 t` on the trailing window.
    #[serde(serialize_with = "finite_or_null")]
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityScan {
    pub rows: Vec<ScanRow>,
    /// Interpolated `sigma` where the slope changes sign.
    pub critical_sigma: Option<f64>,
}

pub fn run_regularity_scan(
    f: &PointwiseFunction,
    params_base: &SpaceParams,
    sigma_grid: &[f64],
    m: DifferenceOrder,
    num: &Numerics,
) -> Result<RegularityScan> {
    if sigma_grid.iter().any(|&s| !(s > 0.0 && s < m.get() as f64)) {
        return Err(Error::InvalidParams("scan values must lie in (0, M)".into()));
    }
    validate_space(params_base)?;
    num.check()?;
    let levels = TimeLevels::new(num.l_min, num.l_max)?;
    let norms = resolved_norms(&ball_mean_levels(
        f,
        params_base.p.value(),
        params_base.alpha.value(),
        m,
        levels,
        num,
    )?);
    let ls: Vec<f64> = levels.levels().map(f64::from).collect();
    let used = norms.iter().rposition(|&v| v > UNDERFLOW).map_or(0, |e| e + 1);
    let w = ((num.window_fraction * used as f64).ceil() as usize).min(used);
    let tail: Vec<usize> = (used - w..used).filter(|&i| norms[i] > UNDERFLOW).collect();
    // Slope of log2 ||d_t f|| against log2 t = -l; the statistic's slope is that minus sigma.
    let base_slope = if tail.len() >= 2 {
        let ones = vec![1.0; tail.len()];
        let x: Vec<f64> = tail.iter().map(|&i| -ls[i]).collect();
        let y: Vec<f64> = tail.iter().map(|&i| norms[i].log2()).collect();
        lstsq(&[ones, x], &y).map_or(f64::NAN, |(c, _)| c[1])
    } else {
        f64::NEG_INFINITY
    };
    let rows: Vec<ScanRow> = sigma_grid
        .iter()
        .map(|&sigma| {
            let sup = ls.iter().zip(&norms).map(|(l, v)| (l * sigma).exp2() * v).fold(0.0, f64::max);
            let slope = if base_slope.is_finite() { base_slope - sigma } else { base_slope };
            ScanRow { sigma, sup_statistic: sup, slope }
        })
        .collect();
    let critical_sigma = rows.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.slope.is_finite() && b.slope.is_finite() && a.slope > 0.0 && b.slope <= 0.0)
            .then(|| a.sigma + (b.sigma - a.sigma) * a.slope / (a.slope - b.slope))
    });
    Ok(RegularityScan { rows, critical_sigma })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    S,
    Alpha,
    Mu,
    Delta,
    Q,
    P,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axis> {
        match s.trim() {
            "s" => Ok(Axis::S),
            "alpha" => Ok(Axis::Alpha),
            "mu" => Ok(Axis::Mu),
            "delta" => Ok(Axis::Delta),
            "q" => Ok(Axis::Q),
            "p" => Ok(Axis::P),
            other => Err(Error::InvalidParams(format!("unknown sweep axis '{other}' (s, alpha, mu, delta, q, p)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::S => "s",
            Axis::Alpha => "alpha",
            Axis::Mu => "mu",
            Axis::Delta => "delta",
            Axis::Q => "q",
            Axis::P => "p",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: Real,
    #[serde(serialize_with = "finite_or_null")]
    pub slope: f64,
    pub verdict: VerdictClass,
    pub finite: bool,
    pub predicted: Option<bool>,
    pub agree: Option<bool>,
}

/// `steps` equally spaced values from `lo` to `hi`, exact when both ends are.
pub fn axis_values(lo: Real, hi: Real, steps: usize) -> Result<Vec<Real>> {
    if steps < 2 {
        return Err(Error::InvalidParams("steps ≥ 2 required".into()));
    }
    let d = Real::from_int(steps as i64 - 1);
    Ok((0..steps).map(|i| lo + (hi - lo) * Real::from_int(i as i64) / d).collect())
}

fn sweep_point(
    spec: &FunctionSpec,
    params: &SpaceParams,
    axis: Axis,
    value: Real,
) -> Result<(FunctionSpec, SpaceParams)> {
    Ok(match axis {
        Axis::S => (spec.clone(), params.with_s(value)),
        Axis::Alpha => (spec.clone(), params.with_alpha(value)),
        Axis::Q => (spec.clone(), params.with_q(Q::Finite(value))),
        Axis::P => (spec.clone(), SpaceParams { p: value, ..*params }),
        Axis::Mu | Axis::Delta => (spec.with_param(&axis.to_string(), value)?, *params),
    })
}

/// Evaluates one row per axis value. Level norms are shared between rows that
/// differ only in `s` or `q`; rows come back in axis order.
pub fn sweep(
    spec: &FunctionSpec,
    params: &SpaceParams,
    axis: Axis,
    values: &[Real],
    method: Method,
    num: &Numerics,
) -> Result<Vec<SweepRow>> {
    if method == Method::Both {
        return Err(Error::InvalidParams("sweeps run a single method".into()));
    }
    let points: Vec<(FunctionSpec, SpaceParams)> =
        values.iter().map(|&v| sweep_point(spec, params, axis, v)).collect::<Result<_>>()?;
    for (_, p) in &points {
        validate_space(p)?;
    }
    let key = |s: &FunctionSpec, p: &SpaceParams| -> Result<String> {
        let order = match method {
            Method::Differences => difference_order_for(p, num)?.get(),
            _ => 0,
        };
        Ok(format!("{s}|{}|{}|{order}", p.p, p.alpha))
    };
    let mut jobs: BTreeMap<String, (FunctionSpec, SpaceParams)> = BTreeMap::new();
    for (s, p) in &points {
        jobs.entry(key(s, p)?).or_insert_with(|| (s.clone(), *p));
    }
    let jobs: Vec<(String, FunctionSpec, SpaceParams)> = jobs.into_iter().map(|(k, (s, p))| (k, s, p)).collect();
    let computed: Vec<Result<RawNorms>> = jobs
        .par_iter()
        .map(|(_, s, p)| raw_norms(&s.build()?, p, method, num))
        .collect();
    let mut cache = BTreeMap::new();
    for ((k, _, _), r) in jobs.into_iter().zip(computed) {
        cache.insert(k, r?);
    }
    points
        .iter()
        .zip(values)
        .map(|((s, p), &value)| {
            let raw = &cache[&key(s, p)?];
            let rep = report_from_norms(s, p, method, raw, num)?;
            Ok(SweepRow {
                axis,
                value,
                slope: rep.verdict.slope,
                verdict: rep.verdict.class,
                finite: rep.finite(),
                predicted: rep.predicted,
                agree: rep.agree,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: Vec<f64>, q: Q) -> SummandSequence {
        let idx = (1..=values.len() as i64).collect();
        SummandSequence::new(SequenceKind::FrequencyLevels, idx, values, q).unwrap()
    }

    #[test]
    fn geometric() {
        let v = seq((1..=40).map(|j| 2f64.powi(-j)).collect(), Q::finite(1.0));
        let r = classify(&v, 0.5).unwrap();
        assert_eq!(r.class, VerdictClass::GeometricConvergent);
        assert!((r.slope + 1.0).abs() < 1e-9);
        assert!(r.finite);
    }

    #[test]
    fn power_laws() {
        let v = seq((1..=40).map(|j| (j as f64).powi(-2)).collect(), Q::finite(1.0));
        let r = classify(&v, 0.5).unwrap();
        assert_eq!(r.class, VerdictClass::PowerLaw);
        assert!((r.power_exponent.unwrap() - 2.0).abs() < 0.1);
        assert!(r.finite);
        let c = seq(vec![1.0; 40], Q::finite(2.0));
        let r = classify(&c, 0.5).unwrap();
        assert_eq!(r.class, VerdictClass::PowerLaw);
        assert!(r.power_exponent.unwrap().abs() < 1e-9);
        assert!(!r.finite);
        let r = classify(&seq(vec![1.0; 40], Q::Infinite), 0.5).unwrap();
        assert!(r.finite);
    }

    #[test]
    fn divergent_and_zero() {
        let v = seq((1..=40).map(|j| 1.3f64.powi(j)).collect(), Q::finite(2.0));
        let r = classify(&v, 0.5).unwrap();
        assert_eq!(r.class, VerdictClass::Divergent);
        assert!(!r.finite);
        let z = seq(vec![0.0; 12], Q::finite(2.0));
        let r = classify(&z, 0.5).unwrap();
        assert_eq!(r.slope, f64::NEG_INFINITY);
        assert!(r.finite);
        assert!(serde_json::to_string(&r).unwrap().contains("\"slope\":null"));
        assert!(matches!(classify(&seq(vec![1.0; 5], Q::Infinite), 0.5), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn underflow_clamps_window() {
        let mut v: Vec<f64> = (1..=40).map(|j| 2f64.powi(-4 * j)).collect();
        for x in v.iter_mut().skip(30) {
            *x = 0.0;
        }
        let r = classify(&seq(v, Q::finite(1.0)), 0.5).unwrap();
        assert_eq!(r.class, VerdictClass::GeometricConvergent);
        assert_eq!(r.window.1, 30);
    }

    #[test]
    fn log_profile_recovers_parameters() {
        let (lambda, sigma) = (0.5, 0.9);
        let values = (1..=40)
            .map(|j| {
                if j < 2 {
                    return 1.0;
                }
                let l = j as f64 * std::f64::consts::LN_2;
                let e = l.powf(lambda - 1.0) * l.ln().powf(-sigma) * (lambda - sigma / l.ln()).abs();
                (3.0 * e).powi(2)
            })
            .collect();
        let fit = fit_log_profile(&seq(values, Q::finite(2.0)), 0.5, Some(sigma)).unwrap();
        assert!((fit.lambda - lambda).abs() < 1e-3, "{fit:?}");
        assert!((fit.sigma - sigma).abs() < 1e-2, "{fit:?}");
        assert!(fit.finite);
    }

    #[test]
    fn predictions() {
        let p = |s: f64| SpaceParams::from_f64(1, 2.0, Some(2.0), s, 0.0).unwrap();
        let f: FunctionSpec = "f_power_log:mu=0.5,delta=0".parse().unwrap();
        assert_eq!(predict_membership(&f, &p(0.7)).unwrap(), Some(true));
        assert_eq!(predict_membership(&f, &p(1.3)).unwrap(), Some(false));
        let lin: FunctionSpec = "f_linear_cutoff|pow:mu=0.5".parse().unwrap();
        assert_eq!(predict_membership(&lin, &p(0.9)).unwrap(), Some(true));
        assert_eq!(predict_membership(&lin, &p(1.1)).unwrap(), Some(false));
        let osc: FunctionSpec = "f_oscillatory:delta=1,beta=1,mu=0.5".parse().unwrap();
        assert_eq!(predict_membership(&osc, &p(0.7)).unwrap(), Some(true));
        assert_eq!(predict_membership(&osc, &p(0.8)).unwrap(), Some(false));
    }
}
