//! Space parameters `(n, p, q, s, alpha)` and the arithmetic predicates on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fine index: a positive real or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Q {
    Finite(Real),
    Infinite,
}

impl Q {
    pub fn finite(v: f64) -> Q {
        Q::Finite(Real::from_f64(v))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Q::Infinite)
    }

    /// Exponent applied to the summands: `q` itself, or 1 for `q = inf`.
    pub fn power(&self) -> f64 {
        match self {
            Q::Finite(r) => r.value(),
            Q::Infinite => 1.0,
        }
    }

    /// `1/q`, zero for `q = inf`.
    pub fn reciprocal(&self) -> Real {
        match self {
            Q::Finite(r) => Real::from_int(1) / *r,
            Q::Infinite => Real::from_int(0),
        }
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Finite(r) => write!(f, "{r}"),
            Q::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Q {
    type Err = Error;
    fn from_str(s: &str) -> Result<Q> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Q::Infinite),
            t => Ok(Q::Finite(t.parse()?)),
        }
    }
}

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Q::Finite(r) => r.serialize(serializer),
            Q::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Q::Finite(Real::from_f64(v))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub n: u32,
    pub p: Real,
    pub q: Q,
    pub s: Real,
    pub alpha: Real,
}

impl SpaceParams {
    pub fn new(n: u32, p: Real, q: Q, s: Real, alpha: Real) -> Result<SpaceParams> {
        let sp = SpaceParams { n, p, q, s, alpha };
        sp.check_fields()?;
        Ok(sp)
    }

    /// Convenience constructor from floats, `q = None` meaning infinity.
    pub fn from_f64(n: u32, p: f64, q: Option<f64>, s: f64, alpha: f64) -> Result<SpaceParams> {
        let q = match q {
            Some(v) => Q::finite(v),
            None => Q::Infinite,
        };
        SpaceParams::new(n, p.into(), q, s.into(), alpha.into())
    }

    pub fn check_fields(&self) -> Result<()> {
        let zero = Real::from_int(0);
        if self.n < 1 {
            return Err(Error::InvalidParams("n < 1".into()));
        }
        if !self.p.gt(&zero) {
            return Err(Error::InvalidParams("p ≤ 0".into()));
        }
        if let Q::Finite(q) = self.q {
            if !q.gt(&zero) {
                return Err(Error::InvalidParams("q ≤ 0".into()));
            }
        }
        Ok(())
    }

    pub fn n_real(&self) -> Real {
        Real::from_int(self.n as i64)
    }

    /// `(n + alpha)/p`, the critical smoothness of the power functions.
    pub fn critical_index(&self) -> Real {
        (self.n_real() + self.alpha) / self.p
    }

    pub fn with_s(&self, s: Real) -> SpaceParams {
        SpaceParams { s, ..*self }
    }

    pub fn with_alpha(&self, alpha: Real) -> SpaceParams {
        SpaceParams { alpha, ..*self }
    }

    pub fn with_q(&self, q: Q) -> SpaceParams {
        SpaceParams { q, ..*self }
    }
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={},p={},q={},alpha={},s={}", self.n, self.p, self.q, self.alpha, self.s)
    }
}

/// Parses `n=1,p=2,q=inf,alpha=0,s=0.7`; `n` defaults to 1 and `alpha` to 0.
impl FromStr for SpaceParams {
    type Err = Error;
    fn from_str(text: &str) -> Result<SpaceParams> {
        let mut n = 1u32;
        let mut p = None;
        let mut q = None;
        let mut s = None;
        let mut alpha = Real::from_int(0);
        for item in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
            match k.trim() {
                "n" => n = v.trim().parse().map_err(|_| Error::Parse(format!("bad n '{v}'")))?,
                "p" => p = Some(v.parse::<Real>()?),
                "q" => q = Some(v.parse::<Q>()?),
                "s" => s = Some(v.parse::<Real>()?),
                "alpha" | "a" => alpha = v.parse()?,
                other => return Err(Error::Parse(format!("unknown space key '{other}'"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let q = q.ok_or_else(|| Error::Parse("missing q".into()))?;
        let s = s.ok_or_else(|| Error::Parse("missing s".into()))?;
        Ok(SpaceParams { n, p, q, s, alpha })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedIndices {
    pub sigma_p: Real,
    pub alpha0: Real,
    pub lower_bound: Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    pub lambda: Real,
    pub sigma: Real,
}

impl LogParams {
    pub fn new(lambda: impl Into<Real>, sigma: impl Into<Real>) -> LogParams {
        LogParams { lambda: lambda.into(), sigma: sigma.into() }
    }
}

/// Standing assumptions: `1 ≤ p < ∞`, `alpha > -n`, `s > max(0, (alpha+n)/p - n)`.
pub fn validate_space(params: &SpaceParams) -> Result<()> {
    let zero = Real::from_int(0);
    let one = Real::from_int(1);
    if params.n < 1 {
        return Err(Error::InvalidParams("n < 1".into()));
    }
    if !params.p.value().is_finite() {
        return Err(Error::InvalidParams("p = ∞".into()));
    }
    if params.p.lt(&one) {
        return Err(Error::InvalidParams("p < 1".into()));
    }
    if let Q::Finite(q) = params.q {
        if !q.gt(&zero) {
            return Err(Error::InvalidParams("q ≤ 0".into()));
        }
    }
    if params.alpha.le(&-params.n_real()) {
        return Err(Error::InvalidParams("α ≤ −n".into()));
    }
    let bound = (params.alpha + params.n_real()) / params.p - params.n_real();
    if params.s.le(&zero) {
        return Err(Error::InvalidParams("s ≤ 0".into()));
    }
    if params.s.le(&bound) {
        return Err(Error::InvalidParams("s ≤ (α+n)/p − n".into()));
    }
    Ok(())
}

pub fn derived_indices(params: &SpaceParams) -> DerivedIndices {
    let n = params.n_real();
    let zero = Real::from_int(0);
    let n_over_p = n / params.p;
    let sigma_p = (n_over_p - n).max(zero);
    let alpha0 = n - n_over_p;
    let lower_bound = sigma_p.max(params.alpha / params.p - alpha0);
    DerivedIndices { sigma_p, alpha0, lower_bound }
}

/// Membership of `theta |x|^mu (-log|x|)^(-delta)` in the space.
pub fn si_funct_member(params: &SpaceParams, mu: Real, delta: Real) -> Result<bool> {
    let zero = Real::from_int(0);
    if mu.is_zero() {
        return Err(Error::InvalidParams("μ = 0 is not covered (use the log-log family)".into()));
    }
    if delta.lt(&zero) {
        return Err(Error::InvalidParams("δ < 0".into()));
    }
    let boundary = params.critical_index() + mu;
    Ok(match params.s.cmp_boundary(&boundary) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            if delta.gt(&zero) {
                match params.q {
                    Q::Infinite => true,
                    Q::Finite(q) => (q * delta).gt(&Real::from_int(1)),
                }
            } else {
                params.q.is_infinite()
            }
        }
    })
}

/// Membership of `(lambda, sigma)` in `U_q`, `1 ≤ q ≤ ∞`.
pub fn in_uq(q: Q, lp: &LogParams) -> Result<bool> {
    let zero = Real::from_int(0);
    let one = Real::from_int(1);
    match q {
        Q::Infinite => Ok(lp.lambda.eq_boundary(&one) && lp.sigma.ge(&zero) || lp.lambda.lt(&one)),
        Q::Finite(qv) => {
            if qv.lt(&one) {
                return Err(Error::InvalidParams("q < 1".into()));
            }
            if qv.eq_boundary(&one) {
                return Ok(lp.lambda.is_zero() && lp.sigma.gt(&zero) || lp.lambda.lt(&zero));
            }
            let lc = one - one / qv;
            Ok(lp.lambda.eq_boundary(&lc) && lp.sigma.gt(&(one / qv)) || lp.lambda.lt(&lc))
        }
    }
}

/// Individual inequalities of the embedding theorem, evaluated for
/// `source ↪ target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    /// `s_target - (n+alpha_target)/p_target` minus the same for the source; must be ≤ 0.
    pub differential_gap: f64,
    pub smoothness_ok: bool,
    pub integrability_ok: bool,
    pub weight_ok: bool,
    pub holds: bool,
}

pub fn embedding_check(source: &SpaceParams, target: &SpaceParams) -> Result<EmbeddingCheck> {
    if source.n != target.n {
        return Err(Error::InvalidParams("embedding requires equal n".into()));
    }
    if source.q != target.q {
        return Err(Error::InvalidParams("embedding requires equal q".into()));
    }
    let lhs = target.s - target.critical_index();
    let rhs = source.s - source.critical_index();
    let smoothness_ok = lhs.le(&rhs);
    let integrability_ok = source.p.le(&target.p);
    let weight_ok = (source.alpha / source.p).ge(&(target.alpha / target.p));
    Ok(EmbeddingCheck {
        differential_gap: (lhs - rhs).value(),
        smoothness_ok,
        integrability_ok,
        weight_ok,
        holds: smoothness_ok && integrability_ok && weight_ok,
    })
}

pub fn embedding_holds(source: &SpaceParams, target: &SpaceParams) -> Result<bool> {
    Ok(embedding_check(source, target)?.holds)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub assumptions_hold: bool,
    pub critical_index: f64,
    /// Hypotheses of the necessity result for `s < mu + (1+alpha)/p` (n = 1, finite p, q, mu not an even integer).
    pub result1_applies: bool,
    pub result1_bound: f64,
    /// True when `s ≥ mu + (1+alpha)/p`: the composition map must fail.
    pub result1_map_fails: bool,
    /// `alpha ≥ 0`, `mu > 1`, and `s < (n+alpha)/p` or (`s = (n+alpha)/p`, `q > 1`).
    pub result2_i_applies: bool,
    pub result2_i_critical_case: bool,
    /// Admissible `tau` window `((b-s)/mu, b-s)` for the unbounded counterexample when `s < b`.
    pub result2_i_tau_window: Option<(f64, f64)>,
    /// Condition `mu(1-1/q) > 1-1/beta` of the critical case, read with `beta = q`.
    pub result2_i_log_condition: Option<bool>,
    /// `mu < 1` and `s > (n+alpha)/p`.
    pub result2_ii_applies: bool,
    /// Admissible `delta` window `(s-b, (s-b)/mu)` for the bounded counterexample.
    pub result2_ii_delta_window: Option<(f64, f64)>,
    /// `n = 1`, `mu < 1`, `alpha/(p mu) ≤ s ≤ (1+alpha)/p`, `0 < alpha < p-1`.
    pub result3_applies: bool,
    /// Whenever a theorem applies, bounded data alone cannot make the map act.
    pub bounded_data_insufficient: bool,
}

pub fn theorem_boundaries(params: &SpaceParams, mu: Real) -> BoundaryReport {
    let zero = Real::from_int(0);
    let one = Real::from_int(1);
    let assumptions_hold = validate_space(params).is_ok();
    let b = params.critical_index();
    let mu_f = mu.value();
    let mu_even_int = mu_f.fract() == 0.0 && (mu_f as i64) % 2 == 0;

    let n1 = params.n == 1;
    let r1_bound = mu + (one + params.alpha) / params.p;
    let result1_applies = assumptions_hold && n1 && !params.q.is_infinite() && !mu_even_int;
    let result1_map_fails = params.s.ge(&r1_bound);

    let alpha_nonneg = params.alpha.ge(&zero);
    let below = params.s.lt(&b);
    let critical = params.s.eq_boundary(&b)
        && match params.q {
            Q::Infinite => true,
            Q::Finite(q) => q.gt(&one),
        };
    let result2_i_applies = assumptions_hold && alpha_nonneg && mu.gt(&one) && (below || critical);
    let result2_i_tau_window = if below && mu.gt(&zero) {
        let gap = (b - params.s).value();
        Some((gap / mu_f, gap))
    } else {
        None
    };
    let result2_i_log_condition = if critical {
        let inv_q = params.q.reciprocal();
        Some((mu * (one - inv_q)).gt(&(one - inv_q)))
    } else {
        None
    };

    let result2_ii_applies = assumptions_hold && mu.lt(&one) && params.s.gt(&b);
    let result2_ii_delta_window = if params.s.gt(&b) && mu.gt(&zero) {
        let gap = (params.s - b).value();
        Some((gap, gap / mu_f))
    } else {
        None
    };

    let upper = (one + params.alpha) / params.p;
    let lower = params.alpha / (params.p * mu);
    let result3_applies = assumptions_hold
        && n1
        && mu.lt(&one)
        && mu.gt(&zero)
        && lower.le(&params.s)
        && params.s.le(&upper)
        && params.alpha.gt(&zero)
        && params.alpha.lt(&(params.p - one));

    BoundaryReport {
        assumptions_hold,
        critical_index: b.value(),
        result1_applies,
        result1_bound: r1_bound.value(),
        result1_map_fails,
        result2_i_applies,
        result2_i_critical_case: critical,
        result2_i_tau_window,
        result2_i_log_condition,
        result2_ii_applies,
        result2_ii_delta_window,
        result3_applies,
        bounded_data_insufficient: result2_i_applies || result2_ii_applies || result3_applies,
    }
}
