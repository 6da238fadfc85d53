//! Closed-form test functions and the composition `f ↦ |f|^mu`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bump::smooth_step;
use crate::error::{Error, Result};
use crate::params::LogParams;
use crate::scalar::Real;

pub const E_M2: f64 = 0.1353352832366127; // e^-2
pub const E_M3: f64 = 0.049787068367863944; // e^-3

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// What the evaluator looks like away from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    /// Smooth on `|x| > 0`; only the origin is singular.
    SmoothAwayFromOrigin,
    /// Oscillates like `g(|x|^-beta)` near the origin.
    Oscillating { beta: f64 },
    /// Nothing known.
    General,
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct PointwiseFunction {
    eval: Evaluator,
    pub support_radius: f64,
    pub label: String,
    pub parity: Parity,
    pub regularity: Regularity,
}

impl fmt::Debug for PointwiseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointwiseFunction")
            .field("label", &self.label)
            .field("support_radius", &self.support_radius)
            .field("parity", &self.parity)
            .field("regularity", &self.regularity)
            .finish()
    }
}

impl PointwiseFunction {
    /// Wraps an arbitrary evaluator. Values at `|x| ≥ support_radius` are
    /// forced to zero.
    pub fn new(
        label: impl Into<String>,
        support_radius: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> PointwiseFunction {
        let r = support_radius;
        PointwiseFunction {
            eval: Arc::new(move |x| if x.abs() >= r { 0.0 } else { f(x) }),
            support_radius,
            label: label.into(),
            parity: Parity::None,
            regularity: Regularity::General,
        }
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn zero() -> PointwiseFunction {
        PointwiseFunction {
            eval: Arc::new(|_| 0.0),
            support_radius: 0.0,
            label: "zero".into(),
            parity: Parity::Even,
            regularity: Regularity::SmoothAwayFromOrigin,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support_radius == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffTheta {
    pub vartheta: f64,
    pub inner_radius: f64,
}

impl Default for CutoffTheta {
    fn default() -> Self {
        CutoffTheta { vartheta: E_M2, inner_radius: E_M3 }
    }
}

impl CutoffTheta {
    pub fn new(vartheta: f64, inner_radius: f64) -> Result<CutoffTheta> {
        if !(0.0 < inner_radius && inner_radius < vartheta && vartheta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "cutoff needs 0 < inner_radius < vartheta < 1, got {inner_radius}, {vartheta}"
            )));
        }
        Ok(CutoffTheta { vartheta, inner_radius })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        smooth_step(x.abs(), self.inner_radius, self.vartheta)
    }
}

/// `rho(x) = 1` for `x ≤ e^-3`, `0` for `x ≥ e^-2`.
#[inline]
pub fn cutoff_rho(x: f64) -> f64 {
    smooth_step(x, E_M3, E_M2)
}

/// `theta(x) |x|^mu (-log|x|)^(-delta)`.
pub fn f_power_log(mu: f64, delta: f64, theta: CutoffTheta) -> Result<PointwiseFunction> {
    if mu == 0.0 && delta == 0.0 {
        return Err(Error::InvalidParams("μ² + δ² > 0 required".into()));
    }
    if mu == 0.0 {
        return Err(Error::InvalidParams("μ = 0 with δ ≠ 0 belongs to the log-log family".into()));
    }
    if delta < 0.0 {
        return Err(Error::InvalidParams("δ < 0".into()));
    }
    let theta = CutoffTheta::new(theta.vartheta, theta.inner_radius)?;
    let f = move |x: f64| {
        let a = x.abs();
        if a == 0.0 {
            return if mu > 0.0 { 0.0 } else { f64::INFINITY };
        }
        let mut v = theta.eval(a) * a.powf(mu);
        if delta != 0.0 {
            v *= (-a.ln()).powf(-delta);
        }
        v
    };
    Ok(PointwiseFunction::new(format!("f_power_log:mu={mu},delta={delta}"), theta.vartheta, f)
        .with_parity(Parity::Even)
        .with_regularity(Regularity::SmoothAwayFromOrigin))
}

/// `|log|x||^lambda |log|log|x|||^(-sigma) rho(|x|)`.
pub fn f_log_log(lp: &LogParams) -> PointwiseFunction {
    let lambda = lp.lambda.value();
    let sigma = lp.sigma.value();
    let f = move |x: f64| {
        let a = x.abs();
        if a == 0.0 {
            return match (lambda.partial_cmp(&0.0), sigma.partial_cmp(&0.0)) {
                (Some(std::cmp::Ordering::Greater), _) => f64::INFINITY,
                (Some(std::cmp::Ordering::Less), _) => 0.0,
                (_, Some(std::cmp::Ordering::Greater)) => 0.0,
                (_, Some(std::cmp::Ordering::Less)) => f64::INFINITY,
                _ => 1.0,
            };
        }
        let l = a.ln().abs();
        cutoff_rho(a) * l.powf(lambda) * l.ln().abs().powf(-sigma)
    };
    PointwiseFunction::new(format!("f_log_log:lambda={lambda},sigma={sigma}"), E_M2, f)
        .with_parity(Parity::Even)
        .with_regularity(Regularity::SmoothAwayFromOrigin)
}

/// Bounded periodic profiles `g` for the oscillating family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicProfile {
    /// `g ≡ 1`.
    One,
    /// `g(t) = (sin^2(t/2))^exponent`.
    SinePower { exponent: f64 },
}

impl PeriodicProfile {
    /// `g_mu(t) = (sin^2(t/2))^(1/mu)`.
    pub fn g_mu(mu: f64) -> PeriodicProfile {
        PeriodicProfile::SinePower { exponent: 1.0 / mu }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            PeriodicProfile::One => 1.0,
            PeriodicProfile::SinePower { exponent } => {
                let s = (0.5 * t).sin();
                let s2 = s * s;
                if exponent == 1.0 {
                    s2
                } else if s2 == 0.0 {
                    0.0
                } else {
                    s2.powf(exponent)
                }
            }
        }
    }
}

/// `|x|^delta g(|x|^-beta) rho(|x|)`.
pub fn f_oscillatory(delta: f64, beta: f64, g: PeriodicProfile) -> Result<PointwiseFunction> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams("β ≤ 0".into()));
    }
    let f = move |x: f64| {
        let a = x.abs();
        if a == 0.0 {
            return if delta > 0.0 { 0.0 } else { f64::INFINITY };
        }
        a.powf(delta) * g.eval(a.powf(-beta)) * cutoff_rho(a)
    };
    let regularity = match g {
        PeriodicProfile::One => Regularity::SmoothAwayFromOrigin,
        _ => Regularity::Oscillating { beta },
    };
    Ok(PointwiseFunction::new(format!("f_oscillatory:delta={delta},beta={beta}"), E_M2, f)
        .with_parity(Parity::Even)
        .with_regularity(regularity))
}

/// `x theta(|x|)`.
pub fn f_linear_cutoff(theta: CutoffTheta) -> Result<PointwiseFunction> {
    let theta = CutoffTheta::new(theta.vartheta, theta.inner_radius)?;
    Ok(PointwiseFunction::new("f_linear_cutoff", theta.vartheta, move |x| x * theta.eval(x))
        .with_parity(Parity::Odd)
        .with_regularity(Regularity::SmoothAwayFromOrigin))
}

/// `rho(|x|) |x|^-tau`.
pub fn f_negative_power(tau: f64) -> Result<PointwiseFunction> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParams("τ ≤ 0".into()));
    }
    let f = move |x: f64| {
        let a = x.abs();
        if a == 0.0 {
            return f64::INFINITY;
        }
        cutoff_rho(a) * a.powf(-tau)
    };
    Ok(PointwiseFunction::new(format!("f_negative_power:tau={tau}"), E_M2, f)
        .with_parity(Parity::Even)
        .with_regularity(Regularity::SmoothAwayFromOrigin))
}

/// `x ↦ |f(x)|^mu`, computed as `exp(mu log|f|)` with `0 ↦ 0`.
pub fn compose_power(f: &PointwiseFunction, mu: f64) -> Result<PointwiseFunction> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParams("μ ≤ 0".into()));
    }
    let inner = f.eval.clone();
    let g = move |x: f64| {
        let v = inner(x).abs();
        if v == 0.0 {
            0.0
        } else if mu == 1.0 {
            v
        } else {
            (mu * v.ln()).exp()
        }
    };
    let parity = if f.parity == Parity::None { Parity::None } else { Parity::Even };
    Ok(PointwiseFunction::new(format!("{}|pow:mu={mu}", f.label), f.support_radius, g)
        .with_parity(parity)
        .with_regularity(f.regularity))
}

/// A catalog function addressed by name and parameters, e.g.
/// `f_power_log:mu=0.5,delta=0` or `f_linear_cutoff|pow:mu=0.5`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero,
    PowerLog { mu: Real, delta: Real, theta: CutoffTheta },
    LogLog { lambda: Real, sigma: Real },
    Oscillatory { delta: Real, beta: Real, profile: PeriodicProfile },
    LinearCutoff { theta: CutoffTheta },
    NegativePower { tau: Real },
    Compose { inner: Box<FunctionSpec>, mu: Real },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<PointwiseFunction> {
        Ok(match self {
            FunctionSpec::Zero => PointwiseFunction::zero(),
            FunctionSpec::PowerLog { mu, delta, theta } => f_power_log(mu.value(), delta.value(), *theta)?,
            FunctionSpec::LogLog { lambda, sigma } => f_log_log(&LogParams { lambda: *lambda, sigma: *sigma }),
            FunctionSpec::Oscillatory { delta, beta, profile } => {
                f_oscillatory(delta.value(), beta.value(), *profile)?
            }
            FunctionSpec::LinearCutoff { theta } => f_linear_cutoff(*theta)?,
            FunctionSpec::NegativePower { tau } => f_negative_power(tau.value())?,
            FunctionSpec::Compose { inner, mu } => compose_power(&inner.build()?, mu.value())?,
        }
        .relabel(self.to_string()))
    }

    /// Rewrites `|f|^mu` of a catalog function as the catalog function it
    /// equals up to a smooth cutoff factor.
    pub fn canonical(&self) -> FunctionSpec {
        let FunctionSpec::Compose { inner, mu } = self else {
            return self.clone();
        };
        let mu = *mu;
        match inner.canonical() {
            FunctionSpec::Zero => FunctionSpec::Zero,
            FunctionSpec::PowerLog { mu: m, delta, theta } => {
                FunctionSpec::PowerLog { mu: m * mu, delta: delta * mu, theta }
            }
            FunctionSpec::LogLog { lambda, sigma } => FunctionSpec::LogLog { lambda: lambda * mu, sigma: sigma * mu },
            FunctionSpec::Oscillatory { delta, beta, profile } => FunctionSpec::Oscillatory {
                delta: delta * mu,
                beta,
                profile: match profile {
                    PeriodicProfile::One => PeriodicProfile::One,
                    PeriodicProfile::SinePower { exponent } => {
                        PeriodicProfile::SinePower { exponent: exponent * mu.value() }
                    }
                },
            },
            FunctionSpec::LinearCutoff { theta } => {
                FunctionSpec::PowerLog { mu, delta: Real::from_int(0), theta }
            }
            FunctionSpec::NegativePower { tau } => FunctionSpec::NegativePower { tau: tau * mu },
            FunctionSpec::Compose { .. } => unreachable!("canonical form has no nested composition"),
        }
    }

    /// Replaces one named numeric parameter (sweep axes `mu`, `delta`, ...).
    pub fn with_param(&self, key: &str, value: Real) -> Result<FunctionSpec> {
        let mut out = self.clone();
        let slot: &mut Real = match (&mut out, key) {
            (FunctionSpec::PowerLog { mu, .. }, "mu") => mu,
            (FunctionSpec::PowerLog { delta, .. }, "delta") => delta,
            (FunctionSpec::LogLog { lambda, .. }, "lambda") => lambda,
            (FunctionSpec::LogLog { sigma, .. }, "sigma") => sigma,
            (FunctionSpec::Oscillatory { delta, .. }, "delta") => delta,
            (FunctionSpec::Oscillatory { beta, .. }, "beta") => beta,
            (FunctionSpec::NegativePower { tau, .. }, "tau") => tau,
            (FunctionSpec::Compose { mu, .. }, "mu") => mu,
            (FunctionSpec::Compose { inner, mu }, k) => {
                let new_inner = inner.with_param(k, value)?;
                return Ok(FunctionSpec::Compose { inner: Box::new(new_inner), mu: *mu });
            }
            _ => return Err(Error::InvalidParams(format!("function has no parameter '{key}'"))),
        };
        *slot = value;
        Ok(out)
    }
}

impl PointwiseFunction {
    fn relabel(mut self, label: String) -> Self {
        self.label = label;
        self
    }
}

fn fmt_theta(f: &mut fmt::Formatter<'_>, theta: &CutoffTheta, first: bool) -> fmt::Result {
    if *theta != CutoffTheta::default() {
        let sep = if first { ":" } else { "," };
        write!(f, "{sep}vartheta={},inner={}", theta.vartheta, theta.inner_radius)?;
    }
    Ok(())
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Zero => write!(f, "zero"),
            FunctionSpec::PowerLog { mu, delta, theta } => {
                write!(f, "f_power_log:mu={mu},delta={delta}")?;
                fmt_theta(f, theta, false)
            }
            FunctionSpec::LogLog { lambda, sigma } => write!(f, "f_log_log:lambda={lambda},sigma={sigma}"),
            FunctionSpec::Oscillatory { delta, beta, profile } => {
                write!(f, "f_oscillatory:delta={delta},beta={beta}")?;
                match profile {
                    PeriodicProfile::One => write!(f, ",g=one"),
                    PeriodicProfile::SinePower { exponent } => write!(f, ",exponent={exponent}"),
                }
            }
            FunctionSpec::LinearCutoff { theta } => {
                write!(f, "f_linear_cutoff")?;
                fmt_theta(f, theta, true)
            }
            FunctionSpec::NegativePower { tau } => write!(f, "f_negative_power:tau={tau}"),
            FunctionSpec::Compose { inner, mu } => write!(f, "{inner}|pow:mu={mu}"),
        }
    }
}

struct Kv<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
    used: Vec<bool>,
}

impl<'a> Kv<'a> {
    fn parse(name: &'a str, body: &'a str) -> Result<Kv<'a>> {
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in '{item}'")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let used = vec![false; pairs.len()];
        Ok(Kv { name, pairs, used })
    }

    fn get(&mut self, key: &str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        self.used[i] = true;
        Some(self.pairs[i].1)
    }

    fn real(&mut self, key: &str) -> Result<Option<Real>> {
        self.get(key).map(str::parse).transpose()
    }

    fn required(&mut self, key: &str) -> Result<Real> {
        self.real(key)?
            .ok_or_else(|| Error::Parse(format!("{} requires parameter '{key}'", self.name)))
    }

    fn theta(&mut self) -> Result<CutoffTheta> {
        let d = CutoffTheta::default();
        let vt = self.real("vartheta")?.map_or(d.vartheta, |r| r.value());
        let inner = self.real("inner")?.map_or(d.inner_radius.min(0.5 * vt), |r| r.value());
        CutoffTheta::new(vt, inner)
    }

    fn finish(self) -> Result<()> {
        if let Some(i) = self.used.iter().position(|u| !u) {
            return Err(Error::Parse(format!("unknown parameter '{}' for {}", self.pairs[i].0, self.name)));
        }
        Ok(())
    }
}

fn parse_base(text: &str) -> Result<FunctionSpec> {
    let (name, body) = text.split_once(':').unwrap_or((text, ""));
    let name = name.trim();
    let canonical = name.strip_prefix("f_").unwrap_or(name);
    let mut kv = Kv::parse(name, body)?;
    let spec = match canonical {
        "zero" => FunctionSpec::Zero,
        "power_log" => FunctionSpec::PowerLog {
            mu: kv.required("mu")?,
            delta: kv.real("delta")?.unwrap_or(Real::from_int(0)),
            theta: kv.theta()?,
        },
        "log_log" => FunctionSpec::LogLog { lambda: kv.required("lambda")?, sigma: kv.required("sigma")? },
        "oscillatory" => {
            let delta = kv.required("delta")?;
            let beta = kv.required("beta")?;
            let profile = match (kv.get("g"), kv.real("mu")?, kv.real("exponent")?) {
                (Some("one"), None, None) => PeriodicProfile::One,
                (None, Some(mu), None) => PeriodicProfile::g_mu(mu.value()),
                (None, None, Some(e)) => PeriodicProfile::SinePower { exponent: e.value() },
                (None, None, None) => PeriodicProfile::SinePower { exponent: 1.0 },
                _ => return Err(Error::Parse("oscillatory profile: give one of g=one, mu=…, exponent=…".into())),
            };
            FunctionSpec::Oscillatory { delta, beta, profile }
        }
        "linear_cutoff" => FunctionSpec::LinearCutoff { theta: kv.theta()? },
        "negative_power" => FunctionSpec::NegativePower { tau: kv.required("tau")? },
        other => return Err(Error::Parse(format!("unknown function '{other}'"))),
    };
    kv.finish()?;
    Ok(spec)
}

impl FromStr for FunctionSpec {
    type Err = Error;
    fn from_str(text: &str) -> Result<FunctionSpec> {
        let mut parts = text.split('|');
        let mut spec = parse_base(parts.next().unwrap_or(""))?;
        for op in parts {
            let op = op.trim();
            let mu_text = op
                .strip_prefix("pow:mu=")
                .or_else(|| op.strip_prefix("pow="))
                .ok_or_else(|| Error::Parse(format!("unknown operation '{op}' (expected pow:mu=…)")))?;
            let mu: Real = mu_text.parse()?;
            if !(mu.value() > 0.0) {
                return Err(Error::InvalidParams("μ ≤ 0".into()));
            }
            spec = FunctionSpec::Compose { inner: Box::new(spec), mu };
        }
        spec.build()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn power_log_examples() {
        let f = f_power_log(0.5, 0.0, CutoffTheta::default()).unwrap();
        assert!(close(f.eval((-4f64).exp()), (-2f64).exp(), 1e-15));
        let f = f_power_log(1.0, 1.0, CutoffTheta::default()).unwrap();
        assert!(close(f.eval((-4f64).exp()), (-4f64).exp() / 4.0, 1e-15));
        assert_eq!(f.eval(E_M2), 0.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert!(f_power_log(0.0, 1.0, CutoffTheta::default()).is_err());
        assert!(f_power_log(0.0, 0.0, CutoffTheta::default()).is_err());
    }

    #[test]
    fn log_log_examples() {
        let f = f_log_log(&LogParams::new(1.0, 0.0));
        assert!(close(f.eval((-4f64).exp()), 4.0, 1e-15));
        let sigma = 0.7;
        let f = f_log_log(&LogParams::new(0.0, sigma));
        let x = (-(3f64.exp())).exp();
        assert!(close(f.eval(x), 3f64.powf(-sigma), 1e-14));
        assert_eq!(f.eval(E_M2), 0.0);
    }

    #[test]
    fn oscillatory_example() {
        let f = f_oscillatory(1.0, 1.0, PeriodicProfile::g_mu(1.0)).unwrap();
        let x = (-4f64).exp();
        // sin(e^4 / 2) from a 30-digit evaluation.
        let s = 0.827_847_127_614_088_3_f64;
        let expected = x * s * s;
        assert!(close(f.eval(x), expected, 1e-12), "{} vs {}", f.eval(x), expected);
        assert_eq!(f.eval(0.2), 0.0);
        let g1 = f_oscillatory(0.5, 1.0, PeriodicProfile::One).unwrap();
        let p = f_power_log(0.5, 0.0, CutoffTheta::default()).unwrap();
        assert!(close(g1.eval(0.01), p.eval(0.01), 1e-15));
    }

    #[test]
    fn linear_and_negative_power() {
        let f = f_linear_cutoff(CutoffTheta::default()).unwrap();
        let x = (-4f64).exp();
        assert_eq!(f.eval(x), x);
        assert_eq!(f.eval(-x), -x);
        assert_eq!(f.eval(0.2), 0.0);
        let g = f_negative_power(0.25).unwrap();
        assert!(close(g.eval(x), 1f64.exp(), 1e-15));
        assert!(close(g.eval((-8f64).exp()), 2f64.exp(), 1e-15));
        assert_eq!(g.eval(0.2), 0.0);
    }

    #[test]
    fn compose_examples() {
        let f = PointwiseFunction::new("minus two", 1.0, |_| -2.0);
        let g = compose_power(&f, 2.0).unwrap();
        assert!(close(g.eval(0.3), 4.0, 1e-15));
        let f = f_linear_cutoff(CutoffTheta::default()).unwrap();
        let g1 = compose_power(&f, 1.0).unwrap();
        assert_eq!(g1.eval(-0.01), 0.01);
        let a = compose_power(&compose_power(&f, 0.5).unwrap(), 3.0).unwrap();
        let b = compose_power(&f, 1.5).unwrap();
        for x in [1e-9, -3e-4, 0.02, 0.1] {
            assert!(close(a.eval(x), b.eval(x), 1e-13));
        }
    }

    #[test]
    fn spec_parsing() {
        let s: FunctionSpec = "f_power_log:mu=0.5,delta=0".parse().unwrap();
        assert_eq!(s.to_string(), "f_power_log:mu=0.5,delta=0");
        let s: FunctionSpec = "f_linear_cutoff|pow:mu=0.5".parse().unwrap();
        assert_eq!(
            s.canonical(),
            FunctionSpec::PowerLog { mu: "0.5".parse().unwrap(), delta: Real::from_int(0), theta: CutoffTheta::default() }
        );
        let s: FunctionSpec = "f_oscillatory:delta=1,beta=1,mu=0.5|pow:mu=0.5".parse().unwrap();
        match s.canonical() {
            FunctionSpec::Oscillatory { delta, profile: PeriodicProfile::SinePower { exponent }, .. } => {
                assert_eq!(delta, "0.5".parse().unwrap());
                assert!((exponent - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!("f_power_log:mu=0.5,zeta=1".parse::<FunctionSpec>().is_err());
        assert!("nonsense".parse::<FunctionSpec>().is_err());
        assert!("zero".parse::<FunctionSpec>().unwrap().build().unwrap().is_zero());
        let with = s.with_param("delta", "2".parse().unwrap()).unwrap();
        assert!(with.to_string().starts_with("f_oscillatory:delta=2"));
    }
}
