//! Real parameters that remember an exact rational value when one is known.
//!
//! Boundary tests such as `s == (n + alpha)/p + mu` are decided exactly when
//! every operand came from a decimal or fractional literal, and with an
//! absolute tolerance of [`BOUNDARY_TOL`] otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub const BOUNDARY_TOL: f64 = 1e-12;

type Q128 = Ratio<i128>;

#[derive(Clone, Copy, Debug)]
pub struct Real {
    value: f64,
    exact: Option<Q128>,
}

impl Real {
    pub fn from_f64(value: f64) -> Self {
        Real { value, exact: None }
    }

    pub fn from_int(v: i64) -> Self {
        Real::from_ratio(Q128::from_integer(v as i128))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Real::from_ratio(Q128::new(num as i128, den as i128))
    }

    fn from_ratio(r: Q128) -> Self {
        let value = r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
        Real { value, exact: Some(r) }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn abs(self) -> Self {
        Real { value: self.value.abs(), exact: self.exact.map(|r| r.abs()) }
    }

    pub fn max(self, other: Real) -> Real {
        if self.cmp_boundary(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if self.cmp_boundary(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Exact comparison when both sides are rational, tolerance-based otherwise.
    pub fn cmp_boundary(&self, other: &Real) -> Ordering {
        if let (Some(a), Some(b)) = (self.exact, other.exact) {
            return a.cmp(&b);
        }
        let d = self.value - other.value;
        if d.abs() <= BOUNDARY_TOL {
            Ordering::Equal
        } else if d < 0.0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn lt(&self, other: &Real) -> bool {
        self.cmp_boundary(other) == Ordering::Less
    }
    pub fn le(&self, other: &Real) -> bool {
        self.cmp_boundary(other) != Ordering::Greater
    }
    pub fn gt(&self, other: &Real) -> bool {
        self.cmp_boundary(other) == Ordering::Greater
    }
    pub fn ge(&self, other: &Real) -> bool {
        self.cmp_boundary(other) != Ordering::Less
    }
    pub fn eq_boundary(&self, other: &Real) -> bool {
        self.cmp_boundary(other) == Ordering::Equal
    }
    pub fn is_zero(&self) -> bool {
        self.eq_boundary(&Real::from_int(0))
    }

    fn combine(
        self,
        rhs: Real,
        f: impl Fn(f64, f64) -> f64,
        g: impl Fn(&Q128, &Q128) -> Option<Q128>,
    ) -> Real {
        let value = f(self.value, rhs.value);
        let exact = match (self.exact, rhs.exact) {
            (Some(a), Some(b)) => g(&a, &b),
            _ => None,
        };
        match exact {
            Some(r) => Real::from_ratio(r),
            None => Real { value, exact: None },
        }
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real::from_f64(v)
    }
}

impl From<i32> for Real {
    fn from(v: i32) -> Self {
        Real::from_int(v as i64)
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, rhs: Real) -> Real {
        self.combine(rhs, |a, b| a + b, |a, b| a.checked_add(b))
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        self.combine(rhs, |a, b| a - b, |a, b| a.checked_sub(b))
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, rhs: Real) -> Real {
        self.combine(rhs, |a, b| a * b, |a, b| a.checked_mul(b))
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        self.combine(rhs, |a, b| a / b, |a, b| if b.is_zero() { None } else { a.checked_div(b) })
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { value: -self.value, exact: self.exact.map(|r| -r) }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.value == other.value,
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Parses `12`, `-0.75`, `1.5e-3`, `3/8`; anything else that `f64` accepts
/// becomes an inexact value.
impl FromStr for Real {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty number".into()));
        }
        if let Some((a, b)) = s.split_once('/') {
            let a: Real = a.parse()?;
            let b: Real = b.parse()?;
            if b.value == 0.0 {
                return Err(Error::Parse(format!("zero denominator in '{s}'")));
            }
            return Ok(a / b);
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Real::from_ratio(r));
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("not a finite number: '{s}'")));
        }
        Ok(Real::from_f64(v))
    }
}

fn parse_decimal(s: &str) -> Option<Q128> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.len() > 30 {
        return None;
    }
    let mut num: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    if scale.abs() > 30 {
        return None;
    }
    let p = 10i128.checked_pow(scale.unsigned_abs())?;
    if scale >= 0 {
        Some(Q128::from_integer(num.checked_mul(p)?))
    } else {
        Some(Q128::new(num, p))
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Real::from_f64(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
