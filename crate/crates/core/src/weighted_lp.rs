//! Weighted Lebesgue norms `||f||_{L^p(|x|^alpha)}` on log-dyadic grids.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Direct,
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedNorm {
    pub value: f64,
    pub method: NormMethod,
    pub p: f64,
    pub alpha: f64,
}

fn unit_sphere_measure(n: u32) -> Result<f64> {
    match n {
        2 => Ok(2.0 * std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI),
        _ => Err(Error::InvalidParams(format!("radial reduction available for n ≤ 3, got n = {n}"))),
    }
}

fn check(p: f64, alpha: f64, n: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParams("n < 1".into()));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParams("p < 1".into()));
    }
    if alpha <= -(n as f64) {
        return Err(Error::InvalidParams("α ≤ −n".into()));
    }
    Ok(())
}

/// Per-annulus sums of `w |g|^p weight(x, k)`, accumulated in node order and
/// reduced in annulus order so that both methods round identically.
fn annulus_sums(gf: &GridFunction, p: f64, range: std::ops::Range<usize>, weight: impl Fn(f64) -> f64) -> Vec<f64> {
    let g = &gf.grid;
    let mut sums = vec![0.0; g.annuli()];
    for i in range {
        let v = gf.values[i];
        if v == 0.0 {
            continue;
        }
        let node = &g.nodes()[i];
        sums[g.slot(i)] += node.w * v.abs().powf(p) * weight(node.x.abs());
    }
    sums
}

/// Direct quadrature of `∫ |g|^p |x|^alpha dx`. For `n ≥ 2` the positive
/// nodes are read as a radial profile and integrated in polar coordinates.
pub fn lp_norm_direct(gf: &GridFunction, p: f64, alpha: f64, n: u32) -> Result<WeightedNorm> {
    check(p, alpha, n)?;
    let (range, power, factor) = if n == 1 {
        (0..gf.grid.len(), alpha, 1.0)
    } else {
        (gf.grid.positive_range(), alpha + (n - 1) as f64, unit_sphere_measure(n)?)
    };
    let sums = annulus_sums(gf, p, range, |r| r.powf(power));
    let total: f64 = sums.iter().sum::<f64>() * factor;
    Ok(WeightedNorm { value: total.powf(1.0 / p), method: NormMethod::Direct, p, alpha })
}

/// Discrete version `(Σ_k 2^(k alpha) ||g χ_k||_p^p)^(1/p)`, n = 1.
pub fn lp_norm_dyadic(gf: &GridFunction, p: f64, alpha: f64) -> Result<WeightedNorm> {
    check(p, alpha, 1)?;
    let g = &gf.grid;
    let sums = annulus_sums(gf, p, 0..g.len(), |_| 1.0);
    let total: f64 = sums
        .iter()
        .enumerate()
        .map(|(slot, s)| s * 2f64.powf((g.k_min() + slot as i32) as f64 * alpha))
        .sum();
    Ok(WeightedNorm { value: total.powf(1.0 / p), method: NormMethod::Dyadic, p, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use std::sync::Arc;

    #[test]
    fn indicator_of_unit_annulus() {
        let g = Arc::new(build_grid(-10, 2, 32).unwrap());
        let gf = GridFunction::from_fn(g, |x| if (0.5..1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        let v = lp_norm_direct(&gf, 1.0, 0.0, 1).unwrap().value;
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_quarter_power() {
        let g = Arc::new(build_grid(-60, 2, 64).unwrap());
        let gf = GridFunction::from_fn(g, |x| if x.abs() < 1.0 { x.abs().powf(-0.25) } else { 0.0 }).unwrap();
        let v = lp_norm_direct(&gf, 2.0, 0.0, 1).unwrap().value;
        assert!((v - 2.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn linear_weight() {
        let g = Arc::new(build_grid(-60, 2, 64).unwrap());
        let gf = GridFunction::from_fn(g, |x| if 0.0 < x && x < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let v = lp_norm_direct(&gf, 1.0, 1.0, 1).unwrap().value;
        assert!((v - 0.5).abs() < 1e-6, "{v}");
    }

    #[test]
    fn dyadic_examples() {
        let g = Arc::new(build_grid(-8, 3, 16).unwrap());
        let gf = GridFunction::from_fn(g.clone(), |x| (x.abs() + 0.3).sin()).unwrap();
        let a = lp_norm_direct(&gf, 2.0, 0.0, 1).unwrap().value;
        let b = lp_norm_dyadic(&gf, 2.0, 0.0).unwrap().value;
        assert_eq!(a.to_bits(), b.to_bits());
        let ind = GridFunction::from_fn(g, |x| if (0.5..1.0).contains(&x.abs()) { 1.0 } else { 0.0 }).unwrap();
        let v = lp_norm_dyadic(&ind, 1.0, 2.0).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_ball_volume() {
        let g = Arc::new(build_grid(-40, 2, 64).unwrap());
        let ind = GridFunction::from_fn(g.clone(), |x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let v2 = lp_norm_direct(&ind, 1.0, 0.0, 2).unwrap().value;
        assert!((v2 - std::f64::consts::PI).abs() < 1e-10);
        let v3 = lp_norm_direct(&ind, 1.0, 0.0, 3).unwrap().value;
        assert!((v3 - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-4);
        assert!(lp_norm_direct(&ind, 1.0, 0.0, 4).is_err());
    }

    #[test]
    fn rejects_bad_exponents() {
        let g = Arc::new(build_grid(-4, 1, 4).unwrap());
        let gf = GridFunction::zeros(g);
        assert!(lp_norm_direct(&gf, 0.5, 0.0, 1).is_err());
        assert!(lp_norm_dyadic(&gf, 2.0, -1.0).is_err());
    }
}
