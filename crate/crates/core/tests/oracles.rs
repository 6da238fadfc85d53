use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use besov_core::diagnostics::{
    axis_values, run_composition_experiment, run_membership_experiment, run_regularity_scan, sweep, Axis, Method,
};
use besov_core::differences::{besov_summands_diff, DifferenceOrder, TimeLevels};
use besov_core::grid::{build_grid, sample, GridFunction};
use besov_core::littlewood_paley::{band_convolve_with, besov_summands_fourier};
use besov_core::numerics::Numerics;
use besov_core::testfns::{
    compose_power, f_linear_cutoff, f_oscillatory, f_power_log, CutoffTheta, Parity, PeriodicProfile,
    PointwiseFunction,
};
use besov_core::weighted_lp::{lp_norm_direct, lp_norm_dyadic};
use besov_core::{Real, SpaceParams, Q};

fn space(s: f64, alpha: f64) -> SpaceParams {
    SpaceParams::new(1, Real::from_int(2), Q::finite(2.0), Real::from_f64(s), Real::from_f64(alpha)).unwrap()
}

/// Least-squares slope of `log2 v^(1/q)` against the index over `lo..=hi`.
fn fitted_slope(indices: &[i64], values: &[f64], q: f64, lo: i64, hi: i64) -> f64 {
    let pts: Vec<(f64, f64)> = indices
        .iter()
        .zip(values)
        .filter(|(&i, &v)| i >= lo && i <= hi && v > 0.0)
        .map(|(&i, &v)| (i as f64, v.log2() / q))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn psi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        return 1.0;
    }
    if a >= 1.5 {
        return 0.0;
    }
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let t = 2.0 * (a - 1.0);
    g(1.0 - t) / (g(1.0 - t) + g(t))
}

/// `||F^-1 phi_j * f||_2` by one dense FFT on `[-l, l)` with spacing `h`.
fn dense_block_norm(f: &PointwiseFunction, j: i32, h: f64, l: f64) -> f64 {
    let n = ((2.0 * l / h).round() as usize).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let x = if k < n / 2 { k as f64 * h } else { (k as f64 - n as f64) * h };
            Complex64::new(f.eval(x), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let period = n as f64 * h;
    for (k, c) in buf.iter_mut().enumerate() {
        let r = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = 2.0 * std::f64::consts::PI * r / period;
        let a = xi * 2f64.powi(-j);
        *c *= psi(a) - psi(2.0 * a);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let sum: f64 = buf.iter().map(|c| (c.re / n as f64).powi(2)).sum();
    (sum * h).sqrt()
}

#[test]
fn oscillatory_and_power_log_values() {
    let f = f_oscillatory(1.0, 1.0, PeriodicProfile::g_mu(1.0)).unwrap();
    let x = (-4.0f64).exp();
    let oracle = 0.012_552_272_673_760_21;
    assert!((f.eval(x) - oracle).abs() < 1e-13 * oracle);
    let g = f_power_log(1.0, 1.0, CutoffTheta::default()).unwrap();
    assert!((g.eval(-x) - 0.004578909722183545).abs() < 1e-15);
}

#[test]
fn block_norm_matches_dense_fft() {
    let f = f_power_log(0.5, 0.0, CutoffTheta::default()).unwrap();
    let coarse = dense_block_norm(&f, 6, 2f64.powi(-12), 4.0);
    let fine = dense_block_norm(&f, 6, 2f64.powi(-13), 4.0);
    assert!((coarse - fine).abs() < 1e-3 * fine, "oracle not converged: {coarse} {fine}");
    let num = Numerics::default();
    let block = band_convolve_with(&f, 6, &num.grid().unwrap(), &num).unwrap();
    let got = lp_norm_dyadic(&block, 2.0, 0.0).unwrap().value;
    assert!((got - fine).abs() < 0.01 * fine, "{got} vs {fine}");
}

#[test]
fn blocks_reconstruct_smooth_functions() {
    let f = PointwiseFunction::new("bump", 0.25, |x: f64| (1.0 - (x / 0.25).powi(2)).powi(8)).with_parity(Parity::Even);
    let num = Numerics { k_min: -20, ..Numerics::default() };
    let grid = num.grid().unwrap();
    let mut acc = GridFunction::zeros(grid.clone());
    for j in 0..=10 {
        acc = acc.add(&band_convolve_with(&f, j, &grid, &num).unwrap()).unwrap();
    }
    let exact = sample(&f, &grid).unwrap();
    let err = acc.add(&exact.scaled(-1.0)).unwrap();
    let rel = lp_norm_direct(&err, 2.0, 0.0, 1).unwrap().value / lp_norm_direct(&exact, 2.0, 0.0, 1).unwrap().value;
    assert!(rel < 1e-3, "relative error {rel}");
}

#[test]
fn first_block_kills_low_frequencies() {
    let f = PointwiseFunction::new("sinc2", 4096.0, |x: f64| {
        let u = 0.5 * x;
        let s = if u == 0.0 { 1.0 } else { (u.sin() / u).powi(2) };
        let a = x.abs();
        let taper = if a <= 2048.0 {
            1.0
        } else {
            let t = (a - 2048.0) / 1900.0;
            let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
            if t >= 1.0 {
                0.0
            } else {
                g(1.0 - t) / (g(1.0 - t) + g(t))
            }
        };
        s * taper
    })
    .with_parity(Parity::Even);
    let num = Numerics { k_min: -20, k_max: 13, points_per_annulus: 16, ..Numerics::default() };
    let grid = Arc::new(build_grid(-20, 13, 16).unwrap());
    let block = band_convolve_with(&f, 1, &grid, &num).unwrap();
    let worst = block.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn fourier_slope_under_refinement() {
    let f = f_power_log(0.5, 0.0, CutoffTheta::default()).unwrap();
    let num = Numerics::default();
    for s in [0.7, 1.3] {
        let params = space(s, 0.0);
        let slope = |n: &Numerics| {
            let seq = besov_summands_fourier(&f, &params, n.j_max, n).unwrap();
            fitted_slope(&seq.indices, &seq.values, 2.0, 6, n.j_max as i64)
        };
        let (a, b) = (slope(&num), slope(&num.refined()));
        assert!((a - b).abs() < 0.02, "s = {s}: {a} vs refined {b}");
        assert!((a - (s - 1.0)).abs() < 0.1, "s = {s}: {a}");
    }
}

#[test]
fn difference_slope_under_refinement() {
    let th = CutoffTheta::default();
    let lin = f_linear_cutoff(th).unwrap();
    let cases = [
        (f_power_log(0.5, 0.0, th).unwrap(), 0.0, 0.7, 1.0),
        (f_power_log(0.5, 0.0, th).unwrap(), 0.0, 1.3, 1.0),
        (compose_power(&lin, 0.5).unwrap(), 0.5, 0.9, 1.25),
    ];
    let num = Numerics::default();
    for (f, alpha, s, bound) in cases {
        let params = space(s, alpha);
        let slope = |n: &Numerics| {
            let d = besov_summands_diff(&f, &params, DifferenceOrder::new(2).unwrap(), TimeLevels::new(1, 40).unwrap(), n)
                .unwrap();
            fitted_slope(&d.sequence.indices, &d.sequence.values, 2.0, 8, 30)
        };
        let (a, b) = (slope(&num), slope(&num.refined()));
        assert!((a - b).abs() < 0.02, "{} s = {s}: {a} vs refined {b}", f.label);
        assert!((a - (s - bound)).abs() < 0.1, "{} s = {s}: {a}", f.label);
    }
}

#[test]
fn scan_locates_critical_sigma() {
    let f = f_oscillatory(1.0, 1.0, PeriodicProfile::g_mu(0.5)).unwrap();
    let sigmas: Vec<f64> = (1..40).map(|i| i as f64 * 0.05).collect();
    let m = DifferenceOrder::new(2).unwrap();
    let params = space(0.5, 0.0);
    let num = Numerics::default();
    let coarse = run_regularity_scan(&f, &params, &sigmas, m, &num).unwrap().critical_sigma.unwrap();
    let fine = run_regularity_scan(&f, &params, &sigmas, m, &num.refined()).unwrap().critical_sigma.unwrap();
    assert!((coarse - 0.75).abs() < 0.05, "{coarse}");
    assert!((coarse - fine).abs() < 0.02, "{coarse} vs refined {fine}");

    let zero = run_regularity_scan(&PointwiseFunction::zero(), &params, &sigmas, m, &num).unwrap();
    assert!(zero.rows.iter().all(|r| r.sup_statistic == 0.0));
}

#[test]
fn scan_bounded_below_lipschitz_index() {
    let spec = "f_power_log:mu=1,delta=0".parse().unwrap();
    let f = f_power_log(1.0, 0.0, CutoffTheta::default()).unwrap();
    let params = SpaceParams::new(1, Real::from_int(2), Q::Infinite, Real::from_f64(0.5), Real::from_int(0)).unwrap();
    let scan =
        run_regularity_scan(&f, &params, &[0.5, 1.0, 1.4, 1.7], DifferenceOrder::new(2).unwrap(), &Numerics::default())
            .unwrap();
    for row in &scan.rows {
        let predicted = run_membership_experiment(&spec, &params.with_s(Real::from_f64(row.sigma)), Method::Differences, &Numerics::default())
            .unwrap()
            .predicted
            .unwrap();
        assert_eq!(row.slope > 0.0, predicted, "sigma = {}: slope {}", row.sigma, row.slope);
    }
}

#[test]
fn composition_signatures() {
    let num = Numerics::default();
    let cases = [
        ("f_linear_cutoff", space(1.25, 0.5), 0.5),
        ("f_negative_power:tau=0.15", space(0.3, 0.0), 2.0),
        ("f_power_log:mu=0.45,delta=0", space(0.8, 0.0), 0.5),
    ];
    for (name, params, mu) in cases {
        let rep = run_composition_experiment(&name.parse().unwrap(), &params, Real::from_f64(mu), Method::Differences, &num)
            .unwrap();
        assert!(rep.signature, "{name}: base {:?} composed {:?}", rep.base.verdict, rep.composed.verdict);
    }
}

#[test]
fn sweep_s_flips_at_the_boundary() {
    let spec = "f_power_log:mu=0.5,delta=0".parse().unwrap();
    let values = axis_values(Real::frac(3, 5), Real::frac(7, 5), 9).unwrap();
    let rows = sweep(&spec, &space(1.0, 0.0), Axis::S, &values, Method::Fourier, &Numerics::default()).unwrap();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let s = r.value.value();
        if (s - 1.0).abs() > 0.05 {
            assert_eq!(r.finite, s < 1.0, "s = {s}");
            assert_eq!(r.agree, Some(true));
        }
    }
    let two = sweep(&spec, &space(1.0, 0.0), Axis::S, &axis_values(Real::frac(1, 2), Real::frac(3, 2), 2).unwrap(), Method::Fourier, &Numerics::default())
        .unwrap();
    assert_eq!(two.len(), 2);
}

#[test]
fn sweep_mu_signature_follows_the_bound() {
    let spec = "f_linear_cutoff|pow:mu=0.5".parse().unwrap();
    let values = axis_values(Real::frac(3, 10), Real::frac(9, 10), 7).unwrap();
    let rows = sweep(&spec, &space(1.0, 0.0), Axis::Mu, &values, Method::Differences, &Numerics::default()).unwrap();
    for r in &rows {
        let mu = r.value.value();
        if (1.0 - mu - 0.5).abs() > 0.05 {
            assert_eq!(!r.finite, 1.0 >= mu + 0.5, "mu = {mu}");
        }
    }
}
