//! End-to-end acceptance battery. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use besov_core::grid::sample;
use besov_core::littlewood_paley::make_phi_family;
use besov_core::numerics::Numerics;
use besov_core::suites::{consistency_cases, run_suite, CaseResult, Suite, SuiteReport};
use besov_core::testfns::FunctionSpec;
use besov_core::weighted_lp::{lp_norm_direct, lp_norm_dyadic};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, name: &str, started: Instant, out: &Outcome, failures: &mut Vec<usize>) {
    let status = if out.pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {status} {name}: {} ({:.1} s)", out.detail, started.elapsed().as_secs_f64());
    if !out.pass {
        failures.push(n);
    }
}

fn psi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 1.5 {
        0.0
    } else {
        let t = (a - 1.0) / 0.5;
        let e = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
        e(1.0 - t) / (e(1.0 - t) + e(t))
    }
}

fn partition_of_unity(j_max: u32) -> Outcome {
    let family = make_phi_family(j_max).expect("family");
    let top = 2f64.powi(j_max as i32 - 1);
    let mut xis = Vec::with_capacity(10_000);
    for i in 0..5_000 {
        let u = (i as f64 + 0.5) / 5_000.0;
        xis.push(if i % 2 == 0 { u * top } else { -u * top });
        let lg = -12.0 + u * (j_max as f64 - 1.0 + 12.0);
        xis.push(if i % 2 == 0 { -(2f64.powf(lg)) } else { 2f64.powf(lg) });
    }
    let mut max_err = 0.0f64;
    let mut violations = 0usize;
    let mut bump_err = 0.0f64;
    for &xi in &xis {
        let mut sum = 0.0;
        for j in 0..=j_max {
            let v = family.phi(j, xi);
            sum += v;
            let (lo, hi) = if j == 0 { (0.0, 1.5) } else { (2f64.powi(j as i32 - 1), 3.0 * 2f64.powi(j as i32 - 1)) };
            if (xi.abs() < lo || xi.abs() > hi) && v != 0.0 {
                violations += 1;
            }
        }
        max_err = max_err.max((sum - 1.0).abs());
        bump_err = bump_err.max((family.psi.eval(xi / top) - psi(xi / top)).abs());
    }
    Outcome {
        pass: max_err < 1e-12 && violations == 0 && bump_err < 1e-14,
        detail: format!("{} frequencies, max |sum - 1| = {max_err:.2e}, support violations {violations}", xis.len()),
    }
}

fn weighted_norm_oracle(num: &Numerics) -> Outcome {
    let catalog = [
        "f_power_log:mu=0.5,delta=0",
        "f_power_log:mu=0.5,delta=1",
        "f_power_log:mu=1.5,delta=0",
        "f_log_log:lambda=0.5,sigma=0.9",
        "f_oscillatory:delta=1,beta=1,mu=0.5",
        "f_linear_cutoff",
        "f_negative_power:tau=0.12",
        "f_linear_cutoff|pow:mu=0.5",
    ];
    let grid = num.grid().expect("grid");
    let mut worst = 0.0f64;
    let mut equal_err = 0.0f64;
    let mut bad = Vec::new();
    let mut count = 0;
    for name in catalog {
        let spec: FunctionSpec = name.parse().unwrap_or_else(|e| panic!("{name}: {e}"));
        let gf = sample(&spec.build().expect("build"), &Arc::clone(&grid)).expect("sample");
        for p in [1.0, 2.0, 4.0] {
            for alpha in [-0.5, 0.0, 0.5, 1.0, 2.0] {
                count += 1;
                let direct = lp_norm_direct(&gf, p, alpha, 1).expect("direct").value;
                let dyadic = lp_norm_dyadic(&gf, p, alpha).expect("dyadic").value;
                let ratio = dyadic / direct;
                let bound = 2f64.powf(alpha.abs() / p);
                if alpha == 0.0 {
                    equal_err = equal_err.max((ratio - 1.0).abs());
                }
                // Position of the ratio inside [1/bound, bound], as a fraction of log(bound).
                if alpha != 0.0 {
                    worst = worst.max(ratio.ln().abs() / bound.ln());
                }
                if !(ratio >= 1.0 / bound * (1.0 - 1e-12) && ratio <= bound * (1.0 + 1e-12)) {
                    bad.push(format!("{name} p={p} alpha={alpha} ratio={ratio}"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty() && equal_err < 1e-12,
        detail: format!(
            "{count} pairs, max |log ratio|/log bound = {worst:.3}, alpha=0 deviation {equal_err:.1e}{}",
            if bad.is_empty() { String::new() } else { format!(", out of bounds: {}", bad.join("; ")) }
        ),
    }
}

fn summarize(cases: &[&CaseResult]) -> Outcome {
    let failed: Vec<&str> = cases.iter().filter(|c| !c.pass).map(|c| c.label.as_str()).collect();
    let borderline = cases.iter().filter(|c| c.borderline).count();
    let mut worst = String::new();
    let mut worst_margin = f64::NEG_INFINITY;
    for c in cases {
        for k in &c.checks {
            if k.tolerance > 0.0 {
                let m = (k.value - k.target).abs() / k.tolerance;
                if m > worst_margin {
                    worst_margin = m;
                    worst = format!("{} {:.4} vs {:.4}", k.name, k.value, k.target);
                }
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{} cases, {} borderline, {} failed{}{}",
            cases.len(),
            borderline,
            failed.len(),
            if worst.is_empty() { String::new() } else { format!(", largest deviation {worst}") },
            if failed.is_empty() { String::new() } else { format!(": {}", failed.join("; ")) }
        ),
    }
}

/// Slope checks must hold in every case, borderline or not.
fn summarize_strict(cases: &[&CaseResult]) -> Outcome {
    let mut out = summarize(cases);
    let slope_fail = cases.iter().any(|c| c.checks.iter().any(|k| !k.pass));
    if slope_fail {
        out.pass = false;
        out.detail += ", a tolerance check failed";
    }
    out
}

fn all(r: &SuiteReport) -> Vec<&CaseResult> {
    r.cases.iter().collect()
}

fn besov(args: &[&str], jobs: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_besov"))
        .args(args)
        .args(["--jobs", jobs])
        .env_remove("BESOV_JOBS")
        .output()
        .expect("run besov");
    assert!(out.status.code().is_some(), "besov killed");
    let mut bytes = out.stdout;
    bytes.extend_from_slice(format!("exit={:?}", out.status.code()).as_bytes());
    bytes
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["verify", "thm1", "--format", "json"],
        &["verify", "embeddings", "--format", "json"],
        &["verify", "lemma-bourdaud", "--format", "json"],
        &[
            "sweep",
            "--fn",
            "f_power_log:mu=0.5,delta=1",
            "--space",
            "n=1,p=2,q=2,alpha=0,s=1",
            "--axis",
            "s",
            "--from",
            "0.1",
            "--to",
            "1.9",
            "--steps",
            "32",
            "--format",
            "csv",
        ],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let a = besov(args, "1");
        let b = besov(args, "4");
        let c = besov(args, "4");
        if a != b || b != c || a.is_empty() {
            mismatched.push(args[..2].join(" "));
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: format!(
            "{} commands x jobs {{1, 4, 4}}, {} mismatched{}",
            runs.len(),
            mismatched.len(),
            if mismatched.is_empty() { String::new() } else { format!(": {}", mismatched.join(", ")) }
        ),
    }
}

fn main() {
    let num = Numerics::default();
    let mut failures = Vec::new();

    let t = Instant::now();
    report(1, "partition of unity", t, &partition_of_unity(num.j_max), &mut failures);

    let t = Instant::now();
    report(2, "weighted norm equivalence", t, &weighted_norm_oracle(&num), &mut failures);

    let t = Instant::now();
    let si = run_suite(Suite::LemmaSi, &num).expect("lemma-si");
    let (edge, battery): (Vec<&CaseResult>, Vec<&CaseResult>) =
        si.cases.iter().partition(|c| c.checks.iter().any(|k| k.name == "power_exponent"));
    report(3, "power-log battery slopes and verdicts", t, &summarize_strict(&battery), &mut failures);
    let t = Instant::now();
    report(4, "borderline power law", t, &summarize_strict(&edge), &mut failures);

    let t = Instant::now();
    let bourdaud = run_suite(Suite::LemmaBourdaud, &num).expect("lemma-bourdaud");
    report(5, "iterated log asymptotics", t, &summarize_strict(&all(&bourdaud)), &mut failures);

    let t = Instant::now();
    let thm1 = run_suite(Suite::Thm1, &num).expect("thm1");
    report(6, "linear cutoff composition", t, &summarize_strict(&all(&thm1)), &mut failures);

    let t = Instant::now();
    let thm2 = run_suite(Suite::Thm2, &num).expect("thm2");
    report(7, "composition windows", t, &summarize(&all(&thm2)), &mut failures);

    let t = Instant::now();
    let key1 = run_suite(Suite::PropKey1, &num).expect("prop-key1");
    report(8, "oscillatory critical exponent", t, &summarize_strict(&all(&key1)), &mut failures);

    let t = Instant::now();
    let thm3 = run_suite(Suite::Thm3, &num).expect("thm3");
    report(9, "oscillatory composition", t, &summarize(&all(&thm3)), &mut failures);

    let t = Instant::now();
    let experiments: Vec<_> =
        si.experiments.iter().chain(&thm1.experiments).chain(&thm2.experiments).cloned().collect();
    let consistency = consistency_cases(&experiments);
    report(10, "route consistency", t, &summarize(&consistency.iter().collect::<Vec<_>>()), &mut failures);

    let t = Instant::now();
    report(11, "determinism", t, &determinism(), &mut failures);

    if failures.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
