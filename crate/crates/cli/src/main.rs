//! `besov`: norms, predictions, verification suites and parameter sweeps.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use besov_core::diagnostics::{
    axis_values, predict_membership, run_membership_experiment, sweep, Axis, ExperimentReport, Method, SweepRow,
};
use besov_core::numerics::Numerics;
use besov_core::params::{embedding_check, theorem_boundaries, EmbeddingCheck};
use besov_core::suites::{run_suite, Suite, SuiteReport};
use besov_core::testfns::FunctionSpec;
use besov_core::{Error, Real, SpaceParams};

#[derive(Parser)]
#[command(name = "besov", version, about = "Weighted Besov space norms and membership experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads.
    #[arg(long, global = true, env = "BESOV_JOBS")]
    jobs: Option<usize>,
    /// JSON file with numerical settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k_min: Option<i32>,
    #[arg(long, global = true)]
    k_max: Option<i32>,
    #[arg(long, global = true)]
    points_per_annulus: Option<usize>,
    #[arg(long, global = true)]
    j_max: Option<u32>,
    #[arg(long, global = true)]
    l_max: Option<u32>,
    #[arg(long, global = true)]
    quad_points: Option<usize>,
    /// Difference order M.
    #[arg(long, global = true)]
    order: Option<u32>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Summands, truncated quasi-norm and verdict for one function.
    Norm {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        space: String,
        #[arg(long, default_value = "diff")]
        method: String,
    },
    /// Membership predicted by the theory, without numerics.
    Predict {
        #[arg(long = "fn", required_unless_present = "source")]
        function: Option<String>,
        #[arg(long, required_unless_present = "source")]
        space: Option<String>,
        /// Composition exponent for the theorem boundary report.
        #[arg(long)]
        mu: Option<String>,
        /// Embedding query: source space.
        #[arg(long, requires = "target")]
        source: Option<String>,
        /// Embedding query: target space.
        #[arg(long)]
        target: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
    },
    /// One row per value of a parameter axis.
    Sweep {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        space: String,
        #[arg(long)]
        axis: String,
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "diff")]
        method: String,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn numerics(g: &Global) -> Result<Numerics, Failure> {
    let mut num = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => Numerics::default(),
    };
    if let Some(v) = g.k_min {
        num.k_min = v;
    }
    if let Some(v) = g.k_max {
        num.k_max = v;
    }
    if let Some(v) = g.points_per_annulus {
        num.points_per_annulus = v;
    }
    if let Some(v) = g.j_max {
        num.j_max = v;
    }
    if let Some(v) = g.l_max {
        num.l_max = v;
    }
    if let Some(v) = g.quad_points {
        num.quad_points = v;
    }
    if g.order.is_some() {
        num.order = g.order;
    }
    num.check()?;
    num.grid()?;
    Ok(num)
}

fn opt(v: Option<bool>) -> String {
    v.map_or_else(String::new, |b| b.to_string())
}

fn num_or_empty(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn norm_table(r: &ExperimentReport) -> String {
    let mut out = String::new();
    out += &format!("function    {}\n", r.function);
    out += &format!("space       {}\n", r.params);
    out += &format!("method      {}\n", r.method);
    if let Some(b) = r.base_norm {
        out += &format!("base norm   {b:e}\n");
    }
    out += &format!("quasi-norm  {:e} (truncated)\n", r.quasi_norm);
    out += "index  summand\n";
    for s in &r.summands {
        out += &format!("{:>5}  {:e}\n", s.index, s.value);
    }
    let v = &r.verdict;
    out += &format!(
        "verdict     {} slope={} finite={}{}\n",
        v.class,
        num_or_empty(v.slope),
        r.finite(),
        if v.inconclusive { " (inconclusive)" } else { "" }
    );
    if let Some(rho) = v.power_exponent {
        out += &format!("exponent    {rho}\n");
    }
    if let Some(fit) = &r.log_profile {
        out += &format!("log profile lambda={} sigma={} finite={}\n", fit.lambda, fit.sigma, fit.finite);
    }
    if let Some(c) = &r.cross_check {
        out += &format!(
            "cross-check {} {} slope={} finite={} agree={}\n",
            c.method,
            c.verdict.class,
            num_or_empty(c.verdict.slope),
            c.verdict.finite,
            opt(c.methods_agree)
        );
    }
    out += &format!("predicted   {}\nagree       {}\n", opt(r.predicted), opt(r.agree));
    out
}

#[derive(Serialize)]
struct Prediction {
    function: String,
    params: SpaceParams,
    predicted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundaries: Option<besov_core::params::BoundaryReport>,
}

#[derive(Serialize)]
struct EmbeddingAnswer {
    source: SpaceParams,
    target: SpaceParams,
    #[serde(flatten)]
    check: EmbeddingCheck,
}

fn suite_table(r: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &r.cases {
        let status = if c.borderline {
            "borderline"
        } else if c.pass {
            "agree"
        } else {
            "disagree"
        };
        out += &format!("{status:<10}  {}", c.label);
        if c.expected.is_some() || c.observed.is_some() {
            out += &format!("  expected={} observed={}", opt(c.expected), opt(c.observed));
        }
        for k in &c.checks {
            out += &format!("  {}={:.4}(target {:.4} ±{})", k.name, k.value, k.target, k.tolerance);
        }
        out += "\n";
    }
    let failed = r.cases.iter().filter(|c| !c.pass).count();
    out += &format!(
        "{}: {} cases, {} failed: {}\n",
        r.suite,
        r.cases.len(),
        failed,
        if r.pass { "pass" } else { "fail" }
    );
    out
}

fn sweep_csv(rows: &[SweepRow]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["axis", "value", "slope", "verdict", "predicted", "agree"])?;
    for r in rows {
        w.write_record([
            r.axis.to_string(),
            r.value.to_string(),
            num_or_empty(r.slope),
            r.verdict.to_string(),
            opt(r.predicted),
            opt(r.agree),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?).expect("utf-8 csv"))
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(cli: &Cli) -> Result<(String, bool), Failure> {
    let num = numerics(&cli.global)?;
    let format = cli.global.format;
    match &cli.command {
        Command::Norm { function, space, method } => {
            let spec: FunctionSpec = function.parse()?;
            let params: SpaceParams = space.parse()?;
            let method: Method = method.parse()?;
            let report = run_membership_experiment(&spec, &params, method, &num)?;
            let text = match format {
                Format::Table => norm_table(&report),
                Format::Json => json(&report)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["index", "value"])?;
                    for s in &report.summands {
                        w.write_record([s.index.to_string(), s.value.to_string()])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| Failure::Io(e.to_string()))?).expect("utf-8 csv")
                }
            };
            Ok((text, true))
        }
        Command::Predict { function, space, mu, source, target } => {
            if let (Some(source), Some(target)) = (source, target) {
                let source: SpaceParams = source.parse()?;
                let target: SpaceParams = target.parse()?;
                let check = embedding_check(&source, &target)?;
                let text = match format {
                    Format::Json => json(&EmbeddingAnswer { source, target, check })?,
                    _ => format!(
                        "embedding {}\ndifferential_gap {}\nsmoothness {}\nintegrability {}\nweight {}\n",
                        check.holds, check.differential_gap, check.smoothness_ok, check.integrability_ok, check.weight_ok
                    ),
                };
                return Ok((text, true));
            }
            let spec: FunctionSpec = function.as_deref().unwrap_or_default().parse()?;
            let params: SpaceParams = space.as_deref().unwrap_or_default().parse()?;
            let predicted = predict_membership(&spec, &params)?;
            let boundaries = match mu {
                Some(m) => Some(theorem_boundaries(&params, m.parse::<Real>()?)),
                None => None,
            };
            let answer = Prediction { function: spec.to_string(), params, predicted, boundaries };
            let text = match format {
                Format::Json => json(&answer)?,
                _ => {
                    let mut t = format!(
                        "function  {}\nspace     {}\npredicted {}\n",
                        answer.function,
                        answer.params,
                        answer.predicted.map_or("undetermined".to_string(), |b| b.to_string())
                    );
                    if let Some(b) = &answer.boundaries {
                        t += &serde_json::to_string_pretty(b)?;
                        t += "\n";
                    }
                    t
                }
            };
            Ok((text, true))
        }
        Command::Verify { suite } => {
            let report = run_suite(*suite, &num)?;
            let text = match format {
                Format::Json => json(&report)?,
                _ => suite_table(&report),
            };
            Ok((text, report.pass))
        }
        Command::Sweep { function, space, axis, from, to, steps, method } => {
            let spec: FunctionSpec = function.parse()?;
            let params: SpaceParams = space.parse()?;
            let axis: Axis = axis.parse()?;
            let method: Method = method.parse()?;
            let values = axis_values(from.parse()?, to.parse()?, *steps)?;
            let rows = sweep(&spec, &params, axis, &values, method, &num)?;
            let text = match format {
                Format::Json => json(&rows)?,
                Format::Csv => sweep_csv(&rows)?,
                Format::Table => {
                    let mut t = format!("{:<8} {:>10} {:>10} {:<22} {:<10} {}\n", "axis", "value", "slope", "verdict", "predicted", "agree");
                    for r in &rows {
                        t += &format!(
                            "{:<8} {:>10} {:>10} {:<22} {:<10} {}\n",
                            r.axis.to_string(),
                            r.value.to_string(),
                            format!("{:.4}", r.slope),
                            r.verdict.to_string(),
                            opt(r.predicted),
                            opt(r.agree)
                        );
                    }
                    t
                }
            };
            Ok((text, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.global.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| run(&cli));
    let (text, ok) = match result {
        Ok(v) => v,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_invalid_params() { 2 } else { 1 });
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.global.output {
        Some(path) => fs::write(path, text.as_bytes()),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        log::warn!("numerical verdicts disagree with the predictions");
        ExitCode::from(3)
    }
}

