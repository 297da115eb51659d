//! Command-line front end: parse a function expression and parameters, run
//! the matrix builders, kernel constructions, representation verifiers and
//! certification pipelines, and emit human-readable text or versioned JSON
//! reports.
//!
//! Exit codes: 0 = certified/verified, 1 = refuted or not verified (the
//! report carries witnesses), 2 = usage or domain error.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mmcheck_core::classify::{self, CertificationRequest, Property, Verdict};
use mmcheck_core::divided::PointTuple;
use mmcheck_core::kernels;
use mmcheck_core::matrices::{self, DEFAULT_PSD_TOL};
use mmcheck_core::represent::{self, QuadratureRule};
use mmcheck_core::{FunctionOracle, Interval};

use report::{emit, render_text, Report, ResultBody};

#[derive(Parser)]
#[command(
    name = "mmcheck",
    version,
    about = "Certify matrix monotonicity and matrix convexity of fixed order on an interval."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a property with the local Hankel sweep plus tuple sampling.
    Classify(ClassifyArgs),
    /// Build the Loewner matrix of first divided differences on a tuple.
    Loewner(LoewnerArgs),
    /// Build the Kraus matrix of second divided differences with an anchor.
    Kraus(KrausArgs),
    /// Build a derivative Hankel matrix at a point.
    Hankel(HankelArgs),
    /// Construct a weight kernel and dump its pieces.
    Kernel(KernelArgs),
    /// Rebuild a Loewner/Kraus matrix from its weighted Hankel integral.
    VerifyRepresentation(RepresentArgs),
    /// Probe the defining matrix inequalities on randomized pairs.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PropertyArg {
    Monotone,
    Convex,
}

impl PropertyArg {
    fn to_property(self) -> Property {
        match self {
            PropertyArg::Monotone => Property::Monotone,
            PropertyArg::Convex => Property::Convex,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PropertyArg::Monotone => "monotone",
            PropertyArg::Convex => "convex",
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(transparent)]
struct IntervalArg((f64, f64));

fn parse_interval_arg(s: &str) -> Result<IntervalArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated numbers, e.g. 0.01,100".into());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| format!("bad number `{}`", parts[0]))?;
    let b: f64 = parts[1].trim().parse().map_err(|_| format!("bad number `{}`", parts[1]))?;
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(format!("interval endpoints must satisfy a < b, got ({a}, {b})"));
    }
    Ok(IntervalArg((a, b)))
}

fn parse_points_arg(s: &str) -> Result<PointsArg, String> {
    let pts: Result<Vec<f64>, _> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}`")))
        .collect();
    let pts = pts?;
    if pts.is_empty() {
        return Err("at least one point is required".into());
    }
    Ok(PointsArg(pts))
}

#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
struct PointsArg(Vec<f64>);

#[derive(Args, Serialize)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    #[serde(skip)]
    format: Format,
    /// Write the report to this path instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ClassifyArgs {
    /// Property to certify.
    #[arg(long, value_enum)]
    property: PropertyArg,
    /// Function expression, e.g. "sqrt(x)" or "x*log(x)".
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    /// Open interval as "a,b".
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: IntervalArg,
    /// Matrix order (n ≥ 2).
    #[arg(long)]
    n: usize,
    /// Points in the local Hankel sweep.
    #[arg(long, default_value_t = 256)]
    grid_size: usize,
    /// Random tuples in the Loewner/Kraus sampling.
    #[arg(long, default_value_t = 64)]
    random_tuples: usize,
    /// Positive-semidefinite tolerance.
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tolerance: f64,
    /// Seed for all randomized draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long, value_enum)]
    property: PropertyArg,
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: IntervalArg,
    #[arg(long)]
    n: usize,
    /// Randomized matrix pairs to draw.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Serialize)]
struct LoewnerArgs {
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    /// Tuple of points as "l1,l2,...".
    #[arg(long, value_parser = parse_points_arg, allow_hyphen_values = true)]
    points: PointsArg,
    /// Optional domain restriction as "a,b".
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: Option<IntervalArg>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Serialize)]
struct KrausArgs {
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    #[arg(long, value_parser = parse_points_arg, allow_hyphen_values = true)]
    points: PointsArg,
    /// The anchor point of the second divided difference.
    #[arg(long, allow_negative_numbers = true)]
    anchor: f64,
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: Option<IntervalArg>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum HankelKind {
    M,
    K,
}

#[derive(Args, Serialize)]
struct HankelArgs {
    /// Which Hankel matrix: m (odd offsets) or k (even offsets).
    #[arg(long, value_enum, ignore_case = true)]
    which: HankelKind,
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    /// Expansion point t.
    #[arg(long, allow_negative_numbers = true)]
    at: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: Option<IntervalArg>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    tolerance: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KernelKind {
    I,
    J,
}

#[derive(Args, Serialize)]
struct KernelArgs {
    /// Which kernel: i (monotone weight) or j (convex weight).
    #[arg(long, value_enum, ignore_case = true)]
    which: KernelKind,
    #[arg(long, value_parser = parse_points_arg, allow_hyphen_values = true)]
    points: PointsArg,
    /// Anchor for the j kernel.
    #[arg(long, allow_negative_numbers = true)]
    anchor: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RepresentationKind {
    Loewner,
    Kraus,
}

#[derive(Args, Serialize)]
struct RepresentArgs {
    /// Which representation to verify.
    #[arg(long, value_enum, ignore_case = true)]
    which: RepresentationKind,
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    #[arg(long, value_parser = parse_points_arg, allow_hyphen_values = true)]
    points: PointsArg,
    /// Anchor (required for kraus).
    #[arg(long, allow_negative_numbers = true)]
    anchor: Option<f64>,
    #[arg(long, value_parser = parse_interval_arg, allow_hyphen_values = true)]
    interval: Option<IntervalArg>,
    /// Gauss–Legendre nodes per kernel piece.
    #[arg(long, default_value_t = QuadratureRule::DEFAULT_NODES)]
    nodes: usize,
    /// Maximum accepted entrywise relative defect.
    #[arg(long, default_value_t = 1e-7)]
    max_defect: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn thread_cap() -> Result<usize, String> {
    match std::env::var("MMCHECK_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
            Ok(n) => Ok(n),
            Err(_) => Err(format!(
                "MMCHECK_THREADS must be a non-negative integer, got `{s}`"
            )),
        },
    }
}

fn interval_of(arg: Option<IntervalArg>) -> Result<Interval, String> {
    match arg {
        Some(IntervalArg((a, b))) => Interval::new(a, b).map_err(|e| e.to_string()),
        None => Ok(Interval::UNBOUNDED),
    }
}

fn oracle_for(function: &str, interval: Option<IntervalArg>) -> Result<FunctionOracle, String> {
    let domain = interval_of(interval)?;
    FunctionOracle::parse(function, domain).map_err(|e| e.to_string())
}

fn finish<C: Serialize>(
    command: &'static str,
    config: C,
    result: ResultBody,
    out: &OutputArgs,
    code: u8,
) -> Result<u8, String> {
    let payload = match out.format {
        Format::Json => Report::new(command, config, result).to_json(),
        Format::Text => render_text(&result),
    };
    emit(&payload, out.output.as_ref()).map_err(|e| format!("cannot write report: {e}"))?;
    Ok(code)
}

fn verdict_code(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::CertifiedPositive => 0,
        Verdict::Refuted | Verdict::Marginal => 1,
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let threads = thread_cap()?;
    match cli.command {
        Command::Classify(args) => {
            let f = oracle_for(&args.function, Some(args.interval))?;
            let req = CertificationRequest::new(f, args.n, args.property.to_property())
                .with_grid_size(args.grid_size)
                .with_random_tuples(args.random_tuples)
                .with_tolerance(args.tolerance)
                .with_seed(args.seed)
                .with_threads(threads);
            let report = classify::certify(&req).map_err(|e| e.to_string())?;
            let code = verdict_code(report.verdict);
            let body = ResultBody::certification(args.property.name().into(), args.n, &report);
            finish("classify", &args, body, &args.out, code)
        }
        Command::Oracle(args) => {
            let f = oracle_for(&args.function, Some(args.interval))?;
            let req = CertificationRequest::new(f, args.n, args.property.to_property())
                .with_trials(args.trials)
                .with_tolerance(args.tolerance)
                .with_seed(args.seed)
                .with_threads(threads);
            let report = classify::definition_oracle(&req).map_err(|e| e.to_string())?;
            let code = verdict_code(report.verdict);
            let body =
                ResultBody::oracle(args.property.name().into(), args.n, args.trials, &report);
            finish("oracle", &args, body, &args.out, code)
        }
        Command::Loewner(args) => {
            let f = oracle_for(&args.function, args.interval)?;
            let tuple =
                PointTuple::new(args.points.0.clone(), &f.domain()).map_err(|e| e.to_string())?;
            let matrix = matrices::loewner(&f, &tuple).map_err(|e| e.to_string())?;
            let psd = matrices::psd_verdict(&matrix, args.tolerance);
            let code = u8::from(!psd.is_psd);
            let body = ResultBody::Matrix {
                which: "loewner".into(),
                matrix,
                psd,
            };
            finish("loewner", &args, body, &args.out, code)
        }
        Command::Kraus(args) => {
            let f = oracle_for(&args.function, args.interval)?;
            let tuple =
                PointTuple::new(args.points.0.clone(), &f.domain()).map_err(|e| e.to_string())?;
            let matrix =
                matrices::kraus(&f, args.anchor, &tuple).map_err(|e| e.to_string())?;
            let psd = matrices::psd_verdict(&matrix, args.tolerance);
            let code = u8::from(!psd.is_psd);
            let body = ResultBody::Matrix {
                which: "kraus".into(),
                matrix,
                psd,
            };
            finish("kraus", &args, body, &args.out, code)
        }
        Command::Hankel(args) => {
            let f = oracle_for(&args.function, args.interval)?;
            let (which, matrix) = match args.which {
                HankelKind::M => (
                    "hankel-m",
                    matrices::hankel_m(&f, args.at, args.n).map_err(|e| e.to_string())?,
                ),
                HankelKind::K => (
                    "hankel-k",
                    matrices::hankel_k(&f, args.at, args.n).map_err(|e| e.to_string())?,
                ),
            };
            let psd = matrices::psd_verdict(&matrix, args.tolerance);
            let code = u8::from(!psd.is_psd);
            let body = ResultBody::Matrix {
                which: which.into(),
                matrix,
                psd,
            };
            finish("hankel", &args, body, &args.out, code)
        }
        Command::Kernel(args) => {
            let tuple = PointTuple::new(args.points.0.clone(), &Interval::UNBOUNDED)
                .map_err(|e| e.to_string())?;
            let n = tuple.len();
            let (which, kernel) = match args.which {
                KernelKind::I => (
                    "i",
                    kernels::weight_i(&tuple, n).map_err(|e| e.to_string())?,
                ),
                KernelKind::J => {
                    let anchor = args
                        .anchor
                        .ok_or_else(|| "--anchor is required for the j kernel".to_string())?;
                    (
                        "j",
                        kernels::weight_j(anchor, &tuple, n).map_err(|e| e.to_string())?,
                    )
                }
            };
            let body = ResultBody::kernel(which, args.anchor, &kernel);
            finish("kernel", &args, body, &args.out, 0)
        }
        Command::VerifyRepresentation(args) => {
            let f = oracle_for(&args.function, args.interval)?;
            let tuple =
                PointTuple::new(args.points.0.clone(), &f.domain()).map_err(|e| e.to_string())?;
            let rule = QuadratureRule::new(args.nodes);
            let (which, rep) = match args.which {
                RepresentationKind::Loewner => (
                    "loewner",
                    represent::verify_loewner_representation(&f, &tuple, &rule)
                        .map_err(|e| e.to_string())?,
                ),
                RepresentationKind::Kraus => {
                    let anchor = args.anchor.ok_or_else(|| {
                        "--anchor is required for the kraus representation".to_string()
                    })?;
                    (
                        "kraus",
                        represent::verify_kraus_representation(&f, anchor, &tuple, &rule)
                            .map_err(|e| e.to_string())?,
                    )
                }
            };
            let ok = rep.max_rel_defect <= args.max_defect;
            let body = ResultBody::representation(which, &rep, args.nodes, ok);
            finish(
                "verify-representation",
                &args,
                body,
                &args.out,
                u8::from(!ok),
            )
        }
    }
}
