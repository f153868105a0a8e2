mod problem;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use posreal::bounds::{bounds_report, bounds_report_partial_fraction};
use posreal::checker::{default_horizon, markov_check_values, MARKOV_TOL};
use posreal::realizer::{
    realize_partial_fraction_with_base, realize_with_base, Outcome, RealizeOptions,
};
use posreal::{realize, realize_partial_fraction, BudgetMode, Error};

use problem::{load, load_realization, Input, Problem, RealizationDoc};

const EXIT_OK: u8 = 0;
const EXIT_NO_REALIZATION: u8 = 1;
const EXIT_UNSUPPORTED: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "posreal",
    version,
    about = "Positive realizations of rational transfer functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    PerPole,
    Sum,
}

#[derive(Args)]
struct Common {
    /// Tolerance: Markov agreement for realize/verify, zero threshold for bounds.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write one output file per input into this directory instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Construct and verify a positive realization.
    Realize {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        max_shifts: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Realization of the shifted function H_m to lift instead of constructing one.
        #[arg(long, requires = "base_shift")]
        base: Option<PathBuf>,
        #[arg(long, requires = "base")]
        base_shift: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Zero pattern of the impulse response and dimension lower bounds.
    Bounds {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a realization against a problem file.
    Verify {
        input: PathBuf,
        #[arg(long)]
        realization: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// First impulse-response values.
    Impulse {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Output of one command on one input.
struct Report {
    doc: Value,
    csv: String,
    code: u8,
}

impl Report {
    fn new(doc: Value, csv: String, code: u8) -> Self {
        Self { doc, csv, code }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.doc).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

fn error_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::NotPrimitive(_)
            | Error::MultiplePoleUnsupported { .. }
            | Error::NotApplicable(_)
            | Error::NonpositiveDominantResidue(_),
        ) => EXIT_UNSUPPORTED,
        Some(Error::NegativePrefix { .. } | Error::NegativeImpulse { .. }) => EXIT_NO_REALIZATION,
        Some(
            Error::BlockCheckFailed(_)
            | Error::DegenerateBarycentric(_)
            | Error::LeftoverNegative(_)
            | Error::NegativeEntry { .. }
            | Error::BudgetTooSmall { .. }
            | Error::NotInPolygon { .. },
        ) => EXIT_VERIFICATION,
        _ => EXIT_INPUT,
    }
}

fn error_report(err: &anyhow::Error) -> Report {
    let code = error_code(err);
    let message = format!("{err:#}");
    let outcome = match code {
        EXIT_NO_REALIZATION => "no_positive_realization",
        EXIT_UNSUPPORTED => "unsupported",
        EXIT_VERIFICATION => "internal_error",
        _ => "error",
    };
    let mut doc = json!({ "outcome": outcome, "error": message });
    if let Some(Error::NegativePrefix { index, value } | Error::NegativeImpulse { index, value }) =
        err.downcast_ref::<Error>()
    {
        doc["witness"] = json!({ "index": index, "value": value });
    }
    Report::new(
        doc,
        format!("outcome,{outcome}\nerror,\"{message}\"\n"),
        code,
    )
}

/// Shortest round-trip form, as in the JSON output.
fn num(v: f64) -> String {
    serde_json::to_string(&v).expect("serializable")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

fn realization_csv(doc: &RealizationDoc) -> String {
    let mut s = String::from("A\n");
    for row in &doc.a {
        let _ = writeln!(s, "{}", join(row));
    }
    let _ = writeln!(s, "b\n{}\nc\n{}", join(&doc.b), join(&doc.c));
    s
}

fn parse_mode(s: &str) -> Result<BudgetMode> {
    match s {
        "per-pole" | "per_pole" => Ok(BudgetMode::PerPole),
        "sum" | "conservative_sum" => Ok(BudgetMode::ConservativeSum),
        other => bail!("unknown mode {other:?}"),
    }
}

struct RealizeFlags {
    mode: Option<ModeArg>,
    tol: Option<f64>,
    max_shifts: Option<usize>,
    horizon: Option<usize>,
    base: Option<(PathBuf, usize)>,
}

fn outcome_report(outcome: Outcome) -> Report {
    match outcome {
        Outcome::Realized { realization, trace } => {
            let doc = RealizationDoc::from_realization(&realization);
            let pass = trace.verification.pass;
            let verdict = if pass { "pass" } else { "fail" };
            let csv = realization_csv(&doc);
            Report::new(
                json!({
                    "outcome": "realized",
                    "verdict": verdict,
                    "dimension": doc.dimension,
                    "realization": doc,
                    "verification": trace.verification,
                    "trace": trace,
                }),
                csv,
                if pass { EXIT_OK } else { EXIT_VERIFICATION },
            )
        }
        Outcome::NoPositiveRealization { index, value } => Report::new(
            json!({
                "outcome": "no_positive_realization",
                "witness": { "index": index, "value": value },
            }),
            format!(
                "outcome,no_positive_realization\nindex,{index}\nvalue,{}\n",
                num(value)
            ),
            EXIT_NO_REALIZATION,
        ),
        Outcome::Unsupported { reason } => Report::new(
            json!({ "outcome": "unsupported", "reason": reason }),
            format!("outcome,unsupported\nreason,\"{reason}\"\n"),
            EXIT_UNSUPPORTED,
        ),
        Outcome::IterationCapExceeded { cap } => Report::new(
            json!({ "outcome": "iteration_cap_exceeded", "cap": cap }),
            format!("outcome,iteration_cap_exceeded\ncap,{cap}\n"),
            EXIT_UNSUPPORTED,
        ),
    }
}

fn run_realize(problem: &Problem, flags: &RealizeFlags) -> Result<Report> {
    let o = &problem.options;
    let mode = match (flags.mode, &o.mode) {
        (Some(ModeArg::PerPole), _) => BudgetMode::PerPole,
        (Some(ModeArg::Sum), _) => BudgetMode::ConservativeSum,
        (None, Some(m)) => parse_mode(m)?,
        (None, None) => BudgetMode::PerPole,
    };
    let opts = RealizeOptions {
        mode,
        max_shifts: flags.max_shifts.or(o.max_shifts),
        horizon: flags.horizon.or(o.horizon),
        verify_tol: flags.tol.or(o.tol).unwrap_or(MARKOV_TOL),
        ..Default::default()
    };
    let base = match &flags.base {
        Some((path, m)) => Some((load_realization(path)?, *m)),
        None => problem.base.clone(),
    };
    let outcome = match (&problem.input, base) {
        (Input::Transfer(tf), None) => realize(tf, &opts)?,
        (Input::PartialFractions(pf), None) => realize_partial_fraction(pf, &opts)?,
        (Input::Transfer(tf), Some((b, m))) => realize_with_base(tf, &b, m, &opts)?,
        (Input::PartialFractions(pf), Some((b, m))) => {
            realize_partial_fraction_with_base(pf, &b, m, &opts)?
        }
    };
    Ok(outcome_report(outcome))
}

fn run_bounds(problem: &Problem, tol: Option<f64>) -> Result<Report> {
    let tol = tol.or(problem.options.tol);
    let report = match &problem.input {
        Input::Transfer(tf) => bounds_report(tf, tol)?,
        Input::PartialFractions(pf) => bounds_report_partial_fraction(pf, tol)?,
    };
    let opt = |v: Option<usize>| v.map_or("null".to_string(), |v| v.to_string());
    let zeros: Vec<String> = report.zero_indices.iter().map(|k| k.to_string()).collect();
    let csv = format!(
        "k0,{}\ntheo2,{}\nmn2,{}\nhorizon,{}\nzero_indices,{}\n",
        report.k0,
        opt(report.theo2),
        opt(report.mn2),
        report.horizon,
        zeros.join(";")
    );
    Ok(Report::new(
        json!({
            "k0": report.k0,
            "theo2": report.theo2,
            "mn2": report.mn2,
            "horizon": report.horizon,
            "zero_indices": report.zero_indices,
            "tolerance": report.tolerance,
        }),
        csv,
        EXIT_OK,
    ))
}

fn run_verify(
    problem: &Problem,
    realization: &Path,
    horizon: Option<usize>,
    tol: Option<f64>,
) -> Result<Report> {
    let real = load_realization(realization)?;
    let horizon = horizon
        .or(problem.options.horizon)
        .unwrap_or_else(|| default_horizon(real.dim()));
    let tol = tol.or(problem.options.tol).unwrap_or(MARKOV_TOL);
    let expected = problem.input.target().impulse_response(horizon);
    let report = markov_check_values(&real, &expected, tol);
    let verdict = if report.pass { "pass" } else { "fail" };
    let csv = format!(
        "verdict,{verdict}\nhorizon,{}\nmax_relative_error,{}\nworst_index,{}\nnonnegative,{}\n",
        report.horizon,
        num(report.max_relative_error),
        report.worst_index,
        report.nonnegative
    );
    let code = if report.pass {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    };
    let mut doc = serde_json::to_value(&report)?;
    doc["verdict"] = json!(verdict);
    Ok(Report::new(doc, csv, code))
}

fn run_impulse(problem: &Problem, count: usize) -> Result<Report> {
    let values = problem.input.target().impulse_response(count);
    let mut csv = String::new();
    for &v in &values {
        let _ = writeln!(csv, "{}", num(v));
    }
    Ok(Report::new(
        json!({ "count": count, "impulse": values }),
        csv,
        EXIT_OK,
    ))
}

fn atomic_write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(dir.join(name))
        .map_err(|e| anyhow!("writing {}: {}", name, e.error))?;
    Ok(())
}

fn process_all(
    inputs: &[PathBuf],
    command: &str,
    common: &Common,
    work: impl Fn(&Problem) -> Result<Report> + Sync,
) -> u8 {
    let reports: Vec<Report> = std::thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .iter()
            .map(|path| {
                let work = &work;
                scope.spawn(move || {
                    load(path)
                        .and_then(|p| work(&p))
                        .unwrap_or_else(|e| error_report(&e))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let ext = match common.format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let mut code = EXIT_OK;
    let stdout = std::io::stdout();
    for (path, report) in inputs.iter().zip(&reports) {
        let text = report.render(common.format);
        code = code.max(report.code);
        match &common.out_dir {
            Some(dir) => {
                let stem = path
                    .file_stem()
                    .map_or("output".into(), |s| s.to_string_lossy());
                let name = format!("{stem}.{command}.{ext}");
                if let Err(e) = atomic_write(dir, &name, &text) {
                    eprintln!("posreal: {e:#}");
                    code = code.max(EXIT_INPUT);
                }
            }
            None => {
                let _ = stdout.lock().write_all(text.as_bytes());
            }
        }
        if report.code != EXIT_OK {
            if let Some(err) = report.doc.get("error").and_then(Value::as_str) {
                eprintln!("posreal: {}: {err}", path.display());
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Realize {
            inputs,
            mode,
            max_shifts,
            horizon,
            base,
            base_shift,
            common,
        } => {
            let flags = RealizeFlags {
                mode,
                tol: common.tol,
                max_shifts,
                horizon,
                base: base.zip(base_shift),
            };
            process_all(&inputs, "realize", &common, |p| run_realize(p, &flags))
        }
        Command::Bounds { inputs, common } => {
            let tol = common.tol;
            process_all(&inputs, "bounds", &common, |p| run_bounds(p, tol))
        }
        Command::Verify {
            input,
            realization,
            horizon,
            common,
        } => {
            let tol = common.tol;
            process_all(std::slice::from_ref(&input), "verify", &common, |p| {
                run_verify(p, &realization, horizon, tol)
            })
        }
        Command::Impulse {
            inputs,
            count,
            common,
        } => process_all(&inputs, "impulse", &common, |p| run_impulse(p, count)),
    };
    ExitCode::from(code)
}
