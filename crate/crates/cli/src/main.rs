//! `equivbound` command-line front end.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use equivbound::oracle::{bound_stress_test, comparison_table, write_table_csv};
use equivbound::{
    bound_report, build_achieving_channel, decode_profile, equivocation_bound, estimate, ingest_samples, phi_star,
    read_confusion_csv, round_sig, write_confusion_csv, ConfusionMatrix, Error, SampleFormat,
};

const FORMATS: &str = "\
File formats:
  Confusion matrix (CSV): n rows of n comma-separated decimals, the joint
    probabilities p(x, x̂). Row = true signal, column = decode. Entries must be
    nonnegative, sum to 1 within 1e-9, and each diagonal entry must be the
    largest in its column within 1e-9. No header unless --header is given.
  Samples (CSV): header row naming columns x and y, one sample per row.
  Samples (JSONL): one {\"x\": ..., \"y\": ...} object per line.
    Labels are opaque strings; numbers are read by their decimal text.
  Achieving channel (JSON): {p_hat, fibers: [{xhat, columns: [{support, weight}]}]}.
  Example table (CSV): header n,h_post,bound_ours,bound_kov.

Signals are labelled from 1 in human-readable tables and from 0 in JSON.
Floats are printed to 12 significant digits.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 bound violation
found, 4 I/O error. Errors go to stderr prefixed with `error:`.";

#[derive(Parser)]
#[command(name = "equivbound", version, about = "Equivocation bounds from MAP confusion matrices", after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a confusion matrix and report every violated constraint
    Validate(ConfusionArg),
    /// Print entropies, both lower bounds on H(X|Y) and the upper bound on I(X;Y)
    Bound {
        #[command(flatten)]
        input: ConfusionArg,
        /// Emit JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Build a channel that attains the bound and write it as JSON
    Construct {
        #[command(flatten)]
        input: ConfusionArg,
        /// Output file for the channel JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// Stress-test the bound on seeded random channels
    OracleCheck {
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Largest number of signals
        #[arg(long, default_value_t = 5)]
        nx: usize,
        /// Largest number of channel outputs
        #[arg(long, default_value_t = 40)]
        ny: usize,
    },
    /// Tabulate the bounds on the example family
    Example {
        /// Alphabet sizes: comma-separated values and inclusive ranges, e.g. `2,4,10..20`
        #[arg(long, default_value = "2..30")]
        n_list: String,
        /// Output CSV (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the mutual-information sandwich from (x, y) samples
    Estimate {
        /// Sample file, or `-` for stdin
        #[arg(long)]
        samples: PathBuf,
        /// Input format (sniffed from the first byte if omitted)
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Also write the empirical confusion matrix as CSV
        #[arg(long)]
        dump_confusion: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfusionArg {
    /// Confusion-matrix CSV file
    #[arg(long)]
    confusion: PathBuf,
    /// Skip one header row
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
    Violation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Violation(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Violation(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::ViolationFound { .. } => Failure::Violation(e.to_string()),
            Error::InvalidArgument(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate(input) => validate(&input),
        Command::Bound { input, json } => bound(&input, json),
        Command::Construct { input, out } => construct(&input, &out),
        Command::OracleCheck { trials, seed, nx, ny } => oracle_check(trials, seed, nx, ny),
        Command::Example { n_list, out } => example(&n_list, out.as_deref()),
        Command::Estimate { samples, format, dump_confusion } => {
            run_estimate(&samples, format, dump_confusion.as_deref())
        }
    }
}

fn load_confusion(input: &ConfusionArg) -> Result<ConfusionMatrix, Failure> {
    let file = File::open(&input.confusion).map_err(|e| io_failure(&input.confusion, e))?;
    Ok(read_confusion_csv(BufReader::new(file), input.header)?)
}

/// Rounds every non-integer number to 12 significant digits.
fn rounded(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            // `+ 0.0` turns -0.0 into 0.0.
            serde_json::Number::from_f64(round_sig(x, 12) + 0.0).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let v = serde_json::to_value(value).map_err(|e| Failure::Invalid(e.to_string()))?;
    serde_json::to_string_pretty(&rounded(v)).map_err(|e| Failure::Invalid(e.to_string()))
}

fn fmt(x: f64) -> String {
    equivbound::format_sig(x)
}

fn print_stdout(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(|e| Failure::Io(format!("stdout: {e}")))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run leaves no partial output.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Outcome {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(|e| io_failure(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

fn validate(input: &ConfusionArg) -> Outcome {
    match load_confusion(input) {
        Ok(cm) => {
            let profile = decode_profile(&cm);
            let mut text = format!("valid: {} signals, overall error {}\n", cm.n(), fmt(cm.overall_error()));
            text.push_str(&format!("{:<8}{:<16}{}\n", "decode", "p(x̂)", "error"));
            for (i, (p, eps)) in profile.p_hat.iter().zip(&profile.eps).enumerate() {
                let eps = eps.map_or_else(|| "-".to_string(), fmt);
                text.push_str(&format!("{:<8}{:<16}{}\n", i + 1, fmt(*p), eps));
            }
            print_stdout(text.trim_end())
        }
        Err(Failure::Invalid(msg)) => {
            print_stdout(&format!("invalid: {msg}"))?;
            Err(Failure::Invalid("confusion matrix failed validation".into()))
        }
        Err(other) => Err(other),
    }
}

#[derive(Serialize)]
struct DecodeRow {
    xhat: usize,
    p_hat: f64,
    eps: Option<f64>,
    phi_star: Option<f64>,
}

#[derive(Serialize)]
struct BoundOutput {
    n: usize,
    h_x: f64,
    h_x_given_xhat: f64,
    i_x_xhat: f64,
    bound_confusion: f64,
    bound_kovalevsky: f64,
    overall_eps: f64,
    mi_upper: f64,
    decodes: Vec<DecodeRow>,
}

fn bound(input: &ConfusionArg, json: bool) -> Outcome {
    let cm = load_confusion(input)?;
    let r = bound_report(&cm);
    let profile = decode_profile(&cm);
    let decodes = profile
        .p_hat
        .iter()
        .zip(&profile.eps)
        .enumerate()
        .map(|(xhat, (&p_hat, &eps))| {
            let phi = eps.map(phi_star).transpose()?;
            Ok(DecodeRow { xhat, p_hat, eps, phi_star: phi })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if json {
        let out = BoundOutput {
            n: cm.n(),
            h_x: r.h_x,
            h_x_given_xhat: r.h_x_given_xhat,
            i_x_xhat: r.i_x_xhat,
            bound_confusion: r.bound_confusion,
            bound_kovalevsky: r.bound_kovalevsky,
            overall_eps: r.overall_eps,
            mi_upper: r.mi_upper,
            decodes,
        };
        return print_stdout(&to_json(&out)?);
    }
    let mut text = String::new();
    for (name, v) in [
        ("H(X)", r.h_x),
        ("H(X|X̂)", r.h_x_given_xhat),
        ("I(X;X̂)", r.i_x_xhat),
        ("bound_confusion", r.bound_confusion),
        ("bound_kovalevsky", r.bound_kovalevsky),
        ("overall_eps", r.overall_eps),
        ("mi_upper", r.mi_upper),
    ] {
        text.push_str(&format!("{name:<18}{}\n", fmt(v)));
    }
    text.push_str(&format!("\n{:<8}{:<16}{:<16}{}\n", "decode", "p(x̂)", "error", "phi*"));
    for d in &decodes {
        let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), fmt);
        text.push_str(&format!("{:<8}{:<16}{:<16}{}\n", d.xhat + 1, fmt(d.p_hat), show(d.eps), show(d.phi_star)));
    }
    print_stdout(text.trim_end())
}

fn construct(input: &ConfusionArg, out: &Path) -> Outcome {
    let cm = load_confusion(input)?;
    let channel = build_achieving_channel(&cm)?;
    let achieved = channel.equivocation()?;
    let bound = equivocation_bound(&cm);
    let json = to_json(&channel.dump())?;
    write_atomic(out, |w| writeln!(w, "{json}").map_err(|e| io_failure(out, e)))?;
    print_stdout(&format!(
        "achieved equivocation  {}\nbound                  {}\n|achieved - bound|     {}\noutputs                {}",
        fmt(achieved),
        fmt(bound),
        fmt((achieved - bound).abs()),
        channel.output_count()
    ))
}

fn oracle_check(trials: usize, seed: u64, nx: usize, ny: usize) -> Outcome {
    let report = bound_stress_test(trials, nx, ny, seed)?;
    print_stdout(&to_json(&report)?)?;
    Ok(report.check()?)
}

/// Parses `2,3,7..9` into `[2, 3, 7, 8, 9]`; ranges are inclusive.
fn parse_n_list(spec: &str) -> Result<Vec<usize>, Failure> {
    let bad = |part: &str| Failure::Usage(format!("invalid --n-list entry {part:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad(part))?;
                let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("--n-list is empty".into()));
    }
    Ok(out)
}

fn example(n_list: &str, out: Option<&Path>) -> Outcome {
    let rows = comparison_table(&parse_n_list(n_list)?)?;
    match out {
        Some(path) => write_atomic(path, |w| Ok(write_table_csv(&rows, w)?)),
        None => {
            let mut buf = Vec::new();
            write_table_csv(&rows, &mut buf)?;
            print_stdout(String::from_utf8_lossy(&buf).trim_end())
        }
    }
}

fn run_estimate(samples: &Path, format: Option<Format>, dump: Option<&Path>) -> Outcome {
    let format = format.map(|f| match f {
        Format::Csv => SampleFormat::Csv,
        Format::Jsonl => SampleFormat::Jsonl,
    });
    let batch = if samples == Path::new("-") {
        ingest_samples(io::stdin().lock(), format)?
    } else {
        let file = File::open(samples).map_err(|e| io_failure(samples, e))?;
        ingest_samples(BufReader::new(file), format)?
    };
    let report = estimate(&batch)?;
    if let Some(path) = dump {
        let cm = equivbound::empirical_confusion(&batch)?;
        write_atomic(path, |w| Ok(write_confusion_csv(&cm, w)?))?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print_stdout(&to_json(&report)?)
}
