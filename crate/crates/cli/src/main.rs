//! `avcdos`: decide whether a jammer can shut down an arbitrarily varying
//! channel, with exact witnesses and certificates.

mod bss_cmd;
mod error;
mod exact;
mod report;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use avcdos::channel::vectorize;
use avcdos::rational::format_rational;

use error::CliError;
use report::{Mode, Params};

#[derive(Parser)]
#[command(
    name = "avcdos",
    version,
    about = "DoS detectability for arbitrarily varying channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a channel file (or a directory of them with --batch).
    Analyze(AnalyzeArgs),
    /// Print the channel's t-vector (x outermost, then s, then y) as CSV.
    Vectorize { channel: PathBuf },
    /// BSS machine tools.
    #[command(subcommand)]
    Bss(bss_cmd::BssCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Channel JSON file.
    #[arg(required_unless_present_any = ["verify", "batch"])]
    channel: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "partial")]
    mode: Mode,
    /// State cost file ({"costs": [...]}).
    #[arg(long)]
    state_cost: Option<PathBuf>,
    /// Input cost file ({"costs": [...]}).
    #[arg(long)]
    input_cost: Option<PathBuf>,
    /// Jammer budget Λ as num/den.
    #[arg(long)]
    lambda: Option<String>,
    /// Transmitter budget Γ as num/den.
    #[arg(long)]
    gamma: Option<String>,
    /// Input distribution file ({"p": [...]}).
    #[arg(long)]
    input_dist: Option<PathBuf>,
    /// Include witnesses (symmetrizers, hull intersections, optimal points).
    #[arg(long)]
    witness: bool,
    /// Include certificates (Farkas vectors, separators, dual bounds).
    #[arg(long)]
    certificate: bool,
    /// Examine every input pair instead of stopping at the first disjoint one.
    #[arg(long)]
    full_report: bool,
    /// Capacity tolerance in bits.
    #[arg(long, default_value_t = avcdos::capacity::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = avcdos::capacity::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "json")]
    report: ReportFormat,
    /// Re-check the witnesses and certificates in a JSON report.
    #[arg(long, conflicts_with_all = ["channel", "batch"])]
    verify: Option<PathBuf>,
    /// Analyze every *.json channel in a directory, in name order.
    #[arg(long, conflicts_with = "channel")]
    batch: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_params(a: &AnalyzeArgs) -> Result<Params, CliError> {
    let cost = |p: &Option<PathBuf>| -> Result<_, CliError> {
        p.as_deref()
            .map(|p| {
                avcdos::io::parse_cost(&read(p)?)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            })
            .transpose()
    };
    let budget = |name: &str, v: &Option<String>| -> Result<_, CliError> {
        v.as_deref()
            .map(|s| exact::parse_exact(name, s))
            .transpose()
    };
    let input_dist = a
        .input_dist
        .as_deref()
        .map(|p| {
            avcdos::io::parse_distribution(&read(p)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        })
        .transpose()?;
    Ok(Params {
        state_cost: cost(&a.state_cost)?,
        input_cost: cost(&a.input_cost)?,
        lambda: budget("--lambda", &a.lambda)?,
        gamma: budget("--gamma", &a.gamma)?,
        input_dist,
        witness: a.witness,
        certificate: a.certificate,
        full_report: a.full_report,
        tol: a.tol,
        max_iter: a.max_iter,
    })
}

fn analyze_file(path: &Path, mode: Mode, params: &Params) -> Result<Value, CliError> {
    let w = avcdos::io::parse_channel(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    report::analyze(&w, mode, params, &path.display().to_string())
}

fn emit(v: &Value, format: ReportFormat) {
    match format {
        ReportFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(v).expect("report serializes")
        ),
        ReportFormat::Text => print!("{}", report::render_text(v)),
    }
}

fn run_analyze(a: AnalyzeArgs) -> Result<ExitCode, CliError> {
    if let Some(path) = &a.verify {
        let v = verify::verify_report(&read(path)?)?;
        emit(&v, a.report);
        return Ok(ExitCode::SUCCESS);
    }
    let params = load_params(&a)?;
    if let Some(dir) = &a.batch {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let results: Vec<Result<Value, CliError>> = files
            .par_iter()
            .map(|f| analyze_file(f, a.mode, &params))
            .collect();
        let worst = results
            .iter()
            .filter_map(|r| r.as_ref().err())
            .map(CliError::code)
            .max();
        let items: Vec<Value> = files
            .iter()
            .zip(results)
            .map(|(f, r)| match r {
                Ok(v) => v,
                Err(e) => {
                    let mut obj = e.to_json();
                    obj["file"] = json!(f.display().to_string());
                    obj
                }
            })
            .collect();
        match a.report {
            ReportFormat::Json => emit(&Value::Array(items), a.report),
            ReportFormat::Text => {
                for (f, item) in files.iter().zip(&items) {
                    println!("== {} ==", f.display());
                    match item.get("error") {
                        Some(e) => println!("error: {}", e["message"].as_str().unwrap_or_default()),
                        None => print!("{}", report::render_text(item)),
                    }
                }
            }
        }
        return Ok(worst.map_or(ExitCode::SUCCESS, |c| ExitCode::from(c as u8)));
    }
    let path = a.channel.as_deref().expect("clap requires a channel");
    let v = analyze_file(path, a.mode, &params)?;
    emit(&v, a.report);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match cli.command {
        Command::Analyze(a) => {
            let f = a.report;
            (run_analyze(a), f)
        }
        Command::Vectorize { channel } => (
            read(&channel).and_then(|text| {
                let w =
                    avcdos::io::parse_channel(&text).map_err(|e| CliError::Input(e.to_string()))?;
                let t: Vec<String> = vectorize(&w).iter().map(format_rational).collect();
                println!("{}", t.join(","));
                Ok(ExitCode::SUCCESS)
            }),
            ReportFormat::Text,
        ),
        Command::Bss(cmd) => (bss_cmd::run(cmd), ReportFormat::Text),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            match format {
                ReportFormat::Json => emit(&e.to_json(), ReportFormat::Json),
                ReportFormat::Text => eprintln!("error: {e}"),
            }
            ExitCode::from(e.code() as u8)
        }
    }
}
