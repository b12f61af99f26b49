use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Subcommand, ValueEnum};

use avcdos::bss::compile::{
    compile_farkas_dual, compile_symmetrizability_with, CompileCaps, CompileError, CompileMode,
};
use avcdos::bss::interp::{trace_program_with, RunError, RunOptions, DEFAULT_STEP_CAP};
use avcdos::bss::parse::parse_program;
use avcdos::bss::trace::verify_trace_text;
use avcdos::channel::Dims;
use avcdos::rational::{format_rational, Rational};

use crate::error::CliError;
use crate::exact::parse_exact;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompileKind {
    /// Always halts with 1 or 0.
    Decide,
    /// Halts with 1 on a positive answer, loops otherwise.
    Semi,
}

#[derive(Subcommand)]
pub enum BssCommand {
    /// Run a program and print its output as comma-separated rationals.
    Run {
        program: PathBuf,
        /// Input as comma-separated rationals, or a file holding them.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        /// Write the execution trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Defaults to AVCDOS_STEP_CAP, then 1000000.
        #[arg(long)]
        step_cap: Option<u64>,
        /// Keep every trace record instead of summarizing long runs.
        #[arg(long)]
        full_trace: bool,
    },
    /// Emit a program deciding symmetrizability at fixed dimensions.
    CompileSym {
        /// NX,NS,NY
        #[arg(long)]
        dims: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "decide")]
        mode: CompileKind,
        /// Emit the Farkas-dual program (output 1 iff not symmetrizable).
        #[arg(long)]
        dual: bool,
    },
    /// Check a trace file; prints OK or INVALID.
    VerifyTrace { file: PathBuf },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn env_u64(name: &str) -> Result<Option<u64>, CliError> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Input(format!("{name}: expected a positive integer, got {v:?}"))
        }),
        Err(_) => Ok(None),
    }
}

fn parse_input(arg: &str) -> Result<Vec<Rational>, CliError> {
    let text = if Path::new(arg).is_file() {
        read(Path::new(arg))?
    } else {
        arg.to_string()
    };
    text.split([',', '\n'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_exact("--input", s))
        .collect()
}

fn parse_dims(s: &str) -> Result<Dims, CliError> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--dims: expected NX,NS,NY, got {s:?}")))?;
    match parts[..] {
        [nx, ns, ny] => Dims::new(nx, ns, ny).map_err(|e| CliError::Input(format!("--dims: {e}"))),
        _ => Err(CliError::Input(format!(
            "--dims: expected NX,NS,NY, got {s:?}"
        ))),
    }
}

fn run_error(e: RunError) -> CliError {
    match e {
        RunError::Diverged { .. } => CliError::Cap(e.to_string()),
        RunError::DivisionByZero { .. } | RunError::InvalidStepCap => {
            CliError::Input(e.to_string())
        }
    }
}

pub fn run(cmd: BssCommand) -> Result<ExitCode, CliError> {
    match cmd {
        BssCommand::Run {
            program,
            input,
            trace,
            step_cap,
            full_trace,
        } => {
            let prog = parse_program(&read(&program)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", program.display())))?;
            let input = parse_input(&input)?;
            let step_cap = match step_cap {
                Some(n) => n,
                None => env_u64("AVCDOS_STEP_CAP")?.unwrap_or(DEFAULT_STEP_CAP),
            };
            let (out, tr) = trace_program_with(
                &prog,
                &input,
                RunOptions {
                    step_cap,
                    full_trace,
                },
            )
            .map_err(run_error)?;
            if let Some(path) = trace {
                std::fs::write(&path, tr.to_text())
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            let out: Vec<String> = out.iter().map(format_rational).collect();
            println!("{}", out.join(","));
        }
        BssCommand::CompileSym {
            dims,
            output,
            mode,
            dual,
        } => {
            let dims = parse_dims(&dims)?;
            let mut caps = CompileCaps::default();
            if let Some(rows) = env_u64("AVCDOS_FM_CAP")? {
                caps.max_rows = rows as usize;
            }
            let mode = match mode {
                CompileKind::Decide => CompileMode::Decide,
                CompileKind::Semi => CompileMode::SemiDecide,
            };
            let prog = if dual {
                compile_farkas_dual(dims, &caps, mode)
            } else {
                compile_symmetrizability_with(dims, &caps, mode)
            }
            .map_err(|e: CompileError| CliError::Cap(e.to_string()))?;
            std::fs::write(&output, prog.to_source())
                .map_err(|e| CliError::Input(format!("{}: {e}", output.display())))?;
            eprintln!("wrote {} nodes to {}", prog.len(), output.display());
        }
        BssCommand::VerifyTrace { file } => {
            let ok = verify_trace_text(&read(&file)?);
            println!("{}", if ok { "OK" } else { "INVALID" });
        }
    }
    Ok(ExitCode::SUCCESS)
}
