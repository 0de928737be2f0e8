use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use subfactor_core::tl::{tl_eval, tl_eval_at, DeltaValue};
use subfactor_lab::{load_scenario, run_scenario, Options};

#[derive(Parser)]
#[command(name = "subfactor-lab", version, about = "Run subfactor scenarios and evaluate Temperley-Lieb expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Tolerance for float-mode identity checks.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Bits used for decimal renderings of exact values.
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave out the timing block.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate a Temperley-Lieb expression.
    Tl {
        expr: String,
        /// Specialize δ to an exact (`2+√2`) or float value.
        #[arg(long)]
        delta: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { file, seed, restarts, tol, precision, format, out, no_timing } => {
            let sc = match load_scenario(&file) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            let opts = Options { seed, restarts, tol, precision };
            match run_scenario(&sc, &opts) {
                Ok(outcome) => {
                    let body = match format {
                        Format::Json => outcome.to_json_string(!no_timing),
                        Format::Csv => match outcome.to_csv() {
                            Ok(s) => s,
                            Err(e) => {
                                eprintln!("error: {e}");
                                return ExitCode::from(1);
                            }
                        },
                    };
                    match &out {
                        Some(path) => {
                            if let Err(e) = std::fs::write(path, body) {
                                eprintln!("error: cannot write {}: {e}", path.display());
                                return ExitCode::from(1);
                            }
                        }
                        None => print!("{body}"),
                    }
                    for f in outcome.failures() {
                        eprintln!("FAIL {f}");
                    }
                    if !outcome.complete() {
                        eprintln!("warning: an optimizer did not converge; report is partial");
                    }
                    outcome.exit_code()
                }
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            }
        }
        Command::Tl { expr, delta } => {
            let result = match delta {
                Some(d) => d.parse::<DeltaValue>().and_then(|d| tl_eval_at(&expr, &d)),
                None => tl_eval(&expr).map(|v| v.to_string()),
            };
            match result {
                Ok(v) => {
                    println!("{v}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
