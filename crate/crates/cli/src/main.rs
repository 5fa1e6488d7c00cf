use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use produal_cli::{exit, load_config, output, recheck, run_config, THREADS_ENV};

#[derive(Parser)]
#[command(name = "produal", version, about = "Product-space duality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its report.
    Run {
        config: PathBuf,
        /// Report path; defaults to the config's `output`, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Human-readable summary table path; defaults to stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Record wall times (reports are then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// List the experiment families and their config keys.
    ListFamilies,
    /// Re-verify a written report.
    Recheck { report: PathBuf },
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV}={v} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn write(path: Option<&PathBuf>, text: &str, to_stdout: bool) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None if to_stdout => {
            print!("{text}");
            Ok(())
        }
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("{e}");
        return code(exit::PARSE);
    }
    match cli.command {
        Command::ListFamilies => {
            print!("{}", produal_cli::list_families());
            code(exit::OK)
        }
        Command::Recheck { report } => {
            let text = match std::fs::read_to_string(&report) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", report.display());
                    return code(exit::PARSE);
                }
            };
            match recheck::recheck_text(&text) {
                Err(e) => {
                    eprintln!("{}: {e}", report.display());
                    code(exit::PARSE)
                }
                Ok(o) => {
                    for p in &o.problems {
                        eprintln!("{p}");
                    }
                    println!("{} records, {} problems", o.records, o.problems.len());
                    code(if o.ok() { exit::OK } else { exit::FAILURES })
                }
            }
        }
        Command::Run { config, out, summary, timings } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return code(e.exit_code());
                }
            };
            let report = match run_config(&cfg, timings) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return code(e.exit_code());
                }
            };
            let target = out.or(cfg.output.clone());
            if let Err(e) = write(target.as_ref(), &output::to_jsonl(&report), true) {
                eprintln!("{e}");
                return code(exit::CONSTRUCTION);
            }
            if let Err(e) = write(summary.as_ref(), &output::summary_table(&report), false) {
                eprintln!("{e}");
                return code(exit::CONSTRUCTION);
            }
            code(if report.passed() { exit::OK } else { exit::FAILURES })
        }
    }
}
