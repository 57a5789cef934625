#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod demos;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;

use config::{BatchConfig, RunConfig};
use runner::{execute, pretty, Options, RunError};
use thermoform_core::Exec;

#[derive(Parser)]
#[command(name = "thermoform", version, about = "Pressure curves, recurrence classes and phase transitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON model configuration.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Override the root-finding tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Record wall time in report.json (makes reruns differ).
        #[arg(long)]
        timing: bool,
        /// Also write a gnuplot script for the curve.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Run one of the bundled demos.
    Demo {
        name: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        gnuplot: bool,
    },
    /// List bundled demos.
    ListDemos,
    /// Print the configuration JSON schema.
    Schema,
}

fn configure_threads() -> Result<Exec, RunError> {
    match std::env::var("THERMOFORM_THREADS") {
        Err(_) => Ok(Exec::default()),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| RunError::Validation(format!("THERMOFORM_THREADS must be an integer >= 1, got '{v}'")))?;
            if n == 1 {
                return Ok(Exec::Sequential);
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| RunError::Validation(format!("thread pool: {e}")))?;
            Ok(Exec::Parallel)
        }
    }
}

enum Parsed {
    Single(Box<RunConfig>),
    Batch(BatchConfig),
}

fn parse_config(text: &str) -> Result<Parsed, RunError> {
    let value: Value = serde_json::from_str(text).map_err(|e| RunError::Validation(format!("config is not JSON: {e}")))?;
    let is_batch = value.as_object().is_some_and(|o| o.contains_key("batch"));
    let parsed = if is_batch {
        serde_json::from_value(value).map(Parsed::Batch)
    } else {
        serde_json::from_value(value).map(Parsed::Single)
    };
    parsed.map_err(|e| RunError::Validation(format!("config: {e}")))
}

fn write_files(dir: &Path, files: &std::collections::BTreeMap<String, String>) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_single(cfg: &RunConfig, dir: &Path, opts: &Options, timing: bool) -> Result<Vec<String>, RunError> {
    let start = Instant::now();
    let (mut art, mut report) = execute(cfg, opts)?;
    if timing {
        report["wall_time_seconds"] = Value::from(start.elapsed().as_secs_f64());
    }
    art.files.insert("report.json".into(), pretty(&report));
    write_files(dir, &art.files)?;
    Ok(art.summary)
}

fn run_text(text: &str, dir: &Path, opts: &Options, timing: bool) -> Result<(), RunError> {
    match parse_config(text)? {
        Parsed::Single(cfg) => {
            for line in run_single(&cfg, dir, opts, timing)? {
                println!("{line}");
            }
        }
        Parsed::Batch(batch) => {
            if batch.batch.is_empty() {
                return Err(RunError::Validation("batch is empty".into()));
            }
            let mut index = String::from("index,label,directory\n");
            for (i, cfg) in batch.batch.iter().enumerate() {
                let label = cfg.label.clone().unwrap_or_else(|| format!("run{}", i + 1));
                let sub = format!("{:02}-{}", i + 1, slug(&label));
                for line in run_single(cfg, &dir.join(&sub), opts, timing)? {
                    println!("[{label}] {line}");
                }
                index.push_str(&format!("{},{},{}\n", i + 1, label.replace(',', ";"), sub));
            }
            write_files(dir, &[("index.csv".to_string(), index)].into_iter().collect())?;
        }
    }
    Ok(())
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<(), RunError> {
        match cli.command {
            Command::ListDemos => {
                for d in demos::DEMOS {
                    println!("{:<20} {}", d.name, d.summary);
                }
                Ok(())
            }
            Command::Schema => {
                print!("{}", config::schema_json());
                Ok(())
            }
            Command::Run { config, output, tol, timing, gnuplot } => {
                let exec = configure_threads()?;
                let text = std::fs::read_to_string(&config).map_err(|e| RunError::Io(format!("{}: {e}", config.display())))?;
                run_text(&text, &output, &Options { root_tol: tol, gnuplot, exec }, timing)
            }
            Command::Demo { name, output, timing, gnuplot } => {
                let exec = configure_threads()?;
                let demo = demos::find(&name).ok_or_else(|| {
                    RunError::Validation(format!("unknown demo '{name}'; see `thermoform list-demos`"))
                })?;
                run_text(demo.config, &output, &Options { root_tol: None, gnuplot, exec }, timing)
            }
        }
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thermoform: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
