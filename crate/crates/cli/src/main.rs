//! `permkit classify|check|sample|metric <file>`: batch screening of
//! candidate kernels.

mod commands;
mod input;
mod text;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use commands::{CheckOpts, Command, SampleOpts};

#[derive(Parser)]
#[command(name = "permkit", version, about = "Screen matrices as kernels of permanental vectors")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Plain-text or JSON matrix file.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Include per-matrix wall-clock times (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Necessary conditions and the two-class verdict.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Resolvent sweep, log-determinant series and the all-β certificate.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e3)]
        sweep_rmax: f64,
        #[arg(long, default_value_t = 8)]
        series_degree: usize,
    },
    /// Gaussian-squares sampling of class-1 kernels against closed forms.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Sample count; accepts forms like 1e6.
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        alpha_grid: usize,
    },
    /// The kernel pseudo-metric and its triangle inequality.
    Metric {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v < 1.0 || v.fract() != 0.0 || v > 1e12 {
        return Err(format!("count must be a positive integer, got {s}"));
    }
    Ok(v as usize)
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("permkit: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, cmd) = match cli.command {
        Cmd::Classify { common } => (common, Command::Classify),
        Cmd::Check { common, sweep_rmax, series_degree } => {
            if series_degree > permkit_core::divisibility::MAX_SERIES_DEGREE {
                return usage_error(permkit_core::Error::DegreeTooLarge {
                    got: series_degree,
                    max: permkit_core::divisibility::MAX_SERIES_DEGREE,
                });
            }
            if !(sweep_rmax > 0.0 && sweep_rmax.is_finite()) {
                return usage_error("--sweep-rmax must be positive");
            }
            (common, Command::Check(CheckOpts { sweep_rmax, series_degree }))
        }
        Cmd::Sample { common, beta, n, seed, alpha_grid } => {
            if let Err(e) = permkit_core::sampleverify::half_integer_count(beta) {
                return usage_error(format!("BadBeta: {e}"));
            }
            (common, Command::Sample(SampleOpts { beta, n, seed, alpha_grid }))
        }
        Cmd::Metric { common } => (common, Command::Metric),
    };

    if let Some(t) = std::env::var("PERMKIT_THREADS").ok().filter(|s| !s.is_empty()) {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => return usage_error(format!("PERMKIT_THREADS must be a positive integer, got {t:?}")),
        }
    }

    let content = match std::fs::read_to_string(&common.file) {
        Ok(c) => c,
        Err(e) => return usage_error(format!("{}: {e}", common.file.display())),
    };
    let entries = match input::parse(&content) {
        Ok(e) => e,
        Err(e) => return usage_error(format!("{}: {e}", common.file.display())),
    };

    let results: Vec<(Value, bool)> = entries
        .par_iter()
        .map(|entry| {
            let start = Instant::now();
            let r = commands::run(&cmd, entry);
            let mut v = r.value;
            if common.timings {
                v["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
            }
            (v, r.numeric_failure)
        })
        .collect();
    let numeric_failure = results.iter().any(|r| r.1);
    let values: Vec<Value> = results.into_iter().map(|r| r.0).collect();
    let report = json!({
        "command": cmd.name(),
        "summary": commands::summary(&cmd, &values),
        "entries": values,
    });
    match common.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
        Format::Text => print!("{}", text::render(&report)),
    }
    if numeric_failure {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}
