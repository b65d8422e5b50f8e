use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use reactive_nav::batch::{batch, run_one};
use reactive_nav::scenario::parse_and_validate;
use reactive_nav::sim::FailureReason;

/// Reactive replanning and tracking simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and report the first violated constraint.
    Validate { file: PathBuf },
    /// Run one episode and write its artifacts to a directory.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG render of the run.
        #[arg(long)]
        render: bool,
    },
    /// Run every scenario matching a glob pattern.
    Batch {
        pattern: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        render: bool,
    },
}

const EXIT_ERROR: u8 = 1;

fn exit_code(status: &str) -> u8 {
    match status {
        "success" => 0,
        s if s == FailureReason::PlannerInfeasible.as_str() => 2,
        s if s == FailureReason::Timeout.as_str() => 3,
        s if s == FailureReason::Collision.as_str() => 4,
        s if s == FailureReason::PlannerError.as_str() => 5,
        _ => EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { file } => {
            let s = parse_and_validate(&file)
                .with_context(|| format!("{} is not a valid scenario", file.display()))?;
            println!(
                "{}: ok ({} obstacles, start ({}, {}), goal ({}, {}))",
                file.display(),
                s.obstacles.len(),
                s.start.x,
                s.start.y,
                s.goal.x,
                s.goal.y
            );
            Ok(0)
        }
        Command::Run { file, out, render } => {
            let row = run_one(&file, &out, render);
            println!("{}: {}", file.display(), row.status);
            if let (Some(len), Some(effort)) = (row.trajectory_length, row.control_effort) {
                println!(
                    "length {len}, effort {effort}, artifacts in {}",
                    out.display()
                );
            }
            Ok(exit_code(&row.status))
        }
        Command::Batch {
            pattern,
            out,
            workers,
            render,
        } => {
            let rows = batch(&pattern, &out, workers, render)?;
            let ok = rows.iter().filter(|r| r.success).count();
            for r in &rows {
                println!("{}: {}", r.scenario.display(), r.status);
            }
            println!(
                "{ok}/{} succeeded; summary in {}",
                rows.len(),
                out.display()
            );
            Ok(if ok == rows.len() { 0 } else { EXIT_ERROR })
        }
    }
}
