use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mima::commands;
use mima::config::RunConfig;
use mima::verify::{run_all, VerifyScale};

#[derive(Parser)]
#[command(
    name = "mima",
    about = "Pseudo-spectral solver and certification suite for an inviscid 3D drift-wave transport system on the periodic box",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the nonlinear solver; writes diagnostics CSV, snapshots, summary.
    Simulate { config: PathBuf },
    /// Run the successive-linearization construction; writes the residual,
    /// contraction, and certificate report.
    Picard { config: PathBuf },
    /// Run the property self-check suite; exits 5 if any property fails.
    Verify {
        config: Option<PathBuf>,
        /// Write the JSON report here in addition to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Mollify a snapshot file.
    Mollify {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
}

fn check_thread_env() {
    if let Ok(v) = std::env::var("MIMA_THREADS") {
        if v.trim() != "1" && !v.trim().is_empty() {
            eprintln!(
                "note: MIMA_THREADS={v} requested; kernels in this build run sequentially \
                 to keep outputs bit-reproducible"
            );
        }
    }
}

fn main() -> ExitCode {
    check_thread_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> mima::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = RunConfig::load(&config)?;
            let summary = commands::simulate(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("serializable"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Picard { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = commands::picard(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if report.report.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "fixed-point iteration did not converge in {} iterations (residual {})",
                    report.report.iterations, report.report.final_residual
                );
                Ok(ExitCode::from(4))
            }
        }
        Command::Verify { config, report } => {
            if std::env::var("MIMA_CORRUPT_DEALIAS").is_ok_and(|v| v == "1") {
                // Test hook: demonstrates that the suite catches a broken
                // dealiasing stage.
                mima::dynamics::set_dealias_disabled(true);
            }
            let scale = match config {
                Some(path) => VerifyScale::from_config(&RunConfig::load(&path)?)?,
                None => VerifyScale::default(),
            };
            let results = run_all(&scale);
            for r in &results {
                println!("{}", serde_json::to_string(r).expect("serializable"));
            }
            let failed: Vec<&str> =
                results.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
            let passed = results.len() - failed.len();
            println!(
                "{}",
                serde_json::to_string(&serde_json::json!({
                    "summary": { "passed": passed, "failed": failed.len(), "failing": failed }
                }))
                .expect("serializable")
            );
            if let Some(path) = report {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&results).expect("serializable"),
                )?;
            }
            if results.iter().all(|r| r.pass) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(5))
            }
        }
        Command::Mollify { input, output, epsilon } => {
            commands::mollify_file(&input, &output, epsilon)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
