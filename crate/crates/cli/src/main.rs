use std::process::ExitCode;

use clap::{Parser, Subcommand};
use medop_cli::commands::{self, EvaluateArgs, OracleArgs, PlotArgs, SolveArgs};

/// Minimal-exposure Dubins orienteering solver.
#[derive(Debug, Parser)]
#[command(name = "medop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a Pareto front of reward against exposure.
    Solve(SolveArgs),
    /// Re-evaluate a stored tour.
    Evaluate(EvaluateArgs),
    /// Run the independent verification checks.
    Oracle(OracleArgs),
    /// Render one front solution as SVG.
    Plot(PlotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => commands::solve(args).map(|()| true),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Oracle(args) => {
            let reports = commands::oracle(args);
            for r in &reports {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Plot(args) => commands::plot(args).map(|out| {
            println!("wrote {}", out.display());
            true
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
