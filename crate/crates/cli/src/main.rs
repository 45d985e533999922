use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hapticnav_cli::{
    cmd_coverage, cmd_experiment, cmd_render, cmd_simulate, cmd_stats, CoverageArgs,
    ExperimentArgs, RenderArgs, SimulateArgs, StatsArgs,
};

/// Simulator and evaluation toolkit for a dual time-of-flight haptic navigation aid.
#[derive(Parser)]
#[command(name = "hapticnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the detection pipeline along a scripted trajectory.
    Simulate(SimulateArgs),
    /// Render a depth frame as a heat map or point cloud.
    Render(RenderArgs),
    /// Replay the perception experiment with simulated participants.
    Experiment(ExperimentArgs),
    /// Confusion matrix, accuracy, ANOVA and post-hoc reports.
    Stats(StatsArgs),
    /// Check the rig's vertical coverage against knee and head height.
    Coverage(CoverageArgs),
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 is reserved for degenerate statistics
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Render(a) => cmd_render(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Coverage(a) => cmd_coverage(a),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
