use clap::{Parser, Subcommand};

use voxscreen_cli::commands::{self, CmdOutcome};

/// Screens voice-cloning outputs for severe synthesis failures by
/// comparing low-dimensional acoustic features (median f0, mean HNR, VTL)
/// between source inputs and synthesized outputs.
#[derive(Debug, Parser)]
#[command(name = "voxscreen", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic corpus (WAV files + manifest).
    Synth(commands::synth::SynthArgs),
    /// Extract per-pair acoustic features from a manifest.
    Extract(commands::extract::ExtractArgs),
    /// Fit asymmetric acceptance bands from labeled features.
    Optimize(commands::optimize::OptimizeArgs),
    /// Classify pairs against a fitted band profile.
    Screen(commands::screen::ScreenArgs),
    /// Rater-consensus and classifier-agreement analytics.
    Agree(commands::agree::AgreeArgs),
    /// Assemble the evaluation report (metrics, scatter data, flows).
    Report(commands::report::ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Extract(args) => commands::extract::run(args),
        Command::Optimize(args) => commands::optimize::run(args),
        Command::Screen(args) => commands::screen::run(args),
        Command::Agree(args) => commands::agree::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    // 0 = clean, 2 = ran with partial per-sample failures, 1 = fatal.
    match outcome {
        Ok(CmdOutcome::Clean) => {}
        Ok(CmdOutcome::PartialFailures(_)) => std::process::exit(2),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
