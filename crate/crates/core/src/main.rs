use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mediator_witness::cli::{cmd_check_model, cmd_example, cmd_search, ExampleOptions};
use mediator_witness::model_file::load_model;
use mediator_witness::report::VerificationReport;
use mediator_witness::witness::SearchConfig;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Parser)]
#[command(name = "mediator-witness", version, about = "Mediated-entanglement witness checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the three-qubit example protocol and its checks.
    Example {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, hide = true)]
        corrupt_gate: bool,
    },
    /// Load a TOML model (path or bundled name) and evaluate its variables.
    CheckModel {
        model: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Search classical-mediator protocols for entanglement.
    Search {
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=4))]
        dim: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=4))]
        steps: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=64))]
        grid: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn emit(report: &VerificationReport, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", report.render_text()),
        Format::Records => print!("{}", report.render_records()),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Example { format, corrupt_gate } => emit(&cmd_example(ExampleOptions { corrupt_gate }), format),
        Command::CheckModel { model, format } => match load_model(&model) {
            Ok(file) => emit(&cmd_check_model(&file), format),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Search { dim, steps, samples, seed, grid, format } => {
            let config = SearchConfig {
                d: dim as usize,
                steps: steps as usize,
                grid: grid as usize,
                samples: samples as usize,
                seed,
            };
            match cmd_search(config) {
                Ok(report) => emit(&report, format),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
