use std::path::PathBuf;
use std::process::ExitCode;

use abcnet::experiment::bench::{self, BenchFunction, BenchOptions};
use abcnet::experiment::{self, synth, ExperimentConfig, ExperimentError, Trainer};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "abcnet", version, about = "Bee colony vs backpropagation MLP training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a deterministic synthetic catalog CSV.
    Synth {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured trainers and write reports.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// abc, bp or both; overrides the config file.
        #[arg(long)]
        trainer: Option<String>,
        /// Master seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the optimizer on a benchmark function with a known optimum.
    BenchAbc {
        #[arg(long)]
        function: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        mcn: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        colony_size: usize,
        /// Include the per-cycle best objective in the output.
        #[arg(long)]
        history: bool,
    },
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn run(command: Command) -> Result<(), ExperimentError> {
    match command {
        Command::Synth { length, seed, out } => {
            synth::cmd_synth(length, seed, &out)?;
            println!("wrote {length} events to {}", out.display());
        }
        Command::Train {
            config,
            trainer,
            seed,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(t) = trainer {
                cfg.trainer = t.parse::<Trainer>()?;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let outcome = experiment::cmd_train(&cfg)?;
            outcome.write(&cfg.output_dir)?;
            for r in &outcome.report.results {
                let a = &r.aggregate;
                println!(
                    "{} {}: test mse mean {:.6} (min {:.6}, max {:.6}), nmse {:.4}, accuracy {:.2}%",
                    r.trainer,
                    outcome.report.settings.topology,
                    a.test_mse.mean,
                    a.test_mse.min,
                    a.test_mse.max,
                    a.test_nmse.mean,
                    a.test_accuracy_pct.mean
                );
            }
            println!("reports in {}", cfg.output_dir.display());
        }
        Command::BenchAbc {
            function,
            dim,
            mcn,
            seed,
            colony_size,
            history,
        } => {
            let function: BenchFunction = function.parse()?;
            let options = BenchOptions {
                mcn,
                colony_size,
                seed,
                bounds: None,
            };
            let mut report = bench::cmd_bench_abc(function, dim, &options)?;
            if !history {
                report.history.clear();
            }
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| ExperimentError::Output(e.to_string()))?;
            println!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", error_line("usage", message.lines().next().unwrap_or("")));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
