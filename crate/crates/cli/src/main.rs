use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nucdim_cli::config::ExperimentConfig;
use nucdim_cli::{list, list_table, run, write_outputs, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "nucdim", version, about = "Finite-scale experiments for nuclear-dimension approximations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; exit 0 when every criterion passes, 1 otherwise.
    Run {
        /// JSON config: {"id": …, "params": {…}, "output": {"json": …, "csv": …}}.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key (id, output.json, output.csv, or a parameter).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Record wall time in the report (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
        /// Run every data-parallel loop sequentially.
        #[arg(long)]
        sequential: bool,
        /// Suppress the per-criterion lines on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// List experiment ids with their anchors.
    List {
        /// Print a JSON array.
        #[arg(long)]
        json: bool,
        /// Only experiments of one module (fock, roe, commdim, cstar).
        #[arg(long)]
        module: Option<String>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::List { json, module } => {
            let rows = list(module.as_deref())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("catalog serializes"));
            } else {
                print!("{}", list_table(&rows));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            set,
            timing,
            sequential,
            quiet,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::from_path(path)?,
                None => ExperimentConfig::default(),
            };
            for s in &set {
                cfg.apply_override(s)?;
            }
            let out = run(&cfg, RunOptions { timing, sequential })?;
            if let Some(json) = write_outputs(&cfg, &out)? {
                print!("{json}");
            }
            let r = &out.report;
            if !quiet {
                eprintln!("{} ({})", r.id, r.anchor);
                for c in &r.criteria {
                    eprintln!("  {}", c.line());
                }
            }
            let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("criterion failed: {}", failed.join(", "));
                Ok(ExitCode::from(1))
            }
        }
    }
}
