use std::path::PathBuf;
use std::process::ExitCode;

use ahdacs::config::DEFAULT_SWEEP_FRACTIONS;
use ahdacs::experiment::{self, write_sweep};
use ahdacs::{Error, ExperimentConfig, FieldName, Protocol};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ahdacs", version, about = "Hierarchical CS data aggregation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run protocols over every (size, fraction, repetition) cell.
    Run(Overrides),
    /// Tabulate A-HDACS root MSE against the truncation fraction.
    Sweep(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    field: Option<FieldName>,
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    #[arg(long)]
    branching: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    fraction: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    protocol: Option<Vec<Protocol>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(self, sweep: bool) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let mut c = ExperimentConfig::default();
                if sweep {
                    c.fractions = DEFAULT_SWEEP_FRACTIONS.to_vec();
                    c.nodes = vec![400];
                }
                c
            }
        };
        if let Some(f) = self.field {
            cfg.field.kind = f;
        }
        if let Some(v) = self.nodes {
            cfg.nodes = v;
        }
        if let Some(v) = self.branching {
            cfg.branching = v;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.fraction {
            cfg.fractions = v;
        }
        if let Some(v) = self.protocol {
            cfg.protocols = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.reps {
            cfg.reps = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) | Error::Csv(_) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(o) => o.resolve(false).and_then(|cfg| {
            let bundle = experiment::run_experiment(&cfg)?;
            for r in &bundle.summary.energy_ratios {
                println!(
                    "nodes={} fraction={} ahdacs/hdacs energy={:.4}",
                    r.nodes, r.fraction, r.ratio
                );
            }
            println!("wrote {}", cfg.out.display());
            Ok(())
        }),
        Command::Sweep(o) => o.resolve(true).and_then(|cfg| {
            let rows = experiment::sweep_threshold(&cfg)?;
            for r in &rows {
                println!(
                    "field={} nodes={} fraction={} root_mse={:.6}",
                    r.field.as_str(),
                    r.nodes,
                    r.fraction,
                    r.root_mse
                );
            }
            write_sweep(&rows, &cfg.out)?;
            println!("wrote {}", cfg.out.join("sweep.csv").display());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
