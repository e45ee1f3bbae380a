//! Root MSE of A-HDACS as the truncation fraction grows, written to CSV.

use ahdacs::config::DEFAULT_SWEEP_FRACTIONS;
use ahdacs::experiment::write_sweep;
use ahdacs::{sweep_threshold, ExperimentConfig, Result};

fn main() -> Result<()> {
    let config = ExperimentConfig {
        nodes: vec![400],
        fractions: DEFAULT_SWEEP_FRACTIONS.to_vec(),
        reps: 3,
        ..ExperimentConfig::default()
    };
    let rows = sweep_threshold(&config)?;
    for r in &rows {
        println!("fraction {:<7} root MSE {:.4}", r.fraction, r.root_mse);
    }
    let out = std::env::temp_dir().join("ahdacs-sweep");
    write_sweep(&rows, &out)?;
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}
