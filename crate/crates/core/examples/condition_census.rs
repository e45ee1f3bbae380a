//! Sorts clusters into the five gate-outcome conditions and reports ζ.

use ahdacs::metrics::{condition_census, disabled_stats, Condition};
use ahdacs::protocol::global_sparsity;
use ahdacs::{build_hierarchy, gen_piecewise, place_nodes, run_ahdacs, run_hdacs, Result};

fn main() -> Result<()> {
    let mut nodes = place_nodes(700, 4000.0, 5)?;
    nodes.sense(&gen_piecewise(4000.0, 10.0, 20.0, 0.01, 5)?)?;
    let tree = build_hierarchy(&nodes, 4, 4)?;
    let kt = global_sparsity(&tree, &nodes, 0.01)?;
    let a = run_ahdacs(&tree, &nodes, 0.01, 1)?;
    let h = run_hdacs(&tree, &nodes, kt, 0.01, 1)?;

    let census = condition_census(&a, &h, kt)?;
    println!("K_T = {kt}, cutoff level {}", census.cutoff_level);
    for c in Condition::ALL {
        println!("  condition {} {:<22} {}", c.number(), format!("{c:?}"), census.counts[c.number() - 1]);
    }

    if census.cutoff_level > 0 {
        let za = disabled_stats(&a, census.cutoff_level)?;
        let zh = disabled_stats(&h, census.cutoff_level)?;
        println!("disabled ratio up to level {}: A-HDACS {:.3}, HDACS {:.3}", census.cutoff_level, za.zeta, zh.zeta);
        println!("  product expansion for A-HDACS {:.3}", za.zeta_product);
    }
    Ok(())
}
