//! Runs A-HDACS and HDACS over the same network and compares them.

use ahdacs::metrics::root_mse;
use ahdacs::protocol::global_sparsity;
use ahdacs::{build_hierarchy, gen_piecewise, place_nodes, run_ahdacs, run_hdacs, Result};

fn main() -> Result<()> {
    let mut nodes = place_nodes(600, 4000.0, 21)?;
    nodes.sense(&gen_piecewise(4000.0, 10.0, 20.0, 0.01, 21)?)?;
    let tree = build_hierarchy(&nodes, 4, 4)?;
    let kt = global_sparsity(&tree, &nodes, 0.01)?;

    let a = run_ahdacs(&tree, &nodes, 0.01, 1)?;
    let h = run_hdacs(&tree, &nodes, kt, 0.01, 1)?;

    println!("network sparsity K_T = {kt}");
    println!("{:8} {:>8} {:>9} {:>12} {:>10}", "protocol", "enabled", "disabled", "energy (J)", "root MSE");
    for t in [&a, &h] {
        println!(
            "{:8} {:>8} {:>9} {:>12.4} {:>10.4}",
            t.protocol.name(),
            t.enabled_count(),
            t.disabled_count(),
            t.ledger.total(),
            root_mse(t, &tree, &nodes)?
        );
    }
    println!("energy ratio A/H = {:.3}", a.ledger.total() / h.ledger.total());
    Ok(())
}
