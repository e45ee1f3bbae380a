//! Breaks the energy of one A-HDACS run down by hop level.

use ahdacs::energy::{rx_energy, tx_energy};
use ahdacs::{build_hierarchy, gen_piecewise, place_nodes, run_ahdacs, Result};

fn main() -> Result<()> {
    let mut nodes = place_nodes(500, 4000.0, 4)?;
    nodes.sense(&gen_piecewise(4000.0, 10.0, 20.0, 0.01, 4)?)?;
    let tree = build_hierarchy(&nodes, 4, 4)?;
    let trace = run_ahdacs(&tree, &nodes, 0.01, 4)?;

    let mut per_level = vec![(0usize, 0u64, 0.0f64); tree.depth];
    for t in &trace.transmissions {
        let row = &mut per_level[t.level];
        row.0 += 1;
        row.1 += t.bits;
        row.2 += tx_energy(t.bits, t.distance)? + rx_energy(t.bits);
    }
    let total = trace.ledger.total();
    println!("{:>5} {:>6} {:>9} {:>11} {:>6}", "level", "hops", "bits", "energy (J)", "share");
    for (level, (hops, bits, e)) in per_level.iter().enumerate() {
        println!("{level:>5} {hops:>6} {bits:>9} {e:>11.5} {:>5.1}%", 100.0 * e / total);
    }
    println!(
        "total {total:.5} J (tx {:.5}, rx {:.5}), {} bits",
        trace.ledger.total_tx(),
        trace.ledger.total_rx(),
        trace.ledger.total_bits()
    );
    Ok(())
}
