//! Shows how the truncation fraction sets the sparsity K of a reading vector.

use ahdacs::transform::{dct_forward, dct_inverse, estimate_sparsity, truncate};
use ahdacs::{build_hierarchy, gen_piecewise, place_nodes, Result};

fn main() -> Result<()> {
    let mut nodes = place_nodes(400, 4000.0, 1)?;
    nodes.sense(&gen_piecewise(4000.0, 10.0, 20.0, 0.01, 1)?)?;
    let tree = build_hierarchy(&nodes, 4, 4)?;

    // The largest level-1 cluster well clear of the x = y edge, and the
    // whole network in canonical order.
    let leaf = tree.levels[0]
        .iter()
        .filter(|c| c.centroid(&nodes).distance_to_diagonal() > 500.0)
        .max_by_key(|c| c.size())
        .unwrap();
    let local = tree.subtree_readings(1, leaf.index, &nodes)?;
    let global = tree.subtree_readings(tree.depth, 0, &nodes)?;

    println!("fraction  K(leaf, N={})  K(network, N={})", local.len(), global.len());
    for f in [0.001, 0.005, 0.01, 0.03, 0.1] {
        println!(
            "{f:8}  {:>13}  {:>16}",
            estimate_sparsity(&local, f)?,
            estimate_sparsity(&global, f)?
        );
    }

    let coeffs = dct_forward(&global)?;
    let kept = truncate(&coeffs, 0.01)?;
    let approx = dct_inverse(&kept.densify())?;
    let mse = approx.iter().zip(&global).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / global.len() as f64;
    println!("network: keeping {} of {} coefficients gives MSE {mse:.4}", kept.k(), global.len());
    Ok(())
}
