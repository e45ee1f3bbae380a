//! Places a network, builds the grid hierarchy and prints its shape.

use ahdacs::{build_hierarchy, place_nodes, Result};

fn main() -> Result<()> {
    let nodes = place_nodes(500, 4000.0, 3)?;
    let tree = build_hierarchy(&nodes, 4, 4)?;
    tree.validate(nodes.len()).expect("tree is a partition");

    println!(
        "{} nodes, {:.1} per km², sink {} at ({:.0}, {:.0})",
        nodes.len(),
        nodes.density_per_km2(),
        nodes.sink,
        nodes.nodes[nodes.sink].position.x,
        nodes.nodes[nodes.sink].position.y
    );
    for (i, level) in tree.levels.iter().enumerate() {
        let sizes: Vec<usize> = level.iter().map(|c| c.size()).collect();
        let min = sizes.iter().min().unwrap();
        let max = sizes.iter().max().unwrap();
        println!("level {}: {:3} clusters, sizes {min}..={max}", i + 1, level.len());
    }
    let root = tree.root();
    println!("root head {} covers {} nodes", root.head, root.size());
    Ok(())
}
