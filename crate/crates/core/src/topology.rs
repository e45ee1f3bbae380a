//! Node placement and the multi-resolution cluster hierarchy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, out_of_range, Result};
use crate::field::{Point, ScalarField};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub id: usize,
    pub position: Point,
    pub reading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSet {
    pub extent: f64,
    pub nodes: Vec<Node>,
    pub sink: usize,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes per square kilometer.
    pub fn density_per_km2(&self) -> f64 {
        self.nodes.len() as f64 / (self.extent / 1000.0).powi(2)
    }

    /// Overwrites every reading by sampling `field` at the node positions.
    pub fn sense(&mut self, field: &ScalarField) -> Result<()> {
        for node in &mut self.nodes {
            node.reading = field.sample(node.position)?;
        }
        Ok(())
    }

    pub fn readings(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.reading).collect()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.nodes[a].position.distance(&self.nodes[b].position)
    }
}

/// Uniform random placement over `[0, extent]²`. Readings start at zero;
/// call [`NodeSet::sense`] to fill them. The sink is the node nearest the
/// center of the square.
pub fn place_nodes(count: usize, extent: f64, seed: u64) -> Result<NodeSet> {
    if count < 1 {
        return Err(invalid("count", "need at least one node"));
    }
    if !(extent.is_finite() && extent > 0.0) {
        return Err(invalid("extent", format!("must be positive, got {extent}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[seed, 0x70]));
    let nodes: Vec<Node> = (0..count)
        .map(|id| Node {
            id,
            position: Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent),
            reading: 0.0,
        })
        .collect();
    let center = Point::new(extent / 2.0, extent / 2.0);
    let sink = nearest(&nodes, nodes.iter().map(|n| n.id), center);
    Ok(NodeSet { extent, nodes, sink })
}

fn nearest(nodes: &[Node], ids: impl Iterator<Item = usize>, target: Point) -> usize {
    ids.min_by(|&a, &b| {
        let da = nodes[a].position.distance(&target);
        let db = nodes[b].position.distance(&target);
        da.total_cmp(&db).then(a.cmp(&b))
    })
    .expect("non-empty id set")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Cell {
    pub fn center(&self) -> Point {
        Point::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// 1-based level.
    pub level: usize,
    pub index: usize,
    /// Every node in the subtree, in canonical concatenation order.
    pub members: Vec<usize>,
    pub head: usize,
    pub parent: Option<usize>,
    /// Indices into the level below; empty at level 1.
    pub children: Vec<usize>,
    pub cell: Cell,
}

impl Cluster {
    /// N_i^(l): number of leaves in the subtree.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// Mean member position.
    pub fn centroid(&self, nodes: &NodeSet) -> Point {
        let n = self.members.len() as f64;
        let (sx, sy) = self.members.iter().fold((0.0, 0.0), |(sx, sy), &m| {
            let p = nodes.nodes[m].position;
            (sx + p.x, sy + p.y)
        });
        Point::new(sx / n, sy / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTree {
    pub branching: usize,
    pub depth: usize,
    /// `levels[i - 1]` holds C_i.
    pub levels: Vec<Vec<Cluster>>,
}

/// How one cell splits into `branching` children: `(columns, rows)`.
pub fn split_shape(branching: usize) -> (usize, usize) {
    let k = (branching as f64).sqrt().round() as usize;
    if k * k == branching {
        (k, k)
    } else {
        (branching, 1)
    }
}

/// Builds a `depth`-level grid hierarchy with `branching` children per
/// cluster. Level-1 cells are the finest grid; empty cells are dropped.
pub fn build_hierarchy(nodes: &NodeSet, branching: usize, depth: usize) -> Result<ClusterTree> {
    if branching < 2 {
        return Err(invalid("branching", format!("must be >= 2, got {branching}")));
    }
    if depth < 2 {
        return Err(invalid("levels", format!("must be >= 2, got {depth}")));
    }
    if nodes.is_empty() {
        return Err(invalid("nodes", "no nodes to cluster"));
    }
    let (gx, gy) = split_shape(branching);
    let extent = nodes.extent;
    let dims = |level: usize| (gx.pow((depth - level) as u32), gy.pow((depth - level) as u32));

    // Level 1: bucket nodes by finest cell.
    let (cols, rows) = dims(1);
    let (w, h) = (extent / cols as f64, extent / rows as f64);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cols * rows];
    for node in &nodes.nodes {
        let c = ((node.position.x / w) as usize).min(cols - 1);
        let r = ((node.position.y / h) as usize).min(rows - 1);
        buckets[r * cols + c].push(node.id);
    }

    let mut levels: Vec<Vec<Cluster>> = Vec::with_capacity(depth);
    // Maps a cell (row-major) at the current level to its cluster index.
    let mut cell_to_cluster: Vec<Option<usize>> = vec![None; cols * rows];
    let mut level1 = Vec::new();
    for (cell_idx, mut members) in buckets.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        members.sort_by(|&a, &b| {
            let (pa, pb) = (nodes.nodes[a].position, nodes.nodes[b].position);
            pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x)).then(a.cmp(&b))
        });
        let (r, c) = (cell_idx / cols, cell_idx % cols);
        let cell = Cell {
            x0: c as f64 * w,
            y0: r as f64 * h,
            x1: (c + 1) as f64 * w,
            y1: (r + 1) as f64 * h,
        };
        let head = nearest(&nodes.nodes, members.iter().copied(), cell.center());
        cell_to_cluster[cell_idx] = Some(level1.len());
        level1.push(Cluster {
            level: 1,
            index: level1.len(),
            members,
            head,
            parent: None,
            children: Vec::new(),
            cell,
        });
    }
    levels.push(level1);

    for level in 2..=depth {
        let (child_cols, _) = dims(level - 1);
        let (cols, rows) = dims(level);
        let (w, h) = (extent / cols as f64, extent / rows as f64);
        let mut next_map = vec![None; cols * rows];
        let mut clusters = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let children: Vec<usize> = (0..gy)
                    .flat_map(|dr| (0..gx).map(move |dc| (r * gy + dr) * child_cols + c * gx + dc))
                    .filter_map(|cell| cell_to_cluster[cell])
                    .collect();
                if children.is_empty() {
                    continue;
                }
                let below = &levels[level - 2];
                let members: Vec<usize> = children
                    .iter()
                    .flat_map(|&ch| below[ch].members.iter().copied())
                    .collect();
                let cell = Cell {
                    x0: c as f64 * w,
                    y0: r as f64 * h,
                    x1: (c + 1) as f64 * w,
                    y1: (r + 1) as f64 * h,
                };
                let head = if level == depth {
                    nodes.sink
                } else {
                    nearest(&nodes.nodes, members.iter().copied(), cell.center())
                };
                next_map[r * cols + c] = Some(clusters.len());
                clusters.push(Cluster {
                    level,
                    index: clusters.len(),
                    members,
                    head,
                    parent: None,
                    children,
                    cell,
                });
            }
        }
        let parent_links: Vec<(usize, usize)> = clusters
            .iter()
            .flat_map(|p| p.children.iter().map(move |&ch| (ch, p.index)))
            .collect();
        for (ch, p) in parent_links {
            levels[level - 2][ch].parent = Some(p);
        }
        levels.push(clusters);
        cell_to_cluster = next_map;
    }

    Ok(ClusterTree {
        branching,
        depth,
        levels,
    })
}

impl ClusterTree {
    pub fn level(&self, level: usize) -> Result<&[Cluster]> {
        if level == 0 || level > self.depth {
            return Err(out_of_range(
                "level",
                format!("{level} not in [1, {}]", self.depth),
            ));
        }
        Ok(&self.levels[level - 1])
    }

    pub fn cluster(&self, level: usize, index: usize) -> Result<&Cluster> {
        self.level(level)?.get(index).ok_or_else(|| {
            out_of_range("cluster", format!("index {index} at level {level}"))
        })
    }

    pub fn root(&self) -> &Cluster {
        &self.levels[self.depth - 1][0]
    }

    pub fn cluster_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Canonical-order readings of every leaf under cluster `(level, index)`.
    pub fn subtree_readings(&self, level: usize, index: usize, nodes: &NodeSet) -> Result<Vec<f64>> {
        let cluster = self.cluster(level, index)?;
        Ok(cluster
            .members
            .iter()
            .map(|&m| nodes.nodes[m].reading)
            .collect())
    }

    /// Level-1 cluster index for every node.
    pub fn leaf_cluster_of(&self) -> Vec<usize> {
        let n = self.root().size();
        let mut out = vec![usize::MAX; n];
        for c in &self.levels[0] {
            for &m in &c.members {
                out[m] = c.index;
            }
        }
        out
    }

    /// Checks partition, size recursion, head membership and parent links.
    /// Returns a description of the first violation found.
    pub fn validate(&self, node_count: usize) -> std::result::Result<(), String> {
        if self.levels.len() != self.depth {
            return Err(format!("{} levels stored, depth {}", self.levels.len(), self.depth));
        }
        if self.levels[self.depth - 1].len() != 1 {
            return Err("top level must hold exactly one cluster".into());
        }
        for (li, clusters) in self.levels.iter().enumerate() {
            let level = li + 1;
            let cap = self.branching.pow((self.depth - level) as u32);
            if clusters.len() > cap {
                return Err(format!("level {level}: {} clusters > {cap}", clusters.len()));
            }
            let mut seen = vec![false; node_count];
            for c in clusters {
                if c.members.is_empty() {
                    return Err(format!("level {level} cluster {} is empty", c.index));
                }
                if !c.members.contains(&c.head) {
                    return Err(format!("level {level} cluster {}: head not a member", c.index));
                }
                for &m in &c.members {
                    if m >= node_count || seen[m] {
                        return Err(format!("level {level}: node {m} duplicated or unknown"));
                    }
                    seen[m] = true;
                }
                if level > 1 {
                    let below = &self.levels[li - 1];
                    let sum: usize = c.children.iter().map(|&ch| below[ch].size()).sum();
                    if sum != c.size() {
                        return Err(format!("level {level} cluster {}: size recursion", c.index));
                    }
                    let concat: Vec<usize> = c
                        .children
                        .iter()
                        .flat_map(|&ch| below[ch].members.iter().copied())
                        .collect();
                    if concat != c.members {
                        return Err(format!("level {level} cluster {}: order", c.index));
                    }
                    if c.children.iter().any(|&ch| below[ch].parent != Some(c.index)) {
                        return Err(format!("level {level} cluster {}: parent link", c.index));
                    }
                    if c.children.len() > self.branching {
                        return Err(format!("level {level} cluster {}: too many children", c.index));
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(format!("level {level} does not cover every node"));
            }
        }
        Ok(())
    }
}
