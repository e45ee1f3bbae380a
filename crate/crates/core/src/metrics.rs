//! Evaluation quantities: per-level MSE, disabled-cluster ratios and the
//! five-way comparison of A-HDACS and HDACS gate outcomes.

use serde::Serialize;

use crate::cs::gate_bound;
use crate::error::{invalid, out_of_range, Result};
use crate::protocol::{AggregationTrace, Protocol, Status};
use crate::topology::{ClusterTree, NodeSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDisabled {
    pub level: usize,
    /// |C_j| restricted to gate-eligible clusters.
    pub eligible: usize,
    pub disabled: usize,
    /// ρ_j; `None` when the level has no eligible cluster.
    pub rho: Option<f64>,
    /// σ_j^(l) for each disabled eligible cluster with eligible children.
    pub sigma_per_cluster: Vec<(usize, f64)>,
    /// σ_j, the mean of `sigma_per_cluster`.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisabledStats {
    pub up_to_level: usize,
    pub levels: Vec<LevelDisabled>,
    /// ζ from per-level counts: Σ|C_j|ρ_j / Σ|C_j|.
    pub zeta: f64,
    /// ζ with ρ_j replaced by ρ_i σ_i ⋯ σ_{j+1}. Only equal to `zeta` on
    /// full, uniformly branching trees.
    pub zeta_product: f64,
}

impl DisabledStats {
    pub fn product_discrepancy(&self) -> f64 {
        self.zeta_product - self.zeta
    }
}

/// Disabled-cluster statistics over levels `1..=up_to_level`. Only clusters
/// large enough to be gated are counted.
pub fn disabled_stats(trace: &AggregationTrace, up_to_level: usize) -> Result<DisabledStats> {
    if up_to_level == 0 || up_to_level > trace.depth() {
        return Err(out_of_range(
            "level",
            format!("{up_to_level} not in [1, {}]", trace.depth()),
        ));
    }
    let mut levels = Vec::with_capacity(up_to_level);
    for level in 1..=up_to_level {
        let row = &trace.decisions[level - 1];
        let eligible: Vec<_> = row
            .iter()
            .filter(|d| d.gate_eligible() && d.status != Status::Sink)
            .collect();
        let disabled = eligible.iter().filter(|d| d.is_disabled()).count();
        let rho = (!eligible.is_empty()).then(|| disabled as f64 / eligible.len() as f64);

        let mut sigma_per_cluster = Vec::new();
        if level > 1 {
            let below = &trace.decisions[level - 2];
            for d in eligible.iter().filter(|d| d.is_disabled()) {
                let tree_children = children_of(trace, level, d.index);
                let kids: Vec<_> = tree_children
                    .iter()
                    .map(|&c| &below[c])
                    .filter(|c| c.gate_eligible())
                    .collect();
                if kids.is_empty() {
                    continue;
                }
                let off = kids.iter().filter(|c| c.is_disabled()).count();
                sigma_per_cluster.push((d.index, off as f64 / kids.len() as f64));
            }
        }
        let sigma = (!sigma_per_cluster.is_empty()).then(|| {
            sigma_per_cluster.iter().map(|(_, s)| s).sum::<f64>() / sigma_per_cluster.len() as f64
        });
        levels.push(LevelDisabled {
            level,
            eligible: eligible.len(),
            disabled,
            rho,
            sigma_per_cluster,
            sigma,
        });
    }

    let weight: f64 = levels.iter().map(|l| l.eligible as f64).sum();
    let weighted = |rho_of: &dyn Fn(&LevelDisabled) -> f64| -> f64 {
        if weight == 0.0 {
            0.0
        } else {
            levels.iter().map(|l| l.eligible as f64 * rho_of(l)).sum::<f64>() / weight
        }
    };
    // Σ|C_j|ρ_j reduces to the disabled count, so ζ is taken from counts.
    let disabled_total: usize = levels.iter().map(|l| l.disabled).sum();
    let zeta = if weight == 0.0 {
        0.0
    } else {
        disabled_total as f64 / weight
    };
    let top = &levels[up_to_level - 1];
    let rho_top = top.rho.unwrap_or(0.0);
    let zeta_product = weighted(&|l| {
        ((l.level + 1)..=up_to_level).fold(rho_top, |acc, j| acc * levels[j - 1].sigma.unwrap_or(0.0))
    });
    Ok(DisabledStats {
        up_to_level,
        levels,
        zeta,
        zeta_product,
    })
}

fn children_of(trace: &AggregationTrace, level: usize, index: usize) -> Vec<usize> {
    trace.children[level - 1][index].clone()
}

/// Per-level MSE between the vector assembled at each head and the true
/// subtree readings, averaged over the clusters of the level.
pub fn mse_per_level(trace: &AggregationTrace, tree: &ClusterTree, nodes: &NodeSet) -> Result<Vec<f64>> {
    check_shape(trace, tree)?;
    let mut out = Vec::with_capacity(trace.depth());
    for (li, row) in trace.decisions.iter().enumerate() {
        let mut acc = 0.0;
        for d in row {
            let truth = tree.subtree_readings(li + 1, d.index, nodes)?;
            acc += squared_error(&d.assembled, &truth) / truth.len() as f64;
        }
        out.push(acc / row.len() as f64);
    }
    Ok(out)
}

/// MSE of the sink's estimate over all nodes.
pub fn root_mse(trace: &AggregationTrace, tree: &ClusterTree, nodes: &NodeSet) -> Result<f64> {
    let truth = tree.subtree_readings(tree.depth, 0, nodes)?;
    if truth.len() != trace.root_estimate.len() {
        return Err(invalid("trace", "root estimate length differs from the tree"));
    }
    Ok(squared_error(&trace.root_estimate, &truth) / truth.len() as f64)
}

fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn check_shape(trace: &AggregationTrace, tree: &ClusterTree) -> Result<()> {
    let same = trace.depth() == tree.depth
        && trace
            .decisions
            .iter()
            .zip(&tree.levels)
            .all(|(row, cl)| row.len() == cl.len() && row.iter().zip(cl).all(|(d, c)| d.size == c.size()));
    if same {
        Ok(())
    } else {
        Err(invalid("trace", "trace was not produced over this tree"))
    }
}

/// The five orderings of K_T, local K and N/log2 N at one cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// Both enable CS; HDACS sends fewer measurements.
    BothEnabledHdacsFewer = 1,
    /// Only HDACS enables CS.
    HdacsOnly = 2,
    /// Only A-HDACS enables CS.
    AhdacsOnly = 3,
    /// Both enable CS; HDACS sends at least as many measurements.
    BothEnabledHdacsMore = 4,
    /// Neither enables CS.
    NeitherEnabled = 5,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::BothEnabledHdacsFewer,
        Condition::HdacsOnly,
        Condition::AhdacsOnly,
        Condition::BothEnabledHdacsMore,
        Condition::NeitherEnabled,
    ];

    pub fn number(self) -> usize {
        self as usize
    }

    /// Classifies one cluster of size `size` with local sparsity `local_k`.
    pub fn classify(local_k: usize, global_k: usize, size: usize) -> Condition {
        let a = crate::cs::cs_gate(local_k, size);
        let h = crate::cs::cs_gate(global_k, size);
        match (a, h) {
            (true, true) if local_k > global_k => Condition::BothEnabledHdacsFewer,
            (true, true) => Condition::BothEnabledHdacsMore,
            (false, true) => Condition::HdacsOnly,
            (true, false) => Condition::AhdacsOnly,
            (false, false) => Condition::NeitherEnabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCensus {
    /// Highest level `i` with K_T > K_{i_T}; 0 if none.
    pub cutoff_level: usize,
    /// `counts[c - 1]` = clusters in condition `c`.
    pub counts: [usize; 5],
    pub classified: usize,
}

/// Highest level below the sink whose threshold K_{i_T} is exceeded by K_T.
pub fn proposition1_cutoff(trace: &AggregationTrace, global_k: usize) -> usize {
    (1..trace.depth())
        .filter(|&i| global_k as f64 > trace.sparsity.thresholds[i - 1].value)
        .max()
        .unwrap_or(0)
}

/// Classifies every non-sink cluster into one of the five gate-outcome
/// conditions. The cutoff is reported alongside; clusters at or below it
/// are where condition 3 shows up, so they are not filtered out.
pub fn condition_census(
    ahdacs: &AggregationTrace,
    hdacs: &AggregationTrace,
    global_k: usize,
) -> Result<ConditionCensus> {
    if ahdacs.protocol != Protocol::Ahdacs || hdacs.protocol != Protocol::Hdacs {
        return Err(invalid("trace", "expected one A-HDACS and one HDACS trace"));
    }
    let same_tree = ahdacs.depth() == hdacs.depth()
        && ahdacs.children == hdacs.children
        && ahdacs
            .decisions
            .iter()
            .zip(&hdacs.decisions)
            .all(|(a, h)| a.len() == h.len() && a.iter().zip(h).all(|(x, y)| x.size == y.size && x.head == y.head));
    if !same_tree {
        return Err(invalid("trace", "traces were produced over different trees"));
    }
    let cutoff = proposition1_cutoff(hdacs, global_k);
    let mut counts = [0usize; 5];
    for level in 1..ahdacs.depth() {
        for d in &ahdacs.decisions[level - 1] {
            counts[Condition::classify(d.local_k, global_k, d.size).number() - 1] += 1;
        }
    }
    Ok(ConditionCensus {
        cutoff_level: cutoff,
        counts,
        classified: counts.iter().sum(),
    })
}

/// Gate-eligible clusters at levels `<= i` that HDACS left enabled even
/// though K_T exceeds K_{i_T}. Empty whenever the monotonicity argument holds.
pub fn proposition1_violations(hdacs: &AggregationTrace) -> Vec<(usize, usize)> {
    let kt = hdacs.sparsity.global_k;
    let cutoff = proposition1_cutoff(hdacs, kt);
    hdacs.decisions[..cutoff]
        .iter()
        .flatten()
        .filter(|d| d.gate_eligible() && d.status == Status::CsEnabled)
        .map(|d| (d.level, d.index))
        .collect()
}

/// N/log2 N of a cluster, the per-cluster gate bound.
pub fn cluster_gate_bound(size: usize) -> f64 {
    gate_bound(size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_partitions() {
        // N = 256: gate bound 32.
        assert_eq!(Condition::classify(20, 10, 256), Condition::BothEnabledHdacsFewer);
        assert_eq!(Condition::classify(40, 10, 256), Condition::HdacsOnly);
        assert_eq!(Condition::classify(10, 40, 256), Condition::AhdacsOnly);
        assert_eq!(Condition::classify(5, 10, 256), Condition::BothEnabledHdacsMore);
        assert_eq!(Condition::classify(1, 1, 256), Condition::BothEnabledHdacsMore);
        assert_eq!(Condition::classify(40, 50, 256), Condition::NeitherEnabled);
        assert_eq!(Condition::classify(1, 1, 3), Condition::NeitherEnabled);
    }
}
