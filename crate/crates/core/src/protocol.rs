//! A-HDACS and HDACS aggregation over a cluster hierarchy.
//!
//! Both protocols share one engine; they differ only in which sparsity
//! value drives a head's gate and measurement count. A-HDACS uses the
//! sparsity of the vector the head just assembled, HDACS uses the single
//! global value K_T for every cluster.

use serde::{Deserialize, Serialize};

use crate::cs::{self, cs_gate, gate_bound, MeasurementPlan, MIN_GATED_SIZE};
use crate::energy::EnergyLedger;
use crate::error::{invalid, Result};
use crate::seed;
use crate::topology::{ClusterTree, NodeSet};
use crate::transform::estimate_sparsity;

pub const HEADER_BITS: u64 = 64;
pub const WORD_BITS: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ahdacs,
    Hdacs,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ahdacs => "ahdacs",
            Protocol::Hdacs => "hdacs",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "ahdacs" => Ok(Protocol::Ahdacs),
            "hdacs" => Ok(Protocol::Hdacs),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    CsEnabled,
    CsDisabled,
    /// The top-level head; it keeps the assembled vector.
    Sink,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterDecision {
    pub level: usize,
    pub index: usize,
    /// N_i^(l).
    pub size: usize,
    /// Sparsity of the vector assembled at this head.
    pub local_k: usize,
    /// Sparsity that drove the gate: `local_k` for A-HDACS, K_T for HDACS.
    pub k: usize,
    pub status: Status,
    /// M_i^(l), present when CS was enabled.
    pub measurements: Option<usize>,
    pub matrix_seed: Option<u64>,
    pub bits_sent: u64,
    pub head: usize,
    pub parent_head: Option<usize>,
    /// Vector assembled at this head, canonical order.
    pub assembled: Vec<f64>,
    /// Vector as recovered by the parent head; equals `assembled` for raw
    /// transmissions. Empty for the sink.
    pub delivered: Vec<f64>,
    /// M equals N even though the gate passed.
    pub no_gain: bool,
    pub damped: bool,
    pub unrecoverable: bool,
}

impl ClusterDecision {
    pub fn gate_eligible(&self) -> bool {
        self.size >= MIN_GATED_SIZE
    }

    pub fn is_disabled(&self) -> bool {
        self.status == Status::CsDisabled
    }
}

/// One radio transmission charged to the ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transmission {
    pub sender: usize,
    pub receiver: usize,
    pub bits: u64,
    pub distance: f64,
    /// 0 for leaf-to-head traffic, otherwise the sending cluster's level.
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelThreshold {
    /// K_{i_T}: max of N/log2 N over gate-eligible clusters at the level.
    pub value: f64,
    /// False when the level has no gate-eligible cluster (value is then 0).
    pub has_eligible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityReport {
    pub global_k: usize,
    /// `local_k[i - 1][l]` = K_i^(l) as computed during the run.
    pub local_k: Vec<Vec<usize>>,
    /// `thresholds[i - 1]` = K_{i_T}.
    pub thresholds: Vec<LevelThreshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregationTrace {
    pub protocol: Protocol,
    pub fraction: f64,
    pub seed: u64,
    /// `decisions[i - 1]` holds one decision per cluster of C_i.
    pub decisions: Vec<Vec<ClusterDecision>>,
    /// `children[i - 1][l]`: child indices (level i - 1) of cluster l at level i.
    pub children: Vec<Vec<Vec<usize>>>,
    pub transmissions: Vec<Transmission>,
    pub root_estimate: Vec<f64>,
    pub sparsity: SparsityReport,
    pub ledger: EnergyLedger,
}

impl AggregationTrace {
    pub fn depth(&self) -> usize {
        self.decisions.len()
    }

    pub fn all_decisions(&self) -> impl Iterator<Item = &ClusterDecision> {
        self.decisions.iter().flatten()
    }

    pub fn enabled_count(&self) -> usize {
        self.all_decisions().filter(|d| d.status == Status::CsEnabled).count()
    }

    pub fn disabled_count(&self) -> usize {
        self.all_decisions().filter(|d| d.status == Status::CsDisabled).count()
    }
}

/// K_T: sparsity of the whole network's readings in canonical order.
pub fn global_sparsity(tree: &ClusterTree, nodes: &NodeSet, fraction: f64) -> Result<usize> {
    estimate_sparsity(&tree.subtree_readings(tree.depth, 0, nodes)?, fraction)
}

/// K_{i_T} for `level`. Clusters too small to be gated are ignored.
pub fn level_threshold(tree: &ClusterTree, level: usize) -> Result<LevelThreshold> {
    let eligible = tree
        .level(level)?
        .iter()
        .filter(|c| c.size() >= MIN_GATED_SIZE)
        .map(|c| gate_bound(c.size()));
    let mut out = LevelThreshold {
        value: 0.0,
        has_eligible: false,
    };
    for v in eligible {
        out.value = out.value.max(v);
        out.has_eligible = true;
    }
    Ok(out)
}

/// Per-cluster sensing-matrix seed shared by sender and receiver.
pub fn matrix_seed(run_seed: u64, level: usize, index: usize, round: u64) -> u64 {
    seed::derive(&[run_seed, level as u64, index as u64, round])
}

pub fn run_ahdacs(
    tree: &ClusterTree,
    nodes: &NodeSet,
    fraction: f64,
    seed: u64,
) -> Result<AggregationTrace> {
    let global_k = global_sparsity(tree, nodes, fraction)?;
    run(tree, nodes, Protocol::Ahdacs, global_k, fraction, seed)
}

pub fn run_hdacs(
    tree: &ClusterTree,
    nodes: &NodeSet,
    global_k: usize,
    fraction: f64,
    seed: u64,
) -> Result<AggregationTrace> {
    if global_k < 1 {
        return Err(invalid("global_k", "K_T must be >= 1"));
    }
    run(tree, nodes, Protocol::Hdacs, global_k, fraction, seed)
}

/// Runs `protocol`; HDACS computes its own K_T from the true readings.
pub fn run_protocol(
    protocol: Protocol,
    tree: &ClusterTree,
    nodes: &NodeSet,
    fraction: f64,
    seed: u64,
) -> Result<AggregationTrace> {
    match protocol {
        Protocol::Ahdacs => run_ahdacs(tree, nodes, fraction, seed),
        Protocol::Hdacs => {
            let kt = global_sparsity(tree, nodes, fraction)?.max(1);
            run_hdacs(tree, nodes, kt, fraction, seed)
        }
    }
}

fn run(
    tree: &ClusterTree,
    nodes: &NodeSet,
    protocol: Protocol,
    global_k: usize,
    fraction: f64,
    seed: u64,
) -> Result<AggregationTrace> {
    if tree.root().size() != nodes.len() {
        return Err(invalid("tree", "tree does not cover the node set"));
    }
    let depth = tree.depth;
    let mut ledger = EnergyLedger::new(nodes.len(), depth);
    let mut transmissions = Vec::new();
    let mut send = |sender: usize, receiver: usize, bits: u64, level: usize| -> Result<()> {
        if sender == receiver {
            return Ok(());
        }
        let distance = nodes.distance(sender, receiver);
        ledger.charge(sender, receiver, bits, distance, level)?;
        transmissions.push(Transmission {
            sender,
            receiver,
            bits,
            distance,
            level,
        });
        Ok(())
    };

    // Step 1: every non-head member sends its single reading.
    for cluster in &tree.levels[0] {
        for &m in &cluster.members {
            send(m, cluster.head, HEADER_BITS + WORD_BITS, 0)?;
        }
    }

    let mut decisions: Vec<Vec<ClusterDecision>> = Vec::with_capacity(depth);
    for level in 1..=depth {
        let mut row = Vec::with_capacity(tree.levels[level - 1].len());
        for cluster in &tree.levels[level - 1] {
            let assembled: Vec<f64> = if level == 1 {
                cluster.members.iter().map(|&m| nodes.nodes[m].reading).collect()
            } else {
                let below: &Vec<ClusterDecision> = &decisions[level - 2];
                cluster
                    .children
                    .iter()
                    .flat_map(|&ch| below[ch].delivered.iter().copied())
                    .collect()
            };
            debug_assert_eq!(assembled.len(), cluster.size());
            let size = assembled.len();
            let local_k = estimate_sparsity(&assembled, fraction)?;
            let k = match protocol {
                Protocol::Ahdacs => local_k,
                Protocol::Hdacs => global_k,
            };

            let mut decision = ClusterDecision {
                level,
                index: cluster.index,
                size,
                local_k,
                k,
                status: Status::Sink,
                measurements: None,
                matrix_seed: None,
                bits_sent: 0,
                head: cluster.head,
                parent_head: None,
                assembled,
                delivered: Vec::new(),
                no_gain: false,
                damped: false,
                unrecoverable: false,
            };

            if level < depth {
                let parent = cluster.parent.expect("non-root cluster has a parent");
                let parent_head = tree.levels[level][parent].head;
                decision.parent_head = Some(parent_head);
                if cs_gate(k, size) {
                    decision.status = Status::CsEnabled;
                    encode_compressed(&mut decision, seed)?;
                } else {
                    decision.status = Status::CsDisabled;
                    decision.bits_sent = HEADER_BITS + WORD_BITS * size as u64;
                    decision.delivered = decision.assembled.clone();
                }
                send(cluster.head, parent_head, decision.bits_sent, level)?;
            }
            row.push(decision);
        }
        decisions.push(row);
    }

    let root_estimate = decisions[depth - 1][0].assembled.clone();
    let local_k = decisions
        .iter()
        .map(|row| row.iter().map(|d| d.local_k).collect())
        .collect();
    let thresholds = (1..=depth)
        .map(|l| level_threshold(tree, l))
        .collect::<Result<Vec<_>>>()?;

    Ok(AggregationTrace {
        protocol,
        fraction,
        seed,
        decisions,
        children: tree
            .levels
            .iter()
            .map(|row| row.iter().map(|c| c.children.clone()).collect())
            .collect(),
        transmissions,
        root_estimate,
        sparsity: SparsityReport {
            global_k,
            local_k,
            thresholds,
        },
        ledger,
    })
}

// Takes CS measurements of the assembled vector and performs the parent's
// recovery, filling in the delivered vector.
fn encode_compressed(decision: &mut ClusterDecision, run_seed: u64) -> Result<()> {
    let size = decision.size;
    if decision.k == 0 {
        // All-zero vector: header only, receiver reconstructs zeros.
        decision.measurements = Some(0);
        decision.bits_sent = HEADER_BITS;
        decision.delivered = vec![0.0; size];
        return Ok(());
    }
    let mseed = matrix_seed(run_seed, decision.level, decision.index, 0);
    let plan = MeasurementPlan::new(decision.k, size, mseed)?;
    let packet = cs::compress(&decision.assembled, plan, (decision.level, decision.index))?;
    decision.measurements = Some(plan.m);
    decision.matrix_seed = Some(mseed);
    decision.no_gain = plan.m == size;
    decision.bits_sent = HEADER_BITS + WORD_BITS * plan.m as u64;

    let recovery = cs::recover(&packet.measurements, &packet.plan)?;
    decision.damped = recovery.damped;
    if recovery.signal.iter().all(|v| v.is_finite()) {
        decision.delivered = recovery.signal;
    } else {
        decision.unrecoverable = true;
        decision.delivered = vec![0.0; size];
    }
    Ok(())
}
