//! Experiment orchestration and CSV/JSON result export.
//!
//! A scenario is one (network size, repetition) pair: it fixes the field,
//! the node placement and the hierarchy. Every requested fraction and
//! protocol then runs over the same scenario, so A-HDACS and HDACS are
//! always compared on identical networks.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, FieldName};
use crate::error::Result;
use crate::metrics::{self, condition_census};
use crate::protocol::{global_sparsity, run_ahdacs, run_hdacs, AggregationTrace, Protocol};
use crate::seed;
use crate::topology::{build_hierarchy, place_nodes, ClusterTree, NodeSet};

pub fn scenario_seed(master: u64, nodes: usize, rep: usize) -> u64 {
    seed::derive(&[master, 0x5CE, nodes as u64, rep as u64])
}

/// Seed for the sensing matrices of one protocol run.
pub fn run_seed(scenario: u64, fraction: f64, protocol: Protocol) -> u64 {
    seed::derive(&[scenario, fraction.to_bits(), protocol as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub mse: f64,
    pub rho: Option<f64>,
    pub enabled: usize,
    pub disabled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub protocol: Protocol,
    pub field: FieldName,
    pub nodes: usize,
    pub branching: usize,
    pub levels: usize,
    pub fraction: f64,
    pub seed: u64,
    pub rep: usize,
    pub global_k: usize,
    pub total_tx: f64,
    pub total_rx: f64,
    pub total_bits: u64,
    pub enabled: usize,
    pub disabled: usize,
    pub root_mse: f64,
    pub per_level: Vec<LevelRow>,
}

impl RunRecord {
    pub fn total_energy(&self) -> f64 {
        self.total_tx + self.total_rx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusRecord {
    pub field: FieldName,
    pub nodes: usize,
    pub fraction: f64,
    pub seed: u64,
    pub rep: usize,
    pub cutoff_level: usize,
    pub counts: [usize; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub nodes: usize,
    pub seed: u64,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub cluster: usize,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRatio {
    pub nodes: usize,
    pub fraction: f64,
    /// Σ A-HDACS energy / Σ HDACS energy over repetitions.
    pub ratio: f64,
    pub savings: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub field: FieldName,
    pub energy_ratios: Vec<EnergyRatio>,
    pub mean_ratio: Option<f64>,
    pub mean_savings: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    pub census: Vec<CensusRecord>,
    pub nodes: Vec<NodeRecord>,
    pub summary: Summary,
}

/// A fully built network ready for protocol runs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub nodes: NodeSet,
    pub tree: ClusterTree,
    pub seed: u64,
    pub rep: usize,
}

pub fn build_scenario(config: &ExperimentConfig, size: usize, rep: usize) -> Result<Scenario> {
    let seed = scenario_seed(config.seed, size, rep);
    let field = config.field.build(config.extent, seed)?;
    let mut nodes = place_nodes(size, config.extent, seed)?;
    nodes.sense(&field)?;
    let tree = build_hierarchy(&nodes, config.branching, config.levels)?;
    Ok(Scenario {
        nodes,
        tree,
        seed,
        rep,
    })
}

struct ScenarioOutput {
    runs: Vec<RunRecord>,
    census: Vec<CensusRecord>,
    nodes: Vec<NodeRecord>,
}

fn record(config: &ExperimentConfig, sc: &Scenario, trace: &AggregationTrace) -> Result<RunRecord> {
    let mse = metrics::mse_per_level(trace, &sc.tree, &sc.nodes)?;
    let per_level = trace
        .decisions
        .iter()
        .zip(mse)
        .enumerate()
        .map(|(li, (row, mse))| {
            let eligible = row.iter().filter(|d| d.gate_eligible() && d.level < trace.depth());
            let (mut on, mut off) = (0, 0);
            for d in row {
                match d.status {
                    crate::Status::CsEnabled => on += 1,
                    crate::Status::CsDisabled => off += 1,
                    crate::Status::Sink => {}
                }
            }
            let (e, d) = eligible.fold((0usize, 0usize), |(e, d), x| (e + 1, d + x.is_disabled() as usize));
            LevelRow {
                level: li + 1,
                mse,
                rho: (e > 0).then(|| d as f64 / e as f64),
                enabled: on,
                disabled: off,
            }
        })
        .collect();
    Ok(RunRecord {
        protocol: trace.protocol,
        field: config.field.kind,
        nodes: sc.nodes.len(),
        branching: config.branching,
        levels: config.levels,
        fraction: trace.fraction,
        seed: sc.seed,
        rep: sc.rep,
        global_k: trace.sparsity.global_k,
        total_tx: trace.ledger.total_tx(),
        total_rx: trace.ledger.total_rx(),
        total_bits: trace.ledger.total_bits(),
        enabled: trace.enabled_count(),
        disabled: trace.disabled_count(),
        root_mse: metrics::root_mse(trace, &sc.tree, &sc.nodes)?,
        per_level,
    })
}

fn node_records(sc: &Scenario) -> Vec<NodeRecord> {
    let leaf_of = sc.tree.leaf_cluster_of();
    let mut role: Vec<String> = vec!["member".into(); sc.nodes.len()];
    for row in &sc.tree.levels {
        for c in row {
            role[c.head] = format!("head-l{}", c.level);
        }
    }
    role[sc.nodes.sink] = "sink".into();
    sc.nodes
        .nodes
        .iter()
        .map(|n| NodeRecord {
            nodes: sc.nodes.len(),
            seed: sc.seed,
            id: n.id,
            x: n.position.x,
            y: n.position.y,
            cluster: leaf_of[n.id],
            role: role[n.id].clone(),
        })
        .collect()
}

/// Traces with their table rows, plus census rows, for one scenario.
pub type ScenarioRuns = (Vec<(AggregationTrace, RunRecord)>, Vec<CensusRecord>);

/// Runs every configured protocol over one scenario, for every fraction.
pub fn run_scenario(config: &ExperimentConfig, sc: &Scenario) -> Result<ScenarioRuns> {
    let mut runs = Vec::new();
    let mut census = Vec::new();
    for &fraction in &config.fractions {
        let kt = global_sparsity(&sc.tree, &sc.nodes, fraction)?.max(1);
        let mut a_trace = None;
        let mut h_trace = None;
        for &protocol in &config.protocols {
            let seed = run_seed(sc.seed, fraction, protocol);
            let trace = match protocol {
                Protocol::Ahdacs => run_ahdacs(&sc.tree, &sc.nodes, fraction, seed)?,
                Protocol::Hdacs => run_hdacs(&sc.tree, &sc.nodes, kt, fraction, seed)?,
            };
            let rec = record(config, sc, &trace)?;
            match protocol {
                Protocol::Ahdacs => a_trace = Some(runs.len()),
                Protocol::Hdacs => h_trace = Some(runs.len()),
            }
            runs.push((trace, rec));
        }
        if let (Some(a), Some(h)) = (a_trace, h_trace) {
            let c = condition_census(&runs[a].0, &runs[h].0, kt)?;
            census.push(CensusRecord {
                field: config.field.kind,
                nodes: sc.nodes.len(),
                fraction,
                seed: sc.seed,
                rep: sc.rep,
                cutoff_level: c.cutoff_level,
                counts: c.counts,
            });
        }
    }
    Ok((runs, census))
}

/// Runs the whole grid in memory. Scenarios run in parallel; output order
/// follows the configuration, not completion order.
pub fn simulate(config: &ExperimentConfig) -> Result<ResultBundle> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = config
        .nodes
        .iter()
        .flat_map(|&n| (0..config.reps).map(move |r| (n, r)))
        .collect();
    let outputs: Vec<ScenarioOutput> = cells
        .par_iter()
        .map(|&(size, rep)| -> Result<ScenarioOutput> {
            let sc = build_scenario(config, size, rep)?;
            let (runs, census) = run_scenario(config, &sc)?;
            Ok(ScenarioOutput {
                runs: runs.into_iter().map(|(_, r)| r).collect(),
                census,
                nodes: node_records(&sc),
            })
        })
        .collect::<Result<_>>()?;

    let mut bundle = ResultBundle {
        config: config.clone(),
        runs: Vec::new(),
        census: Vec::new(),
        nodes: Vec::new(),
        summary: Summary {
            field: config.field.kind,
            energy_ratios: Vec::new(),
            mean_ratio: None,
            mean_savings: None,
        },
    };
    for out in outputs {
        bundle.runs.extend(out.runs);
        bundle.census.extend(out.census);
        bundle.nodes.extend(out.nodes);
    }
    bundle.summary = summarize(config, &bundle.runs);
    Ok(bundle)
}

fn summarize(config: &ExperimentConfig, runs: &[RunRecord]) -> Summary {
    let mut energy_ratios = Vec::new();
    for &size in &config.nodes {
        for &fraction in &config.fractions {
            let total = |p: Protocol| -> f64 {
                runs.iter()
                    .filter(|r| r.protocol == p && r.nodes == size && r.fraction == fraction)
                    .map(RunRecord::total_energy)
                    .sum()
            };
            let (a, h) = (total(Protocol::Ahdacs), total(Protocol::Hdacs));
            if a > 0.0 && h > 0.0 {
                let ratio = a / h;
                energy_ratios.push(EnergyRatio {
                    nodes: size,
                    fraction,
                    ratio,
                    savings: 1.0 - ratio,
                });
            }
        }
    }
    let mean = |f: fn(&EnergyRatio) -> f64| {
        (!energy_ratios.is_empty())
            .then(|| energy_ratios.iter().map(f).sum::<f64>() / energy_ratios.len() as f64)
    };
    Summary {
        field: config.field.kind,
        mean_ratio: mean(|e| e.ratio),
        mean_savings: mean(|e| e.savings),
        energy_ratios,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes runs.csv, levels.csv, census.csv, nodes.csv and summary.json.
pub fn write_bundle(bundle: &ResultBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
    w.write_record([
        "protocol", "field", "nodes", "n", "T", "fraction", "seed", "rep", "global_k",
        "total_tx_J", "total_rx_J", "total_bits", "enabled", "disabled", "root_mse",
    ])?;
    for r in &bundle.runs {
        w.write_record([
            r.protocol.name().to_string(),
            r.field.as_str().to_string(),
            r.nodes.to_string(),
            r.branching.to_string(),
            r.levels.to_string(),
            r.fraction.to_string(),
            r.seed.to_string(),
            r.rep.to_string(),
            r.global_k.to_string(),
            r.total_tx.to_string(),
            r.total_rx.to_string(),
            r.total_bits.to_string(),
            r.enabled.to_string(),
            r.disabled.to_string(),
            r.root_mse.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("levels.csv"))?;
    w.write_record([
        "field", "nodes", "fraction", "seed", "rep", "protocol", "level", "mse", "rho",
        "enabled_count", "disabled_count",
    ])?;
    for r in &bundle.runs {
        for l in &r.per_level {
            w.write_record([
                r.field.as_str().to_string(),
                r.nodes.to_string(),
                r.fraction.to_string(),
                r.seed.to_string(),
                r.rep.to_string(),
                r.protocol.name().to_string(),
                l.level.to_string(),
                l.mse.to_string(),
                opt(l.rho),
                l.enabled.to_string(),
                l.disabled.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("census.csv"))?;
    w.write_record(["field", "nodes", "fraction", "seed", "rep", "cutoff_level", "condition", "count"])?;
    for c in &bundle.census {
        for (i, count) in c.counts.iter().enumerate() {
            w.write_record([
                c.field.as_str().to_string(),
                c.nodes.to_string(),
                c.fraction.to_string(),
                c.seed.to_string(),
                c.rep.to_string(),
                c.cutoff_level.to_string(),
                (i + 1).to_string(),
                count.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("nodes.csv"))?;
    w.write_record(["nodes", "seed", "id", "x", "y", "cluster", "role"])?;
    for n in &bundle.nodes {
        w.write_record([
            n.nodes.to_string(),
            n.seed.to_string(),
            n.id.to_string(),
            n.x.to_string(),
            n.y.to_string(),
            n.cluster.to_string(),
            n.role.clone(),
        ])?;
    }
    w.flush()?;

    let json = serde_json::to_string_pretty(&bundle.summary).expect("summary serializes");
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}

/// Simulates `config` and writes the result bundle to `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultBundle> {
    let bundle = simulate(config)?;
    write_bundle(&bundle, &config.out)?;
    Ok(bundle)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub field: FieldName,
    pub nodes: usize,
    /// A-HDACS root MSE averaged over repetitions.
    pub root_mse: f64,
}

/// A-HDACS root MSE for every configured fraction and size.
pub fn sweep_threshold(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let mut cfg = config.clone();
    cfg.protocols = vec![Protocol::Ahdacs];
    let bundle = simulate(&cfg)?;
    let mut rows = Vec::new();
    for &fraction in &cfg.fractions {
        for &size in &cfg.nodes {
            let sel: Vec<f64> = bundle
                .runs
                .iter()
                .filter(|r| r.fraction == fraction && r.nodes == size)
                .map(|r| r.root_mse)
                .collect();
            rows.push(SweepRow {
                fraction,
                field: cfg.field.kind,
                nodes: size,
                root_mse: sel.iter().sum::<f64>() / sel.len() as f64,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep(rows: &[SweepRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(["fraction", "field", "nodes", "root_mse"])?;
    for r in rows {
        w.write_record([
            r.fraction.to_string(),
            r.field.as_str().to_string(),
            r.nodes.to_string(),
            r.root_mse.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
