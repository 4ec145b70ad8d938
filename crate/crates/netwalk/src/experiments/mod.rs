//! Ensemble harness: many graphs, many seed-node draws per graph.
//!
//! Seeds are derived with [`netwalk_core::seed`]: graph `g` uses
//! `graph_seed(master, g)` and simulation `s` on graph `g` uses
//! `sim_seed(master, g, s)`. Tasks run on the current rayon pool; results are
//! keyed by index, so output does not depend on the worker count.

use netwalk_core::seed::{graph_seed, sim_seed};
use netwalk_core::stats::{self, SampleSummary};
use netwalk_core::{
    count_hubs, generate, giant_component, run_to_saturation, DynamicsError, Graph, GraphError,
    GraphSpec, Model, SimConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod figures;

/// Errors from ensemble runs and their output.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid experiment config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Skewness threshold marking an asymmetric saturation-time distribution.
pub const DEFAULT_SKEW_THRESHOLD: f64 = 1.0;

/// Configuration of a many-graph ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Graph parameters; `rng_seed` is replaced by the derived graph seed.
    pub graph_spec: GraphSpec,
    /// Simulation parameters; `rng_seed` is replaced by the derived sim seed.
    pub sim_config: SimConfig,
    pub n_graphs: usize,
    pub n_sims_per_graph: usize,
    pub master_seed: u64,
    pub skew_threshold: f64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_graphs == 0 || self.n_sims_per_graph == 0 {
            return Err(ExperimentError::Invalid("n_graphs and n_sims_per_graph must be positive".into()));
        }
        self.graph_spec.validate()?;
        self.sim_config.validate()?;
        Ok(())
    }
}

/// One simulation row of the per-simulation CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub graph_index: usize,
    pub sim_index: usize,
    pub saturation_time: Option<u64>,
    pub converged: bool,
    pub hub_count: usize,
    pub giant_component_size: usize,
}

/// Per-graph aggregate of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub graph_index: usize,
    pub hub_count: usize,
    pub giant_component_size: usize,
    /// Nodes outside the giant component, not simulated.
    pub discarded_nodes: usize,
    /// Saturation times of the converged simulations, in simulation order.
    pub saturation_times: Vec<u64>,
    /// Summary of `saturation_times`; absent when no simulation converged.
    pub summary: Option<SampleSummary>,
    pub unconverged_count: usize,
}

impl GraphRecord {
    pub fn skewness(&self) -> Option<f64> {
        self.summary.and_then(|s| s.skewness)
    }
}

/// Output of [`run_skewness_ensemble`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewnessEnsemble {
    pub config: EnsembleConfig,
    pub graphs: Vec<GraphRecord>,
    /// Graphs with a defined skewness (the fraction's denominator).
    pub graphs_with_skewness: usize,
    pub graphs_above_threshold: usize,
    /// `graphs_above_threshold / graphs_with_skewness`; absent when the
    /// denominator is 0.
    pub fraction_above_threshold: Option<f64>,
    /// Per-simulation rows; persisted as CSV rather than in the JSON summary.
    #[serde(skip)]
    sim_rows: Vec<SimRecord>,
}

impl SkewnessEnsemble {
    /// Per-simulation rows, ordered by `(graph_index, sim_index)`.
    pub fn sim_records(&self) -> &[SimRecord] {
        &self.sim_rows
    }
}

/// A graph prepared for simulation.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub graph: Graph,
    pub hub_count: usize,
    pub discarded_nodes: usize,
}

/// Generates `spec` with `seed` and keeps its giant component.
pub fn prepare_graph(spec: &GraphSpec, seed: u64) -> Result<PreparedGraph, ExperimentError> {
    let full = generate(&GraphSpec { rng_seed: seed, ..*spec })?;
    let (graph, _) = giant_component(&full);
    Ok(PreparedGraph {
        hub_count: count_hubs(&graph),
        discarded_nodes: full.node_count() - graph.node_count(),
        graph,
    })
}

fn check_seed_nodes(g: &Graph, sim: &SimConfig) -> Result<(), ExperimentError> {
    if sim.seed_node_count > g.node_count() {
        return Err(DynamicsError::TooManySeedNodes {
            requested: sim.seed_node_count,
            node_count: g.node_count(),
        }
        .into());
    }
    Ok(())
}

fn saturation_time(g: &Graph, sim: &SimConfig, seed: u64) -> Result<Option<u64>, ExperimentError> {
    Ok(run_to_saturation(g, &sim.with_seed(seed))?.saturation_time)
}

fn summarize(times: &[u64]) -> Option<SampleSummary> {
    let xs: Vec<f64> = times.iter().map(|&t| t as f64).collect();
    SampleSummary::from_samples(&xs).ok()
}

/// Saturation-time summary for one diffusion rate on a fixed graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub diffusion_rate: f64,
    pub saturation_times: Vec<Option<u64>>,
    pub summary: Option<SampleSummary>,
    pub unconverged_count: usize,
}

impl RateSummary {
    /// `p95 − median`.
    pub fn upper_spread(&self) -> Option<f64> {
        self.summary.map(|s| s.p95 - s.median)
    }

    /// `median − p05`.
    pub fn lower_spread(&self) -> Option<f64> {
        self.summary.map(|s| s.median - s.p05)
    }
}

/// Runs `n_sims` simulations on `g` for every rate in `p_values`.
///
/// Only the seed nodes vary between simulations: simulation `s` uses
/// `sim_seed(master_seed, 0, s)` for every rate, so the rates share the same
/// initial conditions.
pub fn run_saturation_ensemble(
    g: &Graph,
    sim: &SimConfig,
    n_sims: usize,
    p_values: &[f64],
    master_seed: u64,
) -> Result<Vec<RateSummary>, ExperimentError> {
    if n_sims == 0 {
        return Err(ExperimentError::Invalid("n_sims must be positive".into()));
    }
    check_seed_nodes(g, sim)?;
    for &p in p_values {
        SimConfig { diffusion_rate: p, ..*sim }.validate()?;
    }
    let tasks: Vec<(usize, usize)> = (0..p_values.len())
        .flat_map(|pi| (0..n_sims).map(move |s| (pi, s)))
        .collect();
    let times = tasks
        .par_iter()
        .map(|&(pi, s)| {
            let cfg = SimConfig { diffusion_rate: p_values[pi], ..*sim };
            saturation_time(g, &cfg, sim_seed(master_seed, 0, s as u64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(p_values
        .iter()
        .zip(times.chunks(n_sims))
        .map(|(&p, chunk)| {
            let converged: Vec<u64> = chunk.iter().flatten().copied().collect();
            RateSummary {
                diffusion_rate: p,
                saturation_times: chunk.to_vec(),
                summary: summarize(&converged),
                unconverged_count: chunk.len() - converged.len(),
            }
        })
        .collect())
}

/// Per-graph saturation-time distributions and the fraction of graphs whose
/// skewness reaches `skew_threshold`.
///
/// Graphs with fewer than three converged runs (or zero spread) have no
/// skewness and are left out of the fraction's denominator.
pub fn run_skewness_ensemble(cfg: &EnsembleConfig) -> Result<SkewnessEnsemble, ExperimentError> {
    cfg.validate()?;
    let graphs = (0..cfg.n_graphs)
        .into_par_iter()
        .map(|gi| prepare_graph(&cfg.graph_spec, graph_seed(cfg.master_seed, gi as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    for pg in &graphs {
        check_seed_nodes(&pg.graph, &cfg.sim_config)?;
    }
    let n_sims = cfg.n_sims_per_graph;
    let times = (0..cfg.n_graphs * n_sims)
        .into_par_iter()
        .map(|task| {
            let (gi, si) = (task / n_sims, task % n_sims);
            let seed = sim_seed(cfg.master_seed, gi as u64, si as u64);
            saturation_time(&graphs[gi].graph, &cfg.sim_config, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::with_capacity(cfg.n_graphs);
    let mut rows = Vec::with_capacity(times.len());
    for (gi, (pg, chunk)) in graphs.iter().zip(times.chunks(n_sims)).enumerate() {
        let converged: Vec<u64> = chunk.iter().flatten().copied().collect();
        for (si, t) in chunk.iter().enumerate() {
            rows.push(SimRecord {
                graph_index: gi,
                sim_index: si,
                saturation_time: *t,
                converged: t.is_some(),
                hub_count: pg.hub_count,
                giant_component_size: pg.graph.node_count(),
            });
        }
        records.push(GraphRecord {
            graph_index: gi,
            hub_count: pg.hub_count,
            giant_component_size: pg.graph.node_count(),
            discarded_nodes: pg.discarded_nodes,
            summary: summarize(&converged),
            unconverged_count: n_sims - converged.len(),
            saturation_times: converged,
        });
    }
    Ok(assemble(*cfg, records, rows))
}

fn assemble(config: EnsembleConfig, graphs: Vec<GraphRecord>, sim_rows: Vec<SimRecord>) -> SkewnessEnsemble {
    let skews: Vec<f64> = graphs.iter().filter_map(GraphRecord::skewness).collect();
    let above = skews.iter().filter(|&&s| s >= config.skew_threshold).count();
    SkewnessEnsemble {
        config,
        graphs_with_skewness: skews.len(),
        graphs_above_threshold: above,
        fraction_above_threshold: (!skews.is_empty()).then(|| above as f64 / skews.len() as f64),
        graphs,
        sim_rows,
    }
}

/// Rebuilds an ensemble's aggregates from its per-simulation rows.
///
/// `discarded_nodes` is not part of the rows and is taken as 0.
pub fn ensemble_from_records(config: EnsembleConfig, rows: &[SimRecord]) -> SkewnessEnsemble {
    let mut graphs: Vec<GraphRecord> = Vec::new();
    for row in rows {
        if graphs.last().map(|g| g.graph_index) != Some(row.graph_index) {
            graphs.push(GraphRecord {
                graph_index: row.graph_index,
                hub_count: row.hub_count,
                giant_component_size: row.giant_component_size,
                discarded_nodes: 0,
                saturation_times: Vec::new(),
                summary: None,
                unconverged_count: 0,
            });
        }
        let g = graphs.last_mut().unwrap();
        match row.saturation_time {
            Some(t) => g.saturation_times.push(t),
            None => g.unconverged_count += 1,
        }
    }
    for g in &mut graphs {
        g.summary = summarize(&g.saturation_times);
    }
    assemble(config, graphs, rows.to_vec())
}

/// One cell of a density or size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub node_count: usize,
    pub avg_degree: f64,
    pub ensemble: SkewnessEnsemble,
}

impl SweepPoint {
    pub fn fraction(&self) -> Option<f64> {
        self.ensemble.fraction_above_threshold
    }
}

/// Skewness ensembles on ER graphs for each average degree.
///
/// Every cell reuses the template's master seed.
pub fn run_density_sweep(
    avg_degrees: &[f64],
    node_count: usize,
    template: &EnsembleConfig,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    run_size_sweep(&[node_count], avg_degrees, template)
}

/// Skewness ensembles on ER graphs over the `(N, ⟨k⟩)` grid, row-major in `N`.
pub fn run_size_sweep(
    node_counts: &[usize],
    avg_degrees: &[f64],
    template: &EnsembleConfig,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    let mut out = Vec::with_capacity(node_counts.len() * avg_degrees.len());
    for &n in node_counts {
        for &k in avg_degrees {
            if k.partial_cmp(&(n as f64 - 1.0)) != Some(std::cmp::Ordering::Less) {
                return Err(ExperimentError::Invalid(format!("avg_degree {k} must be below node_count - 1 = {}", n - 1)));
            }
            let cfg = EnsembleConfig {
                graph_spec: GraphSpec { model: Model::Er, node_count: n, avg_degree: k, ..template.graph_spec },
                ..*template
            };
            out.push(SweepPoint { node_count: n, avg_degree: k, ensemble: run_skewness_ensemble(&cfg)? });
        }
    }
    Ok(out)
}

/// Correlations between hub count and saturation-time statistics across the
/// graphs of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubCorrelation {
    pub model: Model,
    /// Pearson `r` of (hub count, median saturation time); absent when
    /// either side has zero variance.
    pub corr_hubs_median: Option<f64>,
    /// Pearson `r` of (hub count, skewness) over graphs with a skewness.
    pub corr_hubs_skewness: Option<f64>,
    pub ensemble: SkewnessEnsemble,
}

/// Runs a skewness ensemble for `model` and correlates hub counts with the
/// per-graph median and skewness.
pub fn run_hub_correlation(model: Model, cfg: &EnsembleConfig) -> Result<HubCorrelation, ExperimentError> {
    let cfg = EnsembleConfig { graph_spec: GraphSpec { model, ..cfg.graph_spec }, ..*cfg };
    Ok(hub_correlation(run_skewness_ensemble(&cfg)?))
}

/// Correlations for an ensemble that has already been run.
pub fn hub_correlation(ensemble: SkewnessEnsemble) -> HubCorrelation {
    let (mut h_med, mut med) = (Vec::new(), Vec::new());
    let (mut h_skew, mut skew) = (Vec::new(), Vec::new());
    for g in &ensemble.graphs {
        if let Some(s) = g.summary {
            h_med.push(g.hub_count as f64);
            med.push(s.median);
            if let Some(k) = s.skewness {
                h_skew.push(g.hub_count as f64);
                skew.push(k);
            }
        }
    }
    HubCorrelation {
        model: ensemble.config.graph_spec.model,
        corr_hubs_median: stats::pearson(&h_med, &med).ok(),
        corr_hubs_skewness: stats::pearson(&h_skew, &skew).ok(),
        ensemble,
    }
}
