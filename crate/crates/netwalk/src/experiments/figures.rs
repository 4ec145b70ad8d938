//! Figure-level experiments with `paper` and `smoke` profiles, and their
//! CSV/JSON output.
//!
//! Every experiment writes per-simulation CSV files with the header
//! `graph_index,sim_index,saturation_time,converged,hub_count,giant_component_size`
//! (an empty `saturation_time` marks an unconverged run) and one JSON summary
//! named after the figure that embeds the full parameter set.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use netwalk_core::seed::graph_seed;
use netwalk_core::stats::{self, SampleSummary};
use netwalk_core::{GraphSpec, Model, SimConfig};
use serde::{Deserialize, Serialize};

use super::{
    hub_correlation, prepare_graph, run_saturation_ensemble, run_size_sweep, run_skewness_ensemble,
    EnsembleConfig, ExperimentError, GraphRecord, HubCorrelation, RateSummary, SimRecord,
    SkewnessEnsemble, SweepPoint, DEFAULT_SKEW_THRESHOLD,
};

/// Ensemble size preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Full-size ensembles (100 graphs × 100 simulations).
    Paper,
    /// Small ensembles for quick checks.
    Smoke,
}

/// Reproducible figure experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Saturation-time median and 5/95 percentiles versus diffusion rate.
    Fig3a,
    /// Per-graph skewness distribution and fraction above the threshold.
    Fig3b,
    /// Fraction of skewed ER graphs versus average degree.
    Fig4a,
    /// Fraction of skewed ER graphs over a node-count × degree grid.
    Fig4b,
    /// Correlation of hub count with median and skewness.
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
            Figure::Fig5 => "fig5",
        }
    }
}

/// Fully resolved parameters of a figure run; stored in its JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureParams {
    pub figure: Figure,
    pub profile: Profile,
    pub master_seed: u64,
    pub models: Vec<Model>,
    pub node_count: usize,
    pub avg_degree: f64,
    pub total_walkers: f64,
    pub seed_node_count: usize,
    pub diffusion_rate: f64,
    /// Rates swept by `fig3a`.
    pub diffusion_rates: Vec<f64>,
    /// Degrees swept by `fig4a` and `fig4b`.
    pub avg_degrees: Vec<f64>,
    /// Node counts swept by `fig4b`.
    pub node_counts: Vec<usize>,
    pub n_graphs: usize,
    pub n_sims: usize,
    pub r2_threshold: f64,
    pub max_steps: u64,
    pub skew_threshold: f64,
}

/// Average degrees of the density sweep.
pub const DEFAULT_SWEEP_DEGREES: [f64; 6] = [4.0, 6.0, 8.0, 12.0, 16.0, 20.0];
/// Node counts of the size sweep.
pub const DEFAULT_SWEEP_NODES: [usize; 4] = [250, 500, 1000, 2000];

impl FigureParams {
    /// Defaults of `figure` under `profile`.
    pub fn defaults(figure: Figure, profile: Profile) -> Self {
        let (n_graphs, n_sims) = match (figure, profile) {
            (_, Profile::Paper) => (100, 100),
            (Figure::Fig3a, Profile::Smoke) => (1, 20),
            (Figure::Fig4a, Profile::Smoke) => (25, 50),
            (_, Profile::Smoke) => (10, 20),
        };
        let (total_walkers, seed_node_count) = match figure {
            Figure::Fig3a => (400.0, 8),
            _ => (10_000.0, 4),
        };
        FigureParams {
            figure,
            profile,
            master_seed: 1,
            models: match figure {
                Figure::Fig4a | Figure::Fig4b => vec![Model::Er],
                _ => vec![Model::Er, Model::Ba],
            },
            node_count: 1000,
            avg_degree: 6.0,
            total_walkers,
            seed_node_count,
            diffusion_rate: 0.4,
            diffusion_rates: (1..=9).map(|i| i as f64 / 10.0).collect(),
            avg_degrees: DEFAULT_SWEEP_DEGREES.to_vec(),
            node_counts: DEFAULT_SWEEP_NODES.to_vec(),
            n_graphs,
            n_sims,
            r2_threshold: SimConfig::DEFAULT_R2_THRESHOLD,
            max_steps: SimConfig::DEFAULT_MAX_STEPS,
            skew_threshold: DEFAULT_SKEW_THRESHOLD,
        }
    }

    fn sim_config(&self, diffusion_rate: f64) -> SimConfig {
        SimConfig {
            r2_threshold: self.r2_threshold,
            max_steps: self.max_steps,
            ..SimConfig::new(diffusion_rate, self.total_walkers, self.seed_node_count, 0)
        }
    }

    /// Ensemble config for `model` at the base node count and degree.
    pub fn ensemble(&self, model: Model) -> EnsembleConfig {
        EnsembleConfig {
            graph_spec: GraphSpec { model, node_count: self.node_count, avg_degree: self.avg_degree, rng_seed: 0 },
            sim_config: self.sim_config(self.diffusion_rate),
            n_graphs: self.n_graphs,
            n_sims_per_graph: self.n_sims,
            master_seed: self.master_seed,
            skew_threshold: self.skew_threshold,
        }
    }
}

/// Per-graph row of the JSON summaries (saturation times live in the CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRow {
    pub graph_index: usize,
    pub hub_count: usize,
    pub giant_component_size: usize,
    pub discarded_nodes: usize,
    pub converged_count: usize,
    pub unconverged_count: usize,
    pub median: Option<f64>,
    pub p05: Option<f64>,
    pub p95: Option<f64>,
    pub skewness: Option<f64>,
}

impl From<&GraphRecord> for GraphRow {
    fn from(g: &GraphRecord) -> Self {
        GraphRow {
            graph_index: g.graph_index,
            hub_count: g.hub_count,
            giant_component_size: g.giant_component_size,
            discarded_nodes: g.discarded_nodes,
            converged_count: g.saturation_times.len(),
            unconverged_count: g.unconverged_count,
            median: g.summary.map(|s| s.median),
            p05: g.summary.map(|s| s.p05),
            p95: g.summary.map(|s| s.p95),
            skewness: g.skewness(),
        }
    }
}

/// Summary of a skewness ensemble for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTable {
    pub model: Model,
    pub config: EnsembleConfig,
    pub graphs_with_skewness: usize,
    pub graphs_above_threshold: usize,
    pub fraction_above_threshold: Option<f64>,
    pub max_skewness: Option<f64>,
    pub records_file: String,
    pub graphs: Vec<GraphRow>,
}

impl EnsembleTable {
    fn new(e: &SkewnessEnsemble, records_file: String) -> Self {
        EnsembleTable {
            model: e.config.graph_spec.model,
            config: e.config,
            graphs_with_skewness: e.graphs_with_skewness,
            graphs_above_threshold: e.graphs_above_threshold,
            fraction_above_threshold: e.fraction_above_threshold,
            max_skewness: e.graphs.iter().filter_map(GraphRecord::skewness).reduce(f64::max),
            records_file,
            graphs: e.graphs.iter().map(GraphRow::from).collect(),
        }
    }
}

/// One diffusion rate of `fig3a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub diffusion_rate: f64,
    pub converged_count: usize,
    pub unconverged_count: usize,
    pub median: Option<f64>,
    pub p05: Option<f64>,
    pub p95: Option<f64>,
    pub skewness: Option<f64>,
    /// `p95 − median`.
    pub upper_spread: Option<f64>,
    /// `median − p05`.
    pub lower_spread: Option<f64>,
    pub records_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3aModel {
    pub model: Model,
    pub graph_seed: u64,
    pub giant_component_size: usize,
    pub discarded_nodes: usize,
    pub hub_count: usize,
    pub rates: Vec<RateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub model: Model,
    pub corr_hubs_median: Option<f64>,
    pub corr_hubs_skewness: Option<f64>,
    pub ensemble: EnsembleTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub node_count: usize,
    pub avg_degree: f64,
    pub graphs_with_skewness: usize,
    pub graphs_above_threshold: usize,
    pub fraction_above_threshold: Option<f64>,
    pub records_file: String,
}

/// Figure-specific results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureResults {
    SaturationVsRate { models: Vec<Fig3aModel> },
    Skewness { models: Vec<EnsembleTable> },
    Sweep {
        points: Vec<SweepRow>,
        /// Spearman correlation of fraction against average degree, per node
        /// count, in `node_counts` order.
        spearman_fraction_vs_degree: Vec<Option<f64>>,
    },
    HubCorrelation { models: Vec<CorrelationTable> },
}

/// Contents of the JSON summary file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureReport {
    pub experiment: String,
    pub params: FigureParams,
    pub results: FigureResults,
}

/// A finished figure run.
#[derive(Debug, Clone)]
pub struct FigureRun {
    pub report: FigureReport,
    /// Raw ensembles behind `fig3a`.
    pub rate_summaries: Vec<(Model, Vec<RateSummary>)>,
    /// Raw ensembles behind `fig3b` and `fig5`.
    pub ensembles: Vec<SkewnessEnsemble>,
    /// Raw cells behind `fig4a` and `fig4b`.
    pub sweep: Vec<SweepPoint>,
    pub correlations: Vec<HubCorrelation>,
    /// Every file written, in write order.
    pub files: Vec<PathBuf>,
}

/// Writes per-simulation rows as CSV.
pub fn write_sim_records(path: &Path, rows: &[SimRecord]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads per-simulation rows written by [`write_sim_records`].
pub fn read_sim_records(path: &Path) -> Result<Vec<SimRecord>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(ExperimentError::from)).collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn records(&mut self, name: String, rows: &[SimRecord]) -> Result<String, ExperimentError> {
        let path = self.dir.join(&name);
        write_sim_records(&path, rows)?;
        self.files.push(path);
        Ok(name)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), ExperimentError> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs a figure experiment and writes its outputs into `out_dir`.
///
/// CSV files are written as each ensemble finishes, so a failure part-way
/// leaves the completed parts on disk.
pub fn run_figure(params: &FigureParams, out_dir: &Path) -> Result<FigureRun, ExperimentError> {
    std::fs::create_dir_all(out_dir)?;
    let mut out = Output { dir: out_dir, files: Vec::new() };
    let name = params.figure.name();
    let mut run = FigureRun {
        report: FigureReport {
            experiment: name.to_string(),
            params: params.clone(),
            results: FigureResults::Skewness { models: Vec::new() },
        },
        rate_summaries: Vec::new(),
        ensembles: Vec::new(),
        sweep: Vec::new(),
        correlations: Vec::new(),
        files: Vec::new(),
    };

    run.report.results = match params.figure {
        Figure::Fig3a => {
            let mut models = Vec::new();
            for &model in &params.models {
                let spec = GraphSpec { model, node_count: params.node_count, avg_degree: params.avg_degree, rng_seed: 0 };
                let seed = graph_seed(params.master_seed, 0);
                let pg = prepare_graph(&spec, seed)?;
                let rates = run_saturation_ensemble(
                    &pg.graph,
                    &params.sim_config(params.diffusion_rate),
                    params.n_sims,
                    &params.diffusion_rates,
                    params.master_seed,
                )?;
                let mut rows = Vec::new();
                for r in &rates {
                    let sims: Vec<SimRecord> = r
                        .saturation_times
                        .iter()
                        .enumerate()
                        .map(|(s, t)| SimRecord {
                            graph_index: 0,
                            sim_index: s,
                            saturation_time: *t,
                            converged: t.is_some(),
                            hub_count: pg.hub_count,
                            giant_component_size: pg.graph.node_count(),
                        })
                        .collect();
                    let file = out.records(format!("{name}_{model}_p{}.csv", fmt_num(r.diffusion_rate)), &sims)?;
                    let s: Option<SampleSummary> = r.summary;
                    rows.push(RateRow {
                        diffusion_rate: r.diffusion_rate,
                        converged_count: s.map_or(0, |s| s.count),
                        unconverged_count: r.unconverged_count,
                        median: s.map(|s| s.median),
                        p05: s.map(|s| s.p05),
                        p95: s.map(|s| s.p95),
                        skewness: s.and_then(|s| s.skewness),
                        upper_spread: r.upper_spread(),
                        lower_spread: r.lower_spread(),
                        records_file: file,
                    });
                }
                models.push(Fig3aModel {
                    model,
                    graph_seed: seed,
                    giant_component_size: pg.graph.node_count(),
                    discarded_nodes: pg.discarded_nodes,
                    hub_count: pg.hub_count,
                    rates: rows,
                });
                run.rate_summaries.push((model, rates));
            }
            FigureResults::SaturationVsRate { models }
        }
        Figure::Fig3b | Figure::Fig5 => {
            let mut tables = Vec::new();
            for &model in &params.models {
                let e = run_skewness_ensemble(&params.ensemble(model))?;
                let file = out.records(format!("{name}_{model}.csv"), e.sim_records())?;
                tables.push(EnsembleTable::new(&e, file));
                run.ensembles.push(e);
            }
            if params.figure == Figure::Fig3b {
                FigureResults::Skewness { models: tables }
            } else {
                let mut models = Vec::new();
                for (e, table) in run.ensembles.iter().zip(tables) {
                    let c = hub_correlation(e.clone());
                    models.push(CorrelationTable {
                        model: c.model,
                        corr_hubs_median: c.corr_hubs_median,
                        corr_hubs_skewness: c.corr_hubs_skewness,
                        ensemble: table,
                    });
                    run.correlations.push(c);
                }
                FigureResults::HubCorrelation { models }
            }
        }
        Figure::Fig4a | Figure::Fig4b => {
            let node_counts = if params.figure == Figure::Fig4a {
                vec![params.node_count]
            } else {
                params.node_counts.clone()
            };
            let template = params.ensemble(Model::Er);
            let mut points = Vec::new();
            for &n in &node_counts {
                for &k in &params.avg_degrees {
                    let cell = run_size_sweep(&[n], &[k], &template)?.remove(0);
                    let file_name = if params.figure == Figure::Fig4a {
                        format!("{name}_k{}.csv", fmt_num(k))
                    } else {
                        format!("{name}_n{n}_k{}.csv", fmt_num(k))
                    };
                    let file = out.records(file_name, cell.ensemble.sim_records())?;
                    points.push(SweepRow {
                        node_count: n,
                        avg_degree: k,
                        graphs_with_skewness: cell.ensemble.graphs_with_skewness,
                        graphs_above_threshold: cell.ensemble.graphs_above_threshold,
                        fraction_above_threshold: cell.fraction(),
                        records_file: file,
                    });
                    run.sweep.push(cell);
                }
            }
            let spearman = node_counts
                .iter()
                .map(|&n| fraction_trend(&run.sweep, n))
                .collect();
            FigureResults::Sweep { points, spearman_fraction_vs_degree: spearman }
        }
    };
    out.json(&format!("{name}.json"), &run.report)?;
    run.files = out.files;
    Ok(run)
}

/// Spearman correlation of the skewed fraction against average degree for
/// the cells with node count `n` (cells without a fraction are skipped).
pub fn fraction_trend(points: &[SweepPoint], n: usize) -> Option<f64> {
    let (ks, fs): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.node_count == n)
        .filter_map(|p| Some((p.avg_degree, p.fraction()?)))
        .unzip();
    stats::spearman(&ks, &fs).ok()
}

/// Runs `f` on a dedicated rayon pool with `threads` workers (0 = default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(figure: Figure) -> FigureParams {
        FigureParams {
            node_count: 150,
            n_graphs: 3,
            n_sims: 6,
            diffusion_rates: vec![0.3, 0.6],
            avg_degrees: vec![4.0, 8.0],
            node_counts: vec![100, 150],
            ..FigureParams::defaults(figure, Profile::Smoke)
        }
    }

    #[test]
    fn profile_defaults() {
        let p = FigureParams::defaults(Figure::Fig3b, Profile::Paper);
        assert_eq!((p.n_graphs, p.n_sims, p.seed_node_count, p.total_walkers), (100, 100, 4, 10_000.0));
        let s = FigureParams::defaults(Figure::Fig3b, Profile::Smoke);
        assert_eq!((s.n_graphs, s.n_sims), (10, 20));
        let a = FigureParams::defaults(Figure::Fig3a, Profile::Paper);
        assert_eq!((a.seed_node_count, a.total_walkers, a.n_sims), (8, 400.0, 100));
        assert_eq!(a.diffusion_rates.len(), 9);
        let d = FigureParams::defaults(Figure::Fig4a, Profile::Smoke);
        assert_eq!((d.n_graphs, d.n_sims), (25, 50));
        assert_eq!(d.models, vec![Model::Er]);
    }

    #[test]
    fn every_figure_writes_csv_and_json() {
        for figure in [Figure::Fig3a, Figure::Fig3b, Figure::Fig4a, Figure::Fig4b, Figure::Fig5] {
            let dir = tempfile::tempdir().unwrap();
            let run = run_figure(&tiny(figure), dir.path()).unwrap();
            let json = dir.path().join(format!("{}.json", figure.name()));
            assert!(json.exists());
            let parsed: FigureReport = serde_json::from_reader(File::open(&json).unwrap()).unwrap();
            assert_eq!(parsed.params, tiny(figure));
            let csvs: Vec<_> = run.files.iter().filter(|f| f.extension().unwrap() == "csv").collect();
            let expected = match figure {
                Figure::Fig3a => 4,
                Figure::Fig3b | Figure::Fig5 => 2,
                Figure::Fig4a => 2,
                Figure::Fig4b => 4,
            };
            assert_eq!(csvs.len(), expected, "{figure:?}");
            let header = std::fs::read_to_string(csvs[0]).unwrap();
            assert!(header.starts_with(
                "graph_index,sim_index,saturation_time,converged,hub_count,giant_component_size\n"
            ));
        }
    }

    #[test]
    fn csv_roundtrip_recomputes_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let run = run_figure(&tiny(Figure::Fig3b), dir.path()).unwrap();
        for e in &run.ensembles {
            let path = dir.path().join(format!("fig3b_{}.csv", e.config.graph_spec.model));
            let rows = read_sim_records(&path).unwrap();
            assert_eq!(rows, e.sim_records());
            let rebuilt = super::super::ensemble_from_records(e.config, &rows);
            assert_eq!(rebuilt.fraction_above_threshold, e.fraction_above_threshold);
            for (a, b) in rebuilt.graphs.iter().zip(&e.graphs) {
                assert_eq!(a.summary, b.summary);
            }
        }
    }
}
