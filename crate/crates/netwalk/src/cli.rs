//! Command-line interface.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netwalk_core::seed::{graph_seed, sim_seed};
use netwalk_core::{generate, giant_component, run_to_saturation, GraphSpec, Model, SimConfig};

use crate::experiments::figures::{run_figure, with_threads, Figure, FigureParams, FigureResults, Profile};
use crate::io::{read_edge_list, write_edge_list, SimResultJson};

#[derive(Debug, Parser)]
#[command(name = "netwalk", version, about = "Deterministic random walk on ER and BA graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Er,
    Ba,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Er => Model::Er,
            ModelArg::Ba => Model::Ba,
        }
    }
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed (default 1); graph and seed-node seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,
    /// Number of nodes.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true)]
    pub avg_degree: Option<f64>,
    /// Total walker mass.
    #[arg(long, global = true)]
    pub walkers: Option<f64>,
    /// Number of nodes sharing the initial mass.
    #[arg(long, global = true)]
    pub seed_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub diffusion_rate: Option<f64>,
    #[arg(long, global = true)]
    pub r2_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    /// Output file (`generate`, `simulate`) or directory (`experiment`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as an edge list.
    Generate,
    /// Run one simulation to saturation and write the result as JSON.
    Simulate {
        /// Edge-list file to simulate on instead of generating a graph.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Run a figure experiment and write CSV records plus a JSON summary.
    Experiment(ExperimentArgs),
    /// Serve interactive sessions over WebSocket at `/ws`.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, value_enum, default_value = "smoke")]
    pub profile: Profile,
    /// Graphs per ensemble.
    #[arg(long)]
    pub graphs: Option<usize>,
    /// Simulations per graph.
    #[arg(long)]
    pub sims: Option<usize>,
    /// Comma-separated diffusion rates (fig3a).
    #[arg(long, value_delimiter = ',')]
    pub diffusion_rates: Option<Vec<f64>>,
    /// Comma-separated average degrees (fig4a, fig4b).
    #[arg(long, value_delimiter = ',')]
    pub avg_degrees: Option<Vec<f64>>,
    /// Comma-separated node counts (fig4b).
    #[arg(long, value_delimiter = ',')]
    pub node_counts: Option<Vec<usize>>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

const DEFAULT_SEED: u64 = 1;
const DEFAULT_NODES: usize = 1000;
const DEFAULT_AVG_DEGREE: f64 = 6.0;
const DEFAULT_WALKERS: f64 = 400.0;
const DEFAULT_SEED_NODES: usize = 8;
const DEFAULT_RATE: f64 = 0.4;

impl GlobalArgs {
    fn graph_spec(&self) -> GraphSpec {
        GraphSpec {
            model: self.model.map_or(Model::Er, Model::from),
            node_count: self.nodes.unwrap_or(DEFAULT_NODES),
            avg_degree: self.avg_degree.unwrap_or(DEFAULT_AVG_DEGREE),
            rng_seed: graph_seed(self.seed.unwrap_or(DEFAULT_SEED), 0),
        }
    }

    fn sim_config(&self) -> SimConfig {
        let mut cfg = SimConfig::new(
            self.diffusion_rate.unwrap_or(DEFAULT_RATE),
            self.walkers.unwrap_or(DEFAULT_WALKERS),
            self.seed_nodes.unwrap_or(DEFAULT_SEED_NODES),
            sim_seed(self.seed.unwrap_or(DEFAULT_SEED), 0, 0),
        );
        if let Some(t) = self.r2_threshold {
            cfg.r2_threshold = t;
        }
        if let Some(m) = self.max_steps {
            cfg.max_steps = m;
        }
        cfg
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }
}

/// Resolves figure parameters from the profile and any overriding flags.
pub fn figure_params(global: &GlobalArgs, args: &ExperimentArgs) -> Result<FigureParams> {
    let mut p = FigureParams::defaults(args.figure, args.profile);
    if let Some(s) = global.seed {
        p.master_seed = s;
    }
    if let Some(m) = global.model {
        p.models = vec![m.into()];
    }
    if matches!(args.figure, Figure::Fig4a | Figure::Fig4b) && p.models != [Model::Er] {
        bail!("{} sweeps ER graphs only", args.figure.name());
    }
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                p.$field = v;
            }
        };
    }
    set!(node_count, global.nodes);
    set!(avg_degree, global.avg_degree);
    set!(total_walkers, global.walkers);
    set!(seed_node_count, global.seed_nodes);
    set!(diffusion_rate, global.diffusion_rate);
    set!(r2_threshold, global.r2_threshold);
    set!(max_steps, global.max_steps);
    set!(n_graphs, args.graphs);
    set!(n_sims, args.sims);
    set!(diffusion_rates, args.diffusion_rates.clone());
    set!(avg_degrees, args.avg_degrees.clone());
    set!(node_counts, args.node_counts.clone());
    Ok(p)
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let global = &cli.global;
    match &cli.command {
        Command::Generate => {
            let g = generate(&global.graph_spec())?;
            write_edge_list(&g, global.writer()?)?;
        }
        Command::Simulate { graph } => {
            let full = match graph {
                Some(path) => read_edge_list(BufReader::new(
                    File::open(path).with_context(|| format!("opening {}", path.display()))?,
                ))?,
                None => generate(&global.graph_spec())?,
            };
            let (g, _) = giant_component(&full);
            let result = run_to_saturation(&g, &global.sim_config())?;
            let mut json = SimResultJson::from(&result);
            json.node_count = Some(g.node_count());
            json.discarded_nodes = Some(full.node_count() - g.node_count());
            let mut w = global.writer()?;
            serde_json::to_writer(&mut w, &json)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Experiment(args) => {
            let params = figure_params(global, args)?;
            let out = global.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let run = with_threads(args.threads, || run_figure(&params, &out))?;
            report(&run.report.results);
            eprintln!("wrote {} files to {}", run.files.len(), out.display());
        }
        Command::Serve { port, host } => {
            let addr = SocketAddr::new(*host, *port);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("serving sessions on ws://{}/ws", listener.local_addr()?);
                crate::server::serve(listener).await
            })?;
        }
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

fn report(results: &FigureResults) {
    match results {
        FigureResults::SaturationVsRate { models } => {
            for m in models {
                for r in &m.rates {
                    eprintln!(
                        "{} p={}: median {} p05 {} p95 {} unconverged {}",
                        m.model,
                        r.diffusion_rate,
                        fmt_opt(r.median),
                        fmt_opt(r.p05),
                        fmt_opt(r.p95),
                        r.unconverged_count
                    );
                }
            }
        }
        FigureResults::Skewness { models } => {
            for m in models {
                eprintln!(
                    "{}: {}/{} graphs with skewness >= threshold (fraction {})",
                    m.model,
                    m.graphs_above_threshold,
                    m.graphs_with_skewness,
                    fmt_opt(m.fraction_above_threshold)
                );
            }
        }
        FigureResults::Sweep { points, .. } => {
            for p in points {
                eprintln!("N={} <k>={}: fraction {}", p.node_count, p.avg_degree, fmt_opt(p.fraction_above_threshold));
            }
        }
        FigureResults::HubCorrelation { models } => {
            for m in models {
                eprintln!(
                    "{}: corr(hubs, median) {} corr(hubs, skewness) {}",
                    m.model,
                    fmt_opt(m.corr_hubs_median),
                    fmt_opt(m.corr_hubs_skewness)
                );
            }
        }
    }
}
