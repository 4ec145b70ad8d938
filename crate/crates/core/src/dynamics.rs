//! Deterministic diffusion of walker mass and saturation detection.
//!
//! Each tick every node keeps `1 − p` of its mass and sends `p · m_j / k_j`
//! to each of its `k_j` neighbors:
//!
//! ```text
//! m_i(t) = m_i(t−1) · (1 − p) + Σ_j A_ij · p · m_j(t−1) / k_j
//! ```
//!
//! Masses are real numbers and total mass is conserved. On a connected graph
//! the state converges to `w_i = n · k_i / Σ_j k_j`, so mass becomes linear in
//! degree. Saturation is the first tick where the least-squares fit of mass
//! against degree reaches the configured `R²` threshold.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::stats;

/// Errors raised by the dynamics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    /// A configuration value is out of range.
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
    /// More seed nodes requested than the graph has.
    #[error("seed_node_count {requested} exceeds node count {node_count}")]
    TooManySeedNodes {
        /// Requested seed nodes.
        requested: usize,
        /// Nodes in the graph.
        node_count: usize,
    },
    /// The graph has a node without neighbors; run on the giant component.
    #[error("node {0} has degree 0; dynamics must run on a connected graph")]
    IsolatedNode(usize),
    /// The state does not have one mass per node.
    #[error("state has {masses} masses for a graph of {nodes} nodes")]
    SizeMismatch {
        /// Length of the mass vector.
        masses: usize,
        /// Nodes in the graph.
        nodes: usize,
    },
    /// All degrees are equal, so the mass-vs-degree regression is undefined.
    #[error("all nodes have the same degree; R² is undefined")]
    RegularGraph,
}

/// Which points enter the mass-vs-degree regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegressionPopulation {
    /// One point per node: `(k_i, m_i)`.
    #[default]
    PerNode,
    /// One point per distinct degree: `(k, mean mass of nodes with degree k)`.
    DegreeAverage,
}

/// Walker mass per node at a given tick.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    /// Mass on each node, in walker units.
    pub masses: Vec<f64>,
    /// Number of steps applied since initialization.
    pub tick: u64,
}

impl WalkerState {
    /// Total mass over all nodes.
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Parameters of one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    /// Fraction `p ∈ (0, 1)` of each node's mass that moves per tick.
    pub diffusion_rate: f64,
    /// Total walker mass `n`.
    pub total_walkers: f64,
    /// Number `m` of seed nodes sharing the initial mass equally.
    pub seed_node_count: usize,
    /// Saturation threshold on `R²`.
    #[cfg_attr(feature = "serde", serde(default = "default_r2_threshold"))]
    pub r2_threshold: f64,
    /// Step cap; a run that reaches it is reported as unconverged.
    #[cfg_attr(feature = "serde", serde(default = "default_max_steps"))]
    pub max_steps: u64,
    /// Seed of the seed-node selection.
    #[cfg_attr(feature = "serde", serde(default))]
    pub rng_seed: u64,
    /// Regression points used for `R²`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub regression: RegressionPopulation,
}

#[cfg(feature = "serde")]
fn default_r2_threshold() -> f64 {
    SimConfig::DEFAULT_R2_THRESHOLD
}

#[cfg(feature = "serde")]
fn default_max_steps() -> u64 {
    SimConfig::DEFAULT_MAX_STEPS
}

impl SimConfig {
    /// Default saturation threshold.
    pub const DEFAULT_R2_THRESHOLD: f64 = 0.99;
    /// Default step cap.
    pub const DEFAULT_MAX_STEPS: u64 = 100_000;

    /// Config with the default threshold, step cap and per-node regression.
    pub fn new(diffusion_rate: f64, total_walkers: f64, seed_node_count: usize, rng_seed: u64) -> Self {
        SimConfig {
            diffusion_rate,
            total_walkers,
            seed_node_count,
            r2_threshold: Self::DEFAULT_R2_THRESHOLD,
            max_steps: Self::DEFAULT_MAX_STEPS,
            rng_seed,
            regression: RegressionPopulation::PerNode,
        }
    }

    /// Same config with a different seed-selection seed.
    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    /// Checks ranges independent of the graph.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        validate_rate(self.diffusion_rate)?;
        if !(self.total_walkers.is_finite() && self.total_walkers > 0.0) {
            return Err(DynamicsError::InvalidConfig("total_walkers must be positive"));
        }
        if self.seed_node_count == 0 {
            return Err(DynamicsError::InvalidConfig("seed_node_count must be positive"));
        }
        if !(self.r2_threshold > 0.0 && self.r2_threshold <= 1.0) {
            return Err(DynamicsError::InvalidConfig("r2_threshold must lie in (0, 1]"));
        }
        if self.max_steps == 0 {
            return Err(DynamicsError::InvalidConfig("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Checks `0 < p < 1`.
pub fn validate_rate(p: f64) -> Result<(), DynamicsError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidConfig("diffusion_rate must lie in the open interval (0, 1)"))
    }
}

/// Outcome of [`run_to_saturation`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Tick of the first threshold crossing; `None` when the cap was hit.
    pub saturation_time: Option<u64>,
    /// Whether the threshold was reached.
    pub converged: bool,
    /// Saturation score after each step (entry `t − 1` belongs to tick `t`).
    pub r2_trajectory: Vec<f64>,
    /// State at the last tick.
    pub final_state: WalkerState,
    /// Nodes that received the initial mass, ascending.
    pub seed_nodes: Vec<usize>,
}

/// Picks `seed_node_count` distinct nodes uniformly at random and splits
/// `total_walkers` equally among them.
pub fn init_state(g: &Graph, cfg: &SimConfig) -> Result<(WalkerState, Vec<usize>), DynamicsError> {
    cfg.validate()?;
    let n = g.node_count();
    if cfg.seed_node_count > n {
        return Err(DynamicsError::TooManySeedNodes { requested: cfg.seed_node_count, node_count: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut seeds = rand::seq::index::sample(&mut rng, n, cfg.seed_node_count).into_vec();
    seeds.sort_unstable();
    let share = cfg.total_walkers / cfg.seed_node_count as f64;
    let mut masses = alloc::vec![0.0; n];
    for &s in &seeds {
        masses[s] = share;
    }
    Ok((WalkerState { masses, tick: 0 }, seeds))
}

fn first_isolated(g: &Graph) -> Option<usize> {
    (0..g.node_count()).find(|&v| g.degree(v) == 0)
}

/// Applies one diffusion step and returns the new state.
///
/// `p` is not range-checked here so that boundary values can be exercised
/// directly; [`SimConfig::validate`] enforces `0 < p < 1` for simulations.
pub fn step(state: &WalkerState, g: &Graph, p: f64) -> Result<WalkerState, DynamicsError> {
    if state.masses.len() != g.node_count() {
        return Err(DynamicsError::SizeMismatch { masses: state.masses.len(), nodes: g.node_count() });
    }
    if let Some(v) = first_isolated(g) {
        return Err(DynamicsError::IsolatedNode(v));
    }
    let mut outflow = alloc::vec![0.0; g.node_count()];
    let mut next = alloc::vec![0.0; g.node_count()];
    diffuse(g, &state.masses, &mut next, &mut outflow, p);
    Ok(WalkerState { masses: next, tick: state.tick + 1 })
}

#[inline]
fn diffuse(g: &Graph, src: &[f64], dst: &mut [f64], outflow: &mut [f64], p: f64) {
    for (v, (out, &m)) in outflow.iter_mut().zip(src).enumerate() {
        *out = p * m / g.degree(v) as f64;
    }
    let keep = 1.0 - p;
    for (i, (next, &m)) in dst.iter_mut().zip(src).enumerate() {
        let inflow: f64 = g.neighbors(i).iter().map(|&j| outflow[j]).sum();
        *next = m * keep + inflow;
    }
}

/// Degree-proportional equilibrium `w_i = n · k_i / Σ_j k_j`.
pub fn stationary_prediction(g: &Graph, total_walkers: f64) -> Vec<f64> {
    let sum = g.degree_sum() as f64;
    (0..g.node_count())
        .map(|v| total_walkers * g.degree(v) as f64 / sum)
        .collect()
}

/// `R²` of the per-node least-squares fit of mass against degree.
pub fn r2_vs_degree(state: &WalkerState, g: &Graph) -> Result<f64, DynamicsError> {
    SaturationMeter::new(g, RegressionPopulation::PerNode).r2(&state.masses)
}

/// `R²` of the fit of per-degree average mass against degree.
pub fn r2_vs_degree_average(state: &WalkerState, g: &Graph) -> Result<f64, DynamicsError> {
    SaturationMeter::new(g, RegressionPopulation::DegreeAverage).r2(&state.masses)
}

/// Precomputed regression inputs for repeated `R²` evaluation on one graph.
#[derive(Debug, Clone)]
pub struct SaturationMeter {
    population: RegressionPopulation,
    node_degrees: Vec<f64>,
    /// Distinct degrees, ascending.
    class_degrees: Vec<f64>,
    /// Class index of every node.
    node_class: Vec<usize>,
    class_sizes: Vec<f64>,
    regular: bool,
}

impl SaturationMeter {
    /// Prepares the regression inputs of `g`.
    pub fn new(g: &Graph, population: RegressionPopulation) -> Self {
        let degrees = g.degrees();
        let mut distinct = degrees.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let node_class = degrees
            .iter()
            .map(|d| distinct.binary_search(d).expect("degree is present"))
            .collect::<Vec<_>>();
        let mut class_sizes = alloc::vec![0.0; distinct.len()];
        for &c in &node_class {
            class_sizes[c] += 1.0;
        }
        SaturationMeter {
            population,
            node_degrees: degrees.iter().map(|&d| d as f64).collect(),
            class_degrees: distinct.iter().map(|&d| d as f64).collect(),
            node_class,
            class_sizes,
            regular: distinct.len() < 2,
        }
    }

    /// Whether every node has the same degree.
    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// Mean mass of the nodes in each degree class, ascending by degree.
    pub fn class_averages(&self, masses: &[f64]) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.class_degrees.len()];
        for (&c, &m) in self.node_class.iter().zip(masses) {
            sums[c] += m;
        }
        sums.iter().zip(&self.class_sizes).map(|(s, n)| s / n).collect()
    }

    /// Distinct degrees, ascending; pairs with [`class_averages`](Self::class_averages).
    pub fn class_degrees(&self) -> &[f64] {
        &self.class_degrees
    }

    /// `R²` of mass against degree for the configured population.
    pub fn r2(&self, masses: &[f64]) -> Result<f64, DynamicsError> {
        if self.regular {
            return Err(DynamicsError::RegularGraph);
        }
        let fit = match self.population {
            RegressionPopulation::PerNode => stats::ols_fit(&self.node_degrees, masses),
            RegressionPopulation::DegreeAverage => {
                stats::ols_fit(&self.class_degrees, &self.class_averages(masses))
            }
        };
        Ok(fit.map(|f| f.r_squared).unwrap_or(0.0))
    }

    /// Score compared against the threshold.
    ///
    /// Equals `R²` on graphs with at least two distinct degrees. On regular
    /// graphs, where `R²` is undefined and the equilibrium is uniform, it is
    /// `1 − max_i |m_i − mean| / mean` clamped at 0, so the default threshold
    /// of 0.99 corresponds to a 1% maximum deviation from uniform.
    pub fn score(&self, masses: &[f64]) -> f64 {
        match self.r2(masses) {
            Ok(r2) => r2,
            Err(_) => {
                let mean = masses.iter().sum::<f64>() / masses.len() as f64;
                let worst = masses.iter().map(|m| (m - mean).abs()).fold(0.0, f64::max);
                (1.0 - worst / mean).max(0.0)
            }
        }
    }
}

/// A simulation advanced one tick at a time.
///
/// The diffusion rate may change between ticks; mass and tick count carry
/// over unchanged.
#[derive(Debug, Clone)]
pub struct Simulation {
    graph: Graph,
    config: SimConfig,
    state: WalkerState,
    seed_nodes: Vec<usize>,
    meter: SaturationMeter,
    outflow: Vec<f64>,
    scratch: Vec<f64>,
    trajectory: Vec<f64>,
    saturation_time: Option<u64>,
}

impl Simulation {
    /// Seeds the initial state on `graph`, which must have no isolated node.
    pub fn new(graph: Graph, config: SimConfig) -> Result<Self, DynamicsError> {
        if let Some(v) = first_isolated(&graph) {
            return Err(DynamicsError::IsolatedNode(v));
        }
        let (state, seed_nodes) = init_state(&graph, &config)?;
        let n = graph.node_count();
        Ok(Simulation {
            meter: SaturationMeter::new(&graph, config.regression),
            graph,
            config,
            state,
            seed_nodes,
            outflow: alloc::vec![0.0; n],
            scratch: alloc::vec![0.0; n],
            trajectory: Vec::new(),
            saturation_time: None,
        })
    }

    /// Current state.
    pub fn state(&self) -> &WalkerState {
        &self.state
    }

    /// Graph being simulated.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Active configuration.
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Seed nodes, ascending.
    pub fn seed_nodes(&self) -> &[usize] {
        &self.seed_nodes
    }

    /// Regression helper for this graph.
    pub fn meter(&self) -> &SaturationMeter {
        &self.meter
    }

    /// Scores recorded so far, one per step.
    pub fn trajectory(&self) -> &[f64] {
        &self.trajectory
    }

    /// Tick of the first threshold crossing, if any.
    pub fn saturation_time(&self) -> Option<u64> {
        self.saturation_time
    }

    /// Saturation score of the current state.
    pub fn score(&self) -> f64 {
        self.meter.score(&self.state.masses)
    }

    /// Changes `p` for subsequent ticks.
    pub fn set_diffusion_rate(&mut self, p: f64) -> Result<(), DynamicsError> {
        validate_rate(p)?;
        self.config.diffusion_rate = p;
        Ok(())
    }

    /// Applies one step, records its score and returns it.
    pub fn advance(&mut self) -> f64 {
        diffuse(
            &self.graph,
            &self.state.masses,
            &mut self.scratch,
            &mut self.outflow,
            self.config.diffusion_rate,
        );
        core::mem::swap(&mut self.state.masses, &mut self.scratch);
        self.state.tick += 1;
        let score = self.score();
        self.trajectory.push(score);
        if self.saturation_time.is_none() && score >= self.config.r2_threshold {
            self.saturation_time = Some(self.state.tick);
        }
        score
    }

    /// Steps until the threshold is crossed or `max_steps` is reached.
    pub fn run(mut self) -> SimResult {
        while self.saturation_time.is_none() && self.state.tick < self.config.max_steps {
            self.advance();
        }
        SimResult {
            saturation_time: self.saturation_time,
            converged: self.saturation_time.is_some(),
            r2_trajectory: self.trajectory,
            final_state: self.state,
            seed_nodes: self.seed_nodes,
        }
    }
}

/// Runs from a fresh initial state until saturation or the step cap.
///
/// Hitting `max_steps` yields `converged = false`, not an error.
pub fn run_to_saturation(g: &Graph, cfg: &SimConfig) -> Result<SimResult, DynamicsError> {
    Ok(Simulation::new(g.clone(), *cfg)?.run())
}
