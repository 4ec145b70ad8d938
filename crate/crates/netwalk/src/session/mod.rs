//! Interactive session state: one graph, one simulation, commands applied
//! between ticks.
//!
//! Mode transitions: `setup` and `reset` go to `idle`; `play` starts or
//! resumes (`idle`/`paused` → `running`); `pause` stops (`running` →
//! `paused`); `step` runs ticks and leaves the session `paused`; reaching the
//! threshold moves to `saturated`, which only `setup` or `reset` leave.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use netwalk_core::dynamics::Simulation;
use netwalk_core::{giant_component, generate, Graph, SimConfig};

pub mod protocol;

pub use protocol::{ClientMessage, Coloring, GraphMessage, Layout, Mode, ServerMessage, Snapshot};

/// Snapshots carry per-node masses only up to this many nodes.
pub const NODE_SIZE_LIMIT: usize = 5000;
/// Default pacing of the tick loop.
pub const DEFAULT_MS_PER_TICK: u64 = 50;
/// Largest `step` count accepted in one message.
pub const MAX_STEP_COUNT: u64 = 10_000;

/// Degree-quartile partition of the node set.
///
/// Nodes are ranked by `(degree, index)` and cut into four groups of equal
/// size (±1).
#[derive(Debug, Clone)]
pub struct Quartiles {
    of_node: Vec<u8>,
    sizes: [usize; 4],
    ranges: [Option<[usize; 2]>; 4],
    /// Rank of every node in the `(degree, index)` order.
    rank: Vec<usize>,
}

impl Quartiles {
    pub fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (g.degree(v), v));
        let mut of_node = vec![0u8; n];
        let mut rank = vec![0usize; n];
        let mut sizes = [0usize; 4];
        let mut ranges: [Option<[usize; 2]>; 4] = [None; 4];
        for (r, &v) in order.iter().enumerate() {
            let q = r * 4 / n;
            of_node[v] = q as u8;
            rank[v] = r;
            sizes[q] += 1;
            let d = g.degree(v);
            ranges[q] = Some(match ranges[q] {
                None => [d, d],
                Some([lo, hi]) => [lo.min(d), hi.max(d)],
            });
        }
        Quartiles { of_node, sizes, ranges, rank }
    }

    pub fn of_node(&self, v: usize) -> u8 {
        self.of_node[v]
    }

    pub fn ranges(&self) -> [Option<[usize; 2]>; 4] {
        self.ranges
    }

    /// Mean mass per quartile; 0 for an empty quartile.
    pub fn averages(&self, masses: &[f64]) -> [f64; 4] {
        let mut sums = [0.0; 4];
        for (v, &m) in masses.iter().enumerate() {
            sums[self.of_node[v] as usize] += m;
        }
        let mut out = [0.0; 4];
        for q in 0..4 {
            if self.sizes[q] > 0 {
                out[q] = sums[q] / self.sizes[q] as f64;
            }
        }
        out
    }
}

/// Unit-circle positions with nodes placed in ascending degree order.
pub fn circular_layout(quartiles: &Quartiles) -> Vec<[f64; 2]> {
    let n = quartiles.rank.len() as f64;
    quartiles
        .rank
        .iter()
        .map(|&r| {
            let angle = TAU * r as f64 / n;
            [angle.cos(), angle.sin()]
        })
        .collect()
}

fn node_colors(g: &Graph, quartiles: &Quartiles, coloring: Coloring) -> Vec<f64> {
    match coloring {
        Coloring::Multibin => (0..g.node_count()).map(|v| quartiles.of_node(v) as f64).collect(),
        Coloring::Single => {
            let degrees = g.degrees();
            let lo = degrees.iter().copied().min().unwrap_or(0) as f64;
            let hi = degrees.iter().copied().max().unwrap_or(0) as f64;
            degrees
                .iter()
                .map(|&d| if hi > lo { (d as f64 - lo) / (hi - lo) } else { 0.0 })
                .collect()
        }
    }
}

struct Loaded {
    base_config: SimConfig,
    sim: Simulation,
    quartiles: Quartiles,
    announced_saturation: bool,
}

/// One client's session.
pub struct Session {
    loaded: Option<Loaded>,
    mode: Mode,
    ms_per_tick: u64,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

impl Session {
    pub fn new() -> Self {
        Session { loaded: None, mode: Mode::Idle, ms_per_tick: DEFAULT_MS_PER_TICK }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ms_per_tick(&self) -> u64 {
        self.ms_per_tick
    }

    /// Current tick, if a graph is loaded.
    pub fn tick(&self) -> Option<u64> {
        self.loaded.as_ref().map(|l| l.sim.state().tick)
    }

    pub fn simulation(&self) -> Option<&Simulation> {
        self.loaded.as_ref().map(|l| &l.sim)
    }

    fn status(&self) -> ServerMessage {
        ServerMessage::Status {
            mode: self.mode,
            tick: self.tick().unwrap_or(0),
            diffusion_rate: self.loaded.as_ref().map(|l| l.sim.config().diffusion_rate),
            ms_per_tick: self.ms_per_tick,
        }
    }

    /// Applies a client command and returns the replies in send order.
    ///
    /// Errors are reported as an `error` message and leave the session as it
    /// was.
    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match self.apply(msg) {
            Ok(mut out) => {
                out.push(self.status());
                out
            }
            Err(message) => vec![ServerMessage::Error { message }],
        }
    }

    fn loaded_mut(&mut self) -> Result<&mut Loaded, String> {
        self.loaded.as_mut().ok_or_else(|| "no graph loaded; send setup first".to_string())
    }

    fn apply(&mut self, msg: ClientMessage) -> Result<Vec<ServerMessage>, String> {
        match msg {
            ClientMessage::Setup { graph_spec, sim_config, layout, coloring } => {
                let full = generate(&graph_spec).map_err(|e| e.to_string())?;
                let (graph, _) = giant_component(&full);
                let discarded_nodes = full.node_count() - graph.node_count();
                let sim = Simulation::new(graph, sim_config).map_err(|e| e.to_string())?;
                let quartiles = Quartiles::new(sim.graph());
                let g = sim.graph();
                let graph_msg = GraphMessage {
                    node_count: g.node_count(),
                    discarded_nodes,
                    edges: g.edges().map(|(u, v)| [u, v]).collect(),
                    degrees: g.degrees(),
                    layout,
                    layout_positions: (layout == Layout::Circular).then(|| circular_layout(&quartiles)),
                    coloring,
                    node_colors: node_colors(g, &quartiles, coloring),
                    node_quartiles: (0..g.node_count()).map(|v| quartiles.of_node(v)).collect(),
                    quartile_degree_ranges: quartiles.ranges(),
                };
                self.loaded = Some(Loaded { base_config: sim_config, sim, quartiles, announced_saturation: false });
                self.mode = Mode::Idle;
                Ok(vec![ServerMessage::Graph(graph_msg), ServerMessage::Snapshot(self.snapshot().unwrap())])
            }
            ClientMessage::Reset => {
                let l = self.loaded_mut()?;
                let graph = l.sim.graph().clone();
                l.sim = Simulation::new(graph, l.base_config).map_err(|e| e.to_string())?;
                l.announced_saturation = false;
                self.mode = Mode::Idle;
                Ok(vec![ServerMessage::Snapshot(self.snapshot().unwrap())])
            }
            ClientMessage::Play => {
                self.loaded_mut()?;
                match self.mode {
                    Mode::Saturated => Err("simulation already saturated; reset or setup".into()),
                    _ => {
                        self.mode = Mode::Running;
                        Ok(Vec::new())
                    }
                }
            }
            ClientMessage::Pause => {
                self.loaded_mut()?;
                if self.mode == Mode::Running {
                    self.mode = Mode::Paused;
                }
                Ok(Vec::new())
            }
            ClientMessage::Step { count } => {
                self.loaded_mut()?;
                if self.mode == Mode::Saturated {
                    return Err("simulation already saturated; reset or setup".into());
                }
                if count == 0 || count > MAX_STEP_COUNT {
                    return Err(format!("step count must be in 1..={MAX_STEP_COUNT}"));
                }
                self.mode = Mode::Paused;
                let mut out = Vec::new();
                for _ in 0..count {
                    out.extend(self.advance());
                    if self.mode == Mode::Saturated {
                        break;
                    }
                }
                Ok(out)
            }
            ClientMessage::SetRate { p } => {
                let l = self.loaded_mut()?;
                l.sim.set_diffusion_rate(p).map_err(|e| e.to_string())?;
                Ok(Vec::new())
            }
            ClientMessage::SetSpeed { ms_per_tick } => {
                if ms_per_tick == 0 || ms_per_tick > 60_000 {
                    return Err("ms_per_tick must be in 1..=60000".into());
                }
                self.ms_per_tick = ms_per_tick;
                Ok(Vec::new())
            }
        }
    }

    /// One tick of the play loop; does nothing unless running.
    pub fn on_timer(&mut self) -> Vec<ServerMessage> {
        if self.mode != Mode::Running {
            return Vec::new();
        }
        self.advance()
    }

    /// Steps once; returns the snapshot, then `saturated` on the crossing tick.
    fn advance(&mut self) -> Vec<ServerMessage> {
        let Some(l) = self.loaded.as_mut() else {
            return Vec::new();
        };
        if l.sim.state().tick >= l.sim.config().max_steps {
            self.mode = Mode::Paused;
            return vec![ServerMessage::error("max_steps reached without saturation")];
        }
        l.sim.advance();
        let mut out = vec![ServerMessage::Snapshot(self.snapshot().unwrap())];
        let l = self.loaded.as_mut().unwrap();
        if let Some(t) = l.sim.saturation_time() {
            if !l.announced_saturation {
                l.announced_saturation = true;
                self.mode = Mode::Saturated;
                out.push(ServerMessage::Saturated { saturation_time: t });
            }
        }
        out
    }

    /// Snapshot of the current state.
    pub fn snapshot(&self) -> Option<Snapshot> {
        let l = self.loaded.as_ref()?;
        let sim = &l.sim;
        let masses = &sim.state().masses;
        let meter = sim.meter();
        let avg_walkers_by_degree: BTreeMap<usize, f64> = meter
            .class_degrees()
            .iter()
            .map(|&d| d as usize)
            .zip(meter.class_averages(masses))
            .collect();
        let snap = Snapshot {
            tick: sim.state().tick,
            r2: sim.score(),
            total_walkers: sim.config().total_walkers,
            quartile_averages: l.quartiles.averages(masses),
            node_sizes: (masses.len() <= NODE_SIZE_LIMIT).then(|| masses.clone()),
            avg_walkers_by_degree,
            saturated: sim.saturation_time().is_some(),
        };
        debug_assert!(snapshot_invariants_hold(&snap), "snapshot invariants violated");
        Some(snap)
    }
}

/// Checks the snapshot invariants: node masses sum to the total (relative
/// 1e−9) and the score lies in `[0, 1]`.
pub fn snapshot_invariants_hold(s: &Snapshot) -> bool {
    let total_ok = match &s.node_sizes {
        Some(sizes) => (sizes.iter().sum::<f64>() - s.total_walkers).abs() <= 1e-9 * s.total_walkers,
        None => true,
    };
    total_ok && (0.0..=1.0).contains(&s.r2) && s.quartile_averages.iter().all(|q| *q >= 0.0)
}
