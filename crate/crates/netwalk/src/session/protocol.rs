//! Session protocol v1: JSON text messages tagged by `type`, each carrying
//! `"v": 1`.

use std::collections::BTreeMap;

use netwalk_core::{GraphSpec, SimConfig};
use serde::{Deserialize, Serialize};

/// Protocol version carried in every message.
pub const PROTOCOL_VERSION: u32 = 1;

/// Node placement requested at setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Ring ordered by ascending degree; positions computed by the server.
    #[default]
    Circular,
    /// Force-directed; positions computed by the client.
    Force,
}

/// Node coloring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coloring {
    /// One gradient from lowest to highest degree.
    Single,
    /// One color per degree quartile.
    #[default]
    Multibin,
}

/// Client → server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Setup {
        graph_spec: GraphSpec,
        sim_config: SimConfig,
        #[serde(default)]
        layout: Layout,
        #[serde(default)]
        coloring: Coloring,
    },
    Play,
    Pause,
    Step {
        #[serde(default = "one")]
        count: u64,
    },
    SetRate {
        p: f64,
    },
    SetSpeed {
        ms_per_tick: u64,
    },
    Reset,
}

fn one() -> u64 {
    1
}

/// Session mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Idle,
    Running,
    Paused,
    Saturated,
}

/// Per-tick state for the live plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    /// Saturation score (`R²` of mass against degree, per node).
    pub r2: f64,
    pub total_walkers: f64,
    /// Mean mass per node in degree quartiles Q1..Q4.
    pub quartile_averages: [f64; 4],
    /// Mass per node; omitted above [`NODE_SIZE_LIMIT`](super::NODE_SIZE_LIMIT) nodes.
    pub node_sizes: Option<Vec<f64>>,
    /// Mean mass of the nodes of each degree (keys are degrees).
    #[serde(with = "degree_keys")]
    pub avg_walkers_by_degree: BTreeMap<usize, f64>,
    pub saturated: bool,
}

/// Graph description sent after setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMessage {
    pub node_count: usize,
    /// Nodes dropped outside the giant component before simulation.
    pub discarded_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    pub degrees: Vec<usize>,
    pub layout: Layout,
    /// `[x, y]` on the unit circle for the circular layout; `None` for force.
    pub layout_positions: Option<Vec<[f64; 2]>>,
    pub coloring: Coloring,
    /// Per node: degree quartile `0..=3` (multibin) or normalized degree in
    /// `[0, 1]` (single).
    pub node_colors: Vec<f64>,
    /// Degree quartile of every node, `0..=3`.
    pub node_quartiles: Vec<u8>,
    /// `[min, max]` degree per quartile; `None` for an empty quartile.
    pub quartile_degree_ranges: [Option<[usize; 2]>; 4],
}

/// Server → client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Graph(GraphMessage),
    Snapshot(Snapshot),
    Saturated {
        saturation_time: u64,
    },
    /// Session status after every accepted command.
    Status {
        mode: Mode,
        tick: u64,
        diffusion_rate: Option<f64>,
        ms_per_tick: u64,
    },
    Error {
        message: String,
    },
}

/// JSON object keys are strings; tagged enums buffer them as strings, so
/// degree keys are parsed explicitly.
mod degree_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, f64>, s: S) -> Result<S::Ok, S::Error> {
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Serialize)]
struct OutEnvelope<'a> {
    v: u32,
    #[serde(flatten)]
    msg: &'a ServerMessage,
}

#[derive(Deserialize)]
struct InEnvelope {
    #[serde(default = "version")]
    v: u32,
    #[serde(flatten)]
    msg: ClientMessage,
}

#[derive(Deserialize)]
struct InServerEnvelope {
    v: u32,
    #[serde(flatten)]
    msg: ServerMessage,
}

fn version() -> u32 {
    PROTOCOL_VERSION
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error { message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OutEnvelope { v: PROTOCOL_VERSION, msg: self }).expect("server messages serialize")
    }

    /// Parses a server message, checking the version.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let env: InServerEnvelope = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if env.v != PROTOCOL_VERSION {
            return Err(format!("unsupported protocol version {}", env.v));
        }
        Ok(env.msg)
    }
}

impl ClientMessage {
    /// Parses a client message; a missing `v` is read as version 1.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let env: InEnvelope = serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))?;
        if env.v != PROTOCOL_VERSION {
            return Err(format!("unsupported protocol version {}", env.v));
        }
        Ok(env.msg)
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("client messages serialize");
        value["v"] = PROTOCOL_VERSION.into();
        value.to_string()
    }
}
