//! Edge-list graph files and `SimResult` JSON.
//!
//! Edge lists start with a `# nodes=<N>` header followed by one `u v` pair
//! per line (0-based, `u < v`). Blank lines and further `#` comments are
//! ignored when reading.

use std::io::{BufRead, Write};

use netwalk_core::{Graph, GraphError, SimResult};
use serde::{Deserialize, Serialize};

/// Errors reading an edge list.
#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("missing `# nodes=<N>` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Writes `g` in edge-list format.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nodes={}", g.node_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

/// Reads a graph in edge-list format.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph, EdgeListError> {
    let mut node_count = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let text = line.trim();
        if let Some(comment) = text.strip_prefix('#') {
            if node_count.is_none() {
                let value = comment
                    .trim()
                    .strip_prefix("nodes=")
                    .ok_or(EdgeListError::MissingHeader)?;
                node_count = Some(value.trim().parse::<usize>().map_err(|e| EdgeListError::Parse {
                    line: line_no,
                    message: format!("bad node count: {e}"),
                })?);
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        if node_count.is_none() {
            return Err(EdgeListError::MissingHeader);
        }
        let mut fields = text.split_whitespace();
        let mut next = || -> Result<usize, EdgeListError> {
            let field = fields.next().ok_or_else(|| EdgeListError::Parse {
                line: line_no,
                message: "expected two node indices".into(),
            })?;
            field.parse().map_err(|e| EdgeListError::Parse {
                line: line_no,
                message: format!("bad node index {field:?}: {e}"),
            })
        };
        let (u, v) = (next()?, next()?);
        if fields.next().is_some() {
            return Err(EdgeListError::Parse { line: line_no, message: "trailing fields".into() });
        }
        edges.push((u, v));
    }
    let n = node_count.ok_or(EdgeListError::MissingHeader)?;
    Ok(Graph::from_edges(n, edges)?)
}

/// JSON form of a [`SimResult`].
///
/// `node_count` and `discarded_nodes` describe the giant component the run
/// used; node indices in `seed_nodes` and `final_masses` refer to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResultJson {
    pub saturation_time: Option<u64>,
    pub converged: bool,
    pub seed_nodes: Vec<usize>,
    pub r2_trajectory: Vec<f64>,
    pub final_masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded_nodes: Option<usize>,
}

impl From<&SimResult> for SimResultJson {
    fn from(r: &SimResult) -> Self {
        SimResultJson {
            saturation_time: r.saturation_time,
            converged: r.converged,
            seed_nodes: r.seed_nodes.clone(),
            r2_trajectory: r.r2_trajectory.clone(),
            final_masses: r.final_state.masses.clone(),
            node_count: None,
            discarded_nodes: None,
        }
    }
}
