//! File formats: text edge lists for simple graphs, JSON for weighted
//! graphs and stepfunctions, CSV for matrices and grid kernels.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphons::{GraphonRepr, KernelGraphon, StepGraphon};
use crate::graphs::{SimpleGraph, WeightedGraph};
use crate::matrix::Matrix;

/// Parses the text edge-list format: first line "n m", then m lines
/// "u v" with 1-based endpoints.
pub fn parse_simple_graph(text: &str) -> Result<SimpleGraph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!(
            "header must be \"n m\", got {header:?}"
        )));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad node count {:?}", parts[0])))?;
    let m: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad edge count {:?}", parts[1])))?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {m} edge lines")))?;
        let ends: Vec<&str> = line.split_whitespace().collect();
        if ends.len() != 2 {
            return Err(Error::Parse(format!("edge line must be \"u v\", got {line:?}")));
        }
        let u: usize = ends[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex {:?}", ends[0])))?;
        let v: usize = ends[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex {:?}", ends[1])))?;
        if u == 0 || v == 0 || u > n || v > n {
            return Err(Error::Parse(format!(
                "edge ({u},{v}) out of range 1..={n}"
            )));
        }
        edges.push((u - 1, v - 1));
    }
    if let Some(extra) = lines.next() {
        return Err(Error::Parse(format!("trailing content {extra:?}")));
    }
    SimpleGraph::new(n, edges)
}

/// Canonical edge-list form: sorted edges, 1-based, newline-terminated.
pub fn serialize_simple_graph(g: &SimpleGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct WeightedGraphRaw {
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
}

pub fn parse_weighted_graph(text: &str) -> Result<WeightedGraph> {
    let raw: WeightedGraphRaw =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("weighted graph: {e}")))?;
    WeightedGraph::new(raw.alpha, Matrix::from_rows(raw.beta)?)
}

pub fn serialize_weighted_graph(g: &WeightedGraph) -> String {
    let raw = WeightedGraphRaw {
        alpha: g.alpha().to_vec(),
        beta: (0..g.n())
            .map(|i| g.beta_matrix().row(i).to_vec())
            .collect(),
    };
    serde_json::to_string(&raw).expect("serialization of plain data cannot fail")
}

/// A graph file is either an edge list or a weighted-graph JSON object.
#[derive(Clone, Debug)]
pub enum GraphFile {
    Simple(SimpleGraph),
    Weighted(WeightedGraph),
}

impl GraphFile {
    pub fn into_weighted(self) -> WeightedGraph {
        match self {
            GraphFile::Simple(g) => g.to_weighted(),
            GraphFile::Weighted(g) => g,
        }
    }

    pub fn as_simple(&self) -> Result<&SimpleGraph> {
        match self {
            GraphFile::Simple(g) => Ok(g),
            GraphFile::Weighted(_) => Err(Error::Parse(
                "expected a simple graph (edge list), got a weighted graph".into(),
            )),
        }
    }
}

pub fn parse_graph_text(text: &str) -> Result<GraphFile> {
    if text.trim_start().starts_with('{') {
        Ok(GraphFile::Weighted(parse_weighted_graph(text)?))
    } else {
        Ok(GraphFile::Simple(parse_simple_graph(text)?))
    }
}

pub fn parse_graph_file(path: &Path) -> Result<GraphFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_graph_text(&text)
}

pub fn parse_step_graphon(text: &str) -> Result<StepGraphon> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("stepfunction: {e}")))
}

pub fn serialize_step_graphon(w: &StepGraphon) -> String {
    serde_json::to_string(w).expect("serialization of plain data cannot fail")
}

/// Parses a CSV matrix: comma-separated numbers, one row per line.
pub fn parse_csv_matrix(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        rows.push(row.map_err(|e| Error::Parse(format!("csv row {}: {e}", i + 1)))?);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty csv matrix".into()));
    }
    Matrix::from_rows(rows)
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Loads a graphon argument: `constant:p`, `half-graph`, a `.json`
/// stepfunction file, or a `.csv` grid-kernel file.
pub fn load_graphon_arg(spec: &str) -> Result<GraphonRepr> {
    if let Some(p) = spec.strip_prefix("constant:") {
        let p: f64 = p
            .parse()
            .map_err(|_| Error::Parse(format!("bad constant value {p:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parse(format!("constant {p} outside [0,1]")));
        }
        return Ok(GraphonRepr::Kernel(KernelGraphon::Constant(p)));
    }
    if spec == "half-graph" || spec == "half_graph" {
        return Ok(GraphonRepr::Kernel(KernelGraphon::HalfGraphLimit));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(GraphonRepr::Step(parse_step_graphon(&text)?)),
        Some("csv") => Ok(GraphonRepr::Kernel(KernelGraphon::grid(parse_csv_matrix(
            &text,
        )?)?)),
        _ => Err(Error::Parse(format!(
            "graphon argument {spec:?} must be constant:p, half-graph, a .json \
             stepfunction, or a .csv grid"
        ))),
    }
}
