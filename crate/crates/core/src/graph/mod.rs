//! The two JSON graph formats a model can emit.
//!
//! The node-map + edge-list format ([`GraphDoc`]) is the canonical in-memory
//! form. The per-node adjacency format ([`AltGraphDoc`]) lists every edge under
//! both of its endpoints and is converted to and from [`GraphDoc`] using the
//! catalog to decide edge direction.

mod alt;
mod extract;

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::catalog::CONSTANT;
use crate::diagnostic::{Diagnostic, DiagnosticCode};

pub use alt::{alt_to_proposed, parse_alt_graph, proposed_to_alt, serialize_alt_graph, AltEdge, AltGraphDoc, AltNode};
pub use extract::extract_json;

/// Port id a constant node uses in the alternative format.
pub const CONSTANT_ALT_PORT: &str = "VALUE";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("no JSON object found in model output")]
    NoJsonFound,
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at `{0}`")]
    SchemaViolation(String),
    #[error("bad node id `{0}`: must be `node_` followed by letters")]
    BadNodeId(String),
    #[error("node `{0}`: value must be set exactly when the node is a Constant")]
    ConstantValueRule(String),
    #[error("edge from `{node}` port `{port}` to `{other}` is not declared under `{other}`")]
    MissingMirrorEdge {
        node: String,
        other: String,
        port: String,
    },
    #[error("nodes `{0}` and `{1}` are connected through ports of the same direction")]
    SameDirectionConnection(String, String),
    #[error("unknown block `{name}` on node `{node}`")]
    UnknownBlock { node: String, name: String },
    #[error("node `{node}` has no port `{port}`")]
    UnknownPort { node: String, port: String },
    #[error("edge references missing node `{0}`")]
    DanglingEdgeEndpoint(String),
}

impl GraphError {
    pub fn code(&self) -> DiagnosticCode {
        match self {
            GraphError::NoJsonFound => DiagnosticCode::NoJsonFound,
            GraphError::MalformedJson(_) => DiagnosticCode::MalformedJson,
            GraphError::SchemaViolation(_) => DiagnosticCode::SchemaViolation,
            GraphError::BadNodeId(_) => DiagnosticCode::BadNodeId,
            GraphError::ConstantValueRule(_) => DiagnosticCode::ConstantValueRule,
            GraphError::MissingMirrorEdge { .. } => DiagnosticCode::MissingMirrorEdge,
            GraphError::SameDirectionConnection(..) => DiagnosticCode::SameDirectionConnection,
            GraphError::UnknownBlock { .. } => DiagnosticCode::UnknownBlock,
            GraphError::UnknownPort { .. } => DiagnosticCode::UnknownPort,
            GraphError::DanglingEdgeEndpoint(_) => DiagnosticCode::DanglingEdgeEndpoint,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let d = Diagnostic::new(self.code(), self.to_string());
        match self {
            GraphError::BadNodeId(n)
            | GraphError::ConstantValueRule(n)
            | GraphError::DanglingEdgeEndpoint(n) => d.nodes([n]),
            GraphError::MissingMirrorEdge { node, other, port } => {
                d.nodes([node, other]).ports([port])
            }
            GraphError::SameDirectionConnection(a, b) => d.nodes([a, b]),
            GraphError::UnknownBlock { node, .. } => d.nodes([node]),
            GraphError::UnknownPort { node, port } => d.nodes([node]).ports([port]),
            _ => d,
        }
    }
}

/// A literal carried by a constant node or computed at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Number(f64),
    String(String),
    Bool(bool),
}

impl Scalar {
    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Number(n) => number_json(*n),
            Scalar::String(s) => json!(s),
            Scalar::Bool(b) => json!(b),
        }
    }

    /// `None` for null; `Err` for arrays and objects.
    pub fn from_json(v: &Value) -> Result<Option<Scalar>, ()> {
        Ok(Some(match v {
            Value::Null => return Ok(None),
            Value::Bool(b) => Scalar::Bool(*b),
            Value::Number(n) => Scalar::Number(n.as_f64().ok_or(())?),
            Value::String(s) => Scalar::String(s.clone()),
            _ => return Err(()),
        }))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Number(n) => f.write_str(&format_number(*n)),
            Scalar::String(s) => f.write_str(s),
            Scalar::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Shortest decimal form that round-trips; whole numbers print without a
/// fractional part and negative zero prints as `0`.
pub fn format_number(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    if n.is_nan() {
        return "NaN".to_string();
    }
    if n.is_infinite() {
        return if n > 0.0 { "Infinity" } else { "-Infinity" }.to_string();
    }
    format!("{n}")
}

fn number_json(n: f64) -> Value {
    if n.fract() == 0.0 && n.abs() < 9_007_199_254_740_992.0 {
        json!(n as i64)
    } else {
        serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)
    }
}

/// Node ids are `node_` followed by one or more ASCII letters.
pub fn is_valid_node_id(id: &str) -> bool {
    id.strip_prefix("node_")
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_alphabetic()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEntry {
    pub name: String,
    pub value: Option<Scalar>,
}

impl NodeEntry {
    pub fn block(name: impl Into<String>) -> NodeEntry {
        NodeEntry {
            name: name.into(),
            value: None,
        }
    }

    pub fn constant(value: Scalar) -> NodeEntry {
        NodeEntry {
            name: CONSTANT.to_string(),
            value: Some(value),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.name == CONSTANT
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub out_node_id: String,
    pub out_port_id: String,
    pub in_node_id: String,
    pub in_port_id: String,
}

impl Edge {
    pub fn new(out_node: &str, out_port: &str, in_node: &str, in_port: &str) -> Edge {
        Edge {
            out_node_id: out_node.to_string(),
            out_port_id: out_port.to_string(),
            in_node_id: in_node.to_string(),
            in_port_id: in_port.to_string(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} -> {}.{}",
            self.out_node_id, self.out_port_id, self.in_node_id, self.in_port_id
        )
    }
}

/// Node map plus ordered edge list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphDoc {
    pub nodes: BTreeMap<String, NodeEntry>,
    pub edges: Vec<Edge>,
}

impl GraphDoc {
    pub fn new() -> GraphDoc {
        GraphDoc::default()
    }

    pub fn add_node(&mut self, id: &str, entry: NodeEntry) -> &mut Self {
        self.nodes.insert(id.to_string(), entry);
        self
    }

    pub fn add_edge(&mut self, out_node: &str, out_port: &str, in_node: &str, in_port: &str) -> &mut Self {
        self.edges.push(Edge::new(out_node, out_port, in_node, in_port));
        self
    }

    /// Edge multiset, sorted, for order-insensitive comparison.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut e = self.edges.clone();
        e.sort();
        e
    }

    /// Same nodes and the same edge multiset.
    pub fn is_isomorphic_to(&self, other: &GraphDoc) -> bool {
        self.nodes == other.nodes && self.sorted_edges() == other.sorted_edges()
    }
}

fn schema(path: impl Into<String>) -> GraphError {
    GraphError::SchemaViolation(path.into())
}

pub(crate) fn parse_json(text: &str) -> Result<Value, GraphError> {
    serde_json::from_str(text).map_err(|e| GraphError::MalformedJson(e.to_string()))
}

/// Parses node name and value, enforcing the id grammar and the constant rule.
pub(crate) fn parse_node_header(
    id: &str,
    obj: &Map<String, Value>,
    name_key: &str,
    path: &str,
) -> Result<NodeEntry, GraphError> {
    if !is_valid_node_id(id) {
        return Err(GraphError::BadNodeId(id.to_string()));
    }
    let name = obj
        .get(name_key)
        .and_then(Value::as_str)
        .ok_or_else(|| schema(format!("{path}.{name_key}")))?;
    let value = match obj.get("value") {
        None => None,
        Some(v) => Scalar::from_json(v).map_err(|_| schema(format!("{path}.value")))?,
    };
    if (name == CONSTANT) != value.is_some() {
        return Err(GraphError::ConstantValueRule(id.to_string()));
    }
    Ok(NodeEntry {
        name: name.to_string(),
        value,
    })
}

/// Structural parse of the node-map + edge-list format.
///
/// Checks shape, the node id grammar and the constant value rule. A constant's
/// `VALUE` out port is canonicalized to the empty string. Semantic checks are
/// left to [`crate::compiler::validate`].
pub fn parse_graph(text: &str) -> Result<GraphDoc, GraphError> {
    let root = parse_json(text)?;
    let root = root.as_object().ok_or_else(|| schema("$"))?;
    let nodes = root
        .get("nodes")
        .and_then(Value::as_object)
        .ok_or_else(|| schema("nodes"))?;
    let edges = root
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("edges"))?;

    let mut doc = GraphDoc::new();
    for (id, node) in nodes {
        let path = format!("nodes.{id}");
        let obj = node.as_object().ok_or_else(|| schema(path.clone()))?;
        let entry = parse_node_header(id, obj, "name", &path)?;
        doc.nodes.insert(id.clone(), entry);
    }
    for (i, edge) in edges.iter().enumerate() {
        let obj = edge
            .as_object()
            .ok_or_else(|| schema(format!("edges[{i}]")))?;
        let field = |key: &str| {
            obj.get(key)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| schema(format!("edges[{i}].{key}")))
        };
        let mut e = Edge {
            out_node_id: field("outNodeID")?,
            out_port_id: field("outPortID")?,
            in_node_id: field("inNodeID")?,
            in_port_id: field("inPortID")?,
        };
        let from_constant = doc
            .nodes
            .get(&e.out_node_id)
            .is_some_and(NodeEntry::is_constant);
        if from_constant && e.out_port_id == CONSTANT_ALT_PORT {
            e.out_port_id.clear();
        }
        doc.edges.push(e);
    }
    Ok(doc)
}

pub fn graph_to_value(doc: &GraphDoc) -> Value {
    let nodes: Map<String, Value> = doc
        .nodes
        .iter()
        .map(|(id, n)| {
            let value = n.value.as_ref().map_or(Value::Null, Scalar::to_json);
            (id.clone(), json!({ "name": n.name, "value": value }))
        })
        .collect();
    let edges: Vec<Value> = doc
        .edges
        .iter()
        .map(|e| {
            json!({
                "outNodeID": e.out_node_id,
                "outPortID": e.out_port_id,
                "inNodeID": e.in_node_id,
                "inPortID": e.in_port_id,
            })
        })
        .collect();
    json!({ "nodes": nodes, "edges": edges })
}

/// Canonical text: 2-space indent, nodes sorted by id, edges in stored order.
pub fn serialize_graph(doc: &GraphDoc) -> String {
    serde_json::to_string_pretty(&graph_to_value(doc)).expect("graph serializes")
}
