//! Per-node adjacency format, where each edge is declared under both
//! endpoints.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{parse_json, parse_node_header, schema, GraphDoc, GraphError, NodeEntry, Scalar, CONSTANT_ALT_PORT};
use crate::catalog::{Catalog, PortRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AltEdge {
    pub port_id: String,
    pub other_node_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltNode {
    pub node_name: String,
    pub value: Option<Scalar>,
    pub edges: Vec<AltEdge>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AltGraphDoc {
    pub nodes: BTreeMap<String, AltNode>,
}

impl AltGraphDoc {
    /// Total number of edge entries across all nodes.
    pub fn edge_entry_count(&self) -> usize {
        self.nodes.values().map(|n| n.edges.len()).sum()
    }
}

/// Structural parse plus the mirror rule: for every pair of nodes, the number
/// of entries each lists toward the other must agree.
pub fn parse_alt_graph(text: &str) -> Result<AltGraphDoc, GraphError> {
    let root = parse_json(text)?;
    let root = root.as_object().ok_or_else(|| schema("$"))?;
    let mut doc = AltGraphDoc::default();
    for (id, node) in root {
        let obj = node.as_object().ok_or_else(|| schema(id.clone()))?;
        let header = parse_node_header(id, obj, "nodeName", id)?;
        let edges = match obj.get("edges") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let path = format!("{id}.edges[{i}]");
                    let o = e.as_object().ok_or_else(|| schema(path.clone()))?;
                    let field = |key: &str| {
                        o.get(key)
                            .and_then(Value::as_str)
                            .map(str::to_string)
                            .ok_or_else(|| schema(format!("{path}.{key}")))
                    };
                    Ok(AltEdge {
                        port_id: field("portID")?,
                        other_node_id: field("otherNodeID")?,
                    })
                })
                .collect::<Result<_, GraphError>>()?,
            Some(_) => return Err(schema(format!("{id}.edges"))),
        };
        doc.nodes.insert(
            id.clone(),
            AltNode {
                node_name: header.name,
                value: header.value,
                edges,
            },
        );
    }
    check_mirrors(&doc)?;
    Ok(doc)
}

fn check_mirrors(doc: &AltGraphDoc) -> Result<(), GraphError> {
    for (id, node) in &doc.nodes {
        for e in &node.edges {
            let toward = |from: &AltNode, to: &str| {
                from.edges.iter().filter(|x| x.other_node_id == to).count()
            };
            let missing = || GraphError::MissingMirrorEdge {
                node: id.clone(),
                other: e.other_node_id.clone(),
                port: e.port_id.clone(),
            };
            let Some(other) = doc.nodes.get(&e.other_node_id) else {
                return Err(missing());
            };
            let mine = toward(node, &e.other_node_id);
            if e.other_node_id == *id {
                if mine % 2 != 0 {
                    return Err(missing());
                }
            } else if mine > toward(other, id) {
                return Err(missing());
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Out,
    In,
}

fn port_side(
    catalog: &Catalog,
    node_id: &str,
    entry: &NodeEntry,
    port: &str,
) -> Result<Side, GraphError> {
    let unknown_port = || GraphError::UnknownPort {
        node: node_id.to_string(),
        port: port.to_string(),
    };
    if entry.is_constant() {
        return if port.is_empty() || port == CONSTANT_ALT_PORT {
            Ok(Side::Out)
        } else {
            Err(unknown_port())
        };
    }
    let block = catalog.get(&entry.name).ok_or_else(|| GraphError::UnknownBlock {
        node: node_id.to_string(),
        name: entry.name.clone(),
    })?;
    match block.resolve_port(port) {
        Some(PortRef::Out(_)) => Ok(Side::Out),
        Some(PortRef::In(_) | PortRef::Field(_)) => Ok(Side::In),
        None => Err(unknown_port()),
    }
}

/// Collapses each mirrored pair of entries into one directed edge.
///
/// For every pair of nodes, the outPorts one lists toward the other are
/// matched in order with the inPorts the other lists back.
pub fn alt_to_proposed(alt: &AltGraphDoc, catalog: &Catalog) -> Result<GraphDoc, GraphError> {
    let mut doc = GraphDoc::new();
    for (id, node) in &alt.nodes {
        doc.nodes.insert(
            id.clone(),
            NodeEntry {
                name: node.node_name.clone(),
                value: node.value.clone(),
            },
        );
    }
    for (id, node) in &doc.nodes {
        if !node.is_constant() && catalog.get(&node.name).is_none() {
            return Err(GraphError::UnknownBlock {
                node: id.clone(),
                name: node.name.clone(),
            });
        }
    }

    // (lower id, higher id) -> ports each side lists toward the other
    let mut pairs: BTreeMap<(&str, &str), (Vec<&str>, Vec<&str>)> = BTreeMap::new();
    for (id, node) in &alt.nodes {
        for e in &node.edges {
            let other = e.other_node_id.as_str();
            if !alt.nodes.contains_key(other) {
                return Err(GraphError::DanglingEdgeEndpoint(other.to_string()));
            }
            let key = if id.as_str() <= other {
                (id.as_str(), other)
            } else {
                (other, id.as_str())
            };
            let slot = pairs.entry(key).or_default();
            if id.as_str() == key.0 {
                slot.0.push(&e.port_id);
            } else {
                slot.1.push(&e.port_id);
            }
        }
    }

    for ((a, b), (ports_a, ports_b)) in pairs {
        let entry_a = &doc.nodes[a];
        let entry_b = &doc.nodes[b];
        let split = |node_id: &str, entry: &NodeEntry, ports: &[&str]| -> Result<(Vec<String>, Vec<String>), GraphError> {
            let mut outs = Vec::new();
            let mut ins = Vec::new();
            for p in ports {
                match port_side(catalog, node_id, entry, p)? {
                    Side::Out => outs.push(canonical_out_port(entry, p)),
                    Side::In => ins.push(p.to_string()),
                }
            }
            Ok((outs, ins))
        };
        let same_direction = || GraphError::SameDirectionConnection(a.to_string(), b.to_string());
        if a == b {
            let (outs, ins) = split(a, entry_a, &ports_a)?;
            if outs.len() != ins.len() {
                return Err(same_direction());
            }
            for (o, i) in outs.iter().zip(&ins) {
                doc.add_edge(a, o, a, i);
            }
            continue;
        }
        let (a_out, a_in) = split(a, entry_a, &ports_a)?;
        let (b_out, b_in) = split(b, entry_b, &ports_b)?;
        if a_out.len() != b_in.len() || a_in.len() != b_out.len() {
            return Err(same_direction());
        }
        for (o, i) in a_out.iter().zip(&b_in) {
            doc.add_edge(a, o, b, i);
        }
        for (o, i) in b_out.iter().zip(&a_in) {
            doc.add_edge(b, o, a, i);
        }
    }
    Ok(doc)
}

fn canonical_out_port(entry: &NodeEntry, port: &str) -> String {
    if entry.is_constant() {
        String::new()
    } else {
        port.to_string()
    }
}

/// Lists every edge under both endpoints. Edge directions are checked against
/// the catalog so that [`alt_to_proposed`] can restore them.
pub fn proposed_to_alt(doc: &GraphDoc, catalog: &Catalog) -> Result<AltGraphDoc, GraphError> {
    let mut alt = AltGraphDoc::default();
    for (id, n) in &doc.nodes {
        alt.nodes.insert(
            id.clone(),
            AltNode {
                node_name: n.name.clone(),
                value: n.value.clone(),
                edges: Vec::new(),
            },
        );
    }
    for e in &doc.edges {
        let out_entry = doc
            .nodes
            .get(&e.out_node_id)
            .ok_or_else(|| GraphError::DanglingEdgeEndpoint(e.out_node_id.clone()))?;
        let in_entry = doc
            .nodes
            .get(&e.in_node_id)
            .ok_or_else(|| GraphError::DanglingEdgeEndpoint(e.in_node_id.clone()))?;
        let out_side = port_side(catalog, &e.out_node_id, out_entry, &e.out_port_id)?;
        let in_side = port_side(catalog, &e.in_node_id, in_entry, &e.in_port_id)?;
        if out_side != Side::Out || in_side != Side::In {
            return Err(GraphError::SameDirectionConnection(
                e.out_node_id.clone(),
                e.in_node_id.clone(),
            ));
        }
        let out_port = if out_entry.is_constant() {
            CONSTANT_ALT_PORT.to_string()
        } else {
            e.out_port_id.clone()
        };
        alt.nodes
            .get_mut(&e.out_node_id)
            .expect("checked above")
            .edges
            .push(AltEdge {
                port_id: out_port,
                other_node_id: e.in_node_id.clone(),
            });
        alt.nodes
            .get_mut(&e.in_node_id)
            .expect("checked above")
            .edges
            .push(AltEdge {
                port_id: e.in_port_id.clone(),
                other_node_id: e.out_node_id.clone(),
            });
    }
    Ok(alt)
}

pub fn serialize_alt_graph(alt: &AltGraphDoc) -> String {
    let root: Map<String, Value> = alt
        .nodes
        .iter()
        .map(|(id, n)| {
            let edges: Vec<Value> = n
                .edges
                .iter()
                .map(|e| json!({ "portID": e.port_id, "otherNodeID": e.other_node_id }))
                .collect();
            let value = n.value.as_ref().map_or(Value::Null, Scalar::to_json);
            (
                id.clone(),
                json!({ "nodeName": n.node_name, "value": value, "edges": edges }),
            )
        })
        .collect();
    serde_json::to_string_pretty(&Value::Object(root)).expect("alt graph serializes")
}
