use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::toposort::toposort;
use crate::catalog::{BlockSpec, Catalog, Category, FieldSpec, PortRef, ValueType};
use crate::diagnostic::{Diagnostic, DiagnosticCode as Code};
use crate::graph::{Edge, GraphDoc, NodeEntry, Scalar, CONSTANT_ALT_PORT};

/// What feeds an edge.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Source<'a> {
    Constant(&'a Scalar),
    Port(ValueType),
}

/// What an edge feeds.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Target<'a> {
    Port(ValueType),
    Field(&'a FieldSpec),
}

enum Resolved<T> {
    Ok(T),
    WrongDirection,
    Unknown,
    /// Node's block is unknown; already reported.
    Skip,
}

fn resolve_source<'a>(catalog: &'a Catalog, node: &'a NodeEntry, port: &str) -> Resolved<Source<'a>> {
    if node.is_constant() {
        return match (port, &node.value) {
            ("" | CONSTANT_ALT_PORT, Some(v)) => Resolved::Ok(Source::Constant(v)),
            _ => Resolved::Unknown,
        };
    }
    let Some(block) = catalog.get(&node.name) else {
        return Resolved::Skip;
    };
    match block.resolve_port(port) {
        Some(PortRef::Out(p)) => Resolved::Ok(Source::Port(p.value_type)),
        Some(_) => Resolved::WrongDirection,
        None => Resolved::Unknown,
    }
}

fn resolve_target<'a>(catalog: &'a Catalog, node: &'a NodeEntry, port: &str) -> Resolved<Target<'a>> {
    if node.is_constant() {
        return if port.is_empty() || port == CONSTANT_ALT_PORT {
            Resolved::WrongDirection
        } else {
            Resolved::Unknown
        };
    }
    let Some(block) = catalog.get(&node.name) else {
        return Resolved::Skip;
    };
    match block.resolve_port(port) {
        Some(PortRef::In(p)) => Resolved::Ok(Target::Port(p.value_type)),
        Some(PortRef::Field(f)) => Resolved::Ok(Target::Field(f)),
        Some(PortRef::Out(_)) => Resolved::WrongDirection,
        None => Resolved::Unknown,
    }
}

fn constant_type(v: &Scalar) -> ValueType {
    match v {
        Scalar::Number(_) => ValueType::Number,
        Scalar::String(_) => ValueType::String,
        Scalar::Bool(_) => ValueType::Boolean,
    }
}

/// Port-type compatibility. Constants must match exactly; reporter outputs
/// follow the looser rules of the interpreter's coercions.
pub(crate) fn compatible(source: Source<'_>, target: ValueType) -> bool {
    use ValueType::*;
    match source {
        Source::Constant(v) => target == Any || constant_type(v) == target,
        Source::Port(Exec) => target == Exec,
        Source::Port(from) => match target {
            Exec => false,
            Any => true,
            Boolean => matches!(from, Boolean | Any),
            Number => matches!(from, Number | String | Any),
            String => true,
        },
    }
}

/// Value a field is bound to, when it is fed by a constant.
pub(crate) fn field_binding(graph: &GraphDoc, node_id: &str, field_id: &str) -> Option<String> {
    graph
        .edges
        .iter()
        .find(|e| e.in_node_id == node_id && e.in_port_id == field_id)
        .and_then(|e| graph.nodes.get(&e.out_node_id))
        .and_then(|n| n.is_constant().then(|| n.value.as_ref()).flatten())
        .map(Scalar::to_string)
}

fn describe(e: &Edge) -> String {
    format!("edge {e}")
}

/// Checks a parsed graph against the catalog and returns every finding.
/// An empty list, or one containing only warnings, means the graph compiles.
pub fn validate(graph: &GraphDoc, catalog: &Catalog) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let block_of = |id: &str| -> Option<&BlockSpec> {
        graph.nodes.get(id).and_then(|n| catalog.get(&n.name))
    };

    for (id, node) in &graph.nodes {
        if !node.is_constant() && catalog.get(&node.name).is_none() {
            out.push(
                Diagnostic::new(Code::UnknownBlock, format!("node {id} uses unknown block `{}`", node.name))
                    .nodes([id]),
            );
        }
    }

    // Edges whose direction checks out, keyed by index into graph.edges.
    let mut wired: Vec<usize> = Vec::new();
    // Edges already rejected as malformed; the cycle check ignores them.
    let mut malformed: BTreeSet<usize> = BTreeSet::new();
    for (i, e) in graph.edges.iter().enumerate() {
        let (Some(out_node), Some(in_node)) =
            (graph.nodes.get(&e.out_node_id), graph.nodes.get(&e.in_node_id))
        else {
            let missing: Vec<&String> = [&e.out_node_id, &e.in_node_id]
                .into_iter()
                .filter(|id| !graph.nodes.contains_key(*id))
                .collect();
            out.push(
                Diagnostic::new(Code::DanglingEdgeEndpoint, format!("{} references a missing node", describe(e)))
                    .nodes(missing),
            );
            malformed.insert(i);
            continue;
        };
        let source = resolve_source(catalog, out_node, &e.out_port_id);
        let target = resolve_target(catalog, in_node, &e.in_port_id);
        if matches!(source, Resolved::WrongDirection) || matches!(target, Resolved::WrongDirection) {
            out.push(
                Diagnostic::new(
                    Code::SameDirectionConnection,
                    format!("{} does not connect an outPort to an inPort", describe(e)),
                )
                .nodes([&e.out_node_id, &e.in_node_id])
                .ports([&e.out_port_id, &e.in_port_id]),
            );
            malformed.insert(i);
            continue;
        }
        if matches!(source, Resolved::Unknown) || matches!(target, Resolved::Unknown) {
            malformed.insert(i);
        }
        if matches!(source, Resolved::Unknown) {
            out.push(
                Diagnostic::new(
                    Code::UnknownPort,
                    format!("node {} has no outPort `{}`", e.out_node_id, e.out_port_id),
                )
                .nodes([&e.out_node_id])
                .ports([&e.out_port_id]),
            );
        }
        if matches!(target, Resolved::Unknown) {
            out.push(
                Diagnostic::new(
                    Code::UnknownPort,
                    format!("node {} has no inPort or field `{}`", e.in_node_id, e.in_port_id),
                )
                .nodes([&e.in_node_id])
                .ports([&e.in_port_id]),
            );
        }
        let (Resolved::Ok(source), Resolved::Ok(target)) = (source, target) else {
            continue;
        };
        wired.push(i);
        match target {
            Target::Port(expected) => {
                if !compatible(source, expected) {
                    let actual = match source {
                        Source::Constant(v) => constant_type(v),
                        Source::Port(t) => t,
                    };
                    out.push(
                        Diagnostic::new(
                            Code::TypeMismatch,
                            format!("{}: expected {expected}, got {actual}", describe(e)),
                        )
                        .nodes([&e.out_node_id, &e.in_node_id])
                        .ports([&e.out_port_id, &e.in_port_id]),
                    );
                }
            }
            Target::Field(field) => {
                let problem = match source {
                    Source::Constant(v) if field.accepts(&v.to_string()) => None,
                    Source::Constant(v) => Some(format!("`{v}` is not an allowed value")),
                    Source::Port(_) => Some("fields only accept constants".to_string()),
                };
                if let Some(problem) = problem {
                    out.push(
                        Diagnostic::new(
                            Code::BadFieldValue,
                            format!("field {} of node {}: {problem}", field.id, e.in_node_id),
                        )
                        .nodes([&e.in_node_id])
                        .ports([&e.in_port_id]),
                    );
                }
            }
        }
    }

    let mut into: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut exec_from: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for &i in &wired {
        let e = &graph.edges[i];
        *into.entry((&e.in_node_id, &e.in_port_id)).or_default() += 1;
        let is_exec_out = block_of(&e.out_node_id)
            .and_then(|b| b.out_port(&e.out_port_id))
            .is_some_and(|p| p.value_type == ValueType::Exec);
        if is_exec_out {
            *exec_from.entry((&e.out_node_id, &e.out_port_id)).or_default() += 1;
        }
    }
    for ((node, port), n) in &into {
        if *n > 1 {
            out.push(
                Diagnostic::new(
                    Code::DuplicateInputEdge,
                    format!("inPort {port} of node {node} has {n} incoming edges"),
                )
                .nodes([*node])
                .ports([*port]),
            );
        }
    }
    for ((node, port), n) in &exec_from {
        if *n > 1 {
            out.push(
                Diagnostic::new(
                    Code::DuplicateInputEdge,
                    format!("outPort {port} of node {node} starts {n} blocks; execution cannot branch"),
                )
                .nodes([*node])
                .ports([*port]),
            );
        }
    }

    for (id, node) in &graph.nodes {
        let Some(block) = catalog.get(&node.name) else {
            continue;
        };
        let required = block
            .value_inputs()
            .map(|p| p.id.as_str())
            .chain(block.fields.iter().map(|f| f.id.as_str()));
        for port in required {
            if !into.contains_key(&(id.as_str(), port)) {
                out.push(
                    Diagnostic::new(
                        Code::MissingRequiredInput,
                        format!("node {id} ({}) has nothing wired to {port}", block.name),
                    )
                    .nodes([id])
                    .ports([port]),
                );
            }
        }
    }

    let variable_of = |id: &str| field_binding(graph, id, "VARIABLE");
    let declared: BTreeSet<String> = graph
        .nodes
        .iter()
        .filter(|(_, n)| n.name == "SetVariable")
        .filter_map(|(id, _)| variable_of(id))
        .collect();
    for (id, node) in &graph.nodes {
        if !matches!(node.name.as_str(), "GetVariable" | "ChangeVariableBy") {
            continue;
        }
        if let Some(var) = variable_of(id) {
            if !declared.contains(&var) {
                out.push(
                    Diagnostic::new(
                        Code::UndeclaredVariable,
                        format!("node {id} uses variable `{var}`, which no SetVariable declares"),
                    )
                    .nodes([id]),
                );
            }
        }
    }

    let hats: Vec<&String> = graph
        .nodes
        .keys()
        .filter(|id| block_of(id).is_some_and(|b| b.category == Category::Hat))
        .collect();
    if hats.is_empty() {
        out.push(Diagnostic::new(
            Code::NoHatBlock,
            "graph has no WhenFlagClicked or WhenKeyPressed node",
        ));
    }

    let sortable = if malformed.is_empty() {
        std::borrow::Cow::Borrowed(graph)
    } else {
        let mut g = graph.clone();
        g.edges = graph
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !malformed.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        std::borrow::Cow::Owned(g)
    };
    match toposort(&sortable) {
        Err(cycle) => out.push(Diagnostic::new(Code::CycleDetected, cycle.to_string()).nodes(cycle.0)),
        Ok(_) => {
            let reached = reachable(graph, catalog, &hats, &wired);
            for id in graph.nodes.keys() {
                if !reached.contains(id.as_str()) {
                    out.push(
                        Diagnostic::new(
                            Code::Orphan,
                            format!("node {id} is not reachable from any hat block and is ignored"),
                        )
                        .nodes([id]),
                    );
                }
            }
        }
    }
    out
}

/// Nodes used by some script: statements reached through exec edges from a
/// hat, plus every node feeding their inputs.
fn reachable<'g>(
    graph: &'g GraphDoc,
    catalog: &Catalog,
    hats: &[&'g String],
    wired: &[usize],
) -> BTreeSet<&'g str> {
    let mut by_target: HashMap<&str, Vec<&Edge>> = HashMap::new();
    let mut by_source: HashMap<&str, Vec<&Edge>> = HashMap::new();
    for &i in wired {
        let e = &graph.edges[i];
        by_target.entry(&e.in_node_id).or_default().push(e);
        by_source.entry(&e.out_node_id).or_default().push(e);
    }
    let is_exec_out = |e: &Edge| {
        graph
            .nodes
            .get(&e.out_node_id)
            .and_then(|n| catalog.get(&n.name))
            .and_then(|b| b.out_port(&e.out_port_id))
            .is_some_and(|p| p.value_type == ValueType::Exec)
    };
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = hats.iter().map(|h| h.as_str()).collect();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        for e in by_source.get(id).into_iter().flatten() {
            if is_exec_out(e) {
                stack.push(&e.in_node_id);
            }
        }
        for e in by_target.get(id).into_iter().flatten() {
            if !is_exec_out(e) {
                stack.push(&e.out_node_id);
            }
        }
    }
    seen
}
