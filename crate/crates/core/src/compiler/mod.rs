//! Validation, ordering and lowering of graphs into sequential plans.

mod script;
mod toposort;
mod validate;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::catalog::{BlockSpec, Catalog, Category, THEN};
use crate::diagnostic::{has_errors, Diagnostic};
use crate::graph::{Edge, GraphDoc, Scalar};

pub use script::{emit_script, parse_script, ScriptSyntaxError, SCRIPT_HEADER};
pub use toposort::{toposort, CycleDetected};
pub use validate::validate;

/// A constant bound to a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBinding {
    /// Id of the constant node supplying the value.
    pub node_id: String,
    pub value: Scalar,
}

impl FieldBinding {
    /// The field value as the catalog lists it.
    pub fn text(&self) -> String {
        self.value.to_string()
    }
}

/// Value-producing subtree feeding an inPort.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant {
        node_id: String,
        value: Scalar,
    },
    Reporter {
        node_id: String,
        block: String,
        fields: Vec<(String, FieldBinding)>,
        args: Vec<(String, Expr)>,
    },
}

impl Expr {
    pub fn node_id(&self) -> &str {
        match self {
            Expr::Constant { node_id, .. } | Expr::Reporter { node_id, .. } => node_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub node_id: String,
    pub block: String,
    /// In catalog field order.
    pub fields: Vec<(String, FieldBinding)>,
    /// In catalog inPort order.
    pub args: Vec<(String, Expr)>,
    /// One sequence per SUBSTACK outPort, in catalog order. Empty for
    /// non-control blocks.
    pub substacks: Vec<Vec<Stmt>>,
}

impl Stmt {
    pub fn field(&self, id: &str) -> Option<&FieldBinding> {
        self.fields.iter().find(|(k, _)| k == id).map(|(_, v)| v)
    }

    pub fn arg(&self, id: &str) -> Option<&Expr> {
        self.args.iter().find(|(k, _)| k == id).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub trigger: Stmt,
    pub body: Vec<Stmt>,
}

impl Script {
    /// Key name for `WhenKeyPressed` triggers.
    pub fn trigger_key(&self) -> Option<String> {
        self.trigger.field("KEY").map(FieldBinding::text)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompiledPlan {
    /// Ordered by trigger node id.
    pub scripts: Vec<Script>,
    pub declared_variables: BTreeSet<String>,
    /// Nodes not reachable from any hat; sorted.
    pub orphans: Vec<String>,
}

impl CompiledPlan {
    /// Every node id the plan consumes, excluding orphans.
    pub fn node_ids(&self) -> BTreeSet<String> {
        fn expr(e: &Expr, out: &mut BTreeSet<String>) {
            out.insert(e.node_id().to_string());
            if let Expr::Reporter { fields, args, .. } = e {
                out.extend(fields.iter().map(|(_, f)| f.node_id.clone()));
                args.iter().for_each(|(_, a)| expr(a, out));
            }
        }
        fn stmt(s: &Stmt, out: &mut BTreeSet<String>) {
            out.insert(s.node_id.clone());
            out.extend(s.fields.iter().map(|(_, f)| f.node_id.clone()));
            s.args.iter().for_each(|(_, a)| expr(a, out));
            s.substacks.iter().flatten().for_each(|c| stmt(c, out));
        }
        let mut out = BTreeSet::new();
        for script in &self.scripts {
            stmt(&script.trigger, &mut out);
            script.body.iter().for_each(|s| stmt(s, &mut out));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("graph has {} error diagnostic(s); first: {}", .0.iter().filter(|d| d.is_error()).count(), .0.iter().find(|d| d.is_error()).map(ToString::to_string).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// Validates and lowers a graph. Each hat becomes one script; THEN chains
/// become statement order, SUBSTACK chains become nested bodies, and
/// reporters and constants fold into expression trees. A reporter feeding
/// two ports is copied into both.
pub fn compile(graph: &GraphDoc, catalog: &Catalog) -> Result<CompiledPlan, CompileError> {
    let diagnostics = validate(graph, catalog);
    if has_errors(&diagnostics) {
        return Err(CompileError::Invalid(diagnostics));
    }
    Lowering::new(graph, catalog).run()
}

struct Lowering<'g> {
    graph: &'g GraphDoc,
    catalog: &'g Catalog,
    /// (in node, in port) -> feeding edge
    feeds: HashMap<(&'g str, &'g str), &'g Edge>,
    /// (out node, out port) -> next statement
    next: HashMap<(&'g str, &'g str), &'g str>,
    visited: BTreeSet<&'g str>,
}

fn inconsistent(msg: impl Into<String>) -> CompileError {
    CompileError::InternalInconsistency(msg.into())
}

impl<'g> Lowering<'g> {
    fn new(graph: &'g GraphDoc, catalog: &'g Catalog) -> Self {
        let mut feeds = HashMap::new();
        let mut next = HashMap::new();
        for e in &graph.edges {
            feeds.insert((e.in_node_id.as_str(), e.in_port_id.as_str()), e);
            let exec_out = graph
                .nodes
                .get(&e.out_node_id)
                .and_then(|n| catalog.get(&n.name))
                .is_some_and(|b| b.substack_ports().any(|p| p.id == e.out_port_id) || e.out_port_id == THEN);
            if exec_out {
                next.insert((e.out_node_id.as_str(), e.out_port_id.as_str()), e.in_node_id.as_str());
            }
        }
        Lowering {
            graph,
            catalog,
            feeds,
            next,
            visited: BTreeSet::new(),
        }
    }

    fn spec(&self, id: &str) -> Result<&'g BlockSpec, CompileError> {
        let node = self
            .graph
            .nodes
            .get(id)
            .ok_or_else(|| inconsistent(format!("missing node {id}")))?;
        self.catalog
            .get(&node.name)
            .ok_or_else(|| inconsistent(format!("unknown block {}", node.name)))
    }

    fn run(mut self) -> Result<CompiledPlan, CompileError> {
        let graph = self.graph;
        let mut plan = CompiledPlan::default();
        for (id, node) in &graph.nodes {
            if self.catalog.get(&node.name).is_some_and(|b| b.category == Category::Hat) {
                let trigger = self.stmt(id)?;
                let body = self.chain(id, THEN)?;
                plan.scripts.push(Script { trigger, body });
            }
        }
        for (id, node) in &graph.nodes {
            if node.name == "SetVariable" {
                if let Some(f) = self.field(id, "VARIABLE")? {
                    plan.declared_variables.insert(f.text());
                }
            }
        }
        let used = plan.node_ids();
        plan.orphans = graph.nodes.keys().filter(|id| !used.contains(*id)).cloned().collect();
        Ok(plan)
    }

    fn chain(&mut self, from: &'g str, port: &str) -> Result<Vec<Stmt>, CompileError> {
        let mut out = Vec::new();
        let mut cursor = self.next.get(&(from, port)).copied();
        while let Some(id) = cursor {
            out.push(self.stmt(id)?);
            cursor = self.next.get(&(id, THEN)).copied();
        }
        Ok(out)
    }

    fn stmt(&mut self, id: &'g str) -> Result<Stmt, CompileError> {
        if !self.visited.insert(id) {
            return Err(inconsistent(format!("statement {id} reached twice")));
        }
        let spec = self.spec(id)?;
        if spec.category == Category::Reporter {
            return Err(inconsistent(format!("reporter {id} used as a statement")));
        }
        let (fields, args) = self.inputs(id, spec)?;
        let mut substacks = Vec::new();
        for port in spec.substack_ports() {
            substacks.push(self.chain(id, &port.id)?);
        }
        Ok(Stmt {
            node_id: id.to_string(),
            block: spec.name.clone(),
            fields,
            args,
            substacks,
        })
    }

    #[allow(clippy::type_complexity)]
    fn inputs(
        &mut self,
        id: &'g str,
        spec: &'g BlockSpec,
    ) -> Result<(Vec<(String, FieldBinding)>, Vec<(String, Expr)>), CompileError> {
        let mut fields = Vec::new();
        for f in &spec.fields {
            let binding = self
                .field(id, &f.id)?
                .ok_or_else(|| inconsistent(format!("field {} of {id} unbound", f.id)))?;
            fields.push((f.id.clone(), binding));
        }
        let mut args = Vec::new();
        for p in spec.value_inputs() {
            let edge = self
                .feeds
                .get(&(id, p.id.as_str()))
                .copied()
                .ok_or_else(|| inconsistent(format!("inPort {} of {id} unwired", p.id)))?;
            args.push((p.id.clone(), self.expr(&edge.out_node_id)?));
        }
        Ok((fields, args))
    }

    fn field(&self, id: &str, field: &str) -> Result<Option<FieldBinding>, CompileError> {
        let Some(edge) = self.feeds.get(&(id, field)) else {
            return Ok(None);
        };
        let node = &self.graph.nodes[&edge.out_node_id];
        match &node.value {
            Some(value) if node.is_constant() => Ok(Some(FieldBinding {
                node_id: edge.out_node_id.clone(),
                value: value.clone(),
            })),
            _ => Err(inconsistent(format!("field {field} of {id} is not fed by a constant"))),
        }
    }

    /// Terminates because validation rejected cycles.
    fn expr(&mut self, id: &'g str) -> Result<Expr, CompileError> {
        let node = &self.graph.nodes[id];
        if node.is_constant() {
            let value = node
                .value
                .clone()
                .ok_or_else(|| inconsistent(format!("constant {id} has no value")))?;
            return Ok(Expr::Constant {
                node_id: id.to_string(),
                value,
            });
        }
        let spec = self.spec(id)?;
        if spec.category != Category::Reporter {
            return Err(inconsistent(format!("{id} ({}) used as a value", spec.name)));
        }
        let (fields, args) = self.inputs(id, spec)?;
        Ok(Expr::Reporter {
            node_id: id.to_string(),
            block: spec.name.clone(),
            fields,
            args,
        })
    }
}
