//! Line-oriented text form of a [`CompiledPlan`].
//!
//! ```text
//! # graphblocks plan v1
//! var "score"
//! node_ten = 10
//! node_flag = WhenFlagClicked()
//! node_move = MoveSteps(STEPS=node_ten)
//! node_flag.THEN -> node_move
//! orphan node_unused
//! ```
//!
//! Declarations bind a node id to a literal or to a block call. Block calls
//! take `PORT=node_id` arguments, with field arguments prefixed by `@`.
//! Every argument is a reference to another declaration, so each node id is
//! declared exactly once and referenced wherever it is used. Wire lines
//! give statement order (`THEN`) and control bodies (`SUBSTACK`,
//! `SUBSTACK2`). Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::{CompiledPlan, Expr, FieldBinding, Script, Stmt};
use crate::catalog::{BlockSpec, Catalog, Category, SUBSTACK, THEN};
use crate::graph::{format_number, Scalar};

pub const SCRIPT_HEADER: &str = "# graphblocks plan v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScriptSyntaxError {
    pub line: usize,
    pub message: String,
}

fn substack_port(index: usize) -> String {
    match index {
        0 => SUBSTACK.to_string(),
        n => format!("{SUBSTACK}{}", n + 1),
    }
}

fn literal(value: &Scalar) -> String {
    match value {
        Scalar::Number(n) => format_number(*n),
        Scalar::String(s) => serde_json::to_string(s).expect("string serializes"),
        Scalar::Bool(b) => b.to_string(),
    }
}

#[derive(Default)]
struct Emitter {
    declared: BTreeSet<String>,
    decls: String,
    wires: String,
}

impl Emitter {
    fn declare(&mut self, id: &str, rhs: String) {
        if self.declared.insert(id.to_string()) {
            let _ = writeln!(self.decls, "{id} = {rhs}");
        }
    }

    fn binding(&mut self, f: &FieldBinding) {
        self.declare(&f.node_id, literal(&f.value));
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Constant { node_id, value } => self.declare(node_id, literal(value)),
            Expr::Reporter {
                node_id,
                block,
                fields,
                args,
            } => {
                fields.iter().for_each(|(_, f)| self.binding(f));
                args.iter().for_each(|(_, a)| self.expr(a));
                self.declare(node_id, call(block, fields, args));
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        s.fields.iter().for_each(|(_, f)| self.binding(f));
        s.args.iter().for_each(|(_, a)| self.expr(a));
        self.declare(&s.node_id, call(&s.block, &s.fields, &s.args));
        for (i, body) in s.substacks.iter().enumerate() {
            self.chain(&s.node_id, &substack_port(i), body);
        }
    }

    fn chain(&mut self, from: &str, port: &str, body: &[Stmt]) {
        let mut prev = (from.to_string(), port.to_string());
        for s in body {
            let _ = writeln!(self.wires, "{}.{} -> {}", prev.0, prev.1, s.node_id);
            self.stmt(s);
            prev = (s.node_id.clone(), THEN.to_string());
        }
    }
}

fn call(block: &str, fields: &[(String, FieldBinding)], args: &[(String, Expr)]) -> String {
    let parts: Vec<String> = fields
        .iter()
        .map(|(k, f)| format!("@{k}={}", f.node_id))
        .chain(args.iter().map(|(k, e)| format!("{k}={}", e.node_id())))
        .collect();
    format!("{block}({})", parts.join(", "))
}

/// Renders a plan. Declarations come in dependency order: values before the
/// blocks that use them, each statement before its successors.
pub fn emit_script(plan: &CompiledPlan) -> String {
    let mut em = Emitter::default();
    for script in &plan.scripts {
        em.stmt(&script.trigger);
        em.chain(&script.trigger.node_id, THEN, &script.body);
    }
    let mut out = format!("{SCRIPT_HEADER}\n");
    for v in &plan.declared_variables {
        let _ = writeln!(out, "var {}", serde_json::to_string(v).expect("string serializes"));
    }
    for section in [&em.decls, &em.wires] {
        if !section.is_empty() {
            out.push('\n');
            out.push_str(section);
        }
    }
    if !plan.orphans.is_empty() {
        out.push('\n');
        for o in &plan.orphans {
            let _ = writeln!(out, "orphan {o}");
        }
    }
    out
}

enum Rhs {
    Value(Scalar),
    Call {
        block: String,
        fields: Vec<(String, String)>,
        args: Vec<(String, String)>,
    },
}

struct Decl {
    line: usize,
    rhs: Rhs,
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn parse_literal(s: &str) -> Option<Scalar> {
    match s {
        "true" => return Some(Scalar::Bool(true)),
        "false" => return Some(Scalar::Bool(false)),
        _ => {}
    }
    if s.starts_with('"') {
        return serde_json::from_str::<String>(s).ok().map(Scalar::String);
    }
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.starts_with(|c: char| c.is_ascii_digit()) {
        return s.parse::<f64>().ok().filter(|n| n.is_finite()).map(Scalar::Number);
    }
    None
}

fn parse_rhs(rhs: &str) -> Result<Rhs, String> {
    if let Some(v) = parse_literal(rhs) {
        return Ok(Rhs::Value(v));
    }
    let (block, rest) = rhs
        .split_once('(')
        .ok_or_else(|| format!("expected a literal or a block call, found `{rhs}`"))?;
    if !is_ident(block) {
        return Err(format!("bad block name `{block}`"));
    }
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| "missing closing parenthesis".to_string())?;
    let mut fields = Vec::new();
    let mut args = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, target) = part
            .split_once('=')
            .ok_or_else(|| format!("argument `{part}` is not of the form PORT=node"))?;
        let (key, target) = (key.trim(), target.trim());
        let (key, list) = match key.strip_prefix('@') {
            Some(k) => (k, &mut fields),
            None => (key, &mut args),
        };
        if !is_ident(key) || !is_ident(target) {
            return Err(format!("bad argument `{part}`"));
        }
        list.push((key.to_string(), target.to_string()));
    }
    Ok(Rhs::Call {
        block: block.to_string(),
        fields,
        args,
    })
}

struct Builder<'a> {
    catalog: &'a Catalog,
    decls: &'a BTreeMap<String, Decl>,
    wires: &'a HashMap<(String, String), (String, usize)>,
    used: BTreeSet<String>,
    wires_used: usize,
    statements: BTreeSet<String>,
    resolving: Vec<String>,
}

fn err(line: usize, message: impl Into<String>) -> ScriptSyntaxError {
    ScriptSyntaxError {
        line,
        message: message.into(),
    }
}

impl<'a> Builder<'a> {
    fn decl(&self, id: &str, line: usize) -> Result<&'a Decl, ScriptSyntaxError> {
        self.decls
            .get(id)
            .ok_or_else(|| err(line, format!("`{id}` is not declared")))
    }

    #[allow(clippy::type_complexity)]
    fn call(
        &mut self,
        id: &str,
        line: usize,
        block: &str,
        fields: &[(String, String)],
        args: &[(String, String)],
    ) -> Result<(&'a BlockSpec, Vec<(String, FieldBinding)>, Vec<(String, Expr)>), ScriptSyntaxError> {
        let spec = self
            .catalog
            .get(block)
            .ok_or_else(|| err(line, format!("unknown block `{block}`")))?;
        let lookup = |list: &[(String, String)], key: &str| {
            list.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
        };
        if fields.len() != spec.fields.len() || args.len() != spec.value_inputs().count() {
            return Err(err(line, format!("{block} takes {} field(s) and {} input(s)", spec.fields.len(), spec.value_inputs().count())));
        }
        let mut bound_fields = Vec::new();
        for f in &spec.fields {
            let target = lookup(fields, &f.id).ok_or_else(|| err(line, format!("{id}: missing field @{}", f.id)))?;
            match &self.decl(&target, line)?.rhs {
                Rhs::Value(v) => {
                    self.used.insert(target.clone());
                    bound_fields.push((
                        f.id.clone(),
                        FieldBinding {
                            node_id: target,
                            value: v.clone(),
                        },
                    ));
                }
                Rhs::Call { .. } => return Err(err(line, format!("field @{} must reference a literal", f.id))),
            }
        }
        let mut bound_args = Vec::new();
        for p in spec.value_inputs() {
            let target = lookup(args, &p.id).ok_or_else(|| err(line, format!("{id}: missing input {}", p.id)))?;
            bound_args.push((p.id.clone(), self.expr(&target, line)?));
        }
        Ok((spec, bound_fields, bound_args))
    }

    fn expr(&mut self, id: &str, line: usize) -> Result<Expr, ScriptSyntaxError> {
        let decls = self.decls;
        let decl = decls
            .get(id)
            .ok_or_else(|| err(line, format!("`{id}` is not declared")))?;
        self.used.insert(id.to_string());
        match &decl.rhs {
            Rhs::Value(v) => Ok(Expr::Constant {
                node_id: id.to_string(),
                value: v.clone(),
            }),
            Rhs::Call { block, fields, args } => {
                if self.resolving.iter().any(|r| r == id) {
                    return Err(err(decl.line, format!("`{id}` refers to itself")));
                }
                self.resolving.push(id.to_string());
                let (spec, fields, args) = self.call(id, decl.line, block, fields, args)?;
                if spec.category != Category::Reporter {
                    return Err(err(line, format!("`{id}` is a {block} statement, not a value")));
                }
                self.resolving.pop();
                Ok(Expr::Reporter {
                    node_id: id.to_string(),
                    block: block.clone(),
                    fields,
                    args,
                })
            }
        }
    }

    fn stmt(&mut self, id: &str, line: usize) -> Result<Stmt, ScriptSyntaxError> {
        let decls = self.decls;
        let decl = decls
            .get(id)
            .ok_or_else(|| err(line, format!("`{id}` is not declared")))?;
        let Rhs::Call { block, fields, args } = &decl.rhs else {
            return Err(err(line, format!("`{id}` is a literal, not a statement")));
        };
        if !self.statements.insert(id.to_string()) {
            return Err(err(line, format!("statement `{id}` is used twice")));
        }
        self.used.insert(id.to_string());
        let (spec, fields, args) = self.call(id, decl.line, block, fields, args)?;
        if spec.category == Category::Reporter {
            return Err(err(line, format!("`{id}` is a {block} value, not a statement")));
        }
        let ports: Vec<String> = spec.substack_ports().map(|p| p.id.clone()).collect();
        let mut substacks = Vec::new();
        for port in ports {
            substacks.push(self.chain(id, &port)?);
        }
        Ok(Stmt {
            node_id: id.to_string(),
            block: block.clone(),
            fields,
            args,
            substacks,
        })
    }

    fn chain(&mut self, from: &str, port: &str) -> Result<Vec<Stmt>, ScriptSyntaxError> {
        let wires = self.wires;
        let mut out = Vec::new();
        let mut cursor = wires.get(&(from.to_string(), port.to_string()));
        while let Some((to, line)) = cursor {
            self.wires_used += 1;
            out.push(self.stmt(to, *line)?);
            cursor = wires.get(&(to.clone(), THEN.to_string()));
        }
        Ok(out)
    }
}

/// Parses the text form back into a plan. Block names resolve against the
/// built-in catalog.
pub fn parse_script(text: &str) -> Result<CompiledPlan, ScriptSyntaxError> {
    let catalog = Catalog::builtin();
    let mut plan = CompiledPlan::default();
    let mut decls: BTreeMap<String, Decl> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut wires: HashMap<(String, String), (String, usize)> = HashMap::new();
    let mut targets: BTreeSet<String> = BTreeSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("var ") {
            let name: String = serde_json::from_str(rest.trim())
                .map_err(|_| err(line, "variable name must be a quoted string"))?;
            plan.declared_variables.insert(name);
        } else if let Some(rest) = trimmed.strip_prefix("orphan ") {
            let id = rest.trim();
            if !is_ident(id) {
                return Err(err(line, format!("bad node id `{id}`")));
            }
            plan.orphans.push(id.to_string());
        } else if let Some((lhs, rhs)) = trimmed.split_once('=').filter(|(l, _)| is_ident(l.trim())) {
            let id = lhs.trim();
            let rhs = parse_rhs(rhs.trim()).map_err(|m| err(line, m))?;
            if decls.insert(id.to_string(), Decl { line, rhs }).is_some() {
                return Err(err(line, format!("`{id}` is declared twice")));
            }
            order.push(id.to_string());
        } else if let Some((lhs, rhs)) = trimmed.split_once(" -> ") {
            let (from, port) = lhs
                .trim()
                .split_once('.')
                .ok_or_else(|| err(line, "wire must look like node.PORT -> node"))?;
            let to = rhs.trim();
            if ![from, port, to].iter().all(|s| is_ident(s)) {
                return Err(err(line, "wire must look like node.PORT -> node"));
            }
            if !targets.insert(to.to_string()) {
                return Err(err(line, format!("`{to}` already has a predecessor")));
            }
            if wires
                .insert((from.to_string(), port.to_string()), (to.to_string(), line))
                .is_some()
            {
                return Err(err(line, format!("{from}.{port} is wired twice")));
            }
        } else {
            return Err(err(line, format!("unrecognized line `{trimmed}`")));
        }
    }

    let mut b = Builder {
        catalog,
        decls: &decls,
        wires: &wires,
        used: BTreeSet::new(),
        wires_used: 0,
        statements: BTreeSet::new(),
        resolving: Vec::new(),
    };
    for id in &order {
        let decl = &decls[id];
        let Rhs::Call { block, .. } = &decl.rhs else {
            continue;
        };
        if catalog.get(block).is_some_and(|s| s.category == Category::Hat) {
            let trigger = b.stmt(id, decl.line)?;
            let body = b.chain(id, THEN)?;
            plan.scripts.push(Script { trigger, body });
        }
    }
    if let Some(id) = order.iter().find(|id| !b.used.contains(*id)) {
        return Err(err(decls[id].line, format!("`{id}` is declared but not reachable from a hat")));
    }
    if b.wires_used != wires.len() {
        let line = wires
            .iter()
            .filter(|((from, _), _)| !b.statements.contains(from))
            .map(|(_, (_, l))| *l)
            .min()
            .unwrap_or(0);
        return Err(err(line, "wire does not belong to any script"));
    }
    plan.scripts.sort_by(|a, b| a.trigger.node_id.cmp(&b.trigger.node_id));
    Ok(plan)
}
