//! Random valid programs for property tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use graphblocks::catalog::{Catalog, Category, FieldValues, ValueType};
use graphblocks::graph::{GraphDoc, NodeEntry, Scalar};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(path: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{path}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// `node_` followed by a letters-only encoding of `n`.
pub fn node_id(n: usize) -> String {
    let mut n = n;
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    format!("node_{s}")
}

const STRINGS: [&str; 7] = ["hi", "a \"quoted\" word", "naïve", "", "x -> y", "1,2", "Hello!"];

const STATEMENTS: [&str; 24] = [
    "MoveSteps", "TurnRight", "TurnLeft", "GoToRandom", "GotoXY", "GlideToRandom", "GlideToXY",
    "PointInDirection", "ChangeXBy", "SetXTo", "ChangeYBy", "SetYTo", "Say", "SayForSecs", "Think",
    "ThinkForSecs", "ChangeSizeBy", "SetSizeTo", "Wait", "SetVariable", "ChangeVariableBy", "Stop",
    "WaitUntil", "Say",
];
const CONTROL: [&str; 5] = ["Repeat", "Forever", "If", "IfElse", "RepeatUntil"];
const NUMBER_REPORTERS: [&str; 11] = [
    "XPosition", "YPosition", "Add", "Subtract", "Multiply", "Random", "LengthOf", "Round", "MathFunction",
    "GetVariable", "Mod",
];
const STRING_REPORTERS: [&str; 2] = ["Join", "LetterOf"];
const BOOL_REPORTERS: [&str; 9] = [
    "KeyPressed", "MouseDown", "GreaterThan", "LessThan", "Equals", "And", "Or", "Not", "Contains",
];

pub struct Gen<'c> {
    pub rng: ChaCha8Rng,
    catalog: &'c Catalog,
    pub graph: GraphDoc,
    next: usize,
    variables: Vec<String>,
    constants: BTreeMap<String, Vec<String>>,
}

impl<'c> Gen<'c> {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            catalog: Catalog::builtin(),
            graph: GraphDoc::new(),
            next: 0,
            variables: Vec::new(),
            constants: BTreeMap::new(),
        }
    }

    fn add(&mut self, entry: NodeEntry) -> String {
        let id = node_id(self.next);
        self.next += 1;
        self.graph.add_node(&id, entry);
        id
    }

    fn constant(&mut self, value: Scalar) -> String {
        let key = format!("{value:?}");
        if let Some(ids) = self.constants.get(&key) {
            if self.rng.random_bool(0.3) {
                return ids.choose(&mut self.rng).unwrap().clone();
            }
        }
        let id = self.add(NodeEntry::constant(value));
        self.constants.entry(key).or_default().push(id.clone());
        id
    }

    fn number(&mut self) -> Scalar {
        let n: i32 = self.rng.random_range(-20..=20);
        Scalar::Number(if self.rng.random_bool(0.2) { n as f64 / 4.0 } else { n as f64 })
    }

    fn value_for(&mut self, ty: ValueType, depth: usize) -> String {
        if depth == 0 || self.rng.random_bool(0.6) {
            let v = match ty {
                ValueType::Number | ValueType::Any => self.number(),
                ValueType::String => Scalar::String(STRINGS.choose(&mut self.rng).unwrap().to_string()),
                ValueType::Boolean => Scalar::Bool(self.rng.random()),
                ValueType::Exec => unreachable!(),
            };
            return self.constant(v);
        }
        let pool: Vec<&str> = match ty {
            ValueType::Number | ValueType::Any => NUMBER_REPORTERS.to_vec(),
            ValueType::String => [&NUMBER_REPORTERS[..], &STRING_REPORTERS[..]].concat(),
            ValueType::Boolean => BOOL_REPORTERS.to_vec(),
            ValueType::Exec => unreachable!(),
        };
        let pool: Vec<&str> = pool
            .into_iter()
            .filter(|b| *b != "GetVariable" || !self.variables.is_empty())
            .collect();
        let block = *pool.choose(&mut self.rng).unwrap();
        self.block_node(block, depth - 1)
    }

    fn field_value(&mut self, values: &FieldValues) -> String {
        let v = match values {
            FieldValues::Options(options) => options.choose(&mut self.rng).unwrap().clone(),
            FieldValues::VariableName => self.variables.choose(&mut self.rng).cloned().unwrap_or_else(|| "score".into()),
        };
        self.constant(Scalar::String(v))
    }

    /// Adds a block node with every field and value input wired.
    fn block_node(&mut self, block: &str, depth: usize) -> String {
        let spec = self.catalog.get(block).unwrap().clone();
        let id = self.add(NodeEntry::block(block));
        for f in &spec.fields {
            let src = if block == "SetVariable" {
                let name = format!("var{}", self.rng.random_range(0..3));
                if !self.variables.contains(&name) {
                    self.variables.push(name.clone());
                }
                self.constant(Scalar::String(name))
            } else {
                self.field_value(&f.values)
            };
            self.graph.add_edge(&src, "", &id, &f.id);
        }
        for p in spec.value_inputs() {
            let src = self.value_for(p.value_type, depth);
            let port = if self.graph.nodes[&src].is_constant() { "" } else { "VALUE" };
            self.graph.add_edge(&src, port, &id, &p.id);
        }
        id
    }

    /// A THEN chain hanging off `from.port`.
    fn chain(&mut self, from: &str, port: &str, depth: usize) {
        let len = self.rng.random_range(0..=3);
        let mut prev = (from.to_string(), port.to_string());
        for _ in 0..len {
            let control = depth > 0 && self.rng.random_bool(0.25);
            let block = if control {
                *CONTROL.choose(&mut self.rng).unwrap()
            } else {
                let b = *STATEMENTS.choose(&mut self.rng).unwrap();
                if b == "ChangeVariableBy" && self.variables.is_empty() {
                    "SetVariable"
                } else {
                    b
                }
            };
            let id = self.block_node(block, 2);
            self.graph.add_edge(&prev.0, &prev.1, &id, "EXEC");
            let spec = self.catalog.get(block).unwrap().clone();
            for sub in spec.substack_ports() {
                self.chain(&id, &sub.id, depth - 1);
            }
            if spec.category == Category::Control || spec.out_port("THEN").is_some() {
                prev = (id, "THEN".into());
            }
        }
    }

    /// One or two scripts plus, sometimes, an unreachable statement.
    pub fn program(mut self) -> GraphDoc {
        let scripts = self.rng.random_range(1..=2);
        for _ in 0..scripts {
            let hat = if self.rng.random_bool(0.5) {
                self.add(NodeEntry::block("WhenFlagClicked"))
            } else {
                let hat = self.add(NodeEntry::block("WhenKeyPressed"));
                let name = ["space", "a", "up arrow"].choose(&mut self.rng).unwrap().to_string();
                let key = self.constant(Scalar::String(name));
                self.graph.add_edge(&key, "", &hat, "KEY");
                hat
            };
            self.chain(&hat, "THEN", 2);
        }
        if self.rng.random_bool(0.2) {
            self.block_node("Think", 1);
        }
        self.graph
    }
}

pub fn random_program(seed: u64) -> GraphDoc {
    Gen::new(seed).program()
}
