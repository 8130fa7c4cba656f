//! The block catalog: 53 typed block definitions and the reference-node
//! emitters that describe them to a model.
//!
//! Port ids follow the parameter names of the corresponding Scratch blocks,
//! uppercased. Every block that takes part in execution flow has an `EXEC`
//! inPort and a `THEN` outPort; control blocks add `SUBSTACK` (and `SUBSTACK2`
//! for the false branch of `IfElse`). Reporters expose a single `VALUE`
//! outPort.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde_json::{json, Map, Value};
use thiserror::Error;

/// Names of every block, in catalog order.
pub const BLOCK_NAMES: [&str; 53] = [
    "WhenFlagClicked",
    "WhenKeyPressed",
    "MoveSteps",
    "TurnRight",
    "TurnLeft",
    "GoToRandom",
    "GotoXY",
    "GlideToRandom",
    "GlideToXY",
    "PointInDirection",
    "ChangeXBy",
    "SetXTo",
    "ChangeYBy",
    "SetYTo",
    "XPosition",
    "YPosition",
    "Say",
    "SayForSecs",
    "Think",
    "ThinkForSecs",
    "ChangeSizeBy",
    "SetSizeTo",
    "Wait",
    "Repeat",
    "Forever",
    "If",
    "IfElse",
    "WaitUntil",
    "RepeatUntil",
    "Stop",
    "KeyPressed",
    "MouseDown",
    "Add",
    "Subtract",
    "Multiply",
    "Divide",
    "Random",
    "GreaterThan",
    "LessThan",
    "Equals",
    "And",
    "Or",
    "Not",
    "Join",
    "LetterOf",
    "LengthOf",
    "Contains",
    "Mod",
    "Round",
    "MathFunction",
    "SetVariable",
    "ChangeVariableBy",
    "GetVariable",
];

/// Name used for literal-value nodes in a graph. Not a catalog block.
pub const CONSTANT: &str = "Constant";

pub const EXEC: &str = "EXEC";
pub const THEN: &str = "THEN";
pub const SUBSTACK: &str = "SUBSTACK";
pub const SUBSTACK2: &str = "SUBSTACK2";
pub const VALUE: &str = "VALUE";

pub const MATH_OPERATORS: [&str; 14] = [
    "abs", "floor", "ceiling", "sqrt", "sin", "cos", "tan", "asin", "acos", "atan", "ln", "log",
    "e^", "10^",
];

pub const STOP_OPTIONS: [&str; 2] = ["all", "this script"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("block `{block}` has no field `{field}`")]
    UnknownField { block: String, field: String },
    #[error("invalid catalog: {0}")]
    Invalid(String),
    #[error("malformed catalog JSON: {0}")]
    Json(String),
}

/// Type carried by a port.
///
/// `Any` is only used by the variable blocks, whose stored values are untyped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Number,
    String,
    Boolean,
    Exec,
    Any,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Number => "number",
            ValueType::String => "string",
            ValueType::Boolean => "boolean",
            ValueType::Exec => "exec",
            ValueType::Any => "any",
        }
    }

    pub fn parse(s: &str) -> Option<ValueType> {
        Some(match s {
            "number" => ValueType::Number,
            "string" => ValueType::String,
            "boolean" => ValueType::Boolean,
            "exec" => ValueType::Exec,
            "any" => ValueType::Any,
            _ => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Hat,
    Statement,
    Control,
    Reporter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortSpec {
    pub id: String,
    pub value_type: ValueType,
    pub description: Option<String>,
}

/// What a field accepts.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// A fixed menu of values.
    Options(Vec<String>),
    /// Any non-empty variable name.
    VariableName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub id: String,
    pub values: FieldValues,
    pub description: Option<String>,
}

impl FieldSpec {
    pub fn accepts(&self, value: &str) -> bool {
        match &self.values {
            FieldValues::Options(options) => options.iter().any(|o| o == value),
            FieldValues::VariableName => !value.trim().is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub category: Category,
    pub in_ports: Vec<PortSpec>,
    pub fields: Vec<FieldSpec>,
    pub out_ports: Vec<PortSpec>,
    pub description: Option<String>,
}

/// Which side of a block a port id resolves to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PortRef<'a> {
    In(&'a PortSpec),
    Field(&'a FieldSpec),
    Out(&'a PortSpec),
}

impl BlockSpec {
    pub fn in_port(&self, id: &str) -> Option<&PortSpec> {
        self.in_ports.iter().find(|p| p.id == id)
    }

    pub fn out_port(&self, id: &str) -> Option<&PortSpec> {
        self.out_ports.iter().find(|p| p.id == id)
    }

    pub fn field(&self, id: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.id == id)
    }

    pub fn resolve_port(&self, id: &str) -> Option<PortRef<'_>> {
        if let Some(p) = self.in_port(id) {
            return Some(PortRef::In(p));
        }
        if let Some(f) = self.field(id) {
            return Some(PortRef::Field(f));
        }
        self.out_port(id).map(PortRef::Out)
    }

    /// Value inPorts, i.e. every inPort except `EXEC`.
    pub fn value_inputs(&self) -> impl Iterator<Item = &PortSpec> {
        self.in_ports.iter().filter(|p| p.value_type != ValueType::Exec)
    }

    /// SUBSTACK outPorts in declaration order.
    pub fn substack_ports(&self) -> impl Iterator<Item = &PortSpec> {
        self.out_ports.iter().filter(|p| p.id.starts_with(SUBSTACK))
    }

    pub fn has_exec(&self) -> bool {
        self.in_port(EXEC).is_some()
    }

    fn check(&self) -> Result<(), CatalogError> {
        let bad = |msg: &str| Err(CatalogError::Invalid(format!("{}: {msg}", self.name)));
        let mut seen = std::collections::HashSet::new();
        for id in self
            .in_ports
            .iter()
            .map(|p| &p.id)
            .chain(self.fields.iter().map(|f| &f.id))
        {
            if id.is_empty() || !seen.insert(id.as_str()) {
                return bad(&format!("duplicate or empty input id `{id}`"));
            }
        }
        seen.clear();
        for p in &self.out_ports {
            if p.id.is_empty() || !seen.insert(p.id.as_str()) {
                return bad(&format!("duplicate or empty outPort id `{}`", p.id));
            }
        }
        for f in &self.fields {
            if let FieldValues::Options(options) = &f.values {
                let distinct: std::collections::HashSet<_> = options.iter().collect();
                if options.is_empty() || distinct.len() != options.len() {
                    return bad(&format!("field `{}` must list distinct values", f.id));
                }
            }
        }
        if self.out_ports.iter().any(|p| p.id == EXEC)
            || self
                .in_ports
                .iter()
                .any(|p| p.id == THEN || p.id.starts_with(SUBSTACK))
        {
            return bad("EXEC must be an inPort and THEN/SUBSTACK outPorts");
        }
        let has_then = self.out_port(THEN).is_some();
        let substacks = self.substack_ports().count();
        let ok = match self.category {
            Category::Hat => !self.has_exec() && has_then && self.out_ports.len() == 1,
            Category::Statement => self.has_exec() && has_then && substacks == 0,
            Category::Control => self.has_exec() && has_then && substacks >= 1,
            Category::Reporter => {
                !self.has_exec()
                    && !has_then
                    && self.out_ports.len() == 1
                    && self.out_ports[0].value_type != ValueType::Exec
            }
        };
        if !ok {
            return bad("ports do not match the block category");
        }
        Ok(())
    }

    fn infer_category(
        in_ports: &[PortSpec],
        out_ports: &[PortSpec],
    ) -> Result<Category, CatalogError> {
        let has_exec = in_ports.iter().any(|p| p.id == EXEC);
        let has_then = out_ports.iter().any(|p| p.id == THEN);
        let has_substack = out_ports.iter().any(|p| p.id.starts_with(SUBSTACK));
        Ok(match (has_exec, has_then, has_substack) {
            (true, true, true) => Category::Control,
            (true, true, false) => Category::Statement,
            (false, true, false) => Category::Hat,
            (false, false, false) => Category::Reporter,
            _ => {
                return Err(CatalogError::Invalid(
                    "cannot infer block category from ports".into(),
                ))
            }
        })
    }
}

/// Which reference-node representation to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceStyle {
    Proposed,
    NoTypes,
    ExtraDescription,
}

impl ReferenceStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceStyle::Proposed => "proposed",
            ReferenceStyle::NoTypes => "no_types",
            ReferenceStyle::ExtraDescription => "extra_description",
        }
    }
}

impl std::str::FromStr for ReferenceStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(ReferenceStyle::Proposed),
            "no_types" => Ok(ReferenceStyle::NoTypes),
            "extra_description" => Ok(ReferenceStyle::ExtraDescription),
            other => Err(format!("unknown reference style `{other}`")),
        }
    }
}

/// Immutable set of block definitions, indexed by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    blocks: Vec<BlockSpec>,
    index: HashMap<String, usize>,
}

impl Catalog {
    /// Builds a catalog, checking every structural invariant. Blocks are
    /// reordered into canonical order.
    pub fn new(mut blocks: Vec<BlockSpec>) -> Result<Catalog, CatalogError> {
        if blocks.len() != BLOCK_NAMES.len() {
            return Err(CatalogError::Invalid(format!(
                "expected {} blocks, found {}",
                BLOCK_NAMES.len(),
                blocks.len()
            )));
        }
        let mut ordered = Vec::with_capacity(blocks.len());
        for name in BLOCK_NAMES {
            let pos = blocks
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| CatalogError::Invalid(format!("missing block `{name}`")))?;
            ordered.push(blocks.swap_remove(pos));
        }
        if let Some(extra) = blocks.first() {
            return Err(CatalogError::Invalid(format!(
                "unexpected block `{}`",
                extra.name
            )));
        }
        for b in &ordered {
            b.check()?;
        }
        let index = ordered
            .iter()
            .enumerate()
            .map(|(i, b)| (b.name.clone(), i))
            .collect();
        Ok(Catalog {
            blocks: ordered,
            index,
        })
    }

    /// The built-in catalog.
    pub fn builtin() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(|| Catalog::new(builtin_blocks()).expect("built-in catalog is valid"))
    }

    pub fn lookup(&self, name: &str) -> Result<&BlockSpec, CatalogError> {
        self.get(name)
            .ok_or_else(|| CatalogError::UnknownBlock(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&BlockSpec> {
        self.index.get(name).map(|&i| &self.blocks[i])
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn list_blocks(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.name.as_str()).collect()
    }

    pub fn field_values(&self, name: &str, field_id: &str) -> Result<Vec<String>, CatalogError> {
        let block = self.lookup(name)?;
        let field = block.field(field_id).ok_or_else(|| CatalogError::UnknownField {
            block: name.to_string(),
            field: field_id.to_string(),
        })?;
        Ok(match &field.values {
            FieldValues::Options(options) => options.clone(),
            FieldValues::VariableName => Vec::new(),
        })
    }

    /// Copy with every description removed.
    pub fn without_descriptions(&self) -> Catalog {
        let mut c = self.clone();
        for b in &mut c.blocks {
            b.description = None;
            for p in b.in_ports.iter_mut().chain(b.out_ports.iter_mut()) {
                p.description = None;
            }
            for f in &mut b.fields {
                f.description = None;
            }
        }
        c
    }

    pub fn reference_value(&self, style: ReferenceStyle) -> Value {
        let with_types = style != ReferenceStyle::NoTypes;
        let with_desc = style == ReferenceStyle::ExtraDescription;
        let port = |p: &PortSpec| {
            let mut m = Map::new();
            m.insert("id".into(), json!(p.id));
            if with_types {
                m.insert("type".into(), json!(p.value_type.as_str()));
            }
            if with_desc {
                m.insert("description".into(), json!(p.description.as_deref().unwrap_or("")));
            }
            Value::Object(m)
        };
        let field = |f: &FieldSpec| {
            let mut m = Map::new();
            m.insert("id".into(), json!(f.id));
            if with_types {
                m.insert("type".into(), json!(ValueType::String.as_str()));
            }
            if let FieldValues::Options(options) = &f.values {
                m.insert("values".into(), json!(options));
            }
            if with_desc {
                m.insert("description".into(), json!(f.description.as_deref().unwrap_or("")));
            }
            Value::Object(m)
        };
        let mut root = Map::new();
        for b in &self.blocks {
            let mut m = Map::new();
            if with_desc {
                m.insert("description".into(), json!(b.description.as_deref().unwrap_or("")));
            }
            m.insert("inPorts".into(), b.in_ports.iter().map(port).collect());
            m.insert("fields".into(), b.fields.iter().map(field).collect());
            m.insert("outPorts".into(), b.out_ports.iter().map(port).collect());
            root.insert(b.name.clone(), Value::Object(m));
        }
        Value::Object(root)
    }

    /// Reference-node JSON for the given style, pretty-printed with 2-space
    /// indentation in catalog order.
    pub fn emit_reference(&self, style: ReferenceStyle) -> String {
        serde_json::to_string_pretty(&self.reference_value(style))
            .expect("reference JSON serializes")
    }

    /// Parses a reference document emitted in the `proposed` or
    /// `extra_description` style. Port types are required.
    pub fn from_reference_json(text: &str) -> Result<Catalog, CatalogError> {
        let root: Value =
            serde_json::from_str(text).map_err(|e| CatalogError::Json(e.to_string()))?;
        let root = root
            .as_object()
            .ok_or_else(|| CatalogError::Invalid("top level must be an object".into()))?;
        let mut blocks = Vec::with_capacity(root.len());
        for (name, body) in root {
            blocks.push(parse_block(name, body)?);
        }
        Catalog::new(blocks)
    }
}

fn parse_block(name: &str, body: &Value) -> Result<BlockSpec, CatalogError> {
    let invalid = |msg: String| CatalogError::Invalid(format!("{name}: {msg}"));
    let obj = body
        .as_object()
        .ok_or_else(|| invalid("block must be an object".into()))?;
    let description = opt_string(obj, "description");
    let list = |key: &str| -> Result<Vec<Value>, CatalogError> {
        match obj.get(key) {
            Some(Value::Array(items)) => Ok(items.clone()),
            None => Ok(Vec::new()),
            _ => Err(invalid(format!("`{key}` must be an array"))),
        }
    };
    let port = |v: &Value| -> Result<PortSpec, CatalogError> {
        let o = v
            .as_object()
            .ok_or_else(|| invalid("port must be an object".into()))?;
        let id = o
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| invalid("port needs a string id".into()))?;
        let ty = o
            .get("type")
            .and_then(Value::as_str)
            .and_then(ValueType::parse)
            .ok_or_else(|| invalid(format!("port `{id}` needs a known type")))?;
        Ok(PortSpec {
            id: id.to_string(),
            value_type: ty,
            description: opt_string(o, "description"),
        })
    };
    let field = |v: &Value| -> Result<FieldSpec, CatalogError> {
        let o = v
            .as_object()
            .ok_or_else(|| invalid("field must be an object".into()))?;
        let id = o
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| invalid("field needs a string id".into()))?;
        let values = match o.get("values") {
            None => FieldValues::VariableName,
            Some(Value::Array(items)) => FieldValues::Options(
                items
                    .iter()
                    .map(|i| {
                        i.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| invalid(format!("field `{id}` values must be strings")))
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Some(_) => return Err(invalid(format!("field `{id}` values must be an array"))),
        };
        Ok(FieldSpec {
            id: id.to_string(),
            values,
            description: opt_string(o, "description"),
        })
    };
    let in_ports = list("inPorts")?.iter().map(port).collect::<Result<Vec<_>, _>>()?;
    let fields = list("fields")?.iter().map(field).collect::<Result<Vec<_>, _>>()?;
    let out_ports = list("outPorts")?.iter().map(port).collect::<Result<Vec<_>, _>>()?;
    let category = BlockSpec::infer_category(&in_ports, &out_ports).map_err(|_| {
        invalid("cannot infer block category from ports".into())
    })?;
    Ok(BlockSpec {
        name: name.to_string(),
        category,
        in_ports,
        fields,
        out_ports,
        description,
    })
}

fn opt_string(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key).and_then(Value::as_str).map(str::to_string)
}

/// Key names accepted by `WhenKeyPressed` and `KeyPressed`.
pub fn key_names() -> Vec<String> {
    let mut keys: Vec<String> = ('a'..='z').chain('0'..='9').map(String::from).collect();
    keys.extend(
        ["space", "up arrow", "down arrow", "left arrow", "right arrow", "any"]
            .iter()
            .map(|s| s.to_string()),
    );
    keys
}

struct Builder(BlockSpec);

impl Builder {
    fn new(name: &str, category: Category, description: &str) -> Builder {
        let mut b = Builder(BlockSpec {
            name: name.to_string(),
            category,
            in_ports: Vec::new(),
            fields: Vec::new(),
            out_ports: Vec::new(),
            description: Some(description.to_string()),
        });
        if matches!(category, Category::Statement | Category::Control) {
            b = b.input(EXEC, ValueType::Exec, "Previous block that triggers this block");
        }
        b
    }

    fn input(mut self, id: &str, value_type: ValueType, description: &str) -> Builder {
        self.0.in_ports.push(PortSpec {
            id: id.to_string(),
            value_type,
            description: Some(description.to_string()),
        });
        self
    }

    fn options(mut self, id: &str, options: &[&str], description: &str) -> Builder {
        self.0.fields.push(FieldSpec {
            id: id.to_string(),
            values: FieldValues::Options(options.iter().map(|s| s.to_string()).collect()),
            description: Some(description.to_string()),
        });
        self
    }

    fn key_field(mut self) -> Builder {
        self.0.fields.push(FieldSpec {
            id: "KEY".to_string(),
            values: FieldValues::Options(key_names()),
            description: Some("Name of the keyboard key".to_string()),
        });
        self
    }

    fn variable_field(mut self) -> Builder {
        self.0.fields.push(FieldSpec {
            id: "VARIABLE".to_string(),
            values: FieldValues::VariableName,
            description: Some("Name of the variable".to_string()),
        });
        self
    }

    fn output(mut self, id: &str, value_type: ValueType, description: &str) -> Builder {
        self.0.out_ports.push(PortSpec {
            id: id.to_string(),
            value_type,
            description: Some(description.to_string()),
        });
        self
    }

    fn then(self) -> Builder {
        self.output(THEN, ValueType::Exec, "Next block to run after this block")
    }

    fn value(self, value_type: ValueType, description: &str) -> Builder {
        self.output(VALUE, value_type, description)
    }

    fn build(self) -> BlockSpec {
        self.0
    }
}

fn builtin_blocks() -> Vec<BlockSpec> {
    use Category::*;
    use ValueType::*;
    let hat = |n, d| Builder::new(n, Hat, d);
    let stmt = |n, d| Builder::new(n, Statement, d);
    let control = |n, d| Builder::new(n, Control, d);
    let reporter = |n, d| Builder::new(n, Reporter, d);
    let body = "First block inside the loop body";

    vec![
        hat("WhenFlagClicked", "Run the attached blocks when the green flag is clicked")
            .then()
            .build(),
        hat("WhenKeyPressed", "Run the attached blocks when the chosen key is pressed")
            .key_field()
            .then()
            .build(),
        stmt("MoveSteps", "Move sprite forward by specified number of steps")
            .input("STEPS", Number, "Number of steps to move in the current direction")
            .then()
            .build(),
        stmt("TurnRight", "Rotate sprite clockwise by specified degrees")
            .input("DEGREES", Number, "Degrees to turn clockwise")
            .then()
            .build(),
        stmt("TurnLeft", "Rotate sprite counterclockwise by specified degrees")
            .input("DEGREES", Number, "Degrees to turn counterclockwise")
            .then()
            .build(),
        stmt("GoToRandom", "Move sprite instantly to a random position on the stage")
            .then()
            .build(),
        stmt("GotoXY", "Move sprite instantly to the given coordinates")
            .input("X", Number, "Target x coordinate")
            .input("Y", Number, "Target y coordinate")
            .then()
            .build(),
        stmt("GlideToRandom", "Glide sprite to a random position over the given time")
            .input("SECS", Number, "Duration of the glide in seconds")
            .then()
            .build(),
        stmt("GlideToXY", "Glide sprite to the given coordinates over the given time")
            .input("SECS", Number, "Duration of the glide in seconds")
            .input("X", Number, "Target x coordinate")
            .input("Y", Number, "Target y coordinate")
            .then()
            .build(),
        stmt("PointInDirection", "Point sprite in the given direction (90 is right, 0 is up)")
            .input("DIRECTION", Number, "Direction in degrees")
            .then()
            .build(),
        stmt("ChangeXBy", "Change sprite x position by the given amount")
            .input("DX", Number, "Amount to add to x")
            .then()
            .build(),
        stmt("SetXTo", "Set sprite x position")
            .input("X", Number, "New x coordinate")
            .then()
            .build(),
        stmt("ChangeYBy", "Change sprite y position by the given amount")
            .input("DY", Number, "Amount to add to y")
            .then()
            .build(),
        stmt("SetYTo", "Set sprite y position")
            .input("Y", Number, "New y coordinate")
            .then()
            .build(),
        reporter("XPosition", "Current x position of the sprite")
            .value(Number, "The sprite's x coordinate")
            .build(),
        reporter("YPosition", "Current y position of the sprite")
            .value(Number, "The sprite's y coordinate")
            .build(),
        stmt("Say", "Show a speech bubble with the given message")
            .input("MESSAGE", String, "Text to say")
            .then()
            .build(),
        stmt("SayForSecs", "Show a speech bubble for the given number of seconds")
            .input("MESSAGE", String, "Text to say")
            .input("SECS", Number, "How long to say it in seconds")
            .then()
            .build(),
        stmt("Think", "Show a thought bubble with the given message")
            .input("MESSAGE", String, "Text to think")
            .then()
            .build(),
        stmt("ThinkForSecs", "Show a thought bubble for the given number of seconds")
            .input("MESSAGE", String, "Text to think")
            .input("SECS", Number, "How long to think it in seconds")
            .then()
            .build(),
        stmt("ChangeSizeBy", "Change sprite size by the given percentage points")
            .input("CHANGE", Number, "Amount to add to the size")
            .then()
            .build(),
        stmt("SetSizeTo", "Set sprite size as a percentage of its original size")
            .input("SIZE", Number, "New size in percent")
            .then()
            .build(),
        stmt("Wait", "Pause the script for the given number of seconds")
            .input("DURATION", Number, "Seconds to wait")
            .then()
            .build(),
        control("Repeat", "Run the blocks inside a fixed number of times")
            .input("TIMES", Number, "Number of repetitions")
            .then()
            .output(SUBSTACK, Exec, body)
            .build(),
        control("Forever", "Run the blocks inside over and over without end")
            .then()
            .output(SUBSTACK, Exec, body)
            .build(),
        control("If", "Run the blocks inside only when the condition is true")
            .input("CONDITION", Boolean, "Condition to test")
            .then()
            .output(SUBSTACK, Exec, "First block to run when the condition is true")
            .build(),
        control("IfElse", "Run one of two branches depending on the condition")
            .input("CONDITION", Boolean, "Condition to test")
            .then()
            .output(SUBSTACK, Exec, "First block to run when the condition is true")
            .output(SUBSTACK2, Exec, "First block to run when the condition is false")
            .build(),
        stmt("WaitUntil", "Pause the script until the condition becomes true")
            .input("CONDITION", Boolean, "Condition to wait for")
            .then()
            .build(),
        control("RepeatUntil", "Run the blocks inside until the condition becomes true")
            .input("CONDITION", Boolean, "Condition that ends the loop")
            .then()
            .output(SUBSTACK, Exec, body)
            .build(),
        stmt("Stop", "Stop this script or all scripts")
            .options("OPTION", &STOP_OPTIONS, "What to stop")
            .then()
            .build(),
        reporter("KeyPressed", "Whether the chosen key is currently held down")
            .key_field()
            .value(Boolean, "True while the key is held")
            .build(),
        reporter("MouseDown", "Whether the mouse button is currently held down")
            .value(Boolean, "True while the mouse button is held")
            .build(),
        reporter("Add", "Sum of two numbers")
            .input("NUM1", Number, "First addend")
            .input("NUM2", Number, "Second addend")
            .value(Number, "The sum")
            .build(),
        reporter("Subtract", "Difference of two numbers")
            .input("NUM1", Number, "Number to subtract from")
            .input("NUM2", Number, "Number to subtract")
            .value(Number, "The difference")
            .build(),
        reporter("Multiply", "Product of two numbers")
            .input("NUM1", Number, "First factor")
            .input("NUM2", Number, "Second factor")
            .value(Number, "The product")
            .build(),
        reporter("Divide", "Quotient of two numbers")
            .input("NUM1", Number, "Dividend")
            .input("NUM2", Number, "Divisor")
            .value(Number, "The quotient")
            .build(),
        reporter("Random", "Random number between two bounds, inclusive")
            .input("FROM", Number, "Lower bound")
            .input("TO", Number, "Upper bound")
            .value(Number, "A random number; whole numbers when both bounds are whole")
            .build(),
        reporter("GreaterThan", "Whether the first value is greater than the second")
            .input("OPERAND1", Number, "Left operand")
            .input("OPERAND2", Number, "Right operand")
            .value(Boolean, "The comparison result")
            .build(),
        reporter("LessThan", "Whether the first value is less than the second")
            .input("OPERAND1", Number, "Left operand")
            .input("OPERAND2", Number, "Right operand")
            .value(Boolean, "The comparison result")
            .build(),
        reporter("Equals", "Whether two values are equal")
            .input("OPERAND1", String, "Left operand")
            .input("OPERAND2", String, "Right operand")
            .value(Boolean, "The comparison result")
            .build(),
        reporter("And", "True when both conditions are true")
            .input("OPERAND1", Boolean, "First condition")
            .input("OPERAND2", Boolean, "Second condition")
            .value(Boolean, "Logical and")
            .build(),
        reporter("Or", "True when either condition is true")
            .input("OPERAND1", Boolean, "First condition")
            .input("OPERAND2", Boolean, "Second condition")
            .value(Boolean, "Logical or")
            .build(),
        reporter("Not", "Negation of a condition")
            .input("OPERAND", Boolean, "Condition to negate")
            .value(Boolean, "Logical not")
            .build(),
        reporter("Join", "Concatenation of two strings")
            .input("STRING1", String, "First string")
            .input("STRING2", String, "Second string")
            .value(String, "The joined string")
            .build(),
        reporter("LetterOf", "The letter at a 1-based position in a string")
            .input("LETTER", Number, "Position of the letter, starting at 1")
            .input("STRING", String, "String to take the letter from")
            .value(String, "The letter")
            .build(),
        reporter("LengthOf", "Number of characters in a string")
            .input("STRING", String, "String to measure")
            .value(Number, "The length")
            .build(),
        reporter("Contains", "Whether the first string contains the second, ignoring case")
            .input("STRING1", String, "String to search in")
            .input("STRING2", String, "String to search for")
            .value(Boolean, "True when found")
            .build(),
        reporter("Mod", "Remainder of floored division")
            .input("NUM1", Number, "Dividend")
            .input("NUM2", Number, "Divisor")
            .value(Number, "The remainder, with the sign of the divisor")
            .build(),
        reporter("Round", "Number rounded to the nearest whole number")
            .input("NUM", Number, "Number to round")
            .value(Number, "The rounded number")
            .build(),
        reporter("MathFunction", "Apply a math function to a number")
            .options("OPERATOR", &MATH_OPERATORS, "Function to apply")
            .input("NUM", Number, "Function argument (degrees for trigonometry)")
            .value(Number, "The function result")
            .build(),
        stmt("SetVariable", "Set a variable to a value, creating it if needed")
            .variable_field()
            .input("VALUE", Any, "Value to store")
            .then()
            .build(),
        stmt("ChangeVariableBy", "Add a number to a variable")
            .variable_field()
            .input("VALUE", Number, "Amount to add")
            .then()
            .build(),
        reporter("GetVariable", "Current value of a variable")
            .variable_field()
            .value(Any, "The stored value")
            .build(),
    ]
}
