//! Raw model output to diagnostics in one call.

use std::str::FromStr;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::diagnostic::{has_errors, Diagnostic};
use crate::graph::{alt_to_proposed, extract_json, parse_alt_graph, parse_graph, GraphDoc};

/// Which JSON shape the model was asked to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphFormat {
    /// Node map plus edge list.
    Proposed,
    /// Per-node adjacency lists.
    Alternative,
}

impl GraphFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphFormat::Proposed => "proposed",
            GraphFormat::Alternative => "alternative",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown graph format `{0}` (expected proposed or alternative)")]
pub struct UnknownFormat(pub String);

impl FromStr for GraphFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(GraphFormat::Proposed),
            "alternative" | "alt" => Ok(GraphFormat::Alternative),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

/// Outcome of [`check`].
#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    /// Present when the text parsed into a graph.
    pub graph: Option<GraphDoc>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn is_valid(&self) -> bool {
        self.graph.is_some() && !has_errors(&self.diagnostics)
    }
}

/// Parses a graph from raw text in the given format. Parse failures come
/// back as a single diagnostic.
pub fn parse_text(raw: &str, format: GraphFormat, catalog: &Catalog) -> Result<GraphDoc, Diagnostic> {
    let json = extract_json(raw).map_err(|e| e.to_diagnostic())?;
    let parsed = match format {
        GraphFormat::Proposed => parse_graph(&json),
        GraphFormat::Alternative => parse_alt_graph(&json).and_then(|alt| alt_to_proposed(&alt, catalog)),
    };
    parsed.map_err(|e| e.to_diagnostic())
}

/// Extracts, parses and validates.
///
/// ```
/// use graphblocks::catalog::Catalog;
/// use graphblocks::pipeline::{check, GraphFormat};
///
/// let raw = "Here you go: {\"nodes\": {}, \"edges\": []}";
/// let checked = check(raw, GraphFormat::Proposed, Catalog::builtin());
/// assert_eq!(checked.diagnostics[0].code.as_str(), "NoHatBlock");
/// ```
pub fn check(raw: &str, format: GraphFormat, catalog: &Catalog) -> Checked {
    match parse_text(raw, format, catalog) {
        Ok(graph) => {
            let diagnostics = crate::compiler::validate(&graph, catalog);
            Checked {
                graph: Some(graph),
                diagnostics,
            }
        }
        Err(d) => Checked {
            graph: None,
            diagnostics: vec![d],
        },
    }
}
