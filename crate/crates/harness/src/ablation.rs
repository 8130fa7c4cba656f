use std::fmt;
use std::str::FromStr;

use graphblocks::pipeline::GraphFormat;
use graphblocks::ReferenceStyle;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One representation variant under comparison.
///
/// The three reference-node variants share the node-map output format; the
/// alternative variant keeps the full reference but asks for adjacency lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    NoTypes,
    ExtraDescription,
    Proposed,
    Alternative,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown ablation `{0}` (expected proposed, no_types, extra_description or alternative)")]
pub struct UnknownAblation(pub String);

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::NoTypes,
        Ablation::ExtraDescription,
        Ablation::Proposed,
        Ablation::Alternative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::NoTypes => "no_types",
            Ablation::ExtraDescription => "extra_description",
            Ablation::Proposed => "proposed",
            Ablation::Alternative => "alternative",
        }
    }

    /// Row label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Ablation::NoTypes => "No Types",
            Ablation::ExtraDescription => "Extra Description",
            Ablation::Proposed => "Proposed",
            Ablation::Alternative => "Alternative",
        }
    }

    pub fn reference_style(self) -> ReferenceStyle {
        match self {
            Ablation::NoTypes => ReferenceStyle::NoTypes,
            Ablation::ExtraDescription => ReferenceStyle::ExtraDescription,
            Ablation::Proposed | Ablation::Alternative => ReferenceStyle::Proposed,
        }
    }

    pub fn graph_format(self) -> GraphFormat {
        match self {
            Ablation::Alternative => GraphFormat::Alternative,
            _ => GraphFormat::Proposed,
        }
    }

    /// Parses a comma-separated list such as `proposed,no_types`, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Ablation>, UnknownAblation> {
        if s.trim() == "all" {
            return Ok(Ablation::ALL.to_vec());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = UnknownAblation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAblation(s.to_string()))
    }
}
