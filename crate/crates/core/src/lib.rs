//! Graph-based abstract code generation for a Scratch-like block language.
//!
//! The pipeline a model's answer goes through:
//!
//! 1. [`graph::extract_json`] pulls the JSON object out of the raw text.
//! 2. [`graph::parse_graph`] (or [`graph::parse_alt_graph`] followed by
//!    [`graph::alt_to_proposed`]) turns it into a [`graph::GraphDoc`].
//! 3. [`compiler::validate`] checks it against the [`catalog::Catalog`].
//! 4. [`compiler::compile`] lowers it to a [`compiler::CompiledPlan`].
//! 5. [`runtime::run`] executes the plan against an event schedule and
//!    produces a behavior log and final sprite state.
//!
//! The guide in `book/` walks through each stage.

pub mod catalog;
pub mod compiler;
pub mod diagnostic;
pub mod graph;
pub mod pipeline;
pub mod runtime;

pub use catalog::{BlockSpec, Catalog, ReferenceStyle};
pub use compiler::{compile, validate, CompiledPlan};
pub use diagnostic::{Diagnostic, DiagnosticCode};
pub use graph::{GraphDoc, Scalar};
pub use runtime::{run, RunConfig, RunResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/blocks.md")]
    mod blocks {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/compiler.md")]
    mod compiler {}
    #[doc = include_str!("../../../book/src/script.md")]
    mod script {}
    #[doc = include_str!("../../../book/src/runtime.md")]
    mod runtime {}
}
