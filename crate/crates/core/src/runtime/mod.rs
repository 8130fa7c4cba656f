//! Deterministic interpreter for compiled plans.
//!
//! Time is virtual. Each executed statement costs `ticks_per_statement`
//! ticks, and timed blocks (`Wait`, `SayForSecs`, `ThinkForSecs`, the glide
//! blocks) cost their duration instead. Scheduled input events are applied
//! at statement boundaries; a script triggered by an event runs to
//! completion before the interrupted script resumes.

mod interp;
mod value;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub use interp::{eval_expr, Interpreter};
pub use value::{compare, normalize_direction, render_log_line, to_bool, to_number, to_text};

use crate::compiler::CompiledPlan;
use crate::graph::Scalar;

/// Width and height of the stage, used by the random-position blocks.
pub const STAGE_WIDTH: f64 = 480.0;
pub const STAGE_HEIGHT: f64 = 360.0;

/// Sprite attributes and variable values.
#[derive(Debug, Clone, PartialEq)]
pub struct SpriteState {
    pub x: f64,
    pub y: f64,
    /// Degrees; 90 points right and 0 points up.
    pub direction: f64,
    /// Percent of original size.
    pub size: f64,
    pub variables: BTreeMap<String, Scalar>,
}

impl Default for SpriteState {
    fn default() -> Self {
        SpriteState {
            x: 0.0,
            y: 0.0,
            direction: 90.0,
            size: 100.0,
            variables: BTreeMap::new(),
        }
    }
}

impl SpriteState {
    pub fn to_json(&self) -> Value {
        let n = |v: f64| Scalar::Number(v).to_json();
        let vars: Map<String, Value> = self
            .variables
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        json!({
            "x": n(self.x),
            "y": n(self.y),
            "direction": n(self.direction),
            "size": n(self.size),
            "variables": vars,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    KeyDown,
    KeyUp,
    MouseDown,
    MouseUp,
    FlagClicked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub event: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

impl Event {
    pub fn flag(t: u64) -> Event {
        Event {
            t,
            event: EventKind::FlagClicked,
            key: None,
        }
    }

    pub fn key_down(t: u64, key: &str) -> Event {
        Event {
            t,
            event: EventKind::KeyDown,
            key: Some(key.to_string()),
        }
    }

    pub fn key_up(t: u64, key: &str) -> Event {
        Event {
            t,
            event: EventKind::KeyUp,
            key: Some(key.to_string()),
        }
    }

    pub fn mouse(t: u64, down: bool) -> Event {
        Event {
            t,
            event: if down { EventKind::MouseDown } else { EventKind::MouseUp },
            key: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("malformed schedule: {0}")]
    Malformed(String),
    #[error("event {index} at t={t} comes before the previous event")]
    Unordered { index: usize, t: u64 },
    #[error("event {index}: {kind} events need a key")]
    MissingKey { index: usize, kind: String },
}

/// Input events in time order. The JSON form is a list of
/// `{"t": ticks, "event": kind, "key": name}` objects, where `key` is only
/// present for `key_down` and `key_up`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventSchedule {
    events: Vec<Event>,
}

impl EventSchedule {
    pub fn new(events: Vec<Event>) -> Result<EventSchedule, ScheduleError> {
        for (index, pair) in events.windows(2).enumerate() {
            if pair[1].t < pair[0].t {
                return Err(ScheduleError::Unordered {
                    index: index + 1,
                    t: pair[1].t,
                });
            }
        }
        for (index, e) in events.iter().enumerate() {
            let keyed = matches!(e.event, EventKind::KeyDown | EventKind::KeyUp);
            if keyed && e.key.as_deref().is_none_or(str::is_empty) {
                let kind = serde_json::to_value(e.event).expect("serializes");
                return Err(ScheduleError::MissingKey {
                    index,
                    kind: kind.as_str().unwrap_or_default().to_string(),
                });
            }
        }
        Ok(EventSchedule { events })
    }

    /// A single green-flag click at tick 0.
    pub fn flag_only() -> EventSchedule {
        EventSchedule {
            events: vec![Event::flag(0)],
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn from_json(text: &str) -> Result<EventSchedule, ScheduleError> {
        let events: Vec<Event> =
            serde_json::from_str(text).map_err(|e| ScheduleError::Malformed(e.to_string()))?;
        EventSchedule::new(events)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.events).expect("events serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub max_ticks: u64,
    pub max_iterations_per_loop: u64,
    pub ticks_per_statement: u64,
    pub ticks_per_second: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            max_ticks: 1_000_000,
            max_iterations_per_loop: 10_000,
            ticks_per_statement: 1,
            ticks_per_second: 1000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{name} must be at least 1")]
pub struct ConfigError {
    pub name: &'static str,
}

impl RunConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("max_ticks", self.max_ticks),
            ("max_iterations_per_loop", self.max_iterations_per_loop),
            ("ticks_per_second", self.ticks_per_second),
        ] {
            if v < 1 {
                return Err(ConfigError { name });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuntimeError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("bad coercion: {0}")]
    BadCoercion(String),
    #[error("variable `{0}` read before it was set")]
    UndeclaredVariableAtRuntime(String),
    #[error("letter {index} is out of range for a string of length {len}")]
    IndexOutOfRange { index: String, len: usize },
}

impl RuntimeError {
    pub fn code(&self) -> &'static str {
        match self {
            RuntimeError::DivisionByZero => "DivisionByZero",
            RuntimeError::BadCoercion(_) => "BadCoercion",
            RuntimeError::UndeclaredVariableAtRuntime(_) => "UndeclaredVariableAtRuntime",
            RuntimeError::IndexOutOfRange { .. } => "IndexOutOfRange",
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    /// Every triggered script finished and no events remain.
    Completed,
    /// A `Stop` block with option `all` ran.
    Stopped,
    TickCap,
    LoopCap,
    RuntimeError(RuntimeError),
}

impl Termination {
    pub fn is_error(&self) -> bool {
        matches!(self, Termination::RuntimeError(_))
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::Stopped => f.write_str("stopped"),
            Termination::TickCap => f.write_str("tick_cap"),
            Termination::LoopCap => f.write_str("loop_cap"),
            Termination::RuntimeError(e) => write!(f, "runtime_error({})", e.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub behavior_log: Vec<String>,
    pub final_state: SpriteState,
    pub termination: Termination,
    /// Virtual time when the run ended.
    pub ticks: u64,
}

impl RunResult {
    pub fn log_text(&self) -> String {
        self.behavior_log.iter().map(|l| format!("{l}\n")).collect()
    }
}

/// Executes a plan against a schedule.
///
/// ```
/// use graphblocks::compiler::parse_script;
/// use graphblocks::runtime::{run, EventSchedule, RunConfig, Termination};
///
/// let plan = parse_script(
///     "node_flag = WhenFlagClicked()\n\
///      node_hi = \"hi\"\n\
///      node_say = Say(MESSAGE=node_hi)\n\
///      node_flag.THEN -> node_say\n",
/// )
/// .unwrap();
/// let result = run(&plan, &EventSchedule::flag_only(), &RunConfig::default());
/// assert_eq!(result.behavior_log, ["said: hi"]);
/// assert_eq!(result.termination, Termination::Completed);
/// ```
pub fn run(plan: &CompiledPlan, schedule: &EventSchedule, config: &RunConfig) -> RunResult {
    Interpreter::new(plan, schedule, config).run()
}

#[cfg(test)]
mod tests;
