//! Coercions between scalars and the log phrase table.

use super::RuntimeError;
use crate::graph::Scalar;

/// Number for numeric ports. Booleans count as 1 and 0; strings must parse
/// as a finite number after trimming.
pub fn to_number(v: &Scalar) -> Result<f64, RuntimeError> {
    match v {
        Scalar::Number(n) => Ok(*n),
        Scalar::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
        Scalar::String(s) => numeric_string(s)
            .ok_or_else(|| RuntimeError::BadCoercion(format!("`{s}` is not a number"))),
    }
}

/// Numeric reading of a value, if it has one. Booleans do not.
pub fn as_numeric(v: &Scalar) -> Option<f64> {
    match v {
        Scalar::Number(n) => Some(*n),
        Scalar::String(s) => numeric_string(s),
        Scalar::Bool(_) => None,
    }
}

fn numeric_string(s: &str) -> Option<f64> {
    let t = s.trim();
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    if !body.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        return None;
    }
    t.parse::<f64>().ok().filter(|n| n.is_finite())
}

/// Truthiness: `false`, `0`, `""`, `"0"` and `"false"` (any case) are false.
pub fn to_bool(v: &Scalar) -> bool {
    match v {
        Scalar::Bool(b) => *b,
        Scalar::Number(n) => *n != 0.0 && !n.is_nan(),
        Scalar::String(s) => !(s.is_empty() || s == "0" || s.eq_ignore_ascii_case("false")),
    }
}

pub fn to_text(v: &Scalar) -> String {
    v.to_string()
}

/// Ordering used by `Equals`, `GreaterThan` and `LessThan`: numeric when
/// both sides read as numbers, otherwise case-insensitive text.
pub fn compare(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    match (as_numeric(a), as_numeric(b)) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
        _ => to_text(a).to_lowercase().cmp(&to_text(b).to_lowercase()),
    }
}

/// Fills the phrase template for a statement block. `args` are in the order
/// the placeholders appear. Returns `None` for blocks that do not log.
///
/// | block | template |
/// |---|---|
/// | MoveSteps | `moved {steps} steps` |
/// | TurnRight | `turned right {degrees} degrees` |
/// | TurnLeft | `turned left {degrees} degrees` |
/// | GoToRandom, GotoXY | `went to ({x}, {y})` |
/// | GlideToRandom, GlideToXY | `glided to ({x}, {y}) over {secs} secs` |
/// | PointInDirection | `pointed in direction {direction}` |
/// | ChangeXBy | `changed x by {dx}` |
/// | SetXTo | `set x to {x}` |
/// | ChangeYBy | `changed y by {dy}` |
/// | SetYTo | `set y to {y}` |
/// | Say | `said: {message}` |
/// | SayForSecs | `said: {message} for {secs} secs` |
/// | Think | `thought: {message}` |
/// | ThinkForSecs | `thought: {message} for {secs} secs` |
/// | ChangeSizeBy | `changed size by {change}` |
/// | SetSizeTo | `set size to {size}` |
/// | Wait | `waited {secs} secs` |
/// | Stop | `stopped {option}` |
/// | SetVariable | `set {variable} to {value}` |
/// | ChangeVariableBy | `changed {variable} by {value}` |
///
/// ```
/// use graphblocks::graph::Scalar;
/// use graphblocks::runtime::render_log_line;
///
/// let line = render_log_line("MoveSteps", &[Scalar::Number(10.0)]);
/// assert_eq!(line.as_deref(), Some("moved 10 steps"));
/// ```
pub fn render_log_line(block: &str, args: &[Scalar]) -> Option<String> {
    let a = |i: usize| args.get(i).map(to_text).unwrap_or_default();
    Some(match block {
        "MoveSteps" => format!("moved {} steps", a(0)),
        "TurnRight" => format!("turned right {} degrees", a(0)),
        "TurnLeft" => format!("turned left {} degrees", a(0)),
        "GoToRandom" | "GotoXY" => format!("went to ({}, {})", a(0), a(1)),
        "GlideToRandom" | "GlideToXY" => format!("glided to ({}, {}) over {} secs", a(0), a(1), a(2)),
        "PointInDirection" => format!("pointed in direction {}", a(0)),
        "ChangeXBy" => format!("changed x by {}", a(0)),
        "SetXTo" => format!("set x to {}", a(0)),
        "ChangeYBy" => format!("changed y by {}", a(0)),
        "SetYTo" => format!("set y to {}", a(0)),
        "Say" => format!("said: {}", a(0)),
        "SayForSecs" => format!("said: {} for {} secs", a(0), a(1)),
        "Think" => format!("thought: {}", a(0)),
        "ThinkForSecs" => format!("thought: {} for {} secs", a(0), a(1)),
        "ChangeSizeBy" => format!("changed size by {}", a(0)),
        "SetSizeTo" => format!("set size to {}", a(0)),
        "Wait" => format!("waited {} secs", a(0)),
        "Stop" => format!("stopped {}", a(0)),
        "SetVariable" => format!("set {} to {}", a(0), a(1)),
        "ChangeVariableBy" => format!("changed {} by {}", a(0), a(1)),
        _ => return None,
    })
}

/// Rounds away binary noise so that e.g. `sin(180)` reports 0.
pub(crate) fn round_trig(n: f64) -> f64 {
    (n * 1e10).round() / 1e10
}

/// Sine and cosine of an angle in degrees, exact at multiples of 90.
pub(crate) fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    match r {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        270.0 => (-1.0, 0.0),
        _ => r.to_radians().sin_cos(),
    }
}

/// Wraps an angle into (-180, 180].
pub fn normalize_direction(deg: f64) -> f64 {
    if !deg.is_finite() {
        return deg;
    }
    let mut d = deg.rem_euclid(360.0);
    if d > 180.0 {
        d -= 360.0;
    }
    d
}

pub(crate) fn math_function(op: &str, n: f64) -> Result<f64, RuntimeError> {
    Ok(match op {
        "abs" => n.abs(),
        "floor" => n.floor(),
        "ceiling" => n.ceil(),
        "sqrt" => n.sqrt(),
        "sin" => round_trig(sin_cos_deg(n).0),
        "cos" => round_trig(sin_cos_deg(n).1),
        "tan" => match n.rem_euclid(360.0) {
            90.0 => f64::INFINITY,
            270.0 => f64::NEG_INFINITY,
            _ => round_trig(n.to_radians().tan()),
        },
        "asin" => n.asin().to_degrees(),
        "acos" => n.acos().to_degrees(),
        "atan" => n.atan().to_degrees(),
        "ln" => n.ln(),
        "log" => n.log10(),
        "e^" => n.exp(),
        "10^" => 10f64.powf(n),
        other => return Err(RuntimeError::BadCoercion(format!("unknown math function `{other}`"))),
    })
}

/// Floor modulo: the result takes the sign of the divisor.
pub(crate) fn floor_mod(a: f64, b: f64) -> Result<f64, RuntimeError> {
    if b == 0.0 {
        return Err(RuntimeError::DivisionByZero);
    }
    Ok(a - b * (a / b).floor())
}

/// Half-up rounding.
pub(crate) fn round_half_up(n: f64) -> f64 {
    (n + 0.5).floor()
}
