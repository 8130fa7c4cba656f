use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::value::{
    compare, floor_mod, math_function, normalize_direction, render_log_line, round_half_up, sin_cos_deg, to_bool,
    to_number, to_text,
};
use super::{
    Event, EventKind, EventSchedule, RunConfig, RunResult, RuntimeError, SpriteState, Termination, STAGE_HEIGHT,
    STAGE_WIDTH,
};
use crate::compiler::{CompiledPlan, Expr, FieldBinding, Stmt};
use crate::graph::Scalar;

/// Reasons execution stops early.
#[derive(Debug)]
enum Halt {
    Stopped,
    TickCap,
    LoopCap,
    Error(RuntimeError),
}

impl From<RuntimeError> for Halt {
    fn from(e: RuntimeError) -> Self {
        Halt::Error(e)
    }
}

/// Control signal from one statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Next,
    StopScript,
}

struct Env<'a> {
    state: &'a SpriteState,
    keys: &'a BTreeSet<String>,
    mouse: bool,
    rng: &'a mut ChaCha8Rng,
}

fn field_text(fields: &[(String, FieldBinding)], id: &str) -> String {
    fields
        .iter()
        .find(|(k, _)| k == id)
        .map(|(_, f)| f.text())
        .unwrap_or_default()
}

fn arg<'e>(args: &'e [(String, Expr)], id: &str) -> Result<&'e Expr, RuntimeError> {
    args.iter()
        .find(|(k, _)| k == id)
        .map(|(_, e)| e)
        .ok_or_else(|| RuntimeError::BadCoercion(format!("missing input {id}")))
}

/// Uniform draw between two bounds; integral bounds give an integer.
fn random_between(rng: &mut ChaCha8Rng, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    const EXACT: f64 = 9_007_199_254_740_992.0;
    if lo.fract() == 0.0 && hi.fract() == 0.0 && lo.abs() < EXACT && hi.abs() < EXACT {
        rng.random_range(lo as i64..=hi as i64) as f64
    } else if lo == hi {
        lo
    } else {
        lo + rng.random::<f64>() * (hi - lo)
    }
}

fn eval(env: &mut Env<'_>, expr: &Expr) -> Result<Scalar, RuntimeError> {
    let (block, fields, args) = match expr {
        Expr::Constant { value, .. } => return Ok(value.clone()),
        Expr::Reporter {
            block, fields, args, ..
        } => (block.as_str(), fields, args),
    };
    let mut value = |id: &str| -> Result<Scalar, RuntimeError> {
        let e = arg(args, id)?;
        eval(env, e)
    };
    let num = Scalar::Number;
    Ok(match block {
        "XPosition" => num(env.state.x),
        "YPosition" => num(env.state.y),
        "KeyPressed" => {
            let key = field_text(fields, "KEY");
            Scalar::Bool(if key == "any" {
                !env.keys.is_empty()
            } else {
                env.keys.contains(&key)
            })
        }
        "MouseDown" => Scalar::Bool(env.mouse),
        "Add" | "Subtract" | "Multiply" | "Divide" | "Mod" => {
            let a = to_number(&value("NUM1")?)?;
            let b = to_number(&value("NUM2")?)?;
            num(match block {
                "Add" => a + b,
                "Subtract" => a - b,
                "Multiply" => a * b,
                "Divide" if b == 0.0 => return Err(RuntimeError::DivisionByZero),
                "Divide" => a / b,
                _ => floor_mod(a, b)?,
            })
        }
        "Random" => {
            let a = to_number(&value("FROM")?)?;
            let b = to_number(&value("TO")?)?;
            num(random_between(env.rng, a, b))
        }
        "GreaterThan" | "LessThan" | "Equals" => {
            let a = value("OPERAND1")?;
            let b = value("OPERAND2")?;
            let ord = compare(&a, &b);
            Scalar::Bool(match block {
                "GreaterThan" => ord.is_gt(),
                "LessThan" => ord.is_lt(),
                _ => ord.is_eq(),
            })
        }
        "And" | "Or" => {
            let a = to_bool(&value("OPERAND1")?);
            let b = to_bool(&value("OPERAND2")?);
            Scalar::Bool(if block == "And" { a && b } else { a || b })
        }
        "Not" => Scalar::Bool(!to_bool(&value("OPERAND")?)),
        "Join" => {
            let a = to_text(&value("STRING1")?);
            let b = to_text(&value("STRING2")?);
            Scalar::String(a + &b)
        }
        "LetterOf" => {
            let index = to_number(&value("LETTER")?)?;
            let text = to_text(&value("STRING")?);
            let len = text.chars().count();
            if index.fract() != 0.0 || index < 1.0 || index > len as f64 {
                return Err(RuntimeError::IndexOutOfRange {
                    index: Scalar::Number(index).to_string(),
                    len,
                });
            }
            let c = text.chars().nth(index as usize - 1).expect("in range");
            Scalar::String(c.to_string())
        }
        "LengthOf" => num(to_text(&value("STRING")?).chars().count() as f64),
        "Contains" => {
            let a = to_text(&value("STRING1")?).to_lowercase();
            let b = to_text(&value("STRING2")?).to_lowercase();
            Scalar::Bool(a.contains(&b))
        }
        "Round" => num(round_half_up(to_number(&value("NUM")?)?)),
        "MathFunction" => {
            let n = to_number(&value("NUM")?)?;
            num(math_function(&field_text(fields, "OPERATOR"), n)?)
        }
        "GetVariable" => {
            let name = field_text(fields, "VARIABLE");
            env.state
                .variables
                .get(&name)
                .cloned()
                .ok_or(RuntimeError::UndeclaredVariableAtRuntime(name))?
        }
        other => return Err(RuntimeError::BadCoercion(format!("{other} does not report a value"))),
    })
}

/// Evaluates an expression against a sprite state with no keys held and
/// the mouse up.
///
/// ```
/// use graphblocks::compiler::Expr;
/// use graphblocks::graph::Scalar;
/// use graphblocks::runtime::{eval_expr, SpriteState};
/// use rand::SeedableRng;
///
/// let c = |id: &str, n: f64| Expr::Constant { node_id: id.into(), value: Scalar::Number(n) };
/// let add = Expr::Reporter {
///     node_id: "node_add".into(),
///     block: "Add".into(),
///     fields: vec![],
///     args: vec![("NUM1".into(), c("node_a", 2.0)), ("NUM2".into(), c("node_b", 3.0))],
/// };
/// let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
/// assert_eq!(eval_expr(&add, &SpriteState::default(), &mut rng), Ok(Scalar::Number(5.0)));
/// ```
pub fn eval_expr(expr: &Expr, state: &SpriteState, rng: &mut ChaCha8Rng) -> Result<Scalar, RuntimeError> {
    let keys = BTreeSet::new();
    let mut env = Env {
        state,
        keys: &keys,
        mouse: false,
        rng,
    };
    eval(&mut env, expr)
}

/// One run in progress. Use [`super::run`] unless you need to drive
/// individual statements.
pub struct Interpreter<'p> {
    plan: &'p CompiledPlan,
    events: &'p [Event],
    cursor: usize,
    config: RunConfig,
    state: SpriteState,
    log: Vec<String>,
    clock: u64,
    rng: ChaCha8Rng,
    keys: BTreeSet<String>,
    mouse: bool,
}

impl<'p> Interpreter<'p> {
    pub fn new(plan: &'p CompiledPlan, schedule: &'p EventSchedule, config: &RunConfig) -> Self {
        Interpreter {
            plan,
            events: schedule.events(),
            cursor: 0,
            config: config.clone(),
            state: SpriteState::default(),
            log: Vec::new(),
            clock: 0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            keys: BTreeSet::new(),
            mouse: false,
        }
    }

    pub fn state(&self) -> &SpriteState {
        &self.state
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn run(mut self) -> RunResult {
        let termination = match self.main() {
            Ok(()) => Termination::Completed,
            Err(Halt::Stopped) => Termination::Stopped,
            Err(Halt::TickCap) => Termination::TickCap,
            Err(Halt::LoopCap) => Termination::LoopCap,
            Err(Halt::Error(e)) => Termination::RuntimeError(e),
        };
        RunResult {
            behavior_log: self.log,
            final_state: self.state,
            termination,
            ticks: self.clock,
        }
    }

    /// Runs one statement outside any script, returning whether it asked to
    /// stop the current script. Caps and `Stop all` are reported as
    /// termination values.
    pub fn exec_stmt(&mut self, stmt: &'p Stmt) -> Result<bool, Termination> {
        match self.stmt(stmt) {
            Ok(flow) => Ok(flow == Flow::StopScript),
            Err(Halt::Stopped) => Err(Termination::Stopped),
            Err(Halt::TickCap) => Err(Termination::TickCap),
            Err(Halt::LoopCap) => Err(Termination::LoopCap),
            Err(Halt::Error(e)) => Err(Termination::RuntimeError(e)),
        }
    }

    fn main(&mut self) -> Result<(), Halt> {
        loop {
            self.poll()?;
            match self.events.get(self.cursor) {
                Some(e) => self.advance_to(e.t)?,
                None => return Ok(()),
            }
        }
    }

    fn advance_to(&mut self, t: u64) -> Result<(), Halt> {
        if t > self.config.max_ticks {
            self.clock = self.config.max_ticks;
            return Err(Halt::TickCap);
        }
        self.clock = self.clock.max(t);
        Ok(())
    }

    fn advance(&mut self, ticks: u64) -> Result<(), Halt> {
        self.advance_to(self.clock.saturating_add(ticks))
    }

    /// Passes `ticks` of time, applying events that fall inside it.
    fn wait_ticks(&mut self, ticks: u64) -> Result<(), Halt> {
        let target = self.clock.saturating_add(ticks);
        loop {
            self.poll()?;
            match self.events.get(self.cursor) {
                Some(e) if e.t <= target => self.advance_to(e.t)?,
                _ => return self.advance_to(target),
            }
        }
    }

    fn secs_to_ticks(&self, secs: f64) -> u64 {
        if secs.is_nan() || secs <= 0.0 {
            return 0;
        }
        let t = (secs * self.config.ticks_per_second as f64).round();
        if t >= u64::MAX as f64 {
            u64::MAX
        } else {
            t as u64
        }
    }

    /// Applies every event due by now, running the scripts it triggers.
    fn poll(&mut self) -> Result<(), Halt> {
        while let Some(e) = self.events.get(self.cursor).filter(|e| e.t <= self.clock) {
            self.cursor += 1;
            let key = e.key.clone().unwrap_or_default();
            let plan = self.plan;
            let triggered: Vec<usize> = match e.event {
                EventKind::FlagClicked => (0..plan.scripts.len())
                    .filter(|&i| plan.scripts[i].trigger.block == "WhenFlagClicked")
                    .collect(),
                EventKind::KeyDown => {
                    self.keys.insert(key.clone());
                    (0..plan.scripts.len())
                        .filter(|&i| {
                            let s = &plan.scripts[i];
                            s.trigger.block == "WhenKeyPressed"
                                && s.trigger_key().is_some_and(|k| k == key || k == "any")
                        })
                        .collect()
                }
                EventKind::KeyUp => {
                    self.keys.remove(&key);
                    Vec::new()
                }
                EventKind::MouseDown => {
                    self.mouse = true;
                    Vec::new()
                }
                EventKind::MouseUp => {
                    self.mouse = false;
                    Vec::new()
                }
            };
            for i in triggered {
                self.block(&plan.scripts[i].body)?;
            }
        }
        Ok(())
    }

    fn eval(&mut self, expr: &Expr) -> Result<Scalar, RuntimeError> {
        let mut env = Env {
            state: &self.state,
            keys: &self.keys,
            mouse: self.mouse,
            rng: &mut self.rng,
        };
        eval(&mut env, expr)
    }

    fn block(&mut self, stmts: &'p [Stmt]) -> Result<Flow, Halt> {
        for s in stmts {
            if self.stmt(s)? == Flow::StopScript {
                return Ok(Flow::StopScript);
            }
        }
        Ok(Flow::Next)
    }

    fn emit(&mut self, block: &str, args: &[Scalar]) {
        if let Some(line) = render_log_line(block, args) {
            self.log.push(line);
        }
    }

    /// Runs a loop body, enforcing the per-loop iteration cap.
    fn iteration(&mut self, count: &mut u64, body: &'p [Stmt]) -> Result<Flow, Halt> {
        if *count >= self.config.max_iterations_per_loop {
            return Err(Halt::LoopCap);
        }
        *count += 1;
        self.block(body)
    }

    fn stmt(&mut self, s: &'p Stmt) -> Result<Flow, Halt> {
        self.poll()?;
        let n = Scalar::Number;
        let number = |this: &mut Self, id: &str| -> Result<f64, Halt> {
            let v = this.eval(arg(&s.args, id)?)?;
            Ok(to_number(&v)?)
        };
        let step = self.config.ticks_per_statement;
        let empty: &'p [Stmt] = &[];
        let sub = |i: usize| s.substacks.get(i).map(Vec::as_slice).unwrap_or(empty);
        match s.block.as_str() {
            "WhenFlagClicked" | "WhenKeyPressed" => {}
            "MoveSteps" => {
                let steps = number(self, "STEPS")?;
                let (sin, cos) = sin_cos_deg(self.state.direction);
                self.state.x += steps * sin;
                self.state.y += steps * cos;
                self.emit("MoveSteps", &[n(steps)]);
                self.advance(step)?;
            }
            "TurnRight" | "TurnLeft" => {
                let d = number(self, "DEGREES")?;
                let signed = if s.block == "TurnRight" { d } else { -d };
                self.state.direction = normalize_direction(self.state.direction + signed);
                self.emit(&s.block, &[n(d)]);
                self.advance(step)?;
            }
            "GoToRandom" | "GotoXY" => {
                let (x, y) = if s.block == "GotoXY" {
                    (number(self, "X")?, number(self, "Y")?)
                } else {
                    self.random_position()
                };
                self.state.x = x;
                self.state.y = y;
                self.emit(&s.block, &[n(x), n(y)]);
                self.advance(step)?;
            }
            "GlideToRandom" | "GlideToXY" => {
                let secs = number(self, "SECS")?;
                let (x, y) = if s.block == "GlideToXY" {
                    (number(self, "X")?, number(self, "Y")?)
                } else {
                    self.random_position()
                };
                self.state.x = x;
                self.state.y = y;
                self.emit(&s.block, &[n(x), n(y), n(secs)]);
                self.wait_ticks(self.secs_to_ticks(secs))?;
            }
            "PointInDirection" => {
                let d = normalize_direction(number(self, "DIRECTION")?);
                self.state.direction = d;
                self.emit("PointInDirection", &[n(d)]);
                self.advance(step)?;
            }
            "ChangeXBy" | "SetXTo" | "ChangeYBy" | "SetYTo" | "ChangeSizeBy" | "SetSizeTo" => {
                let port = match s.block.as_str() {
                    "ChangeXBy" => "DX",
                    "SetXTo" => "X",
                    "ChangeYBy" => "DY",
                    "SetYTo" => "Y",
                    "ChangeSizeBy" => "CHANGE",
                    _ => "SIZE",
                };
                let v = number(self, port)?;
                match s.block.as_str() {
                    "ChangeXBy" => self.state.x += v,
                    "SetXTo" => self.state.x = v,
                    "ChangeYBy" => self.state.y += v,
                    "SetYTo" => self.state.y = v,
                    "ChangeSizeBy" => self.state.size += v,
                    _ => self.state.size = v,
                }
                self.emit(&s.block, &[n(v)]);
                self.advance(step)?;
            }
            "Say" | "Think" => {
                let m = self.eval(arg(&s.args, "MESSAGE")?)?;
                self.emit(&s.block, &[m]);
                self.advance(step)?;
            }
            "SayForSecs" | "ThinkForSecs" => {
                let m = self.eval(arg(&s.args, "MESSAGE")?)?;
                let secs = number(self, "SECS")?;
                self.emit(&s.block, &[m, n(secs)]);
                self.wait_ticks(self.secs_to_ticks(secs))?;
            }
            "Wait" => {
                let secs = number(self, "DURATION")?;
                self.emit("Wait", &[n(secs)]);
                self.wait_ticks(self.secs_to_ticks(secs))?;
            }
            "Repeat" => {
                let times = round_half_up(number(self, "TIMES")?);
                self.advance(step)?;
                let mut count = 0;
                while (count as f64) < times {
                    if self.iteration(&mut count, sub(0))? == Flow::StopScript {
                        return Ok(Flow::StopScript);
                    }
                    self.poll()?;
                }
            }
            "Forever" => {
                self.advance(step)?;
                let mut count = 0;
                loop {
                    if self.iteration(&mut count, sub(0))? == Flow::StopScript {
                        return Ok(Flow::StopScript);
                    }
                    self.poll()?;
                }
            }
            "If" | "IfElse" => {
                let cond = to_bool(&self.eval(arg(&s.args, "CONDITION")?)?);
                self.advance(step)?;
                let body = if cond { sub(0) } else { sub(1) };
                return self.block(body);
            }
            "WaitUntil" => {
                self.advance(step)?;
                loop {
                    self.poll()?;
                    if to_bool(&self.eval(arg(&s.args, "CONDITION")?)?) {
                        break;
                    }
                    self.advance(1)?;
                }
            }
            "RepeatUntil" => {
                self.advance(step)?;
                let mut count = 0;
                loop {
                    self.poll()?;
                    if to_bool(&self.eval(arg(&s.args, "CONDITION")?)?) {
                        break;
                    }
                    if self.iteration(&mut count, sub(0))? == Flow::StopScript {
                        return Ok(Flow::StopScript);
                    }
                }
            }
            "Stop" => {
                let option = field_text(&s.fields, "OPTION");
                self.emit("Stop", &[Scalar::String(option.clone())]);
                self.advance(step)?;
                return if option == "all" {
                    Err(Halt::Stopped)
                } else {
                    Ok(Flow::StopScript)
                };
            }
            "SetVariable" => {
                let name = field_text(&s.fields, "VARIABLE");
                let v = self.eval(arg(&s.args, "VALUE")?)?;
                self.state.variables.insert(name.clone(), v.clone());
                self.emit("SetVariable", &[Scalar::String(name), v]);
                self.advance(step)?;
            }
            "ChangeVariableBy" => {
                let name = field_text(&s.fields, "VARIABLE");
                let delta = number(self, "VALUE")?;
                let current = self
                    .state
                    .variables
                    .get(&name)
                    .ok_or_else(|| RuntimeError::UndeclaredVariableAtRuntime(name.clone()))?;
                let updated = to_number(current)? + delta;
                self.state.variables.insert(name.clone(), n(updated));
                self.emit("ChangeVariableBy", &[Scalar::String(name), n(delta)]);
                self.advance(step)?;
            }
            other => {
                return Err(RuntimeError::BadCoercion(format!("{other} is not a statement")).into());
            }
        }
        Ok(Flow::Next)
    }

    fn random_position(&mut self) -> (f64, f64) {
        let hw = STAGE_WIDTH / 2.0;
        let hh = STAGE_HEIGHT / 2.0;
        let x = random_between(&mut self.rng, -hw, hw);
        let y = random_between(&mut self.rng, -hh, hh);
        (x, y)
    }
}
