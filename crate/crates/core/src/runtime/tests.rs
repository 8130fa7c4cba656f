use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::catalog::Catalog;
use crate::compiler::{compile, emit_script, parse_script, Expr};
use crate::graph::parse_graph;

fn plan(text: &str) -> CompiledPlan {
    parse_script(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn run_flag(text: &str) -> RunResult {
    run(&plan(text), &EventSchedule::flag_only(), &RunConfig::default())
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/graphs/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const SAY_HI: &str = "\
node_flag = WhenFlagClicked()
node_hi = \"hi\"
node_say = Say(MESSAGE=node_hi)
node_flag.THEN -> node_say
";

#[test]
fn say_hi() {
    let r = run_flag(SAY_HI);
    assert_eq!(r.behavior_log, ["said: hi"]);
    assert_eq!(r.final_state, SpriteState::default());
    assert_eq!(r.termination, Termination::Completed);
}

#[test]
fn no_events_means_nothing_runs() {
    let r = run(&plan(SAY_HI), &EventSchedule::default(), &RunConfig::default());
    assert!(r.behavior_log.is_empty());
    assert_eq!(r.termination, Termination::Completed);
}

#[test]
fn square_until_space() {
    let g = parse_graph(&fixture("square_until_space.json")).unwrap();
    let p = compile(&g, Catalog::builtin()).unwrap();
    let events = EventSchedule::from_json(&fixture("square_until_space.events.json")).unwrap();
    let r = run(&p, &events, &RunConfig::default());
    // RepeatUntil costs one tick, then each side costs two: eight sides
    // finish at tick 17, when space goes down, and Stop runs next.
    let mut expected: Vec<&str> = ["moved 50 steps", "turned right 90 degrees"].repeat(8);
    expected.push("stopped all");
    assert_eq!(r.behavior_log, expected);
    assert_eq!(r.termination, Termination::Stopped);
    assert_eq!((r.final_state.x, r.final_state.y, r.final_state.direction), (0.0, 0.0, 90.0));
}

#[test]
fn square_visits_corners() {
    let g = parse_graph(&fixture("square_until_space.json")).unwrap();
    let p = compile(&g, Catalog::builtin()).unwrap();
    let events = EventSchedule::default();
    let mut it = Interpreter::new(&p, &events, &RunConfig::default());
    let side = &p.scripts[0].body[0].substacks[0];
    let mut corners = Vec::new();
    for _ in 0..4 {
        for s in side {
            it.exec_stmt(s).unwrap();
        }
        corners.push((it.state().x, it.state().y));
    }
    assert_eq!(corners, [(50.0, 0.0), (50.0, -50.0), (0.0, -50.0), (0.0, 0.0)]);
}

#[test]
fn forever_hits_loop_cap() {
    let p = plan(
        "node_flag = WhenFlagClicked()
node_one = 1
node_loop = Forever()
node_move = MoveSteps(STEPS=node_one)
node_flag.THEN -> node_loop
node_loop.SUBSTACK -> node_move
",
    );
    let config = RunConfig {
        max_iterations_per_loop: 100,
        ..RunConfig::default()
    };
    let r = run(&p, &EventSchedule::flag_only(), &config);
    assert_eq!(r.termination, Termination::LoopCap);
    // Facing 90 degrees, each step is all x.
    assert_eq!(r.final_state.x, 100.0);
    assert_eq!(r.final_state.y, 0.0);
    assert_eq!(r.behavior_log.len(), 100);
}

#[test]
fn repeat_until_constant_false_hits_loop_cap() {
    let p = plan(
        "node_flag = WhenFlagClicked()
node_no = false
node_loop = RepeatUntil(CONDITION=node_no)
node_flag.THEN -> node_loop
",
    );
    let r = run(&p, &EventSchedule::flag_only(), &RunConfig::default());
    assert_eq!(r.termination, Termination::LoopCap);
}

#[test]
fn wait_until_without_events_hits_tick_cap() {
    let p = plan(
        "node_flag = WhenFlagClicked()
node_mouse = MouseDown()
node_wait = WaitUntil(CONDITION=node_mouse)
node_flag.THEN -> node_wait
",
    );
    let config = RunConfig {
        max_ticks: 5000,
        ..RunConfig::default()
    };
    let r = run(&p, &EventSchedule::flag_only(), &config);
    assert_eq!(r.termination, Termination::TickCap);
    assert_eq!(r.ticks, 5000);
}

#[test]
fn move_and_turn() {
    let r = run_flag(
        "node_flag = WhenFlagClicked()
node_ten = 10
node_ft = 45
node_move = MoveSteps(STEPS=node_ten)
node_turn = TurnRight(DEGREES=node_ft)
node_move2 = MoveSteps(STEPS=node_ten)
node_flag.THEN -> node_move
node_move.THEN -> node_turn
node_turn.THEN -> node_move2
",
    );
    assert_eq!(r.behavior_log, ["moved 10 steps", "turned right 45 degrees", "moved 10 steps"]);
    let s = &r.final_state;
    assert_eq!(s.direction, 135.0);
    let rad = 135f64.to_radians();
    assert!((s.x - (10.0 + 10.0 * rad.sin())).abs() < 1e-12);
    assert!((s.y - 10.0 * rad.cos()).abs() < 1e-12);
}

#[test]
fn wait_until_key() {
    let p = plan(
        "node_flag = WhenFlagClicked()
node_key = \"a\"
node_pressed = KeyPressed(@KEY=node_key)
node_wait = WaitUntil(CONDITION=node_pressed)
node_go = \"go\"
node_say = Say(MESSAGE=node_go)
node_flag.THEN -> node_wait
node_wait.THEN -> node_say
",
    );
    let events = EventSchedule::new(vec![Event::flag(0), Event::key_down(7, "a")]).unwrap();
    let r = run(&p, &events, &RunConfig::default());
    assert_eq!(r.behavior_log, ["said: go"]);
    // Say runs at tick 7 and costs one tick.
    assert_eq!(r.ticks, 8);
}

#[test]
fn wait_advances_exactly() {
    let r = run_flag(
        "node_flag = WhenFlagClicked()
node_two = 2
node_wait = Wait(DURATION=node_two)
node_flag.THEN -> node_wait
",
    );
    assert_eq!(r.behavior_log, ["waited 2 secs"]);
    assert_eq!(r.ticks, 2000);
}

#[test]
fn key_hat_runs_during_wait() {
    let p = plan(
        "node_flag = WhenFlagClicked()
node_space = \"space\"
node_keyHat = WhenKeyPressed(@KEY=node_space)
node_one = 1
node_wait = Wait(DURATION=node_one)
node_hi = \"hi\"
node_say = Say(MESSAGE=node_hi)
node_done = \"done\"
node_think = Think(MESSAGE=node_done)
node_flag.THEN -> node_wait
node_wait.THEN -> node_think
node_keyHat.THEN -> node_say
",
    );
    let events = EventSchedule::new(vec![Event::flag(0), Event::key_down(500, "space")]).unwrap();
    let r = run(&p, &events, &RunConfig::default());
    assert_eq!(r.behavior_log, ["waited 1 secs", "said: hi", "thought: done"]);
}

#[test]
fn stop_all_ends_everything() {
    let r = run_flag(
        "node_flag = WhenFlagClicked()
node_all = \"all\"
node_stop = Stop(@OPTION=node_all)
node_hi = \"hi\"
node_say = Say(MESSAGE=node_hi)
node_flag.THEN -> node_stop
node_stop.THEN -> node_say
",
    );
    assert_eq!(r.behavior_log, ["stopped all"]);
    assert_eq!(r.termination, Termination::Stopped);
}

#[test]
fn stop_this_script_leaves_others() {
    let p = plan(
        "node_aflag = WhenFlagClicked()
node_bflag = WhenFlagClicked()
node_this = \"this script\"
node_stop = Stop(@OPTION=node_this)
node_hi = \"hi\"
node_say = Say(MESSAGE=node_hi)
node_aflag.THEN -> node_stop
node_bflag.THEN -> node_say
",
    );
    let r = run(&p, &EventSchedule::flag_only(), &RunConfig::default());
    assert_eq!(r.behavior_log, ["stopped this script", "said: hi"]);
    assert_eq!(r.termination, Termination::Completed);
}

#[test]
fn runtime_errors() {
    let cases = [
        ("node_a = 4\nnode_z = 0", "Divide(NUM1=node_a, NUM2=node_z)", "DivisionByZero"),
        ("node_a = 4\nnode_z = 0", "Mod(NUM1=node_a, NUM2=node_z)", "DivisionByZero"),
        ("node_a = 4\nnode_z = \"word\"", "Add(NUM1=node_a, NUM2=node_z)", "BadCoercion"),
        ("node_a = 4\nnode_z = \"\"", "LetterOf(LETTER=node_a, STRING=node_z)", "IndexOutOfRange"),
        ("node_z = \"score\"", "GetVariable(@VARIABLE=node_z)", "UndeclaredVariableAtRuntime"),
    ];
    for (decls, call, code) in cases {
        let text = format!(
            "node_flag = WhenFlagClicked()\n{decls}\nnode_val = {call}\nnode_say = Say(MESSAGE=node_val)\nnode_flag.THEN -> node_say\n"
        );
        let r = run_flag(&text);
        match &r.termination {
            Termination::RuntimeError(e) => assert_eq!(e.code(), code, "{call}"),
            other => panic!("{call}: {other}"),
        }
        assert!(r.behavior_log.is_empty());
    }
}

#[test]
fn variables() {
    let r = run_flag(
        "node_flag = WhenFlagClicked()
node_name = \"score\"
node_zero = 0
node_five = 5
node_set = SetVariable(@VARIABLE=node_name, VALUE=node_zero)
node_change = ChangeVariableBy(@VARIABLE=node_name, VALUE=node_five)
node_get = GetVariable(@VARIABLE=node_name)
node_say = Say(MESSAGE=node_get)
node_flag.THEN -> node_set
node_set.THEN -> node_change
node_change.THEN -> node_say
",
    );
    assert_eq!(r.behavior_log, ["set score to 0", "changed score by 5", "said: 5"]);
    assert_eq!(r.final_state.variables["score"], Scalar::Number(5.0));
    assert_eq!(r.final_state.to_json()["variables"]["score"], serde_json::json!(5));
}

fn num(id: &str, n: f64) -> Expr {
    Expr::Constant {
        node_id: id.into(),
        value: Scalar::Number(n),
    }
}

fn call(block: &str, args: Vec<(&str, Expr)>) -> Expr {
    Expr::Reporter {
        node_id: "node_r".into(),
        block: block.into(),
        fields: vec![],
        args: args.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    }
}

fn math(op: &str, n: f64) -> Expr {
    Expr::Reporter {
        node_id: "node_m".into(),
        block: "MathFunction".into(),
        fields: vec![(
            "OPERATOR".into(),
            crate::compiler::FieldBinding {
                node_id: "node_op".into(),
                value: Scalar::String(op.into()),
            },
        )],
        args: vec![("NUM".into(), num("node_n", n))],
    }
}

fn eval(e: &Expr) -> Result<Scalar, RuntimeError> {
    eval_expr(e, &SpriteState::default(), &mut ChaCha8Rng::seed_from_u64(1))
}

#[test]
fn expression_semantics() {
    let two_args = |b: &str, x: f64, y: f64| call(b, vec![("NUM1", num("node_a", x)), ("NUM2", num("node_b", y))]);
    assert_eq!(eval(&two_args("Add", 2.0, 3.0)), Ok(Scalar::Number(5.0)));
    assert_eq!(eval(&two_args("Mod", -7.0, 3.0)), Ok(Scalar::Number(2.0)));
    assert_eq!(eval(&math("sqrt", 9.0)), Ok(Scalar::Number(3.0)));
    assert_eq!(eval(&call("Round", vec![("NUM", num("node_a", 2.5))])), Ok(Scalar::Number(3.0)));
    let eq = call(
        "Equals",
        vec![
            ("OPERAND1", num("node_a", 10.0)),
            (
                "OPERAND2",
                Expr::Constant {
                    node_id: "node_b".into(),
                    value: Scalar::String("10.0".into()),
                },
            ),
        ],
    );
    assert_eq!(eval(&eq), Ok(Scalar::Bool(true)));
    assert_eq!(eval(&call("XPosition", vec![])), Ok(Scalar::Number(0.0)));
}

#[test]
fn random_is_integral_for_integer_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let e = call("Random", vec![("FROM", num("node_a", 10.0)), ("TO", num("node_b", 1.0))]);
    let mut counts = [0u32; 10];
    let draws = 10_000;
    for _ in 0..draws {
        let Scalar::Number(n) = eval_expr(&e, &SpriteState::default(), &mut rng).unwrap() else {
            panic!("not a number");
        };
        assert_eq!(n.fract(), 0.0);
        assert!((1.0..=10.0).contains(&n));
        counts[n as usize - 1] += 1;
    }
    let expected = draws as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.877, "chi2 = {chi2}");
}

#[test]
fn random_is_real_for_fractional_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = call("Random", vec![("FROM", num("node_a", 0.5)), ("TO", num("node_b", 1.5))]);
    let mut fractional = false;
    for _ in 0..100 {
        let Scalar::Number(n) = eval_expr(&e, &SpriteState::default(), &mut rng).unwrap() else {
            panic!("not a number");
        };
        assert!((0.5..=1.5).contains(&n));
        fractional |= n.fract() != 0.0;
    }
    assert!(fractional);
}

const RANDOM_WALK: &str = "\
node_flag = WhenFlagClicked()
node_lo = -10
node_hi = 10
node_three = 3
node_rand = Random(FROM=node_lo, TO=node_hi)
node_loop = Repeat(TIMES=node_three)
node_move = MoveSteps(STEPS=node_rand)
node_turn = TurnLeft(DEGREES=node_rand)
node_go = GoToRandom()
node_flag.THEN -> node_loop
node_loop.SUBSTACK -> node_move
node_move.THEN -> node_turn
node_loop.THEN -> node_go
";

#[test]
fn deterministic_for_a_seed() {
    let p = plan(RANDOM_WALK);
    let config = RunConfig {
        seed: 42,
        ..RunConfig::default()
    };
    let runs: Vec<RunResult> = (0..3).map(|_| run(&p, &EventSchedule::flag_only(), &config)).collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    assert_eq!(runs[0].behavior_log.len(), 7);
    let other = run(&p, &EventSchedule::flag_only(), &RunConfig { seed: 43, ..config });
    assert_ne!(runs[0].behavior_log, other.behavior_log);
}

#[test]
fn script_text_runs_the_same() {
    let p = plan(RANDOM_WALK);
    let again = parse_script(&emit_script(&p)).unwrap();
    let config = RunConfig::default();
    assert_eq!(
        run(&p, &EventSchedule::flag_only(), &config),
        run(&again, &EventSchedule::flag_only(), &config)
    );
}

#[test]
fn schedule_json() {
    let s = EventSchedule::from_json(r#"[{"t":0,"event":"flag_clicked"},{"t":5,"event":"key_down","key":"a"}]"#)
        .unwrap();
    assert_eq!(s.events()[1], Event::key_down(5, "a"));
    assert_eq!(EventSchedule::from_json(&s.to_json()).unwrap(), s);
    assert!(matches!(
        EventSchedule::from_json(r#"[{"t":5,"event":"flag_clicked"},{"t":1,"event":"flag_clicked"}]"#),
        Err(ScheduleError::Unordered { index: 1, t: 1 })
    ));
    assert!(matches!(
        EventSchedule::from_json(r#"[{"t":0,"event":"key_down"}]"#),
        Err(ScheduleError::MissingKey { .. })
    ));
}

#[test]
fn state_json() {
    let s = SpriteState::default();
    assert_eq!(
        s.to_json(),
        serde_json::json!({"x": 0, "y": 0, "direction": 90, "size": 100, "variables": {}})
    );
}

#[test]
fn config_caps_must_be_positive() {
    let c = RunConfig {
        max_ticks: 0,
        ..RunConfig::default()
    };
    assert_eq!(c.check(), Err(ConfigError { name: "max_ticks" }));
    assert!(RunConfig::default().check().is_ok());
}
