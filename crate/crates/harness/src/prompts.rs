//! The twenty benchmark prompts, each paired with a default event schedule
//! and a permissive expectation checker.
//!
//! Checkers test necessary conditions only. A program that passes may still
//! be judged wrong by a human, which is why annotations override them.

use std::sync::LazyLock;

use graphblocks::runtime::{Event, EventSchedule, RunResult, Termination};

const PROMPT_TEXTS: &str = include_str!("../templates/prompts.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptCase {
    /// 1 through 20.
    pub id: u8,
    pub text: String,
}

static PROMPTS: LazyLock<Vec<PromptCase>> = LazyLock::new(|| {
    let cases: Vec<PromptCase> = PROMPT_TEXTS
        .lines()
        .enumerate()
        .map(|(i, text)| PromptCase {
            id: i as u8 + 1,
            text: text.to_string(),
        })
        .collect();
    assert_eq!(cases.len(), 20, "prompts.txt must hold one prompt per line");
    cases
});

pub fn prompts() -> &'static [PromptCase] {
    &PROMPTS
}

pub fn prompt(id: u8) -> Option<&'static PromptCase> {
    PROMPTS.get(usize::from(id).checked_sub(1)?)
}

/// Tick at which a prompt's terminating key goes down.
const LATE_KEY: u64 = 10_000;
/// Tick at which a key-triggered prompt's key goes down.
const TRIGGER_KEY: u64 = 100;
/// Tick of the "a" press in the wait-until prompt.
const WAIT_KEY: u64 = 3_000;

impl PromptCase {
    /// The key a prompt's script reacts to, with the tick it is pressed.
    fn key(&self) -> Option<(&'static str, u64)> {
        Some(match self.id {
            1 => ("space", LATE_KEY),
            2 | 14 => ("r", TRIGGER_KEY),
            3 => ("s", TRIGGER_KEY),
            5 => ("q", LATE_KEY),
            7 => ("down arrow", TRIGGER_KEY),
            10 => ("d", TRIGGER_KEY),
            17 => ("left arrow", TRIGGER_KEY),
            18 => ("a", WAIT_KEY),
            20 => ("x", TRIGGER_KEY),
            _ => return None,
        })
    }

    /// Flag click at tick 0, plus the prompt's key press when it has one.
    pub fn schedule(&self) -> EventSchedule {
        let mut events = vec![Event::flag(0)];
        if let Some((key, t)) = self.key() {
            events.push(Event::key_down(t, key));
        }
        EventSchedule::new(events).expect("default schedules are ordered")
    }

    /// What the checker looks for, in one line.
    pub fn criterion(&self) -> &'static str {
        match self.id {
            1 => "at least four moves and four 90 degree turns, ending once space is pressed",
            2 => "sets size, ending between 50 and 150",
            3 => "says a message holding at least two letters and three digits",
            4 => "says at least three numbers that grow overall",
            5 => "at least two moves, ending once q is pressed",
            6 => "repeats moved 50 and turned right 45 until a cap stops it",
            7 => "final size is 90",
            8 => "final x is above 150 and at most 160, and the loop ends",
            9 => "says exactly `X is 0`",
            10 => "final position is (30, 6)",
            11 => "three moves with growing step counts, and at least three turns",
            12 => "never says `Too big!` because the size starts at 100",
            13 => "says a message of at least three words",
            14 => "says a message containing a whole number from 1 to 6",
            15 => "says at least five numbers, never decreasing, ending at 100",
            16 => "size goes up at least twice and down at least twice",
            17 => "final x is -20 and says `Going left!`",
            18 => "goes to (0, 0) no earlier than the a press",
            19 => "says Tick and Tock alternately at least three times each",
            20 => "says a single word",
            _ => "",
        }
    }

    /// Applies the checker to a completed run.
    pub fn check(&self, r: &RunResult) -> bool {
        let msgs = messages(r);
        let s = &r.final_state;
        let ended = matches!(r.termination, Termination::Completed | Termination::Stopped);
        match self.id {
            1 => {
                let turns = r
                    .behavior_log
                    .iter()
                    .filter(|l| *l == "turned right 90 degrees" || *l == "turned left 90 degrees")
                    .count();
                count_prefix(r, "moved ") >= 4 && turns >= 4 && ended
            }
            2 => count_prefix(r, "set size to ") >= 1 && (50.0..=150.0).contains(&s.size),
            3 => msgs.iter().any(|m| {
                m.chars().filter(char::is_ascii_alphabetic).count() >= 2
                    && m.chars().filter(char::is_ascii_digit).count() >= 3
            }),
            4 => {
                let nums: Vec<f64> = msgs.iter().filter_map(|m| first_number(m)).collect();
                nums.len() >= 3 && nums.last() > nums.first()
            }
            5 => {
                let moves = ["went to ", "glided to ", "moved "].iter().map(|p| count_prefix(r, p)).sum::<usize>();
                moves >= 2 && ended
            }
            6 => {
                let count = |line: &str| r.behavior_log.iter().filter(|l| *l == line).count();
                count("moved 50 steps") >= 2
                    && count("turned right 45 degrees") >= 2
                    && matches!(r.termination, Termination::LoopCap | Termination::TickCap)
            }
            7 => s.size == 90.0,
            8 => s.x > 150.0 && s.x <= 160.0 && ended,
            9 => msgs.contains(&"X is 0"),
            10 => s.x == 30.0 && s.y == 6.0,
            11 => {
                let steps = numbers_after(r, "moved ");
                let growing = steps.windows(3).any(|w| w[0] < w[1] && w[1] < w[2]);
                let turns = count_prefix(r, "turned ");
                growing && turns >= 3
            }
            12 => !msgs.iter().any(|m| m.contains("Too big!")),
            13 => msgs.iter().any(|m| m.split_whitespace().count() >= 3),
            14 => msgs.iter().any(|m| {
                m.split(|c: char| !c.is_ascii_digit())
                    .filter_map(|t| t.parse::<u32>().ok())
                    .any(|n| (1..=6).contains(&n))
            }),
            15 => {
                let nums: Vec<f64> = msgs.iter().filter_map(|m| m.trim().parse().ok()).collect();
                nums.len() >= 5 && nums.windows(2).all(|w| w[0] <= w[1]) && nums.last() == Some(&100.0)
            }
            16 => {
                let (up, down) = size_steps(r);
                up >= 2 && down >= 2
            }
            17 => s.x == -20.0 && msgs.contains(&"Going left!"),
            18 => {
                let jumped = r
                    .behavior_log
                    .iter()
                    .any(|l| l == "went to (0, 0)" || l.starts_with("glided to (0, 0) "));
                jumped && r.ticks >= WAIT_KEY
            }
            19 => {
                msgs.len() >= 6
                    && msgs.iter().enumerate().all(|(i, m)| *m == ["Tick", "Tock"][i % 2])
            }
            20 => msgs
                .iter()
                .any(|m| !m.is_empty() && m.chars().all(char::is_alphabetic)),
            _ => false,
        }
    }
}

/// Said and thought messages, with any duration suffix removed.
pub fn messages(r: &RunResult) -> Vec<&str> {
    r.behavior_log
        .iter()
        .filter_map(|l| l.strip_prefix("said: ").or_else(|| l.strip_prefix("thought: ")))
        .map(strip_duration)
        .collect()
}

fn strip_duration(m: &str) -> &str {
    if let Some(head) = m.strip_suffix(" secs") {
        if let Some((text, secs)) = head.rsplit_once(" for ") {
            if secs.parse::<f64>().is_ok() {
                return text;
            }
        }
    }
    m
}

fn count_prefix(r: &RunResult, prefix: &str) -> usize {
    r.behavior_log.iter().filter(|l| l.starts_with(prefix)).count()
}

/// Leading numbers of every log line with the given prefix.
fn numbers_after(r: &RunResult, prefix: &str) -> Vec<f64> {
    r.behavior_log
        .iter()
        .filter_map(|l| l.strip_prefix(prefix))
        .filter_map(|rest| rest.split_whitespace().next()?.parse().ok())
        .collect()
}

fn first_number(m: &str) -> Option<f64> {
    m.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
        .find_map(|t| t.parse().ok())
}

/// Counts of size increases and decreases over the log.
fn size_steps(r: &RunResult) -> (usize, usize) {
    let mut size = 100.0;
    let (mut up, mut down) = (0, 0);
    for line in &r.behavior_log {
        let next = if let Some(v) = line.strip_prefix("changed size by ") {
            v.parse::<f64>().ok().map(|d| size + d)
        } else if let Some(v) = line.strip_prefix("set size to ") {
            v.parse::<f64>().ok()
        } else {
            None
        };
        if let Some(next) = next {
            if next > size {
                up += 1;
            } else if next < size {
                down += 1;
            }
            size = next;
        }
    }
    (up, down)
}
