//! LD-resolution engine.
//!
//! Depth-first, left-to-right, chronological backtracking over a
//! choice-point stack with a binding trail. On top of that:
//!
//! * `catch/3` / `throw/1`. Catch frames live on the choice-point stack. A
//!   frame stops being a candidate when its goal exits, and becomes one
//!   again when backtracking re-enters the goal (the exit is trailed).
//! * `btid/2`, `bt_register/1` and `backjump/1` (native mode only), which
//!   move control straight to the next alternative of a registered call.
//! * `assertz/1` / `retract/1` on dynamic predicates.
//! * `when/2` coroutining (see [`crate::coroutine`]).
//!
//! Every call gets a choice point, even when no alternative clause remains,
//! so that each call's Fail port is observable.

mod builtins;
mod machine;
mod store;
pub mod trace;

use thiserror::Error;

use crate::reader::{Program, Query};
use crate::terms::{PredInd, Term};

pub use builtins::is_builtin;
pub use machine::{ChoicePointInfo, Machine, Step};
pub use trace::{NodeId, Port, TraceEvent};

pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// ISO-style: `backjump/1` is not available.
    #[default]
    Iso,
    /// Native backjumping enabled.
    NativeBj,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: Mode,
    pub max_steps: u64,
    pub max_solutions: Option<usize>,
    /// Record trace events.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Iso, max_steps: DEFAULT_MAX_STEPS, max_solutions: None, trace: true }
    }
}

impl SolveOptions {
    pub fn mode(mode: Mode) -> Self {
        SolveOptions { mode, ..Self::default() }
    }

    pub fn without_trace(mut self) -> Self {
        self.trace = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("uncaught exception: {0}")]
    UncaughtBall(Term),
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("unknown procedure {0}")]
    UnknownPredicate(PredInd),
    #[error("{0} is not supported in this mode")]
    UnsupportedBuiltin(PredInd),
    #[error("backjump target {0} is not registered on the current stack")]
    UnknownTarget(Term),
}

/// One answer: bindings of the query variables plus still-blocked goals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Vec<(String, Term)>,
    pub residue: Vec<Term>,
}

impl Answer {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self
            .bindings
            .iter()
            .map(|(n, t)| format!("{n}={}", crate::reader::format(t)))
            .collect();
        if !self.residue.is_empty() {
            let r: Vec<String> = self.residue.iter().map(crate::reader::format).collect();
            parts.push(format!("residue:[{}]", r.join(",")));
        }
        if parts.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Solution {
    pub answers: Vec<Answer>,
    pub trace: Vec<TraceEvent>,
    /// Set when the run stopped on an error; answers and trace are partial.
    pub error: Option<EngineError>,
    pub steps: u64,
}

/// Runs `query` against `program` and collects answers, trace and any error.
pub fn solve(program: &Program, query: &Query, opts: &SolveOptions) -> Solution {
    let mut m = Machine::new(program, query, opts);
    let mut answers = Vec::new();
    let mut error = None;
    loop {
        if opts.max_solutions.is_some_and(|n| answers.len() >= n) {
            break;
        }
        match m.next_answer() {
            Ok(Some(a)) => answers.push(a),
            Ok(None) => break,
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    Solution { answers, steps: m.steps(), trace: m.take_trace(), error }
}
