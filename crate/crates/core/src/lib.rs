//! Prolog core with exception handling, native backjumping and coroutining,
//! plus source transformations and a SAT benchmark corpus.

pub mod coroutine;
pub mod corpus;
pub mod engine;
pub mod reader;
pub mod terms;
pub mod transform;

pub use engine::{solve, Answer, EngineError, Mode, Solution, SolveOptions};
pub use reader::{parse_program, parse_query, Program, Query};
pub use terms::{Clause, PredInd, Term};
