//! Verification harness: CNF corpus, oracle, the SAT programs, answer and
//! trace comparison.

pub mod check;
pub mod cnf;
pub mod programs;
pub mod traces;

pub use check::{answers_cover_oracle, encode, project_answers, Projected, Verdict};
pub use cnf::{oracle, Cnf, Lit};
pub use programs::Named;
pub use traces::{check_level_invariant, diff_traces, project_trace, Divergence};
