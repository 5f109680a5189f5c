//! Reader and writer for the Prolog subset used by the engine.
//!
//! The operator table is fixed (see [`OPS`]); there are no user-defined
//! operators. Comments run from `%` to end of line.

mod lexer;
mod parser;
mod writer;

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::terms::{Clause, GoalTree, PredInd, Term, Var, VarGen};

pub use writer::{format, format_clause, format_program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown operator `{op}` at {line}:{col}")]
    UnknownOperator { line: usize, col: usize, op: String },
    #[error("arity overflow at {line}:{col}: {arity} arguments (max {MAX_ARITY})")]
    ArityOverflow { line: usize, col: usize, arity: usize },
    #[error("invalid clause at {line}:{col}: {msg}")]
    InvalidClause { line: usize, col: usize, msg: String },
}

pub const MAX_ARITY: usize = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
}

#[derive(Clone, Copy, Debug)]
pub struct Op {
    pub name: &'static str,
    pub priority: u16,
    pub kind: OpType,
}

pub const OPS: &[Op] = &[
    Op { name: ":-", priority: 1200, kind: OpType::Xfx },
    Op { name: ":-", priority: 1200, kind: OpType::Fx },
    Op { name: ";", priority: 1100, kind: OpType::Xfy },
    Op { name: "->", priority: 1050, kind: OpType::Xfy },
    Op { name: ",", priority: 1000, kind: OpType::Xfy },
    Op { name: "\\+", priority: 900, kind: OpType::Fy },
    Op { name: "=", priority: 700, kind: OpType::Xfx },
    Op { name: "is", priority: 700, kind: OpType::Xfx },
    Op { name: "<", priority: 700, kind: OpType::Xfx },
    Op { name: ">", priority: 700, kind: OpType::Xfx },
    Op { name: ">=", priority: 700, kind: OpType::Xfx },
    Op { name: "=<", priority: 700, kind: OpType::Xfx },
    Op { name: "=:=", priority: 700, kind: OpType::Xfx },
    Op { name: "=\\=", priority: 700, kind: OpType::Xfx },
    Op { name: "+", priority: 500, kind: OpType::Yfx },
    Op { name: "-", priority: 500, kind: OpType::Yfx },
    Op { name: "*", priority: 400, kind: OpType::Yfx },
    Op { name: "/", priority: 400, kind: OpType::Yfx },
];

pub fn infix_op(name: &str) -> Option<Op> {
    OPS.iter()
        .copied()
        .find(|o| o.name == name && matches!(o.kind, OpType::Xfx | OpType::Xfy | OpType::Yfx))
}

pub fn prefix_op(name: &str) -> Option<Op> {
    OPS.iter()
        .copied()
        .find(|o| o.name == name && matches!(o.kind, OpType::Fy | OpType::Fx))
}

/// A program: procedures in first-appearance order, clauses in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub procedures: IndexMap<PredInd, Vec<Clause>>,
    pub dynamic: BTreeSet<PredInd>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_clause(&mut self, clause: Clause) {
        self.procedures.entry(clause.indicator()).or_default().push(clause);
    }

    pub fn procedure(&self, pi: &PredInd) -> Option<&[Clause]> {
        self.procedures.get(pi).map(Vec::as_slice)
    }

    pub fn clause_count(&self) -> usize {
        self.procedures.values().map(Vec::len).sum()
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.procedures.values().flatten()
    }

    /// Appends every clause and dynamic declaration of `other`.
    pub fn extend(&mut self, other: &Program) {
        for c in other.clauses() {
            self.add_clause(c.clone());
        }
        self.dynamic.extend(other.dynamic.iter().cloned());
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_program(self))
    }
}

/// A parsed query with its named variables in order of first occurrence.
#[derive(Clone, Debug)]
pub struct Query {
    pub goal: Term,
    pub vars: Vec<Var>,
}

impl Query {
    /// Wraps an already-built goal; named variables become answer variables.
    pub fn from_goal(goal: Term) -> Self {
        let vars = goal.vars().into_iter().filter(|v| v.name.is_some()).collect();
        Query { goal, vars }
    }

    pub fn tree(&self) -> GoalTree {
        GoalTree::from_term(&self.goal)
    }

    /// Variables reported in answers (named, not starting with `_`).
    pub fn answer_vars(&self) -> impl Iterator<Item = &Var> {
        self.vars
            .iter()
            .filter(|v| v.name.as_deref().is_some_and(|n| !n.starts_with('_')))
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with(text, &mut VarGen::new())
}

pub fn parse_program_with(text: &str, gen: &mut VarGen) -> Result<Program, ParseError> {
    let mut p = parser::Parser::new(text, gen)?;
    let mut program = Program::new();
    while let Some((term, line, col)) = p.next_sentence()? {
        if term.is_functor(":-", 1) {
            directive(&mut program, &term.args()[0], line, col)?;
            continue;
        }
        let (head, body) = if term.is_functor(":-", 2) {
            (term.args()[0].clone(), term.args()[1].clone())
        } else {
            (term, Term::atom("true"))
        };
        check_head(&head, line, col)?;
        program.add_clause(Clause::new(head, body));
    }
    Ok(program)
}

fn check_head(head: &Term, line: usize, col: usize) -> Result<(), ParseError> {
    let invalid = |msg: String| ParseError::InvalidClause { line, col, msg };
    let Some(pi) = head.indicator() else {
        return Err(invalid(format!("clause head `{}` is not callable", format(head))));
    };
    if crate::engine::is_builtin(&pi) {
        return Err(invalid(format!("cannot redefine builtin {pi}")));
    }
    Ok(())
}

fn directive(program: &mut Program, d: &Term, line: usize, col: usize) -> Result<(), ParseError> {
    let invalid = |msg: String| ParseError::InvalidClause { line, col, msg };
    if !d.is_functor("dynamic", 1) {
        return Err(invalid(format!("unsupported directive `{}`", format(d))));
    }
    for spec in d.args()[0].conjuncts() {
        match (spec.is_functor("/", 2), spec.args()) {
            (true, [Term::Atom(name), Term::Int(arity)]) if *arity >= 0 => {
                program.dynamic.insert(PredInd { name: name.clone(), arity: *arity as usize });
            }
            _ => return Err(invalid(format!("bad dynamic declaration `{}`", format(&spec)))),
        }
    }
    Ok(())
}

/// Parses a query such as `X = a, throw(X)`; a trailing `.` is optional.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    parse_query_with(text, &mut VarGen::new())
}

pub fn parse_query_with(text: &str, gen: &mut VarGen) -> Result<Query, ParseError> {
    let mut p = parser::Parser::new(text, gen)?;
    let goal = p.single_term()?;
    let vars = p.named_vars();
    Ok(Query { goal, vars })
}

/// Parses one term (a trailing `.` is optional).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_query(text).map(|q| q.goal)
}
