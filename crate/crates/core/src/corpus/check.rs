//! Encoding CNFs as terms, running the programs on them, and comparing the
//! answers with the oracle.

use crate::engine::{solve, Answer, Mode, Solution, SolveOptions};
use crate::reader::Query;
use crate::terms::{Term, Var, VarGen};

use super::cnf::{oracle, Assignment, Cnf};
use super::programs::Named;

/// Engine variable name for a CNF variable: capitalised, or prefixed when
/// that does not give a variable name.
pub fn var_name(cnf_var: &str) -> String {
    let mut cs = cnf_var.chars();
    match cs.next() {
        Some(c) if c.is_ascii_lowercase() => format!("{}{}", c.to_ascii_uppercase(), cs.as_str()),
        _ => format!("V_{cnf_var}"),
    }
}

/// The CNF as `[[true-X, false-Y], ...]`, one named variable per CNF variable.
pub fn encode(cnf: &Cnf) -> (Term, Vec<Var>) {
    let mut gen = VarGen::new();
    let vars: Vec<Var> = cnf.variables.iter().map(|v| gen.fresh(Some(var_name(v).as_str().into()))).collect();
    let clauses = cnf
        .clauses
        .iter()
        .map(|c| {
            Term::list(
                c.iter()
                    .map(|l| Term::pair(Term::atom(if l.positive { "true" } else { "false" }), Term::Var(vars[l.var].clone())))
                    .collect(),
            )
        })
        .collect();
    (Term::list(clauses), vars)
}

/// The initial query of `program` for `cnf`.
pub fn query(program: Named, cnf: &Cnf) -> Query {
    let (list, vars) = encode(cnf);
    let entry = program.entry();
    let mut args = vec![list];
    if entry.arity >= 2 {
        args.push(Term::int(0));
    }
    if entry.arity == 3 {
        args.push(Term::int(-1));
    }
    Query { goal: Term::compound(&entry.name, args), vars }
}

pub fn run(program: Named, cnf: &Cnf, trace: bool) -> Solution {
    let mode = if program.native() { Mode::NativeBj } else { Mode::Iso };
    let mut opts = SolveOptions::mode(mode);
    opts.trace = trace;
    solve(&program.program(), &query(program, cnf), &opts)
}

/// Truth values of an answer, indexed like the CNF variables; `None` for
/// variables the answer leaves open. Levels are ignored.
pub type Projected = Vec<Option<bool>>;

pub fn project_answer(cnf: &Cnf, answer: &Answer) -> Projected {
    cnf.variables
        .iter()
        .map(|v| {
            let t = answer.get(&var_name(v))?;
            let value = if t.is_functor(",", 2) { &t.args()[1] } else { t };
            match value.name() {
                Some("true") if !value.is_var() => Some(true),
                Some("false") if !value.is_var() => Some(false),
                _ => None,
            }
        })
        .collect()
}

pub fn project_answers(cnf: &Cnf, sol: &Solution) -> Vec<Projected> {
    sol.answers.iter().map(|a| project_answer(cnf, a)).collect()
}

fn completions(p: &Projected) -> Vec<Assignment> {
    let mut out = vec![Vec::with_capacity(p.len())];
    for v in p {
        let choices: &[bool] = match v {
            Some(true) => &[true],
            Some(false) => &[false],
            None => &[false, true],
        };
        out = out
            .into_iter()
            .flat_map(|prefix: Assignment| {
                choices.iter().map(move |&b| {
                    let mut a = prefix.clone();
                    a.push(b);
                    a
                })
            })
            .collect();
    }
    out
}

fn covers(p: &Projected, a: &[bool]) -> bool {
    p.iter().zip(a).all(|(v, &b)| v.is_none_or(|v| v == b))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    /// Completions of answers that falsify the CNF.
    pub unsound: Vec<Assignment>,
    /// Models no answer covers.
    pub missing: Vec<Assignment>,
}

impl Verdict {
    pub fn sound(&self) -> bool {
        self.unsound.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn holds(&self) -> bool {
        self.sound() && self.complete()
    }
}

/// Soundness: every completion of every answer satisfies the CNF.
/// Completeness: every model is covered by some answer.
pub fn answers_cover_oracle(answers: &[Projected], cnf: &Cnf) -> Verdict {
    let models = oracle(cnf).expect("corpus CNFs are small");
    let mut v = Verdict::default();
    for a in answers {
        for c in completions(a) {
            if !cnf.satisfied_by(&c) && !v.unsound.contains(&c) {
                v.unsound.push(c);
            }
        }
    }
    v.missing = models.into_iter().filter(|m| !answers.iter().any(|a| covers(a, m))).collect();
    v
}

/// Models covered by the answers, in oracle order.
pub fn covered_models(answers: &[Projected], cnf: &Cnf) -> Vec<Assignment> {
    oracle(cnf)
        .expect("corpus CNFs are small")
        .into_iter()
        .filter(|m| answers.iter().any(|a| covers(a, m)))
        .collect()
}
