use crate::terms::{PredInd, Term};

use super::store::Store;

/// Control constructs and builtins; none of these may be redefined.
const BUILTINS: &[(&str, usize)] = &[
    (",", 2),
    (";", 2),
    ("->", 2),
    ("\\+", 1),
    ("call", 1),
    ("true", 0),
    ("fail", 0),
    ("false", 0),
    ("=", 2),
    ("var", 1),
    ("nonvar", 1),
    ("ground", 1),
    ("is", 2),
    ("<", 2),
    (">", 2),
    (">=", 2),
    ("=<", 2),
    ("=:=", 2),
    ("=\\=", 2),
    ("assertz", 1),
    ("assert", 1),
    ("retract", 1),
    ("catch", 3),
    ("throw", 1),
    ("when", 2),
    ("btid", 2),
    ("bt_register", 1),
    ("backjump", 1),
];

pub fn is_builtin(pi: &PredInd) -> bool {
    BUILTINS.iter().any(|(n, a)| *n == &*pi.name && *a == pi.arity)
}

pub(crate) fn instantiation_error() -> Term {
    Term::atom("instantiation_error")
}

pub(crate) fn type_error(kind: &str, culprit: Term) -> Term {
    Term::compound("type_error", vec![Term::atom(kind), culprit])
}

fn indicator_term(name: &str, arity: usize) -> Term {
    Term::compound("/", vec![Term::atom(name), Term::int(arity as i64)])
}

pub(crate) fn permission_error(action: &str, kind: &str, pi: &PredInd) -> Term {
    Term::compound(
        "permission_error",
        vec![Term::atom(action), Term::atom(kind), indicator_term(&pi.name, pi.arity)],
    )
}

pub(crate) fn domain_error(kind: &str, culprit: Term) -> Term {
    Term::compound("domain_error", vec![Term::atom(kind), culprit])
}

/// Evaluates an integer expression; errors are returned as balls.
pub(crate) fn eval(store: &Store, t: &Term) -> Result<i64, Term> {
    match store.deref(t) {
        Term::Int(n) => Ok(n),
        Term::Var(_) => Err(instantiation_error()),
        Term::Compound(name, args) => {
            let overflow = || Term::compound("evaluation_error", vec![Term::atom("int_overflow")]);
            match (&*name, args.len()) {
                ("+", 2) => eval(store, &args[0])?
                    .checked_add(eval(store, &args[1])?)
                    .ok_or_else(overflow),
                ("-", 2) => eval(store, &args[0])?
                    .checked_sub(eval(store, &args[1])?)
                    .ok_or_else(overflow),
                ("*", 2) => eval(store, &args[0])?
                    .checked_mul(eval(store, &args[1])?)
                    .ok_or_else(overflow),
                ("-", 1) => eval(store, &args[0])?.checked_neg().ok_or_else(overflow),
                ("max", 2) => Ok(eval(store, &args[0])?.max(eval(store, &args[1])?)),
                ("min", 2) => Ok(eval(store, &args[0])?.min(eval(store, &args[1])?)),
                (n, a) => Err(type_error("evaluable", indicator_term(n, a))),
            }
        }
        Term::Atom(name) => Err(type_error("evaluable", indicator_term(&name, 0))),
    }
}

pub(crate) fn compare(op: &str, a: i64, b: i64) -> bool {
    match op {
        "<" => a < b,
        ">" => a > b,
        ">=" => a >= b,
        "=<" => a <= b,
        "=:=" => a == b,
        "=\\=" => a != b,
        _ => unreachable!("not a comparison: {op}"),
    }
}
