use super::lexer::is_symbol_char;
use super::{infix_op, prefix_op, OpType, Program};
use std::collections::HashMap;

use crate::terms::{Clause, Term, Var};

/// Formats a term in argument context (priority 999), so top-level
/// conjunctions come out parenthesised: `(0,true)`.
pub fn format(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 999, false);
    out
}

/// Formats a clause as a `.`-terminated source sentence.
/// An anonymous variable occurring more than once is written as `_G<serial>`
/// so that the text reads back with the sharing intact.
pub fn format_clause(c: &Clause) -> String {
    let mut seen: HashMap<u64, usize> = HashMap::new();
    for v in occurrences(&c.head).into_iter().chain(occurrences(&c.body)) {
        if v.name.as_deref() == Some("_") {
            *seen.entry(v.serial).or_default() += 1;
        }
    }
    let c = &if seen.values().any(|&n| n > 1) {
        let mut named = |v: &Var| {
            let shared = v.name.as_deref() == Some("_") && seen[&v.serial] > 1;
            Term::Var(if shared { Var { serial: v.serial, name: None } } else { v.clone() })
        };
        Clause::new(c.head.map_vars(&mut named), c.body.map_vars(&mut named))
    } else {
        c.clone()
    };
    let mut out = String::new();
    write_term(&mut out, &c.head, 1199, false);
    if !c.is_fact() {
        out.push_str(" :-");
        let goals = c.body.conjuncts();
        for (i, g) in goals.iter().enumerate() {
            out.push_str("\n    ");
            write_term(&mut out, g, 999, false);
            if i + 1 < goals.len() {
                out.push(',');
            }
        }
    }
    out.push('.');
    out
}

fn occurrences(t: &Term) -> Vec<Var> {
    let mut out = Vec::new();
    t.for_each_var(&mut |v| out.push(v.clone()));
    out
}

pub fn format_program(p: &Program) -> String {
    let mut out = String::new();
    for pi in &p.dynamic {
        out.push_str(&format!(":- dynamic({}/{}).\n", atom_text(&pi.name), pi.arity));
    }
    if !p.dynamic.is_empty() {
        out.push('\n');
    }
    for (i, clauses) in p.procedures.values().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for c in clauses {
            out.push_str(&format_clause(c));
            out.push('\n');
        }
    }
    out
}

pub(crate) fn atom_text(name: &str) -> String {
    let bare = match name {
        "[]" | "!" | ";" | "{}" => true,
        "" => false,
        _ => {
            let mut cs = name.chars();
            let first = cs.next().unwrap();
            (first.is_lowercase() && name.chars().all(|c| c.is_alphanumeric() || c == '_'))
                || name.chars().all(is_symbol_char)
        }
    };
    if bare {
        name.to_string()
    } else {
        let mut s = String::from("'");
        for c in name.chars() {
            match c {
                '\'' => s.push_str("\\'"),
                '\\' => s.push_str("\\\\"),
                '\n' => s.push_str("\\n"),
                '\t' => s.push_str("\\t"),
                c => s.push(c),
            }
        }
        s.push('\'');
        s
    }
}

fn is_op_atom(name: &str) -> bool {
    infix_op(name).is_some() || prefix_op(name).is_some()
}

/// Appends `s`, separating it from `out` by a space if the two would
/// otherwise lex as one symbolic token.
fn push_glued(out: &mut String, s: &str) {
    let joins = out.chars().last().is_some_and(is_symbol_char)
        && s.chars().next().is_some_and(is_symbol_char);
    if joins {
        out.push(' ');
    }
    out.push_str(s);
}

fn write_term(out: &mut String, t: &Term, max: u16, operand: bool) {
    match t {
        Term::Var(v) => out.push_str(&v.display_name()),
        Term::Int(n) => {
            if *n < 0 && operand {
                out.push_str(&format!("({n})"));
            } else {
                push_glued(out, &n.to_string());
            }
        }
        Term::Atom(name) => {
            let text = atom_text(name);
            if operand && is_op_atom(name) {
                out.push('(');
                out.push_str(&text);
                out.push(')');
            } else {
                push_glued(out, &text);
            }
        }
        Term::Compound(name, args) => {
            if &**name == "." && args.len() == 2 {
                write_list(out, t);
                return;
            }
            if args.len() == 2 {
                if let Some(op) = infix_op(name) {
                    let p = op.priority;
                    let (lmax, rmax) = match op.kind {
                        OpType::Xfx => (p - 1, p - 1),
                        OpType::Xfy => (p - 1, p),
                        _ => (p, p - 1),
                    };
                    let wrap = p > max;
                    if wrap {
                        out.push('(');
                    }
                    write_term(out, &args[0], lmax, true);
                    let sep = match &**name {
                        "," => ",".to_string(),
                        ":-" => " :- ".to_string(),
                        n if n.chars().all(char::is_alphabetic) => format!(" {n} "),
                        n => n.to_string(),
                    };
                    push_glued(out, &sep);
                    let mut rhs = String::new();
                    write_term(&mut rhs, &args[1], rmax, true);
                    push_glued(out, &rhs);
                    if wrap {
                        out.push(')');
                    }
                    return;
                }
            }
            if args.len() == 1 {
                if let Some(op) = prefix_op(name) {
                    let p = op.priority;
                    let amax = if op.kind == OpType::Fy { p } else { p - 1 };
                    let wrap = p > max;
                    if wrap {
                        out.push('(');
                    }
                    push_glued(out, &atom_text(name));
                    out.push(' ');
                    write_term(out, &args[0], amax, true);
                    if wrap {
                        out.push(')');
                    }
                    return;
                }
            }
            push_glued(out, &atom_text(name));
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_term(out, a, 999, false);
            }
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, t: &Term) {
    out.push('[');
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Compound(n, args) if &**n == "." && args.len() == 2 => {
                if !first {
                    out.push(',');
                }
                first = false;
                write_term(out, &args[0], 999, false);
                cur = &args[1];
            }
            Term::Atom(n) if &**n == "[]" => break,
            tail => {
                out.push('|');
                write_term(out, tail, 999, false);
                break;
            }
        }
    }
    out.push(']');
}
