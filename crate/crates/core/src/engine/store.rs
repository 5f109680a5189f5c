use std::collections::HashMap;

use crate::terms::{Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TrailEntry {
    Bind(u64),
    /// A catch frame's goal exited; undoing re-enters the goal.
    CatchExited(u64),
}

/// Variable bindings with an undo trail.
#[derive(Debug, Default)]
pub(crate) struct Store {
    bindings: HashMap<u64, Term>,
    trail: Vec<TrailEntry>,
}

impl Store {
    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    pub fn push(&mut self, e: TrailEntry) {
        self.trail.push(e);
    }

    pub fn is_bound(&self, v: &Var) -> bool {
        self.bindings.contains_key(&v.serial)
    }

    pub fn bind(&mut self, v: &Var, t: Term) {
        debug_assert!(!self.is_bound(v));
        self.bindings.insert(v.serial, t);
        self.trail.push(TrailEntry::Bind(v.serial));
    }

    /// Follows variable bindings until an unbound variable or a non-variable.
    pub fn deref(&self, t: &Term) -> Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.bindings.get(&v.serial) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.clone()
    }

    /// Applies all current bindings.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Compound(n, args) => {
                Term::Compound(n, args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other,
        }
    }

    /// Unifies without occurs check. On failure the partial bindings stay on
    /// the trail; callers undo to a mark taken beforehand.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((x, y)) = stack.pop() {
            let x = self.deref(&x);
            let y = self.deref(&y);
            match (&x, &y) {
                (Term::Var(v), Term::Var(w)) if v == w => {}
                (Term::Var(v), _) => self.bind(v, y.clone()),
                (_, Term::Var(w)) => self.bind(w, x.clone()),
                (Term::Atom(m), Term::Atom(n)) if m == n => {}
                (Term::Int(m), Term::Int(n)) if m == n => {}
                (Term::Compound(f, xs), Term::Compound(g, ys))
                    if f == g && xs.len() == ys.len() =>
                {
                    stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
                }
                _ => return false,
            }
        }
        true
    }

    /// Undoes the trail down to `mark`; returns the catch frames re-entered,
    /// most recent first.
    pub fn undo_to(&mut self, mark: usize) -> Vec<u64> {
        let mut reentered = Vec::new();
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                TrailEntry::Bind(serial) => {
                    self.bindings.remove(&serial);
                }
                TrailEntry::CatchExited(frame) => reentered.push(frame),
            }
        }
        reentered
    }
}
