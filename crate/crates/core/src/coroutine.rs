//! Coroutining with `when/2`.
//!
//! A query is a blocked part followed by an active part. Selecting
//! `when(C, Q)` either runs `Q` at once (condition true) or moves the atom to
//! the blocked part. After every step that may bind variables, blocked atoms
//! whose conditions became true are moved, in their original order, in front
//! of the active part. The machine in [`crate::engine`] calls into this
//! module; exception handling with delays shares the engine's catch search,
//! which already ignores the blocked part when deciding whether a catch
//! goal has exited.

use thiserror::Error;

use crate::engine::trace::{NodeId, Port, TraceEvent};
use crate::terms::Term;

/// Call context of a goal: the user call whose clause body it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Ctx {
    pub parent: NodeId,
    pub depth: u32,
}

/// A when-atom resident in the blocked part.
#[derive(Clone, Debug)]
pub struct WhenAtom {
    pub condition: Term,
    pub goal: Term,
    pub ctx: Ctx,
    /// Node id of the Block event.
    pub node: NodeId,
}

impl WhenAtom {
    pub fn to_term(&self) -> Term {
        Term::compound("when", vec![self.condition.clone(), self.goal.clone()])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed when/2 condition")]
pub struct MalformedCondition;

/// Evaluates a condition over `nonvar/1`, `ground/1`, `,/2` and `;/2`.
/// `resolve` applies the current bindings to a term.
pub fn eval_condition(
    cond: &Term,
    resolve: &impl Fn(&Term) -> Term,
) -> Result<bool, MalformedCondition> {
    let c = resolve(cond);
    eval_resolved(&c)
}

fn eval_resolved(c: &Term) -> Result<bool, MalformedCondition> {
    match c {
        Term::Compound(name, args) => match (&**name, args.len()) {
            ("nonvar", 1) => Ok(!args[0].is_var()),
            ("ground", 1) => Ok(args[0].is_ground()),
            (",", 2) => Ok(eval_resolved(&args[0])? && eval_resolved(&args[1])?),
            (";", 2) => {
                let left = eval_resolved(&args[0])?;
                let right = eval_resolved(&args[1])?;
                Ok(left || right)
            }
            _ => Err(MalformedCondition),
        },
        _ => Err(MalformedCondition),
    }
}

/// Splits the blocked part into atoms to wake and atoms that stay blocked,
/// preserving the original order within each part. This is the one place
/// that fixes the wake-up order.
pub fn partition_woken(
    blocked: &[WhenAtom],
    resolve: &impl Fn(&Term) -> Term,
) -> (Vec<WhenAtom>, Vec<WhenAtom>) {
    let mut woken = Vec::new();
    let mut remaining = Vec::new();
    for w in blocked {
        // conditions were validated when the atom blocked
        if eval_condition(&w.condition, resolve).unwrap_or(false) {
            woken.push(w.clone());
        } else {
            remaining.push(w.clone());
        }
    }
    (woken, remaining)
}

/// The pseudo-answer for the call `node`: the goal as displayed at its most
/// recent Exit port, or `None` if the call never exited.
pub fn pseudo_answer(trace: &[TraceEvent], node: NodeId) -> Option<Term> {
    trace
        .iter()
        .rev()
        .find(|e| e.port == Port::Exit && e.node == node)
        .map(|e| e.goal.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::VarGen;

    fn ident(t: &Term) -> Term {
        t.clone()
    }

    #[test]
    fn nonvar_conditions() {
        let mut g = VarGen::new();
        let x = g.fresh_term();
        let c = Term::compound("nonvar", vec![x.clone()]);
        assert!(!eval_condition(&c, &ident).unwrap());
        let c = Term::compound("nonvar", vec![Term::atom("a")]);
        assert!(eval_condition(&c, &ident).unwrap());
        let y = Term::atom("b");
        let c = Term::compound(
            ";",
            vec![Term::compound("nonvar", vec![x.clone()]), Term::compound("nonvar", vec![y])],
        );
        assert!(eval_condition(&c, &ident).unwrap());
        let c = Term::compound("ground", vec![Term::compound("f", vec![x])]);
        assert!(!eval_condition(&c, &ident).unwrap());
    }

    #[test]
    fn malformed_condition() {
        assert_eq!(eval_condition(&Term::atom("foo"), &ident), Err(MalformedCondition));
        assert_eq!(
            eval_condition(&Term::compound("dif", vec![Term::int(1), Term::int(2)]), &ident),
            Err(MalformedCondition)
        );
    }

    #[test]
    fn partition_keeps_order() {
        let mut g = VarGen::new();
        let atoms: Vec<WhenAtom> = (0..4)
            .map(|i| WhenAtom {
                condition: Term::compound(
                    "nonvar",
                    vec![if i % 2 == 0 { Term::int(i) } else { g.fresh_term() }],
                ),
                goal: Term::compound("p", vec![Term::int(i)]),
                ctx: Ctx::default(),
                node: i as u64,
            })
            .collect();
        let (woken, rest) = partition_woken(&atoms, &ident);
        assert_eq!(woken.iter().map(|w| w.node).collect::<Vec<_>>(), [0, 2]);
        assert_eq!(rest.iter().map(|w| w.node).collect::<Vec<_>>(), [1, 3]);
    }
}
