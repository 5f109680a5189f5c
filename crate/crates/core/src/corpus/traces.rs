//! Trace projection, comparison and the level invariants of the leveled
//! SAT programs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::engine::{NodeId, Port, TraceEvent};
use crate::terms::{PredInd, Term, Var};

/// Keeps Call/Exit/Redo/Fail/Answer events of the given predicates.
pub fn project_trace(trace: &[TraceEvent], keep: &BTreeSet<PredInd>) -> Vec<TraceEvent> {
    trace
        .iter()
        .filter(|e| {
            matches!(e.port, Port::Call | Port::Exit | Port::Redo | Port::Fail | Port::Answer)
                && e.goal.indicator().is_some_and(|pi| keep.contains(&pi))
        })
        .cloned()
        .collect()
}

/// Renumbers nodes and renames variables in order of first appearance, so
/// runs of different programs can be compared event by event.
pub fn canonicalize(trace: &[TraceEvent]) -> Vec<TraceEvent> {
    let mut nodes: HashMap<NodeId, NodeId> = HashMap::new();
    let mut vars: HashMap<String, Term> = HashMap::new();
    let mut rename = |t: &Term| {
        t.map_vars(&mut |v| {
            let n = vars.len() as u64;
            vars.entry(v.display_name())
                .or_insert_with(|| Term::Var(Var { serial: n, name: Some(format!("_V{n}").as_str().into()) }))
                .clone()
        })
    };
    trace
        .iter()
        .map(|e| {
            let next = nodes.len() as NodeId;
            let node = if e.port == Port::Answer { 0 } else { *nodes.entry(e.node).or_insert(next + 1) };
            TraceEvent { port: e.port, node, goal: rename(&e.goal), payload: e.payload.as_ref().map(&mut rename) }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub index: usize,
    pub left: Option<TraceEvent>,
    pub right: Option<TraceEvent>,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |e: &Option<TraceEvent>| e.as_ref().map_or("<end of trace>".to_string(), |e| e.to_string());
        write!(f, "divergence at event {}:\n  left:  {}\n  right: {}", self.index, show(&self.left), show(&self.right))
    }
}

/// First position where the canonical forms of `a` and `b` differ.
pub fn diff_traces(a: &[TraceEvent], b: &[TraceEvent]) -> Option<Divergence> {
    let (ca, cb) = (canonicalize(a), canonicalize(b));
    let n = ca.len().max(cb.len());
    (0..n).find(|&i| ca.get(i) != cb.get(i)).map(|index| Divergence {
        index,
        left: ca.get(index).cloned(),
        right: cb.get(index).cloned(),
    })
}

fn ints(t: &Term, out: &mut Vec<i64>) {
    match t {
        Term::Int(n) => out.push(*n),
        Term::Compound(_, args) => args.iter().for_each(|a| ints(a, out)),
        _ => {}
    }
}

fn is_leveled_call(e: &TraceEvent) -> bool {
    e.goal.is_functor("sat_cl", 3) || e.goal.is_functor("sat_b", 3)
}

/// At every Call of `sat_cl/3` or `sat_b/3`: level and highest level are
/// integers, `l > hl`, and `l` exceeds every number in the first argument.
/// Every integer ball equals the highest level of the preceding call with an
/// empty clause, and is nonnegative.
pub fn check_level_invariant(trace: &[TraceEvent]) -> Result<(), String> {
    let mut last_hl: Option<i64> = None;
    for (i, e) in trace.iter().enumerate() {
        if e.port == Port::Call && is_leveled_call(e) {
            let args = e.goal.args();
            let (Term::Int(l), Term::Int(hl)) = (&args[1], &args[2]) else {
                return Err(format!("event {i}: {e}: level arguments are not integers"));
            };
            if l <= hl {
                return Err(format!("event {i}: {e}: level {l} not above {hl}"));
            }
            let mut ns = Vec::new();
            ints(&args[0], &mut ns);
            if let Some(m) = ns.iter().find(|&&n| n >= *l) {
                return Err(format!("event {i}: {e}: {m} occurs in the clause argument"));
            }
            last_hl = Some(*hl);
        }
        if matches!(e.port, Port::Throw | Port::Backjump) {
            if let Some(Term::Int(ball)) = &e.payload {
                if *ball < 0 || last_hl != Some(*ball) {
                    return Err(format!("event {i}: ball {ball} is not the highest level {last_hl:?}"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::parse_term;

    fn ev(port: Port, node: NodeId, goal: &str) -> TraceEvent {
        TraceEvent::new(port, node, parse_term(goal).unwrap())
    }

    #[test]
    fn projection_drops_bookkeeping() {
        let t = vec![
            ev(Port::Call, 1, "p(X)"),
            ev(Port::Call, 2, "btid(X,Id)"),
            ev(Port::Exit, 2, "btid(X,0)"),
            ev(Port::Call, 3, "catch(q,0,fail)"),
            ev(Port::Throw, 4, "throw(0)"),
            ev(Port::Exit, 1, "p(a)"),
        ];
        let keep: BTreeSet<PredInd> = [PredInd::new("p", 1)].into();
        let p = project_trace(&t, &keep);
        assert_eq!(p, [t[0].clone(), t[5].clone()]);
    }

    #[test]
    fn diff_ignores_numbering_and_names() {
        let a = vec![ev(Port::Call, 5, "p(_G10)"), ev(Port::Exit, 5, "p(a)")];
        let b = vec![ev(Port::Call, 9, "p(_G77)"), ev(Port::Exit, 9, "p(a)")];
        assert_eq!(diff_traces(&a, &b), None);
        let c = vec![ev(Port::Call, 9, "p(_G77)"), ev(Port::Fail, 9, "p(_G77)")];
        let d = diff_traces(&a, &c).unwrap();
        assert_eq!(d.index, 1);
        let short = vec![ev(Port::Call, 1, "p(X)")];
        let d = diff_traces(&a, &short).unwrap();
        assert_eq!((d.index, d.right), (1, None));
    }

    #[test]
    fn distinct_variables_stay_distinct() {
        let a = vec![ev(Port::Call, 1, "p(X,Y)")];
        let b = vec![ev(Port::Call, 1, "p(X,X)")];
        assert!(diff_traces(&a, &b).is_some());
    }

    #[test]
    fn level_invariant() {
        let ok = vec![
            ev(Port::Call, 1, "sat_b([[true-(0,true)],[false-X]],1,-1)"),
            ev(Port::Call, 2, "sat_b([[]],2,0)"),
            TraceEvent::new(Port::Throw, 3, parse_term("throw(0)").unwrap()).with_payload(Term::int(0)),
        ];
        assert!(check_level_invariant(&ok).is_ok());
        let bad = vec![ev(Port::Call, 1, "sat_b([[true-(3,true)]],2,-1)")];
        assert!(check_level_invariant(&bad).is_err());
        let bad = vec![ev(Port::Call, 1, "sat_cl([],2,2)")];
        assert!(check_level_invariant(&bad).is_err());
        let bad = vec![
            ev(Port::Call, 1, "sat_b([[]],2,0)"),
            TraceEvent::new(Port::Throw, 3, parse_term("throw(1)").unwrap()).with_payload(Term::int(1)),
        ];
        assert!(check_level_invariant(&bad).is_err());
    }
}
