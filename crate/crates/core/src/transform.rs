//! Source-to-source rewrites that implement backjumping with `catch/3`
//! (approaches 1, 1a and 2) or with a dynamic `target/1` database.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::reader::Program;
use crate::terms::{is_variant, Clause, PredInd, Term, Var};

/// A clause of a program: its procedure and 1-based position in it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseRef {
    pub pred: PredInd,
    pub index: usize,
}

impl ClauseRef {
    pub fn new(name: &str, arity: usize, index: usize) -> Self {
        ClauseRef { pred: PredInd::new(name, arity), index }
    }
}

impl fmt::Display for ClauseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.pred, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed designation `{0}`")]
pub struct BadDesignation(pub String);

fn parse_indicator(s: &str) -> Option<PredInd> {
    let (name, arity) = s.rsplit_once('/')?;
    if name.is_empty() {
        return None;
    }
    Some(PredInd::new(name, arity.parse().ok()?))
}

impl FromStr for ClauseRef {
    type Err = BadDesignation;

    /// `name/arity:index`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadDesignation(s.to_string());
        let (pi, index) = s.rsplit_once(':').ok_or_else(bad)?;
        let pred = parse_indicator(pi).ok_or_else(bad)?;
        let index = index.parse().ok().filter(|&i| i >= 1).ok_or_else(bad)?;
        Ok(ClauseRef { pred, index })
    }
}

/// Parses `name/arity`.
pub fn parse_pred_ind(s: &str) -> Result<PredInd, BadDesignation> {
    parse_indicator(s).ok_or_else(|| BadDesignation(s.to_string()))
}

/// Parses `name/arity:clause:split`.
pub fn parse_split(s: &str) -> Result<(ClauseRef, usize), BadDesignation> {
    let bad = || BadDesignation(s.to_string());
    let (clause, split) = s.rsplit_once(':').ok_or_else(bad)?;
    let clause = clause.parse().map_err(|_| bad())?;
    let split = split.parse().map_err(|_| bad())?;
    Ok((clause, split))
}

/// How the backjump identifier of a clause is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IdPolicy {
    /// `btid(Args, Id)` with a new variable `Id`.
    #[default]
    Fresh,
    /// The given head argument (1-based) is the identifier; no `btid/2`.
    FromArg(usize),
}

/// Treatment of a clause known never to catch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exemption {
    /// Leave the clause as it is.
    Unchanged,
    /// `(btid(Args, Id) -> catch(B, Id, fail) ; B)`.
    Dynamic,
}

#[derive(Clone, Debug, Default)]
pub struct BackjumpSpec {
    pub target_procedures: BTreeSet<PredInd>,
    pub id_policy: IdPolicy,
    /// Body position after which the wrapped part starts (approach 2).
    pub split_points: BTreeMap<ClauseRef, usize>,
    pub exempt_clauses: BTreeMap<ClauseRef, Exemption>,
}

impl BackjumpSpec {
    pub fn targets(preds: impl IntoIterator<Item = PredInd>) -> Self {
        BackjumpSpec { target_procedures: preds.into_iter().collect(), ..Self::default() }
    }

    pub fn with_id_policy(mut self, policy: IdPolicy) -> Self {
        self.id_policy = policy;
        self
    }

    pub fn exempt(mut self, clause: ClauseRef, how: Exemption) -> Self {
        self.exempt_clauses.insert(clause, how);
        self
    }

    pub fn split(mut self, clause: ClauseRef, at: usize) -> Self {
        self.split_points.insert(clause, at);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("procedure {0} is not defined")]
    UnknownProcedure(PredInd),
    #[error("clause {0} does not exist")]
    UnknownClause(ClauseRef),
    #[error("clause heads of {0} are not variants of each other")]
    HeadsDiffer(PredInd),
    #[error("split {split} out of range for clause {clause} with {len} body goals")]
    SplitOutOfRange { clause: ClauseRef, split: usize, len: usize },
    #[error("{pred} has no argument {index}")]
    ArgOutOfRange { pred: PredInd, index: usize },
    #[error("dynamic exemption of {0} needs a fresh identifier")]
    DynamicNeedsFreshId(ClauseRef),
    #[error("program already defines {0}")]
    NameClash(PredInd),
}

/// Hands out variables that clash with nothing in a given clause, neither
/// by serial nor by printed name.
struct Fresh {
    next_serial: u64,
    names: HashSet<String>,
}

impl Fresh {
    fn for_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut f = Fresh { next_serial: 0, names: HashSet::new() };
        for t in terms {
            f.reserve(t);
        }
        f
    }

    fn reserve(&mut self, t: &Term) {
        t.for_each_var(&mut |v| {
            self.next_serial = self.next_serial.max(v.serial + 1);
            self.names.insert(v.display_name());
        });
    }

    fn anon(&mut self) -> Term {
        let serial = self.next_serial;
        self.next_serial += 1;
        Term::Var(Var { serial, name: Some("_".into()) })
    }

    fn var(&mut self, base: &str) -> Term {
        let mut name = base.to_string();
        let mut k = 1;
        while self.names.contains(&name) {
            name = format!("{base}{k}");
            k += 1;
        }
        self.names.insert(name.clone());
        let serial = self.next_serial;
        self.next_serial += 1;
        Term::Var(Var { serial, name: Some(name.as_str().into()) })
    }
}

fn catch3(goal: Term, catcher: Term, handler: Term) -> Term {
    Term::compound("catch", vec![goal, catcher, handler])
}

fn fail() -> Term {
    Term::atom("fail")
}

/// The term `btid/2` receives for a head: the single argument, or the list
/// of all arguments.
fn btid_args(head: &Term) -> Term {
    match head.args() {
        [one] => one.clone(),
        args => Term::list(args.to_vec()),
    }
}

/// The identifier term and the goal that produces it (if any).
fn identifier(head: &Term, policy: IdPolicy, fresh: &mut Fresh) -> Result<(Term, Option<Term>), TransformError> {
    match policy {
        IdPolicy::Fresh => {
            let id = fresh.var("Id");
            Ok((id.clone(), Some(Term::compound("btid", vec![btid_args(head), id]))))
        }
        IdPolicy::FromArg(i) => match head.args().get(i.wrapping_sub(1)) {
            Some(arg) => Ok((arg.clone(), None)),
            None => Err(TransformError::ArgOutOfRange {
                pred: head.indicator().expect("callable head"),
                index: i,
            }),
        },
    }
}

fn prefix(goal: Option<Term>, rest: Term) -> Term {
    match goal {
        Some(g) => Term::conj(g, rest),
        None => rest,
    }
}

fn clauses_of<'a>(program: &'a Program, pi: &PredInd) -> Result<&'a [Clause], TransformError> {
    program.procedure(pi).ok_or_else(|| TransformError::UnknownProcedure(pi.clone()))
}

fn check_refs<'a>(
    program: &Program,
    refs: impl IntoIterator<Item = &'a ClauseRef>,
) -> Result<(), TransformError> {
    for r in refs {
        let n = program.procedure(&r.pred).map_or(0, <[Clause]>::len);
        if r.index == 0 || r.index > n {
            return Err(TransformError::UnknownClause(r.clone()));
        }
    }
    Ok(())
}

/// `p(t) :- B` becomes `p(t) :- btid(t, Id), catch(B, Id, fail)`.
pub fn approach1_clause(clause: &Clause, policy: IdPolicy) -> Result<Clause, TransformError> {
    let mut fresh = Fresh::for_terms([&clause.head, &clause.body]);
    let (id, gen) = identifier(&clause.head, policy, &mut fresh)?;
    let body = prefix(gen, catch3(clause.body.clone(), id, fail()));
    Ok(Clause::new(clause.head.clone(), body))
}

fn dynamic_exempt_clause(clause: &Clause, r: &ClauseRef, policy: IdPolicy) -> Result<Clause, TransformError> {
    if policy != IdPolicy::Fresh {
        return Err(TransformError::DynamicNeedsFreshId(r.clone()));
    }
    let mut fresh = Fresh::for_terms([&clause.head, &clause.body]);
    let (id, gen) = identifier(&clause.head, policy, &mut fresh)?;
    let ite = Term::compound(
        ";",
        vec![
            Term::compound("->", vec![gen.expect("fresh policy"), catch3(clause.body.clone(), id, fail())]),
            clause.body.clone(),
        ],
    );
    Ok(Clause::new(clause.head.clone(), ite))
}

/// Applies approach 1 to every target procedure.
pub fn approach1(program: &Program, spec: &BackjumpSpec) -> Result<Program, TransformError> {
    check_refs(program, spec.exempt_clauses.keys())?;
    let mut out = program.clone();
    for pi in &spec.target_procedures {
        let clauses = clauses_of(program, pi)?;
        let mut new = Vec::with_capacity(clauses.len());
        for (i, c) in clauses.iter().enumerate() {
            let r = ClauseRef { pred: pi.clone(), index: i + 1 };
            new.push(match spec.exempt_clauses.get(&r) {
                Some(Exemption::Unchanged) => c.clone(),
                Some(Exemption::Dynamic) => dynamic_exempt_clause(c, &r, spec.id_policy)?,
                None => approach1_clause(c, spec.id_policy)?,
            });
        }
        out.procedures.insert(pi.clone(), new);
    }
    Ok(out)
}

/// Collects the variable correspondence of two variant terms.
fn variant_map(from: &Term, to: &Term, map: &mut HashMap<u64, Term>) {
    match (from, to) {
        (Term::Var(v), t) => {
            map.insert(v.serial, t.clone());
        }
        (Term::Compound(_, xs), Term::Compound(_, ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                variant_map(x, y, map);
            }
        }
        _ => {}
    }
}

/// Approach 1a: a procedure whose heads are variants becomes one clause
/// passing control to the next body with `throw(Id)`.
pub fn approach1a_procedure(pi: &PredInd, clauses: &[Clause], policy: IdPolicy) -> Result<Clause, TransformError> {
    let Some(first) = clauses.first() else {
        return Err(TransformError::UnknownProcedure(pi.clone()));
    };
    if clauses.iter().any(|c| !is_variant(&c.head, &first.head)) {
        return Err(TransformError::HeadsDiffer(pi.clone()));
    }
    let mut fresh = Fresh::for_terms([&first.head, &first.body]);
    // bring every body into the variables of the first head
    let mut bodies = vec![first.body.clone()];
    for c in &clauses[1..] {
        let mut map = HashMap::new();
        variant_map(&c.head, &first.head, &mut map);
        let body = c.body.map_vars(&mut |v| {
            map.entry(v.serial)
                .or_insert_with(|| {
                    let name = v.name.as_deref().unwrap_or("V");
                    fresh.var(name)
                })
                .clone()
        });
        bodies.push(body);
    }
    let (id, gen) = identifier(&first.head, policy, &mut fresh)?;
    let mut nested = catch3(bodies.pop().expect("nonempty"), id.clone(), fail());
    while let Some(body) = bodies.pop() {
        let passed = Term::compound(";", vec![body, Term::compound("throw", vec![id.clone()])]);
        nested = catch3(passed, id.clone(), nested);
    }
    Ok(Clause::new(first.head.clone(), prefix(gen, nested)))
}

/// Applies approach 1a to every target procedure.
pub fn approach1a(program: &Program, spec: &BackjumpSpec) -> Result<Program, TransformError> {
    let mut out = program.clone();
    for pi in &spec.target_procedures {
        let clause = approach1a_procedure(pi, clauses_of(program, pi)?, spec.id_policy)?;
        out.procedures.insert(pi.clone(), vec![clause]);
    }
    Ok(out)
}

/// Approach 2: `H :- B0, B1` becomes `H :- B0, btid(t, Id), catch(B1, Id, fail)`,
/// where `B0` is the first `split` body goals.
pub fn approach2_clause(clause: &Clause, r: &ClauseRef, split: usize, policy: IdPolicy) -> Result<Clause, TransformError> {
    let goals = clause.body.conjuncts();
    if split == 0 || split >= goals.len() {
        return Err(TransformError::SplitOutOfRange { clause: r.clone(), split, len: goals.len() });
    }
    let mut fresh = Fresh::for_terms([&clause.head, &clause.body]);
    let (id, gen) = identifier(&clause.head, policy, &mut fresh)?;
    let b1 = Term::conj_all(goals[split..].to_vec());
    let mut body: Vec<Term> = goals[..split].to_vec();
    body.extend(gen);
    body.push(catch3(b1, id, fail()));
    Ok(Clause::new(clause.head.clone(), Term::conj_all(body)))
}

/// Applies approach 2 at every split point.
pub fn approach2(program: &Program, spec: &BackjumpSpec) -> Result<Program, TransformError> {
    check_refs(program, spec.split_points.keys())?;
    let mut out = program.clone();
    for (r, &split) in &spec.split_points {
        let clause = &program.procedure(&r.pred).expect("checked")[r.index - 1];
        let new = approach2_clause(clause, r, split, spec.id_policy)?;
        out.procedures.get_mut(&r.pred).expect("checked")[r.index - 1] = new;
    }
    Ok(out)
}

/// Simulates backjumping with the database: target clauses get
/// `btid(t, Id), catch(Id)` in front of their body, exempt ones
/// `\+ target(_)`, and `catch/1` consumes a pending `target/1` fact.
/// A backjump is started by `assertz(target(T)), fail`.
pub fn dbsim(program: &Program, spec: &BackjumpSpec) -> Result<Program, TransformError> {
    let catch1 = PredInd::new("catch", 1);
    let target = PredInd::new("target", 1);
    for pi in [&catch1, &target] {
        if program.procedures.contains_key(pi) {
            return Err(TransformError::NameClash(pi.clone()));
        }
    }
    check_refs(program, spec.exempt_clauses.keys())?;
    let mut out = program.clone();
    for pi in &spec.target_procedures {
        let clauses = clauses_of(program, pi)?;
        let mut new = Vec::with_capacity(clauses.len());
        for (i, c) in clauses.iter().enumerate() {
            let r = ClauseRef { pred: pi.clone(), index: i + 1 };
            let body = if spec.exempt_clauses.contains_key(&r) {
                let mut fresh = Fresh::for_terms([&c.head, &c.body]);
                let anon = Term::compound("target", vec![fresh.anon()]);
                Term::conj(Term::compound("\\+", vec![anon]), c.body.clone())
            } else {
                let mut fresh = Fresh::for_terms([&c.head, &c.body]);
                let (id, gen) = identifier(&c.head, spec.id_policy, &mut fresh)?;
                prefix(gen, Term::conj(Term::compound("catch", vec![id]), c.body.clone()))
            };
            new.push(Clause::new(c.head.clone(), body));
        }
        out.procedures.insert(pi.clone(), new);
    }
    let id = Term::Var(Var { serial: 0, name: Some("Id".into()) });
    let anon = Term::Var(Var { serial: 1, name: Some("_".into()) });
    let body = Term::compound(
        ";",
        vec![
            Term::compound(
                "->",
                vec![
                    Term::compound("target", vec![anon]),
                    Term::compound("retract", vec![Term::compound("target", vec![id.clone()])]),
                ],
            ),
            Term::atom("true"),
        ],
    );
    out.add_clause(Clause::new(Term::compound("catch", vec![id]), body));
    out.dynamic.insert(target);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::{format_clause, parse_program};

    fn clause(src: &str) -> Clause {
        parse_program(src).unwrap().clauses().next().unwrap().clone()
    }

    fn text(c: &Clause) -> String {
        format_clause(c).split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn approach1_wraps_body() {
        let c = approach1_clause(&clause("p(X) :- q(X)."), IdPolicy::Fresh).unwrap();
        assert_eq!(text(&c), "p(X) :- btid(X,Id), catch(q(X),Id,fail).");
    }

    #[test]
    fn approach1_fact_and_arity() {
        let c = approach1_clause(&clause("p(a)."), IdPolicy::Fresh).unwrap();
        assert_eq!(text(&c), "p(a) :- btid(a,Id), catch(true,Id,fail).");
        let c = approach1_clause(&clause("p(X, Id) :- q."), IdPolicy::Fresh).unwrap();
        assert_eq!(text(&c), "p(X,Id) :- btid([X,Id],Id1), catch(q,Id1,fail).");
        let c = approach1_clause(&clause("p :- q."), IdPolicy::Fresh).unwrap();
        assert_eq!(text(&c), "p :- btid([],Id), catch(q,Id,fail).");
    }

    #[test]
    fn approach1_from_arg() {
        let c = approach1_clause(&clause("p(X, L) :- q(X)."), IdPolicy::FromArg(2)).unwrap();
        assert_eq!(text(&c), "p(X,L) :- catch(q(X),L,fail).");
        assert!(matches!(
            approach1_clause(&clause("p(X) :- q(X)."), IdPolicy::FromArg(2)),
            Err(TransformError::ArgOutOfRange { .. })
        ));
    }

    #[test]
    fn approach1_exemptions() {
        let p = parse_program("p(1) :- q. p(2) :- r. p(3) :- s. q. r. s.").unwrap();
        let spec = BackjumpSpec::targets([PredInd::new("p", 1)])
            .exempt(ClauseRef::new("p", 1, 2), Exemption::Unchanged)
            .exempt(ClauseRef::new("p", 1, 3), Exemption::Dynamic);
        let out = approach1(&p, &spec).unwrap();
        let cs: Vec<String> = out.procedure(&PredInd::new("p", 1)).unwrap().iter().map(text).collect();
        assert_eq!(
            cs,
            [
                "p(1) :- btid(1,Id), catch(q,Id,fail).",
                "p(2) :- r.",
                "p(3) :- (btid(3,Id)->catch(s,Id,fail);s).",
            ]
        );
        let bad = spec.clone().exempt(ClauseRef::new("p", 1, 9), Exemption::Unchanged);
        assert!(matches!(approach1(&p, &bad), Err(TransformError::UnknownClause(_))));
    }

    #[test]
    fn approach1a_nesting() {
        let p = parse_program("p(X) :- a(X). p(Y) :- b(Y, Z), c(Z). p(W) :- d(W).").unwrap();
        let pi = PredInd::new("p", 1);
        let one = approach1a_procedure(&pi, &p.procedure(&pi).unwrap()[..1], IdPolicy::Fresh).unwrap();
        assert_eq!(text(&one), "p(X) :- btid(X,Id), catch(a(X),Id,fail).");
        let two = approach1a_procedure(&pi, &p.procedure(&pi).unwrap()[..2], IdPolicy::Fresh).unwrap();
        assert_eq!(
            text(&two),
            "p(X) :- btid(X,Id), catch((a(X);throw(Id)),Id,catch((b(X,Z),c(Z)),Id,fail))."
        );
        let three = approach1a(&p, &BackjumpSpec::targets([pi.clone()])).unwrap();
        let c = &three.procedure(&pi).unwrap()[0];
        assert_eq!(
            text(c),
            "p(X) :- btid(X,Id), catch((a(X);throw(Id)),Id,catch((b(X,Z),c(Z);throw(Id)),Id,catch(d(X),Id,fail)))."
        );
    }

    #[test]
    fn approach1a_rejects_differing_heads() {
        let p = parse_program("p(a) :- q. p(X) :- q.").unwrap();
        let spec = BackjumpSpec::targets([PredInd::new("p", 1)]);
        assert_eq!(approach1a(&p, &spec), Err(TransformError::HeadsDiffer(PredInd::new("p", 1))));
    }

    #[test]
    fn approach1a_keeps_local_names_apart() {
        let p = parse_program("p(X) :- q(X, Y). p(Y) :- r(Y, X).").unwrap();
        let spec = BackjumpSpec::targets([PredInd::new("p", 1)]);
        let out = approach1a(&p, &spec).unwrap();
        let c = &out.procedure(&PredInd::new("p", 1)).unwrap()[0];
        assert_eq!(
            text(c),
            "p(X) :- btid(X,Id), catch((q(X,Y);throw(Id)),Id,catch(r(X,X1),Id,fail))."
        );
    }

    #[test]
    fn approach2_split() {
        let c = clause("h :- a, b.");
        let r = ClauseRef::new("h", 0, 1);
        let t = approach2_clause(&c, &r, 1, IdPolicy::Fresh).unwrap();
        assert_eq!(text(&t), "h :- a, btid([],Id), catch(b,Id,fail).");
        assert!(matches!(
            approach2_clause(&c, &r, 2, IdPolicy::Fresh),
            Err(TransformError::SplitOutOfRange { split: 2, len: 2, .. })
        ));
        assert!(approach2_clause(&c, &r, 0, IdPolicy::Fresh).is_err());
    }

    #[test]
    fn approach2_level_clause() {
        let p = parse_program(
            "sat_cnf( [], _L ).
             sat_cnf( [Clause|Clauses], L ) :-
                 sat_cl( Clause, L, -1 ),
                 Lnew is L+1,
                 sat_cnf( Clauses, Lnew ).",
        )
        .unwrap();
        let spec = BackjumpSpec::default()
            .with_id_policy(IdPolicy::FromArg(2))
            .split(ClauseRef::new("sat_cnf", 2, 2), 2);
        let out = approach2(&p, &spec).unwrap();
        let c = &out.procedure(&PredInd::new("sat_cnf", 2)).unwrap()[1];
        assert_eq!(
            text(c),
            "sat_cnf([Clause|Clauses],L) :- sat_cl(Clause,L,-1), Lnew is L+1, catch(sat_cnf(Clauses,Lnew),L,fail)."
        );
    }

    #[test]
    fn dbsim_rewrites() {
        let p = parse_program("p(X) :- q(X). p(a) :- q(a). q(_).").unwrap();
        let spec = BackjumpSpec::targets([PredInd::new("p", 1)])
            .exempt(ClauseRef::new("p", 1, 2), Exemption::Unchanged);
        let out = dbsim(&p, &spec).unwrap();
        let cs: Vec<String> = out.clauses().map(text).collect();
        assert_eq!(
            cs,
            [
                "p(X) :- btid(X,Id), catch(Id), q(X).",
                "p(a) :- \\+ target(_), q(a).",
                "q(_).",
                "catch(Id) :- (target(_)->retract(target(Id));true).",
            ]
        );
        assert!(out.dynamic.contains(&PredInd::new("target", 1)));
    }

    #[test]
    fn dbsim_name_clash() {
        let p = parse_program("catch(x).").unwrap();
        assert_eq!(dbsim(&p, &BackjumpSpec::default()), Err(TransformError::NameClash(PredInd::new("catch", 1))));
    }

    #[test]
    fn designations() {
        assert_eq!("sat_b/3:4".parse::<ClauseRef>().unwrap(), ClauseRef::new("sat_b", 3, 4));
        assert_eq!(parse_split("sat_cnf/2:2:2").unwrap(), (ClauseRef::new("sat_cnf", 2, 2), 2));
        assert_eq!(parse_pred_ind("new_highest/3").unwrap(), PredInd::new("new_highest", 3));
        assert!("p/1:0".parse::<ClauseRef>().is_err());
        assert!(parse_split("p/x:1:1").is_err());
        assert!(parse_pred_ind("/2").is_err());
    }
}
