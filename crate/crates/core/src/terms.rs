//! Terms, substitutions, unification and renaming-apart.
//!
//! Terms are immutable and cheap to clone (`Arc`-backed). Variables are
//! identified by a serial number; the optional name is only used for
//! display. Two variables are the same variable iff their serials agree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Sym = Arc<str>;

#[derive(Clone, Debug)]
pub struct Var {
    pub serial: u64,
    pub name: Option<Sym>,
}

impl Var {
    /// Display name: the source name if there is one, `_G<serial>` otherwise.
    pub fn display_name(&self) -> String {
        match &self.name {
            Some(n) => n.to_string(),
            None => format!("_G{}", self.serial),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.serial == other.serial
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.serial.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.serial.cmp(&other.serial)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Atom(Sym),
    Int(i64),
    /// Invariant: `args` is nonempty.
    Compound(Sym, Arc<[Term]>),
}

/// Predicate indicator `name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredInd {
    pub name: Sym,
    pub arity: usize,
}

impl PredInd {
    pub fn new(name: &str, arity: usize) -> Self {
        PredInd { name: name.into(), arity }
    }
}

impl fmt::Display for PredInd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(name.into())
    }

    pub fn int(v: i64) -> Term {
        Term::Int(v)
    }

    /// Builds `name(args...)`; with no arguments this is the atom `name`.
    pub fn compound(name: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(name.into())
        } else {
            Term::Compound(name.into(), args.into())
        }
    }

    pub fn nil() -> Term {
        Term::atom("[]")
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(".", vec![head, tail])
    }

    pub fn list(items: Vec<Term>) -> Term {
        Self::list_with_tail(items, Term::nil())
    }

    pub fn list_with_tail(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    /// The pair `a-b`.
    pub fn pair(a: Term, b: Term) -> Term {
        Term::compound("-", vec![a, b])
    }

    pub fn conj(a: Term, b: Term) -> Term {
        Term::compound(",", vec![a, b])
    }

    /// Right-nested conjunction of `goals`; `true` when empty.
    pub fn conj_all(goals: Vec<Term>) -> Term {
        let mut it = goals.into_iter().rev();
        match it.next() {
            None => Term::atom("true"),
            Some(last) => it.fold(last, |acc, g| Term::conj(g, acc)),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(..))
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Atom(n) | Term::Compound(n, _) => Some(n),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn indicator(&self) -> Option<PredInd> {
        match self {
            Term::Atom(n) => Some(PredInd { name: n.clone(), arity: 0 }),
            Term::Compound(n, args) => Some(PredInd { name: n.clone(), arity: args.len() }),
            _ => None,
        }
    }

    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        match self {
            Term::Atom(n) => arity == 0 && &**n == name,
            Term::Compound(n, args) => args.len() == arity && &**n == name,
            _ => false,
        }
    }

    /// Splits a proper list into its elements.
    pub fn as_list(&self) -> Option<Vec<Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Atom(n) if &**n == "[]" => return Some(items),
                Term::Compound(n, args) if &**n == "." && args.len() == 2 => {
                    items.push(args[0].clone());
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }

    /// Flattens a right-nested conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while cur.is_functor(",", 2) {
            out.push(cur.args()[0].clone());
            cur = &cur.args()[1];
        }
        out.push(cur.clone());
        out
    }

    /// Visits every variable occurrence, left to right.
    pub fn for_each_var(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
            _ => {}
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = Vec::new();
        self.for_each_var(&mut |v| {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        });
        seen
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Structural map over variables.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(n, args) => {
                Term::Compound(n.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            other => other.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::reader::format(self))
    }
}

/// Source of fresh variable serials.
#[derive(Debug, Default, Clone)]
pub struct VarGen {
    next: u64,
}

impl VarGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts numbering at `first`.
    pub fn starting_at(first: u64) -> Self {
        VarGen { next: first }
    }

    pub fn peek(&self) -> u64 {
        self.next
    }

    pub fn fresh(&mut self, name: Option<Sym>) -> Var {
        let serial = self.next;
        self.next += 1;
        Var { serial, name }
    }

    pub fn fresh_term(&mut self) -> Term {
        Term::Var(self.fresh(None))
    }
}

/// A substitution from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst {
    bindings: BTreeMap<Var, Term>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// Inserts a binding. Bindings of a variable to itself are dropped.
    pub fn bind(&mut self, v: Var, t: Term) {
        if let Term::Var(w) = &t {
            if *w == v {
                return;
            }
        }
        self.bindings.insert(v, t);
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Fully resolves `t`; works for triangular and idempotent forms alike.
    pub fn apply(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(n, args) => {
                Term::Compound(n.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    /// Rewrites every binding to its fully resolved form.
    fn normalize(self) -> Subst {
        let mut out = Subst::new();
        for (v, t) in self.bindings.iter() {
            out.bind(v.clone(), self.apply(t));
        }
        out
    }
}

/// Applies `s` to `t`.
pub fn apply(s: &Subst, t: &Term) -> Term {
    s.apply(t)
}

/// Most general unifier of `a` and `b` extending `s`, in idempotent form.
/// No occurs check.
pub fn unify(a: &Term, b: &Term, s: &Subst) -> Option<Subst> {
    let mut work = s.clone();
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = work.walk(&x).clone();
        let y = work.walk(&y).clone();
        match (x, y) {
            (Term::Var(v), Term::Var(w)) if v == w => {}
            (Term::Var(v), other) | (other, Term::Var(v)) => work.bind(v, other),
            (Term::Atom(m), Term::Atom(n)) => {
                if m != n {
                    return None;
                }
            }
            (Term::Int(m), Term::Int(n)) => {
                if m != n {
                    return None;
                }
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(work.normalize())
}

/// A program clause `head :- body`. Facts have body `true`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Term,
}

impl Clause {
    pub fn new(head: Term, body: Term) -> Self {
        Clause { head, body }
    }

    pub fn fact(head: Term) -> Self {
        Clause { head, body: Term::atom("true") }
    }

    pub fn indicator(&self) -> PredInd {
        self.head.indicator().expect("clause head is callable")
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_functor("true", 0)
    }

    /// Body as a goal tree.
    pub fn body_tree(&self) -> GoalTree {
        GoalTree::from_term(&self.body)
    }

    /// The clause as a single term, `H :- B` (or just `H` for facts).
    pub fn to_term(&self) -> Term {
        if self.is_fact() {
            self.head.clone()
        } else {
            Term::compound(":-", vec![self.head.clone(), self.body.clone()])
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut vs = self.head.vars();
        for v in self.body.vars() {
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        vs
    }
}

/// Renames every variable of `c` to a fresh, unnamed variable.
pub fn rename_apart(c: &Clause, fresh: &mut VarGen) -> Clause {
    let mut map: HashMap<u64, Term> = HashMap::new();
    let mut rename = |v: &Var| {
        map.entry(v.serial)
            .or_insert_with(|| fresh.fresh_term())
            .clone()
    };
    let head = c.head.map_vars(&mut rename);
    let body = c.body.map_vars(&mut rename);
    Clause { head, body }
}

/// Renames a single term apart.
pub fn rename_term(t: &Term, fresh: &mut VarGen) -> Term {
    let mut map: HashMap<u64, Term> = HashMap::new();
    t.map_vars(&mut |v| {
        map.entry(v.serial)
            .or_insert_with(|| fresh.fresh_term())
            .clone()
    })
}

/// True if `a` and `b` are equal up to a bijective renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fw: &mut HashMap<u64, u64>, bw: &mut HashMap<u64, u64>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let f = *fw.entry(x.serial).or_insert(y.serial);
                let g = *bw.entry(y.serial).or_insert(x.serial);
                f == y.serial && g == x.serial
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, fw, bw))
            }
            (x, y) => x == y,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}

/// Body goal tree: conjunction, disjunction and if-then-else over goals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalTree {
    Goal(Term),
    Conj(Box<GoalTree>, Box<GoalTree>),
    Disj(Box<GoalTree>, Box<GoalTree>),
    IfThenElse(Box<GoalTree>, Box<GoalTree>, Box<GoalTree>),
}

impl GoalTree {
    pub fn from_term(t: &Term) -> GoalTree {
        let sub = |t: &Term| Box::new(GoalTree::from_term(t));
        if t.is_functor(",", 2) {
            GoalTree::Conj(sub(&t.args()[0]), sub(&t.args()[1]))
        } else if t.is_functor(";", 2) {
            let (l, r) = (&t.args()[0], &t.args()[1]);
            if l.is_functor("->", 2) {
                GoalTree::IfThenElse(sub(&l.args()[0]), sub(&l.args()[1]), sub(r))
            } else {
                GoalTree::Disj(sub(l), sub(r))
            }
        } else {
            GoalTree::Goal(t.clone())
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            GoalTree::Goal(t) => t.clone(),
            GoalTree::Conj(a, b) => Term::conj(a.to_term(), b.to_term()),
            GoalTree::Disj(a, b) => Term::compound(";", vec![a.to_term(), b.to_term()]),
            GoalTree::IfThenElse(c, t, e) => Term::compound(
                ";",
                vec![Term::compound("->", vec![c.to_term(), t.to_term()]), e.to_term()],
            ),
        }
    }
}
