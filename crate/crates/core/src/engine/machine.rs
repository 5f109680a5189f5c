use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::coroutine::{self, Ctx, WhenAtom};
use crate::reader::{Program, Query};
use crate::terms::{rename_apart, rename_term, unify, Clause, PredInd, Subst, Term, Var, VarGen};

use super::builtins::{self, domain_error, instantiation_error, permission_error, type_error};
use super::store::{Store, TrailEntry};
use super::trace::{NodeId, Port, TraceEvent};
use super::{Answer, EngineError, Mode, SolveOptions};

#[derive(Clone, Debug)]
enum Frame {
    Goal { goal: Term, ctx: Ctx },
    /// Emits the Exit port of a user call.
    Exit { node: NodeId, goal: Term },
    /// The goal of catch frame `frame` succeeded.
    CatchExit { frame: u64, node: NodeId, goal: Term },
    /// If-then-else commit: drop every choice point at or above `height`.
    Commit { height: usize },
}

/// Persistent goal list (the active part of the query).
#[derive(Clone, Debug, Default)]
struct Cont(Option<Rc<ContCell>>);

#[derive(Debug)]
struct ContCell {
    frame: Frame,
    next: Cont,
}

impl Cont {
    fn push(&self, frame: Frame) -> Cont {
        Cont(Some(Rc::new(ContCell { frame, next: self.clone() })))
    }

    fn pop(&self) -> Option<(Frame, Cont)> {
        self.0.as_ref().map(|c| (c.frame.clone(), c.next.clone()))
    }

    fn frames(&self) -> Vec<&Frame> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(c) = cur {
            out.push(&c.frame);
            cur = &c.next.0;
        }
        out
    }
}

#[derive(Clone, Debug)]
enum CpKind {
    /// Remaining clauses of a user call.
    Clauses {
        node: NodeId,
        goal: Term,
        ctx: Ctx,
        clauses: Rc<[Clause]>,
        next: usize,
        cont: Cont,
    },
    /// Second branch of a disjunction or if-then-else.
    Alt { goal: Term, ctx: Ctx, cont: Cont },
    Catch {
        frame: u64,
        node: NodeId,
        goal: Term,
        /// Catcher as instantiated when catch/3 was called.
        catcher: Term,
        handler: Term,
        ctx: Ctx,
        cont: Cont,
        exited: bool,
    },
    /// A call without alternatives, kept so its Fail port is reported.
    Call { node: NodeId },
}

#[derive(Clone, Debug)]
struct ChoicePoint {
    trail_mark: usize,
    registry_mark: usize,
    blocked: Rc<Vec<WhenAtom>>,
    kind: CpKind,
}

impl ChoicePoint {
    fn call_node(&self) -> Option<NodeId> {
        match &self.kind {
            CpKind::Clauses { node, .. } | CpKind::Call { node } => Some(*node),
            _ => None,
        }
    }
}

/// Read-only view of a choice point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoicePointInfo {
    pub kind: &'static str,
    pub node: Option<NodeId>,
    /// Untried clause alternatives (0 for non-clause choice points).
    pub alternatives: usize,
    pub trail_mark: usize,
}

/// Result of one [`Machine::step`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Continue,
    Answer(Answer),
    Exhausted,
}

enum Outcome {
    Succeed,
    Fail,
    Throw(Term),
}

/// One engine run. Owns all mutable state: goal list, choice points,
/// trail, database, target registry and trace.
pub struct Machine {
    mode: Mode,
    statics: HashMap<PredInd, Rc<[Clause]>>,
    dynamic: HashSet<PredInd>,
    db: HashMap<PredInd, Vec<Clause>>,
    store: Store,
    gen: VarGen,
    cont: Cont,
    stack: Vec<ChoicePoint>,
    blocked: Rc<Vec<WhenAtom>>,
    registry: Vec<(Term, NodeId)>,
    query_goal: Term,
    query_vars: Vec<Var>,
    next_node: NodeId,
    next_frame: u64,
    next_btid: i64,
    trace: Option<Vec<TraceEvent>>,
    steps: u64,
    max_steps: u64,
    must_backtrack: bool,
    done: bool,
}

impl Machine {
    pub fn new(program: &Program, query: &Query, opts: &SolveOptions) -> Machine {
        let mut statics = HashMap::new();
        let mut db = HashMap::new();
        for (pi, clauses) in &program.procedures {
            if program.dynamic.contains(pi) {
                db.insert(pi.clone(), clauses.clone());
            } else {
                statics.insert(pi.clone(), Rc::from(clauses.clone()));
            }
        }
        // engine serials start above anything the reader handed out
        let mut max_serial = 0;
        for c in program.clauses() {
            for v in c.vars() {
                max_serial = max_serial.max(v.serial);
            }
        }
        for v in query.goal.vars() {
            max_serial = max_serial.max(v.serial);
        }
        let mut gen = VarGen::starting_at(max_serial + 1);
        let mut renamed: HashMap<u64, Var> = HashMap::new();
        let goal = query.goal.map_vars(&mut |v| {
            Term::Var(renamed.entry(v.serial).or_insert_with(|| gen.fresh(v.name.clone())).clone())
        });
        let query_vars = query
            .answer_vars()
            .filter_map(|v| renamed.get(&v.serial).cloned())
            .collect();
        let ctx = Ctx::default();
        Machine {
            mode: opts.mode,
            statics,
            dynamic: program.dynamic.iter().cloned().collect(),
            db,
            store: Store::default(),
            gen,
            cont: Cont::default().push(Frame::Goal { goal: goal.clone(), ctx }),
            stack: Vec::new(),
            blocked: Rc::new(Vec::new()),
            registry: Vec::new(),
            query_goal: goal,
            query_vars,
            next_node: 1,
            next_frame: 0,
            next_btid: 0,
            trace: opts.trace.then(Vec::new),
            steps: 0,
            max_steps: opts.max_steps,
            must_backtrack: false,
            done: false,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn trail_len(&self) -> usize {
        self.store.trail_len()
    }

    /// The active part: remaining goals, resolved, leftmost first.
    pub fn active_goals(&self) -> Vec<Term> {
        self.cont
            .frames()
            .into_iter()
            .filter_map(|f| match f {
                Frame::Goal { goal, .. } => Some(self.store.resolve(goal)),
                _ => None,
            })
            .collect()
    }

    /// The blocked part, resolved, in blocking order.
    pub fn blocked_goals(&self) -> Vec<Term> {
        self.blocked.iter().map(|w| self.store.resolve(&w.to_term())).collect()
    }

    pub fn choice_points(&self) -> Vec<ChoicePointInfo> {
        self.stack
            .iter()
            .map(|cp| {
                let (kind, alternatives) = match &cp.kind {
                    CpKind::Clauses { clauses, next, .. } => ("clauses", clauses.len() - next),
                    CpKind::Alt { .. } => ("alt", 0),
                    CpKind::Catch { .. } => ("catch", 0),
                    CpKind::Call { .. } => ("call", 0),
                };
                ChoicePointInfo { kind, node: cp.call_node(), alternatives, trail_mark: cp.trail_mark }
            })
            .collect()
    }

    /// Backjump targets currently registered, oldest first.
    pub fn registered_targets(&self) -> Vec<(Term, NodeId)> {
        self.registry.clone()
    }

    /// Runs until the next answer, exhaustion, or an error.
    pub fn next_answer(&mut self) -> Result<Option<Answer>, EngineError> {
        loop {
            match self.step()? {
                Step::Continue => {}
                Step::Answer(a) => return Ok(Some(a)),
                Step::Exhausted => return Ok(None),
            }
        }
    }

    /// Performs exactly one successor step.
    pub fn step(&mut self) -> Result<Step, EngineError> {
        if self.done {
            return Ok(Step::Exhausted);
        }
        self.steps += 1;
        if self.steps > self.max_steps {
            self.done = true;
            return Err(EngineError::StepLimit(self.max_steps));
        }
        let result = self.step_inner();
        if result.is_err() {
            self.done = true;
        }
        let step = result?;
        if !self.blocked.is_empty() && step == Step::Continue {
            self.rewake();
        }
        Ok(step)
    }

    fn step_inner(&mut self) -> Result<Step, EngineError> {
        if self.must_backtrack {
            self.must_backtrack = false;
            return Ok(if self.backtrack() {
                Step::Continue
            } else {
                self.done = true;
                Step::Exhausted
            });
        }
        let Some((frame, rest)) = self.cont.pop() else {
            let answer = self.answer();
            let goal = self.store.resolve(&self.query_goal);
            self.emit(TraceEvent::new(Port::Answer, 0, goal));
            self.must_backtrack = true;
            return Ok(Step::Answer(answer));
        };
        self.cont = rest;
        match frame {
            Frame::Goal { goal, ctx } => self.run_goal(goal, ctx)?,
            Frame::Exit { node, goal } => {
                let g = self.store.resolve(&goal);
                self.emit(TraceEvent::new(Port::Exit, node, g));
            }
            Frame::CatchExit { frame, node, goal } => {
                if let Some(cp) = self.find_catch(frame) {
                    if let CpKind::Catch { exited, .. } = &mut self.stack[cp].kind {
                        *exited = true;
                    }
                    self.store.push(TrailEntry::CatchExited(frame));
                }
                let g = self.store.resolve(&goal);
                self.emit(TraceEvent::new(Port::Exit, node, g));
            }
            Frame::Commit { height } => self.cut_to(height),
        }
        Ok(Step::Continue)
    }

    fn answer(&self) -> Answer {
        Answer {
            bindings: self
                .query_vars
                .iter()
                .map(|v| {
                    (v.display_name(), self.store.resolve(&Term::Var(v.clone())))
                })
                .collect(),
            residue: self.blocked_goals(),
        }
    }

    fn emit(&mut self, ev: TraceEvent) {
        if let Some(t) = &mut self.trace {
            t.push(ev);
        }
    }

    fn new_node(&mut self) -> NodeId {
        let n = self.next_node;
        self.next_node += 1;
        n
    }

    fn push_cp(&mut self, kind: CpKind) {
        self.stack.push(ChoicePoint {
            trail_mark: self.store.trail_len(),
            registry_mark: self.registry.len(),
            blocked: self.blocked.clone(),
            kind,
        });
    }

    fn pop_cp(&mut self) -> Option<ChoicePoint> {
        let cp = self.stack.pop()?;
        if let Some(node) = cp.call_node() {
            self.registry.retain(|(_, n)| *n != node);
        }
        Some(cp)
    }

    fn cut_to(&mut self, height: usize) {
        while self.stack.len() > height {
            self.pop_cp();
        }
    }

    fn find_catch(&self, frame: u64) -> Option<usize> {
        self.stack
            .iter()
            .rposition(|cp| matches!(cp.kind, CpKind::Catch { frame: f, .. } if f == frame))
    }

    /// Undoes bindings to `mark`. Catch goals re-entered by the undo report Redo.
    fn undo_to(&mut self, mark: usize, report: bool) {
        for frame in self.store.undo_to(mark) {
            if let Some(i) = self.find_catch(frame) {
                if let CpKind::Catch { exited, node, goal, .. } = &mut self.stack[i].kind {
                    *exited = false;
                    let (node, goal) = (*node, goal.clone());
                    if report {
                        let g = self.store.resolve(&goal);
                        self.emit(TraceEvent::new(Port::Redo, node, g));
                    }
                }
            }
        }
    }

    /// Chronological backtracking; false when no choice point is left.
    fn backtrack(&mut self) -> bool {
        loop {
            let Some(top) = self.stack.last() else { return false };
            let (mark, blocked) = (top.trail_mark, top.blocked.clone());
            let registry_mark = top.registry_mark;
            self.registry.truncate(registry_mark);
            self.undo_to(mark, true);
            debug_assert_eq!(self.store.trail_len(), mark);
            self.blocked = blocked;
            let top = self.stack.last().unwrap().kind.clone();
            match top {
                CpKind::Clauses { node, goal, clauses, next, .. } if next < clauses.len() => {
                    let g = self.store.resolve(&goal);
                    self.emit(TraceEvent::new(Port::Redo, node, g));
                    if self.resume_clauses() {
                        return true;
                    }
                }
                CpKind::Clauses { node, goal, .. } => {
                    self.pop_cp();
                    let g = self.store.resolve(&goal);
                    self.emit(TraceEvent::new(Port::Fail, node, g));
                }
                CpKind::Call { node } => {
                    self.pop_cp();
                    self.emit_fail_for(node);
                }
                CpKind::Alt { goal, ctx, cont } => {
                    self.pop_cp();
                    self.cont = cont.push(Frame::Goal { goal, ctx });
                    return true;
                }
                CpKind::Catch { node, goal, .. } => {
                    self.pop_cp();
                    let g = self.store.resolve(&goal);
                    self.emit(TraceEvent::new(Port::Fail, node, g));
                }
            }
        }
    }

    fn emit_fail_for(&mut self, node: NodeId) {
        // the goal of a Call choice point is the one shown at its Call port
        let goal = self
            .trace()
            .iter()
            .rev()
            .find(|e| e.node == node && e.port == Port::Call)
            .map(|e| e.goal.clone())
            .unwrap_or_else(|| Term::atom("true"));
        self.emit(TraceEvent::new(Port::Fail, node, goal));
    }

    /// Tries the remaining clauses of the Clauses choice point on top of the
    /// stack. On exhaustion pops it and reports Fail.
    fn resume_clauses(&mut self) -> bool {
        let mark = self.stack.last().unwrap().trail_mark;
        let CpKind::Clauses { node, goal, ctx, clauses, next, cont } =
            self.stack.last().unwrap().kind.clone()
        else {
            unreachable!("top choice point is not a clause choice point")
        };
        for (i, clause) in clauses.iter().enumerate().skip(next) {
            let c = rename_apart(clause, &mut self.gen);
            if self.store.unify(&goal, &c.head) {
                if let CpKind::Clauses { next, .. } = &mut self.stack.last_mut().unwrap().kind {
                    *next = i + 1;
                }
                let body_ctx = Ctx { parent: node, depth: ctx.depth + 1 };
                self.cont = cont.push(Frame::Exit { node, goal: goal.clone() });
                if !c.is_fact() {
                    self.cont = self.cont.push(Frame::Goal { goal: c.body, ctx: body_ctx });
                }
                return true;
            }
            self.undo_to(mark, false);
        }
        self.pop_cp();
        let g = self.store.resolve(&goal);
        self.emit(TraceEvent::new(Port::Fail, node, g));
        false
    }

    fn rewake(&mut self) {
        let store = &self.store;
        let (woken, remaining) = coroutine::partition_woken(&self.blocked, &|t| store.resolve(t));
        if woken.is_empty() {
            return;
        }
        self.blocked = Rc::new(remaining);
        for w in woken.iter().rev() {
            self.cont = self.cont.push(Frame::Goal { goal: w.to_term(), ctx: w.ctx });
        }
        for w in &woken {
            let g = self.store.resolve(&w.to_term());
            self.emit(TraceEvent::new(Port::Unblock, w.node, g));
        }
    }

    fn run_goal(&mut self, goal: Term, ctx: Ctx) -> Result<(), EngineError> {
        let goal = self.store.deref(&goal);
        let (name, args) = match &goal {
            Term::Var(_) => return self.raise_from(None, instantiation_error()),
            Term::Int(_) => return self.raise_from(None, type_error("callable", goal.clone())),
            Term::Atom(n) => (n.clone(), Vec::new()),
            Term::Compound(n, a) => (n.clone(), a.to_vec()),
        };
        match (&*name, args.len()) {
            (",", 2) => {
                self.cont = self
                    .cont
                    .push(Frame::Goal { goal: args[1].clone(), ctx })
                    .push(Frame::Goal { goal: args[0].clone(), ctx });
            }
            (";", 2) => {
                let left = self.store.deref(&args[0]);
                if left.is_functor("->", 2) {
                    let (c, t) = (left.args()[0].clone(), left.args()[1].clone());
                    self.if_then_else(c, t, args[1].clone(), ctx);
                } else {
                    self.push_cp(CpKind::Alt { goal: args[1].clone(), ctx, cont: self.cont.clone() });
                    self.cont = self.cont.push(Frame::Goal { goal: left, ctx });
                }
            }
            ("->", 2) => self.if_then_else(args[0].clone(), args[1].clone(), Term::atom("fail"), ctx),
            ("\\+", 1) => {
                self.if_then_else(args[0].clone(), Term::atom("fail"), Term::atom("true"), ctx)
            }
            ("call", 1) => {
                self.cont = self.cont.push(Frame::Goal { goal: args[0].clone(), ctx });
            }
            ("when", 2) => self.select_when(&args[0], &args[1], ctx)?,
            ("catch", 3) => {
                let node = self.new_node();
                let shown = self.store.resolve(&goal);
                self.emit(TraceEvent::new(Port::Call, node, shown));
                let frame = self.next_frame;
                self.next_frame += 1;
                self.push_cp(CpKind::Catch {
                    frame,
                    node,
                    goal: goal.clone(),
                    catcher: self.store.resolve(&args[1]),
                    handler: args[2].clone(),
                    ctx,
                    cont: self.cont.clone(),
                    exited: false,
                });
                self.cont = self
                    .cont
                    .push(Frame::CatchExit { frame, node, goal: goal.clone() })
                    .push(Frame::Goal { goal: args[0].clone(), ctx });
            }
            _ => {
                let pi = PredInd { name: name.clone(), arity: args.len() };
                if super::is_builtin(&pi) {
                    self.call_builtin(&goal, &pi, &args, ctx)?;
                } else {
                    self.call_user(goal, pi, ctx)?;
                }
            }
        }
        Ok(())
    }

    fn if_then_else(&mut self, cond: Term, then: Term, els: Term, ctx: Ctx) {
        let height = self.stack.len();
        self.push_cp(CpKind::Alt { goal: els, ctx, cont: self.cont.clone() });
        self.cont = self
            .cont
            .push(Frame::Goal { goal: then, ctx })
            .push(Frame::Commit { height })
            .push(Frame::Goal { goal: cond, ctx });
    }

    fn select_when(&mut self, cond: &Term, body: &Term, ctx: Ctx) -> Result<(), EngineError> {
        let store = &self.store;
        match coroutine::eval_condition(cond, &|t| store.resolve(t)) {
            Ok(true) => {
                self.cont = self.cont.push(Frame::Goal { goal: body.clone(), ctx });
                Ok(())
            }
            Ok(false) => {
                let node = self.new_node();
                let atom = WhenAtom { condition: cond.clone(), goal: body.clone(), ctx, node };
                let shown = self.store.resolve(&atom.to_term());
                Rc::make_mut(&mut self.blocked).push(atom);
                self.emit(TraceEvent::new(Port::Block, node, shown));
                Ok(())
            }
            Err(_) => {
                let c = self.store.resolve(cond);
                self.raise_from(None, domain_error("when_condition", c))
            }
        }
    }

    fn call_user(&mut self, goal: Term, pi: PredInd, ctx: Ctx) -> Result<(), EngineError> {
        let clauses: Rc<[Clause]> = if let Some(cs) = self.statics.get(&pi) {
            cs.clone()
        } else if let Some(cs) = self.db.get(&pi) {
            Rc::from(cs.clone())
        } else if self.dynamic.contains(&pi) {
            Rc::from(Vec::new())
        } else {
            return Err(EngineError::UnknownPredicate(pi));
        };
        let node = self.new_node();
        let shown = self.store.resolve(&goal);
        self.emit(TraceEvent::new(Port::Call, node, shown));
        self.push_cp(CpKind::Clauses { node, goal, ctx, clauses, next: 0, cont: self.cont.clone() });
        if !self.resume_clauses() {
            self.must_backtrack = true;
        }
        Ok(())
    }

    fn call_builtin(
        &mut self,
        goal: &Term,
        pi: &PredInd,
        args: &[Term],
        ctx: Ctx,
    ) -> Result<(), EngineError> {
        let node = self.new_node();
        let shown = self.store.resolve(goal);
        self.emit(TraceEvent::new(Port::Call, node, shown));
        let outcome = match (&*pi.name, pi.arity) {
            ("true", 0) => Outcome::Succeed,
            ("fail", 0) | ("false", 0) => Outcome::Fail,
            ("=", 2) => self.unify_outcome(&args[0], &args[1]),
            ("var", 1) => bool_outcome(self.store.deref(&args[0]).is_var()),
            ("nonvar", 1) => bool_outcome(!self.store.deref(&args[0]).is_var()),
            ("ground", 1) => bool_outcome(self.store.resolve(&args[0]).is_ground()),
            ("is", 2) => match builtins::eval(&self.store, &args[1]) {
                Ok(v) => self.unify_outcome(&args[0], &Term::Int(v)),
                Err(ball) => Outcome::Throw(ball),
            },
            (op @ ("<" | ">" | ">=" | "=<" | "=:=" | "=\\="), 2) => {
                match (builtins::eval(&self.store, &args[0]), builtins::eval(&self.store, &args[1])) {
                    (Ok(a), Ok(b)) => bool_outcome(builtins::compare(op, a, b)),
                    (Err(ball), _) | (_, Err(ball)) => Outcome::Throw(ball),
                }
            }
            ("assertz", 1) | ("assert", 1) => self.assertz(&args[0]),
            ("retract", 1) => self.retract(&args[0]),
            ("throw", 1) => {
                let ball = self.store.resolve(&args[0]);
                if ball.is_var() {
                    Outcome::Throw(instantiation_error())
                } else {
                    Outcome::Throw(ball)
                }
            }
            ("btid", 2) => self.btid(&args[1], ctx),
            ("bt_register", 1) => {
                let id = self.store.resolve(&args[0]);
                if id.is_ground() {
                    self.registry.push((id, ctx.parent));
                    Outcome::Succeed
                } else {
                    Outcome::Throw(instantiation_error())
                }
            }
            ("backjump", 1) => return self.backjump(node, goal, &args[0]),
            _ => unreachable!("builtin {pi} without implementation"),
        };
        match outcome {
            Outcome::Succeed => {
                let g = self.store.resolve(goal);
                self.emit(TraceEvent::new(Port::Exit, node, g));
            }
            Outcome::Fail => {
                let g = self.store.resolve(goal);
                self.emit(TraceEvent::new(Port::Fail, node, g));
                self.must_backtrack = true;
            }
            Outcome::Throw(ball) => self.raise_from(Some(node), ball)?,
        }
        Ok(())
    }

    fn unify_outcome(&mut self, a: &Term, b: &Term) -> Outcome {
        let mark = self.store.trail_len();
        if self.store.unify(a, b) {
            Outcome::Succeed
        } else {
            self.undo_to(mark, false);
            Outcome::Fail
        }
    }

    fn btid(&mut self, slot: &Term, ctx: Ctx) -> Outcome {
        let slot = self.store.deref(slot);
        let Term::Var(v) = &slot else {
            return Outcome::Throw(type_error("variable", self.store.resolve(&slot)));
        };
        let id = Term::Int(self.next_btid);
        self.next_btid += 1;
        self.store.bind(v, id.clone());
        self.registry.push((id, ctx.parent));
        Outcome::Succeed
    }

    fn backjump(&mut self, node: NodeId, goal: &Term, id: &Term) -> Result<(), EngineError> {
        if self.mode != Mode::NativeBj {
            return Err(EngineError::UnsupportedBuiltin(PredInd::new("backjump", 1)));
        }
        let id = self.store.resolve(id);
        let target = self.registry.iter().rev().find(|(k, _)| *k == id).map(|(_, n)| *n);
        let index = target.and_then(|t| self.stack.iter().rposition(|cp| cp.call_node() == Some(t)));
        let Some(index) = index else {
            return Err(EngineError::UnknownTarget(id));
        };
        let g = self.store.resolve(goal);
        self.emit(TraceEvent::new(Port::Backjump, node, g).with_payload(id));
        self.cut_to(index + 1);
        self.must_backtrack = true;
        Ok(())
    }

    fn assertz(&mut self, t: &Term) -> Outcome {
        let t = self.store.resolve(t);
        let (head, body) = if t.is_functor(":-", 2) {
            (t.args()[0].clone(), t.args()[1].clone())
        } else {
            (t.clone(), Term::atom("true"))
        };
        if head.is_var() {
            return Outcome::Throw(instantiation_error());
        }
        let Some(pi) = head.indicator() else {
            return Outcome::Throw(type_error("callable", head));
        };
        if self.statics.contains_key(&pi) || super::is_builtin(&pi) {
            return Outcome::Throw(permission_error("modify", "static_procedure", &pi));
        }
        self.dynamic.insert(pi.clone());
        self.db.entry(pi).or_default().push(Clause::new(head, body));
        Outcome::Succeed
    }

    fn retract(&mut self, t: &Term) -> Outcome {
        let t = self.store.resolve(t);
        let (head, body) = if t.is_functor(":-", 2) {
            (t.args()[0].clone(), t.args()[1].clone())
        } else {
            (t.clone(), Term::atom("true"))
        };
        let Some(pi) = head.indicator() else {
            return Outcome::Throw(if head.is_var() {
                instantiation_error()
            } else {
                type_error("callable", head)
            });
        };
        if self.statics.contains_key(&pi) {
            return Outcome::Throw(permission_error("modify", "static_procedure", &pi));
        }
        let Some(clauses) = self.db.get(&pi).cloned() else {
            return Outcome::Fail;
        };
        for (i, clause) in clauses.iter().enumerate() {
            let c = rename_apart(clause, &mut self.gen);
            let mark = self.store.trail_len();
            if self.store.unify(&head, &c.head) && self.store.unify(&body, &c.body) {
                self.db.get_mut(&pi).unwrap().remove(i);
                return Outcome::Succeed;
            }
            self.undo_to(mark, false);
        }
        Outcome::Fail
    }

    /// Emits Throw and transfers control to the nearest live catch frame
    /// whose catcher unifies with a fresh copy of `ball`.
    fn raise_from(&mut self, node: Option<NodeId>, ball: Term) -> Result<(), EngineError> {
        let node = node.unwrap_or_else(|| self.new_node());
        let ball = self.store.resolve(&ball);
        self.emit(
            TraceEvent::new(Port::Throw, node, Term::compound("throw", vec![ball.clone()]))
                .with_payload(ball.clone()),
        );
        let mut found = None;
        for (i, cp) in self.stack.iter().enumerate().rev() {
            if let CpKind::Catch { exited: false, catcher, .. } = &cp.kind {
                let copy = rename_term(&ball, &mut self.gen);
                if unify(&copy, catcher, &Subst::new()).is_some() {
                    found = Some(i);
                    break;
                }
            }
        }
        let Some(index) = found else {
            return Err(EngineError::UncaughtBall(ball));
        };
        self.cut_to(index + 1);
        let cp = self.pop_cp().unwrap();
        self.registry.truncate(cp.registry_mark);
        self.undo_to(cp.trail_mark, false);
        self.blocked = cp.blocked;
        let CpKind::Catch { node: catch_node, goal, catcher, handler, ctx, cont, .. } = cp.kind else {
            unreachable!()
        };
        let copy = rename_term(&ball, &mut self.gen);
        let unified = self.store.unify(&copy, &catcher);
        debug_assert!(unified);
        let shown = self.store.resolve(&goal);
        self.emit(TraceEvent::new(Port::Catch, catch_node, shown).with_payload(ball));
        self.push_cp(CpKind::Call { node: catch_node });
        self.cont = cont
            .push(Frame::Exit { node: catch_node, goal })
            .push(Frame::Goal { goal: handler, ctx });
        Ok(())
    }
}

fn bool_outcome(b: bool) -> Outcome {
    if b {
        Outcome::Succeed
    } else {
        Outcome::Fail
    }
}
