//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bjlab::corpus::check::{query, answers_cover_oracle, covered_models, project_answers, run, Projected};
use bjlab::corpus::cnf::{exhaustive_two_var, lost_answers_example, oracle, random_cnfs, seed_from_env, Cnf};
use bjlab::corpus::programs::{self, Named};
use bjlab::corpus::traces::{check_level_invariant, diff_traces, project_trace};
use bjlab::engine::trace::check_well_formed;
use bjlab::engine::{solve, EngineError, Mode, Port, Solution, SolveOptions, TraceEvent};
use bjlab::reader::{format, format_clause, parse_program, parse_query, parse_term};
use bjlab::terms::{PredInd, Term};
use bjlab::transform;

const CORPUS_SIZE: usize = 500;

fn corpus() -> Vec<Cnf> {
    random_cnfs(seed_from_env(), CORPUS_SIZE)
}

fn run_src(src: &str, query: &str, mode: Mode) -> Solution {
    let p = parse_program(src).expect("test program parses");
    let q = parse_query(query).expect("test query parses");
    solve(&p, &q, &SolveOptions::mode(mode))
}

fn answer_strings(sol: &Solution) -> Vec<String> {
    sol.answers.iter().map(|a| a.to_string()).collect()
}

fn keep(preds: &[(&str, usize)]) -> BTreeSet<PredInd> {
    preds.iter().map(|(n, a)| PredInd::new(n, *a)).collect()
}

/// Expected outcome of a small engine case.
enum Expect {
    Answers(&'static [&'static str]),
    Uncaught(&'static str),
}

fn check_cases(cases: &[(&str, &str, Expect)]) -> Result<String, String> {
    for (src, query, expect) in cases {
        let sol = run_src(src, query, Mode::Iso);
        check_well_formed(&sol.trace).map_err(|e| format!("`{query}`: {e}"))?;
        match expect {
            Expect::Answers(want) => {
                if sol.error.is_some() || answer_strings(&sol) != *want {
                    return Err(format!("`{query}`: got {:?} / {:?}, want {want:?}", answer_strings(&sol), sol.error));
                }
            }
            Expect::Uncaught(ball) => match &sol.error {
                Some(EngineError::UncaughtBall(b)) if format(b) == *ball => {}
                other => return Err(format!("`{query}`: got {other:?}, want uncaught {ball}")),
            },
        }
    }
    Ok(format!("{} cases", cases.len()))
}

fn c1_catch_throw() -> Result<String, String> {
    use Expect::*;
    check_cases(&[
        ("", "catch(throw(a), a, true)", Answers(&["true"])),
        ("", "catch(true, b, true), throw(b)", Uncaught("b")),
        ("q :- throw(c).", "catch(q, b, fail)", Uncaught("c")),
        ("", "catch(throw(f(1)), f(X), true)", Answers(&["X=1"])),
        ("q :- throw(x).", "catch(q, x, fail)", Answers(&[])),
        ("", "catch(catch(throw(a), a, X = inner), a, X = outer)", Answers(&["X=inner"])),
        ("", "catch(catch(throw(a), b, X = inner), a, X = outer)", Answers(&["X=outer"])),
        ("", "catch((X = 1, throw(e)), e, true)", Answers(&["X=X"])),
        ("", "catch((X = 1, throw(f(X))), f(Y), true)", Answers(&["X=X,Y=1"])),
        ("n(1). n(2). n(3).", "catch((n(X), X >= 2, throw(stop)), stop, true)", Answers(&["X=X"])),
        ("n(1). n(2).", "catch(n(X), _, true)", Answers(&["X=1", "X=2"])),
        ("n(1). n(2).", "catch(n(X), two, true), X >= 2, throw(two)", Uncaught("two")),
        ("n(1). n(2). t(1). t(2) :- throw(two).", "catch((n(X), t(X)), two, true), X = 2", Answers(&["X=2"])),
        ("", "catch(X is foo + 1, type_error(T, _), true)", Answers(&["X=X,T=evaluable"])),
        ("", "throw(_)", Uncaught("instantiation_error")),
        ("p(X) :- catch(b(X), s, fail). p(3). b(1). b(2) :- throw(s). b(9).", "p(X)", Answers(&["X=1", "X=3"])),
    ])
}

fn c2_oracle_p1() -> Result<String, String> {
    let random = corpus();
    let exhaustive = exhaustive_two_var();
    for (i, c) in random.iter().chain(&exhaustive).enumerate() {
        let sol = run(Named::P1, c, false);
        if let Some(e) = sol.error {
            return Err(format!("instance {i} ({c}): {e}"));
        }
        let v = answers_cover_oracle(&project_answers(c, &sol), c);
        if !v.holds() {
            return Err(format!("instance {i} ({c}): {v:?}"));
        }
    }
    Ok(format!("{} random + {} exhaustive CNFs", random.len(), exhaustive.len()))
}

fn answer_set(c: &Cnf, sol: &Solution) -> BTreeSet<Projected> {
    project_answers(c, sol).into_iter().collect()
}

fn c3_leveled() -> Result<String, String> {
    let mut events = 0;
    for (i, c) in corpus().iter().enumerate() {
        let base = answer_set(c, &run(Named::P1, c, false));
        for n in [Named::P2, Named::Pb2] {
            let sol = run(n, c, true);
            if let Some(e) = &sol.error {
                return Err(format!("{} on instance {i}: {e}", n.name()));
            }
            if answer_set(c, &sol) != base {
                return Err(format!("{} on instance {i} ({c}): assignments differ from P1", n.name()));
            }
            check_level_invariant(&sol.trace).map_err(|e| format!("{} on instance {i}: {e}", n.name()))?;
            events += sol.trace.len();
        }
    }
    Ok(format!("{CORPUS_SIZE} instances, invariant checked over {events} events"))
}

fn c4_lost_answers() -> Result<String, String> {
    let c = lost_answers_example();
    let z = c.var_index("z").expect("formula has z");
    if !oracle(&c).expect("small").iter().any(|m| m[z]) {
        return Err("oracle has no model with z true".into());
    }
    let mut counts = Vec::new();
    for n in [Named::P3, Named::Pb3] {
        let sol = run(n, &c, false);
        if let Some(e) = &sol.error {
            return Err(format!("{}: {e}", n.name()));
        }
        let answers = project_answers(&c, &sol);
        if answers.iter().any(|a| a[z] != Some(false)) {
            return Err(format!("{}: an answer leaves z open or true: {answers:?}", n.name()));
        }
        if covered_models(&answers, &c).iter().any(|m| m[z]) {
            return Err(format!("{}: a model with z true is covered", n.name()));
        }
        if !answers_cover_oracle(&answers, &c).sound() {
            return Err(format!("{}: unsound answers", n.name()));
        }
        counts.push(format!("{} {} answers", n.name(), answers.len()));
    }
    Ok(format!("{}; no z=true answer", counts.join(", ")))
}

/// Parses the display form `Port(node) goal [payload]`.
fn parse_event(s: &str) -> TraceEvent {
    let (head, rest) = s.split_once(") ").expect("event has a node");
    let (port, node) = head.split_once('(').expect("event has a port");
    let port = match port {
        "Call" => Port::Call,
        "Exit" => Port::Exit,
        "Redo" => Port::Redo,
        "Fail" => Port::Fail,
        "Backjump" => Port::Backjump,
        "Answer" => Port::Answer,
        other => panic!("unexpected port {other}"),
    };
    let (goal, payload) = match rest.split_once(" [") {
        Some((g, p)) => (g, Some(parse_term(p.trim_end_matches(']')).expect("payload parses"))),
        None => (rest, None),
    };
    let e = TraceEvent::new(port, node.parse().expect("numeric node"), parse_term(goal).expect("goal parses"));
    match payload {
        Some(p) => e.with_payload(p),
        None => e,
    }
}

const RESUMPTION: &str = "
top(X) :- c(X), d(X).
top(fallback).
c(1) :- bt_register(t1).
c(2) :- bt_register(t2).
c(3) :- bt_register(t3).
d(1) :- backjump(t1).
d(2).
d(3) :- backjump(t3).
";

fn c5_resumption() -> Result<String, String> {
    // child 1 backjumps: resume at child 2; child 3 (the last) backjumps:
    // the target fails and the parent's next alternative runs
    let expected = [
        "Call(1) top(X)",
        "Call(2) c(Y)",
        "Call(3) bt_register(t1)",
        "Exit(3) bt_register(t1)",
        "Exit(2) c(1)",
        "Call(4) d(1)",
        "Call(5) backjump(t1)",
        "Backjump(5) backjump(t1) [t1]",
        "Redo(2) c(Y)",
        "Call(6) bt_register(t2)",
        "Exit(6) bt_register(t2)",
        "Exit(2) c(2)",
        "Call(7) d(2)",
        "Exit(7) d(2)",
        "Exit(1) top(2)",
        "Answer(0) top(2)",
        "Redo(7) d(2)",
        "Fail(7) d(2)",
        "Redo(2) c(Y)",
        "Call(8) bt_register(t3)",
        "Exit(8) bt_register(t3)",
        "Exit(2) c(3)",
        "Call(9) d(3)",
        "Call(10) backjump(t3)",
        "Backjump(10) backjump(t3) [t3]",
        "Fail(2) c(Y)",
        "Redo(1) top(X)",
        "Exit(1) top(fallback)",
        "Answer(0) top(fallback)",
        "Fail(1) top(X)",
    ];
    let sol = run_src(RESUMPTION, "top(X)", Mode::NativeBj);
    if let Some(e) = sol.error {
        return Err(e.to_string());
    }
    let expected: Vec<TraceEvent> = expected.iter().map(|s| parse_event(s)).collect();
    if let Some(d) = diff_traces(&sol.trace, &expected) {
        return Err(d.to_string());
    }
    Ok(format!("{} events match", expected.len()))
}

const COUNTER_NATIVE: &str = "
q(X, Y) :- pick(X, T), work(X, Y, T).
pick(1, T) :- btid(1, T).
pick(2, T) :- btid(2, T).
pick(3, T) :- btid(3, T).
work(1, _, T) :- backjump(T).
work(2, a, _).
work(3, b, _).
";

const COUNTER_CATCH: &str = "
q(X, Y) :- catch((pick(X, T), work(X, Y, T)), T, fail).
pick(1, T) :- btid(1, T).
pick(2, T) :- btid(2, T).
pick(3, T) :- btid(3, T).
work(1, _, T) :- throw(T).
work(2, a, _).
work(3, b, _).
";

fn c6_counterexample() -> Result<String, String> {
    let native = run_src(COUNTER_NATIVE, "q(X, Y)", Mode::NativeBj);
    let caught = run_src(COUNTER_CATCH, "q(X, Y)", Mode::Iso);
    if native.error.is_some() || caught.error.is_some() {
        return Err(format!("errors: {:?} / {:?}", native.error, caught.error));
    }
    let (na, ca) = (answer_strings(&native), answer_strings(&caught));
    if na != ["X=2,Y=a", "X=3,Y=b"] || !ca.is_empty() {
        return Err(format!("native {na:?}, catch {ca:?}"));
    }
    let k = keep(&[("q", 2), ("pick", 2), ("work", 3)]);
    let d = diff_traces(&project_trace(&native.trace, &k), &project_trace(&caught.trace, &k))
        .ok_or("projected traces are equal")?;
    let (Some(l), Some(r)) = (&d.left, &d.right) else {
        return Err(format!("unexpected divergence: {d}"));
    };
    if !(l.port == Port::Redo && l.goal.is_functor("pick", 2) && r.port == Port::Fail && r.goal.is_functor("q", 2)) {
        return Err(format!("unexpected divergence: {d}"));
    }
    Ok(format!("catch run misses {} answers; native redoes {} where catch run fails {}", na.len(), format(&l.goal), format(&r.goal)))
}

fn c7_approach1() -> Result<String, String> {
    let derived = transform::approach1(&programs::pb2_with_throw(), &programs::pb3_spec()).map_err(|e| e.to_string())?;
    let pb3 = Named::Pb3.program();
    let clauses = |p: &bjlab::reader::Program| p.clauses().map(format_clause).collect::<Vec<_>>();
    if clauses(&derived) != clauses(&pb3) {
        return Err("approach 1 on Pb2 does not give Pb3".into());
    }
    let k = keep(&[("sat_b", 3)]);
    for (i, c) in corpus().iter().enumerate() {
        let native = run(Named::Pb2Native, c, true);
        let iso = run(Named::Pb3, c, true);
        if native.error.is_some() || iso.error.is_some() {
            return Err(format!("instance {i}: {:?} / {:?}", native.error, iso.error));
        }
        if answer_strings(&native) != answer_strings(&iso) {
            return Err(format!("instance {i} ({c}): answers differ"));
        }
        if let Some(d) = diff_traces(&project_trace(&native.trace, &k), &project_trace(&iso.trace, &k)) {
            return Err(format!("instance {i} ({c}): {d}"));
        }
    }
    Ok(format!("{CORPUS_SIZE} instances, traces and answers identical"))
}

fn c8_approach1a() -> Result<String, String> {
    for (i, c) in corpus().iter().enumerate() {
        let a = run(Named::Pb3a, c, false);
        let b = run(Named::Pb3, c, false);
        if a.error.is_some() || b.error.is_some() {
            return Err(format!("instance {i}: {:?} / {:?}", a.error, b.error));
        }
        if project_answers(c, &a) != project_answers(c, &b) {
            return Err(format!("instance {i} ({c}): {:?} vs {:?}", answer_strings(&a), answer_strings(&b)));
        }
    }
    Ok(format!("{CORPUS_SIZE} instances"))
}

fn c9_dbsim() -> Result<String, String> {
    let k = keep(&[("sat_b", 3), ("new_highest", 3)]);
    let original = parse_program(&programs::pb2_db_source()).map_err(|e| e.to_string())?;
    let mut quiet = 0;
    for (i, c) in corpus().iter().enumerate() {
        let native = run(Named::Pb2Native, c, true);
        let db = run(Named::Pb2Db, c, true);
        if native.error.is_some() || db.error.is_some() {
            return Err(format!("instance {i}: {:?} / {:?}", native.error, db.error));
        }
        if project_answers(c, &native) != project_answers(c, &db) {
            return Err(format!("instance {i} ({c}): answer sequences differ"));
        }
        let backjumped = native.trace.iter().any(|e| e.port == Port::Backjump);
        if !backjumped {
            quiet += 1;
            let plain = solve(&original, &query(Named::Pb2Db, c), &SolveOptions::mode(Mode::Iso));
            if let Some(d) = diff_traces(&project_trace(&plain.trace, &k), &project_trace(&db.trace, &k)) {
                return Err(format!("instance {i} ({c}) without backjump: {d}"));
            }
        }
    }
    Ok(format!("{CORPUS_SIZE} instances, {quiet} without backjumps trace-identical to the untransformed program"))
}

fn c10_exemption() -> Result<String, String> {
    let mut catches = 0;
    for (i, c) in corpus().iter().enumerate() {
        let watched = run(Named::Pb3Watched, c, true);
        match &watched.error {
            None => {}
            Some(EngineError::UncaughtBall(b)) if b.is_functor("exemption_violated", 1) => {
                return Err(format!("instance {i} ({c}): clause 12/14 frame caught level {}", format(&b.args()[0])));
            }
            Some(e) => return Err(format!("instance {i}: {e}")),
        }
        let plain = run(Named::Pb3, c, false);
        if answer_strings(&watched) != answer_strings(&plain) {
            return Err(format!("instance {i}: watched program answers differently"));
        }
        catches += watched.trace.iter().filter(|e| e.port == Port::Catch).count();
    }
    Ok(format!("0 counterexamples; {catches} balls caught by clause-16 frames"))
}

fn c11_coroutining() -> Result<String, String> {
    let cases: &[(&str, &str, &[&str])] = &[
        ("p(a).", "when(nonvar(a), p(X))", &["X=a"]),
        ("p(_).", "when(nonvar(X), p(X))", &["X=X,residue:[when(nonvar(X),p(X))]"]),
        ("p(b). r.", "when(nonvar(X), p(X)), X = b, r", &["X=b"]),
        ("", "when(nonvar(X), X = a), X = b", &[]),
        ("", "when(nonvar(X), X = a), X = a", &["X=a"]),
        ("", "when(nonvar(a), when(nonvar(X), true))", &["X=X,residue:[when(nonvar(X),true)]"]),
        ("", "when((nonvar(X) ; nonvar(Y)), Z = woke), Y = b", &["X=X,Y=b,Z=woke"]),
        ("", "when(nonvar(X), A = 1), when(nonvar(X), B = 2), X = go", &["X=go,A=1,B=2"]),
        ("n(1). n(2).", "n(X), when(nonvar(Y), true), X = 2", &["X=2,Y=Y,residue:[when(nonvar(Y),true)]"]),
        ("", "when(nonvar(X), true), catch(throw(b), b, true)", &["X=X,residue:[when(nonvar(X),true)]"]),
        ("", "catch((when(nonvar(X), throw(w)), X = 1), w, Y = caught)", &["X=X,Y=caught"]),
        ("p(a).", "when(ground(f(X, Y)), p(Z)), X = 1, Y = 2", &["X=1,Y=2,Z=a"]),
    ];
    for (src, query, want) in cases {
        let sol = run_src(src, query, Mode::Iso);
        check_well_formed(&sol.trace).map_err(|e| format!("`{query}`: {e}"))?;
        if sol.error.is_some() || answer_strings(&sol) != *want {
            return Err(format!("`{query}`: got {:?} / {:?}, want {want:?}", answer_strings(&sol), sol.error));
        }
    }
    // wake order follows blocking order
    let sol = run_src("", "when(nonvar(X), A = 1), when(nonvar(X), B = 2), X = go", Mode::Iso);
    let woken: Vec<String> = sol.trace.iter().filter(|e| e.port == Port::Unblock).map(|e| format(&e.goal)).collect();
    if woken != ["when(nonvar(go),A=1)", "when(nonvar(go),B=2)"] {
        return Err(format!("unblock order {woken:?}"));
    }
    // the catch goal exits with a blocked atom; a later wake-up throws outside it
    let sol = run_src("", "catch(when(nonvar(X), throw(w)), w, true), X = 1", Mode::Iso);
    if !matches!(&sol.error, Some(EngineError::UncaughtBall(b)) if *b == Term::atom("w")) {
        return Err(format!("post-exit wake-up: {:?}", sol.error));
    }
    // the pseudo-answer is shown at the Exit port
    let sol = run_src("p(_).", "p(X), when(nonvar(X), true)", Mode::Iso);
    let exit = bjlab::coroutine::pseudo_answer(&sol.trace, sol.trace[0].node).ok_or("no exit")?;
    if !exit.is_functor("p", 1) {
        return Err(format!("pseudo-answer {}", format(&exit)));
    }
    Ok(format!("{} cases", cases.len() + 3))
}

type Criterion = (u32, &'static str, u64, fn() -> Result<String, String>);

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        (1, "catch/throw conformance", 1, c1_catch_throw),
        (2, "P1 against the oracle", 60, c2_oracle_p1),
        (3, "leveled programs and level invariant", 120, c3_leveled),
        (4, "lost answers of P3 and Pb3", 1, c4_lost_answers),
        (5, "backjump resumption points", 1, c5_resumption),
        (6, "catch around the target is not backjumping", 1, c6_counterexample),
        (7, "approach 1 equals native backjumping", 180, c7_approach1),
        (8, "approach 1a equals approach 1", 180, c8_approach1a),
        (9, "database simulation", 180, c9_dbsim),
        (10, "clauses 12 and 14 never catch", 180, c10_exemption),
        (11, "coroutining", 1, c11_coroutining),
    ];
    println!("corpus seed {:#x}, {CORPUS_SIZE} instances", seed_from_env());
    let mut failed = 0;
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = match result {
            Ok(s) if took > Duration::from_secs(*limit) => Err(format!("{s}, but over the {limit}s limit")),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} ({took:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail} ({took:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
