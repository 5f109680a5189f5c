//! `bjlab`: run programs, apply backjumping transforms, compare traces.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bjlab::corpus::{diff_traces, project_trace};
use bjlab::engine::trace::{read_json_lines, write_json_lines};
use bjlab::engine::{Machine, Mode, SolveOptions};
use bjlab::reader::{format_program, parse_program, parse_query, Program};
use bjlab::terms::{PredInd, Term};
use bjlab::transform::{self, parse_pred_ind, parse_split, BackjumpSpec, ClauseRef, Exemption, IdPolicy};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bjlab", version, about = "Backjumping via exceptions: engine, transforms and trace tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iso,
    NativeBj,
}

#[derive(Clone, Copy, ValueEnum)]
enum Approach {
    #[value(name = "1")]
    One,
    #[value(name = "1a")]
    OneA,
    #[value(name = "2")]
    Two,
    Dbsim,
}

#[derive(Subcommand)]
enum Command {
    /// Run a query against a program; prints one answer per line.
    Run {
        program: PathBuf,
        query: String,
        #[arg(long, value_enum, default_value = "iso")]
        mode: ModeArg,
        /// Write the trace as JSON lines to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        max_solutions: Option<usize>,
    },
    /// Print the transformed program.
    Transform {
        program: PathBuf,
        #[arg(long, value_enum)]
        approach: Approach,
        /// Target procedure `name/arity`; defaults to every procedure.
        #[arg(long = "target", value_delimiter = ',')]
        targets: Vec<String>,
        /// Clause `name/arity:index` left unchanged.
        #[arg(long = "exempt", value_delimiter = ',')]
        exempt: Vec<String>,
        /// Clause `name/arity:index` exempted by a runtime check on its id.
        #[arg(long = "exempt-dynamic", value_delimiter = ',')]
        exempt_dynamic: Vec<String>,
        /// Split `name/arity:clause:position` for approach 2.
        #[arg(long = "split", value_delimiter = ',')]
        splits: Vec<String>,
        /// Use this head argument (1-based) as the target id instead of btid/2.
        #[arg(long)]
        id_from_arg: Option<usize>,
    },
    /// Compare two JSON-lines traces; exit 0 when equal, 1 on divergence.
    DiffTraces {
        a: PathBuf,
        b: PathBuf,
        /// Keep only these predicates `name/arity` before comparing.
        #[arg(long, value_delimiter = ',')]
        project: Vec<String>,
    },
}

/// Failure with a message for standard error; always exit status 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn mentions_backjump(t: &Term) -> bool {
    t.is_functor("backjump", 1) || t.args().iter().any(mentions_backjump)
}

fn cmd_run(
    program: &Path,
    query: &str,
    mode: ModeArg,
    trace: Option<&Path>,
    max_steps: Option<u64>,
    max_solutions: Option<usize>,
) -> Result<ExitCode, Failure> {
    let p = load_program(program)?;
    let q = parse_query(query).map_err(|e| Failure(format!("query: {e}")))?;
    let mode = match mode {
        ModeArg::Iso => Mode::Iso,
        ModeArg::NativeBj => Mode::NativeBj,
    };
    if mode == Mode::Iso && (p.clauses().any(|c| mentions_backjump(&c.body)) || mentions_backjump(&q.goal)) {
        return Err(Failure("the program uses backjump/1; run it with --mode native-bj".into()));
    }
    let mut opts = SolveOptions::mode(mode);
    opts.trace = trace.is_some();
    if let Some(n) = max_steps {
        opts.max_steps = n;
    }
    let mut m = Machine::new(&p, &q, &opts);
    let mut found = 0;
    let mut error = None;
    while max_solutions.is_none_or(|n| found < n) {
        match m.next_answer() {
            Ok(Some(a)) => {
                println!("{a}");
                found += 1;
            }
            Ok(None) => break,
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    if let Some(path) = trace {
        fs::write(path, write_json_lines(m.trace())).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    match error {
        Some(e) => Err(e.into()),
        None if found > 0 => Ok(ExitCode::SUCCESS),
        None => Ok(ExitCode::from(1)),
    }
}

fn clause_refs(items: &[String]) -> Result<Vec<ClauseRef>, Failure> {
    items.iter().map(|s| s.parse::<ClauseRef>().map_err(Failure::from)).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_transform(
    program: &Path,
    approach: Approach,
    targets: &[String],
    exempt: &[String],
    exempt_dynamic: &[String],
    splits: &[String],
    id_from_arg: Option<usize>,
) -> Result<ExitCode, Failure> {
    let p = load_program(program)?;
    let targets: Vec<PredInd> = if targets.is_empty() {
        p.procedures.keys().cloned().collect()
    } else {
        targets.iter().map(|s| parse_pred_ind(s)).collect::<Result<_, _>>()?
    };
    let policy = id_from_arg.map_or(IdPolicy::Fresh, IdPolicy::FromArg);
    let mut spec = BackjumpSpec::targets(targets).with_id_policy(policy);
    for r in clause_refs(exempt)? {
        spec = spec.exempt(r, Exemption::Unchanged);
    }
    for r in clause_refs(exempt_dynamic)? {
        spec = spec.exempt(r, Exemption::Dynamic);
    }
    for s in splits {
        let (r, at) = parse_split(s)?;
        spec = spec.split(r, at);
    }
    let out = match approach {
        Approach::One => transform::approach1(&p, &spec),
        Approach::OneA => transform::approach1a(&p, &spec),
        Approach::Two => transform::approach2(&p, &spec),
        Approach::Dbsim => transform::dbsim(&p, &spec),
    }?;
    print!("{}", format_program(&out));
    Ok(ExitCode::SUCCESS)
}

fn cmd_diff(a: &Path, b: &Path, project: &[String]) -> Result<ExitCode, Failure> {
    let load = |p: &Path| read_json_lines(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display())));
    let (mut ta, mut tb) = (load(a)?, load(b)?);
    if !project.is_empty() {
        let keep: BTreeSet<PredInd> = project.iter().map(|s| parse_pred_ind(s)).collect::<Result<_, _>>()?;
        ta = project_trace(&ta, &keep);
        tb = project_trace(&tb, &keep);
    }
    match diff_traces(&ta, &tb) {
        None => {
            println!("equal");
            Ok(ExitCode::SUCCESS)
        }
        Some(d) => {
            println!("{d}");
            Ok(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { program, query, mode, trace, max_steps, max_solutions } => {
            cmd_run(program, query, *mode, trace.as_deref(), *max_steps, *max_solutions)
        }
        Command::Transform { program, approach, targets, exempt, exempt_dynamic, splits, id_from_arg } => {
            cmd_transform(program, *approach, targets, exempt, exempt_dynamic, splits, *id_from_arg)
        }
        Command::DiffTraces { a, b, project } => cmd_diff(a, b, project),
    };
    result.unwrap_or_else(|Failure(msg)| {
        eprintln!("bjlab: {msg}");
        ExitCode::from(2)
    })
}
