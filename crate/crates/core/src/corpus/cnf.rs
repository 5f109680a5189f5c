//! Propositional CNFs, a brute-force oracle, fixture I/O and generators.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A literal: `positive` selects `x` over `¬x`; `var` indexes [`Cnf::variables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub positive: bool,
    pub var: usize,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Lit { positive: true, var }
    }

    pub fn neg(var: usize) -> Self {
        Lit { positive: false, var }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub variables: Vec<String>,
    pub clauses: Vec<Vec<Lit>>,
}

/// A total assignment, indexed like [`Cnf::variables`].
pub type Assignment = Vec<bool>;

pub const ORACLE_MAX_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("{0} variables exceed the oracle limit of {ORACLE_MAX_VARS}")]
    TooManyVariables(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Cnf {
    /// Variables named `x1`, `x2`, ...
    pub fn new(num_vars: usize, clauses: Vec<Vec<Lit>>) -> Self {
        let variables = (1..=num_vars).map(|i| format!("x{i}")).collect();
        Cnf { variables, clauses }
    }

    pub fn named(variables: &[&str], clauses: Vec<Vec<Lit>>) -> Self {
        Cnf { variables: variables.iter().map(|s| s.to_string()).collect(), clauses }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn satisfied_by(&self, a: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| a[l.var] == l.positive))
    }

    /// DIMACS-like text: `p cnf n m`, then one clause per line ending in `0`.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars(), self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                out.push_str(&format!("{} ", if l.positive { v } else { -v }));
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Cnf, CnfError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| CnfError::Parse { line: i + 1, msg };
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    ["cnf", n, m] => {
                        let n = n.parse().map_err(|_| err(format!("bad variable count `{n}`")))?;
                        let m = m.parse().map_err(|_| err(format!("bad clause count `{m}`")))?;
                        header = Some((n, m));
                    }
                    _ => return Err(err("malformed problem line".into())),
                }
                continue;
            }
            let (n, _) = header.ok_or_else(|| err("clause before problem line".into()))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| err(format!("bad literal `{tok}`")))?;
                if v == 0 {
                    clauses.push(std::mem::take(&mut current));
                    continue;
                }
                let var = v.unsigned_abs() as usize;
                if var > n {
                    return Err(err(format!("variable {var} exceeds {n}")));
                }
                current.push(Lit { positive: v > 0, var: var - 1 });
            }
        }
        let (n, m) = header.ok_or(CnfError::Parse { line: 0, msg: "missing problem line".into() })?;
        if !current.is_empty() {
            return Err(CnfError::Parse { line: 0, msg: "last clause lacks terminating 0".into() });
        }
        if clauses.len() != m {
            return Err(CnfError::Parse { line: 0, msg: format!("expected {m} clauses, found {}", clauses.len()) });
        }
        Ok(Cnf::new(n, clauses))
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c
                    .iter()
                    .map(|l| format!("{}{}", if l.positive { "" } else { "¬" }, self.variables[l.var]))
                    .collect();
                format!("({})", lits.join("∨"))
            })
            .collect();
        if clauses.is_empty() {
            f.write_str("⊤")
        } else {
            f.write_str(&clauses.join("∧"))
        }
    }
}

/// Every satisfying total assignment, in binary counting order
/// (the first variable is the most significant, `false` before `true`).
pub fn oracle(cnf: &Cnf) -> Result<Vec<Assignment>, CnfError> {
    let n = cnf.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(CnfError::TooManyVariables(n));
    }
    let mut out = Vec::new();
    for bits in 0u32..(1 << n) {
        let a: Assignment = (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect();
        if cnf.satisfied_by(&a) {
            out.push(a);
        }
    }
    Ok(out)
}

/// Seed for the random corpus; `BJLAB_SEED` overrides it.
pub const DEFAULT_SEED: u64 = 0x5eed_b4c7;

pub fn seed_from_env() -> u64 {
    std::env::var("BJLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

/// Random CNFs with 1-4 variables, 1-5 clauses and clause width 1-3.
pub fn random_cnfs(seed: u64, count: usize) -> Vec<Cnf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=5);
            let clauses = (0..m)
                .map(|_| {
                    let width = rng.gen_range(1..=3);
                    (0..width)
                        .map(|_| Lit { positive: rng.gen_bool(0.5), var: rng.gen_range(0..n) })
                        .collect()
                })
                .collect();
            Cnf::new(n, clauses)
        })
        .collect()
}

/// All CNFs over two variables built from at most four distinct nonempty
/// clauses, where a clause is a nonempty subset of {x, ¬x, y, ¬y}.
pub fn exhaustive_two_var() -> Vec<Cnf> {
    let lits = [Lit::pos(0), Lit::neg(0), Lit::pos(1), Lit::neg(1)];
    let clauses: Vec<Vec<Lit>> = (1u32..16)
        .map(|mask| (0..4).filter(|i| mask >> i & 1 == 1).map(|i| lits[i]).collect())
        .collect();
    let mut out = Vec::new();
    for set in 0u32..(1 << clauses.len()) {
        if set.count_ones() <= 4 {
            let chosen = (0..clauses.len()).filter(|i| set >> i & 1 == 1).map(|i| clauses[i].clone()).collect();
            out.push(Cnf::new(2, chosen));
        }
    }
    out
}

/// (x∨¬y∨z)∧(¬x∨v)
pub fn section4_example() -> Cnf {
    Cnf::named(&["x", "y", "z", "v"], vec![vec![Lit::pos(0), Lit::neg(1), Lit::pos(2)], vec![Lit::neg(0), Lit::pos(3)]])
}

/// (x∨y)∧(¬z∨z)∧(¬x∨¬y)∧(¬x∨y∨z), on which the level-based backjumping
/// loses every answer with z true.
pub fn lost_answers_example() -> Cnf {
    Cnf::named(
        &["x", "y", "z"],
        vec![
            vec![Lit::pos(0), Lit::pos(1)],
            vec![Lit::neg(2), Lit::pos(2)],
            vec![Lit::neg(0), Lit::neg(1)],
            vec![Lit::neg(0), Lit::pos(1), Lit::pos(2)],
        ],
    )
}
