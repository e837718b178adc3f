use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ProblemError;

pub const BRUTE_FORCE_MAX_VARS: usize = 22;

/// Conjunction of clauses over variables `1..=num_vars`; a literal `-v`
/// is the negation of `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

/// Outcome of parsing DIMACS text. An empty clause makes the formula
/// unsatisfiable outright; `rest` keeps the other clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CnfInput {
    Formula(CnfFormula),
    EmptyClause { rest: CnfFormula, line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SatClass {
    #[serde(rename = "trivial-1SAT")]
    Trivial1Sat,
    #[serde(rename = "deterministic-2SAT")]
    Deterministic2Sat,
    #[serde(rename = "general-nSAT")]
    GeneralNSat,
}

impl SatClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SatClass::Trivial1Sat => "trivial-1SAT",
            SatClass::Deterministic2Sat => "deterministic-2SAT",
            SatClass::GeneralNSat => "general-nSAT",
        }
    }
}

/// `Satisfiable(a)` holds the value of variable `i + 1` in `a[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Satisfiable(Vec<bool>),
    Unsatisfiable,
}

impl SatOutcome {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, SatOutcome::Satisfiable(_))
    }
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, ProblemError> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(ProblemError::Domain(format!("clause {i} is empty")));
            }
            if let Some(&lit) = clause
                .iter()
                .find(|&&l| l == 0 || l.unsigned_abs() as usize > num_vars)
            {
                return Err(ProblemError::Domain(format!(
                    "clause {i} has literal {lit} outside 1..={num_vars}"
                )));
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Number of distinct literals in the widest clause.
    pub fn max_width(&self) -> usize {
        self.clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c.dedup();
                c.len()
            })
            .max()
            .unwrap_or(0)
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfInput, ProblemError> {
    let err = |line: usize, message: String| ProblemError::Parse { line, message };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut empty_at: Option<usize> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(line, "second problem line".into()));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            let (v, c) =
                parsed.ok_or_else(|| err(line, format!("malformed problem line `{trimmed}`")))?;
            header = Some((v, c, line));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(err(line, "clause before the `p cnf` line".into()));
        };
        for token in trimmed.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| err(line, format!("`{token}` is not an integer literal")))?;
            if lit == 0 {
                if current.is_empty() && empty_at.is_none() {
                    empty_at = Some(line);
                }
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > num_vars {
                return Err(err(
                    line,
                    format!("literal {lit} exceeds {num_vars} variables"),
                ));
            } else {
                current.push(lit);
            }
        }
    }

    let (num_vars, expected, header_line) =
        header.ok_or_else(|| err(last_line.max(1), "missing `p cnf` line".into()))?;
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != expected {
        return Err(err(
            header_line,
            format!(
                "header declares {expected} clauses, found {}",
                clauses.len()
            ),
        ));
    }
    if let Some(line) = empty_at {
        clauses.retain(|c| !c.is_empty());
        return Ok(CnfInput::EmptyClause {
            rest: CnfFormula { num_vars, clauses },
            line,
        });
    }
    Ok(CnfInput::Formula(CnfFormula { num_vars, clauses }))
}

pub fn to_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    for c in &formula.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

pub fn sat_classify(formula: &CnfFormula) -> SatClass {
    match formula.max_width() {
        0 | 1 => SatClass::Trivial1Sat,
        2 => SatClass::Deterministic2Sat,
        _ => SatClass::GeneralNSat,
    }
}

/// Implication-graph 2-SAT: each clause `a ∨ b` adds `¬a ⇒ b` and `¬b ⇒ a`
/// and a unit clause `a` adds `¬a ⇒ a`. The formula is unsatisfiable iff
/// some variable shares a strongly connected component with its negation.
pub fn solve_2sat(formula: &CnfFormula) -> Result<SatOutcome, ProblemError> {
    let mut clauses = formula.clauses.clone();
    for c in &mut clauses {
        c.sort_unstable();
        c.dedup();
        if c.len() > 2 {
            return Err(ProblemError::Domain(format!(
                "clause {c:?} has {} literals, 2-SAT allows at most 2",
                c.len()
            )));
        }
    }
    let n = formula.num_vars;
    // node 2(v-1) is v, 2(v-1)+1 is ¬v
    let node = |l: i64| 2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0);
    let mut adj = vec![Vec::new(); 2 * n];
    for c in &clauses {
        let (a, b) = (c[0], *c.last().expect("clauses are non-empty"));
        adj[node(-a)].push(node(b));
        adj[node(-b)].push(node(a));
    }
    let comp = tarjan(&adj);
    let mut assignment = Vec::with_capacity(n);
    for v in 0..n {
        let (pos, neg) = (comp[2 * v], comp[2 * v + 1]);
        if pos == neg {
            return Ok(SatOutcome::Unsatisfiable);
        }
        // components are numbered sinks first
        assignment.push(pos < neg);
    }
    Ok(SatOutcome::Satisfiable(assignment))
}

/// Strongly connected components, numbered in reverse topological order.
fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut comp = vec![UNSEEN; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let (mut counter, mut comps) = (0, 0);

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, next)) = call.last() {
            if next == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(next) {
                call.last_mut().expect("frame is live").1 += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("v is on the stack");
                    on_stack[w] = false;
                    comp[w] = comps;
                    if w == v {
                        break;
                    }
                }
                comps += 1;
            }
        }
    }
    comp
}

/// Try every assignment in lexicographic order (false before true, variable
/// 1 most significant) and return the first model.
pub fn solve_sat_bruteforce(formula: &CnfFormula) -> Result<SatOutcome, ProblemError> {
    let n = formula.num_vars;
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(ProblemError::TooLarge {
            what: "variable count",
            size: n,
            limit: BRUTE_FORCE_MAX_VARS,
        });
    }
    // bit n-v of the counter holds variable v
    let bit = |l: i64| 1u32 << (n - l.unsigned_abs() as usize);
    let masks: Vec<(u32, u32)> = formula
        .clauses
        .iter()
        .map(|c| {
            c.iter().fold((0, 0), |(p, q), &l| {
                if l > 0 {
                    (p | bit(l), q)
                } else {
                    (p, q | bit(l))
                }
            })
        })
        .collect();
    for m in 0..(1u32 << n) {
        if masks.iter().all(|&(p, q)| m & p != 0 || !m & q != 0) {
            let assignment = (1..=n).map(|v| m & (1 << (n - v)) != 0).collect();
            return Ok(SatOutcome::Satisfiable(assignment));
        }
    }
    Ok(SatOutcome::Unsatisfiable)
}
