use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{factors, resolvents, self_resolvents};
use crate::fol::{Clause, SymbolTable, VarGen};
use crate::tptp::{parse_clause, Problem};

use super::{AttemptRecord, ClauseId, ClauseRecord, Outcome, Rule};

/// A refutation: the ancestor closure of an empty clause, in id order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Proof {
    pub problem_name: String,
    pub symbols: Arc<SymbolTable>,
    pub steps: Vec<ClauseRecord>,
}

impl Proof {
    /// Number of inference steps (non-input clauses).
    pub fn len(&self) -> usize {
        self.steps.iter().filter(|s| s.rule != Rule::Input).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Text form: a `% problem <name>` header, then one
    /// `id<TAB>rule<TAB>parents<TAB>clause` line per step. Parents are
    /// comma separated (`-` for none) and the clause is in TPTP cnf syntax.
    pub fn to_text(&self) -> String {
        let mut out = format!("% problem {}\n", self.problem_name);
        for s in &self.steps {
            let parents = if s.parents.is_empty() {
                "-".to_string()
            } else {
                s.parents
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                s.id,
                s.rule.name(),
                parents,
                s.clause.to_tptp(&self.symbols)
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofParseError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("proof has no steps")]
    Empty,
    #[error("attempt did not refute its problem (outcome: {0})")]
    NotRefuted(&'static str),
}

/// Ancestor closure of the empty clause of a refuted attempt.
pub fn extract_proof(rec: &AttemptRecord) -> Result<Proof, ProofParseError> {
    let Outcome::Refuted { empty_clause } = rec.outcome else {
        return Err(ProofParseError::NotRefuted(rec.outcome.label()));
    };
    let mut keep = BTreeSet::new();
    let mut stack = vec![empty_clause];
    while let Some(id) = stack.pop() {
        if keep.insert(id) {
            stack.extend(rec.records[id.index()].parents.iter().copied());
        }
    }
    Ok(Proof {
        problem_name: rec.problem.name.clone(),
        symbols: rec.problem.symbols.clone(),
        steps: keep.iter().map(|id| rec.records[id.index()].clone()).collect(),
    })
}

/// Parses the text form written by [`Proof::to_text`].
pub fn parse_proof(text: &str) -> Result<Proof, ProofParseError> {
    let mut symbols = SymbolTable::new();
    let mut vars = VarGen::new();
    let mut problem_name = String::new();
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| ProofParseError::Line {
            line: i + 1,
            message,
        };
        if let Some(rest) = line.strip_prefix('%') {
            if let Some(name) = rest.trim().strip_prefix("problem ") {
                problem_name = name.trim().to_string();
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, rule, parents, clause] = fields[..] else {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        let id = ClauseId(id.trim().parse().map_err(|_| err(format!("bad id `{id}`")))?);
        let rule = match rule.trim() {
            "input" => Rule::Input,
            "factor" => Rule::Factor,
            "resolvent" => Rule::Resolvent,
            other => return Err(err(format!("unknown rule `{other}`"))),
        };
        let parents = match parents.trim() {
            "-" => Vec::new(),
            list => list
                .split(',')
                .map(|p| p.trim().parse().map(ClauseId))
                .collect::<Result<_, _>>()
                .map_err(|_| err(format!("bad parent list `{list}`")))?,
        };
        let clause = parse_clause(clause, &mut symbols, &mut vars).map_err(|e| err(e.to_string()))?;
        steps.push(ClauseRecord {
            id,
            clause,
            parents,
            rule,
            born_at_step: 0,
            processed_at_step: None,
        });
    }
    if steps.is_empty() {
        return Err(ProofParseError::Empty);
    }
    Ok(Proof {
        problem_name,
        symbols: Arc::new(symbols),
        steps,
    })
}

/// Checks every inference independently of the search: each non-input
/// clause must be a variant of a factor of its parent or of a resolvent of
/// its parents, parents must precede children, and the last step must be
/// the empty clause.
pub fn replay_proof(p: &Proof) -> bool {
    let Some(last) = p.steps.last() else {
        return false;
    };
    if !last.clause.is_empty() {
        return false;
    }
    let mut seen: HashMap<ClauseId, &Clause> = HashMap::new();
    let mut vars = VarGen::above(p.steps.iter().map(|s| &s.clause));
    for s in &p.steps {
        if seen.contains_key(&s.id) {
            return false;
        }
        let parent = |i: usize| s.parents.get(i).and_then(|id| seen.get(id).copied());
        let ok = match (s.rule, s.parents.len()) {
            (Rule::Input, 0) => true,
            (Rule::Factor, 1) => parent(0).is_some_and(|a| {
                factors(a, &mut vars).iter().any(|f| f.is_variant(&s.clause))
            }),
            (Rule::Resolvent, 2) => match (parent(0), parent(1)) {
                (Some(a), Some(b)) => {
                    let derived = if s.parents[0] == s.parents[1] {
                        self_resolvents(a, &mut vars)
                    } else {
                        let a = a.rename_fresh(&mut vars);
                        let b = b.rename_fresh(&mut vars);
                        resolvents(&a, &b, &mut vars)
                    };
                    derived.iter().any(|r| r.is_variant(&s.clause))
                }
                _ => false,
            },
            _ => false,
        };
        if !ok {
            return false;
        }
        seen.insert(s.id, &s.clause);
    }
    true
}

/// [`replay_proof`], additionally requiring every input step to be a variant
/// of an input clause of `problem`. Symbols are compared by name.
pub fn replay_proof_against(p: &Proof, problem: &Problem) -> bool {
    if !replay_proof(p) {
        return false;
    }
    let inputs: Vec<String> = problem
        .input_clauses()
        .map(|c| c.to_tptp(&problem.symbols))
        .collect();
    p.steps
        .iter()
        .filter(|s| s.rule == Rule::Input)
        .all(|s| inputs.contains(&s.clause.to_tptp(&p.symbols)))
}
