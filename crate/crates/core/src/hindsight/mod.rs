//! Hindsight relabeling: every clause generated by an attempt, proof or
//! not, is treated as a goal whose ancestors are positive examples and
//! whose non-ancestors are negative examples.
//!
//! Goal sizes are drawn in proportion to a heavy-tailed distribution over
//! the nonnegative integers with weights `1/ln(s+e) - 1/ln(s+e+1)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::E;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fol::Clause;
use crate::saturation::{AttemptRecord, ClauseId, Rule};
use crate::scorer::{Example, Label};

#[derive(Debug, Error, PartialEq)]
pub enum HindsightError {
    #[error("clause {0} is not in the attempt record")]
    UnknownClause(ClauseId),
    #[error("size quantile {0} outside [0, 1)")]
    BadQuantile(f64),
}

/// Weight of goal size `s`.
pub fn weight(s: u64) -> f64 {
    let s = s as f64;
    1.0 / (s + E).ln() - 1.0 / (s + E + 1.0).ln()
}

/// `Σ_{s=0}^{S} weight(s)` in closed form.
pub fn cumulative_weight(max_size: u64) -> f64 {
    1.0 - 1.0 / (max_size as f64 + E + 1.0).ln()
}

/// Inverse of [`cumulative_weight`]: the smallest size whose cumulative
/// weight reaches `u`.
pub fn sample_size(u: f64) -> Result<u64, HindsightError> {
    if !(0.0..1.0).contains(&u) {
        return Err(HindsightError::BadQuantile(u));
    }
    let s = ((1.0 / (1.0 - u)).exp() - E - 1.0).ceil();
    // `as` saturates for huge and infinite values.
    Ok(s.max(0.0) as u64)
}

/// Draws a size with probability `weight(s)`.
pub fn draw_size(rng: &mut impl Rng) -> u64 {
    sample_size(rng.gen::<f64>()).expect("gen::<f64>() lies in [0, 1)")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Target number of example pairs per second of attempt time.
    pub examples_per_second: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            examples_per_second: 64.0,
        }
    }
}

/// Strict ancestors of `id`: its parents, their parents and so on.
pub fn ancestors(rec: &AttemptRecord, id: ClauseId) -> Result<BTreeSet<ClauseId>, HindsightError> {
    rec.record(id).ok_or(HindsightError::UnknownClause(id))?;
    let mut out = BTreeSet::new();
    let mut stack = vec![id];
    while let Some(next) = stack.pop() {
        let r = rec.record(next).ok_or(HindsightError::UnknownClause(next))?;
        for &p in &r.parents {
            if out.insert(p) {
                stack.push(p);
            }
        }
    }
    Ok(out)
}

/// One sampled label, by clause id within the source record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabeledPair {
    pub x: ClauseId,
    pub goal: ClauseId,
    pub label: Label,
}

struct Pools {
    positives: Vec<ClauseId>,
    ancestors: BTreeSet<ClauseId>,
    negatives: usize,
    /// Explicit negative pool when rejection sampling would be slow.
    negative_list: Option<Vec<ClauseId>>,
}

/// Samples labeled pairs from one attempt.
///
/// Goals are the non-input clauses of `rec`. The target count is
/// `elapsed_secs × examples_per_second`; for each goal size `s` present,
/// `⌈target · weight(s)⌉` rounds each pick a goal of that size and emit a
/// positive (a non-input strict ancestor) and a negative (a goal that is
/// neither an ancestor nor the goal itself). An empty pool skips its side.
pub fn sample_pairs(rec: &AttemptRecord, elapsed_secs: f64, cfg: &SamplerConfig, rng: &mut impl Rng) -> Vec<LabeledPair> {
    let goals: Vec<ClauseId> = rec.records.iter().filter(|r| r.rule != Rule::Input).map(|r| r.id).collect();
    if goals.is_empty() {
        return Vec::new();
    }
    let target = (elapsed_secs * cfg.examples_per_second).max(0.0);
    let mut by_size: BTreeMap<usize, Vec<ClauseId>> = BTreeMap::new();
    for &g in &goals {
        by_size.entry(rec.records[g.index()].clause.tree_size()).or_default().push(g);
    }
    let is_goal = |id: ClauseId| rec.records[id.index()].rule != Rule::Input;
    let mut pools: HashMap<ClauseId, Pools> = HashMap::new();
    let mut out = Vec::new();
    for (&size, of_size) in &by_size {
        let rounds = (target * weight(size as u64)).ceil() as usize;
        for _ in 0..rounds {
            let goal = of_size[rng.gen_range(0..of_size.len())];
            let pool = pools.entry(goal).or_insert_with(|| {
                let ancestors = ancestors(rec, goal).expect("goal ids come from the record");
                let positives: Vec<ClauseId> = ancestors.iter().copied().filter(|&a| is_goal(a)).collect();
                let negatives = goals.len() - positives.len() - 1;
                let negative_list = (negatives > 0 && negatives * 8 < goals.len()).then(|| {
                    goals.iter().copied().filter(|&x| x != goal && !ancestors.contains(&x)).collect()
                });
                Pools {
                    positives,
                    ancestors,
                    negatives,
                    negative_list,
                }
            });
            if !pool.positives.is_empty() {
                let x = pool.positives[rng.gen_range(0..pool.positives.len())];
                out.push(LabeledPair {
                    x,
                    goal,
                    label: Label::Positive,
                });
            }
            if pool.negatives > 0 {
                let x = match &pool.negative_list {
                    Some(list) => list[rng.gen_range(0..list.len())],
                    None => loop {
                        let x = goals[rng.gen_range(0..goals.len())];
                        if x != goal && !pool.ancestors.contains(&x) {
                            break x;
                        }
                    },
                };
                out.push(LabeledPair {
                    x,
                    goal,
                    label: Label::Negative,
                });
            }
        }
    }
    out
}

/// [`sample_pairs`] materialized as training examples.
pub fn sample_examples(rec: &AttemptRecord, elapsed_secs: f64, cfg: &SamplerConfig, rng: &mut impl Rng) -> Vec<Example> {
    let pairs = sample_pairs(rec, elapsed_secs, cfg, rng);
    let conjecture: Arc<[Clause]> = rec.problem.negated_conjecture.clone().into();
    pairs
        .into_iter()
        .map(|p| Example {
            x: rec.records[p.x.index()].clause.clone(),
            g: rec.records[p.goal.index()].clause.clone(),
            conjecture: conjecture.clone(),
            symbols: rec.problem.symbols.clone(),
            label: p.label,
        })
        .collect()
}

/// One line of the example export: clauses in TPTP clause syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleLine {
    pub x: String,
    pub g: String,
    pub conjecture: Vec<String>,
    pub label: Label,
}

impl ExampleLine {
    pub fn new(ex: &Example) -> Self {
        ExampleLine {
            x: ex.x.to_tptp(&ex.symbols),
            g: ex.g.to_tptp(&ex.symbols),
            conjecture: ex.conjecture.iter().map(|c| c.to_tptp(&ex.symbols)).collect(),
            label: ex.label,
        }
    }
}

/// Writes one JSON object per example, newline terminated.
pub fn write_jsonl(out: &mut impl Write, examples: &[Example]) -> io::Result<()> {
    for ex in examples {
        serde_json::to_writer(&mut *out, &ExampleLine::new(ex))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
