use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClauseId;

/// Which candidate ordering a given-clause pick uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueKind {
    /// Oldest first.
    Age,
    /// Smallest tree size first.
    Weight,
    /// Highest predicted in-proofness first.
    LearnedCost,
}

/// Repeating pattern of queue picks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueSchedule {
    pattern: Vec<QueueKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("queue schedule must contain at least one pick")]
    Empty,
    #[error("bad queue ratio `{0}`: expected AGE:WEIGHT:LEARNED, e.g. 1:3:9")]
    BadRatio(String),
}

impl Default for QueueSchedule {
    /// 1 age, 3 weight and 9 learned-cost picks per 13 steps, spread evenly.
    fn default() -> Self {
        use QueueKind::*;
        QueueSchedule {
            pattern: vec![
                LearnedCost,
                LearnedCost,
                LearnedCost,
                Weight,
                LearnedCost,
                LearnedCost,
                LearnedCost,
                Weight,
                LearnedCost,
                LearnedCost,
                LearnedCost,
                Weight,
                Age,
            ],
        }
    }
}

impl QueueSchedule {
    pub fn new(pattern: Vec<QueueKind>) -> Result<Self, ScheduleError> {
        if pattern.is_empty() {
            return Err(ScheduleError::Empty);
        }
        Ok(QueueSchedule { pattern })
    }

    /// Deterministic pattern with the given pick counts per cycle. Rarer
    /// kinds are placed first at evenly spaced slots; the most frequent kind
    /// fills the rest. `from_ratio(1, 3, 9)` is the default cycle.
    pub fn from_ratio(age: usize, weight: usize, learned: usize) -> Result<Self, ScheduleError> {
        let mut counts = [
            (QueueKind::Age, age),
            (QueueKind::Weight, weight),
            (QueueKind::LearnedCost, learned),
        ];
        let total: usize = counts.iter().map(|c| c.1).sum();
        if total == 0 {
            return Err(ScheduleError::Empty);
        }
        counts.sort_by_key(|c| c.1);
        let mut slots: Vec<Option<QueueKind>> = vec![None; total];
        for &(kind, c) in &counts[..2] {
            for j in 1..=c {
                let target = j * total / c - 1;
                let free = (0..=target)
                    .rev()
                    .chain(target + 1..total)
                    .find(|&i| slots[i].is_none())
                    .expect("slot count equals pick count");
                slots[free] = Some(kind);
            }
        }
        let pattern = slots
            .into_iter()
            .map(|s| s.unwrap_or(counts[2].0))
            .collect();
        Ok(QueueSchedule { pattern })
    }

    pub fn pattern(&self) -> &[QueueKind] {
        &self.pattern
    }

    /// Kind used at `step` (0-based); learned-cost slots divert to weight
    /// when no scorer is in use.
    pub fn pick(&self, step: u64, scorer_available: bool) -> QueueKind {
        let k = self.pattern[(step % self.pattern.len() as u64) as usize];
        if k == QueueKind::LearnedCost && !scorer_available {
            QueueKind::Weight
        } else {
            k
        }
    }
}

impl FromStr for QueueSchedule {
    type Err = ScheduleError;

    /// Parses `AGE:WEIGHT:LEARNED` pick counts.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| ScheduleError::BadRatio(s.to_string()))?;
        match parts[..] {
            [a, w, l] => QueueSchedule::from_ratio(a, w, l),
            _ => Err(ScheduleError::BadRatio(s.to_string())),
        }
    }
}

impl fmt::Display for QueueSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let count = |k| self.pattern.iter().filter(|p| **p == k).count();
        write!(
            f,
            "{}:{}:{}",
            count(QueueKind::Age),
            count(QueueKind::Weight),
            count(QueueKind::LearnedCost)
        )
    }
}

/// The three candidate queues. Entries are never removed eagerly; callers
/// skip ids that are no longer candidates when popping.
#[derive(Default)]
pub(crate) struct Queues {
    age: BinaryHeap<Reverse<ClauseId>>,
    weight: BinaryHeap<Reverse<(usize, ClauseId)>>,
    /// Probability bits (order-preserving for nonnegative floats), then id.
    learned: BinaryHeap<(u64, Reverse<ClauseId>)>,
}

impl Queues {
    pub fn push(&mut self, id: ClauseId, tree_size: usize) {
        self.age.push(Reverse(id));
        self.weight.push(Reverse((tree_size, id)));
    }

    pub fn push_scored(&mut self, id: ClauseId, probability: f64) {
        let p = if probability.is_finite() {
            probability.clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.learned.push((p.to_bits(), Reverse(id)));
    }

    /// Pops the best live entry of `kind`, skipping ids `is_live` rejects.
    pub fn pop(&mut self, kind: QueueKind, is_live: impl Fn(ClauseId) -> bool) -> Option<ClauseId> {
        match kind {
            QueueKind::Age => {
                while let Some(Reverse(id)) = self.age.pop() {
                    if is_live(id) {
                        return Some(id);
                    }
                }
            }
            QueueKind::Weight => {
                while let Some(Reverse((_, id))) = self.weight.pop() {
                    if is_live(id) {
                        return Some(id);
                    }
                }
            }
            QueueKind::LearnedCost => {
                while let Some((_, Reverse(id))) = self.learned.pop() {
                    if is_live(id) {
                        return Some(id);
                    }
                }
            }
        }
        None
    }
}
