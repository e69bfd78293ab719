//! The clause scorer: a pre-norm transformer encoder over
//! [`ClauseGraphInput`] that predicts whether a clause will be used to
//! derive a goal, together with its Adam training loop and snapshot format.

mod learner;
mod model;
mod snapshot;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clause_graph::{assemble_input, ClauseGraphInput, InputContext};
use crate::fol::{Clause, SymbolTable};
use crate::saturation::CandidateScorer;
use crate::tptp::Problem;

pub use learner::{EncodedExample, LearnerState};
pub use snapshot::{ModelSnapshot, SnapshotError, SNAPSHOT_MAGIC};

const MAX_DIM: usize = 1 << 16;

/// Architecture and optimizer settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerConfig {
    pub layers: usize,
    pub heads: usize,
    pub width: usize,
    pub ff_width: usize,
    pub embed: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub min_buffer_fill: usize,
}

impl Default for ScorerConfig {
    /// Desk-scale settings.
    fn default() -> Self {
        ScorerConfig {
            layers: 2,
            heads: 4,
            width: 64,
            ff_width: 128,
            embed: 64,
            dropout: 0.1,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            min_buffer_fill: 2048,
        }
    }
}

impl ScorerConfig {
    /// Full-scale settings of the original large training runs.
    pub fn full_scale() -> Self {
        ScorerConfig {
            layers: 3,
            heads: 8,
            width: 512,
            ff_width: 1024,
            batch_size: 2560,
            min_buffer_fill: 65536,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScorerError> {
        let bad = |m: &str| Err(ScorerError::Config(m.to_string()));
        if self.layers == 0 || self.heads == 0 || self.width == 0 || self.ff_width == 0 || self.embed == 0 {
            return bad("layers, heads, width, ff_width and embed must be positive");
        }
        if [self.layers, self.heads, self.width, self.ff_width, self.embed].iter().any(|&x| x > MAX_DIM) {
            return bad("layers, heads, width, ff_width and embed must be at most 65536");
        }
        if !self.width.is_multiple_of(self.heads) {
            return bad("width must be divisible by heads");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0) || !(self.epsilon > 0.0) {
            return bad("learning_rate and epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if self.batch_size == 0 || self.min_buffer_fill == 0 {
            return bad("batch_size and min_buffer_fill must be positive");
        }
        Ok(())
    }

    /// Number of scalar parameters.
    pub fn param_count(&self) -> usize {
        model::Layout::new(self).len
    }
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("invalid scorer configuration: {0}")]
    Config(String),
    #[error("input has {found} columns in its {what} matrix, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("input root {root} outside its {nodes} nodes")]
    Root { root: usize, nodes: usize },
    #[error("empty training batch")]
    EmptyBatch,
    #[error("non-finite training loss {loss} ({bad_gradients} non-finite gradient entries); parameters left unchanged")]
    NonFinite { loss: f64, bad_gradients: usize },
    #[error("parameter vector has {found} entries, configuration needs {expected}")]
    ParamCount { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn target(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => 0.0,
        }
    }
}

/// Training example: is `x` useful for deriving `g` from the problem whose
/// negated conjecture is `conjecture`?
#[derive(Clone, Debug)]
pub struct Example {
    pub x: Clause,
    pub g: Clause,
    pub conjecture: Arc<[Clause]>,
    pub symbols: Arc<SymbolTable>,
    pub label: Label,
}

impl Example {
    pub fn encode(&self) -> EncodedExample {
        EncodedExample {
            input: assemble_input(&self.x, &self.g, &self.conjecture, &self.symbols),
            label: self.label,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_input(input: &ClauseGraphInput) -> Result<(), ScorerError> {
    use crate::clause_graph::{FEATURE_DIM, SPECTRAL_DIM};
    if input.features.ncols() != FEATURE_DIM {
        return Err(ScorerError::Dimension {
            what: "feature",
            expected: FEATURE_DIM,
            found: input.features.ncols(),
        });
    }
    if input.spectral.ncols() != SPECTRAL_DIM {
        return Err(ScorerError::Dimension {
            what: "spectral",
            expected: SPECTRAL_DIM,
            found: input.spectral.ncols(),
        });
    }
    let rows = input.features.nrows().min(input.spectral.nrows());
    if input.root >= input.valid || input.valid > rows {
        return Err(ScorerError::Root {
            root: input.root,
            nodes: input.valid.min(rows),
        });
    }
    Ok(())
}

/// Candidate scorer for one problem: the goal is the empty clause and the
/// context is the problem's negated conjecture.
pub struct SnapshotScorer {
    snapshot: Arc<ModelSnapshot>,
    symbols: Arc<SymbolTable>,
    context: InputContext,
}

impl SnapshotScorer {
    pub fn new(snapshot: Arc<ModelSnapshot>, problem: &Problem) -> Self {
        let context = InputContext::new(&Clause::empty(), &problem.negated_conjecture, &problem.symbols);
        SnapshotScorer {
            snapshot,
            symbols: problem.symbols.clone(),
            context,
        }
    }

    pub fn snapshot(&self) -> &Arc<ModelSnapshot> {
        &self.snapshot
    }
}

impl CandidateScorer for SnapshotScorer {
    fn score(&self, clauses: &[&Clause]) -> Vec<f64> {
        clauses
            .iter()
            .map(|c| {
                let input = self.context.assemble(c, &self.symbols);
                self.snapshot.score(&input).expect("assembled inputs are well formed")
            })
            .collect()
    }
}
