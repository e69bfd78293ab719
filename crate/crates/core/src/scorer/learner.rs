use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clause_graph::ClauseGraphInput;

use super::model::Layout;
use super::{check_input, sigmoid, Example, Label, ModelSnapshot, ScorerConfig, ScorerError};

/// Example with its scorer input already assembled.
#[derive(Clone, Debug)]
pub struct EncodedExample {
    pub input: ClauseGraphInput,
    pub label: Label,
}

/// Binary cross-entropy of `sigmoid(z)` against `y`, computed stably.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Exclusive owner of one model's parameters and Adam moments.
pub struct LearnerState {
    config: ScorerConfig,
    layout: Layout,
    params: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    updates: u64,
    version: u64,
    rng: ChaCha8Rng,
}

impl LearnerState {
    /// Fresh learner with parameters drawn from `seed`.
    pub fn new(config: ScorerConfig, seed: u64) -> Result<Self, ScorerError> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = layout.init(&mut rng);
        let n = params.len();
        Ok(LearnerState {
            config,
            layout,
            params,
            m: vec![0.0; n],
            v: vec![0.0; n],
            updates: 0,
            version: 0,
            rng,
        })
    }

    /// Resumes training from a snapshot with fresh optimizer moments.
    pub fn from_snapshot(snapshot: &ModelSnapshot, seed: u64) -> Self {
        let config = snapshot.config().clone();
        let n = snapshot.params().len();
        LearnerState {
            layout: Layout::new(&config),
            config,
            params: snapshot.params().to_vec(),
            m: vec![0.0; n],
            v: vec![0.0; n],
            updates: snapshot.update_count(),
            version: snapshot.version(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), ScorerError> {
        if params.len() != self.layout.len {
            return Err(ScorerError::ParamCount {
                expected: self.layout.len,
                found: params.len(),
            });
        }
        self.params = params;
        Ok(())
    }

    /// Number of completed Adam updates.
    pub fn update_count(&self) -> u64 {
        self.updates
    }

    /// Mean loss and its gradient over `batch`, optionally with dropout.
    /// Parameters are not touched.
    pub fn loss_and_gradient(&mut self, batch: &[EncodedExample], dropout: bool) -> Result<(f64, Vec<f64>), ScorerError> {
        if batch.is_empty() {
            return Err(ScorerError::EmptyBatch);
        }
        let mut grads = vec![0.0; self.layout.len];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let rate = self.config.dropout;
        for ex in batch {
            check_input(&ex.input)?;
            let drop = (dropout && rate > 0.0).then_some((rate, &mut self.rng));
            let (z, cache) = self.layout.forward(&self.params, &ex.input, drop);
            let y = ex.label.target();
            loss += bce_with_logit(z, y) * scale;
            self.layout.backward(&self.params, &ex.input, &cache, (sigmoid(z) - y) * scale, &mut grads);
        }
        Ok((loss, grads))
    }

    /// Mean loss over `batch` without dropout.
    pub fn loss(&self, batch: &[EncodedExample]) -> Result<f64, ScorerError> {
        if batch.is_empty() {
            return Err(ScorerError::EmptyBatch);
        }
        let mut loss = 0.0;
        for ex in batch {
            check_input(&ex.input)?;
            let (z, _) = self.layout.forward::<ChaCha8Rng>(&self.params, &ex.input, None);
            loss += bce_with_logit(z, ex.label.target());
        }
        Ok(loss / batch.len() as f64)
    }

    /// One Adam step on the mean cross-entropy of `batch`, dropout active.
    /// Returns the batch loss before the update.
    pub fn train_step_encoded(&mut self, batch: &[EncodedExample]) -> Result<f64, ScorerError> {
        let (loss, grads) = self.loss_and_gradient(batch, true)?;
        let bad_gradients = grads.iter().filter(|g| !g.is_finite()).count();
        if !loss.is_finite() || bad_gradients > 0 {
            return Err(ScorerError::NonFinite { loss, bad_gradients });
        }
        let c = &self.config;
        self.updates += 1;
        let t = self.updates as i32;
        let bias1 = 1.0 - c.beta1.powi(t);
        let bias2 = 1.0 - c.beta2.powi(t);
        for (((p, g), m), v) in self.params.iter_mut().zip(&grads).zip(&mut self.m).zip(&mut self.v) {
            *m = c.beta1 * *m + (1.0 - c.beta1) * g;
            *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
            let mhat = *m / bias1;
            let vhat = *v / bias2;
            *p -= c.learning_rate * mhat / (vhat.sqrt() + c.epsilon);
        }
        Ok(loss)
    }

    pub fn train_step(&mut self, batch: &[Example]) -> Result<f64, ScorerError> {
        let encoded: Vec<EncodedExample> = batch.iter().map(Example::encode).collect();
        self.train_step_encoded(&encoded)
    }

    /// Freezes the current parameters into a new snapshot with the next
    /// version number.
    pub fn publish_snapshot(&mut self) -> Arc<ModelSnapshot> {
        self.version += 1;
        Arc::new(ModelSnapshot::from_parts(
            self.config.clone(),
            self.params.clone(),
            self.version,
            self.updates,
        ))
    }
}
