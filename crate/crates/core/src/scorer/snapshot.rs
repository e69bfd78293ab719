//! Immutable parameter snapshots and their binary file format.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic          8 bytes  "ILPSCORE"
//! format         u32      1
//! layers heads width ff_width embed          u32 x 5
//! dropout learning_rate beta1 beta2 epsilon  f64 x 5
//! batch_size min_buffer_fill                 u64 x 2
//! version update_count param_count           u64 x 3
//! params         f64 x param_count
//! ```

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clause_graph::ClauseGraphInput;

use super::model::Layout;
use super::{check_input, sigmoid, ScorerConfig, ScorerError};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"ILPSCORE";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a scorer snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot format {0}")]
    UnsupportedFormat(u32),
    #[error("snapshot truncated")]
    Truncated,
    #[error("snapshot has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("snapshot configuration: {0}")]
    Config(#[from] ScorerError),
    #[error("snapshot stores {found} parameters, its configuration needs {expected}")]
    ParamCount { expected: usize, found: usize },
    #[error("snapshot contains non-finite parameters")]
    NonFinite,
}

/// Frozen parameters of one model. Never mutated after creation.
#[derive(Clone, Debug)]
pub struct ModelSnapshot {
    config: ScorerConfig,
    layout: Layout,
    params: Vec<f64>,
    version: u64,
    update_count: u64,
}

impl ModelSnapshot {
    pub(crate) fn from_parts(config: ScorerConfig, params: Vec<f64>, version: u64, update_count: u64) -> Self {
        let layout = Layout::new(&config);
        debug_assert_eq!(layout.len, params.len());
        ModelSnapshot {
            config,
            layout,
            params,
            version,
            update_count,
        }
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Whether the model has finished `warmup` updates and may guide search.
    pub fn is_warm(&self, warmup: u64) -> bool {
        self.update_count >= warmup
    }

    pub fn logit(&self, input: &ClauseGraphInput) -> Result<f64, ScorerError> {
        check_input(input)?;
        Ok(self.layout.forward::<ChaCha8Rng>(&self.params, input, None).0)
    }

    /// Probability that the scored clause is useful, dropout disabled.
    pub fn score(&self, input: &ClauseGraphInput) -> Result<f64, ScorerError> {
        self.logit(input).map(sigmoid)
    }

    pub fn score_batch(&self, inputs: &[ClauseGraphInput]) -> Result<Vec<f64>, ScorerError> {
        inputs.iter().map(|i| self.score(i)).collect()
    }

    pub fn save(&self) -> Vec<u8> {
        let c = &self.config;
        let mut out = Vec::with_capacity(128 + 8 * self.params.len());
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for x in [c.layers, c.heads, c.width, c.ff_width, c.embed] {
            out.extend_from_slice(&(x as u32).to_le_bytes());
        }
        for x in [c.dropout, c.learning_rate, c.beta1, c.beta2, c.epsilon] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for x in [c.batch_size as u64, c.min_buffer_fill as u64, self.version, self.update_count, self.params.len() as u64] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn load(bytes: &[u8]) -> Result<Self, SnapshotError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != SNAPSHOT_MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let format = r.u32()?;
        if format != FORMAT_VERSION {
            return Err(SnapshotError::UnsupportedFormat(format));
        }
        let config = ScorerConfig {
            layers: r.u32()? as usize,
            heads: r.u32()? as usize,
            width: r.u32()? as usize,
            ff_width: r.u32()? as usize,
            embed: r.u32()? as usize,
            dropout: r.f64()?,
            learning_rate: r.f64()?,
            beta1: r.f64()?,
            beta2: r.f64()?,
            epsilon: r.f64()?,
            batch_size: r.u64()? as usize,
            min_buffer_fill: r.u64()? as usize,
        };
        config.validate()?;
        let version = r.u64()?;
        let update_count = r.u64()?;
        let count = r.u64()? as usize;
        let layout = Layout::new(&config);
        if count != layout.len {
            return Err(SnapshotError::ParamCount {
                expected: layout.len,
                found: count,
            });
        }
        if bytes.len() - r.pos < count.saturating_mul(8) {
            return Err(SnapshotError::Truncated);
        }
        let mut params = Vec::with_capacity(count);
        for _ in 0..count {
            let p = r.f64()?;
            if !p.is_finite() {
                return Err(SnapshotError::NonFinite);
            }
            params.push(p);
        }
        if r.pos != bytes.len() {
            return Err(SnapshotError::TrailingBytes(bytes.len() - r.pos));
        }
        Ok(ModelSnapshot {
            config,
            layout,
            params,
            version,
            update_count,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(SnapshotError::Truncated)?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
