use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

pub const HASH_DIM: usize = 64;

static CACHE: LazyLock<RwLock<HashMap<String, Arc<[f64; HASH_DIM]>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// Deterministic point on the unit sphere in 64 dimensions, keyed by `seed`.
///
/// The SHA-256 digest of the seed keys a ChaCha8 stream; 64 standard normal
/// draws are normalized to unit length.
pub fn hash_vector(seed: &str) -> Arc<[f64; HASH_DIM]> {
    if let Some(v) = CACHE.read().unwrap_or_else(|e| e.into_inner()).get(seed) {
        return v.clone();
    }
    let v = Arc::new(compute(seed));
    CACHE
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .entry(seed.to_string())
        .or_insert(v)
        .clone()
}

fn compute(seed: &str) -> [f64; HASH_DIM] {
    let digest: [u8; 32] = Sha256::digest(seed.as_bytes()).into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let mut v = [0.0; HASH_DIM];
    for x in &mut v {
        *x = StandardNormal.sample(&mut rng);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}
