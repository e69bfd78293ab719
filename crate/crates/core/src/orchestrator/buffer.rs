use std::collections::VecDeque;
use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BufferError {
    #[error("buffer holds {len} examples, sampling needs {min_fill}")]
    NotReady { len: usize, min_fill: usize },
    #[error("buffer capacity {capacity} below its minimum fill {min_fill}")]
    Config { capacity: usize, min_fill: usize },
}

/// Bounded replay buffer: oldest entries are evicted first and sampling
/// (uniform, with replacement) waits until `min_fill` entries arrived.
pub struct ExampleBuffer<T> {
    items: Mutex<VecDeque<T>>,
    ready: Condvar,
    capacity: usize,
    min_fill: usize,
}

impl<T: Clone> ExampleBuffer<T> {
    pub fn new(capacity: usize, min_fill: usize) -> Result<Self, BufferError> {
        if capacity == 0 || capacity < min_fill {
            return Err(BufferError::Config { capacity, min_fill });
        }
        Ok(ExampleBuffer {
            items: Mutex::new(VecDeque::with_capacity(capacity.min(1 << 16))),
            ready: Condvar::new(),
            capacity,
            min_fill,
        })
    }

    fn lock(&self) -> MutexGuard<'_, VecDeque<T>> {
        self.items.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn min_fill(&self) -> usize {
        self.min_fill
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_ready(&self) -> bool {
        self.len() >= self.min_fill
    }

    pub fn put(&self, examples: impl IntoIterator<Item = T>) {
        let mut items = self.lock();
        for ex in examples {
            if items.len() == self.capacity {
                items.pop_front();
            }
            items.push_back(ex);
        }
        if items.len() >= self.min_fill {
            self.ready.notify_all();
        }
    }

    /// Draws `n` entries uniformly with replacement.
    pub fn try_sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<T>, BufferError> {
        let items = self.lock();
        Self::draw(&items, n, self.min_fill, rng)
    }

    /// Like [`try_sample`](Self::try_sample) but waits up to `timeout` for
    /// the buffer to fill.
    pub fn sample_timeout(&self, n: usize, rng: &mut impl Rng, timeout: Duration) -> Result<Vec<T>, BufferError> {
        let deadline = Instant::now() + timeout;
        let mut items = self.lock();
        while items.len() < self.min_fill {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            items = self
                .ready
                .wait_timeout(items, deadline - now)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
        Self::draw(&items, n, self.min_fill, rng)
    }

    fn draw(items: &VecDeque<T>, n: usize, min_fill: usize, rng: &mut impl Rng) -> Result<Vec<T>, BufferError> {
        if items.len() < min_fill || items.is_empty() {
            return Err(BufferError::NotReady {
                len: items.len(),
                min_fill,
            });
        }
        Ok((0..n).map(|_| items[rng.gen_range(0..items.len())].clone()).collect())
    }

    /// Copy of the contents, oldest first.
    pub fn snapshot(&self) -> Vec<T> {
        self.lock().iter().cloned().collect()
    }
}
