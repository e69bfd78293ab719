//! Uniform budgeted scheduling: one conjecture is retried under a
//! geometric menu of time limits `3·2^(k-1)` seconds, always picking the
//! level with the least cumulative time so every budget gets an equal share.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of budget levels (3 s up to 1536 s).
pub const DEFAULT_MAX_LEVEL: u32 = 10;
/// Largest supported level; its 3072 s budget is the last under one hour.
pub const MAX_LEVEL_LIMIT: u32 = 11;

#[derive(Debug, Error, PartialEq)]
pub enum SchedulerError {
    #[error("level count {0} outside 1..={MAX_LEVEL_LIMIT}")]
    BadMaxLevel(u32),
    #[error("task {0} was not issued by this scheduler or already completed")]
    UnknownTask(u64),
    #[error("invalid duration {0}")]
    BadDuration(f64),
}

/// Time limit of level `k` (1-based) in seconds.
pub fn budget(level: u32) -> f64 {
    3.0 * f64::from(1u32 << (level - 1))
}

/// Budgets of levels `1..=max_level`.
pub fn budget_menu(max_level: u32) -> Vec<f64> {
    (1..=max_level).map(budget).collect()
}

/// One attempt to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: u64,
    /// Index of the conjecture within the campaign.
    pub conjecture: usize,
    pub time_limit: f64,
    pub level: u32,
    /// Restart index within the level, counting from 1.
    pub restart: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelState {
    /// Seconds charged by completed tasks.
    pub spent: f64,
    /// Tasks issued at this level.
    pub restarts: u64,
    /// Budget of issued but uncompleted tasks.
    pub reserved: f64,
}

/// Scheduler state of one conjecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UbsState {
    pub conjecture: usize,
    pub levels: Vec<LevelState>,
    next_id: u64,
    outstanding: BTreeMap<u64, u32>,
}

impl UbsState {
    pub fn new(conjecture: usize, max_level: u32) -> Result<Self, SchedulerError> {
        if !(1..=MAX_LEVEL_LIMIT).contains(&max_level) {
            return Err(SchedulerError::BadMaxLevel(max_level));
        }
        Ok(UbsState {
            conjecture,
            levels: vec![LevelState::default(); max_level as usize],
            next_id: 0,
            outstanding: BTreeMap::new(),
        })
    }

    pub fn max_level(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Issues the next task: the level with least spent-plus-reserved time,
    /// ties going to the smaller level.
    pub fn next_task(&mut self) -> Task {
        let (index, _) = self
            .levels
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.spent + a.1.reserved).total_cmp(&(b.1.spent + b.1.reserved)))
            .expect("at least one level");
        let level = index as u32 + 1;
        let limit = budget(level);
        let state = &mut self.levels[index];
        state.restarts += 1;
        state.reserved += limit;
        let id = self.next_id;
        self.next_id += 1;
        self.outstanding.insert(id, level);
        Task {
            id,
            conjecture: self.conjecture,
            time_limit: limit,
            level,
            restart: state.restarts,
        }
    }

    /// Charges `actual_secs` to the task's level and releases its
    /// reservation.
    pub fn record_completion(&mut self, task: &Task, actual_secs: f64) -> Result<(), SchedulerError> {
        if !actual_secs.is_finite() || actual_secs < 0.0 {
            return Err(SchedulerError::BadDuration(actual_secs));
        }
        let level = match self.outstanding.get(&task.id) {
            Some(&level) if level == task.level => level,
            _ => return Err(SchedulerError::UnknownTask(task.id)),
        };
        self.outstanding.remove(&task.id);
        let state = &mut self.levels[level as usize - 1];
        state.spent += actual_secs;
        state.reserved = (state.reserved - budget(level)).max(0.0);
        Ok(())
    }

    /// Forgets uncompleted tasks, e.g. after resuming a saved state.
    pub fn abandon_outstanding(&mut self) {
        self.outstanding.clear();
        for l in &mut self.levels {
            l.reserved = 0.0;
        }
    }

    pub fn outstanding(&self) -> usize {
        self.outstanding.len()
    }

    /// Seconds charged per level.
    pub fn spent(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.spent).collect()
    }

    pub fn total_spent(&self) -> f64 {
        self.levels.iter().map(|l| l.spent).sum()
    }
}
