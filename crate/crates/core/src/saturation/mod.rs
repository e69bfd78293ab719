//! Given-clause saturation with age, weight and learned-cost queues,
//! provenance recording, proof extraction and independent proof replay.

mod clock;
mod proof;
mod queues;

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::{factors, is_tautology, resolvents, self_resolvents, subsumes_for_deletion};
use crate::fol::{Clause, VarGen};
use crate::tptp::Problem;

pub use clock::Clock;
pub use proof::{extract_proof, parse_proof, replay_proof, replay_proof_against, Proof, ProofParseError};
pub use queues::{QueueKind, QueueSchedule, ScheduleError};

/// Candidates awaiting a learned score are scored in batches of this size.
pub const SCORING_BATCH: usize = 320;

/// Position of a clause in its attempt's record list; ids grow with age.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClauseId(pub u32);

impl ClauseId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Input,
    Factor,
    Resolvent,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Input => "input",
            Rule::Factor => "factor",
            Rule::Resolvent => "resolvent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRecord {
    pub id: ClauseId,
    pub clause: Clause,
    /// Empty for input clauses; one parent for factors; two for resolvents
    /// (equal ids for self-resolution).
    pub parents: Vec<ClauseId>,
    pub rule: Rule,
    /// Number of given clauses processed before this one was generated.
    pub born_at_step: u64,
    /// Step at which the clause was selected as given clause, if ever.
    pub processed_at_step: Option<u64>,
}

/// Which limit ended an attempt early.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    Time,
    Memory,
    Steps,
    Cancelled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Outcome {
    Refuted { empty_clause: ClauseId },
    Saturated,
    ResourceOut { limit: Limit },
}

impl Outcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Outcome::Refuted { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Refuted { .. } => "refuted",
            Outcome::Saturated => "saturated",
            Outcome::ResourceOut { .. } => "resource_out",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Non-input clauses recorded.
    pub generated: u64,
    /// Given clauses selected.
    pub processed: u64,
    /// Given clauses discarded by an active clause.
    pub forward_subsumed: u64,
    /// Active clauses removed by a given clause.
    pub backward_subsumed: u64,
    pub tautologies: u64,
    /// Inferences dropped as variants of a live clause.
    pub duplicates: u64,
    pub scored: u64,
}

/// Full trace of one attempt.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub problem: Arc<Problem>,
    pub records: Vec<ClauseRecord>,
    pub outcome: Outcome,
    pub counters: Counters,
    pub elapsed_secs: f64,
}

impl AttemptRecord {
    pub fn record(&self, id: ClauseId) -> Option<&ClauseRecord> {
        self.records.get(id.index())
    }

    pub fn num_input(&self) -> usize {
        self.records.iter().take_while(|r| r.rule == Rule::Input).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub time_secs: f64,
    pub memory_bytes: u64,
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub clock: Clock,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            time_secs: 10.0,
            memory_bytes: 1 << 30,
            max_steps: None,
            clock: Clock::Wall,
        }
    }
}

impl SearchLimits {
    pub fn with_time(time_secs: f64) -> Self {
        SearchLimits {
            time_secs,
            ..Self::default()
        }
    }
}

/// Estimates in-proofness of candidate clauses for the learned-cost queue.
///
/// Implementations are bound to one problem (its symbols and negated
/// conjecture) and must be deterministic.
pub trait CandidateScorer {
    /// One probability in `[0, 1]` per clause.
    fn score(&self, clauses: &[&Clause]) -> Vec<f64>;
}

/// Bytes charged per term node and per recorded clause when enforcing the
/// memory cap.
const NODE_BYTES: u64 = 48;
const RECORD_BYTES: u64 = 160;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Candidate,
    Active,
    Gone,
}

/// One given-clause search over a problem.
pub struct Search<'a> {
    problem: Arc<Problem>,
    limits: SearchLimits,
    schedule: QueueSchedule,
    scorer: Option<&'a dyn CandidateScorer>,
    cancel: Option<Arc<AtomicBool>>,
}

impl<'a> Search<'a> {
    pub fn new(problem: Arc<Problem>, limits: SearchLimits) -> Self {
        Search {
            problem,
            limits,
            schedule: QueueSchedule::default(),
            scorer: None,
            cancel: None,
        }
    }

    pub fn with_schedule(mut self, schedule: QueueSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_scorer(mut self, scorer: Option<&'a dyn CandidateScorer>) -> Self {
        self.scorer = scorer;
        self
    }

    /// Stops the search with [`Limit::Cancelled`] once `flag` is set.
    pub fn with_cancel(mut self, flag: Arc<AtomicBool>) -> Self {
        self.cancel = Some(flag);
        self
    }

    pub fn run(self) -> AttemptRecord {
        Runner::new(self).run()
    }
}

/// Runs one search; see [`Search`] for the builder form.
pub fn search(
    problem: Arc<Problem>,
    limits: SearchLimits,
    scorer: Option<&dyn CandidateScorer>,
    schedule: QueueSchedule,
) -> AttemptRecord {
    Search::new(problem, limits)
        .with_scorer(scorer)
        .with_schedule(schedule)
        .run()
}

struct Runner<'a> {
    cfg: Search<'a>,
    watch: clock::Stopwatch,
    deadline: f64,
    records: Vec<ClauseRecord>,
    state: Vec<State>,
    queues: queues::Queues,
    unscored: Vec<ClauseId>,
    active: Vec<ClauseId>,
    /// Live (candidate or active) clauses bucketed by variant key.
    live_index: HashMap<u64, Vec<ClauseId>>,
    vars: VarGen,
    counters: Counters,
    memory: u64,
    step: u64,
}

enum Stop {
    Refuted(ClauseId),
    Limit(Limit),
}

impl<'a> Runner<'a> {
    fn new(cfg: Search<'a>) -> Self {
        let vars = VarGen::above(cfg.problem.input_clauses());
        let deadline = cfg.limits.time_secs.max(0.0);
        Runner {
            watch: clock::Stopwatch::start(cfg.limits.clock),
            cfg,
            deadline,
            records: Vec::new(),
            state: Vec::new(),
            queues: queues::Queues::default(),
            unscored: Vec::new(),
            active: Vec::new(),
            live_index: HashMap::new(),
            vars,
            counters: Counters::default(),
            memory: 0,
            step: 0,
        }
    }

    fn run(mut self) -> AttemptRecord {
        let problem = self.cfg.problem.clone();
        for c in problem.input_clauses() {
            self.add(c.clone(), Vec::new(), Rule::Input);
        }
        let outcome = match self.saturate() {
            None => Outcome::Saturated,
            Some(Stop::Refuted(id)) => Outcome::Refuted { empty_clause: id },
            Some(Stop::Limit(limit)) => Outcome::ResourceOut { limit },
        };
        AttemptRecord {
            problem,
            records: self.records,
            outcome,
            counters: self.counters,
            elapsed_secs: self.watch.elapsed_secs(),
        }
    }

    fn check_limits(&self) -> Option<Limit> {
        if self.watch.elapsed_secs() >= self.deadline {
            return Some(Limit::Time);
        }
        if self.memory > self.cfg.limits.memory_bytes {
            return Some(Limit::Memory);
        }
        if let Some(flag) = &self.cfg.cancel {
            if flag.load(Ordering::Relaxed) {
                return Some(Limit::Cancelled);
            }
        }
        None
    }

    fn saturate(&mut self) -> Option<Stop> {
        loop {
            if let Some(limit) = self.check_limits() {
                return Some(Stop::Limit(limit));
            }
            if self.cfg.limits.max_steps.is_some_and(|m| self.step >= m) {
                return Some(Stop::Limit(Limit::Steps));
            }
            let given = self.select()?;
            let step = self.step;
            self.step += 1;
            self.counters.processed += 1;
            self.records[given.index()].processed_at_step = Some(step);

            let clause = self.records[given.index()].clause.clone();
            if clause.is_empty() {
                return Some(Stop::Refuted(given));
            }
            if is_tautology(&clause) {
                self.counters.tautologies += 1;
                self.kill(given);
                continue;
            }
            if self
                .active
                .iter()
                .any(|a| subsumes_for_deletion(&self.records[a.index()].clause, &clause))
            {
                self.counters.forward_subsumed += 1;
                self.kill(given);
                continue;
            }
            let mut kept = Vec::with_capacity(self.active.len());
            for a in std::mem::take(&mut self.active) {
                if subsumes_for_deletion(&clause, &self.records[a.index()].clause) {
                    self.counters.backward_subsumed += 1;
                    self.kill(a);
                } else {
                    kept.push(a);
                }
            }
            self.active = kept;

            for f in factors(&clause, &mut self.vars) {
                self.add(f, vec![given], Rule::Factor);
            }
            for r in self_resolvents(&clause, &mut self.vars) {
                self.add(r, vec![given, given], Rule::Resolvent);
            }
            for i in 0..self.active.len() {
                let other = self.active[i];
                let derived = resolvents(&clause, &self.records[other.index()].clause, &mut self.vars);
                for r in derived {
                    self.add(r, vec![given, other], Rule::Resolvent);
                }
                if i % 32 == 31 {
                    if let Some(limit) = self.check_limits() {
                        return Some(Stop::Limit(limit));
                    }
                }
            }
            self.state[given.index()] = State::Active;
            self.active.push(given);
        }
    }

    /// Pops the next given clause; `None` when no candidates remain.
    fn select(&mut self) -> Option<ClauseId> {
        let scorer = self.cfg.scorer;
        let kind = self.cfg.schedule.pick(self.step, scorer.is_some());
        if kind == QueueKind::LearnedCost {
            if let Some(scorer) = scorer {
                self.score_pending(scorer);
            }
        }
        let state = &self.state;
        let is_candidate = |id: ClauseId| state[id.index()] == State::Candidate;
        self.queues
            .pop(kind, is_candidate)
            .or_else(|| self.queues.pop(QueueKind::Age, is_candidate))
    }

    fn score_pending(&mut self, scorer: &dyn CandidateScorer) {
        let pending: Vec<ClauseId> = std::mem::take(&mut self.unscored)
            .into_iter()
            .filter(|id| self.state[id.index()] == State::Candidate)
            .collect();
        for chunk in pending.chunks(SCORING_BATCH) {
            let clauses: Vec<&Clause> = chunk.iter().map(|id| &self.records[id.index()].clause).collect();
            let probs = scorer.score(&clauses);
            assert_eq!(probs.len(), chunk.len(), "scorer returned wrong number of scores");
            self.counters.scored += chunk.len() as u64;
            for (&id, p) in chunk.iter().zip(probs) {
                self.queues.push_scored(id, p);
            }
        }
    }

    /// Records a clause and makes it a candidate, unless it is a variant of
    /// a live clause.
    fn add(&mut self, clause: Clause, parents: Vec<ClauseId>, rule: Rule) {
        let key = clause.variant_key();
        if rule != Rule::Input {
            if let Some(bucket) = self.live_index.get(&key) {
                if bucket
                    .iter()
                    .any(|id| self.records[id.index()].clause.is_variant(&clause))
                {
                    self.counters.duplicates += 1;
                    return;
                }
            }
            self.counters.generated += 1;
        }
        let id = ClauseId(self.records.len() as u32);
        let size = clause.tree_size();
        self.memory += RECORD_BYTES + NODE_BYTES * size as u64;
        self.queues.push(id, size);
        self.unscored.push(id);
        self.live_index.entry(key).or_default().push(id);
        self.state.push(State::Candidate);
        self.records.push(ClauseRecord {
            id,
            clause,
            parents,
            rule,
            born_at_step: self.step,
            processed_at_step: None,
        });
    }

    fn kill(&mut self, id: ClauseId) {
        self.state[id.index()] = State::Gone;
        let key = self.records[id.index()].clause.variant_key();
        if let Some(bucket) = self.live_index.get_mut(&key) {
            bucket.retain(|x| *x != id);
            if bucket.is_empty() {
                self.live_index.remove(&key);
            }
        }
    }
}

#[cfg(test)]
mod tests;
