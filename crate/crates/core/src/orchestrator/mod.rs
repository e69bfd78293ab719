//! Incremental learning campaign on one machine.
//!
//! A manager thread issues scheduler tasks for uniformly sampled
//! conjectures, actor threads run searches (guided by a uniformly chosen
//! learner's latest snapshot once it is warm) and turn every attempt into
//! hindsight examples, and learner threads train on uniform batches from
//! the shared replay buffer.

mod buffer;
mod report;

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use arc_swap::ArcSwap;
use crossbeam_channel::{bounded, unbounded, Receiver, RecvTimeoutError, Sender, TrySendError};
use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clause_graph::{encode, Encoded, GraphRole, InputContext};
use crate::hindsight::{sample_pairs, write_jsonl, LabeledPair, SamplerConfig};
use crate::saturation::{
    extract_proof, replay_proof_against, AttemptRecord, CandidateScorer, ClauseId, Clock, Outcome, Proof,
    QueueSchedule, Search, SearchLimits,
};
use crate::scheduler::{Task, UbsState, DEFAULT_MAX_LEVEL};
use crate::scorer::{EncodedExample, Example, LearnerState, ModelSnapshot, ScorerConfig, ScorerError, SnapshotScorer};
use crate::tptp::{load_problem_file, LoadError, Problem};

pub use buffer::{BufferError, ExampleBuffer};
pub use report::{load_state, stats_csv, survival_csv};

/// Campaign settings, read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// Search threads.
    pub actors: usize,
    /// Independently trained models.
    pub learners: usize,
    /// Memory cap of one search.
    pub memory_per_actor_bytes: u64,
    /// Learner updates before a snapshot may guide search.
    pub warmup_updates: u64,
    pub seed: u64,
    /// Number of scheduler budget levels.
    pub max_level: u32,
    pub wall_clock_secs: f64,
    pub task_queue_capacity: usize,
    pub buffer_capacity: usize,
    /// Queue ratio `age:weight:learned`.
    pub queue_schedule: String,
    /// When false no examples are sampled, no learners run and every search
    /// is unguided.
    pub learning: bool,
    /// How per-attempt time limits are measured.
    pub clock: Clock,
    /// Write every sampled example to `examples.jsonl`.
    pub export_examples: bool,
    pub sampler: SamplerConfig,
    pub scorer: ScorerConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            actors: thread::available_parallelism().map_or(1, |n| n.get()),
            learners: 1,
            memory_per_actor_bytes: 1 << 30,
            warmup_updates: 100,
            seed: 0,
            max_level: DEFAULT_MAX_LEVEL,
            wall_clock_secs: 1800.0,
            task_queue_capacity: 4,
            buffer_capacity: 16384,
            queue_schedule: QueueSchedule::default().to_string(),
            learning: true,
            clock: Clock::ThreadCpu,
            export_examples: false,
            sampler: SamplerConfig::default(),
            scorer: ScorerConfig::default(),
        }
    }
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self, CampaignError> {
        let cfg: CampaignConfig = toml::from_str(text).map_err(|e| CampaignError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn schedule(&self) -> Result<QueueSchedule, CampaignError> {
        self.queue_schedule
            .parse()
            .map_err(|e| CampaignError::Config(format!("queue_schedule: {e}")))
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |m: String| Err(CampaignError::Config(m));
        if self.actors == 0 || self.learners == 0 {
            return bad("actors and learners must be at least 1".into());
        }
        if self.task_queue_capacity == 0 {
            return bad("task_queue_capacity must be at least 1".into());
        }
        if !(self.wall_clock_secs >= 0.0) {
            return bad("wall_clock_secs must be nonnegative".into());
        }
        if !(self.sampler.examples_per_second > 0.0) {
            return bad("sampler.examples_per_second must be positive".into());
        }
        if self.buffer_capacity < self.scorer.min_buffer_fill {
            return bad(format!(
                "buffer_capacity {} below scorer.min_buffer_fill {}",
                self.buffer_capacity, self.scorer.min_buffer_fill
            ));
        }
        UbsState::new(0, self.max_level).map_err(|e| CampaignError::Config(e.to_string()))?;
        self.scorer.validate()?;
        self.schedule()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("campaign needs at least one problem")]
    NoProblems,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{path}: {message}")]
    State { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Per-conjecture results.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConjectureStats {
    pub name: String,
    pub attempts: u64,
    pub generated: u64,
    pub time_spent_secs: f64,
    pub first_proof_secs: Option<f64>,
    pub shortest_proof: Option<usize>,
    pub proofs: u64,
    /// Some attempt saturated without a refutation.
    pub saturated: bool,
}

impl ConjectureStats {
    pub fn solved(&self) -> bool {
        self.first_proof_secs.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofLogEntry {
    pub conjecture: usize,
    pub problem: String,
    pub discovered_at_secs: f64,
    /// Non-input steps.
    pub length: usize,
    /// Proof file relative to the campaign directory.
    pub file: Option<String>,
    pub replayed: bool,
    /// Found by a search that consulted a learned snapshot.
    pub guided: bool,
    pub level: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignCounters {
    pub tasks_issued: u64,
    pub attempts: u64,
    pub crashed: u64,
    pub guided_attempts: u64,
    pub examples: u64,
    pub learner_updates: u64,
    /// Smallest snapshot update count any guided search used.
    pub min_update_count_when_guided: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub conjectures: Vec<ConjectureStats>,
    pub schedulers: Vec<UbsState>,
    pub proof_log: Vec<ProofLogEntry>,
    pub counters: CampaignCounters,
    pub elapsed_secs: f64,
}

impl CampaignState {
    pub fn solved(&self) -> usize {
        self.conjectures.iter().filter(|c| c.solved()).count()
    }
}

/// Observer of every attempt and the labels sampled from it.
pub type AttemptHook = dyn Fn(&AttemptRecord, &[LabeledPair]) + Send + Sync;

#[derive(Default)]
pub struct CampaignHooks {
    pub on_attempt: Option<Box<AttemptHook>>,
}

/// Final model of learner `index`, relative to the campaign directory.
pub fn snapshot_file(index: usize) -> String {
    format!("learner-{index}.snapshot")
}

/// Loads every `.p` file of `dir`, sorted by file name.
pub fn load_problem_dir(dir: &Path, tptp_root: Option<PathBuf>) -> Result<Vec<Arc<Problem>>, CampaignError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "p"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| load_problem_file(p, tptp_root.clone()).map(Arc::new).map_err(CampaignError::from))
        .collect()
}

struct Completion {
    task: Task,
    elapsed_secs: f64,
    outcome: Option<Outcome>,
    generated: u64,
    proof: Option<Proof>,
    guided: bool,
}

struct Shared<'a> {
    cfg: &'a CampaignConfig,
    problems: &'a [Arc<Problem>],
    schedule: QueueSchedule,
    stop: Arc<AtomicBool>,
    buffer: ExampleBuffer<EncodedExample>,
    snapshots: Vec<ArcSwap<ModelSnapshot>>,
    hooks: &'a CampaignHooks,
    examples: AtomicU64,
    updates: AtomicU64,
    guided: AtomicU64,
    min_guided_update: AtomicU64,
    export: Option<Mutex<BufWriter<fs::File>>>,
}

/// Runs a campaign until every conjecture is proven (or saturated) or the
/// configured wall clock runs out. With `out_dir`, proofs, scheduler state,
/// reports and the learners' final snapshots are written there.
pub fn run_campaign(
    problems: &[Arc<Problem>],
    cfg: &CampaignConfig,
    out_dir: Option<&Path>,
    hooks: &CampaignHooks,
) -> Result<CampaignState, CampaignError> {
    cfg.validate()?;
    if problems.is_empty() {
        return Err(CampaignError::NoProblems);
    }
    let proofs_dir = match out_dir {
        Some(dir) => {
            let p = dir.join("proofs");
            fs::create_dir_all(&p).map_err(io_err(&p))?;
            let c = dir.join("config.toml");
            fs::write(&c, cfg.to_toml()).map_err(io_err(&c))?;
            Some(p)
        }
        None => None,
    };
    let export = match (out_dir, cfg.export_examples && cfg.learning) {
        (Some(dir), true) => {
            let p = dir.join("examples.jsonl");
            Some(Mutex::new(BufWriter::new(fs::File::create(&p).map_err(io_err(&p))?)))
        }
        _ => None,
    };

    let mut learners = Vec::new();
    let mut snapshots = Vec::new();
    if cfg.learning {
        for i in 0..cfg.learners {
            let mut l = LearnerState::new(cfg.scorer.clone(), cfg.seed.wrapping_add(1000 + i as u64))?;
            snapshots.push(ArcSwap::new(l.publish_snapshot()));
            learners.push(l);
        }
    }
    let shared = Shared {
        cfg,
        problems,
        schedule: cfg.schedule()?,
        stop: Arc::new(AtomicBool::new(false)),
        buffer: ExampleBuffer::new(cfg.buffer_capacity, cfg.scorer.min_buffer_fill).map_err(|e| CampaignError::Config(e.to_string()))?,
        snapshots,
        hooks,
        examples: AtomicU64::new(0),
        updates: AtomicU64::new(0),
        guided: AtomicU64::new(0),
        min_guided_update: AtomicU64::new(u64::MAX),
        export,
    };

    let mut state = CampaignState {
        conjectures: problems
            .iter()
            .map(|p| ConjectureStats {
                name: p.name.clone(),
                ..ConjectureStats::default()
            })
            .collect(),
        schedulers: (0..problems.len())
            .map(|i| UbsState::new(i, cfg.max_level).expect("validated"))
            .collect(),
        ..CampaignState::default()
    };

    let (task_tx, task_rx) = bounded::<Task>(cfg.task_queue_capacity);
    let (done_tx, done_rx) = unbounded::<Completion>();
    let start = Instant::now();
    let mut manager = Manager {
        state: &mut state,
        problems,
        proofs_dir: proofs_dir.as_deref(),
        start,
        proof_counts: HashMap::new(),
    };

    thread::scope(|scope| {
        for a in 0..cfg.actors {
            let (shared, task_rx, done_tx) = (&shared, task_rx.clone(), done_tx.clone());
            thread::Builder::new()
                .name(format!("actor-{a}"))
                .spawn_scoped(scope, move || actor(a, shared, task_rx, done_tx))
                .expect("spawn actor");
        }
        for (i, learner) in learners.into_iter().enumerate() {
            let shared = &shared;
            thread::Builder::new()
                .name(format!("learner-{i}"))
                .spawn_scoped(scope, move || learner_loop(i, learner, shared))
                .expect("spawn learner");
        }
        drop(done_tx);
        manager.run(&shared, &task_tx, &done_rx);
        shared.stop.store(true, Ordering::Relaxed);
    });
    drop(task_tx);
    // Attempts that finished while the threads shut down.
    while let Ok(done) = done_rx.try_recv() {
        manager.handle(done, &mut VecDeque::new());
    }

    state.elapsed_secs = start.elapsed().as_secs_f64();
    state.counters.examples = shared.examples.load(Ordering::Relaxed);
    state.counters.learner_updates = shared.updates.load(Ordering::Relaxed);
    state.counters.guided_attempts = shared.guided.load(Ordering::Relaxed);
    let min = shared.min_guided_update.load(Ordering::Relaxed);
    state.counters.min_update_count_when_guided = (min != u64::MAX).then_some(min);
    if let Some(export) = &shared.export {
        let mut w = export.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = w.flush() {
            warn!("flushing example export: {e}");
        }
    }
    if let Some(dir) = out_dir {
        report::save(dir, &state)?;
        for (i, snap) in shared.snapshots.iter().enumerate() {
            let p = dir.join(snapshot_file(i));
            fs::write(&p, snap.load().save()).map_err(io_err(&p))?;
        }
    }
    info!(
        "campaign finished after {:.1}s: {}/{} solved, {} attempts",
        state.elapsed_secs,
        state.solved(),
        problems.len(),
        state.counters.attempts
    );
    Ok(state)
}

struct Manager<'a> {
    state: &'a mut CampaignState,
    problems: &'a [Arc<Problem>],
    proofs_dir: Option<&'a Path>,
    start: Instant,
    proof_counts: HashMap<usize, usize>,
}

impl Manager<'_> {
    fn resolved(&self) -> bool {
        self.state.conjectures.iter().all(|c| c.solved() || c.saturated)
    }

    fn run(&mut self, shared: &Shared, task_tx: &Sender<Task>, done_rx: &Receiver<Completion>) {
        let wall = Duration::from_secs_f64(shared.cfg.wall_clock_secs);
        let mut rng = ChaCha8Rng::seed_from_u64(shared.cfg.seed);
        let mut retry: VecDeque<Task> = VecDeque::new();
        let mut pending: Option<Task> = None;
        while self.start.elapsed() < wall && !self.resolved() {
            if pending.is_none() {
                pending = retry.pop_front().or_else(|| {
                    let c = rng.gen_range(0..self.problems.len());
                    self.state.counters.tasks_issued += 1;
                    Some(self.state.schedulers[c].next_task())
                });
            }
            if let Some(task) = pending.take() {
                match task_tx.try_send(task) {
                    Ok(()) => continue,
                    Err(TrySendError::Full(t)) | Err(TrySendError::Disconnected(t)) => pending = Some(t),
                }
            }
            let wait = wall.saturating_sub(self.start.elapsed()).min(Duration::from_millis(50));
            match done_rx.recv_timeout(wait) {
                Ok(done) => self.handle(done, &mut retry),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
        }
    }

    fn handle(&mut self, done: Completion, retry: &mut VecDeque<Task>) {
        let task = done.task;
        let Some(outcome) = done.outcome else {
            self.state.counters.crashed += 1;
            retry.push_back(task);
            return;
        };
        if let Err(e) = self.state.schedulers[task.conjecture].record_completion(&task, done.elapsed_secs.min(task.time_limit)) {
            warn!("scheduler: {e}");
        }
        self.state.counters.attempts += 1;
        let stats = &mut self.state.conjectures[task.conjecture];
        stats.attempts += 1;
        stats.generated += done.generated;
        stats.time_spent_secs += done.elapsed_secs;
        if outcome == Outcome::Saturated {
            stats.saturated = true;
        }
        let Some(proof) = done.proof else { return };
        let now = self.start.elapsed().as_secs_f64();
        let problem = &self.problems[task.conjecture];
        let replayed = replay_proof_against(&proof, problem);
        if !replayed {
            warn!("proof of {} failed replay", problem.name);
        }
        let seq = self.proof_counts.entry(task.conjecture).or_insert(0);
        *seq += 1;
        let file = self.proofs_dir.and_then(|dir| {
            let name = format!("{:03}-{}-{:04}.proof", task.conjecture, sanitize(&problem.name), seq);
            match fs::write(dir.join(&name), proof.to_text()) {
                Ok(()) => Some(format!("proofs/{name}")),
                Err(e) => {
                    warn!("writing proof {name}: {e}");
                    None
                }
            }
        });
        let length = proof.len();
        stats.proofs += 1;
        if stats.first_proof_secs.is_none() {
            stats.first_proof_secs = Some(now);
            info!("{} proven after {now:.1}s (length {length}, {}s budget)", problem.name, task.time_limit);
        }
        stats.shortest_proof = Some(stats.shortest_proof.map_or(length, |s| s.min(length)));
        self.state.proof_log.push(ProofLogEntry {
            conjecture: task.conjecture,
            problem: problem.name.clone(),
            discovered_at_secs: now,
            length,
            file,
            replayed,
            guided: done.guided,
            level: task.level,
        });
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn actor(index: usize, shared: &Shared, tasks: Receiver<Task>, done: Sender<Completion>) {
    let cfg = shared.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1)));
    while !shared.stop.load(Ordering::Relaxed) {
        let task = match tasks.recv_timeout(Duration::from_millis(50)) {
            Ok(t) => t,
            Err(RecvTimeoutError::Timeout) => continue,
            Err(RecvTimeoutError::Disconnected) => break,
        };
        let result = catch_unwind(AssertUnwindSafe(|| attempt(shared, &task, &mut rng)));
        let completion = match result {
            Ok(c) => c,
            Err(_) => {
                warn!("actor {index} crashed on task {} ({})", task.id, shared.problems[task.conjecture].name);
                Completion {
                    task,
                    elapsed_secs: 0.0,
                    outcome: None,
                    generated: 0,
                    proof: None,
                    guided: false,
                }
            }
        };
        if done.send(completion).is_err() {
            break;
        }
    }
}

fn attempt(shared: &Shared, task: &Task, rng: &mut ChaCha8Rng) -> Completion {
    let cfg = shared.cfg;
    let problem = shared.problems[task.conjecture].clone();
    let scorer = if shared.snapshots.is_empty() {
        None
    } else {
        let snap = shared.snapshots[rng.gen_range(0..shared.snapshots.len())].load_full();
        snap.is_warm(cfg.warmup_updates).then(|| {
            shared.min_guided_update.fetch_min(snap.update_count(), Ordering::Relaxed);
            SnapshotScorer::new(snap, &problem)
        })
    };
    let guided = scorer.is_some();
    if guided {
        shared.guided.fetch_add(1, Ordering::Relaxed);
    }
    let limits = SearchLimits {
        time_secs: task.time_limit,
        memory_bytes: cfg.memory_per_actor_bytes,
        max_steps: None,
        clock: cfg.clock,
    };
    let rec = Search::new(problem, limits)
        .with_schedule(shared.schedule.clone())
        .with_scorer(scorer.as_ref().map(|s| s as &dyn CandidateScorer))
        .with_cancel(shared.stop.clone())
        .run();
    debug!(
        "task {} on {}: {} after {:.2}s, {} generated",
        task.id,
        rec.problem.name,
        rec.outcome.label(),
        rec.elapsed_secs,
        rec.counters.generated
    );
    if cfg.learning {
        let pairs = sample_pairs(&rec, rec.elapsed_secs, &cfg.sampler, rng);
        if let Some(hook) = &shared.hooks.on_attempt {
            hook(&rec, &pairs);
        }
        // Nobody trains on examples from a finished campaign.
        if !shared.stop.load(Ordering::Relaxed) {
            if let Some(export) = &shared.export {
                let examples: Vec<Example> = pairs.iter().map(|p| to_example(&rec, p)).collect();
                let mut w = export.lock().unwrap_or_else(|e| e.into_inner());
                if let Err(e) = write_jsonl(&mut *w, &examples) {
                    warn!("example export: {e}");
                }
            }
            let encoded = encode_pairs(&rec, &pairs);
            shared.examples.fetch_add(encoded.len() as u64, Ordering::Relaxed);
            shared.buffer.put(encoded);
        }
    } else if let Some(hook) = &shared.hooks.on_attempt {
        hook(&rec, &[]);
    }
    Completion {
        task: *task,
        elapsed_secs: rec.elapsed_secs,
        outcome: Some(rec.outcome),
        generated: rec.counters.generated,
        proof: if rec.outcome.is_refuted() { extract_proof(&rec).ok() } else { None },
        guided,
    }
}

fn to_example(rec: &AttemptRecord, p: &LabeledPair) -> Example {
    Example {
        x: rec.records[p.x.index()].clause.clone(),
        g: rec.records[p.goal.index()].clause.clone(),
        conjecture: rec.problem.negated_conjecture.clone().into(),
        symbols: rec.problem.symbols.clone(),
        label: p.label,
    }
}

/// Assembles scorer inputs, encoding each clause graph once.
pub fn encode_pairs(rec: &AttemptRecord, pairs: &[LabeledPair]) -> Vec<EncodedExample> {
    let symbols = &rec.problem.symbols;
    let mut contexts: HashMap<ClauseId, InputContext> = HashMap::new();
    let mut scored: HashMap<ClauseId, Encoded> = HashMap::new();
    pairs
        .iter()
        .map(|p| {
            let ctx = contexts.entry(p.goal).or_insert_with(|| {
                InputContext::new(&rec.records[p.goal.index()].clause, &rec.problem.negated_conjecture, symbols)
            });
            let x = scored
                .entry(p.x)
                .or_insert_with(|| encode(&rec.records[p.x.index()].clause, GraphRole::Scored, symbols));
            EncodedExample {
                input: ctx.assemble_encoded(x),
                label: p.label,
            }
        })
        .collect()
}

fn learner_loop(index: usize, mut learner: LearnerState, shared: &Shared) {
    let mut rng = ChaCha8Rng::seed_from_u64(shared.cfg.seed.wrapping_add(5000 + index as u64));
    let batch_size = learner.config().batch_size;
    while !shared.stop.load(Ordering::Relaxed) {
        let Ok(batch) = shared.buffer.sample_timeout(batch_size, &mut rng, Duration::from_millis(100)) else {
            continue;
        };
        match learner.train_step_encoded(&batch) {
            Ok(loss) => {
                shared.updates.fetch_add(1, Ordering::Relaxed);
                let snap = learner.publish_snapshot();
                debug!("learner {index}: update {} loss {loss:.4}", snap.update_count());
                shared.snapshots[index].store(snap);
            }
            Err(e) => warn!("learner {index}: {e}"),
        }
    }
}
