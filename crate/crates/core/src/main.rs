//! `ilprover` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | refutation found; `check` verdict valid; other commands succeeded |
//! | 1    | internal error; `check` verdict invalid |
//! | 2    | unreadable or malformed input (problem, proof, record, config, snapshot) |
//! | 3    | problem uses equality, which is out of scope |
//! | 10   | search saturated without a refutation |
//! | 11   | search ran out of time, memory or steps |

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ilprover::hindsight::{sample_examples, write_jsonl, SamplerConfig};
use ilprover::orchestrator::{
    load_problem_dir, load_state, run_campaign, stats_csv, survival_csv, CampaignConfig, CampaignError,
    CampaignHooks,
};
use ilprover::saturation::{
    extract_proof, parse_proof, replay_proof, replay_proof_against, AttemptRecord, CandidateScorer, Clock, Limit, Outcome,
    QueueSchedule, Search, SearchLimits,
};
use ilprover::scorer::{ModelSnapshot, SnapshotScorer};
use ilprover::tptp::{load_problem_file, LoadError, TptpError, TPTP_ROOT_ENV};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_EQUALITY: u8 = 3;
const EXIT_SATURATED: u8 = 10;
const EXIT_RESOURCE_OUT: u8 = 11;

#[derive(Parser)]
#[command(name = "ilprover", version, about = "Learning given-clause prover for equality-free first-order logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search on a problem.
    Prove(ProveArgs),
    /// Run an incremental learning campaign over a directory of problems.
    Campaign(Box<CampaignArgs>),
    /// Replay a proof file.
    Check(CheckArgs),
    /// Sample hindsight examples from a saved attempt record as JSON lines.
    ExportExamples(ExportArgs),
    /// Print per-problem statistics of a finished campaign as CSV.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Wall,
    ThreadCpu,
}

impl From<ClockArg> for Clock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::Wall => Clock::Wall,
            ClockArg::ThreadCpu => Clock::ThreadCpu,
        }
    }
}

#[derive(Args)]
struct ProveArgs {
    /// TPTP problem file.
    problem: PathBuf,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    /// Memory cap in bytes.
    #[arg(long, default_value_t = 1 << 30)]
    memory_cap: u64,
    /// Stop after this many given-clause steps.
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, value_enum, default_value = "wall")]
    clock: ClockArg,
    /// Scorer snapshot used by the learned-cost queue.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Queue selection ratio `age:weight:learned`.
    #[arg(long, default_value = "1:3:9")]
    queue_ratio: String,
    /// Where to write the proof (default `<problem name>.proof`).
    #[arg(long)]
    proof_out: Option<PathBuf>,
    /// Also write the full attempt record as JSON.
    #[arg(long)]
    record_out: Option<PathBuf>,
    /// Root directory for `include` directives.
    #[arg(long, env = TPTP_ROOT_ENV)]
    tptp_root: Option<PathBuf>,
    /// Fixed queue cycle and pinned seeds.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct CampaignArgs {
    /// Directory of `.p` problem files.
    problem_dir: PathBuf,
    /// TOML campaign configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for proofs, reports and snapshots.
    #[arg(long, default_value = "campaign-out")]
    out: PathBuf,
    #[arg(long, env = TPTP_ROOT_ENV)]
    tptp_root: Option<PathBuf>,
    /// Pin the seed (0 unless `--seed` is given) and use the fixed queue cycle.
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    actors: Option<usize>,
    #[arg(long)]
    learners: Option<usize>,
    /// Memory cap of one search in bytes.
    #[arg(long)]
    memory_cap: Option<u64>,
    #[arg(long)]
    warmup_updates: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_level: Option<u32>,
    /// Campaign length in seconds.
    #[arg(long)]
    wall_clock: Option<f64>,
    #[arg(long)]
    task_queue_capacity: Option<usize>,
    #[arg(long)]
    buffer_capacity: Option<usize>,
    #[arg(long)]
    queue_ratio: Option<String>,
    /// Disable example sampling and learning.
    #[arg(long)]
    no_learning: bool,
    /// Write every sampled example to `examples.jsonl`.
    #[arg(long)]
    export_examples: bool,
    #[arg(long, value_enum)]
    clock: Option<ClockArg>,
    #[arg(long)]
    examples_per_second: Option<f64>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    ff_width: Option<usize>,
    #[arg(long)]
    embed: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    min_buffer_fill: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    /// Proof file written by `prove` or a campaign.
    proof: PathBuf,
    /// Also require the proof's input clauses to belong to this problem.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, env = TPTP_ROOT_ENV)]
    tptp_root: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Attempt record JSON written by `prove --record-out`.
    record: PathBuf,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    examples_per_second: Option<f64>,
}

#[derive(Args)]
struct StatsArgs {
    campaign_dir: PathBuf,
    /// Print the cumulative solved-over-time table instead.
    #[arg(long)]
    survival: bool,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self::new(EXIT_INPUT, message)
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let code = match &e {
            LoadError::Parse(TptpError::Equality { .. }) => EXIT_EQUALITY,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CampaignError> for Failure {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::Load(e) => e.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::input(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prove(a) => cmd_prove(a),
        Command::Campaign(a) => cmd_campaign(*a),
        Command::Check(a) => cmd_check(a),
        Command::ExportExamples(a) => cmd_export_examples(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_prove(a: ProveArgs) -> Result<u8, Failure> {
    let problem = Arc::new(load_problem_file(&a.problem, a.tptp_root)?);
    let schedule = if a.deterministic {
        QueueSchedule::default()
    } else {
        a.queue_ratio
            .parse::<QueueSchedule>()
            .map_err(|e| Failure::input(format!("--queue-ratio: {e}")))?
    };
    if !(a.time_limit > 0.0) {
        return Err(Failure::input("--time-limit must be positive"));
    }
    let scorer = match &a.snapshot {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| io_failure(p, e))?;
            let snap = ModelSnapshot::load(&bytes).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            Some(SnapshotScorer::new(Arc::new(snap), &problem))
        }
        None => None,
    };
    let limits = SearchLimits {
        time_secs: a.time_limit,
        memory_bytes: a.memory_cap,
        max_steps: a.max_steps,
        clock: a.clock.into(),
    };
    let rec = Search::new(problem.clone(), limits)
        .with_schedule(schedule)
        .with_scorer(scorer.as_ref().map(|s| s as &dyn CandidateScorer))
        .run();

    println!("% problem {}", problem.name);
    println!("% status {}", rec.outcome.label());
    if let Outcome::ResourceOut { limit } = rec.outcome {
        let which = match limit {
            Limit::Time => "time",
            Limit::Memory => "memory",
            Limit::Steps => "steps",
            Limit::Cancelled => "cancelled",
        };
        println!("% limit {which}");
    }
    println!("% generated {}", rec.counters.generated);
    println!("% processed {}", rec.counters.processed);
    println!("% elapsed_secs {:.3}", rec.elapsed_secs);
    if let Some(p) = &a.record_out {
        let json = serde_json::to_string(&rec).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
        fs::write(p, json).map_err(|e| io_failure(p, e))?;
    }
    match rec.outcome {
        Outcome::Refuted { .. } => {
            let proof = extract_proof(&rec).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
            let path = a.proof_out.unwrap_or_else(|| PathBuf::from(format!("{}.proof", problem.name)));
            fs::write(&path, proof.to_text()).map_err(|e| io_failure(&path, e))?;
            println!("% proof_length {}", proof.len());
            println!("% proof_file {}", path.display());
            Ok(0)
        }
        Outcome::Saturated => Ok(EXIT_SATURATED),
        Outcome::ResourceOut { .. } => Ok(EXIT_RESOURCE_OUT),
    }
}

fn campaign_config(a: &CampaignArgs) -> Result<CampaignConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            CampaignConfig::from_toml(&text)?
        }
        None => CampaignConfig::default(),
    };
    macro_rules! set {
        ($($field:ident).+ = $value:expr) => {
            if let Some(v) = $value.clone() {
                cfg.$($field).+ = v;
            }
        };
    }
    set!(actors = a.actors);
    set!(learners = a.learners);
    set!(memory_per_actor_bytes = a.memory_cap);
    set!(warmup_updates = a.warmup_updates);
    set!(seed = a.seed);
    set!(max_level = a.max_level);
    set!(wall_clock_secs = a.wall_clock);
    set!(task_queue_capacity = a.task_queue_capacity);
    set!(buffer_capacity = a.buffer_capacity);
    set!(queue_schedule = a.queue_ratio);
    set!(sampler.examples_per_second = a.examples_per_second);
    set!(scorer.layers = a.layers);
    set!(scorer.heads = a.heads);
    set!(scorer.width = a.width);
    set!(scorer.ff_width = a.ff_width);
    set!(scorer.embed = a.embed);
    set!(scorer.dropout = a.dropout);
    set!(scorer.learning_rate = a.learning_rate);
    set!(scorer.batch_size = a.batch_size);
    set!(scorer.min_buffer_fill = a.min_buffer_fill);
    if let Some(c) = a.clock {
        cfg.clock = c.into();
    }
    if a.no_learning {
        cfg.learning = false;
    }
    if a.export_examples {
        cfg.export_examples = true;
    }
    if a.deterministic {
        cfg.seed = a.seed.unwrap_or(0);
        cfg.queue_schedule = QueueSchedule::default().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_campaign(a: CampaignArgs) -> Result<u8, Failure> {
    let cfg = campaign_config(&a)?;
    let problems = load_problem_dir(&a.problem_dir, a.tptp_root.clone())?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    let state = run_campaign(&problems, &cfg, Some(&a.out), &CampaignHooks::default())?;
    println!(
        "solved {}/{} in {:.1}s ({} attempts, {} examples, {} learner updates)",
        state.solved(),
        problems.len(),
        state.elapsed_secs,
        state.counters.attempts,
        state.counters.examples,
        state.counters.learner_updates
    );
    println!("results in {}", a.out.display());
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.proof).map_err(|e| io_failure(&a.proof, e))?;
    let proof = parse_proof(&text).map_err(|e| Failure::input(format!("{}: {e}", a.proof.display())))?;
    let valid = match &a.problem {
        Some(p) => {
            let problem = load_problem_file(p, a.tptp_root)?;
            replay_proof_against(&proof, &problem)
        }
        None => replay_proof(&proof),
    };
    println!("{}", if valid { "valid" } else { "invalid" });
    Ok(if valid { 0 } else { EXIT_FAILURE })
}

fn cmd_export_examples(a: ExportArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&a.record).map_err(|e| io_failure(&a.record, e))?;
    let rec: AttemptRecord =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", a.record.display())))?;
    let mut cfg = SamplerConfig::default();
    if let Some(r) = a.examples_per_second {
        if !(r > 0.0) {
            return Err(Failure::input("--examples-per-second must be positive"));
        }
        cfg.examples_per_second = r;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let examples = sample_examples(&rec, rec.elapsed_secs, &cfg, &mut rng);
    let write = |out: &mut dyn Write| -> io::Result<()> {
        let mut out = BufWriter::new(out);
        write_jsonl(&mut out, &examples)?;
        out.flush()
    };
    match &a.out {
        Some(p) => {
            let mut f = fs::File::create(p).map_err(|e| io_failure(p, e))?;
            write(&mut f).map_err(|e| io_failure(p, e))?;
        }
        None => write(&mut io::stdout().lock()).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?,
    }
    eprintln!("{} examples", examples.len());
    Ok(0)
}

fn cmd_stats(a: StatsArgs) -> Result<u8, Failure> {
    let state = load_state(&a.campaign_dir)?;
    let csv = if a.survival { survival_csv(&state) } else { stats_csv(&state) };
    print!("{csv}");
    Ok(0)
}
