//! C ABI for the prover.
//!
//! Every fallible function returns an [`IlpStatus`] code (0 on success) and
//! writes its result through an out pointer. After a failure,
//! [`ilp_last_error_message`] describes it. Handles are opaque and must be
//! released with their `_free` function. Strings returned by the library
//! are released with [`ilp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use ilprover::hindsight::sample_size;
use ilprover::saturation::{
    extract_proof, parse_proof, replay_proof, replay_proof_against, AttemptRecord, CandidateScorer, Clock, Outcome,
    Search, SearchLimits,
};
use ilprover::scorer::{ModelSnapshot, SnapshotScorer};
use ilprover::tptp::{load_problem_file, no_includes, parse_problem, LoadError, Problem, TptpError, TPTP_ROOT_ENV};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IlpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// Malformed or unreadable problem or proof.
    Parse = 3,
    /// The problem uses equality.
    Equality = 4,
    InvalidArgument = 5,
    /// Malformed scorer snapshot.
    Snapshot = 6,
    /// The attempt has no proof.
    NoProof = 7,
    /// Internal error.
    Panic = 8,
}

/// How a search ended.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IlpOutcome {
    Refuted = 0,
    Saturated = 1,
    ResourceOut = 2,
}

/// Parsed problem.
pub struct IlpProblem(Arc<Problem>);

/// Trained scorer snapshot.
pub struct IlpSnapshot(Arc<ModelSnapshot>);

/// Finished search.
pub struct IlpAttempt(AttemptRecord);

/// Search limits; zero `max_steps` means unlimited.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IlpLimits {
    pub time_secs: f64,
    pub memory_bytes: u64,
    pub max_steps: u64,
    /// Measure `time_secs` as thread CPU time instead of wall time.
    pub cpu_clock: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: IlpStatus, msg: impl Into<String>) -> IlpStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`IlpStatus::Panic`].
fn guard(f: impl FnOnce() -> IlpStatus) -> IlpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(e) => {
            let msg = e
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| e.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(IlpStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, IlpStatus> {
    if p.is_null() {
        return Err(fail(IlpStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IlpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn parse_status(e: &TptpError) -> IlpStatus {
    match e {
        TptpError::Equality { .. } => IlpStatus::Equality,
        _ => IlpStatus::Parse,
    }
}

fn give_string(s: String, out: *mut *mut c_char) -> IlpStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            IlpStatus::Ok
        }
        Err(_) => fail(IlpStatus::Panic, "string contains a NUL byte"),
    }
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ilp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses TPTP text. `include` directives are rejected.
///
/// # Safety
/// `name` and `text` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_problem_parse(
    name: *const c_char,
    text: *const c_char,
    out: *mut *mut IlpProblem,
) -> IlpStatus {
    guard(|| {
        if out.is_null() {
            return fail(IlpStatus::NullArgument, "out is null");
        }
        let (name, text) = match (str_arg(name, "name"), str_arg(text, "text")) {
            (Ok(n), Ok(t)) => (n, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match parse_problem(name, text, &mut no_includes) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(IlpProblem(Arc::new(p))));
                IlpStatus::Ok
            }
            Err(e) => fail(parse_status(&e), e.to_string()),
        }
    })
}

/// Loads a problem file; includes resolve against its directory, then the
/// directory named by the `TPTP` environment variable.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_problem_load_file(path: *const c_char, out: *mut *mut IlpProblem) -> IlpStatus {
    guard(|| {
        if out.is_null() {
            return fail(IlpStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let root = std::env::var_os(TPTP_ROOT_ENV).map(Into::into);
        match load_problem_file(Path::new(path), root) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(IlpProblem(Arc::new(p))));
                IlpStatus::Ok
            }
            Err(LoadError::Parse(e)) => fail(parse_status(&e), e.to_string()),
            Err(e) => fail(IlpStatus::Parse, e.to_string()),
        }
    })
}

/// Number of input clauses (axioms and negated conjecture).
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ilp_problem_num_clauses(problem: *const IlpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.num_input_clauses())
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ilp_problem_free(problem: *mut IlpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Decodes a snapshot written by a campaign.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_snapshot_load(bytes: *const u8, len: usize, out: *mut *mut IlpSnapshot) -> IlpStatus {
    guard(|| {
        if out.is_null() || (bytes.is_null() && len > 0) {
            return fail(IlpStatus::NullArgument, "bytes or out is null");
        }
        let data = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bytes, len) };
        match ModelSnapshot::load(data) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(IlpSnapshot(Arc::new(s))));
                IlpStatus::Ok
            }
            Err(e) => fail(IlpStatus::Snapshot, e.to_string()),
        }
    })
}

/// # Safety
/// `snapshot` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ilp_snapshot_free(snapshot: *mut IlpSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// Runs one search with the default queue ratio. `snapshot` may be null
/// for an unguided search.
///
/// # Safety
/// `problem` must be a live handle, `snapshot` null or a live handle, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_search(
    problem: *const IlpProblem,
    limits: IlpLimits,
    snapshot: *const IlpSnapshot,
    out: *mut *mut IlpAttempt,
) -> IlpStatus {
    guard(|| {
        let Some(problem) = problem.as_ref() else {
            return fail(IlpStatus::NullArgument, "problem is null");
        };
        if out.is_null() {
            return fail(IlpStatus::NullArgument, "out is null");
        }
        if !(limits.time_secs > 0.0) {
            return fail(IlpStatus::InvalidArgument, "time_secs must be positive");
        }
        let scorer = snapshot
            .as_ref()
            .map(|s| SnapshotScorer::new(s.0.clone(), &problem.0));
        let limits = SearchLimits {
            time_secs: limits.time_secs,
            memory_bytes: limits.memory_bytes,
            max_steps: (limits.max_steps > 0).then_some(limits.max_steps),
            clock: if limits.cpu_clock { Clock::ThreadCpu } else { Clock::Wall },
        };
        let rec = Search::new(problem.0.clone(), limits)
            .with_scorer(scorer.as_ref().map(|s| s as &dyn CandidateScorer))
            .run();
        *out = Box::into_raw(Box::new(IlpAttempt(rec)));
        IlpStatus::Ok
    })
}

/// # Safety
/// `attempt` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_attempt_outcome(attempt: *const IlpAttempt, out: *mut IlpOutcome) -> IlpStatus {
    let (Some(a), false) = (attempt.as_ref(), out.is_null()) else {
        return fail(IlpStatus::NullArgument, "attempt or out is null");
    };
    *out = match a.0.outcome {
        Outcome::Refuted { .. } => IlpOutcome::Refuted,
        Outcome::Saturated => IlpOutcome::Saturated,
        Outcome::ResourceOut { .. } => IlpOutcome::ResourceOut,
    };
    IlpStatus::Ok
}

/// Number of non-input clauses the search generated.
///
/// # Safety
/// `attempt` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ilp_attempt_generated(attempt: *const IlpAttempt) -> u64 {
    attempt.as_ref().map_or(0, |a| a.0.counters.generated)
}

/// Proof of a refuted attempt in the text format read by
/// [`ilp_check_proof`]. Release with [`ilp_string_free`].
///
/// # Safety
/// `attempt` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_attempt_proof_text(attempt: *const IlpAttempt, out: *mut *mut c_char) -> IlpStatus {
    guard(|| {
        let (Some(a), false) = (attempt.as_ref(), out.is_null()) else {
            return fail(IlpStatus::NullArgument, "attempt or out is null");
        };
        if !a.0.outcome.is_refuted() {
            return fail(IlpStatus::NoProof, format!("attempt ended {}", a.0.outcome.label()));
        }
        match extract_proof(&a.0) {
            Ok(p) => give_string(p.to_text(), out),
            Err(e) => fail(IlpStatus::Panic, e.to_string()),
        }
    })
}

/// Full attempt record as JSON. Release with [`ilp_string_free`].
///
/// # Safety
/// `attempt` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_attempt_record_json(attempt: *const IlpAttempt, out: *mut *mut c_char) -> IlpStatus {
    guard(|| {
        let (Some(a), false) = (attempt.as_ref(), out.is_null()) else {
            return fail(IlpStatus::NullArgument, "attempt or out is null");
        };
        match serde_json::to_string(&a.0) {
            Ok(s) => give_string(s, out),
            Err(e) => fail(IlpStatus::Panic, e.to_string()),
        }
    })
}

/// # Safety
/// `attempt` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ilp_attempt_free(attempt: *mut IlpAttempt) {
    if !attempt.is_null() {
        drop(Box::from_raw(attempt));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ilp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Replays a proof. With a non-null `problem`, its input clauses must also
/// be clauses of that problem. Writes the verdict to `valid`.
///
/// # Safety
/// `proof_text` must be a NUL-terminated string, `problem` null or a live
/// handle, and `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_check_proof(
    proof_text: *const c_char,
    problem: *const IlpProblem,
    valid: *mut bool,
) -> IlpStatus {
    guard(|| {
        if valid.is_null() {
            return fail(IlpStatus::NullArgument, "valid is null");
        }
        let text = match str_arg(proof_text, "proof_text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let proof = match parse_proof(text) {
            Ok(p) => p,
            Err(e) => return fail(IlpStatus::Parse, e.to_string()),
        };
        *valid = match problem.as_ref() {
            Some(p) => replay_proof_against(&proof, &p.0),
            None => replay_proof(&proof),
        };
        IlpStatus::Ok
    })
}

/// Inverse CDF of the heavy-tailed tree-size distribution used for
/// hindsight goal sampling; `u` must lie in `[0, 1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ilp_sample_size(u: f64, out: *mut u64) -> IlpStatus {
    if out.is_null() {
        return fail(IlpStatus::NullArgument, "out is null");
    }
    match sample_size(u) {
        Ok(s) => {
            *out = s;
            IlpStatus::Ok
        }
        Err(e) => fail(IlpStatus::InvalidArgument, e.to_string()),
    }
}
