use std::time::Instant;

use serde::{Deserialize, Serialize};

/// How an attempt's time limit is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// Elapsed real time.
    #[default]
    Wall,
    /// CPU time of the searching thread, so attempts sharing a core with
    /// other work still get their full budget.
    ThreadCpu,
}

pub(crate) enum Stopwatch {
    Wall(Instant),
    ThreadCpu(f64),
}

impl Stopwatch {
    pub fn start(clock: Clock) -> Self {
        match clock {
            Clock::ThreadCpu => match thread_cpu_secs() {
                Some(t) => Stopwatch::ThreadCpu(t),
                None => Stopwatch::Wall(Instant::now()),
            },
            Clock::Wall => Stopwatch::Wall(Instant::now()),
        }
    }

    pub fn elapsed_secs(&self) -> f64 {
        match self {
            Stopwatch::Wall(start) => start.elapsed().as_secs_f64(),
            Stopwatch::ThreadCpu(start) => thread_cpu_secs().map_or(0.0, |t| t - start),
        }
    }
}

#[cfg(unix)]
fn thread_cpu_secs() -> Option<f64> {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    (rc == 0).then_some(ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9)
}

#[cfg(not(unix))]
fn thread_cpu_secs() -> Option<f64> {
    None
}
