use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{io_err, CampaignError, CampaignState};

const STATE_FILE: &str = "campaign.json";

/// One row per conjecture: first-proof time, shortest proof, attempts and
/// generated-clause totals.
pub fn stats_csv(state: &CampaignState) -> String {
    let mut out = String::from("problem,solved,first_proof_secs,shortest_proof,proofs,attempts,generated,time_spent_secs\n");
    for c in &state.conjectures {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.3}",
            c.name,
            c.solved(),
            c.first_proof_secs.map_or(String::new(), |t| format!("{t:.3}")),
            c.shortest_proof.map_or(String::new(), |l| l.to_string()),
            c.proofs,
            c.attempts,
            c.generated,
            c.time_spent_secs
        );
    }
    out
}

/// Cumulative number of solved conjectures at each first-proof event.
pub fn survival_csv(state: &CampaignState) -> String {
    let mut times: Vec<f64> = state.conjectures.iter().filter_map(|c| c.first_proof_secs).collect();
    times.sort_by(f64::total_cmp);
    let mut out = String::from("time_secs,solved\n");
    for (i, t) in times.iter().enumerate() {
        let _ = writeln!(out, "{t:.3},{}", i + 1);
    }
    out
}

pub(super) fn save(dir: &Path, state: &CampaignState) -> Result<(), CampaignError> {
    let json = serde_json::to_string_pretty(state).expect("state serializes");
    for (name, text) in [
        (STATE_FILE, json),
        ("stats.csv", stats_csv(state)),
        ("survival.csv", survival_csv(state)),
    ] {
        let p = dir.join(name);
        fs::write(&p, text).map_err(io_err(&p))?;
    }
    Ok(())
}

/// Reads the state saved by a finished campaign in `dir`.
pub fn load_state(dir: &Path) -> Result<CampaignState, CampaignError> {
    let p = dir.join(STATE_FILE);
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    serde_json::from_str(&text).map_err(|e| CampaignError::State {
        path: p,
        message: e.to_string(),
    })
}
