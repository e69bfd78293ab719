//! Saturation-based theorem prover for first-order logic without equality
//! that trains its own clause scorer from hindsight-relabeled attempts.

pub mod calculus;
pub mod clause_graph;
pub mod fol;
pub mod hindsight;
pub mod orchestrator;
pub mod saturation;
pub mod scheduler;
pub mod scorer;
pub mod tptp;

#[cfg(test)]
mod testutil;
