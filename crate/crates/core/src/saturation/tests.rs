use std::sync::atomic::AtomicBool;

use proptest::prelude::*;

use super::*;
use crate::fol::{Literal, SymbolKind, SymbolTable, Term};
use crate::tptp::{no_includes, parse_problem};

const GRANDPARENT: &str = "
cnf(c1, axiom, ~parent(X, Y) | ~parent(Y, Z) | grandparent(X, Z)).
cnf(c2, axiom, parent(alice, bob)).
cnf(c3, axiom, parent(bob, charlie)).
cnf(c4, negated_conjecture, ~grandparent(alice, A)).
";

fn problem(text: &str) -> Arc<Problem> {
    Arc::new(parse_problem("t", text, &mut no_includes).unwrap())
}

fn run(text: &str) -> AttemptRecord {
    search(
        problem(text),
        SearchLimits::with_time(5.0),
        None,
        QueueSchedule::default(),
    )
}

#[test]
fn grandparent_is_refuted_in_three_steps() {
    let rec = run(GRANDPARENT);
    assert!(rec.outcome.is_refuted(), "{:?}", rec.outcome);
    let proof = extract_proof(&rec).unwrap();
    assert_eq!(proof.len(), 3);
    assert_eq!(proof.steps.len(), 7);
    assert!(proof.steps.last().unwrap().clause.is_empty());
    assert!(replay_proof(&proof));
    assert!(replay_proof_against(&proof, &rec.problem));
}

#[test]
fn single_positive_unit_saturates() {
    let rec = run("cnf(a, axiom, p(a)).");
    assert_eq!(rec.outcome, Outcome::Saturated);
    assert_eq!(rec.counters.generated, 0);
    assert!(extract_proof(&rec).is_err());
}

#[test]
fn empty_input_clause_is_refuted_immediately() {
    let rec = run("cnf(a, axiom, p(a)).\ncnf(b, axiom, $false).");
    assert_eq!(rec.outcome, Outcome::Refuted { empty_clause: ClauseId(1) });
    let proof = extract_proof(&rec).unwrap();
    assert_eq!(proof.steps.len(), 1);
    assert_eq!(proof.len(), 0);
    assert!(replay_proof(&proof));
}

#[test]
fn proof_text_round_trips_and_replays() {
    let rec = run(GRANDPARENT);
    let proof = extract_proof(&rec).unwrap();
    let text = proof.to_text();
    assert!(text.starts_with("% problem t\n"));
    let back = parse_proof(&text).unwrap();
    assert_eq!(back.steps.len(), proof.steps.len());
    assert!(replay_proof(&back));
    assert_eq!(back.to_text(), text);
}

#[test]
fn tampered_proofs_fail_replay() {
    let rec = run(GRANDPARENT);
    let proof = extract_proof(&rec).unwrap();

    // Flip the polarity of one literal in an inferred clause.
    let mut bad = proof.clone();
    let i = bad.steps.iter().position(|s| s.rule == Rule::Resolvent && !s.clause.is_empty()).unwrap();
    let lits: Vec<Literal> = bad.steps[i]
        .clause
        .literals()
        .iter()
        .enumerate()
        .map(|(k, l)| if k == 0 { l.negated() } else { l.clone() })
        .collect();
    bad.steps[i].clause = Clause::new(lits);
    assert!(!replay_proof(&bad));

    // Swapping resolution parents is harmless.
    let mut swapped = proof.clone();
    for s in &mut swapped.steps {
        s.parents.reverse();
    }
    assert!(replay_proof(&swapped));

    // A missing parent breaks the chain.
    let mut cut = proof.clone();
    cut.steps.remove(0);
    assert!(!replay_proof(&cut));

    // The text form is checked the same way.
    let text = proof.to_text().replace("~grandparent", "grandparent");
    assert!(!replay_proof(&parse_proof(&text).unwrap()));
}

#[test]
fn replay_against_rejects_foreign_inputs() {
    let rec = run(GRANDPARENT);
    let proof = extract_proof(&rec).unwrap();
    let other = problem("cnf(a, axiom, parent(alice, bob)).\ncnf(b, axiom, ~parent(alice, bob)).");
    assert!(!replay_proof_against(&proof, &other));
}

#[test]
fn limits_end_the_attempt() {
    // Unbounded chain p(X) => p(f(X)) with an unreachable goal.
    let text = "cnf(a, axiom, p(a)).\ncnf(b, axiom, ~p(X) | p(f(X))).\ncnf(c, negated_conjecture, ~q(a)).";
    let rec = search(
        problem(text),
        SearchLimits {
            max_steps: Some(25),
            ..SearchLimits::default()
        },
        None,
        QueueSchedule::default(),
    );
    assert_eq!(rec.outcome, Outcome::ResourceOut { limit: Limit::Steps });
    assert_eq!(rec.counters.processed, 25);

    let rec = search(problem(text), SearchLimits::with_time(0.2), None, QueueSchedule::default());
    assert_eq!(rec.outcome, Outcome::ResourceOut { limit: Limit::Time });
    assert!(rec.elapsed_secs < 1.0);

    let rec = search(
        problem(text),
        SearchLimits {
            memory_bytes: 20_000,
            ..SearchLimits::default()
        },
        None,
        QueueSchedule::default(),
    );
    assert_eq!(rec.outcome, Outcome::ResourceOut { limit: Limit::Memory });

    let flag = Arc::new(AtomicBool::new(true));
    let rec = Search::new(problem(text), SearchLimits::default())
        .with_cancel(flag)
        .run();
    assert_eq!(rec.outcome, Outcome::ResourceOut { limit: Limit::Cancelled });
}

#[test]
fn records_keep_provenance() {
    let rec = run(GRANDPARENT);
    for (i, r) in rec.records.iter().enumerate() {
        assert_eq!(r.id.index(), i);
        assert_eq!(r.rule == Rule::Input, r.parents.is_empty());
        assert!(r.parents.iter().all(|p| *p < r.id));
        match r.rule {
            Rule::Input => {}
            Rule::Factor => assert_eq!(r.parents.len(), 1),
            Rule::Resolvent => assert_eq!(r.parents.len(), 2),
        }
    }
    assert_eq!(rec.num_input(), 4);
    assert_eq!(rec.counters.generated as usize, rec.records.len() - 4);
}

#[test]
fn search_is_deterministic() {
    let text = "
cnf(a, axiom, p(a) | q(X)).
cnf(b, axiom, ~p(X) | r(f(X))).
cnf(c, axiom, ~q(b) | r(X)).
cnf(d, axiom, ~r(X) | s(X, X)).
cnf(e, negated_conjecture, ~s(f(a), Y) | ~s(Y, b)).
";
    let a = run(text);
    let b = run(text);
    assert_eq!(a.records, b.records);
    assert_eq!(a.outcome, b.outcome);
}

/// Scores clauses by fewest literals, to exercise the learned-cost queue.
struct ShortFirst;

impl CandidateScorer for ShortFirst {
    fn score(&self, clauses: &[&Clause]) -> Vec<f64> {
        clauses.iter().map(|c| 1.0 / (1.0 + c.len() as f64)).collect()
    }
}

#[test]
fn learned_cost_queue_is_used_with_a_scorer() {
    let rec = Search::new(problem(GRANDPARENT), SearchLimits::with_time(5.0))
        .with_scorer(Some(&ShortFirst))
        .run();
    assert!(rec.outcome.is_refuted());
    assert!(rec.counters.scored > 0);
    assert!(replay_proof(&extract_proof(&rec).unwrap()));
}

#[test]
fn weight_picks_are_monotone_without_smaller_insertions() {
    // Only weight picks; no clause is ever generated (all positive units).
    let text = "cnf(a, axiom, p(f(f(a)))).\ncnf(b, axiom, p(a)).\ncnf(c, axiom, p(f(a))).\ncnf(d, axiom, q(a, a, a)).";
    let rec = search(
        problem(text),
        SearchLimits::default(),
        None,
        QueueSchedule::new(vec![QueueKind::Weight]).unwrap(),
    );
    let mut order: Vec<&ClauseRecord> = rec.records.iter().filter(|r| r.processed_at_step.is_some()).collect();
    order.sort_by_key(|r| r.processed_at_step);
    let sizes: Vec<usize> = order.iter().map(|r| r.clause.tree_size()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
}

// ---- age fairness --------------------------------------------------------

fn small_clause_set() -> impl Strategy<Value = Vec<Vec<(bool, u32, u32)>>> {
    // Literals over p/1 with arguments a, b, X, f(X) encoded as 0..4.
    prop::collection::vec(
        prop::collection::vec((any::<bool>(), 0..2u32, 0..4u32), 1..3),
        2..6,
    )
}

fn build(set: &[Vec<(bool, u32, u32)>]) -> Arc<Problem> {
    let mut symbols = SymbolTable::new();
    let p = symbols.intern("p", SymbolKind::Predicate, 1).unwrap();
    let q = symbols.intern("q", SymbolKind::Predicate, 1).unwrap();
    let a = symbols.intern("a", SymbolKind::Function, 0).unwrap();
    let b = symbols.intern("b", SymbolKind::Function, 0).unwrap();
    let f = symbols.intern("f", SymbolKind::Function, 1).unwrap();
    let x = Term::Var(crate::fol::VarId(0));
    let clauses = set
        .iter()
        .map(|lits| {
            Clause::new(
                lits.iter()
                    .map(|&(s, pr, arg)| {
                        let t = match arg {
                            0 => Term::constant(a),
                            1 => Term::constant(b),
                            2 => x.clone(),
                            _ => Term::App(f, vec![x.clone()]),
                        };
                        Literal::new(s, if pr == 0 { p } else { q }, vec![t])
                    })
                    .collect(),
            )
        })
        .collect();
    Arc::new(Problem::from_clauses("random", symbols, clauses, Vec::new()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_clause_is_processed_within_its_age_bound(set in small_clause_set()) {
        let cycle = QueueSchedule::default().pattern().len() as u64;
        let rec = search(
            build(&set),
            SearchLimits { max_steps: Some(300), ..SearchLimits::default() },
            None,
            QueueSchedule::default(),
        );
        let steps = rec.counters.processed;
        for r in &rec.records {
            // Each age pick removes the oldest remaining candidate, so a
            // clause is selected at the latest after id + 1 age picks.
            let bound = r.born_at_step + cycle * (r.id.0 as u64 + 1);
            if bound <= steps && !rec.outcome.is_refuted() {
                prop_assert!(r.processed_at_step.is_some(), "clause {} never processed", r.id);
            }
        }
        if let Ok(p) = extract_proof(&rec) {
            prop_assert!(replay_proof(&p));
        }
    }
}

#[test]
fn thread_cpu_clock_limits_time() {
    let text = "cnf(a, axiom, p(a)).\ncnf(b, axiom, ~p(X) | p(f(X))).\ncnf(c, negated_conjecture, ~q(a)).";
    let limits = SearchLimits {
        clock: Clock::ThreadCpu,
        ..SearchLimits::with_time(0.2)
    };
    let start = std::time::Instant::now();
    let rec = search(problem(text), limits, None, QueueSchedule::default());
    assert_eq!(rec.outcome, Outcome::ResourceOut { limit: Limit::Time });
    assert!(rec.elapsed_secs >= 0.2 && rec.elapsed_secs < 1.0);
    assert!(start.elapsed().as_secs_f64() >= 0.2);
}
