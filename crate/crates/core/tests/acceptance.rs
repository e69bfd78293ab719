//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits nonzero if any fails.
//!
//! `cargo test --test acceptance -- 3 7` runs only the listed criteria.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ilprover::calculus::{factors, resolvents, subsumes};
use ilprover::clause_graph::{
    assemble_input, build_graph, laplacian_eigen, spectral_encoding, GraphRole, FEATURE_DIM, MAX_NODES, SPECTRAL_DIM,
};
use ilprover::fol::{unify, Clause, Literal, SymbolKind, SymbolTable, Term, VarGen, VarId};
use ilprover::hindsight::{cumulative_weight, draw_size, sample_pairs, weight, LabeledPair, SamplerConfig};
use ilprover::orchestrator::{load_problem_dir, run_campaign, CampaignConfig, CampaignHooks, CampaignState};
use ilprover::saturation::{
    extract_proof, parse_proof, replay_proof_against, AttemptRecord, ClauseId, Outcome, Rule, Search, SearchLimits,
};
use ilprover::scheduler::{budget_menu, UbsState, DEFAULT_MAX_LEVEL};
use ilprover::scorer::{EncodedExample, Example, Label, LearnerState, ScorerConfig};
use ilprover::tptp::{no_includes, parse_clause, parse_problem, Problem};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

const GRANDPARENT: &str = "
cnf(c1, axiom, ~parent(X, Y) | ~parent(Y, Z) | grandparent(X, Z)).
cnf(c2, axiom, parent(alice, bob)).
cnf(c3, axiom, parent(bob, charlie)).
cnf(c4, negated_conjecture, ~grandparent(alice, A)).
";

/// Neither refutable nor saturating.
const ENDLESS: &str = "
cnf(a, axiom, p(a)).
cnf(b, axiom, ~p(X) | p(f(X))).
cnf(c, axiom, ~p(X) | ~p(Y) | r(X, Y)).
cnf(d, negated_conjecture, ~q(a)).
";

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn problem(name: &str, text: &str) -> Arc<Problem> {
    Arc::new(parse_problem(name, text, &mut no_includes).expect("fixture parses"))
}

/// Clauses written in TPTP syntax over one symbol table.
struct Clauses {
    symbols: SymbolTable,
    vars: VarGen,
}

impl Clauses {
    fn new() -> Self {
        Clauses {
            symbols: SymbolTable::new(),
            vars: VarGen::new(),
        }
    }

    fn clause(&mut self, text: &str) -> Clause {
        parse_clause(text, &mut self.symbols, &mut self.vars).expect("fixture clause parses")
    }

    fn lit(&mut self, text: &str) -> Literal {
        self.clause(text).literals()[0].clone()
    }

    fn variant_of(&mut self, got: &Clause, want: &str) -> bool {
        let w = self.clause(want);
        got.is_variant(&w)
    }
}

fn var_of(t: &Term) -> VarId {
    match t {
        Term::Var(v) => *v,
        Term::App(..) => panic!("expected a variable"),
    }
}

// ---- 1 ---------------------------------------------------------------------

fn worked_examples() -> Verdict {
    let mut cx = Clauses::new();

    let l1 = cx.lit("parent(X, Y)");
    let l2 = cx.lit("parent(alice, Z)");
    let (x, y, z) = (var_of(&l1.args[0]), var_of(&l1.args[1]), var_of(&l2.args[1]));
    let alice = l2.args[0].clone();
    let mgu = unify(&l1, &l2).ok_or("parent(X, Y) and parent(alice, Z) do not unify")?;
    ensure!(mgu.len() == 2, "mgu has {} bindings", mgu.len());
    ensure!(mgu.get(x) == Some(&alice), "mgu does not bind X to alice");
    let renames = mgu.get(y) == Some(&Term::Var(z)) || mgu.get(z) == Some(&Term::Var(y));
    ensure!(renames, "mgu does not identify Y and Z");
    let u1 = Clause::new(vec![mgu.apply_literal(&l1)]);
    let u2 = Clause::new(vec![mgu.apply_literal(&l2)]);
    ensure!(u1 == u2, "mgu does not unify");
    ensure!(cx.variant_of(&u1, "parent(alice, Z)"), "unified literal is not parent(alice, Z)");

    let c1 = cx.clause("~parent(X, Y) | ~parent(Y, Z) | grandparent(X, Z)");
    let c2 = cx.clause("parent(alice, bob)");
    let c3 = cx.clause("parent(bob, charlie)");
    let c4 = cx.clause("~grandparent(alice, A)");

    let fs = factors(&c1, &mut cx.vars);
    ensure!(fs.len() == 1, "C1 has {} factors, expected 1", fs.len());
    ensure!(cx.variant_of(&fs[0], "~parent(Y, Y) | grandparent(Y, Y)"), "wrong factor of C1");
    let c1_vars = c1.vars();
    ensure!(fs[0].vars().iter().all(|v| !c1_vars.contains(v)), "factor reuses variables of C1");

    let rs = resolvents(&c1, &c2, &mut cx.vars);
    ensure!(rs.len() == 2, "C1, C2 have {} resolvents, expected 2", rs.len());
    for want in ["~parent(bob, Z) | grandparent(alice, Z)", "~parent(X, alice) | grandparent(X, bob)"] {
        ensure!(rs.iter().any(|r| cx.variant_of(r, want)), "missing resolvent {want}");
    }

    let c5 = resolvents(&c4, &c1, &mut cx.vars);
    ensure!(c5.len() == 1 && cx.variant_of(&c5[0], "~parent(alice, Y) | ~parent(Y, A)"), "wrong C5");
    let c6s = resolvents(&c5[0], &c2, &mut cx.vars);
    let c6 = c6s.iter().find(|c| cx.variant_of(c, "~parent(bob, A)")).ok_or("C6 not derived")?;
    ensure!(resolvents(c6, &c3, &mut cx.vars).iter().any(Clause::is_empty), "C6, C3 give no empty clause");

    let general = cx.clause("p(X, a)");
    let specific = cx.clause("p(b, a) | p(c, a)");
    ensure!(subsumes(&general, &specific), "p(X, a) does not subsume p(b, a) | p(c, a)");
    ensure!(!subsumes(&specific, &general), "p(b, a) | p(c, a) subsumes p(X, a)");

    let start = Instant::now();
    let rec = Search::new(problem("grandparent", GRANDPARENT), SearchLimits::with_time(1.0)).run();
    let secs = start.elapsed().as_secs_f64();
    ensure!(rec.outcome.is_refuted(), "grandparent ended {}", rec.outcome.label());
    let proof = extract_proof(&rec).map_err(|e| e.to_string())?;
    ensure!(proof.len() == 3, "grandparent proof has {} steps", proof.len());
    ensure!(secs < 1.0, "grandparent took {secs:.3}s");
    Ok(format!("mgu, factor, resolvents, subsumption exact; 3-step refutation in {:.1} ms", secs * 1e3))
}

// ---- 2 ---------------------------------------------------------------------

fn tree_sizes() -> Verdict {
    let mut cx = Clauses::new();
    let got = [
        cx.clause("p(X, a, X, b) | q(a)").tree_size(),
        cx.clause("parent(X, bob)").tree_size(),
        Clause::empty().tree_size(),
    ];
    ensure!(got == [7, 3, 0], "tree sizes {got:?}, expected [7, 3, 0]");
    Ok("7, 3, 0".into())
}

// ---- 3 ---------------------------------------------------------------------

/// Unary p, q and binary r over constants a, b.
struct GroundSig {
    symbols: SymbolTable,
    preds: [(ilprover::fol::SymbolId, usize); 3],
    consts: [Term; 2],
}

impl GroundSig {
    fn new() -> Self {
        let mut symbols = SymbolTable::new();
        let mut pred = |n, a| (symbols.intern(n, SymbolKind::Predicate, a).unwrap(), a);
        let preds = [pred("p", 1), pred("q", 1), pred("r", 2)];
        let a = Term::constant(symbols.intern("a", SymbolKind::Function, 0).unwrap());
        let b = Term::constant(symbols.intern("b", SymbolKind::Function, 0).unwrap());
        GroundSig {
            symbols,
            preds,
            consts: [a, b],
        }
    }

    /// Index of a ground atom in the 8-atom Herbrand base.
    fn atom(&self, l: &Literal) -> usize {
        let c = |t: &Term| self.consts.iter().position(|k| k == t).expect("ground argument");
        let p = self.preds.iter().position(|(s, _)| *s == l.pred).unwrap();
        match p {
            0 => c(&l.args[0]),
            1 => 2 + c(&l.args[0]),
            _ => 4 + 2 * c(&l.args[0]) + c(&l.args[1]),
        }
    }

    fn random_clause(&self, rng: &mut ChaCha8Rng, base_var: u32) -> Clause {
        let len = match rng.gen_range(0..20) {
            0..=8 => 1,
            9..=15 => 2,
            _ => 3,
        };
        let lits = (0..len)
            .map(|_| {
                let (pred, arity) = self.preds[rng.gen_range(0..3)];
                let args = (0..arity)
                    .map(|_| {
                        if rng.gen_bool(0.25) {
                            Term::Var(VarId(base_var + rng.gen_range(0..2)))
                        } else {
                            self.consts[rng.gen_range(0..2)].clone()
                        }
                    })
                    .collect();
                Literal::new(rng.gen_bool(0.5), pred, args)
            })
            .collect();
        Clause::new(lits)
    }

    /// Brute-force unsatisfiability: ground every clause over {a, b} and
    /// try all 256 Herbrand interpretations.
    fn unsatisfiable(&self, clauses: &[Clause]) -> bool {
        let mut ground: Vec<(u8, u8)> = Vec::new();
        for c in clauses {
            let vars = c.vars();
            for assignment in 0..(1u32 << vars.len()) {
                let mut pos = 0u8;
                let mut neg = 0u8;
                for l in c.literals() {
                    let g = l.map_vars(&mut |v| {
                        let i = vars.iter().position(|w| *w == v).unwrap();
                        self.consts[(assignment >> i) as usize & 1].clone()
                    });
                    let bit = 1u8 << self.atom(&g);
                    if g.positive {
                        pos |= bit;
                    } else {
                        neg |= bit;
                    }
                }
                ground.push((pos, neg));
            }
        }
        !(0..=255u8).any(|m| ground.iter().all(|&(pos, neg)| m & pos != 0 || !m & neg != 0))
    }
}

fn calculus_vs_herbrand() -> Verdict {
    let sig = GroundSig::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let sets = 300;
    let (mut unsat, mut agree) = (0, 0);
    let mut failures = Vec::new();
    for i in 0..sets {
        let n = rng.gen_range(3..=8);
        let clauses: Vec<Clause> = (0..n).map(|k| sig.random_clause(&mut rng, 2 * k as u32)).collect();
        let expected = sig.unsatisfiable(&clauses);
        unsat += usize::from(expected);
        let (axioms, conj) = clauses.split_at(n - 1);
        let p = Arc::new(Problem::from_clauses(format!("set{i}"), sig.symbols.clone(), axioms.to_vec(), conj.to_vec()));
        let limits = SearchLimits {
            time_secs: 30.0,
            ..SearchLimits::default()
        };
        let rec = Search::new(p.clone(), limits).run();
        let ok = match rec.outcome {
            Outcome::Refuted { .. } => {
                expected && extract_proof(&rec).is_ok_and(|proof| replay_proof_against(&proof, &p))
            }
            Outcome::Saturated => !expected,
            Outcome::ResourceOut { .. } => false,
        };
        if ok {
            agree += 1;
        } else if failures.len() < 3 {
            failures.push(format!("set {i}: oracle unsat={expected}, search {}", rec.outcome.label()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(agree == sets, "{agree}/{sets} agree; {}", failures.join("; "));
    ensure!(unsat > 0 && unsat < sets, "degenerate sample: {unsat}/{sets} unsatisfiable");
    ensure!(secs < 120.0, "took {secs:.1}s");
    Ok(format!("{agree}/{sets} agree ({unsat} unsatisfiable) in {secs:.1}s"))
}

// ---- 4 ---------------------------------------------------------------------

struct SubsumptionSig {
    p: ilprover::fol::SymbolId,
    q: ilprover::fol::SymbolId,
    f: ilprover::fol::SymbolId,
    consts: [Term; 2],
}

impl SubsumptionSig {
    fn new() -> Self {
        let mut symbols = SymbolTable::new();
        let p = symbols.intern("p", SymbolKind::Predicate, 2).unwrap();
        let q = symbols.intern("q", SymbolKind::Predicate, 1).unwrap();
        let f = symbols.intern("f", SymbolKind::Function, 1).unwrap();
        let a = Term::constant(symbols.intern("a", SymbolKind::Function, 0).unwrap());
        let b = Term::constant(symbols.intern("b", SymbolKind::Function, 0).unwrap());
        SubsumptionSig {
            p,
            q,
            f,
            consts: [a, b],
        }
    }

    fn term(&self, rng: &mut ChaCha8Rng, vars: &[VarId], depth: u32) -> Term {
        match rng.gen_range(0..10) {
            0..=3 => Term::Var(vars[rng.gen_range(0..vars.len())]),
            4..=6 if depth > 0 => Term::App(self.f, vec![self.term(rng, vars, depth - 1)]),
            _ => self.consts[rng.gen_range(0..2)].clone(),
        }
    }

    fn literal(&self, rng: &mut ChaCha8Rng, vars: &[VarId]) -> Literal {
        let positive = rng.gen_bool(0.5);
        if rng.gen_bool(0.6) {
            Literal::new(positive, self.p, vec![self.term(rng, vars, 2), self.term(rng, vars, 2)])
        } else {
            Literal::new(positive, self.q, vec![self.term(rng, vars, 2)])
        }
    }
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    if !out.contains(t) {
        out.push(t.clone());
    }
    if let Term::App(_, args) = t {
        for a in args {
            subterms(a, out);
        }
    }
}

/// Enumerates every map from the general clause's variables to subterms of
/// the specific clause; any embedding must be one of them.
fn subsumes_by_enumeration(general: &Clause, specific: &Clause) -> bool {
    let vars = general.vars();
    let mut terms = Vec::new();
    for l in specific.literals() {
        for a in &l.args {
            subterms(a, &mut terms);
        }
    }
    if terms.is_empty() {
        terms.push(Term::Var(VarId(u32::MAX)));
    }
    let total = terms.len().pow(vars.len() as u32);
    (0..total).any(|mut code| {
        let mut chosen = Vec::with_capacity(vars.len());
        for _ in &vars {
            chosen.push(terms[code % terms.len()].clone());
            code /= terms.len();
        }
        general.literals().iter().all(|l| {
            let image = l.map_vars(&mut |v| chosen[vars.iter().position(|w| *w == v).unwrap()].clone());
            specific.literals().contains(&image)
        })
    })
}

fn subsumption_vs_enumeration() -> Verdict {
    let sig = SubsumptionSig::new();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let general_vars = [VarId(0), VarId(1), VarId(2)];
    let specific_vars = [VarId(10), VarId(11), VarId(12)];
    let instances = 600;
    let (mut positive, mut agree) = (0, 0);
    let mut failures = Vec::new();
    for i in 0..instances {
        let k = rng.gen_range(1..=3);
        let general = Clause::new((0..k).map(|_| sig.literal(&mut rng, &general_vars[..k])).collect());
        let specific = if rng.gen_bool(0.5) {
            // An instance of the general clause plus noise.
            let images: Vec<Term> = general_vars.iter().map(|_| sig.term(&mut rng, &specific_vars, 1)).collect();
            let mut lits: Vec<Literal> = general
                .literals()
                .iter()
                .map(|l| l.map_vars(&mut |v| images[v.0 as usize].clone()))
                .collect();
            for _ in 0..rng.gen_range(0..=2) {
                lits.push(sig.literal(&mut rng, &specific_vars));
            }
            Clause::new(lits)
        } else {
            Clause::new((0..rng.gen_range(1..=4)).map(|_| sig.literal(&mut rng, &specific_vars)).collect())
        };
        let want = subsumes_by_enumeration(&general, &specific);
        positive += usize::from(want);
        if subsumes(&general, &specific) == want {
            agree += 1;
        } else if failures.len() < 3 {
            failures.push(format!("instance {i}: enumeration says {want}"));
        }
    }
    ensure!(agree == instances, "{agree}/{instances} agree; {}", failures.join("; "));
    ensure!(positive > 0 && positive < instances, "degenerate sample: {positive} subsumptions");
    Ok(format!("{agree}/{instances} agree ({positive} subsumptions)"))
}

// ---- 5 ---------------------------------------------------------------------

fn heavy_tail() -> Verdict {
    let mut worst: f64 = 0.0;
    // Neumaier-compensated running sum of the per-size weights.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for s in 0..=1_000_000u64 {
        let w = weight(s);
        let t = sum + w;
        comp += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
        sum = t;
        let closed = 1.0 - 1.0 / (s as f64 + std::f64::consts::E + 1.0).ln();
        worst = worst.max((sum + comp - closed).abs()).max((cumulative_weight(s) - closed).abs());
    }
    ensure!(worst <= 1e-12, "partial sums off by {worst:e}");

    let draws = 1_000_000u32;
    let mut counts = [0u32; 21];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..draws {
        let s = draw_size(&mut rng);
        if s <= 20 {
            counts[s as usize] += 1;
        }
    }
    let n = f64::from(draws);
    let mut worst_z: f64 = 0.0;
    for (s, &c) in counts.iter().enumerate() {
        let w = weight(s as u64);
        let se = (w * (1.0 - w) / n).sqrt();
        let z = (f64::from(c) / n - w).abs() / se;
        ensure!(z <= 3.0, "size {s}: frequency {} vs weight {w} ({z:.2} standard errors)", f64::from(c) / n);
        worst_z = worst_z.max(z);
    }
    Ok(format!("partial sums within {worst:.1e}; frequencies within {worst_z:.2} standard errors"))
}

// ---- 6 ---------------------------------------------------------------------

fn scheduler_balance() -> Verdict {
    let menu = budget_menu(DEFAULT_MAX_LEVEL);
    let want: Vec<f64> = (1..=10).map(|k| 3.0 * 2f64.powi(k - 1)).collect();
    ensure!(menu == want, "budget menu {menu:?}");
    let mut s = UbsState::new(0, DEFAULT_MAX_LEVEL).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let task = s.next_task();
        s.record_completion(&task, task.time_limit).map_err(|e| e.to_string())?;
        let spent = s.spent();
        let max = spent.iter().copied().fold(f64::MIN, f64::max);
        let min = spent.iter().copied().fold(f64::MAX, f64::min);
        worst = worst.max(max - min);
        ensure!(max - min <= 1536.0, "after {} issuances spread is {}", i + 1, max - min);
    }
    Ok(format!("menu 3..1536; worst spread {worst}s over 10000 issuances"))
}

// ---- 7 ---------------------------------------------------------------------

/// Strict ancestors by walking parent links, independent of the library.
fn strict_ancestors(rec: &AttemptRecord, goal: ClauseId) -> BTreeSet<u32> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<u32> = rec.records[goal.0 as usize].parents.iter().map(|p| p.0).collect();
    while let Some(id) = stack.pop() {
        if seen.insert(id) {
            stack.extend(rec.records[id as usize].parents.iter().map(|p| p.0));
        }
    }
    seen
}

fn small_scorer() -> ScorerConfig {
    ScorerConfig {
        layers: 1,
        heads: 2,
        width: 16,
        ff_width: 32,
        embed: 16,
        batch_size: 16,
        min_buffer_fill: 32,
        ..ScorerConfig::default()
    }
}

fn hindsight_label_soundness() -> Verdict {
    let mut problems = load_problem_dir(&corpus(), None).map_err(|e| e.to_string())?;
    problems.retain(|p| ["grandparent", "graph_path", "same_set_symmetric", "split_universals"].contains(&p.name.as_str()));
    problems.push(problem("endless", ENDLESS));
    #[derive(Default)]
    struct Tally {
        positives: u64,
        negatives: u64,
        bad: Vec<String>,
    }
    let tally = Arc::new(Mutex::new(Tally::default()));
    let sink = tally.clone();
    let hooks = CampaignHooks {
        on_attempt: Some(Box::new(move |rec: &AttemptRecord, pairs: &[LabeledPair]| {
            let mut t = sink.lock().unwrap();
            for pair in pairs {
                let anc = strict_ancestors(rec, pair.goal);
                let inside = anc.contains(&pair.x.0);
                match pair.label {
                    Label::Positive => {
                        t.positives += 1;
                        if !inside {
                            t.bad.push(format!("{}: positive {} not an ancestor of {}", rec.problem.name, pair.x.0, pair.goal.0));
                        }
                    }
                    Label::Negative => {
                        t.negatives += 1;
                        if inside || pair.x == pair.goal {
                            t.bad.push(format!("{}: negative {} is an ancestor of {}", rec.problem.name, pair.x.0, pair.goal.0));
                        }
                    }
                }
            }
        })),
    };
    let cfg = CampaignConfig {
        wall_clock_secs: 20.0,
        max_level: 2,
        warmup_updates: 5,
        scorer: small_scorer(),
        ..CampaignConfig::default()
    };
    run_campaign(&problems, &cfg, None, &hooks).map_err(|e| e.to_string())?;
    let t = tally.lock().unwrap();
    ensure!(t.bad.is_empty(), "{} unsound labels, first: {}", t.bad.len(), t.bad[0]);
    ensure!(t.positives > 0 && t.negatives > 0, "no labels sampled");
    Ok(format!("{} positives and {} negatives all sound", t.positives, t.negatives))
}

// ---- 8 ---------------------------------------------------------------------

fn hindsight_from_failure() -> Verdict {
    let p = problem("endless", ENDLESS);
    let mut checked = 0;
    for seed in 0..10 {
        let rec = Search::new(p.clone(), SearchLimits::with_time(1.0)).run();
        ensure!(!rec.outcome.is_refuted(), "the conjecture was refuted");
        if rec.counters.generated < 2 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = sample_pairs(&rec, rec.elapsed_secs, &SamplerConfig::default(), &mut rng);
        let pos = pairs.iter().filter(|x| x.label == Label::Positive).count();
        let neg = pairs.len() - pos;
        ensure!(pos >= 1 && neg >= 1, "attempt {seed}: {pos} positives, {neg} negatives");
        ensure!(
            rec.records.iter().filter(|r| r.rule != Rule::Input).count() as u64 == rec.counters.generated,
            "generated counter disagrees with the record"
        );
        checked += 1;
    }
    ensure!(checked > 0, "no attempt generated two clauses");
    Ok(format!("{checked}/10 failed 1s attempts each gave positives and negatives"))
}

// ---- 9 ---------------------------------------------------------------------

fn graph_checks() -> Verdict {
    let mut clauses: Vec<Clause> = Vec::new();
    let mut symbols = None;
    for p in load_problem_dir(&corpus(), None).map_err(|e| e.to_string())? {
        clauses.extend(p.input_clauses().cloned());
        if p.name == "nested_biconditionals" {
            let rec = Search::new(p.clone(), SearchLimits::with_time(0.5)).run();
            clauses.extend(rec.records.iter().map(|r| r.clause.clone()));
            symbols = Some(p.symbols.clone());
        }
    }
    let mut worst: f64 = 0.0;
    for c in &clauses {
        let g = build_graph(c, GraphRole::Scored);
        if g.len() > MAX_NODES {
            continue;
        }
        let e = laplacian_eigen(&g);
        let n = e.values.len();
        let gram = e.vectors.transpose() * &e.vectors;
        worst = worst.max((gram - DMatrix::<f64>::identity(n, n)).abs().max());
        for k in 0..n {
            let v = e.vectors.column(k);
            worst = worst.max((&e.laplacian * v - v * e.values[k]).abs().max());
        }
        let enc = spectral_encoding(&g);
        ensure!(enc.dim() == (g.len(), SPECTRAL_DIM), "spectral shape {:?}", enc.dim());
    }
    ensure!(worst <= 1e-6, "eigen error {worst:e}");
    ensure!(FEATURE_DIM == 138, "feature dimension {FEATURE_DIM}");

    let symbols = symbols.ok_or("corpus lacks nested_biconditionals")?;
    let shift = |c: &Clause| c.map_vars(&mut |v| Term::Var(VarId(v.0 + 5000)));
    for w in clauses.windows(3).step_by(7) {
        let a = assemble_input(&w[0], &w[1], &w[2..], &symbols);
        let b = assemble_input(&shift(&w[0]), &shift(&w[1]), &[shift(&w[2])], &symbols);
        ensure!(a.features.dim().1 == FEATURE_DIM, "assembled features have {} columns", a.features.dim().1);
        let same = |x: &ndarray::Array2<f64>, y: &ndarray::Array2<f64>| {
            x.dim() == y.dim() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
        };
        ensure!(same(&a.features, &b.features) && same(&a.spectral, &b.spectral), "renaming changed an input");
    }

    let mut cx = Clauses::new();
    // Scored 3 nodes, goal 4, conjecture clauses 5 each.
    let x = cx.clause("p(a)");
    let g = cx.clause("q(a, b)");
    let conj: Vec<Clause> = (0..30).map(|_| cx.clause("r(f(a), b)")).collect();
    let input = assemble_input(&x, &g, &conj, &cx.symbols);
    ensure!(input.num_nodes() == MAX_NODES && input.root == 0, "truncated to {} nodes", input.num_nodes());
    let role = |i: usize| (0..3).find(|r| input.features[(i, *r)] == 1.0);
    let roles: Vec<Option<usize>> = (0..MAX_NODES).map(role).collect();
    let want: Vec<Option<usize>> = (0..MAX_NODES).map(|i| Some(if i < 3 { 0 } else if i < 7 { 1 } else { 2 })).collect();
    ensure!(roles == want, "truncation order is not scored, goal, conjecture");
    Ok(format!("{} graphs, eigen error {worst:.1e}; 138 features; renaming bit-exact; truncation order", clauses.len()))
}

// ---- 10 --------------------------------------------------------------------

fn example(cx: &mut Clauses, x: &str, g: &str, conj: &[&str], label: Label) -> EncodedExample {
    let conjecture: Vec<Clause> = conj.iter().map(|c| cx.clause(c)).collect();
    Example {
        x: cx.clause(x),
        g: cx.clause(g),
        conjecture: conjecture.into(),
        symbols: Arc::new(cx.symbols.clone()),
        label,
    }
    .encode()
}

fn fixed_batch(cx: &mut Clauses) -> Vec<EncodedExample> {
    vec![
        example(cx, "p(a)", "$false", &["~p(X)"], Label::Positive),
        example(cx, "q(f(a), b) | r(X)", "$false", &["~p(X)"], Label::Negative),
        example(cx, "~q(X, Y)", "r(a)", &["~p(X)"], Label::Positive),
        example(cx, "r(f(f(a)))", "r(a)", &["~p(X)"], Label::Negative),
    ]
}

fn accuracy(learner: &mut LearnerState, data: &[EncodedExample]) -> f64 {
    let snap = learner.publish_snapshot();
    let right = data
        .iter()
        .filter(|ex| (snap.score(&ex.input).unwrap() > 0.5) == (ex.label == Label::Positive))
        .count();
    right as f64 / data.len() as f64
}

fn scorer_checks() -> Verdict {
    let tiny = ScorerConfig {
        layers: 1,
        heads: 1,
        width: 8,
        ff_width: 16,
        embed: 8,
        dropout: 0.0,
        ..ScorerConfig::default()
    };
    let mut cx = Clauses::new();
    let batch = fixed_batch(&mut cx);
    let mut learner = LearnerState::new(tiny, 7).map_err(|e| e.to_string())?;
    let (_, grad) = learner.loss_and_gradient(&batch, false).map_err(|e| e.to_string())?;
    let base = learner.params().to_vec();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let i = k * base.len() / 100;
        let mut p = base.clone();
        p[i] = base[i] + h;
        learner.set_params(p.clone()).map_err(|e| e.to_string())?;
        let up = learner.loss(&batch).map_err(|e| e.to_string())?;
        p[i] = base[i] - h;
        learner.set_params(p).map_err(|e| e.to_string())?;
        let down = learner.loss(&batch).map_err(|e| e.to_string())?;
        let numeric = (up - down) / (2.0 * h);
        let diff = (grad[i] - numeric).abs();
        let scale = grad[i].abs().max(numeric.abs());
        if diff >= 1e-10 {
            worst = worst.max(diff / scale);
        }
    }
    ensure!(worst <= 1e-4, "gradient relative error {worst:e}");

    let mut learner = LearnerState::new(ScorerConfig::default(), 0).map_err(|e| e.to_string())?;
    let mut steps = 0;
    let confident = |learner: &mut LearnerState| {
        let snap = learner.publish_snapshot();
        batch.iter().all(|ex| {
            let p = snap.score(&ex.input).unwrap();
            if ex.label == Label::Positive { p > 0.95 } else { 1.0 - p > 0.95 }
        })
    };
    while steps < 200 && !confident(&mut learner) {
        learner.train_step_encoded(&batch).map_err(|e| e.to_string())?;
        steps += 1;
    }
    ensure!(confident(&mut learner), "batch not fit after 200 steps");

    // Positive exactly when the scored clause and the goal share their
    // predicate; a relation between two graphs of the input.
    let mut cx = Clauses::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let data: Vec<EncodedExample> = (0..2000)
        .map(|i| {
            let px = rng.gen_range(0..8);
            let pg = if i % 2 == 0 { px } else { (px + rng.gen_range(1..8)) % 8 };
            let x = format!("p{px}(c{})", rng.gen_range(0..4));
            let g = format!("p{pg}(c{})", rng.gen_range(0..4));
            let label = if px == pg { Label::Positive } else { Label::Negative };
            example(&mut cx, &x, &g, &["~s(X)"], label)
        })
        .collect();
    let (train, held_out) = data.split_at(1600);
    let cfg = ScorerConfig::default();
    let mut learner = LearnerState::new(cfg.clone(), 1).map_err(|e| e.to_string())?;
    let mut train_steps = 0;
    let mut train_acc = 0.0;
    while train_steps < 2000 {
        let batch: Vec<EncodedExample> = (0..32).map(|_| train[rng.gen_range(0..train.len())].clone()).collect();
        learner.train_step_encoded(&batch).map_err(|e| e.to_string())?;
        train_steps += 1;
        if train_steps % 100 == 0 {
            train_acc = accuracy(&mut learner, &train[..400]);
            if train_acc >= 0.99 {
                break;
            }
        }
    }
    let held = accuracy(&mut learner, held_out);
    ensure!(held > 0.9, "held-out accuracy {held:.3} after {train_steps} steps (train {train_acc:.3})");
    Ok(format!(
        "gradient rel. error {worst:.1e}; batch fit in {steps} steps; held-out accuracy {held:.3} after {train_steps} steps"
    ))
}

// ---- 11 --------------------------------------------------------------------

fn replay_all(state: &CampaignState, dir: &Path, problems: &[Arc<Problem>]) -> Result<usize, String> {
    for e in &state.proof_log {
        ensure!(e.replayed, "{} proof was not replayed", e.problem);
        let file = e.file.as_ref().ok_or("proof not written")?;
        let text = fs::read_to_string(dir.join(file)).map_err(|err| err.to_string())?;
        let proof = parse_proof(&text).map_err(|err| err.to_string())?;
        ensure!(replay_proof_against(&proof, &problems[e.conjecture]), "{file} does not replay");
    }
    Ok(state.proof_log.len())
}

fn incremental_non_regression() -> Verdict {
    let problems = load_problem_dir(&corpus(), None).map_err(|e| e.to_string())?;
    ensure!(problems.len() >= 18, "corpus has {} problems", problems.len());
    let base_cfg = CampaignConfig {
        wall_clock_secs: 1800.0,
        learning: false,
        ..CampaignConfig::default()
    };
    let her_cfg = CampaignConfig {
        learning: true,
        ..base_cfg.clone()
    };
    let base_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let her_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = run_campaign(&problems, &base_cfg, Some(base_dir.path()), &CampaignHooks::default())
        .map_err(|e| e.to_string())?;
    let her = run_campaign(&problems, &her_cfg, Some(her_dir.path()), &CampaignHooks::default())
        .map_err(|e| e.to_string())?;
    let replayed = replay_all(&base, base_dir.path(), &problems)? + replay_all(&her, her_dir.path(), &problems)?;
    let summary = format!(
        "learning+hindsight {}/{} in {:.0}s ({} guided attempts, {} updates), baseline {}/{} in {:.0}s; {replayed} proofs replay",
        her.solved(),
        problems.len(),
        her.elapsed_secs,
        her.counters.guided_attempts,
        her.counters.learner_updates,
        base.solved(),
        problems.len(),
        base.elapsed_secs
    );
    ensure!(her.solved() >= base.solved(), "{summary}");
    Ok(summary)
}

// ---- 12 --------------------------------------------------------------------

fn deterministic_prove() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names = ["grandparent", "nested_biconditionals", "involution_commutes", "split_universals"];
    for name in names {
        let problem = corpus().join(format!("{name}.p"));
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}.proof"));
            let status = Command::new(env!("CARGO_BIN_EXE_ilprover"))
                .arg("prove")
                .arg(&problem)
                .arg("--deterministic")
                .arg("--time-limit")
                .arg("60")
                .arg("--proof-out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?
                .status;
            ensure!(status.success(), "{name} run {run} exited {:?}", status.code());
            outputs.push(fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure!(outputs[0] == outputs[1], "{name}: proof files differ");
    }
    Ok(format!("{} problems, byte-identical proofs", names.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("worked examples", worked_examples),
        ("tree_size fixtures", tree_sizes),
        ("calculus vs Herbrand oracle", calculus_vs_herbrand),
        ("subsumption vs enumeration", subsumption_vs_enumeration),
        ("heavy-tail distribution", heavy_tail),
        ("scheduler balance", scheduler_balance),
        ("hindsight label soundness", hindsight_label_soundness),
        ("hindsight from failure", hindsight_from_failure),
        ("spectral and feature checks", graph_checks),
        ("scorer gradient and training", scorer_checks),
        ("incremental non-regression", incremental_non_regression),
        ("deterministic proofs", deterministic_prove),
    ];
    let selected: HashSet<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut err = std::io::stderr();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let _ = writeln!(err, "criterion {n:>2} {tag} {name} ({secs:.1}s): {detail}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(err, "{failed} criteria failed");
        ExitCode::FAILURE
    }
}
