use std::collections::HashMap;

use proptest::prelude::*;

use super::*;
use crate::testutil::Ctx;

#[test]
fn apply_replaces_domain_variables_only() {
    let mut cx = Ctx::new();
    let c = cx.clause("parent(X, Y)");
    let [x, y] = [c.vars()[0], c.vars()[1]];
    let z = cx.vars.fresh();
    let alice = Term::constant(cx.symbols.intern("alice", SymbolKind::Function, 0).unwrap());
    let sigma = Substitution::from_pairs([(x, alice), (y, Term::Var(z))]);
    let out = sigma.apply_clause(&c);
    let lit = &out.literals()[0];
    assert_eq!(cx.show(&out), "parent(alice,X0)");
    assert_eq!(lit.args[1], Term::Var(z));

    assert_eq!(Substitution::new().apply_clause(&c), c);

    let q = cx.clause("q(Y)");
    let b = cx.symbols.intern("b", SymbolKind::Function, 0).unwrap();
    let other = Substitution::from_pairs([(x, Term::constant(b))]);
    assert_eq!(other.apply_clause(&q), q);
}

#[test]
fn apply_deduplicates_literals() {
    let mut cx = Ctx::new();
    let c = cx.clause("p(X) | p(Y)");
    let vs = c.vars();
    let sigma = Substitution::from_pairs([(vs[0], Term::Var(vs[1]))]);
    assert_eq!(sigma.apply_clause(&c).len(), 1);
}

#[test]
fn unify_worked_example() {
    let mut cx = Ctx::new();
    let l1 = cx.lit("parent(X, Y)");
    let l2 = cx.lit("parent(alice, Z)");
    let sigma = unify(&l1, &l2).expect("unifiable");
    assert_eq!(sigma.len(), 2);
    assert_eq!(sigma.apply_literal(&l1), sigma.apply_literal(&l2));
    let (x, y) = (l1.args[0].clone(), l1.args[1].clone());
    let Term::Var(xv) = x else { panic!() };
    let Term::Var(yv) = y else { panic!() };
    assert_eq!(sigma.get(xv), Some(&l2.args[0]));
    assert_eq!(sigma.get(yv), Some(&l2.args[1]));
}

#[test]
fn unify_identical_and_occurs_check() {
    let mut cx = Ctx::new();
    let c = cx.clause("p(X) | p(f(X))");
    let (px, pfx) = (&c.literals()[0], &c.literals()[1]);
    assert_eq!(unify(px, px), Some(Substitution::new()));
    assert_eq!(unify(px, pfx), None);
}

#[test]
fn unify_rejects_symbol_clash() {
    let mut cx = Ctx::new();
    let a = cx.lit("p(a)");
    let b = cx.lit("p(b)");
    let q = cx.lit("q(a)");
    assert!(unify(&a, &b).is_none());
    assert!(unify(&a, &q).is_none());
}

#[test]
fn unifier_is_in_solved_form() {
    let mut cx = Ctx::new();
    let l1 = cx.lit("p(X, Y, Z)");
    let l2 = cx.lit("p(Y2, f(Z2), a)");
    // Chain X->Y2, Y->f(Z2); nothing in an image is in the domain.
    let sigma = unify(&l1, &l2).unwrap();
    for (_, img) in sigma.iter() {
        let mut bad = false;
        img.for_each_var(&mut |v| bad |= sigma.get(v).is_some());
        assert!(!bad);
    }
    let once = sigma.apply_literal(&l1);
    assert_eq!(sigma.apply_literal(&once), once);
}

#[test]
fn tree_size_fixtures() {
    let mut cx = Ctx::new();
    assert_eq!(cx.clause("p(X, a, X, b) | q(a)").tree_size(), 7);
    assert_eq!(cx.clause("parent(X, bob)").tree_size(), 3);
    assert_eq!(Clause::empty().tree_size(), 0);
}

#[test]
fn rename_fresh_preserves_sharing() {
    let mut cx = Ctx::new();
    let c = cx.clause("p(X) | q(X)");
    let r1 = c.rename_fresh(&mut cx.vars);
    let r2 = c.rename_fresh(&mut cx.vars);
    assert!(r1.is_variant(&c));
    assert_eq!(r1.vars().len(), 1);
    assert!(r1.vars().iter().all(|v| !c.vars().contains(v)));
    assert!(r1.vars().iter().all(|v| !r2.vars().contains(v)));
    let g = cx.clause("p(a)");
    assert_eq!(g.rename_fresh(&mut cx.vars), g);
}

#[test]
fn variant_examples() {
    let mut cx = Ctx::new();
    let pxy = cx.clause("p(X, Y)");
    let pab = cx.clause("p(A, B)");
    let pxx = cx.clause("p(X, X)");
    let pa = cx.clause("r(a)");
    assert!(pxy.is_variant(&pab));
    assert!(!pxx.is_variant(&pab));
    assert!(!pab.is_variant(&pxx));
    assert!(pa.is_variant(&pa.clone()));
    let c1 = cx.clause("r(X) | q(X, Y)");
    let c2 = cx.clause("q(B, A) | r(B)");
    assert!(c1.is_variant(&c2));
    assert_eq!(c1.variant_key(), c2.variant_key());
}

#[test]
fn display_is_tptp() {
    let mut cx = Ctx::new();
    let c = cx.clause("~p(X, 'Big one') | q(f(X, Y))");
    assert_eq!(cx.show(&c), "~p(X0,'Big one') | q(f(X0,X1))");
    assert_eq!(cx.show(&Clause::empty()), "$false");
}

// ---- property tests ------------------------------------------------------

/// Fixed signature: p/2, q/1 predicates; a, b constants; f/1, g/2 functions.
fn signature() -> SymbolTable {
    let mut t = SymbolTable::new();
    t.intern("p", SymbolKind::Predicate, 2).unwrap();
    t.intern("q", SymbolKind::Predicate, 1).unwrap();
    t.intern("a", SymbolKind::Function, 0).unwrap();
    t.intern("b", SymbolKind::Function, 0).unwrap();
    t.intern("f", SymbolKind::Function, 1).unwrap();
    t.intern("g", SymbolKind::Function, 2).unwrap();
    t
}

const P: SymbolId = SymbolId(0);
const Q: SymbolId = SymbolId(1);
const A: SymbolId = SymbolId(2);
const B: SymbolId = SymbolId(3);
const F: SymbolId = SymbolId(4);
const G: SymbolId = SymbolId(5);

fn term_strategy(max_var: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0..max_var).prop_map(|v| Term::Var(VarId(v))),
        Just(Term::constant(A)),
        Just(Term::constant(B)),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::App(F, vec![t])),
            (inner.clone(), inner).prop_map(|(s, t)| Term::App(G, vec![s, t])),
        ]
    })
}

fn literal_strategy(max_var: u32) -> impl Strategy<Value = Literal> {
    prop_oneof![
        (any::<bool>(), term_strategy(max_var), term_strategy(max_var))
            .prop_map(|(s, x, y)| Literal::new(s, P, vec![x, y])),
        (any::<bool>(), term_strategy(max_var)).prop_map(|(s, x)| Literal::new(s, Q, vec![x])),
    ]
}

fn clause_strategy(max_var: u32) -> impl Strategy<Value = Clause> {
    prop::collection::vec(literal_strategy(max_var), 0..4).prop_map(Clause::new)
}

trait Shift {
    fn map_vars_clause(&self, by: u32) -> Clause;
}

impl Shift for Clause {
    fn map_vars_clause(&self, by: u32) -> Clause {
        Clause::new(self.literals().iter().map(|l| l.map_vars(&mut |v| Term::Var(VarId(v.0 + by)))).collect())
    }
}

/// Tries every bijection between the variable sets.
fn variant_oracle(a: &Clause, b: &Clause) -> bool {
    let (va, vb) = (a.vars(), b.vars());
    if va.len() != vb.len() || a.len() != b.len() {
        return false;
    }
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }
    perms(va.len()).into_iter().any(|p| {
        let map: HashMap<VarId, Term> = va.iter().zip(&p).map(|(v, &i)| (*v, Term::Var(vb[i]))).collect();
        let renamed: Vec<Literal> = a.literals().iter().map(|l| simultaneous(&map, l)).collect();
        renamed.iter().all(|l| b.literals().contains(l)) && b.literals().iter().all(|l| renamed.contains(l))
    })
}

#[test]
fn long_same_shape_clauses_compare_quickly() {
    let mut cx = Ctx::new();
    // Twenty single-variable literals; the two clauses differ in one
    // variable link only.
    let lits: Vec<String> = (0..20).map(|i| format!("p(X{i}, Y{})", i / 2)).collect();
    let mut other = lits.clone();
    other[19] = "p(X19, Y0)".into();
    let a = cx.clause(&lits.join(" | "));
    let b = cx.clause(&other.join(" | "));
    let start = std::time::Instant::now();
    assert!(!a.is_variant(&b));
    let c = a.rename_fresh(&mut cx.vars);
    assert!(a.is_variant(&c));
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    if !out.contains(t) {
        out.push(t.clone());
    }
    if let Term::App(_, args) = t {
        args.iter().for_each(|a| subterms(a, out));
    }
}

fn simultaneous(map: &HashMap<VarId, Term>, l: &Literal) -> Literal {
    l.map_vars(&mut |v| map.get(&v).cloned().unwrap_or(Term::Var(v)))
}

fn matches_onto(pattern: &Term, target: &Term, binds: &mut HashMap<VarId, Term>) -> bool {
    match pattern {
        Term::Var(v) => match binds.get(v) {
            Some(b) => b == target,
            None => {
                binds.insert(*v, target.clone());
                true
            }
        },
        Term::App(f, ps) => match target {
            Term::App(g, ts) if f == g && ps.len() == ts.len() => {
                ps.iter().zip(ts).all(|(p, t)| matches_onto(p, t, binds))
            }
            _ => false,
        },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn unifier_equalizes(l1 in literal_strategy(3), l2 in literal_strategy(3)) {
        if let Some(sigma) = unify(&l1, &l2) {
            prop_assert_eq!(sigma.apply_literal(&l1).args, sigma.apply_literal(&l2).args);
        }
    }

    /// Every unifier found by enumerating maps into subterms factors through
    /// the computed MGU, and unify finds one whenever enumeration does.
    #[test]
    fn mgu_is_most_general(l1 in literal_strategy(3), l2 in literal_strategy(3)) {
        let mut l2 = l2;
        l2.pred = l1.pred;
        l2.args.truncate(l1.args.len());
        while l2.args.len() < l1.args.len() {
            l2.args.push(Term::constant(A));
        }
        let mut vars: Vec<VarId> = Vec::new();
        l1.for_each_var(&mut |v| if !vars.contains(&v) { vars.push(v) });
        l2.for_each_var(&mut |v| if !vars.contains(&v) { vars.push(v) });
        let mut cands = Vec::new();
        l1.args.iter().chain(&l2.args).for_each(|t| subterms(t, &mut cands));
        cands.retain(|t| t.size() <= 7);

        let mgu = unify(&l1, &l2);
        let mut idx = vec![0usize; vars.len()];
        let mut found_any = false;
        'outer: loop {
            let tau: HashMap<VarId, Term> =
                vars.iter().zip(&idx).map(|(v, &i)| (*v, cands[i].clone())).collect();
            let t1 = simultaneous(&tau, &l1);
            if t1.args == simultaneous(&tau, &l2).args {
                found_any = true;
                let sigma = mgu.as_ref().expect("oracle found a unifier, unify did not");
                let s1 = sigma.apply_literal(&l1);
                let mut lambda = HashMap::new();
                let ok = s1.args.iter().zip(&t1.args).all(|(p, t)| matches_onto(p, t, &mut lambda));
                prop_assert!(ok, "unifier does not factor through the mgu");
            }
            for k in 0..idx.len() {
                idx[k] += 1;
                if idx[k] < cands.len() { continue 'outer; }
                idx[k] = 0;
            }
            break;
        }
        if mgu.is_some() && vars.is_empty() {
            prop_assert!(found_any);
        }
    }

    #[test]
    fn variant_agrees_with_bijection_enumeration(c1 in clause_strategy(3), c2 in clause_strategy(3), shift in 0u32..2) {
        let c2 = c2.map_vars_clause(shift);
        prop_assert_eq!(c1.is_variant(&c2), variant_oracle(&c1, &c2));
    }

    #[test]
    fn variant_is_an_equivalence(c1 in clause_strategy(3), c2 in clause_strategy(3), c3 in clause_strategy(3)) {
        let mut vars = VarGen::starting_at(100);
        let r = c1.rename_fresh(&mut vars);
        prop_assert!(c1.is_variant(&c1));
        prop_assert!(c1.is_variant(&r) && r.is_variant(&c1));
        prop_assert_eq!(c1.variant_key(), r.variant_key());
        prop_assert_eq!(c1.is_variant(&c2), c2.is_variant(&c1));
        if c1.is_variant(&c2) && c2.is_variant(&c3) {
            prop_assert!(c1.is_variant(&c3));
        }
    }

    #[test]
    fn tree_size_under_substitution(c in clause_strategy(3), target in 0u32..3, compound in any::<bool>()) {
        let v = VarId(target);
        let mut occurrences = 0;
        c.for_each_var(&mut |w| occurrences += (w == v) as usize);
        let img = if compound { Term::App(F, vec![Term::constant(A)]) } else { Term::constant(B) };
        let sigma = Substitution::from_pairs([(v, img)]);
        let out = sigma.apply_clause(&c);
        // Deduplication may shrink the clause, so compare literal by literal.
        let before: usize = c.literals().iter().map(Literal::size).sum();
        let after: usize = c.literals().iter().map(|l| sigma.apply_literal(l).size()).sum();
        if compound {
            prop_assert_eq!(after, before + occurrences);
        } else {
            prop_assert_eq!(after, before);
        }
        prop_assert!(out.tree_size() <= after);
    }
}

#[test]
fn signature_fixture_ids() {
    let t = signature();
    assert_eq!(t.lookup("p"), Some(P));
    assert_eq!(t.lookup("q"), Some(Q));
    assert_eq!(t.lookup("g"), Some(G));
}
