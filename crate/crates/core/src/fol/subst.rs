use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::term::{Clause, Literal, Term, VarId};

/// Variable-to-term map kept in solved form: no image mentions a variable of
/// the domain, so one application pass is final.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    map: BTreeMap<VarId, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a substitution from pairs, dropping identity bindings and
    /// resolving chains between the given bindings.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Term)>) -> Self {
        let raw: BTreeMap<VarId, Term> = pairs.into_iter().collect();
        Self::solve(raw)
    }

    /// Turns a triangular binding map into solved form.
    ///
    /// Callers must guarantee the bindings are acyclic (unification does so
    /// through the occurs check).
    pub(crate) fn solve(raw: BTreeMap<VarId, Term>) -> Self {
        fn resolve(t: &Term, raw: &BTreeMap<VarId, Term>) -> Term {
            match t {
                Term::Var(v) => match raw.get(v) {
                    Some(Term::Var(w)) if w == v => t.clone(),
                    Some(img) => resolve(img, raw),
                    None => t.clone(),
                },
                Term::App(s, args) => Term::App(*s, args.iter().map(|a| resolve(a, raw)).collect()),
            }
        }
        let map = raw
            .keys()
            .filter_map(|v| {
                let img = resolve(&Term::Var(*v), &raw);
                (img != Term::Var(*v)).then_some((*v, img))
            })
            .collect();
        Substitution { map }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn get(&self, v: VarId) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Term)> {
        self.map.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_vars(&mut |v| self.map.get(&v).cloned().unwrap_or(Term::Var(v)))
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal {
            positive: l.positive,
            pred: l.pred,
            args: l.args.iter().map(|a| self.apply_term(a)).collect(),
        }
    }

    /// Applies to every literal and re-deduplicates.
    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause::new(c.literals().iter().map(|l| self.apply_literal(l)).collect())
    }

    pub fn apply_literals<'a>(&self, lits: impl IntoIterator<Item = &'a Literal>) -> Clause {
        Clause::new(lits.into_iter().map(|l| self.apply_literal(l)).collect())
    }
}

/// Most general unifier of two literals' atoms; polarity is ignored.
pub fn unify(l1: &Literal, l2: &Literal) -> Option<Substitution> {
    if l1.pred != l2.pred || l1.args.len() != l2.args.len() {
        return None;
    }
    let mut bindings = BTreeMap::new();
    let mut stack: Vec<(Term, Term)> = l1
        .args
        .iter()
        .cloned()
        .zip(l2.args.iter().cloned())
        .collect();
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &bindings);
        let b = walk(&b, &bindings);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if occurs(x, &t, &bindings) {
                    return None;
                }
                bindings.insert(x, t);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                stack.extend(xs.into_iter().zip(ys));
            }
        }
    }
    Some(Substitution::solve(bindings))
}

pub fn unify_terms(t1: &Term, t2: &Term) -> Option<Substitution> {
    use super::symbols::SymbolId;
    // Wrap in a throwaway unary atom so both entry points share one engine.
    let wrap = |t: &Term| Literal::new(true, SymbolId(u32::MAX), vec![t.clone()]);
    unify(&wrap(t1), &wrap(t2))
}

fn walk(t: &Term, bindings: &BTreeMap<VarId, Term>) -> Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match bindings.get(v) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur.clone()
}

fn occurs(v: VarId, t: &Term, bindings: &BTreeMap<VarId, Term>) -> bool {
    match t {
        Term::Var(w) => {
            if *w == v {
                return true;
            }
            match bindings.get(w) {
                Some(next) => occurs(v, next, bindings),
                None => false,
            }
        }
        Term::App(_, args) => args.iter().any(|a| occurs(v, a, bindings)),
    }
}
