//! Generating inferences (binary factoring and binary resolution) and the
//! two redundancy tests used by saturation.

mod subsume;

pub use subsume::{subsumes, subsumes_for_deletion};

use crate::fol::{unify, Clause, Literal, VarGen};

/// All binary factors of `c` with fresh variables, deduplicated up to
/// variants. Only literals of equal polarity are merged.
pub fn factors(c: &Clause, vars: &mut VarGen) -> Vec<Clause> {
    let lits = c.literals();
    let mut out: Vec<Clause> = Vec::new();
    for i in 0..lits.len() {
        for j in (i + 1)..lits.len() {
            if lits[i].positive != lits[j].positive {
                continue;
            }
            let Some(sigma) = unify(&lits[i], &lits[j]) else {
                continue;
            };
            let factor = sigma.apply_literals(&c.without(i)).rename_fresh(vars);
            push_unique(&mut out, factor);
        }
    }
    out
}

/// All binary resolvents of `c1` and `c2` with fresh variables, in both
/// directions, deduplicated up to variants.
///
/// The clauses must not share variables; use [`self_resolvents`] when both
/// parents are the same clause.
pub fn resolvents(c1: &Clause, c2: &Clause, vars: &mut VarGen) -> Vec<Clause> {
    let mut out = Vec::new();
    resolve_directed(c1, c2, vars, &mut out);
    resolve_directed(c2, c1, vars, &mut out);
    out
}

/// Resolvents of a clause with a renamed copy of itself.
pub fn self_resolvents(c: &Clause, vars: &mut VarGen) -> Vec<Clause> {
    let copy = c.rename_fresh(vars);
    resolvents(c, &copy, vars)
}

/// Positive literal from `pos_side`, negative literal from `neg_side`.
fn resolve_directed(pos_side: &Clause, neg_side: &Clause, vars: &mut VarGen, out: &mut Vec<Clause>) {
    for (i, l) in pos_side.literals().iter().enumerate() {
        if !l.positive {
            continue;
        }
        for (j, m) in neg_side.literals().iter().enumerate() {
            if m.positive || m.pred != l.pred {
                continue;
            }
            let Some(sigma) = unify(l, m) else {
                continue;
            };
            let rest: Vec<Literal> = pos_side
                .without(i)
                .into_iter()
                .chain(neg_side.without(j))
                .collect();
            let resolvent = sigma.apply_literals(&rest).rename_fresh(vars);
            push_unique(out, resolvent);
        }
    }
}

fn push_unique(out: &mut Vec<Clause>, c: Clause) {
    if !out.iter().any(|o| o.is_variant(&c)) {
        out.push(c);
    }
}

/// True iff some atom occurs both positively and negatively with identical
/// arguments.
pub fn is_tautology(c: &Clause) -> bool {
    let lits = c.literals();
    lits.iter()
        .enumerate()
        .any(|(i, l)| lits[i + 1..].iter().any(|m| l.is_complement_of(m)))
}
