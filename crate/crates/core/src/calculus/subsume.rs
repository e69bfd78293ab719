use crate::fol::{Clause, Literal, Term, VarId};

/// True iff some substitution maps every literal of `general` onto a literal
/// of `specific` (set inclusion; several literals may map to the same one).
///
/// Variables of `specific` are treated as constants, so the two clauses may
/// share variable names.
pub fn subsumes(general: &Clause, specific: &Clause) -> bool {
    let gl = general.literals();
    let sl = specific.literals();
    // Every (sign, predicate) of the general clause must occur in the specific one.
    if !gl
        .iter()
        .all(|l| sl.iter().any(|m| m.positive == l.positive && m.pred == l.pred))
    {
        return false;
    }
    let mut order: Vec<&Literal> = gl.iter().collect();
    // Most constrained first: fewest candidates, then largest.
    order.sort_by_key(|l| {
        let candidates = sl
            .iter()
            .filter(|m| m.positive == l.positive && m.pred == l.pred)
            .count();
        (candidates, std::cmp::Reverse(l.size()))
    });
    let mut binds = Vec::new();
    search(&order, sl, &mut binds)
}

/// Subsumption test used to delete clauses during search: additionally
/// requires `general` to have no more literals than `specific`.
///
/// Without the length condition a clause such as `p(X) | p(Y)` would delete
/// its own factor `p(Z)`, losing refutational completeness.
pub fn subsumes_for_deletion(general: &Clause, specific: &Clause) -> bool {
    general.len() <= specific.len() && subsumes(general, specific)
}

fn search(pending: &[&Literal], targets: &[Literal], binds: &mut Vec<(VarId, Term)>) -> bool {
    let Some((first, rest)) = pending.split_first() else {
        return true;
    };
    for t in targets {
        if t.positive != first.positive || t.pred != first.pred {
            continue;
        }
        let mark = binds.len();
        if first
            .args
            .iter()
            .zip(&t.args)
            .all(|(p, s)| match_term(p, s, binds))
            && search(rest, targets, binds)
        {
            return true;
        }
        binds.truncate(mark);
    }
    false
}

/// One-way matching: binds variables of `pattern` only.
fn match_term(pattern: &Term, target: &Term, binds: &mut Vec<(VarId, Term)>) -> bool {
    match pattern {
        Term::Var(v) => {
            if let Some((_, bound)) = binds.iter().find(|(w, _)| w == v) {
                bound == target
            } else {
                binds.push((*v, target.clone()));
                true
            }
        }
        Term::App(f, ps) => match target {
            Term::App(g, ts) if f == g && ps.len() == ts.len() => {
                ps.iter().zip(ts).all(|(p, t)| match_term(p, t, binds))
            }
            _ => false,
        },
    }
}
