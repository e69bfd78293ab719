//! Formula to clause conversion: negation normal form, Skolemization and
//! distribution of disjunction over conjunction.

use std::collections::HashMap;

use crate::fol::{Clause, Literal, SymbolKind, SymbolTable, Term, VarGen, VarId};

use super::parser::{Formula, RawTerm};
use super::TptpError;

/// Formula over interned symbols, with every quantifier binding its own
/// variable ids.
#[derive(Clone, Debug)]
pub(crate) enum Fm {
    Atom(Literal),
    True,
    False,
    Not(Box<Fm>),
    And(Vec<Fm>),
    Or(Vec<Fm>),
    Implies(Box<Fm>, Box<Fm>),
    Iff(Box<Fm>, Box<Fm>),
    Forall(Vec<VarId>, Box<Fm>),
    Exists(Vec<VarId>, Box<Fm>),
}

#[derive(Clone, Debug)]
enum Nnf {
    Lit(Literal),
    True,
    False,
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    Forall(Vec<VarId>, Box<Nnf>),
    Exists(Vec<VarId>, Box<Nnf>),
}

/// Shared state for clausifying the formulas of one problem.
pub struct Clausifier<'a> {
    pub(crate) symbols: &'a mut SymbolTable,
    pub(crate) vars: &'a mut VarGen,
    skolem_counter: &'a mut usize,
}

impl<'a> Clausifier<'a> {
    pub fn new(
        symbols: &'a mut SymbolTable,
        vars: &'a mut VarGen,
        skolem_counter: &'a mut usize,
    ) -> Self {
        Clausifier {
            symbols,
            vars,
            skolem_counter,
        }
    }

    /// Binds a parsed formula; free variables are closed universally.
    pub(crate) fn bind(&mut self, f: &Formula) -> Result<Fm, TptpError> {
        let mut scope: Vec<(String, VarId)> = Vec::new();
        let mut free: Vec<(String, VarId)> = Vec::new();
        let body = self.bind_in(f, &mut scope, &mut free)?;
        if free.is_empty() {
            Ok(body)
        } else {
            Ok(Fm::Forall(
                free.into_iter().map(|(_, v)| v).collect(),
                Box::new(body),
            ))
        }
    }

    fn bind_in(
        &mut self,
        f: &Formula,
        scope: &mut Vec<(String, VarId)>,
        free: &mut Vec<(String, VarId)>,
    ) -> Result<Fm, TptpError> {
        Ok(match f {
            Formula::True => Fm::True,
            Formula::False => Fm::False,
            Formula::Atom(p, args) => {
                let pred = self.symbols.intern(p, SymbolKind::Predicate, args.len())?;
                let args = args
                    .iter()
                    .map(|a| self.bind_term(a, scope, free))
                    .collect::<Result<_, _>>()?;
                Fm::Atom(Literal::new(true, pred, args))
            }
            Formula::Not(g) => Fm::Not(Box::new(self.bind_in(g, scope, free)?)),
            Formula::And(gs) => Fm::And(
                gs.iter()
                    .map(|g| self.bind_in(g, scope, free))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Or(gs) => Fm::Or(
                gs.iter()
                    .map(|g| self.bind_in(g, scope, free))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Implies(a, b) => Fm::Implies(
                Box::new(self.bind_in(a, scope, free)?),
                Box::new(self.bind_in(b, scope, free)?),
            ),
            Formula::Iff(a, b) => Fm::Iff(
                Box::new(self.bind_in(a, scope, free)?),
                Box::new(self.bind_in(b, scope, free)?),
            ),
            Formula::Forall(names, body) | Formula::Exists(names, body) => {
                let ids: Vec<VarId> = names.iter().map(|_| self.vars.fresh()).collect();
                let depth = scope.len();
                scope.extend(names.iter().cloned().zip(ids.iter().copied()));
                let inner = self.bind_in(body, scope, free);
                scope.truncate(depth);
                let inner = Box::new(inner?);
                if matches!(f, Formula::Forall(..)) {
                    Fm::Forall(ids, inner)
                } else {
                    Fm::Exists(ids, inner)
                }
            }
        })
    }

    fn bind_term(
        &mut self,
        t: &RawTerm,
        scope: &[(String, VarId)],
        free: &mut Vec<(String, VarId)>,
    ) -> Result<Term, TptpError> {
        Ok(match t {
            RawTerm::Var(name) => {
                if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == name) {
                    Term::Var(*v)
                } else if let Some((_, v)) = free.iter().find(|(n, _)| n == name) {
                    Term::Var(*v)
                } else {
                    let v = self.vars.fresh();
                    free.push((name.clone(), v));
                    Term::Var(v)
                }
            }
            RawTerm::App(f, args) => {
                let sym = self.symbols.intern(f, SymbolKind::Function, args.len())?;
                let args = args
                    .iter()
                    .map(|a| self.bind_term(a, scope, free))
                    .collect::<Result<_, _>>()?;
                Term::App(sym, args)
            }
        })
    }

    /// Clausifies a parsed formula into clauses with pairwise disjoint,
    /// freshly numbered variables.
    pub fn clausify(&mut self, f: &Formula) -> Result<Vec<Clause>, TptpError> {
        let fm = self.bind(f)?;
        self.clausify_bound(fm)
    }

    pub(crate) fn clausify_bound(&mut self, fm: Fm) -> Result<Vec<Clause>, TptpError> {
        let nnf = self.nnf(&fm, true);
        let mut skolem = HashMap::new();
        let matrix = self.skolemize(nnf, &mut Vec::new(), &mut skolem)?;
        let Some(cnf) = cnf(&matrix)? else {
            return Ok(Vec::new());
        };
        let mut out: Vec<Clause> = Vec::new();
        let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
        for lits in cnf {
            let clause = Clause::new(lits);
            if crate::calculus::is_tautology(&clause) {
                continue;
            }
            let clause = clause.rename_fresh(self.vars);
            let bucket = seen.entry(clause.variant_key()).or_default();
            if !bucket.iter().any(|&i| out[i].is_variant(&clause)) {
                bucket.push(out.len());
                out.push(clause);
            }
        }
        Ok(out)
    }

    fn nnf(&mut self, f: &Fm, positive: bool) -> Nnf {
        match f {
            Fm::Atom(l) => Nnf::Lit(if positive { l.clone() } else { l.negated() }),
            Fm::True => {
                if positive {
                    Nnf::True
                } else {
                    Nnf::False
                }
            }
            Fm::False => {
                if positive {
                    Nnf::False
                } else {
                    Nnf::True
                }
            }
            Fm::Not(g) => self.nnf(g, !positive),
            Fm::And(gs) => {
                let parts = gs.iter().map(|g| self.nnf(g, positive)).collect();
                if positive {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                }
            }
            Fm::Or(gs) => {
                let parts = gs.iter().map(|g| self.nnf(g, positive)).collect();
                if positive {
                    Nnf::Or(parts)
                } else {
                    Nnf::And(parts)
                }
            }
            Fm::Implies(a, b) => {
                let na = self.nnf(a, !positive);
                let nb = self.nnf(b, positive);
                if positive {
                    Nnf::Or(vec![na, nb])
                } else {
                    Nnf::And(vec![na, nb])
                }
            }
            Fm::Iff(a, b) => {
                // Both operands are duplicated; the copies get their own
                // bound variables so they can never end up identified.
                let a2 = self.rename_bound(a);
                let b2 = self.rename_bound(b);
                if positive {
                    Nnf::And(vec![
                        Nnf::Or(vec![self.nnf(a, false), self.nnf(b, true)]),
                        Nnf::Or(vec![self.nnf(&a2, true), self.nnf(&b2, false)]),
                    ])
                } else {
                    Nnf::And(vec![
                        Nnf::Or(vec![self.nnf(a, true), self.nnf(b, true)]),
                        Nnf::Or(vec![self.nnf(&a2, false), self.nnf(&b2, false)]),
                    ])
                }
            }
            Fm::Forall(vs, g) => {
                let body = Box::new(self.nnf(g, positive));
                if positive {
                    Nnf::Forall(vs.clone(), body)
                } else {
                    Nnf::Exists(vs.clone(), body)
                }
            }
            Fm::Exists(vs, g) => {
                let body = Box::new(self.nnf(g, positive));
                if positive {
                    Nnf::Exists(vs.clone(), body)
                } else {
                    Nnf::Forall(vs.clone(), body)
                }
            }
        }
    }

    fn rename_bound(&mut self, f: &Fm) -> Fm {
        fn go(f: &Fm, map: &mut HashMap<VarId, VarId>, vars: &mut VarGen) -> Fm {
            let rename_lit = |l: &Literal, map: &HashMap<VarId, VarId>| {
                l.map_vars(&mut |v| Term::Var(*map.get(&v).unwrap_or(&v)))
            };
            match f {
                Fm::Atom(l) => Fm::Atom(rename_lit(l, map)),
                Fm::True => Fm::True,
                Fm::False => Fm::False,
                Fm::Not(g) => Fm::Not(Box::new(go(g, map, vars))),
                Fm::And(gs) => Fm::And(gs.iter().map(|g| go(g, map, vars)).collect()),
                Fm::Or(gs) => Fm::Or(gs.iter().map(|g| go(g, map, vars)).collect()),
                Fm::Implies(a, b) => {
                    Fm::Implies(Box::new(go(a, map, vars)), Box::new(go(b, map, vars)))
                }
                Fm::Iff(a, b) => Fm::Iff(Box::new(go(a, map, vars)), Box::new(go(b, map, vars))),
                Fm::Forall(vs, g) | Fm::Exists(vs, g) => {
                    let fresh: Vec<VarId> = vs.iter().map(|_| vars.fresh()).collect();
                    for (v, w) in vs.iter().zip(&fresh) {
                        map.insert(*v, *w);
                    }
                    let body = Box::new(go(g, map, vars));
                    if matches!(f, Fm::Forall(..)) {
                        Fm::Forall(fresh, body)
                    } else {
                        Fm::Exists(fresh, body)
                    }
                }
            }
        }
        go(f, &mut HashMap::new(), self.vars)
    }

    fn skolem_symbol(&mut self, arity: usize) -> Result<crate::fol::SymbolId, TptpError> {
        loop {
            let name = format!("sk{}", *self.skolem_counter);
            *self.skolem_counter += 1;
            if !self.symbols.contains(&name) {
                return Ok(self.symbols.intern(&name, SymbolKind::Function, arity)?);
            }
        }
    }

    fn skolemize(
        &mut self,
        f: Nnf,
        universals: &mut Vec<VarId>,
        map: &mut HashMap<VarId, Term>,
    ) -> Result<Nnf, TptpError> {
        Ok(match f {
            Nnf::Lit(l) => Nnf::Lit(l.map_vars(&mut |v| map.get(&v).cloned().unwrap_or(Term::Var(v)))),
            Nnf::True => Nnf::True,
            Nnf::False => Nnf::False,
            Nnf::And(gs) => Nnf::And(
                gs.into_iter()
                    .map(|g| self.skolemize(g, universals, map))
                    .collect::<Result<_, _>>()?,
            ),
            Nnf::Or(gs) => Nnf::Or(
                gs.into_iter()
                    .map(|g| self.skolemize(g, universals, map))
                    .collect::<Result<_, _>>()?,
            ),
            Nnf::Forall(vs, g) => {
                let depth = universals.len();
                universals.extend(vs);
                let body = self.skolemize(*g, universals, map);
                universals.truncate(depth);
                body?
            }
            Nnf::Exists(vs, g) => {
                for v in vs {
                    let sym = self.skolem_symbol(universals.len())?;
                    let args = universals.iter().map(|u| Term::Var(*u)).collect();
                    map.insert(v, Term::App(sym, args));
                }
                self.skolemize(*g, universals, map)?
            }
        })
    }
}

/// Largest clause list distributive conversion may produce for one formula.
pub const MAX_FORMULA_CLAUSES: usize = 50_000;

fn too_many() -> TptpError {
    TptpError::Unsupported {
        what: format!("formula whose clausal form exceeds {MAX_FORMULA_CLAUSES} clauses"),
    }
}

/// Quantifier-free NNF to clause list; `None` when the formula is valid.
fn cnf(f: &Nnf) -> Result<Option<Vec<Vec<Literal>>>, TptpError> {
    Ok(match f {
        Nnf::Lit(l) => Some(vec![vec![l.clone()]]),
        Nnf::True => None,
        Nnf::False => Some(vec![Vec::new()]),
        Nnf::And(gs) => {
            let mut out = Vec::new();
            for g in gs {
                if let Some(cs) = cnf(g)? {
                    out.extend(cs);
                }
                if out.len() > MAX_FORMULA_CLAUSES {
                    return Err(too_many());
                }
            }
            Some(out)
        }
        Nnf::Or(gs) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            for g in gs {
                let Some(part) = cnf(g)? else {
                    return Ok(None);
                };
                if acc.len().saturating_mul(part.len()) > MAX_FORMULA_CLAUSES {
                    return Err(too_many());
                }
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        c.extend(p.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            Some(acc)
        }
        Nnf::Forall(_, g) | Nnf::Exists(_, g) => cnf(g)?,
    })
}
