use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::symbols::SymbolId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(VarId),
    /// Function application; constants have no arguments.
    App(SymbolId, Vec<Term>),
}

impl Term {
    pub fn constant(sym: SymbolId) -> Term {
        Term::App(sym, Vec::new())
    }

    /// Number of symbol occurrences (functions, constants and variables).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn occurs(&self, v: VarId) -> bool {
        match self {
            Term::Var(w) => *w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Visits variable occurrences left to right, with repetition.
    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Term::Var(v) => f(*v),
            Term::App(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(VarId) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub pred: SymbolId,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, pred: SymbolId, args: Vec<Term>) -> Self {
        Literal {
            positive,
            pred,
            args,
        }
    }

    pub fn negated(&self) -> Literal {
        Literal {
            positive: !self.positive,
            pred: self.pred,
            args: self.args.clone(),
        }
    }

    /// Same predicate and arguments, opposite sign.
    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.pred == other.pred && self.args == other.args
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        self.args.iter().for_each(|a| a.for_each_var(f));
    }

    pub fn map_vars(&self, f: &mut impl FnMut(VarId) -> Term) -> Literal {
        Literal {
            positive: self.positive,
            pred: self.pred,
            args: self.args.iter().map(|a| a.map_vars(f)).collect(),
        }
    }
}

/// A disjunction of literals, stored as an ordered duplicate-free list.
///
/// Order is insertion order with later syntactic duplicates dropped; it is
/// kept because graph encodings visit literals left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        for lit in literals {
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Clause { literals: out }
    }

    pub fn empty() -> Self {
        Clause::default()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn tree_size(&self) -> usize {
        self.literals.iter().map(Literal::size).sum()
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        self.literals.iter().for_each(|l| l.for_each_var(f));
    }

    /// Distinct variables in first-occurrence order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.for_each_var(&mut |v| {
            if seen.insert(v) {
                out.push(v);
            }
        });
        out
    }

    pub fn max_var(&self) -> Option<VarId> {
        let mut max = None;
        self.for_each_var(&mut |v| {
            if max.is_none_or(|m| v > m) {
                max = Some(v);
            }
        });
        max
    }

    pub fn is_ground(&self) -> bool {
        self.literals.iter().all(|l| l.args.iter().all(Term::is_ground))
    }

    pub fn map_vars(&self, f: &mut impl FnMut(VarId) -> Term) -> Clause {
        Clause::new(self.literals.iter().map(|l| l.map_vars(f)).collect())
    }

    /// Clause without the literal at `index`.
    pub fn without(&self, index: usize) -> Vec<Literal> {
        self.literals
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, l)| l.clone())
            .collect()
    }

    /// Copy of the clause whose variables come fresh from `vars`, keeping the
    /// sharing pattern.
    pub fn rename_fresh(&self, vars: &mut VarGen) -> Clause {
        let mut map: HashMap<VarId, VarId> = HashMap::new();
        self.map_vars(&mut |v| Term::Var(*map.entry(v).or_insert_with(|| vars.fresh())))
    }

    /// Copy with variables renumbered 0, 1, ... by first occurrence.
    pub fn normalized(&self) -> Clause {
        let mut map: HashMap<VarId, VarId> = HashMap::new();
        self.map_vars(&mut |v| {
            let next = VarId(map.len() as u32);
            Term::Var(*map.entry(v).or_insert(next))
        })
    }

    /// True iff the clauses are equal up to a bijective renaming of variables.
    pub fn is_variant(&self, other: &Clause) -> bool {
        if self.len() != other.len() || self.tree_size() != other.tree_size() {
            return false;
        }
        let (ls, rs) = (literal_signatures(self), literal_signatures(other));
        let (mut a, mut b) = (ls.clone(), rs.clone());
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return false;
        }
        // Most constrained literals first; candidates must share the signature.
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| (rs.iter().filter(|&&r| r == ls[i]).count(), i));
        let lhs: Vec<(&Literal, u64)> = order.iter().map(|&i| (&self.literals[i], ls[i])).collect();
        let rhs: Vec<(&Literal, u64)> = other.literals.iter().zip(rs).collect();
        let mut used = vec![false; other.len()];
        let mut fwd = HashMap::new();
        let mut bwd = HashMap::new();
        variant_search(&lhs, &rhs, &mut used, &mut fwd, &mut bwd)
    }

    /// Hash that is equal for variants; collisions are resolved with
    /// [`Clause::is_variant`].
    pub fn variant_key(&self) -> u64 {
        use std::hash::{DefaultHasher, Hash, Hasher};
        let mut keys: Vec<u64> = self
            .literals
            .iter()
            .map(|l| {
                let mut h = DefaultHasher::new();
                l.positive.hash(&mut h);
                l.pred.hash(&mut h);
                l.args.iter().for_each(|a| hash_shape(a, &mut h));
                h.finish()
            })
            .collect();
        keys.sort_unstable();
        let mut h = DefaultHasher::new();
        keys.hash(&mut h);
        h.finish()
    }
}

fn hash_shape<H: std::hash::Hasher>(t: &Term, h: &mut H) {
    use std::hash::Hash;
    match t {
        Term::Var(_) => 0u8.hash(h),
        Term::App(s, args) => {
            1u8.hash(h);
            s.hash(h);
            args.iter().for_each(|a| hash_shape(a, h));
        }
    }
}

/// Per-literal hash invariant under variable renaming: sign, predicate,
/// term shape, and for each variable occurrence its first position within
/// the literal and its number of occurrences in the whole clause.
fn literal_signatures(c: &Clause) -> Vec<u64> {
    use std::hash::{DefaultHasher, Hash, Hasher};
    fn vars_in<'a>(t: &'a Term, out: &mut Vec<&'a VarId>) {
        match t {
            Term::Var(v) => out.push(v),
            Term::App(_, args) => args.iter().for_each(|a| vars_in(a, out)),
        }
    }
    let mut counts: HashMap<VarId, usize> = HashMap::new();
    let per_lit: Vec<Vec<&VarId>> = c
        .literals
        .iter()
        .map(|l| {
            let mut vs = Vec::new();
            l.args.iter().for_each(|a| vars_in(a, &mut vs));
            for v in &vs {
                *counts.entry(**v).or_default() += 1;
            }
            vs
        })
        .collect();
    c.literals
        .iter()
        .zip(&per_lit)
        .map(|(l, vs)| {
            let mut h = DefaultHasher::new();
            l.positive.hash(&mut h);
            l.pred.hash(&mut h);
            l.args.iter().for_each(|a| hash_shape(a, &mut h));
            for v in vs {
                let first = vs.iter().position(|w| w == v).unwrap_or(0);
                (first, counts[v]).hash(&mut h);
            }
            h.finish()
        })
        .collect()
}

fn variant_search(
    lhs: &[(&Literal, u64)],
    rhs: &[(&Literal, u64)],
    used: &mut [bool],
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    let Some((&(first, sig), rest)) = lhs.split_first() else {
        return true;
    };
    for j in 0..rhs.len() {
        let (cand, cand_sig) = rhs[j];
        if used[j] || cand_sig != sig {
            continue;
        }
        let (saved_f, saved_b) = (fwd.clone(), bwd.clone());
        let ok = first
            .args
            .iter()
            .zip(&cand.args)
            .all(|(a, b)| rename_match(a, b, fwd, bwd));
        if ok {
            used[j] = true;
            if variant_search(rest, rhs, used, fwd, bwd) {
                return true;
            }
            used[j] = false;
        }
        *fwd = saved_f;
        *bwd = saved_b;
    }
    false
}

fn rename_match(
    a: &Term,
    b: &Term,
    fwd: &mut HashMap<VarId, VarId>,
    bwd: &mut HashMap<VarId, VarId>,
) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => match (fwd.get(x), bwd.get(y)) {
            (None, None) => {
                fwd.insert(*x, *y);
                bwd.insert(*y, *x);
                true
            }
            (Some(fy), Some(bx)) => fy == y && bx == x,
            _ => false,
        },
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| rename_match(x, y, fwd, bwd))
        }
        _ => false,
    }
}

/// Monotone source of fresh variables for one proof attempt.
#[derive(Clone, Debug, Default)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// Generator whose first variable is `start`.
    pub fn starting_at(start: u32) -> Self {
        VarGen { next: start }
    }

    /// Generator guaranteed not to collide with any variable in `clauses`.
    pub fn above<'a>(clauses: impl IntoIterator<Item = &'a Clause>) -> Self {
        let next = clauses
            .into_iter()
            .filter_map(Clause::max_var)
            .map(|v| v.0 + 1)
            .max()
            .unwrap_or(0);
        VarGen { next }
    }

    pub fn fresh(&mut self) -> VarId {
        let v = VarId(self.next);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}
