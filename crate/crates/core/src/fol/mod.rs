//! Terms, literals, clauses, substitutions and unification.
//!
//! Every value here is immutable once built and can be shared freely across
//! threads. Symbols are interned in a [`SymbolTable`]; variables are plain
//! integers drawn from a per-attempt [`VarGen`].

mod display;
mod subst;
mod symbols;
mod term;

pub use display::ClauseDisplay;
pub use subst::{unify, unify_terms, Substitution};
pub use symbols::{SymbolId, SymbolInfo, SymbolKind, SymbolTable};
pub use term::{Clause, Literal, Term, VarGen, VarId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FolError {
    #[error("symbol `{name}` used with arity {found}, previously {expected}")]
    ArityConflict {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("symbol `{name}` used both as a predicate and as a function")]
    KindConflict { name: String },
}

#[cfg(test)]
mod tests;
