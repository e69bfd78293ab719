//! Helpers shared by unit tests.

use crate::fol::{Clause, Literal, SymbolTable, VarGen};
use crate::tptp::parse_clause;

/// Symbol table plus variable supply for writing clauses as TPTP text.
pub struct Ctx {
    pub symbols: SymbolTable,
    pub vars: VarGen,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx {
            symbols: SymbolTable::new(),
            vars: VarGen::new(),
        }
    }

    /// Parses a clause; variables get fresh ids on every call.
    pub fn clause(&mut self, text: &str) -> Clause {
        parse_clause(text, &mut self.symbols, &mut self.vars)
            .unwrap_or_else(|e| panic!("bad test clause `{text}`: {e}"))
    }

    pub fn lit(&mut self, text: &str) -> Literal {
        self.clause(text).literals()[0].clone()
    }

    pub fn show(&self, c: &Clause) -> String {
        c.to_tptp(&self.symbols)
    }

    /// True iff `got` is a variant of the clause written as `want`.
    pub fn is_variant_of(&mut self, got: &Clause, want: &str) -> bool {
        let w = self.clause(want);
        got.is_variant(&w)
    }
}
