use std::collections::HashMap;
use std::fmt::{self, Write};

use super::symbols::SymbolTable;
use super::term::{Clause, Literal, Term, VarId};

/// Renders a clause in TPTP cnf syntax, e.g. `~p(X0) | q(a)`.
///
/// Variables are named `X0`, `X1`, ... by first occurrence, so variants print
/// identically. The empty clause prints as `$false`.
pub struct ClauseDisplay<'a> {
    clause: &'a Clause,
    symbols: &'a SymbolTable,
}

impl Clause {
    pub fn display<'a>(&'a self, symbols: &'a SymbolTable) -> ClauseDisplay<'a> {
        ClauseDisplay {
            clause: self,
            symbols,
        }
    }

    pub fn to_tptp(&self, symbols: &SymbolTable) -> String {
        self.display(symbols).to_string()
    }
}

impl fmt::Display for ClauseDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clause.is_empty() {
            return f.write_str("$false");
        }
        let mut names = HashMap::new();
        for (i, lit) in self.clause.literals().iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write_literal(f, lit, self.symbols, &mut names)?;
        }
        Ok(())
    }
}

fn write_literal(
    f: &mut impl Write,
    lit: &Literal,
    symbols: &SymbolTable,
    names: &mut HashMap<VarId, usize>,
) -> fmt::Result {
    if !lit.positive {
        f.write_char('~')?;
    }
    write_name(f, symbols.name(lit.pred))?;
    write_args(f, &lit.args, symbols, names)
}

fn write_args(
    f: &mut impl Write,
    args: &[Term],
    symbols: &SymbolTable,
    names: &mut HashMap<VarId, usize>,
) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write_term(f, a, symbols, names)?;
    }
    f.write_char(')')
}

fn write_term(
    f: &mut impl Write,
    t: &Term,
    symbols: &SymbolTable,
    names: &mut HashMap<VarId, usize>,
) -> fmt::Result {
    match t {
        Term::Var(v) => {
            let next = names.len();
            let n = *names.entry(*v).or_insert(next);
            write!(f, "X{n}")
        }
        Term::App(s, args) => {
            write_name(f, symbols.name(*s))?;
            write_args(f, args, symbols, names)
        }
    }
}

/// Writes a functor name, single-quoting it unless it is a TPTP lower word
/// (or a `$`-prefixed defined word).
pub(crate) fn write_name(f: &mut impl Write, name: &str) -> fmt::Result {
    if is_lower_word(name) || is_defined_word(name) || is_integer(name) {
        return f.write_str(name);
    }
    f.write_char('\'')?;
    for c in name.chars() {
        if c == '\'' || c == '\\' {
            f.write_char('\\')?;
        }
        f.write_char(c)?;
    }
    f.write_char('\'')
}

fn is_lower_word(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_defined_word(name: &str) -> bool {
    name.len() > 1 && name.starts_with('$') && is_lower_word(&name[1..])
}

fn is_integer(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_digit())
}
