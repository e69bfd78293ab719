//! TPTP problem frontend for equality-free `cnf` and `fof` input.
//!
//! [`parse_problem`] resolves include directives through a caller supplied
//! resolver, negates conjectures, clausifies `fof` formulas and assembles the
//! input clause set of a [`Problem`].

mod clausify;
mod lexer;
mod parser;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fol::{Clause, FolError, Literal, SymbolKind, SymbolTable, Term, VarGen, VarId};

pub use clausify::Clausifier;
pub use lexer::Pos;
pub use parser::{parse_disjunction, parse_statements, Formula, RawTerm, Statement};

/// Environment variable naming the TPTP root used for include resolution.
pub const TPTP_ROOT_ENV: &str = "TPTP";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TptpError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("cannot resolve include `{path}`: {message}")]
    Include { path: String, message: String },
    #[error("equality at {line}:{col}: only problems without the equality predicate are supported")]
    Equality { line: usize, col: usize },
    #[error("formula `{name}` has unsupported role `{role}`")]
    UnsupportedRole { name: String, role: String },
    #[error("unsupported input: {what}")]
    Unsupported { what: String },
    #[error(transparent)]
    Symbol(#[from] FolError),
    #[error("problem has no clauses")]
    Empty,
}

impl TptpError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        TptpError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Axiom,
    Conjecture,
    NegatedConjecture,
}

impl Role {
    fn parse(name: &str, role: &str) -> Result<Role, TptpError> {
        match role {
            "axiom" | "hypothesis" | "lemma" => Ok(Role::Axiom),
            "conjecture" => Ok(Role::Conjecture),
            "negated_conjecture" => Ok(Role::NegatedConjecture),
            _ => Err(TptpError::UnsupportedRole {
                name: name.to_string(),
                role: role.to_string(),
            }),
        }
    }
}

/// Where an input clause came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseOrigin {
    pub file: String,
    pub formula: String,
    pub role: Role,
}

/// Input clauses of one proof problem.
///
/// Variables are disjoint across all clauses, and no clause mentions
/// equality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub symbols: Arc<SymbolTable>,
    pub axioms: Vec<Clause>,
    pub negated_conjecture: Vec<Clause>,
    /// Origins of `axioms` followed by those of `negated_conjecture`.
    pub origins: Vec<ClauseOrigin>,
}

impl Problem {
    /// Builds a problem from already constructed clauses, renaming variables
    /// apart.
    pub fn from_clauses(
        name: impl Into<String>,
        symbols: SymbolTable,
        axioms: Vec<Clause>,
        negated_conjecture: Vec<Clause>,
    ) -> Problem {
        let mut vars = VarGen::new();
        let axioms: Vec<Clause> = axioms.iter().map(|c| c.rename_fresh(&mut vars)).collect();
        let negated_conjecture: Vec<Clause> = negated_conjecture
            .iter()
            .map(|c| c.rename_fresh(&mut vars))
            .collect();
        let name = name.into();
        let origins = axioms
            .iter()
            .enumerate()
            .map(|(i, _)| (i, Role::Axiom))
            .chain(
                negated_conjecture
                    .iter()
                    .enumerate()
                    .map(|(i, _)| (i, Role::NegatedConjecture)),
            )
            .map(|(i, role)| ClauseOrigin {
                file: name.clone(),
                formula: format!("c{i}"),
                role,
            })
            .collect();
        Problem {
            name,
            symbols: Arc::new(symbols),
            axioms,
            negated_conjecture,
            origins,
        }
    }

    /// Axioms followed by negated conjecture clauses.
    pub fn input_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.axioms.iter().chain(&self.negated_conjecture)
    }

    pub fn num_input_clauses(&self) -> usize {
        self.axioms.len() + self.negated_conjecture.len()
    }

    pub fn has_conjecture(&self) -> bool {
        !self.negated_conjecture.is_empty()
    }
}

/// Supplies the text of included files.
pub trait IncludeResolver {
    fn resolve(&mut self, path: &str) -> Result<String, String>;
}

impl<F: FnMut(&str) -> Result<String, String>> IncludeResolver for F {
    fn resolve(&mut self, path: &str) -> Result<String, String> {
        self(path)
    }
}

/// Resolves includes against the including file's directory first, then
/// the TPTP root.
#[derive(Clone, Debug)]
pub struct FsResolver {
    pub base_dir: Option<PathBuf>,
    pub tptp_root: Option<PathBuf>,
}

impl FsResolver {
    /// Root taken from `root` or else the `TPTP` environment variable.
    pub fn new(base_dir: Option<PathBuf>, root: Option<PathBuf>) -> Self {
        let tptp_root = root.or_else(|| std::env::var_os(TPTP_ROOT_ENV).map(PathBuf::from));
        FsResolver {
            base_dir,
            tptp_root,
        }
    }
}

impl IncludeResolver for FsResolver {
    fn resolve(&mut self, path: &str) -> Result<String, String> {
        let candidates = [&self.base_dir, &self.tptp_root];
        let mut tried = Vec::new();
        for dir in candidates.into_iter().flatten() {
            let full = dir.join(path);
            if full.is_file() {
                return std::fs::read_to_string(&full).map_err(|e| e.to_string());
            }
            tried.push(full.display().to_string());
        }
        if Path::new(path).is_absolute() && Path::new(path).is_file() {
            return std::fs::read_to_string(path).map_err(|e| e.to_string());
        }
        Err(if tried.is_empty() {
            "no include directory configured (set TPTP or pass a root)".to_string()
        } else {
            format!("not found in {}", tried.join(", "))
        })
    }
}

/// Resolver that rejects every include.
pub fn no_includes(path: &str) -> Result<String, String> {
    Err(format!("includes are disabled (`{path}`)"))
}

struct Builder<'r> {
    resolver: &'r mut dyn IncludeResolver,
    symbols: SymbolTable,
    vars: VarGen,
    skolems: usize,
    axioms: Vec<(Clause, ClauseOrigin)>,
    negated: Vec<(Clause, ClauseOrigin)>,
    conjectures: Vec<(Formula, ClauseOrigin)>,
    depth: usize,
}

/// Parses a TPTP problem into its input clauses.
pub fn parse_problem(
    name: &str,
    text: &str,
    resolver: &mut dyn IncludeResolver,
) -> Result<Problem, TptpError> {
    let mut b = Builder {
        resolver,
        symbols: SymbolTable::new(),
        vars: VarGen::new(),
        skolems: 0,
        axioms: Vec::new(),
        negated: Vec::new(),
        conjectures: Vec::new(),
        depth: 0,
    };
    b.load(name, text, None)?;

    if !b.conjectures.is_empty() {
        // Several conjectures are proved together: refute the negation of
        // their conjunction.
        let origin = b.conjectures[0].1.clone();
        let conj = if b.conjectures.len() == 1 {
            b.conjectures.pop().unwrap().0
        } else {
            Formula::And(b.conjectures.drain(..).map(|(f, _)| f).collect())
        };
        let negated = Formula::Not(Box::new(conj));
        let mut cl = Clausifier::new(&mut b.symbols, &mut b.vars, &mut b.skolems);
        for c in cl.clausify(&negated)? {
            b.negated.push((
                c,
                ClauseOrigin {
                    role: Role::Conjecture,
                    ..origin.clone()
                },
            ));
        }
    }
    if b.axioms.is_empty() && b.negated.is_empty() {
        return Err(TptpError::Empty);
    }
    let (axioms, mut origins): (Vec<_>, Vec<_>) = b.axioms.into_iter().unzip();
    let (negated_conjecture, neg_origins): (Vec<_>, Vec<_>) = b.negated.into_iter().unzip();
    origins.extend(neg_origins);
    Ok(Problem {
        name: name.to_string(),
        symbols: Arc::new(b.symbols),
        axioms,
        negated_conjecture,
        origins,
    })
}

/// Reads a problem file, resolving includes with [`FsResolver`].
pub fn load_problem_file(path: &Path, tptp_root: Option<PathBuf>) -> Result<Problem, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".to_string());
    let mut resolver = FsResolver::new(path.parent().map(Path::to_path_buf), tptp_root);
    Ok(parse_problem(&name, &text, &mut resolver)?)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] TptpError),
}

impl Builder<'_> {
    fn load(
        &mut self,
        file: &str,
        text: &str,
        selection: Option<&[String]>,
    ) -> Result<(), TptpError> {
        for stmt in parse_statements(text)? {
            match stmt {
                Statement::Include {
                    path,
                    selection: inner,
                    ..
                } => {
                    if self.depth > 32 {
                        return Err(TptpError::Include {
                            path,
                            message: "include nesting too deep".into(),
                        });
                    }
                    let included = self
                        .resolver
                        .resolve(&path)
                        .map_err(|message| TptpError::Include {
                            path: path.clone(),
                            message,
                        })?;
                    self.depth += 1;
                    let res = self.load(&path, &included, inner.as_deref());
                    self.depth -= 1;
                    res?;
                }
                Statement::Cnf {
                    name, role, body, ..
                } => {
                    if !selected(selection, &name) {
                        continue;
                    }
                    let role_kind = Role::parse(&name, &role)?;
                    let origin = ClauseOrigin {
                        file: file.to_string(),
                        formula: name.clone(),
                        role: role_kind,
                    };
                    match role_kind {
                        Role::Conjecture => {
                            // A conjecture clause is the universal closure of
                            // its disjunction; negation goes through clausify.
                            self.conjectures.push((universal_closure(Formula::Or(body)), origin));
                        }
                        _ => {
                            if let Some(clause) = self.cnf_clause(&body)? {
                                if role_kind == Role::Axiom {
                                    self.axioms.push((clause, origin));
                                } else {
                                    self.negated.push((clause, origin));
                                }
                            }
                        }
                    }
                }
                Statement::Fof {
                    name,
                    role,
                    formula,
                    ..
                } => {
                    if !selected(selection, &name) {
                        continue;
                    }
                    let role_kind = Role::parse(&name, &role)?;
                    let origin = ClauseOrigin {
                        file: file.to_string(),
                        formula: name.clone(),
                        role: role_kind,
                    };
                    if role_kind == Role::Conjecture {
                        self.conjectures.push((universal_closure(formula), origin));
                        continue;
                    }
                    let mut cl = Clausifier::new(&mut self.symbols, &mut self.vars, &mut self.skolems);
                    let clauses = cl.clausify(&formula)?;
                    let target = if role_kind == Role::Axiom {
                        &mut self.axioms
                    } else {
                        &mut self.negated
                    };
                    target.extend(clauses.into_iter().map(|c| (c, origin.clone())));
                }
            }
        }
        Ok(())
    }

    /// Direct transliteration of a cnf disjunction; `None` when it contains
    /// `$true` or is a tautology.
    fn cnf_clause(&mut self, body: &[Formula]) -> Result<Option<Clause>, TptpError> {
        let mut names = HashMap::new();
        let clause = literals_to_clause(body, &mut self.symbols, &mut self.vars, &mut names)?;
        Ok(clause.filter(|c| !crate::calculus::is_tautology(c)))
    }
}

/// Binds the free variables of `f` universally, so that negating it
/// quantifies them existentially.
fn universal_closure(f: Formula) -> Formula {
    fn term_vars(t: &RawTerm, bound: &[String], out: &mut Vec<String>) {
        match t {
            RawTerm::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            RawTerm::App(_, args) => args.iter().for_each(|a| term_vars(a, bound, out)),
        }
    }
    fn free(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match f {
            Formula::Atom(_, args) => args.iter().for_each(|a| term_vars(a, bound, out)),
            Formula::True | Formula::False => {}
            Formula::Not(g) => free(g, bound, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| free(g, bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                free(a, bound, out);
                free(b, bound, out);
            }
            Formula::Forall(vs, g) | Formula::Exists(vs, g) => {
                let depth = bound.len();
                bound.extend(vs.iter().cloned());
                free(g, bound, out);
                bound.truncate(depth);
            }
        }
    }
    let mut names = Vec::new();
    free(&f, &mut Vec::new(), &mut names);
    if names.is_empty() {
        f
    } else {
        Formula::Forall(names, Box::new(f))
    }
}

fn selected(selection: Option<&[String]>, name: &str) -> bool {
    selection.is_none_or(|names| names.iter().any(|n| n == name))
}

fn literals_to_clause(
    body: &[Formula],
    symbols: &mut SymbolTable,
    vars: &mut VarGen,
    names: &mut HashMap<String, VarId>,
) -> Result<Option<Clause>, TptpError> {
    let mut lits = Vec::new();
    for f in body {
        let (positive, atom) = match f {
            Formula::Not(inner) => (false, inner.as_ref()),
            other => (true, other),
        };
        match (positive, atom) {
            (true, Formula::False) | (false, Formula::True) => continue,
            (true, Formula::True) | (false, Formula::False) => return Ok(None),
            (_, Formula::Atom(p, args)) => {
                let pred = symbols.intern(p, SymbolKind::Predicate, args.len())?;
                let args = args
                    .iter()
                    .map(|a| raw_term(a, symbols, vars, names))
                    .collect::<Result<_, _>>()?;
                lits.push(Literal::new(positive, pred, args));
            }
            (_, other) => {
                return Err(TptpError::Unsupported {
                    what: format!("non-literal in cnf clause: {other:?}"),
                })
            }
        }
    }
    Ok(Some(Clause::new(lits)))
}

fn raw_term(
    t: &RawTerm,
    symbols: &mut SymbolTable,
    vars: &mut VarGen,
    names: &mut HashMap<String, VarId>,
) -> Result<Term, TptpError> {
    Ok(match t {
        RawTerm::Var(n) => Term::Var(*names.entry(n.clone()).or_insert_with(|| vars.fresh())),
        RawTerm::App(f, args) => {
            let sym = symbols.intern(f, SymbolKind::Function, args.len())?;
            Term::App(
                sym,
                args.iter()
                    .map(|a| raw_term(a, symbols, vars, names))
                    .collect::<Result<_, _>>()?,
            )
        }
    })
}

/// Parses one cnf disjunction (e.g. `~p(X) | q(a)`, or `$false` for the empty
/// clause), interning symbols into `symbols`.
pub fn parse_clause(
    text: &str,
    symbols: &mut SymbolTable,
    vars: &mut VarGen,
) -> Result<Clause, TptpError> {
    let body = parse_disjunction(text)?;
    let mut names = HashMap::new();
    literals_to_clause(&body, symbols, vars, &mut names)?.ok_or_else(|| TptpError::Unsupported {
        what: format!("clause `{text}` is trivially true"),
    })
}
