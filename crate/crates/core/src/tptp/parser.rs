use super::lexer::{tokenize, Pos, Tok};
use super::TptpError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawTerm {
    Var(String),
    App(String, Vec<RawTerm>),
}

/// First-order formula as written, before any normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Atom(String, Vec<RawTerm>),
    True,
    False,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Cnf {
        name: String,
        role: String,
        /// Disjunction of literals (atoms or negated atoms).
        body: Vec<Formula>,
        pos: Pos,
    },
    Fof {
        name: String,
        role: String,
        formula: Formula,
        pos: Pos,
    },
    Include {
        path: String,
        selection: Option<Vec<String>>,
        pos: Pos,
    },
}

pub fn parse_statements(text: &str) -> Result<Vec<Statement>, TptpError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while p.peek() != &Tok::Eof {
        out.push(p.statement()?);
    }
    Ok(out)
}

/// Parses a bare cnf disjunction such as `~p(X) | q(a)` (or `$false`).
pub fn parse_disjunction(text: &str) -> Result<Vec<Formula>, TptpError> {
    let mut p = Parser::new(text)?;
    let body = p.cnf_body()?;
    p.expect(Tok::Eof)?;
    Ok(body)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, TptpError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), TptpError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("{t:?}")))
        }
    }

    fn unexpected(&self, wanted: &str) -> TptpError {
        TptpError::syntax(
            self.pos(),
            format!("expected {wanted}, found {:?}", self.peek()),
        )
    }

    fn statement(&mut self) -> Result<Statement, TptpError> {
        let pos = self.pos();
        let kind = match self.bump() {
            Tok::Lower(w) => w,
            other => {
                return Err(TptpError::syntax(
                    pos,
                    format!("expected annotated formula or include, found {other:?}"),
                ))
            }
        };
        self.expect(Tok::LParen)?;
        let stmt = match kind.as_str() {
            "include" => {
                let path = match self.bump() {
                    Tok::Quoted(p) => p,
                    _ => return Err(TptpError::syntax(pos, "include expects a quoted path")),
                };
                let selection = if self.eat(&Tok::Comma) {
                    self.expect(Tok::LBracket)?;
                    let mut names = Vec::new();
                    if !self.eat(&Tok::RBracket) {
                        loop {
                            names.push(self.name()?);
                            if self.eat(&Tok::RBracket) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Some(names)
                } else {
                    None
                };
                self.expect(Tok::RParen)?;
                Statement::Include {
                    path,
                    selection,
                    pos,
                }
            }
            "cnf" | "fof" => {
                let name = self.name()?;
                self.expect(Tok::Comma)?;
                let role = match self.bump() {
                    Tok::Lower(r) => r,
                    _ => return Err(TptpError::syntax(pos, "expected a formula role")),
                };
                self.expect(Tok::Comma)?;
                let stmt = if kind == "cnf" {
                    let body = if self.peek() == &Tok::LParen && self.cnf_is_parenthesized() {
                        self.bump();
                        let b = self.cnf_body()?;
                        self.expect(Tok::RParen)?;
                        b
                    } else {
                        self.cnf_body()?
                    };
                    Statement::Cnf {
                        name,
                        role,
                        body,
                        pos,
                    }
                } else {
                    let formula = self.fof_formula()?;
                    Statement::Fof {
                        name,
                        role,
                        formula,
                        pos,
                    }
                };
                if self.eat(&Tok::Comma) {
                    self.skip_annotations()?;
                }
                self.expect(Tok::RParen)?;
                stmt
            }
            "tff" | "thf" | "tcf" => {
                return Err(TptpError::Unsupported {
                    what: format!("{kind} formulas"),
                })
            }
            other => {
                return Err(TptpError::syntax(
                    pos,
                    format!("unknown statement kind `{other}`"),
                ))
            }
        };
        self.expect(Tok::Dot)?;
        Ok(stmt)
    }

    /// A cnf body may itself be wrapped in parentheses; a leading `(` is only
    /// a wrapper when its matching `)` is followed by `,` or `)`.
    fn cnf_is_parenthesized(&self) -> bool {
        let mut depth = 0usize;
        for (i, (t, _)) in self.toks[self.at..].iter().enumerate() {
            match t {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        let next = &self.toks[(self.at + i + 1).min(self.toks.len() - 1)].0;
                        return matches!(next, Tok::Comma | Tok::RParen);
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
        }
        false
    }

    fn skip_annotations(&mut self) -> Result<(), TptpError> {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return Err(self.unexpected("end of annotations")),
                Tok::LParen | Tok::LBracket => depth += 1,
                Tok::RParen | Tok::RBracket => {
                    if depth == 0 {
                        return Ok(());
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn name(&mut self) -> Result<String, TptpError> {
        match self.bump() {
            Tok::Lower(w) | Tok::Quoted(w) | Tok::Integer(w) => Ok(w),
            other => Err(TptpError::syntax(
                self.pos(),
                format!("expected a name, found {other:?}"),
            )),
        }
    }

    fn cnf_body(&mut self) -> Result<Vec<Formula>, TptpError> {
        let mut lits = vec![self.cnf_literal()?];
        while self.eat(&Tok::Pipe) {
            lits.push(self.cnf_literal()?);
        }
        Ok(lits)
    }

    fn cnf_literal(&mut self) -> Result<Formula, TptpError> {
        if self.eat(&Tok::Tilde) {
            let atom = self.atomic()?;
            return Ok(Formula::Not(Box::new(atom)));
        }
        if self.peek() == &Tok::LParen {
            self.bump();
            let l = self.cnf_literal()?;
            self.expect(Tok::RParen)?;
            return Ok(l);
        }
        self.atomic()
    }

    fn fof_formula(&mut self) -> Result<Formula, TptpError> {
        let first = self.unitary()?;
        match self.peek().clone() {
            Tok::Pipe => {
                let mut parts = vec![first];
                while self.eat(&Tok::Pipe) {
                    parts.push(self.unitary()?);
                }
                Ok(Formula::Or(parts))
            }
            Tok::Amp => {
                let mut parts = vec![first];
                while self.eat(&Tok::Amp) {
                    parts.push(self.unitary()?);
                }
                Ok(Formula::And(parts))
            }
            Tok::Implies => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Implies(Box::new(first), Box::new(rhs)))
            }
            Tok::RevImplies => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Implies(Box::new(rhs), Box::new(first)))
            }
            Tok::Iff => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Iff(Box::new(first), Box::new(rhs)))
            }
            Tok::Xor => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Not(Box::new(Formula::Iff(
                    Box::new(first),
                    Box::new(rhs),
                ))))
            }
            Tok::Nor => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Not(Box::new(Formula::Or(vec![first, rhs]))))
            }
            Tok::Nand => {
                self.bump();
                let rhs = self.unitary()?;
                Ok(Formula::Not(Box::new(Formula::And(vec![first, rhs]))))
            }
            _ => Ok(first),
        }
    }

    fn unitary(&mut self) -> Result<Formula, TptpError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.fof_formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Tilde => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unitary()?)))
            }
            Tok::Bang | Tok::Question => {
                let universal = self.bump() == Tok::Bang;
                self.expect(Tok::LBracket)?;
                let mut vars = Vec::new();
                loop {
                    match self.bump() {
                        Tok::Upper(v) => vars.push(v),
                        other => {
                            return Err(TptpError::syntax(
                                self.pos(),
                                format!("expected a variable, found {other:?}"),
                            ))
                        }
                    }
                    if self.eat(&Tok::RBracket) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
                self.expect(Tok::Colon)?;
                let body = Box::new(self.unitary()?);
                Ok(if universal {
                    Formula::Forall(vars, body)
                } else {
                    Formula::Exists(vars, body)
                })
            }
            _ => self.atomic(),
        }
    }

    fn atomic(&mut self) -> Result<Formula, TptpError> {
        let pos = self.pos();
        let lhs = self.term()?;
        if matches!(self.peek(), Tok::Eq | Tok::Neq) {
            return Err(TptpError::Equality {
                line: pos.line,
                col: pos.col,
            });
        }
        match lhs {
            RawTerm::Var(v) => Err(TptpError::syntax(
                pos,
                format!("variable `{v}` used as a formula"),
            )),
            RawTerm::App(name, args) => match name.as_str() {
                "$true" if args.is_empty() => Ok(Formula::True),
                "$false" if args.is_empty() => Ok(Formula::False),
                n if n.starts_with('$') => Err(TptpError::Unsupported {
                    what: format!("defined predicate `{n}`"),
                }),
                _ => Ok(Formula::Atom(name, args)),
            },
        }
    }

    fn term(&mut self) -> Result<RawTerm, TptpError> {
        let pos = self.pos();
        let functor = match self.bump() {
            Tok::Upper(v) => return Ok(RawTerm::Var(v)),
            Tok::Lower(w) | Tok::Quoted(w) | Tok::Dollar(w) | Tok::Integer(w) => w,
            Tok::Distinct(w) => format!("\"{w}\""),
            other => {
                return Err(TptpError::syntax(
                    pos,
                    format!("expected a term, found {other:?}"),
                ))
            }
        };
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.term()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(RawTerm::App(functor, args))
    }
}
