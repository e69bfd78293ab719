use super::TptpError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Lower(String),
    Upper(String),
    Quoted(String),
    Dollar(String),
    Integer(String),
    Distinct(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Tilde,
    Pipe,
    Amp,
    Bang,
    Question,
    Eq,
    Neq,
    Implies,
    RevImplies,
    Iff,
    Xor,
    Nor,
    Nand,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, TptpError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(TptpError::syntax(pos, "unterminated block comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '$' {
            let start = i;
            let mut j = i + 1;
            if c == '$' && chars.get(j) == Some(&'$') {
                j += 1;
            }
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = if c == '$' {
                if word.len() == 1 {
                    return Err(TptpError::syntax(pos, "bare `$`"));
                }
                Tok::Dollar(word)
            } else if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            advance(&mut i, &mut line, &mut col, j - start);
            out.push((tok, pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push((Tok::Integer(word), pos));
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            let mut j = i + 1;
            let mut s = String::new();
            loop {
                match chars.get(j) {
                    None => return Err(TptpError::syntax(pos, "unterminated quoted token")),
                    Some('\\') => {
                        match chars.get(j + 1) {
                            Some(&e) => s.push(e),
                            None => {
                                return Err(TptpError::syntax(pos, "unterminated quoted token"))
                            }
                        }
                        j += 2;
                    }
                    Some(&q) if q == quote => {
                        j += 1;
                        break;
                    }
                    Some(&other) => {
                        s.push(other);
                        j += 1;
                    }
                }
            }
            let n = j - i;
            advance(&mut i, &mut line, &mut col, n);
            if quote == '\'' {
                if s.is_empty() {
                    return Err(TptpError::syntax(pos, "empty quoted atom"));
                }
                out.push((Tok::Quoted(s), pos));
            } else {
                out.push((Tok::Distinct(s), pos));
            }
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        let (tok, n) = if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("<~>") {
            (Tok::Xor, 3)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else if rest.starts_with("<=") {
            (Tok::RevImplies, 2)
        } else if rest.starts_with("!=") {
            (Tok::Neq, 2)
        } else if rest.starts_with("~|") {
            (Tok::Nor, 2)
        } else if rest.starts_with("~&") {
            (Tok::Nand, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ':' => Tok::Colon,
                '~' => Tok::Tilde,
                '|' => Tok::Pipe,
                '&' => Tok::Amp,
                '!' => Tok::Bang,
                '?' => Tok::Question,
                '=' => Tok::Eq,
                other => {
                    return Err(TptpError::syntax(pos, format!("unexpected character `{other}`")))
                }
            };
            (t, 1)
        };
        advance(&mut i, &mut line, &mut col, n);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
