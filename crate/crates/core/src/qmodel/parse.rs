use crate::error::{Error, Result};

use super::query::{Query, QueryBuilder};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Turnstile,
    Bang,
    NotEq,
    Eq,
    Dot,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Bang => "`!`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Dot => "`.`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            b'.' => {
                out.push((i, Tok::Dot));
                i += 1;
            }
            b'=' => {
                out.push((i, Tok::Eq));
                i += 1;
            }
            b':' if bytes.get(i + 1) == Some(&b'-') => {
                out.push((i, Tok::Turnstile));
                i += 2;
            }
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                out.push((i, Tok::NotEq));
                i += 2;
            }
            b'!' => {
                out.push((i, Tok::Bang));
                i += 1;
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::Parse {
                    offset: i,
                    expected: "identifier or punctuation".into(),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    /// Errors at end of input point at the last token read.
    fn error(&self, expected: &str) -> Error {
        let offset = match self.toks.get(self.pos) {
            Some((o, _)) => *o,
            None => self.toks.last().map(|(o, _)| *o).unwrap_or(0),
        };
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".into(),
        };
        Error::Parse {
            offset,
            expected: format!("{expected}, found {found}"),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn var_list(&mut self, allow_empty: bool) -> Result<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut vars = Vec::new();
        if allow_empty && self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(vars);
        }
        loop {
            vars.push(self.ident("variable")?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(vars);
                }
                _ => return Err(self.error("`,` or `)`")),
            }
        }
    }

    fn atom(&mut self, b: &mut QueryBuilder) -> Result<()> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            let rel = self.ident("relation name")?;
            let args = self.var_list(false)?;
            b.negated_atom(rel, &args);
            return Ok(());
        }
        match self.peek2() {
            Some(Tok::LParen) => {
                let rel = self.ident("relation name")?;
                let args = self.var_list(false)?;
                b.atom(rel, &args);
            }
            Some(Tok::NotEq) => {
                let x = self.ident("variable")?;
                self.pos += 1;
                let y = self.ident("variable")?;
                b.disequality(x, y);
            }
            Some(Tok::Eq) => {
                let x = self.ident("variable")?;
                self.pos += 1;
                let y = self.ident("variable")?;
                b.equality(x, y);
            }
            _ => {
                self.ident("atom")?;
                return Err(self.error("`(`, `!=` or `=`"));
            }
        }
        Ok(())
    }
}

/// Parses `NAME(v,...) :- atom, atom, ...` where an atom is `R(v,...)`,
/// `!R(v,...)`, `v != w` or `v = w`. `#` starts a comment running to the end
/// of the line and a trailing `.` is accepted.
pub fn parse_query(text: &str) -> Result<Query> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let name = p.ident("query name")?;
    let mut b = QueryBuilder::new(name);
    let head_start = p.pos;
    let head = p.var_list(true)?;
    for (k, v) in head.iter().enumerate() {
        if head[..k].contains(v) {
            // offset of the duplicate: `(` then alternating names and commas
            let offset = p.toks[head_start + 1 + 2 * k].0;
            return Err(Error::Parse {
                offset,
                expected: format!("distinct head variable, found duplicate `{v}`"),
            });
        }
        b.free(v.clone());
    }
    p.expect(Tok::Turnstile)?;
    loop {
        p.atom(&mut b)?;
        match p.peek() {
            Some(Tok::Comma) => p.pos += 1,
            Some(Tok::Dot) => {
                p.pos += 1;
                if p.peek().is_some() {
                    return Err(p.error("end of input"));
                }
                break;
            }
            None => break,
            _ => return Err(p.error("`,` or end of query")),
        }
    }
    b.build()
}
