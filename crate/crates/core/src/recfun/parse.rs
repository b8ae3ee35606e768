//! Surface syntax: `Z(k)`, `S`, `P(i,a)`, `C[outer; t1, ..., tn]`,
//! `R[base; step]`, `M[body]`. Whitespace is insignificant.

use thiserror::Error;

use super::term::{Term, TermError};
use crate::Nat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: ill-formed term: {source}")]
    Arity {
        line: usize,
        column: usize,
        source: TermError,
    },
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(pos, |nl| pos - nl - 1) + 1;
        (line, column)
    }

    fn syntax<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.location(pos);
        Err(ParseError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn arity(&self, pos: usize, source: TermError) -> ParseError {
        let (line, column) = self.location(pos);
        ParseError::Arity {
            line,
            column,
            source,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => self.syntax(self.pos, format!("expected '{want}', found '{c}'")),
            None => self.syntax(self.pos, format!("expected '{want}', found end of input")),
        }
    }

    fn number(&mut self) -> Result<Nat, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = self.src[start..]
            .bytes()
            .take_while(u8::is_ascii_digit)
            .count();
        if digits == 0 {
            return self.syntax(start, "expected a decimal literal");
        }
        self.pos += digits;
        Ok(self.src[start..self.pos].parse().expect("digits only"))
    }

    fn small(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        let n = self.number()?;
        match n.to_u64().and_then(|v| usize::try_from(v).ok()) {
            Some(v) => Ok(v),
            None => self.syntax(start, "index or arity too large"),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return self.syntax(self.pos, "expected a term, found end of input"),
        };
        let tag = self.src[start..].chars().next().expect("peeked");
        self.pos += tag.len_utf8();
        match tag {
            'Z' => {
                self.expect('(')?;
                let k = self.number()?;
                self.expect(')')?;
                Ok(Term::constant(k))
            }
            'S' => Ok(Term::succ()),
            'P' => {
                self.expect('(')?;
                let i = self.small()?;
                self.expect(',')?;
                let a = self.small()?;
                self.expect(')')?;
                Term::proj(i, a).map_err(|e| self.arity(start, e))
            }
            'C' => {
                self.expect('[')?;
                let outer = self.term()?;
                self.expect(';')?;
                let mut inners = vec![self.term()?];
                while self.peek() == Some(',') {
                    self.pos += 1;
                    inners.push(self.term()?);
                }
                self.expect(']')?;
                Term::compose(outer, inners).map_err(|e| self.arity(start, e))
            }
            'R' => {
                self.expect('[')?;
                let base = self.term()?;
                self.expect(';')?;
                let step = self.term()?;
                self.expect(']')?;
                Term::prim_rec(base, step).map_err(|e| self.arity(start, e))
            }
            'M' => {
                self.expect('[')?;
                let body = self.term()?;
                self.expect(']')?;
                Term::mu(body).map_err(|e| self.arity(start, e))
            }
            other => self.syntax(start, format!("unknown constructor '{other}'")),
        }
    }
}

/// Parses one term; trailing non-whitespace is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let t = p.term()?;
    if p.peek().is_some() {
        return p.syntax(p.pos, "trailing input after term");
    }
    Ok(t)
}
