//! Expression syntax for elements of `L_Q(E)`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := '-'? factor ('.'? factor)*      juxtaposition multiplies
//! factor := atom '*'*                        postfix '*' is the involution
//! atom   := INT ('/' INT)? | IDENT | 't+' | 't-' | '(' expr ')'
//! ```
//!
//! Identifiers name vertices or edges of the graph. `t+` and `t-` are
//! recognized when `t` is immediately followed by the sign, so `t- t+`
//! parses as a product while `t - v` is a difference.

use num_bigint::BigInt;

use super::{Lpa, LpaElem};
use crate::error::LpaError;
use crate::tower::Q;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Dot,
    LParen,
    RParen,
    TPlus,
    TMinus,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, LpaError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '/' => out.push((start, Tok::Slash)),
            '.' => out.push((start, Tok::Dot)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            c if c.is_ascii_digit() => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push((start, Tok::Int(text.parse().expect("digits"))));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '^' | '\'')) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                if text == "t" && i < chars.len() && matches!(chars[i], '+' | '-') {
                    out.push((start, if chars[i] == '+' { Tok::TPlus } else { Tok::TMinus }));
                    i += 1;
                } else {
                    out.push((start, Tok::Ident(text)));
                }
                continue;
            }
            other => return Err(LpaError::Parse { offset: start, message: format!("unexpected character `{other}`") }),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    lpa: &'a Lpa,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, message: &str) -> Result<T, LpaError> {
        Err(LpaError::Parse { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<LpaElem, LpaError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LpaElem, LpaError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Dot) => {
                    self.pos += 1;
                    acc = self.lpa.mul(&acc, &self.factor()?);
                }
                Some(Tok::Ident(_) | Tok::Int(_) | Tok::LParen | Tok::TPlus | Tok::TMinus) => {
                    acc = self.lpa.mul(&acc, &self.factor()?);
                }
                _ => break,
            }
        }
        Ok(if negate { acc.scale(&-Q::from_integer(1.into())) } else { acc })
    }

    fn factor(&mut self) -> Result<LpaElem, LpaError> {
        let mut x = self.atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            x = x.star();
        }
        Ok(x)
    }

    fn atom(&mut self) -> Result<LpaElem, LpaError> {
        let Some(tok) = self.peek().cloned() else { return self.err("unexpected end of input") };
        self.pos += 1;
        match tok {
            Tok::Int(n) => {
                let d = if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.peek().cloned() {
                        Some(Tok::Int(d)) if d != BigInt::from(0) => {
                            self.pos += 1;
                            d
                        }
                        _ => return self.err("expected a nonzero denominator"),
                    }
                } else {
                    BigInt::from(1)
                };
                Ok(self.lpa.scalar(Q::new(n, d)))
            }
            Tok::Ident(name) => {
                let g = self.lpa.graph();
                if let Some(v) = g.vertex_by_id(&name) {
                    Ok(self.lpa.vertex(v))
                } else if let Some(e) = g.edge_by_id(&name) {
                    Ok(self.lpa.edge(e))
                } else {
                    Err(LpaError::UnknownIdentifier(name))
                }
            }
            Tok::TPlus => self.lpa.t_plus(),
            Tok::TMinus => self.lpa.t_minus(),
            Tok::LParen => {
                let x = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(x)
            }
            _ => {
                self.pos -= 1;
                self.err("expected an operand")
            }
        }
    }
}

/// Parses and evaluates an expression, returning its normal form.
pub fn parse_expr(lpa: &Lpa, text: &str) -> Result<LpaElem, LpaError> {
    let toks = lex(text)?;
    let mut p = Parser { lpa, toks, pos: 0, end: text.len() };
    let x = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(x)
}
