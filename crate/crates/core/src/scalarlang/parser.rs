//! Recursive-descent parser for the scalar-field grammar.
//!
//! Precedence, low to high: `+ -` < `* /` < unary `-` < `^` < atoms and
//! calls. Whitespace-insensitive. Error spans are byte offsets into the
//! source.

use super::FieldExpr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    expected: "a numeric literal".into(),
                })?;
                self.pos = end;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    expected: "an operator, literal or identifier".into(),
                })
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a [String],
    consts: &'a [(String, f64)],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<FieldExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = FieldExpr::Add(Box::new(acc), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = FieldExpr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<FieldExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = FieldExpr::Mul(Box::new(acc), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = FieldExpr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<FieldExpr> {
        if matches!(self.peek().0, Tok::Minus) {
            self.bump();
            let inner = self.unary()?;
            return Ok(FieldExpr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<FieldExpr> {
        let base = self.atom()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            let mut negative = false;
            if matches!(self.peek().0, Tok::Minus) {
                self.bump();
                negative = true;
            }
            let (tok, off) = self.bump();
            let k = match tok {
                Tok::Num(x) if x.fract() == 0.0 && x.abs() <= i32::MAX as f64 => x as i32,
                _ => {
                    return Err(Error::Syntax {
                        offset: off,
                        expected: "an integer exponent".into(),
                    })
                }
            };
            let k = if negative { -k } else { k };
            return Ok(FieldExpr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FieldExpr> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num(x) => Ok(FieldExpr::Lit(x)),
            Tok::LParen => {
                let inner = self.expr()?;
                let (close, coff) = self.bump();
                if close != Tok::RParen {
                    return Err(Error::Syntax {
                        offset: coff,
                        expected: "`)`".into(),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if matches!(self.peek().0, Tok::LParen) {
                    self.bump();
                    let arg = self.expr()?;
                    let (close, coff) = self.bump();
                    if close != Tok::RParen {
                        return Err(Error::Syntax {
                            offset: coff,
                            expected: "`)`".into(),
                        });
                    }
                    return match name.as_str() {
                        "sin" => Ok(FieldExpr::Sin(Box::new(arg))),
                        "cos" => Ok(FieldExpr::Cos(Box::new(arg))),
                        "exp" => Ok(FieldExpr::Exp(Box::new(arg))),
                        _ => Err(Error::UnknownSymbol { name, offset: off }),
                    };
                }
                if let Some(i) = self.vars.iter().position(|v| v == &name) {
                    return Ok(FieldExpr::Var(i));
                }
                if name == "pi" {
                    return Ok(FieldExpr::Lit(std::f64::consts::PI));
                }
                if let Some((_, value)) = self.consts.iter().find(|(n, _)| n == &name) {
                    return Ok(FieldExpr::Lit(*value));
                }
                Err(Error::UnknownSymbol { name, offset: off })
            }
            _ => Err(Error::Syntax {
                offset: off,
                expected: "a literal, variable, call or `(`".into(),
            }),
        }
    }
}

/// Parse `src` over the named chart variables, with optional user
/// constants (`pi` is built in).
pub fn parse(src: &str, vars: &[String], consts: &[(String, f64)]) -> Result<FieldExpr> {
    let mut lexer = Lexer::new(src);
    let mut toks = Vec::new();
    loop {
        let (tok, off) = lexer.next()?;
        let is_end = tok == Tok::End;
        toks.push((tok, off));
        if is_end {
            break;
        }
    }
    let mut p = Parser {
        toks,
        at: 0,
        vars,
        consts,
    };
    let e = p.expr()?;
    let (tok, off) = p.peek().clone();
    if tok != Tok::End {
        return Err(Error::Syntax {
            offset: off,
            expected: "end of input".into(),
        });
    }
    Ok(e)
}
