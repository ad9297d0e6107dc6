//! Pratt parser for the expression grammar.
//!
//! ```text
//! expr    := expr ('+' | '-') expr | expr ('*' | '/') expr
//!          | '-' expr | expr '^' expr | atom
//! atom    := number | identifier | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | ln | sqrt
//! ```
//!
//! Binding strength, loosest first: `+ -`, `* /`, unary minus, `^` (right
//! associative). Exponents must reduce to constants.

use super::expr::{simplify, Expr, Func, Node};
use super::number::Number;
use super::symbol::Symbol;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Number),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[start..].chars().next().unwrap();
        let tok = match c {
            '0'..='9' | '.' => {
                let mut end = start;
                let mut seen_exp = false;
                while end < bytes.len() {
                    let b = bytes[end];
                    if b.is_ascii_digit() || b == b'.' {
                        end += 1;
                    } else if (b == b'e' || b == b'E') && !seen_exp {
                        // Only an exponent if digits follow (optionally signed).
                        let mut k = end + 1;
                        if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                            k += 1;
                        }
                        if k < bytes.len() && bytes[k].is_ascii_digit() {
                            seen_exp = true;
                            end = k;
                        } else {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                let text = &self.src[start..end];
                if text.matches('.').count() > 1 || text == "." {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("malformed number `{text}`"),
                    });
                }
                let n = Number::parse_decimal(text).ok_or_else(|| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Tok::Ident(self.src[start..end].to_string())
            }
            '+' | '-' | '*' | '/' | '^' => {
                self.pos += 1;
                Tok::Op(c)
            }
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            other => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        Ok(Some((tok, start)))
    }
}

const BP_SUM: u8 = 10;
const BP_PRODUCT: u8 = 20;
const BP_UNARY: u8 = 30;
const BP_POWER: u8 = 40;

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.i).map(|(_, o)| *o).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.bump() {
            Some((Tok::RParen, _)) => Ok(()),
            Some((_, off)) => Err(Error::Syntax {
                offset: off,
                message: "expected `)`".into(),
            }),
            None => Err(Error::Syntax {
                offset: self.len,
                message: "expected `)`".into(),
            }),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp) = match self.peek() {
                Some(Tok::Op(c @ ('+' | '-'))) => (*c, BP_SUM),
                Some(Tok::Op(c @ ('*' | '/'))) => (*c, BP_PRODUCT),
                Some(Tok::Op('^')) => ('^', BP_POWER),
                Some(Tok::RParen) | None => break,
                Some(_) => {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        message: "expected an operator".into(),
                    })
                }
            };
            if lbp < min_bp {
                break;
            }
            let op_offset = self.offset();
            self.bump();
            lhs = match op {
                '+' => raw_sum(lhs, self.expr(lbp + 1)?),
                '-' => raw_sum(lhs, raw_neg(self.expr(lbp + 1)?)),
                '*' => raw_product(lhs, self.expr(lbp + 1)?),
                '/' => raw_product(lhs, raw_recip(self.expr(lbp + 1)?)),
                '^' => {
                    // Right associative: the exponent parses at the same strength.
                    let exponent = self.expr(lbp)?;
                    let value = simplify(&exponent).as_number().ok_or(Error::Syntax {
                        offset: op_offset,
                        message: "exponent must be a constant".into(),
                    })?;
                    Expr::from_node(Node::Pow(lhs, value))
                }
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some((Tok::Num(n), _)) => Ok(Expr::num(n)),
            Some((Tok::Op('-'), _)) => Ok(raw_neg(self.expr(BP_UNARY)?)),
            Some((Tok::LParen, _)) => {
                let e = self.expr(0)?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => self.identifier(name, off),
            Some((Tok::RParen, _)) => Err(Error::Syntax {
                offset: off,
                message: "unexpected `)`".into(),
            }),
            Some((Tok::Op(c), _)) => Err(Error::Syntax {
                offset: off,
                message: format!("unexpected `{c}`"),
            }),
            None => Err(Error::Syntax {
                offset: off,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn identifier(&mut self, name: String, off: usize) -> Result<Expr> {
        let func = match name.as_str() {
            "sin" => Some(Some(Func::Sin)),
            "cos" => Some(Some(Func::Cos)),
            "exp" => Some(Some(Func::Exp)),
            "ln" => Some(Some(Func::Ln)),
            "sqrt" => Some(None),
            _ => None,
        };
        if let Some(f) = func {
            if self.peek() != Some(&Tok::LParen) {
                return Err(Error::UnknownIdentifier {
                    token: name,
                    offset: off,
                });
            }
            self.bump();
            let arg = self.expr(0)?;
            self.expect_rparen()?;
            return Ok(match f {
                Some(f) => Expr::from_node(Node::Func(f, arg)),
                None => Expr::from_node(Node::Pow(arg, Number::ratio(1, 2))),
            });
        }
        match Symbol::parse_name(&name) {
            Ok(Some(s)) => Ok(Expr::sym(s)),
            Ok(None) => Ok(Expr::sym(Symbol::param(&name))),
            Err(()) => Err(Error::UnknownIdentifier {
                token: name,
                offset: off,
            }),
        }
    }
}

fn raw_sum(a: Expr, b: Expr) -> Expr {
    let mut v = match a.node() {
        Node::Sum(t) => t.clone(),
        _ => vec![a],
    };
    v.push(b);
    Expr::from_node(Node::Sum(v))
}

fn raw_product(a: Expr, b: Expr) -> Expr {
    let mut v = match a.node() {
        Node::Product(t) => t.clone(),
        _ => vec![a],
    };
    v.push(b);
    Expr::from_node(Node::Product(v))
}

fn raw_neg(e: Expr) -> Expr {
    match e.as_number() {
        Some(n) => Expr::num(n.neg()),
        None => Expr::from_node(Node::Product(vec![Expr::num(Number::MINUS_ONE), e])),
    }
}

fn raw_recip(e: Expr) -> Expr {
    match e.as_number().and_then(Number::recip) {
        Some(r) => Expr::num(r),
        None => Expr::from_node(Node::Pow(e, Number::MINUS_ONE)),
    }
}

/// Parse expression text. The tree mirrors the source structure; call
/// [`simplify`](super::simplify) to normalize it.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        len: text.len(),
    };
    let e = p.expr(0)?;
    if let Some((_, off)) = p.toks.get(p.i) {
        return Err(Error::Syntax {
            offset: *off,
            message: "unbalanced `)`".into(),
        });
    }
    Ok(e)
}
