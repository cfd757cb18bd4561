//! Polynomial expressions such as `x^7 + 3*y^7` or `(x+y)^2 - 1/2*z`.
//!
//! ```text
//! expr     := term (('+'|'-') term)* ;
//! term     := factor ('*' factor)* ;
//! factor   := '-' factor | atom ('^' uint)? ;
//! atom     := rational | var | '(' expr ')' ;
//! var      := 'x'|'y'|'z'|'w' ;
//! rational := int ('/' uint)? ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. There is no
//! implicit multiplication: `3y` is rejected.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::Rational;
use crate::poly::{MultiPoly, PolyError, Var};

const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(Rational),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable {name:?} at byte {offset}")]
    UnknownVariable { offset: usize, name: String },
    #[error("negative exponent at byte {offset}")]
    NegativeExponent { offset: usize },
    #[error("exponent at byte {offset} is not a nonnegative integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("exponent at byte {offset} does not fit in 32 bits")]
    ExponentTooLarge { offset: usize },
    #[error("zero denominator at byte {offset}")]
    ZeroDenominator { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(Var),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("integer {n}"),
        Tok::Var(v) => format!("variable {v}"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                // "xy" lexes as two variables so the parser can report the
                // missing operator; anything else is an unknown name
                if word.chars().all(|ch| Var::from_name(ch).is_some()) {
                    for (k, ch) in word.char_indices() {
                        out.push((Tok::Var(Var::from_name(ch).unwrap()), start + k));
                    }
                    continue;
                }
                return Err(ParseError::UnknownVariable {
                    offset: start,
                    name: word.to_string(),
                });
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let message = match (self.peek(), wanted) {
            (Tok::Var(_) | Tok::Int(_) | Tok::LParen, "operator") => {
                format!("expected an operator, found {} (implicit multiplication is not allowed)", describe(self.peek()))
            }
            (t, w) => format!("expected {w}, found {}", describe(t)),
        };
        ParseError::Syntax {
            offset: self.offset(),
            message,
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::Syntax {
                offset: self.offset(),
                message: "expression nested too deeply".into(),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.enter()?;
            self.bump();
            let inner = self.factor()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump() {
            (Tok::Int(n), _) => {
                if *self.peek() == Tok::Slash {
                    return Err(ParseError::NonIntegerExponent { offset: at });
                }
                let e = u32::try_from(n).map_err(|_| ParseError::ExponentTooLarge { offset: at })?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            (Tok::Minus, _) => Err(ParseError::NegativeExponent { offset: at }),
            (Tok::End, _) => Err(ParseError::Syntax {
                offset: at,
                message: "expected exponent, found end of input".into(),
            }),
            _ => Err(ParseError::NonIntegerExponent { offset: at }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if *self.peek() != Tok::Slash {
                    return Ok(Expr::Lit(Rational::from_integer(n)));
                }
                self.bump();
                let den_at = self.offset();
                match self.bump() {
                    (Tok::Int(d), _) => {
                        Rational::new(n, d).map(Expr::Lit).map_err(|_| ParseError::ZeroDenominator { offset: den_at })
                    }
                    _ => Err(ParseError::Syntax {
                        offset: den_at,
                        message: "expected an unsigned integer denominator".into(),
                    }),
                }
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Expr::Var(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(e)
            }
            Tok::End if at == 0 => Err(ParseError::Empty),
            _ => Err(self.unexpected("a number, variable or '('")),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("operator"));
    }
    Ok(e)
}

fn collect_vars(e: &Expr, acc: &mut BTreeSet<Var>) {
    match e {
        Expr::Lit(_) => {}
        Expr::Var(v) => {
            acc.insert(*v);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            collect_vars(a, acc);
            collect_vars(b, acc);
        }
        Expr::Neg(a) | Expr::Pow(a, _) => collect_vars(a, acc),
    }
}

/// Expands an expression into a canonical polynomial over the variables that
/// appear in it (in `x, y, z, w` order).
pub fn lower(e: &Expr) -> Result<MultiPoly, PolyError> {
    let mut set = BTreeSet::new();
    collect_vars(e, &mut set);
    let vars: Vec<Var> = set.into_iter().collect();
    lower_in(e, &vars)
}

fn lower_in(e: &Expr, vars: &[Var]) -> Result<MultiPoly, PolyError> {
    Ok(match e {
        Expr::Lit(r) => MultiPoly::constant(vars, r.clone())?,
        Expr::Var(v) => MultiPoly::var(vars, *v)?,
        Expr::Add(a, b) => lower_in(a, vars)?.add(&lower_in(b, vars)?),
        Expr::Sub(a, b) => lower_in(a, vars)?.sub(&lower_in(b, vars)?),
        Expr::Neg(a) => lower_in(a, vars)?.neg(),
        Expr::Mul(a, b) => lower_in(a, vars)?.mul(&lower_in(b, vars)?)?,
        Expr::Pow(a, k) => lower_in(a, vars)?.pow(*k)?,
    })
}

/// `lower(parse(text))`.
pub fn parse_poly(text: &str) -> Result<MultiPoly, ExprError> {
    Ok(lower(&parse(text)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(n: i64) -> Box<Expr> {
        Box::new(Expr::Lit(Rational::from(n)))
    }

    fn var(v: Var) -> Box<Expr> {
        Box::new(Expr::Var(v))
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("x^7 + 3*y^7").unwrap(),
            Expr::Add(
                Box::new(Expr::Pow(var(Var::X), 7)),
                Box::new(Expr::Mul(lit(3), Box::new(Expr::Pow(var(Var::Y), 7))))
            )
        );
        assert_eq!(
            parse("(x+y)^2").unwrap(),
            Expr::Pow(Box::new(Expr::Add(var(Var::X), var(Var::Y))), 2)
        );
        assert_eq!(parse("x^-1"), Err(ParseError::NegativeExponent { offset: 2 }));
        assert_eq!(parse("-x^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(var(Var::X), 2))));
    }

    #[test]
    fn lower_examples() {
        let a = parse_poly("(x+y)^2").unwrap();
        let b = parse_poly("x^2 + 2*x*y + y^2").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_terms(), 3);
        assert!(parse_poly("x - x").unwrap().is_zero());
        let half = parse_poly("1/2*x^2").unwrap();
        assert_eq!(half.coeff(&[2]), Some(&Rational::new(1, 2).unwrap()));
        let hand = crate::poly::MultiPoly::from_terms(
            &[Var::X, Var::Y],
            [(vec![7, 0], Rational::one()), (vec![0, 7], Rational::from(3))],
        )
        .unwrap();
        assert_eq!(parse_poly("x^7+3*y^7").unwrap(), hand);
        assert_eq!(parse_poly("-x^2").unwrap().render(), "-x^2");
        assert_eq!(parse_poly("(-x)^2").unwrap().render(), "x^2");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("3y"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse("xy"), Err(ParseError::Syntax { offset: 1, .. })));
        assert_eq!(
            parse("x + a"),
            Err(ParseError::UnknownVariable {
                offset: 4,
                name: "a".into()
            })
        );
        assert_eq!(parse(""), Err(ParseError::Empty));
        assert_eq!(parse("   "), Err(ParseError::Empty));
        assert_eq!(parse("x^1/2"), Err(ParseError::NonIntegerExponent { offset: 2 }));
        assert_eq!(parse("x^y"), Err(ParseError::NonIntegerExponent { offset: 2 }));
        assert_eq!(parse("x^99999999999"), Err(ParseError::ExponentTooLarge { offset: 2 }));
        assert_eq!(parse("1/0"), Err(ParseError::ZeroDenominator { offset: 2 }));
        assert!(matches!(parse("x/2"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(x+1"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse("x^2^3"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x + 1.5"), Err(ParseError::Syntax { offset: 5, .. })));
        assert!(matches!(parse(&"(".repeat(10_000)), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse(&"-".repeat(10_000)), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_poly("x^70000*y^70000"), Err(ExprError::Poly(PolyError::ExponentOverflow))));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse_poly(" x ^ 7\t+ 3 * y^7\n").unwrap(), parse_poly("x^7+3*y^7").unwrap());
    }
}
