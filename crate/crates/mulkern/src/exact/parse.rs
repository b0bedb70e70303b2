//! Expression parser for polynomial and rational-function literals.
//!
//! Grammar: sums and differences of products, `^` with a non-negative
//! integer exponent, parentheses, identifiers and integer literals.
//! A `/` between integer literals yields a rational constant.

use super::{Poly, Rat, RatFunc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Expr {
    Num(Rat),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e = n.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent {n}")))?;
                    Ok(Expr::Pow(Box::new(base), e))
                }
                other => Err(Error::Parse(format!("expected exponent, found {other:?}"))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n.parse()?))
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_expr(s: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(s)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(e)
}

fn check_vars(e: &Expr, vars: &[String]) -> Result<()> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Var(v) if vars.contains(v) => Ok(()),
        Expr::Var(v) => Err(Error::Parse(format!("unknown variable {v}"))),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            check_vars(a, vars)?;
            check_vars(b, vars)
        }
        Expr::Neg(a) | Expr::Pow(a, _) => check_vars(a, vars),
    }
}

fn to_ratfunc(e: &Expr, vars: &[String]) -> Result<RatFunc> {
    Ok(match e {
        Expr::Num(r) => RatFunc::constant_in(vars.to_vec(), r.clone()),
        Expr::Var(v) => RatFunc::from_poly(Poly::var_in(vars.to_vec(), v)),
        Expr::Add(a, b) => to_ratfunc(a, vars)?.add(&to_ratfunc(b, vars)?),
        Expr::Sub(a, b) => to_ratfunc(a, vars)?.sub(&to_ratfunc(b, vars)?),
        Expr::Mul(a, b) => to_ratfunc(a, vars)?.mul(&to_ratfunc(b, vars)?),
        Expr::Div(a, b) => to_ratfunc(a, vars)?.div(&to_ratfunc(b, vars)?)?,
        Expr::Neg(a) => to_ratfunc(a, vars)?.neg(),
        Expr::Pow(a, k) => to_ratfunc(a, vars)?.pow(*k as i32)?,
    })
}

/// Parses a rational function over the declared variables.
pub fn parse_ratfunc(s: &str, vars: &[&str]) -> Result<RatFunc> {
    let vs: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let e = parse_expr(s)?;
    check_vars(&e, &vs)?;
    to_ratfunc(&e, &vs)
}

/// Parses a polynomial; division is allowed only by nonzero constants.
pub fn parse_poly(s: &str, vars: &[&str]) -> Result<Poly> {
    let r = parse_ratfunc(s, vars)?;
    match r.den().as_constant() {
        Some(c) if !c.is_zero() => Ok(r.num().scale(&c.recip()?)),
        _ => Err(Error::Parse(format!("not a polynomial: {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_literal() {
        let p = parse_poly("x*(x-1)*(x-2) + 1/3*x - l", &["x", "l"]).unwrap();
        assert_eq!(p.eval(&[Rat::int(3), Rat::int(1)]), Rat::int(6));
        assert_eq!(p.coeff(&[1, 0]), Rat::int(2) + Rat::new(1, 3));
    }

    #[test]
    fn powers_and_unary_minus() {
        let p = parse_poly("-(x+1)^2", &["x"]).unwrap();
        assert_eq!(p.eval(&[Rat::int(2)]), Rat::int(-9));
    }

    #[test]
    fn rational_function_literal() {
        let r = parse_ratfunc("(x1*x2 + x3*z + 1)/(x1*x3 + x2*z + 1)*y", &["x1", "x2", "x3", "z", "y"]).unwrap();
        let v = r.eval(&[1, 2, 3, 4, 5].map(Rat::int)).unwrap();
        assert_eq!(v, Rat::new(25, 4));
    }

    #[test]
    fn rejects_unknown_and_non_polynomial() {
        assert!(parse_poly("x + q", &["x"]).is_err());
        assert!(parse_poly("1/x", &["x"]).is_err());
        assert!(parse_poly("x +", &["x"]).is_err());
    }
}
