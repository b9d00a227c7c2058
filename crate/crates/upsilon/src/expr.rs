//! Tiny arithmetic expression grammar for densities supplied as text.
//!
//! Deliberately small: `+ - * / ^`, `exp`, `log`, numeric literals, the
//! constants `pi` and `e`, and a single free variable (any of `r`, `t`,
//! `s`, `u`, `x`). Anything richer has to be pre-tabulated by the caller.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
}

impl Expr {
    pub fn parse(input: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: input.chars().collect(),
            pos: 0,
            src: input,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::invalid(
                "expression",
                format!("trailing input at byte {} in {:?}", p.pos, p.src),
            ));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Log(a) => a.eval(x).ln(),
        }
    }

    /// Replace the free variable by another expression.
    pub fn subst(&self, v: &Expr) -> Expr {
        let sub = |a: &Arc<Expr>| Arc::new(a.subst(v));
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var => v.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, b) => Expr::Pow(sub(a), sub(b)),
            Expr::Exp(a) => Expr::Exp(sub(a)),
            Expr::Log(a) => Expr::Log(sub(a)),
        }
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::Mul(Arc::new(self), Arc::new(other))
    }

    pub fn pow_const(self, p: f64) -> Expr {
        Expr::Pow(Arc::new(self), Arc::new(Expr::Num(p)))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized except for leaves; round-trips through parse().
        match self {
            Expr::Num(c) => {
                if *c < 0.0 {
                    write!(f, "({})", c)
                } else {
                    write!(f, "{}", c)
                }
            }
            Expr::Var => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(-{})", a),
            Expr::Add(a, b) => write!(f, "({}+{})", a, b),
            Expr::Sub(a, b) => write!(f, "({}-{})", a, b),
            Expr::Mul(a, b) => write!(f, "({}*{})", a, b),
            Expr::Div(a, b) => write!(f, "({}/{})", a, b),
            Expr::Pow(a, b) => write!(f, "({}^{})", a, b),
            Expr::Exp(a) => write!(f, "exp({})", a),
            Expr::Log(a) => write!(f, "log({})", a),
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.bump();
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(self.term()?));
                }
                '-' => {
                    self.bump();
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                '*' => {
                    self.bump();
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(self.unary()?));
                }
                '/' => {
                    self.bump();
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.bump();
            return Ok(Expr::Neg(Arc::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.bump();
            // right-associative, and `-` binds tighter in the exponent: x^-2
            let exp = self.unary()?;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::invalid("expression", format!("missing ')' in {:?}", self.src)));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::invalid(
                "expression",
                format!("unexpected {:?} in {:?}", other, self.src),
            )),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else if (c == 'e' || c == 'E')
                && self.pos > start
                && self
                    .chars
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == '+' || n == '-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::invalid("expression", format!("bad number {:?} in {:?}", text, self.src)))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "exp" | "log" => {
                if self.bump() != Some('(') {
                    return Err(Error::invalid("expression", format!("{} needs '('", name)));
                }
                let arg = self.expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::invalid("expression", format!("missing ')' after {}", name)));
                }
                Ok(if name == "exp" {
                    Expr::Exp(Arc::new(arg))
                } else {
                    Expr::Log(Arc::new(arg))
                })
            }
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            "r" | "t" | "s" | "u" | "x" => Ok(Expr::Var),
            _ => Err(Error::invalid(
                "expression",
                format!("unknown identifier {:?} in {:?}", name, self.src),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("r^(-1/2)*exp(-r)").unwrap();
        let x = 2.0_f64;
        assert!((e.eval(x) - x.powf(-0.5) * (-x).exp()).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expr::parse("1-2*3^2").unwrap();
        assert_eq!(e.eval(0.0), 1.0 - 18.0);
        let e = Expr::parse("-t^2").unwrap();
        // unary minus applies to the whole power
        assert_eq!(e.eval(3.0), -9.0);
        let e = Expr::parse("2^-2").unwrap();
        assert_eq!(e.eval(0.0), 0.25);
    }

    #[test]
    fn constants_and_variables_are_interchangeable() {
        let a = Expr::parse("exp(-x)").unwrap();
        let b = Expr::parse("exp(-t)").unwrap();
        assert_eq!(a.eval(1.5), b.eval(1.5));
        assert!((Expr::parse("pi").unwrap().eval(0.0) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        for src in ["r^(-1/2)*exp(-r)", "1/(t*log(t)^2)", "2*exp(-(t^2))"] {
            let e = Expr::parse(src).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            for x in [0.3, 0.9, 4.7] {
                let (a, b) = (e.eval(x), back.eval(x));
                if !a.is_finite() {
                    assert_eq!(a, b);
                    continue;
                }
                assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn substitution_builds_composites() {
        // rho(r) = exp(-r); q(t) = rho(t^(-1)) * t^(-1)
        let rho = Expr::parse("exp(-r)").unwrap();
        let inner = Expr::parse("t^(-1)").unwrap();
        let q = rho.subst(&inner).mul(inner.clone());
        let t = 2.0_f64;
        assert!((q.eval(t) - (-0.5_f64).exp() * 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("sin(r)").is_err());
        assert!(Expr::parse("r +").is_err());
        assert!(Expr::parse("(r").is_err());
        assert!(Expr::parse("r; system('x')").is_err());
    }
}
