//! A small expression language for user densities.
//!
//! A density file has one `name = expression` per line, where the names are
//! `logpdf`, `d1`, `d2` and `d3` (all four required). `#` starts a comment.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "y" | "pi" | func "(" expr ")" | "(" expr ")"
//! func   := exp | log | sqrt | erf | phi | Phi
//! ```

use crate::error_models::Density;
use crate::special::{normal_cdf, normal_pdf};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Erf,
    Phi,
    PhiCdf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => y,
            Expr::Neg(e) => -e.eval(y),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(y), b.eval(y));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(y);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Erf => libm::erf(v),
                    Func::Phi => normal_pdf(v),
                    Func::PhiCdf => normal_cdf(v),
                }
            }
        }
    }

    /// Parses a single expression; `line` is used in error positions.
    pub fn parse(text: &str, line: usize) -> Result<Expr> {
        let mut p = Parser { chars: text.chars().collect(), pos: 0, line, col_offset: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
        }
        Ok(e)
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col_offset: usize,
}

impl Parser {
    fn error(&self, message: String) -> Error {
        Error::Parse { line: self.line, column: self.col_offset + self.pos + 1, message }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            let message = match self.peek() {
                Some(found) => format!("expected `{c}`, found `{found}`"),
                None => format!("expected `{c}` at end of input"),
            };
            Err(self.error(message))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression".into())),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_') {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let func = match name.as_str() {
                    "y" => return Ok(Expr::Var),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "sqrt" => Func::Sqrt,
                    "erf" => Func::Erf,
                    "phi" => Func::Phi,
                    "Phi" => Func::PhiCdf,
                    _ => {
                        self.pos = start;
                        return Err(self.error(format!("unknown identifier `{name}`")));
                    }
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Parser| {
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.chars.get(self.pos), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>().map(Expr::Num).map_err(|_| {
            self.pos = start;
            self.error(format!("malformed number `{text}`"))
        })
    }
}

/// Density given by four parsed expressions.
#[derive(Clone, Debug)]
pub struct ExprDensity {
    pub logpdf: Expr,
    pub d1: Expr,
    pub d2: Expr,
    pub d3: Expr,
}

impl Density for ExprDensity {
    fn ln_pdf(&self, y: f64) -> f64 {
        self.logpdf.eval(y)
    }
    fn log_deriv(&self, order: u8, y: f64) -> f64 {
        match order {
            1 => self.d1.eval(y),
            2 => self.d2.eval(y),
            _ => self.d3.eval(y),
        }
    }
}

pub fn parse_density_file(text: &str) -> Result<ExprDensity> {
    let mut slots: [Option<Expr>; 4] = [None, None, None, None];
    const NAMES: [&str; 4] = ["logpdf", "d1", "d2", "d3"];
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(Error::Parse { line, column: 1, message: "expected `name = expression`".into() });
        };
        let name = content[..eq].trim();
        let Some(slot) = NAMES.iter().position(|n| *n == name) else {
            let column = content.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
            return Err(Error::Parse { line, column, message: format!("unknown name `{name}`; expected logpdf, d1, d2 or d3") });
        };
        if slots[slot].is_some() {
            return Err(Error::Parse { line, column: 1, message: format!("`{name}` defined twice") });
        }
        let rhs = &content[eq + 1..];
        let mut p = Parser { chars: rhs.chars().collect(), pos: 0, line, col_offset: content[..eq + 1].chars().count() };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
        }
        slots[slot] = Some(e);
    }
    let mut take = |i: usize| {
        slots[i].take().ok_or_else(|| Error::Parse {
            line: last_line.max(1),
            column: 1,
            message: format!("missing definition of `{}`", NAMES[i]),
        })
    };
    Ok(ExprDensity { logpdf: take(0)?, d1: take(1)?, d2: take(2)?, d3: take(3)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = Expr::parse("-y^2/2 + 3*2", 1).unwrap();
        assert_eq!(e.eval(2.0), 4.0);
        let e = Expr::parse("2^3^2", 1).unwrap();
        assert_eq!(e.eval(0.0), 512.0);
        let e = Expr::parse("Phi(0) + phi(0)*sqrt(2*pi) + log(exp(1.5e0))", 1).unwrap();
        assert!((e.eval(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn error_positions() {
        match Expr::parse("1 + foo(y)", 3) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 5)),
            other => panic!("{other:?}"),
        }
        match parse_density_file("logpdf = -y^2/2\nd1 = -y +\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_density_file("logpdf = 1\nd1 = 1\nd2 = 1"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn file_round_trip() {
        let d = parse_density_file(
            "# standard normal\nlogpdf = -y^2/2 - log(sqrt(2*pi))\nd1 = -y\nd2 = -1\nd3 = 0\n",
        )
        .unwrap();
        assert!((d.ln_pdf(1.0) + 0.5 + 0.918_938_533_204_672_8).abs() < 1e-15);
        assert_eq!(d.log_deriv(1, 2.0), -2.0);
    }
}
