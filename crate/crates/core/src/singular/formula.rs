//! Closed-form potentials `K(x1, x2)`.
//!
//! Grammar: `+ - * / ^`, parentheses, unary minus, numbers, `pi`, `x1`,
//! `x2`, `cos`, `sin`, `exp`, and `d(x, c1, c2)` for the periodic distance
//! from the evaluation point to `(c1, c2)`. `^` binds tighter than unary
//! minus and is right associative.

use std::fmt;

use crate::error::{Error, Result};
use crate::surface::{Point, Torus};

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Num(f64),
    X1,
    X2,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Dist(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Cos,
    Sin,
    Exp,
}

/// A parsed potential formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    source: String,
    expr: Expr,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else if c == '−' {
            out.push(Token::Sym('-'));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
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
            let exponent = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of formula".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "x1" => Ok(Expr::X1),
                "x2" => Ok(Expr::X2),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "cos" | "sin" | "exp" => {
                    let f = match name.as_str() {
                        "cos" => Func::Cos,
                        "sin" => Func::Sin,
                        _ => Func::Exp,
                    };
                    self.expect('(')?;
                    let arg = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                "d" => {
                    self.expect('(')?;
                    match self.peek() {
                        Some(Token::Ident(x)) if x == "x" => self.pos += 1,
                        _ => return Err(Error::Parse("d(...) must start with 'x'".into())),
                    }
                    self.expect(',')?;
                    let c1 = self.sum()?;
                    self.expect(',')?;
                    let c2 = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::Dist(Box::new(c1), Box::new(c2)))
                }
                other => Err(Error::Parse(format!("unknown identifier '{other}'"))),
            },
            Token::Sym(c) => Err(Error::Parse(format!("unexpected '{c}'"))),
        }
    }
}

impl Formula {
    pub fn parse(source: &str) -> Result<Self> {
        let mut p = Parser {
            tokens: tokenize(source)?,
            pos: 0,
        };
        let expr = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "trailing input in formula '{source}'"
            )));
        }
        Ok(Self {
            source: source.trim().to_string(),
            expr,
        })
    }

    pub fn eval(&self, torus: &Torus, x: Point) -> f64 {
        eval(&self.expr, torus, x)
    }
}

fn eval(e: &Expr, torus: &Torus, x: Point) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::X1 => x[0],
        Expr::X2 => x[1],
        Expr::Neg(a) => -eval(a, torus, x),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, torus, x), eval(b, torus, x));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => a.powf(b),
            }
        }
        Expr::Call(f, a) => {
            let a = eval(a, torus, x);
            match f {
                Func::Cos => a.cos(),
                Func::Sin => a.sin(),
                Func::Exp => a.exp(),
            }
        }
        Expr::Dist(c1, c2) => torus.distance(x, [eval(c1, torus, x), eval(c2, torus, x)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(src: &str, x: Point) -> f64 {
        Formula::parse(src).unwrap().eval(&Torus::unit(), x)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(at("1 + 2 * 3", [0.0, 0.0]), 7.0);
        assert_eq!(at("(1 + 2) * 3", [0.0, 0.0]), 9.0);
        assert_eq!(at("-2^2", [0.0, 0.0]), -4.0);
        assert_eq!(at("2^3^2", [0.0, 0.0]), 512.0);
        assert_eq!(at("1/4 - x1", [0.25, 0.0]), 0.0);
        assert_eq!(at("1e-1 * 10", [0.0, 0.0]), 1.0);
    }

    #[test]
    fn functions_and_distance() {
        assert!((at("cos(2*pi*x1)", [0.5, 0.0]) + 1.0).abs() < 1e-15);
        assert!((at("exp(-50*d(x, 0.5, 0.5)^2) - 0.5", [0.5, 0.5]) - 0.5).abs() < 1e-15);
        assert!((at("d(x, 0.9, 0)", [0.1, 0.0]) - 0.2).abs() < 1e-15);
        assert!((at("sin(x2) − x1", [1.0, 0.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "foo(1)", "cos 1", "d(y, 0, 0)", "(1", "1 2", "2 # 3"] {
            assert!(matches!(Formula::parse(bad), Err(Error::Parse(_))), "{bad}");
        }
    }
}
