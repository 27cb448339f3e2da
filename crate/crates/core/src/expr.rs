//! Arithmetic expressions over named variables, evaluated on jets.
//!
//! Used by the configuration format for user-defined metric fields
//! (`a_ij(x)`, `b_i(x)`, `phi(s)`) and custom volume densities.
//! Grammar: numbers, identifiers, `+ - * / ^`, parentheses, unary minus and
//! the functions `sqrt exp log ln sin cos`. `pi` is a constant.

use std::fmt;

use crate::error::{FinslerError, Result};
use crate::jets::Jet;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn err(msg: impl Into<String>) -> FinslerError {
    FinslerError::Config(format!("expression: {}", msg.into()))
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
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
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Tok::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Tok::RParen);
            i += 1;
        } else {
            return Err(err(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right associative)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(name)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let func = match name.as_str() {
                        "sqrt" => Func::Sqrt,
                        "exp" => Func::Exp,
                        "log" | "ln" => Func::Log,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        other => return Err(err(format!("unknown function '{other}'"))),
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Tok::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                        _ => Err(err("missing ')'")),
                    }
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(err("missing ')'")),
                }
            }
            other => Err(err(format!("unexpected token {other:?}"))),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let toks = tokenize(src)?;
        if toks.is_empty() {
            return Err(err("empty expression"));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(err(format!("trailing input in '{src}'")));
        }
        Ok(e)
    }

    /// Names of all variables referenced.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates on jets; `var` resolves a variable name to its jet.
    /// Constants take the space of `like`.
    pub fn eval<T: Real>(
        &self,
        like: &Jet<T>,
        var: &dyn Fn(&str) -> Option<Jet<T>>,
    ) -> Result<Jet<T>> {
        Ok(match self {
            Expr::Num(v) => Jet::constant(like.space(), T::lit(*v)),
            Expr::Var(name) => var(name).ok_or_else(|| err(format!("unknown variable '{name}'")))?,
            Expr::Neg(a) => -a.eval(like, var)?,
            Expr::Bin(op, a, b) => {
                let lhs = a.eval(like, var)?;
                if *op == BinOp::Pow {
                    if let Expr::Num(r) = **b {
                        return if r.fract() == 0.0 && r.abs() <= 64.0 {
                            lhs.powi(r as i32)
                        } else {
                            lhs.powf(T::lit(r))
                        };
                    }
                    let rhs = b.eval(like, var)?;
                    return (lhs.ln()? * rhs).exp();
                }
                let rhs = b.eval(like, var)?;
                match op {
                    BinOp::Add => lhs + rhs,
                    BinOp::Sub => lhs - rhs,
                    BinOp::Mul => lhs * rhs,
                    BinOp::Div => lhs.checked_div(&rhs)?,
                    BinOp::Pow => unreachable!(),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(like, var)?;
                match f {
                    Func::Sqrt => x.sqrt()?,
                    Func::Exp => x.exp()?,
                    Func::Log => x.ln()?,
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                }
            }
        })
    }

    /// Evaluates with `x1..xn` bound to the given jets.
    pub fn eval_coords<T: Real>(&self, x: &[Jet<T>]) -> Result<Jet<T>> {
        let like = x.first().ok_or_else(|| err("no coordinates"))?;
        self.eval(like, &|name| coord_index(name, x.len()).map(|i| x[i].clone()))
    }
}

/// `"x3"` -> `Some(2)` when `n >= 3`.
pub fn coord_index(name: &str, n: usize) -> Option<usize> {
    let k: usize = name.strip_prefix('x')?.parse().ok()?;
    (1..=n).contains(&k).then(|| k - 1)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sqrt => "sqrt",
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}
