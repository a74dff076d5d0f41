//! Coefficient expression language in the single variable `t`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term {("+"|"-") term}
//! term   := factor {("*"|"/") factor}
//! factor := base ["^" number]
//! base   := number | "t" | ident "(" expr ")" | "(" expr ")" | "-" factor
//! ident  := sin | cos | exp | log | sqrt        constants: pi, e
//! ```
//!
//! `abs` is deliberately absent: every expression must carry two derivatives.

mod dual;
mod parse;

use std::fmt;

pub use dual::Dual2;
pub use parse::parse_expr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a literal exponent.
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn pow(a: Expr, k: f64) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    pub fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == c)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(t)?, b.eval(t)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Domain(format!("division by zero at t = {t}")));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, k) => {
                let x = a.eval(t)?;
                check_pow(x, *k, t)?;
                if k.fract() == 0.0 {
                    x.powi(*k as i32)
                } else {
                    x.powf(*k)
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("log of {x} at t = {t}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(Error::Domain(format!("sqrt of {x} at t = {t}")));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite value at t = {t}")))
        }
    }

    /// Value, first and second derivative at `t`.
    pub fn eval2(&self, t: f64) -> Result<Dual2> {
        self.eval_dual(Dual2::var(t), t)
    }

    /// Evaluates with the variable bound to an arbitrary dual number (chain rule through `x`).
    pub fn eval_dual(&self, x: Dual2, t: f64) -> Result<Dual2> {
        let v = match self {
            Expr::Const(c) => Dual2::constant(*c),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval_dual(x, t)?,
            Expr::Bin(op, a, b) => {
                let (u, w) = (a.eval_dual(x, t)?, b.eval_dual(x, t)?);
                match op {
                    BinOp::Add => u + w,
                    BinOp::Sub => u - w,
                    BinOp::Mul => u * w,
                    BinOp::Div => {
                        if w.value == 0.0 {
                            return Err(Error::Domain(format!("division by zero at t = {t}")));
                        }
                        u / w
                    }
                }
            }
            Expr::Pow(a, k) => {
                let u = a.eval_dual(x, t)?;
                check_pow(u.value, *k, t)?;
                if u.value == 0.0 && k.fract() != 0.0 && *k < 2.0 {
                    return Err(Error::Domain(format!(
                        "derivative of power {k} undefined at 0 (t = {t})"
                    )));
                }
                u.powf(*k)
            }
            Expr::Call(f, a) => {
                let u = a.eval_dual(x, t)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u.value <= 0.0 {
                            return Err(Error::Domain(format!("log of {} at t = {t}", u.value)));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u.value <= 0.0 {
                            return Err(Error::Domain(format!(
                                "sqrt of {} has no derivative (t = {t})",
                                u.value
                            )));
                        }
                        u.sqrt()
                    }
                }
            }
        };
        if v.value.is_finite() && v.d1.is_finite() && v.d2.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite value or derivative at t = {t}")))
        }
    }

    /// Replaces every occurrence of `t` by `with`.
    pub fn substitute(&self, with: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => with.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(with))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(with), b.substitute(with)),
            Expr::Pow(a, k) => Expr::pow(a.substitute(with), *k),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(with)),
        }
    }

    /// Symbolic derivative in `t`. Only zero and one factors are folded.
    pub fn diff(&self) -> Expr {
        use BinOp::*;
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Neg(a) => neg(a.diff()),
            Expr::Bin(Add, a, b) => add(a.diff(), b.diff()),
            Expr::Bin(Sub, a, b) => sub(a.diff(), b.diff()),
            Expr::Bin(Mul, a, b) => add(
                mul(a.diff(), (**b).clone()),
                mul((**a).clone(), b.diff()),
            ),
            Expr::Bin(Div, a, b) => sub(
                div(a.diff(), (**b).clone()),
                div(
                    mul((**a).clone(), b.diff()),
                    Expr::pow((**b).clone(), 2.0),
                ),
            ),
            Expr::Pow(a, k) => {
                if *k == 0.0 {
                    return Expr::Const(0.0);
                }
                let inner = if *k == 1.0 {
                    Expr::Const(1.0)
                } else if *k == 2.0 {
                    mul(Expr::Const(2.0), (**a).clone())
                } else {
                    mul(Expr::Const(*k), power((**a).clone(), k - 1.0))
                };
                mul(inner, a.diff())
            }
            Expr::Call(f, a) => {
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, u),
                    Func::Cos => neg(Expr::call(Func::Sin, u)),
                    Func::Exp => Expr::call(Func::Exp, u),
                    Func::Log => div(Expr::Const(1.0), u),
                    Func::Sqrt => div(
                        Expr::Const(1.0),
                        mul(Expr::Const(2.0), Expr::call(Func::Sqrt, u)),
                    ),
                };
                mul(outer, a.diff())
            }
        }
    }
}

fn check_pow(x: f64, k: f64, t: f64) -> Result<()> {
    if x < 0.0 && k.fract() != 0.0 {
        return Err(Error::Domain(format!("{x}^{k} at t = {t}")));
    }
    if x == 0.0 && k < 0.0 {
        return Err(Error::Domain(format!("division by zero in 0^{k} at t = {t}")));
    }
    Ok(())
}

fn neg(a: Expr) -> Expr {
    if a.is_const(0.0) {
        a
    } else {
        Expr::Neg(Box::new(a))
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) {
        b
    } else if b.is_const(0.0) {
        a
    } else {
        Expr::bin(BinOp::Add, a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_const(0.0) {
        a
    } else if a.is_const(0.0) {
        neg(b)
    } else {
        Expr::bin(BinOp::Sub, a, b)
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) || b.is_const(0.0) {
        Expr::Const(0.0)
    } else if a.is_const(1.0) {
        b
    } else if b.is_const(1.0) {
        a
    } else {
        Expr::bin(BinOp::Mul, a, b)
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_const(0.0) {
        Expr::Const(0.0)
    } else if b.is_const(1.0) {
        a
    } else {
        Expr::bin(BinOp::Div, a, b)
    }
}

fn power(a: Expr, k: f64) -> Expr {
    if k == 1.0 {
        a
    } else {
        Expr::pow(a, k)
    }
}

/// Canonical printer: binary nodes fully parenthesized, so `parse(print(e)) == e`
/// for every tree the parser can produce.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, k) => match **a {
                Expr::Pow(..) => write!(f, "({a})^{k}"),
                _ => write!(f, "{a}^{k}"),
            },
            Expr::Call(func, a) => {
                let s = a.to_string();
                if s.starts_with('(') && matches!(**a, Expr::Bin(..)) {
                    write!(f, "{}{s}", func.name())
                } else {
                    write!(f, "{}({s})", func.name())
                }
            }
        }
    }
}
