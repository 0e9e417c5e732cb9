//! Declarative expression trees for chart field definitions.
//!
//! Charts define ω, J, generators and potentials as expressions over a fixed
//! elementary-function vocabulary {+, −, ×, ÷, exp, log, sqrt, sin, cos, pow,
//! atan2}, evaluated on jets. The same trees serialize to the chart JSON
//! document, so built-in examples and user-supplied charts go through one
//! code path.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jet::{Jet, JetContext};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    /// Chart coordinate by index.
    Coord(usize),
    /// Named deformation parameter by index (seeded after the coordinates).
    Param(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Pow(Box<Expr>, f64),
    Atan2(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluate on pre-seeded jets: `vars[i]` is the jet of coordinate or
    /// parameter `i`.
    pub fn eval(&self, ctx: &JetContext, vars: &[Jet]) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => ctx.constant(*c),
            Expr::Coord(i) => vars[*i].clone(),
            Expr::Param(i) => vars[*i].clone(),
            Expr::Add(a, b) => &a.eval(ctx, vars)? + &b.eval(ctx, vars)?,
            Expr::Sub(a, b) => &a.eval(ctx, vars)? - &b.eval(ctx, vars)?,
            Expr::Mul(a, b) => &a.eval(ctx, vars)? * &b.eval(ctx, vars)?,
            Expr::Div(a, b) => a.eval(ctx, vars)?.try_div(&b.eval(ctx, vars)?)?,
            Expr::Exp(a) => a.eval(ctx, vars)?.exp(),
            Expr::Log(a) => a.eval(ctx, vars)?.ln()?,
            Expr::Sqrt(a) => a.eval(ctx, vars)?.sqrt()?,
            Expr::Sin(a) => a.eval(ctx, vars)?.sin(),
            Expr::Cos(a) => a.eval(ctx, vars)?.cos(),
            Expr::Pow(a, alpha) => a.eval(ctx, vars)?.powf(*alpha)?,
            Expr::Atan2(y, x) => Jet::atan2(&y.eval(ctx, vars)?, &x.eval(ctx, vars)?)?,
        })
    }
}

// Construction helpers keep the built-in chart definitions readable.
pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}
pub fn x(i: usize) -> Expr {
    Expr::Coord(i)
}
pub fn add(a: Expr, b: Expr) -> Expr {
    Expr::Add(Box::new(a), Box::new(b))
}
pub fn sub(a: Expr, b: Expr) -> Expr {
    Expr::Sub(Box::new(a), Box::new(b))
}
pub fn mul(a: Expr, b: Expr) -> Expr {
    Expr::Mul(Box::new(a), Box::new(b))
}
pub fn div(a: Expr, b: Expr) -> Expr {
    Expr::Div(Box::new(a), Box::new(b))
}
pub fn neg(a: Expr) -> Expr {
    sub(c(0.0), a)
}
pub fn sin(a: Expr) -> Expr {
    Expr::Sin(Box::new(a))
}
pub fn cos(a: Expr) -> Expr {
    Expr::Cos(Box::new(a))
}
pub fn exp(a: Expr) -> Expr {
    Expr::Exp(Box::new(a))
}
pub fn pow(a: Expr, alpha: f64) -> Expr {
    Expr::Pow(Box::new(a), alpha)
}
