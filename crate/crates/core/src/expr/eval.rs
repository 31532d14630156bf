use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{BinOp, Dual, Expr, ExprError, Func};

/// Number type the evaluator runs over: plain `f64` or a [`Dual`].
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn lift(v: f64) -> Self;
    fn value(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, k: u32) -> Self;
}

impl Scalar for f64 {
    fn lift(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, k: u32) -> Self {
        (0..k).fold(1.0, |acc, _| acc * self)
    }
}

impl Scalar for Dual {
    fn lift(v: f64) -> Self {
        Dual::constant(v)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, e * self.deriv)
    }
    fn ln(self) -> Self {
        Dual::new(self.value.ln(), self.deriv / self.value)
    }
    fn sin(self) -> Self {
        Dual::new(self.value.sin(), self.value.cos() * self.deriv)
    }
    fn cos(self) -> Self {
        Dual::new(self.value.cos(), -self.value.sin() * self.deriv)
    }
    // The kink at zero takes the right-hand slope.
    fn abs(self) -> Self {
        if self.value >= 0.0 {
            self
        } else {
            -self
        }
    }
    fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Dual::constant(1.0);
        }
        let lower = Scalar::powi(self.value, k - 1);
        Dual::new(lower * self.value, f64::from(k) * lower * self.deriv)
    }
}

fn domain(node: &Expr, message: &str) -> ExprError {
    ExprError::Domain {
        node: format!("{node:?}"),
        message: message.to_string(),
    }
}

fn eval_generic<T: Scalar>(e: &Expr, x: &[T]) -> Result<T, ExprError> {
    Ok(match e {
        Expr::Const(c) => T::lift(*c),
        Expr::Var(i) => *x.get(*i).ok_or(ExprError::VariableOutOfRange {
            index: *i,
            dim: x.len(),
        })?,
        Expr::Neg(inner) => -eval_generic(inner, x)?,
        Expr::Binary(op, l, r) => {
            let a = eval_generic(l, x)?;
            let b = eval_generic(r, x)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    a / b
                }
            }
        }
        Expr::Pow(base, k) => eval_generic(base, x)?.powi(*k),
        Expr::Call(func, arg) => {
            let a = eval_generic(arg, x)?;
            match func {
                Func::Exp => a.exp(),
                Func::Ln => {
                    if a.value() <= 0.0 {
                        return Err(domain(e, "logarithm of a nonpositive value"));
                    }
                    a.ln()
                }
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Abs => a.abs(),
            }
        }
        Expr::Piecewise {
            branches,
            otherwise,
        } => {
            for (cond, body) in branches {
                let l = eval_generic(&cond.lhs, x)?.value();
                let r = eval_generic(&cond.rhs, x)?.value();
                if cond.relation.holds(l, r) {
                    return eval_generic(body, x);
                }
            }
            eval_generic(otherwise, x)?
        }
    })
}

pub fn eval(e: &Expr, x: &[f64]) -> Result<f64, ExprError> {
    eval_generic(e, x)
}

/// Value and exact gradient of the active branch, one dual sweep per variable.
pub fn eval_with_gradient(e: &Expr, x: &[f64]) -> Result<(f64, Vec<f64>), ExprError> {
    if x.is_empty() {
        return Ok((eval(e, x)?, Vec::new()));
    }
    let mut seeded: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut gradient = Vec::with_capacity(x.len());
    let mut value = 0.0;
    for i in 0..x.len() {
        seeded[i].deriv = 1.0;
        let out = eval_generic(e, &seeded)?;
        seeded[i].deriv = 0.0;
        value = out.value;
        gradient.push(out.deriv);
    }
    Ok((value, gradient))
}
