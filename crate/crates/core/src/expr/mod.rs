//! Problem-definition expressions: parsing, printing, evaluation with
//! forward-mode gradients, and smoothness checks for piecewise definitions.

mod dual;
mod eval;
mod parse;
mod smooth;

use std::fmt;

use thiserror::Error;

pub use dual::Dual;
pub use eval::{eval, eval_with_gradient, Scalar};
pub use parse::{parse, RESERVED};
pub use smooth::{central_difference, validate_smoothness, SmoothnessReport, SmoothnessViolation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("domain error in `{node}`: {message}")]
    Domain { node: String, message: String },
    #[error("variable index {index} out of range for a point of dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Base raised to a nonnegative integer constant.
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
    /// The first branch whose condition holds is active; `otherwise` catches the rest.
    Piecewise {
        branches: Vec<(Condition, Expr)>,
        otherwise: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut best = None;
        self.visit(&mut |e| {
            if let Expr::Var(i) = e {
                best = Some(best.map_or(*i, |b: usize| b.max(*i)));
            }
        });
        best
    }

    /// Pre-order traversal over every node, including condition operands.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Piecewise {
                branches,
                otherwise,
            } => {
                for (c, e) in branches {
                    c.lhs.visit(f);
                    c.rhs.visit(f);
                    e.visit(f);
                }
                otherwise.visit(f);
            }
        }
    }

    /// Printable form using the given variable names; reparses to the same tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display { expr: self, names }
    }
}

pub struct Display<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, f)
    }
}

fn write_expr(e: &Expr, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(i) => match names.get(*i) {
            Some(n) => f.write_str(n),
            None => write!(f, "v{i}"),
        },
        Expr::Neg(inner) => {
            f.write_str("-(")?;
            write_expr(inner, names, f)?;
            f.write_str(")")
        }
        Expr::Binary(op, l, r) => {
            f.write_str("(")?;
            write_expr(l, names, f)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(r, names, f)?;
            f.write_str(")")
        }
        Expr::Pow(base, k) => {
            f.write_str("(")?;
            write_expr(base, names, f)?;
            write!(f, ")^{k}")
        }
        Expr::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(arg, names, f)?;
            f.write_str(")")
        }
        Expr::Piecewise {
            branches,
            otherwise,
        } => {
            f.write_str("piecewise(")?;
            for (c, body) in branches {
                write_expr(&c.lhs, names, f)?;
                write!(f, " {} ", c.relation.symbol())?;
                write_expr(&c.rhs, names, f)?;
                f.write_str(" : ")?;
                write_expr(body, names, f)?;
                f.write_str("; ")?;
            }
            write_expr(otherwise, names, f)?;
            f.write_str(")")
        }
    }
}
