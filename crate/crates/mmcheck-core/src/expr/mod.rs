//! Function oracle layer: a small expression language parsed to an AST and
//! differentiated to arbitrary order through jet arithmetic, together with
//! exact-derivative sources (polynomials, factored rational functions,
//! resolvents, and a catalog of built-ins with closed-form derivatives).

mod jet;
mod oracle;
mod parse;

pub use jet::Jet;
pub use oracle::{Builtin, FunctionOracle};

use crate::complex::Complex;
use crate::error::{Error, Result};

/// Expression tree. `Pow` carries a constant real exponent; `Sqrt`, `Log`
/// and non-integer powers are restricted to positive arguments at
/// evaluation time, and divisions fail at zeros of the denominator, so
/// every representable function is smooth on its domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Log(Box<Expr>),
    Exp(Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
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

    /// Negation of a literal folds into the literal, so the printed form
    /// `-c` re-parses to the identical tree.
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    /// Evaluates a closed (variable-free) subtree; `None` if it contains `x`.
    pub(crate) fn eval_constant(&self) -> Option<f64> {
        Some(match self {
            Expr::Const(c) => *c,
            Expr::Var => return None,
            Expr::Add(a, b) => a.eval_constant()? + b.eval_constant()?,
            Expr::Sub(a, b) => a.eval_constant()? - b.eval_constant()?,
            Expr::Mul(a, b) => a.eval_constant()? * b.eval_constant()?,
            Expr::Div(a, b) => a.eval_constant()? / b.eval_constant()?,
            Expr::Pow(a, p) => a.eval_constant()?.powf(*p),
            Expr::Neg(a) => -a.eval_constant()?,
            Expr::Sqrt(a) => a.eval_constant()?.sqrt(),
            Expr::Log(a) => a.eval_constant()?.ln(),
            Expr::Exp(a) => a.eval_constant()?.exp(),
        })
    }

    fn jet(&self, x: &Jet) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(*c, x.order()),
            Expr::Var => x.clone(),
            Expr::Add(a, b) => a.jet(x)?.add(&b.jet(x)?),
            Expr::Sub(a, b) => a.jet(x)?.sub(&b.jet(x)?),
            Expr::Mul(a, b) => a.jet(x)?.mul(&b.jet(x)?),
            Expr::Div(a, b) => a.jet(x)?.div(&b.jet(x)?)?,
            Expr::Pow(a, p) => a.jet(x)?.powf(*p)?,
            Expr::Neg(a) => a.jet(x)?.neg(),
            Expr::Sqrt(a) => a.jet(x)?.sqrt()?,
            Expr::Log(a) => a.jet(x)?.ln()?,
            Expr::Exp(a) => a.jet(x)?.exp(),
        })
    }

    /// Complex evaluation for the analytic fragment of the language:
    /// rational operations, integer powers and `exp`. Branch-cut nodes
    /// (`sqrt`, `log`, fractional powers) refuse.
    fn eval_complex(&self, z: Complex) -> Result<Complex> {
        Ok(match self {
            Expr::Const(c) => Complex::from_real(*c),
            Expr::Var => z,
            Expr::Add(a, b) => a.eval_complex(z)? + b.eval_complex(z)?,
            Expr::Sub(a, b) => a.eval_complex(z)? - b.eval_complex(z)?,
            Expr::Mul(a, b) => a.eval_complex(z)? * b.eval_complex(z)?,
            Expr::Div(a, b) => {
                let den = b.eval_complex(z)?;
                if den.abs() == 0.0 {
                    return Err(Error::Singular {
                        at: z.re,
                        context: "division by zero on the contour".into(),
                    });
                }
                a.eval_complex(z)? / den
            }
            Expr::Pow(a, p) => {
                if p.fract() != 0.0 || *p < 0.0 {
                    if p.fract() != 0.0 {
                        return Err(Error::NotAnalytic);
                    }
                    let base = a.eval_complex(z)?;
                    if base.abs() == 0.0 {
                        return Err(Error::Singular {
                            at: z.re,
                            context: "negative power of zero on the contour".into(),
                        });
                    }
                    Complex::ONE / base.powi((-*p) as u32)
                } else {
                    a.eval_complex(z)?.powi(*p as u32)
                }
            }
            Expr::Neg(a) => -a.eval_complex(z)?,
            Expr::Exp(a) => a.eval_complex(z)?.exp(),
            Expr::Sqrt(_) | Expr::Log(_) => return Err(Error::NotAnalytic),
        })
    }

    fn substitute_affine(&self, alpha: f64, beta: f64) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var => Expr::add(
                Expr::mul(Expr::Const(alpha), Expr::Var),
                Expr::Const(beta),
            ),
            Expr::Add(a, b) => Expr::add(
                a.substitute_affine(alpha, beta),
                b.substitute_affine(alpha, beta),
            ),
            Expr::Sub(a, b) => Expr::sub(
                a.substitute_affine(alpha, beta),
                b.substitute_affine(alpha, beta),
            ),
            Expr::Mul(a, b) => Expr::mul(
                a.substitute_affine(alpha, beta),
                b.substitute_affine(alpha, beta),
            ),
            Expr::Div(a, b) => Expr::div(
                a.substitute_affine(alpha, beta),
                b.substitute_affine(alpha, beta),
            ),
            Expr::Pow(a, p) => Expr::Pow(Box::new(a.substitute_affine(alpha, beta)), *p),
            Expr::Neg(a) => Expr::neg(a.substitute_affine(alpha, beta)),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.substitute_affine(alpha, beta))),
            Expr::Log(a) => Expr::Log(Box::new(a.substitute_affine(alpha, beta))),
            Expr::Exp(a) => Expr::Exp(Box::new(a.substitute_affine(alpha, beta))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut std::fmt::Formatter<'_>, min_prec: u8) -> std::fmt::Result {
        let needs_parens = self.precedence() < min_prec
            || matches!(self, Expr::Const(c) if *c < 0.0 && min_prec > 1);
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c:?}")?,
            Expr::Var => write!(f, "x")?,
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, p) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{p:?}")?;
            }
            Expr::Sqrt(a) => {
                write!(f, "sqrt(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Log(a) => {
                write!(f, "log(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expr::Exp(a) => {
                write!(f, "exp(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A parsed expression in the variable `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Expr,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self {
            root: parse::Parser::parse(text)?,
        })
    }

    pub fn from_expr(root: Expr) -> Self {
        Self { root }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Jet of the expression at `t`, truncated at `order`.
    pub fn jet_at(&self, t: f64, order: u32) -> Result<Jet> {
        self.root.jet(&Jet::variable(t, order))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.jet_at(t, 0)?.value())
    }

    pub fn eval_complex(&self, z: Complex) -> Result<Complex> {
        self.root.eval_complex(z)
    }

    /// The expression `x ↦ f(alpha·x + beta)`.
    pub fn substitute_affine(&self, alpha: f64, beta: f64) -> Expression {
        Expression {
            root: self.root.substitute_affine(alpha, beta),
        }
    }
}

impl std::fmt::Display for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.root.fmt_prec(f, 0)
    }
}
