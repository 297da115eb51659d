//! Smooth-function oracles: a value plus derivatives of every order up to a
//! declared cap, over an open interval. Expression sources differentiate
//! through jet arithmetic; polynomial, rational, resolvent and built-in
//! sources carry exact coefficient arithmetic or closed forms.

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::poly::{self, Polynomial, RationalFunction};

use super::jet::Jet;
use super::Expression;

/// Default cap on jet differentiation order for expression sources.
/// Orders up to 2n for n ≤ 12 stay well inside it.
pub const DEFAULT_ORDER_CAP: u32 = 24;

/// Order cap for sources with exact or closed-form derivatives
/// (bounded by where f64 factorials stop being finite).
const EXACT_ORDER_CAP: u32 = 170;

/// Catalog entry with closed-form derivatives of every order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    Exp,
    Log,
    /// `x ↦ x^p` for real `p`; fractional `p` restricted to `x > 0`.
    Power(f64),
    /// `x ↦ 1/x`.
    Recip,
    /// `x ↦ −1/x`.
    NegRecip,
    /// `x ↦ x·log x`.
    XLogX,
}

impl Builtin {
    fn scaled_derivatives(&self, t: f64, order: u32) -> Result<Vec<f64>> {
        let n = order as usize + 1;
        let mut c = vec![0.0; n];
        match self {
            Builtin::Exp => {
                let e = t.exp();
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = e / fact;
                }
            }
            Builtin::Log => {
                if t <= 0.0 {
                    return Err(Error::Domain(format!("log requires t > 0, got {t}")));
                }
                c[0] = t.ln();
                let mut tp = 1.0 / t;
                for (k, ck) in c.iter_mut().enumerate().skip(1) {
                    *ck = if k.is_multiple_of(2) { -tp } else { tp } / k as f64;
                    tp /= t;
                }
            }
            Builtin::Power(p) => {
                let integral = p.fract() == 0.0;
                if !integral && t <= 0.0 {
                    return Err(Error::Domain(format!("x^{p} requires t > 0, got {t}")));
                }
                if integral && *p < 0.0 && t == 0.0 {
                    return Err(Error::Singular {
                        at: t,
                        context: format!("x^{p} at zero"),
                    });
                }
                // c_k = [p(p−1)…(p−k+1)/k!] · t^{p−k}
                let mut coef = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        coef *= (p - (k as f64 - 1.0)) / k as f64;
                    }
                    let e = p - k as f64;
                    let tp = if integral && e.fract() == 0.0 {
                        if t == 0.0 && e == 0.0 {
                            1.0
                        } else {
                            t.powi(e as i32)
                        }
                    } else {
                        t.powf(e)
                    };
                    *ck = if coef == 0.0 { 0.0 } else { coef * tp };
                }
            }
            Builtin::Recip | Builtin::NegRecip => {
                if t == 0.0 {
                    return Err(Error::Singular {
                        at: t,
                        context: "1/x at zero".into(),
                    });
                }
                let sign = if matches!(self, Builtin::Recip) { 1.0 } else { -1.0 };
                let mut tp = 1.0 / t;
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck = sign * if k % 2 == 0 { tp } else { -tp };
                    tp /= t;
                }
            }
            Builtin::XLogX => {
                if t <= 0.0 {
                    return Err(Error::Domain(format!("x·log x requires t > 0, got {t}")));
                }
                c[0] = t * t.ln();
                if order >= 1 {
                    c[1] = t.ln() + 1.0;
                }
                let mut tp = 1.0 / t;
                for (k, ck) in c.iter_mut().enumerate().skip(2) {
                    *ck = if k.is_multiple_of(2) { tp } else { -tp } / (k as f64 * (k as f64 - 1.0));
                    tp /= t;
                }
            }
        }
        Ok(c)
    }

    fn natural_domain_ok(&self, domain: &Interval) -> bool {
        match self {
            Builtin::Exp => true,
            Builtin::Power(p) if p.fract() == 0.0 && *p >= 0.0 => true,
            Builtin::Power(p) if p.fract() == 0.0 && *p < 0.0 => !domain.contains(0.0),
            Builtin::Log | Builtin::Power(_) | Builtin::XLogX => domain.lower() >= 0.0,
            Builtin::Recip | Builtin::NegRecip => !domain.contains(0.0),
        }
    }

    fn label(&self) -> String {
        match self {
            Builtin::Exp => "exp(x)".into(),
            Builtin::Log => "log(x)".into(),
            Builtin::Power(p) => format!("x^{p:?}"),
            Builtin::Recip => "1/x".into(),
            Builtin::NegRecip => "-1/x".into(),
            Builtin::XLogX => "x*log(x)".into(),
        }
    }
}

#[derive(Clone, Debug)]
enum OracleKind {
    Expression(Expression),
    Poly(Polynomial),
    Rational(RationalFunction),
    /// `x ↦ 1/(z − x)` for real `z`.
    Resolvent { z: f64 },
    Builtin(Builtin),
    /// `x ↦ (f(x) − f(anchor))/(x − anchor)`, continuously extended at the
    /// anchor by `f'(anchor)`.
    DividedAnchor {
        inner: Box<FunctionOracle>,
        anchor: f64,
    },
}

/// A smooth real function on an open interval, exposing its value and
/// k-th derivatives up to `max_order`. Immutable after construction;
/// all operations are pure.
#[derive(Clone, Debug)]
pub struct FunctionOracle {
    kind: OracleKind,
    domain: Interval,
    max_order: u32,
    label: String,
}

impl FunctionOracle {
    pub fn parse(text: &str, domain: Interval) -> Result<Self> {
        let expr = Expression::parse(text)?;
        Ok(Self::from_expression(expr, domain))
    }

    pub fn from_expression(expr: Expression, domain: Interval) -> Self {
        let label = expr.to_string();
        Self {
            kind: OracleKind::Expression(expr),
            domain,
            max_order: DEFAULT_ORDER_CAP,
            label,
        }
    }

    pub fn polynomial(p: Polynomial, domain: Interval) -> Self {
        let label = format!("polynomial{:?}", p.coeffs());
        Self {
            kind: OracleKind::Poly(p),
            domain,
            max_order: EXACT_ORDER_CAP,
            label,
        }
    }

    pub fn rational(r: RationalFunction, domain: Interval) -> Self {
        Self {
            kind: OracleKind::Rational(r),
            domain,
            max_order: EXACT_ORDER_CAP,
            label: "rational".into(),
        }
    }

    /// The resolvent `x ↦ 1/(z − x)`, with exact derivatives
    /// `k!·(z − t)^{−k−1}`. Defined on the whole line except `x = z`.
    pub fn resolvent(z: f64) -> Self {
        Self {
            kind: OracleKind::Resolvent { z },
            domain: Interval::UNBOUNDED,
            max_order: EXACT_ORDER_CAP,
            label: format!("1/({z:?} - x)"),
        }
    }

    pub fn builtin(b: Builtin, domain: Interval) -> Result<Self> {
        if !b.natural_domain_ok(&domain) {
            return Err(Error::Domain(format!(
                "interval {domain} is not inside the natural domain of {}",
                b.label()
            )));
        }
        let label = b.label();
        Ok(Self {
            kind: OracleKind::Builtin(b),
            domain,
            max_order: EXACT_ORDER_CAP,
            label,
        })
    }

    /// The first divided difference anchored at `anchor`:
    /// `g(x) = (f(x) − f(anchor))/(x − anchor)`, with `g(anchor) = f'(anchor)`
    /// and `g⁽ᵏ⁾(anchor) = f⁽ᵏ⁺¹⁾(anchor)/(k+1)`.
    pub fn divided_anchor(inner: FunctionOracle, anchor: f64) -> Result<Self> {
        if !inner.domain.contains(anchor) {
            return Err(Error::Domain(format!(
                "anchor {anchor} outside the domain {} of {}",
                inner.domain, inner.label
            )));
        }
        if inner.max_order == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                available: 0,
            });
        }
        let domain = inner.domain;
        let max_order = inner.max_order - 1;
        let label = format!("[x, {anchor:?}] of {}", inner.label);
        Ok(Self {
            kind: OracleKind::DividedAnchor {
                inner: Box::new(inner),
                anchor,
            },
            domain,
            max_order,
            label,
        })
    }

    pub fn with_order_cap(mut self, cap: u32) -> Self {
        self.max_order = cap;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Jet of the function at `t`, truncated at `order`.
    pub fn jet(&self, t: f64, order: u32) -> Result<Jet> {
        if order > self.max_order {
            return Err(Error::OrderExceeded {
                requested: order,
                available: self.max_order,
            });
        }
        if !self.domain.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside the domain {} of {}",
                self.domain, self.label
            )));
        }
        self.jet_unchecked(t, order)
    }

    fn jet_unchecked(&self, t: f64, order: u32) -> Result<Jet> {
        let len = order as usize + 1;
        match &self.kind {
            OracleKind::Expression(e) => e.jet_at(t, order),
            OracleKind::Poly(p) => {
                let mut coeffs = p.taylor_shift(t).coeffs().to_vec();
                coeffs.resize(len, 0.0);
                coeffs.truncate(len);
                Ok(Jet::from_scaled_derivatives(coeffs))
            }
            OracleKind::Rational(r) => rational_jet(r, t, len),
            OracleKind::Resolvent { z } => {
                if t == *z {
                    return Err(Error::Singular {
                        at: t,
                        context: "resolvent evaluated at its pole".into(),
                    });
                }
                let base = 1.0 / (*z - t);
                let mut coeffs = vec![0.0; len];
                let mut acc = base;
                for c in coeffs.iter_mut() {
                    *c = acc;
                    acc *= base;
                }
                Ok(Jet::from_scaled_derivatives(coeffs))
            }
            OracleKind::Builtin(b) => {
                Ok(Jet::from_scaled_derivatives(b.scaled_derivatives(t, order)?))
            }
            OracleKind::DividedAnchor { inner, anchor } => {
                // Preferred route: expanding f at t turns the anchored
                // difference into the division-free series
                //   c^g_k = Σ_{m ≥ k+1} c^f_m · (a − t)^{m−1−k},
                // which handles the confluent case (t = anchor) exactly,
                // terminates for polynomial jets, and converges whenever
                // the anchor lies well inside the expansion's reach. The
                // quotient form amplifies rounding by (radius/|t−a|)^{k+1}
                // near the anchor, so it is used only when the series does
                // not converge — exactly where it is well-conditioned.
                let reach = order + 21;
                let fj = inner.jet_unchecked(t, reach)?;
                if let Some(coeffs) = anchored_series(&fj, t - anchor, order) {
                    return Ok(Jet::from_scaled_derivatives(coeffs));
                }
                let f_anchor = inner.jet_unchecked(*anchor, 0)?.value();
                let num = fj_truncate(&fj, order).sub(&Jet::constant(f_anchor, order));
                let mut den = vec![0.0; len];
                den[0] = t - anchor;
                if order >= 1 {
                    den[1] = 1.0;
                }
                num.div(&Jet::from_scaled_derivatives(den))
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.jet(t, 0)?.value())
    }

    /// The k-th derivative `f⁽ᵏ⁾(t)`.
    pub fn derivative(&self, k: u32, t: f64) -> Result<f64> {
        Ok(self.jet(t, k)?.derivative(k))
    }

    /// The scaled derivative `f⁽ᵏ⁾(t)/k!`.
    pub fn scaled_derivative(&self, k: u32, t: f64) -> Result<f64> {
        Ok(self.jet(t, k)?.coeff(k))
    }

    /// Analytic continuation to a complex point, for sources that extend
    /// (polynomials, rational functions, resolvents, `exp`, and the
    /// rational-with-integer-powers fragment of the expression language).
    pub fn eval_complex(&self, z: Complex) -> Result<Complex> {
        match &self.kind {
            OracleKind::Expression(e) => e.eval_complex(z),
            OracleKind::Poly(p) => Ok(p.eval_complex(z)),
            OracleKind::Rational(r) => r.eval_complex(z),
            OracleKind::Resolvent { z: pole } => {
                let den = Complex::from_real(*pole) - z;
                if den.abs() == 0.0 {
                    return Err(Error::Singular {
                        at: z.re,
                        context: "resolvent evaluated at its pole".into(),
                    });
                }
                Ok(Complex::ONE / den)
            }
            OracleKind::Builtin(b) => match b {
                Builtin::Exp => Ok(z.exp()),
                Builtin::Power(p) if p.fract() == 0.0 && *p >= 0.0 => Ok(z.powi(*p as u32)),
                Builtin::Power(p) if p.fract() == 0.0 => {
                    if z.abs() == 0.0 {
                        return Err(Error::Singular {
                            at: 0.0,
                            context: "negative power at zero".into(),
                        });
                    }
                    Ok(Complex::ONE / z.powi((-*p) as u32))
                }
                Builtin::Recip | Builtin::NegRecip => {
                    if z.abs() == 0.0 {
                        return Err(Error::Singular {
                            at: 0.0,
                            context: "1/x at zero".into(),
                        });
                    }
                    let r = Complex::ONE / z;
                    Ok(if matches!(b, Builtin::Recip) { r } else { -r })
                }
                _ => Err(Error::NotAnalytic),
            },
            OracleKind::DividedAnchor { inner, anchor } => {
                let den = z - Complex::from_real(*anchor);
                if den.abs() == 0.0 {
                    return Err(Error::Singular {
                        at: *anchor,
                        context: "divided-difference oracle at its anchor".into(),
                    });
                }
                let f_anchor = inner.jet_unchecked(*anchor, 0)?.value();
                Ok((inner.eval_complex(z)? - Complex::from_real(f_anchor)) / den)
            }
        }
    }

    /// Real singular points of the analytic continuation, when they are
    /// known in closed form. `None` means unknown (expression sources,
    /// branch-cut built-ins).
    pub fn singularities(&self) -> Option<Vec<f64>> {
        match &self.kind {
            OracleKind::Expression(_) => None,
            OracleKind::Poly(_) => Some(Vec::new()),
            OracleKind::Rational(r) => Some(r.poles().iter().map(|&(p, _)| p).collect()),
            OracleKind::Resolvent { z } => Some(vec![*z]),
            OracleKind::Builtin(b) => match b {
                Builtin::Exp => Some(Vec::new()),
                Builtin::Power(p) if p.fract() == 0.0 && *p >= 0.0 => Some(Vec::new()),
                Builtin::Power(p) if p.fract() == 0.0 => Some(vec![0.0]),
                Builtin::Recip | Builtin::NegRecip => Some(vec![0.0]),
                _ => None,
            },
            OracleKind::DividedAnchor { inner, .. } => inner.singularities(),
        }
    }

    /// The oracle `x ↦ f(alpha·x + beta)` on the pre-image interval.
    /// Supported for expression and polynomial sources.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::InvalidArgument(
                "affine reparametrization requires alpha > 0".into(),
            ));
        }
        let domain = Interval::new(
            (self.domain.lower() - beta) / alpha,
            (self.domain.upper() - beta) / alpha,
        )?;
        match &self.kind {
            OracleKind::Expression(e) => {
                Ok(Self::from_expression(e.substitute_affine(alpha, beta), domain)
                    .with_order_cap(self.max_order))
            }
            OracleKind::Poly(p) => Ok(Self::polynomial(p.compose_affine(alpha, beta), domain)),
            _ => Err(Error::InvalidArgument(
                "affine composition is supported for expression and polynomial oracles".into(),
            )),
        }
    }
}

fn fj_truncate(fj: &Jet, order: u32) -> Jet {
    Jet::from_scaled_derivatives((0..=order).map(|k| fj.coeff(k)).collect())
}

/// Coefficients of the anchored difference `(f(x) − f(a))/(x − a)` at `t`
/// from the jet of `f` at `t`, when the series in `d = t − a` converges
/// within the available reach. Returns `None` when the tail has not
/// decayed, signalling the caller to use the quotient form.
fn anchored_series(fj: &Jet, d: f64, order: u32) -> Option<Vec<f64>> {
    let reach = fj.order() as usize;
    let order = order as usize;
    if reach < order + 3 {
        return None;
    }
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut power = 1.0; // (−d)^{m−1−k}, starting at m = k+1
        let mut largest: f64 = 0.0;
        let mut tail: f64 = 0.0;
        for m in (k + 1)..=reach {
            let term = fj.coeff(m as u32) * power;
            let s = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - s) + term;
            } else {
                comp += (term - s) + sum;
            }
            sum = s;
            largest = largest.max(term.abs());
            if m + 2 > reach {
                tail += term.abs();
            }
            power *= -d;
        }
        let total = sum + comp;
        if tail > 1e-13 * total.abs().max(largest * 1e-3).max(1e-300) {
            return None;
        }
        out.push(total);
    }
    Some(out)
}

fn rational_jet(r: &RationalFunction, t: f64, len: usize) -> Result<Jet> {
    let mut num: Vec<f64> = r.numerator().taylor_shift(t).coeffs().to_vec();
    num.resize(len.max(num.len()), 0.0);
    num.truncate(len);

    let mut den: Vec<f64> = r.cofactor().taylor_shift(t).coeffs().to_vec();
    den.resize(len.max(den.len()), 0.0);
    den.truncate(len);
    for &(root, mult) in r.poles() {
        den = poly::series_mul(&den, &poly::shifted_factor_series(t - root, mult, len), len);
    }
    if den[0] == 0.0 {
        return Err(Error::Singular {
            at: t,
            context: "rational oracle evaluated at a pole".into(),
        });
    }
    let recip = poly::series_recip(&den, len);
    Ok(Jet::from_scaled_derivatives(poly::series_mul(
        &num, &recip, len,
    )))
}
