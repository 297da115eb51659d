//! Truncated Taylor (jet) arithmetic. A jet of order `k` at a point `t`
//! stores the coefficients `c_0..c_k` with `c_j = f⁽ʲ⁾(t)/j!`; arithmetic on
//! jets is exact truncated-series arithmetic, so propagating a variable jet
//! through an expression tree yields derivatives of the expression.

use crate::error::{Error, Result};

/// Neumaier-compensated sum; the Cauchy products below accumulate through
/// this to keep high-order coefficients stable.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    /// Jet of the constant function.
    pub fn constant(c: f64, order: u32) -> Self {
        let mut coeffs = vec![0.0; order as usize + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// Jet of the identity function at `t`.
    pub fn variable(t: f64, order: u32) -> Self {
        let mut coeffs = vec![0.0; order as usize + 1];
        coeffs[0] = t;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { coeffs }
    }

    /// Builds directly from scaled derivatives `c_j = f⁽ʲ⁾(t)/j!`.
    pub fn from_scaled_derivatives(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn order(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Scaled coefficient `f⁽ᵏ⁾(t)/k!`.
    pub fn coeff(&self, k: u32) -> f64 {
        self.coeffs.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Unscaled derivative `f⁽ᵏ⁾(t) = k!·c_k`.
    pub fn derivative(&self, k: u32) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k as u64 {
            fact *= j as f64;
        }
        fact * self.coeff(k)
    }

    fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.len(), rhs.len());
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.len(), rhs.len());
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.len(), rhs.len());
        let n = self.len();
        let coeffs = (0..n)
            .map(|k| compensated_sum((0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j])))
            .collect();
        Jet { coeffs }
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet> {
        debug_assert_eq!(self.len(), rhs.len());
        if rhs.coeffs[0] == 0.0 {
            return Err(Error::Domain(
                "division by an expression that vanishes at the evaluation point".into(),
            ));
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            let s = compensated_sum((1..=k).map(|j| rhs.coeffs[j] * out[k - j]));
            out[k] = (self.coeffs[k] - s) / rhs.coeffs[0];
        }
        Ok(Jet { coeffs: out })
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "sqrt requires a positive argument, got {}",
                self.coeffs[0]
            )));
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].sqrt();
        for k in 1..n {
            let s = compensated_sum((1..k).map(|j| out[j] * out[k - j]));
            out[k] = (self.coeffs[k] - s) / (2.0 * out[0]);
        }
        Ok(Jet { coeffs: out })
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].exp();
        for k in 1..n {
            let s = compensated_sum((1..=k).map(|j| j as f64 * self.coeffs[j] * out[k - j]));
            out[k] = s / k as f64;
        }
        Jet { coeffs: out }
    }

    pub fn ln(&self) -> Result<Jet> {
        if self.coeffs[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "log requires a positive argument, got {}",
                self.coeffs[0]
            )));
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].ln();
        for k in 1..n {
            let s = compensated_sum(
                (1..k).map(|j| j as f64 * out[j] * self.coeffs[k - j]),
            );
            out[k] = (k as f64 * self.coeffs[k] - s) / (k as f64 * self.coeffs[0]);
        }
        Ok(Jet { coeffs: out })
    }

    /// Integer power via binary exponentiation; exact on polynomial input.
    /// Negative exponents require a nonzero constant term.
    pub fn powi(&self, p: i64) -> Result<Jet> {
        if p < 0 {
            let pos = self.powi(-p)?;
            return Jet::constant(1.0, self.order()).div(&pos).map_err(|_| {
                Error::Domain("negative power of an expression that vanishes here".into())
            });
        }
        let mut acc = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = p as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Real power. Integer exponents dispatch to `powi`; fractional
    /// exponents require a strictly positive constant term.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        if p.fract() == 0.0 && p.abs() < 2_f64.powi(62) {
            return self.powi(p as i64);
        }
        if self.coeffs[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "x^{p} requires a positive base, got {}",
                self.coeffs[0]
            )));
        }
        // a·w' = p·a'·w with w = a^p.
        let n = self.len();
        let mut out = vec![0.0; n];
        out[0] = self.coeffs[0].powf(p);
        for k in 1..n {
            let s = compensated_sum((1..=k).map(|j| {
                (p * j as f64 - (k - j) as f64) * self.coeffs[j] * out[k - j]
            }));
            out[k] = s / (k as f64 * self.coeffs[0]);
        }
        Ok(Jet { coeffs: out })
    }
}
