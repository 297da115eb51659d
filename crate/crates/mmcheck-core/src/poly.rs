//! Dense univariate polynomials with real coefficients, and rational
//! functions whose denominators are kept in factored form (roots with
//! multiplicities). Residues at poles of known order are extracted through
//! local Taylor-series arithmetic at the pole, so the factored denominator
//! is never expanded.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::complex::Complex;
use crate::error::{Error, Result};

/// Polynomial in one variable, coefficients stored in ascending degree.
///
/// The representation is canonical: no trailing zero coefficients, and the
/// zero polynomial has an empty coefficient list.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The polynomial `p(t) = t`.
    pub fn variable() -> Self {
        Self::from_coeffs(vec![0.0, 1.0])
    }

    /// Builds from ascending-degree coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Monic polynomial with the given roots; the empty product is 1.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Self::constant(1.0);
        for &r in roots {
            p = &p * &Self::from_coeffs(vec![-r, 1.0]);
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `t^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn eval_complex(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::ZERO, |acc, &c| acc * z + Complex::from_real(c))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    /// k-th formal derivative.
    pub fn derivative_n(&self, k: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..k {
            if p.is_zero() {
                break;
            }
            p = p.derivative();
        }
        p
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push(c / (k as f64 + 1.0));
        }
        Self::from_coeffs(out)
    }

    /// Exact integral over `[a, b]` via the antiderivative.
    pub fn integral_on(&self, a: f64, b: f64) -> f64 {
        let f = self.antiderivative();
        f.eval(b) - f.eval(a)
    }

    /// Coefficients of `p(c + u)` as a polynomial in `u` (synthetic shift).
    pub fn taylor_shift(&self, c: f64) -> Self {
        let mut a = self.coeffs.clone();
        let n = a.len();
        if n >= 2 {
            for k in 0..n - 1 {
                for j in (k..n - 1).rev() {
                    a[j] += c * a[j + 1];
                }
            }
        }
        Self::from_coeffs(a)
    }

    /// The polynomial `t ↦ p(alpha·t + beta)`.
    pub fn compose_affine(&self, alpha: f64, beta: f64) -> Self {
        let shifted = self.taylor_shift(beta);
        let mut out = shifted.coeffs;
        let mut pow = 1.0;
        for c in out.iter_mut() {
            *c *= pow;
            pow *= alpha;
        }
        Self::from_coeffs(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, c) in out.iter_mut().enumerate() {
            *c = self.coeff(k) + rhs.coeff(k);
        }
        Polynomial::from_coeffs(out)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, c) in out.iter_mut().enumerate() {
            *c = self.coeff(k) - rhs.coeff(k);
        }
        Polynomial::from_coeffs(out)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scaled(-1.0)
    }
}

/// Binomial coefficient as f64; exact for the small orders used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

// ---------------------------------------------------------------------------
// Truncated power series helpers (coefficients of u^0..u^(len-1))
// ---------------------------------------------------------------------------

pub(crate) fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal series of `a` with `a[0] != 0`.
pub(crate) fn series_recip(a: &[f64], len: usize) -> Vec<f64> {
    debug_assert!(a[0] != 0.0);
    let mut out = vec![0.0; len];
    out[0] = 1.0 / a[0];
    for k in 1..len {
        let mut s = 0.0;
        for j in 1..=k {
            s += a.get(j).copied().unwrap_or(0.0) * out[k - j];
        }
        out[k] = -s / a[0];
    }
    out
}

/// Coefficients of `(delta + u)^mult` as a series in `u`.
pub(crate) fn shifted_factor_series(delta: f64, mult: u32, len: usize) -> Vec<f64> {
    let m = mult as usize;
    let mut out = vec![0.0; len];
    for (j, c) in out.iter_mut().enumerate().take(m + 1) {
        *c = binomial(m, j) * delta.powi((m - j) as i32);
    }
    out
}

// ---------------------------------------------------------------------------
// Rational functions
// ---------------------------------------------------------------------------

/// Rational function `num(z) / (cofactor(z) · ∏ᵢ (z − rootᵢ)^multᵢ)`.
///
/// The factored part of the denominator carries pairwise distinct roots;
/// the polynomial cofactor collects any remaining denominator with no
/// recorded roots.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    num: Polynomial,
    poles: Vec<(f64, u32)>,
    cofactor: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, poles: Vec<(f64, u32)>) -> Result<Self> {
        Self::with_cofactor(num, poles, Polynomial::constant(1.0))
    }

    pub fn with_cofactor(
        num: Polynomial,
        poles: Vec<(f64, u32)>,
        cofactor: Polynomial,
    ) -> Result<Self> {
        if cofactor.is_zero() {
            return Err(Error::InvalidArgument(
                "denominator cofactor must be nonzero".into(),
            ));
        }
        for (i, &(ri, mi)) in poles.iter().enumerate() {
            if !ri.is_finite() || mi == 0 {
                return Err(Error::InvalidArgument(
                    "poles must be finite with positive multiplicity".into(),
                ));
            }
            for &(rj, _) in &poles[..i] {
                if ri == rj {
                    return Err(Error::InvalidArgument(format!(
                        "denominator root {ri} listed twice; merge multiplicities instead"
                    )));
                }
            }
        }
        Ok(Self {
            num,
            poles,
            cofactor,
        })
    }

    /// Builds a rational function after merging roots that lie within
    /// `merge_tol` of each other (multiplicities add up).
    pub fn merged(num: Polynomial, raw_roots: &[(f64, u32)], merge_tol: f64) -> Result<Self> {
        let mut sorted: Vec<(f64, u32)> = raw_roots.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, u32)> = Vec::new();
        for (r, m) in sorted {
            match merged.last_mut() {
                Some((prev, pm)) if (r - *prev).abs() <= merge_tol => *pm += m,
                _ => merged.push((r, m)),
            }
        }
        Self::new(num, merged)
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn poles(&self) -> &[(f64, u32)] {
        &self.poles
    }

    pub fn cofactor(&self) -> &Polynomial {
        &self.cofactor
    }

    pub fn numerator_degree(&self) -> usize {
        self.num.degree().unwrap_or(0)
    }

    pub fn denominator_degree(&self) -> usize {
        let factored: u32 = self.poles.iter().map(|&(_, m)| m).sum();
        factored as usize + self.cofactor.degree().unwrap_or(0)
    }

    /// Order of decay at infinity: `deg(den) − deg(num)`.
    pub fn decay_order(&self) -> i64 {
        self.denominator_degree() as i64 - self.numerator_degree() as i64
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut den = self.cofactor.eval(x);
        for &(r, m) in &self.poles {
            den *= (x - r).powi(m as i32);
        }
        if den == 0.0 {
            return Err(Error::Singular {
                at: x,
                context: "rational function evaluated at a denominator zero".into(),
            });
        }
        Ok(self.num.eval(x) / den)
    }

    pub fn eval_complex(&self, z: Complex) -> Result<Complex> {
        let mut den = self.cofactor.eval_complex(z);
        for &(r, m) in &self.poles {
            den = den * (z - Complex::from_real(r)).powi(m);
        }
        if den.abs() == 0.0 {
            return Err(Error::Singular {
                at: z.re,
                context: "rational function evaluated at a denominator zero".into(),
            });
        }
        Ok(self.num.eval_complex(z) / den)
    }

    fn pole_index(&self, pole: f64, multiplicity: u32) -> Result<usize> {
        let tol = 1e-12 * (1.0 + pole.abs());
        let idx = self
            .poles
            .iter()
            .position(|&(r, _)| (r - pole).abs() <= tol)
            .ok_or(Error::PoleMismatch { pole, multiplicity })?;
        if self.poles[idx].1 != multiplicity {
            return Err(Error::PoleMismatch { pole, multiplicity });
        }
        Ok(idx)
    }

    /// Residue at a recorded pole of the stated multiplicity `m`:
    /// the value `(1/(m−1)!) · dᵐ⁻¹/dzᵐ⁻¹ [(z−pole)ᵐ r(z)]` at the pole,
    /// computed by exact series arithmetic local to the pole. The factored
    /// denominator is never expanded.
    pub fn residue(&self, pole: f64, multiplicity: u32) -> Result<f64> {
        let idx = self.pole_index(pole, multiplicity)?;
        let p = self.poles[idx].0;
        let m = multiplicity as usize;

        // First m Taylor coefficients of the numerator about the pole.
        let num_u = self.num.taylor_shift(p);

        // Series of the de-singularized denominator about the pole.
        let mut den_series: Vec<f64> = self.cofactor.taylor_shift(p).coeffs().to_vec();
        den_series.resize(m.max(den_series.len()), 0.0);
        den_series.truncate(m);
        if den_series.is_empty() {
            den_series.push(self.cofactor.eval(p));
        }
        for (j, &(r, mult)) in self.poles.iter().enumerate() {
            if j == idx {
                continue;
            }
            den_series = series_mul(&den_series, &shifted_factor_series(p - r, mult, m), m);
        }
        if den_series[0] == 0.0 {
            return Err(Error::Singular {
                at: p,
                context: "denominator cofactor vanishes at the pole".into(),
            });
        }
        let recip = series_recip(&den_series, m);

        let mut res = 0.0;
        for j in 0..m {
            res += num_u.coeff(j) * recip[m - 1 - j];
        }
        Ok(res)
    }

    /// Residues at all recorded poles, in stored order.
    pub fn residues(&self) -> Result<Vec<(f64, f64)>> {
        self.poles
            .iter()
            .map(|&(r, m)| Ok((r, self.residue(r, m)?)))
            .collect()
    }
}

/// Residue in `z`, at the pole `poles[idx]`, of a rational function whose
/// numerator has polynomial-in-`t` coefficients:
///
/// `num(z, t) = Σ_l num_in_z[l](t) · z^l`, denominator `∏ (z − rootᵢ)^multᵢ`.
///
/// The result is a polynomial in `t`. This is how the weight kernels obtain
/// exact piece polynomials instead of per-point numeric residues.
pub fn residue_in_z(
    num_in_z: &[Polynomial],
    poles: &[(f64, u32)],
    idx: usize,
) -> Result<Polynomial> {
    let (p, mult) = *poles
        .get(idx)
        .ok_or_else(|| Error::InvalidArgument("pole index out of range".into()))?;
    let m = mult as usize;

    // Shift the numerator to z = p + u; keep the first m coefficients in u.
    let mut num_u: Vec<Polynomial> = vec![Polynomial::zero(); m];
    for (l, cl) in num_in_z.iter().enumerate() {
        if cl.is_zero() {
            continue;
        }
        let top = m.min(l + 1);
        for (j, target) in num_u.iter_mut().enumerate().take(top) {
            let w = binomial(l, j) * p.powi((l - j) as i32);
            *target = &*target + &cl.scaled(w);
        }
    }

    // Reciprocal series of the remaining denominator factors at the pole.
    let mut den_series = vec![0.0; m];
    den_series[0] = 1.0;
    for (j, &(r, mj)) in poles.iter().enumerate() {
        if j == idx {
            continue;
        }
        if r == p {
            return Err(Error::InvalidArgument(
                "duplicate pole locations; merge multiplicities first".into(),
            ));
        }
        den_series = series_mul(&den_series, &shifted_factor_series(p - r, mj, m), m);
    }
    let recip = series_recip(&den_series, m);

    let mut res = Polynomial::zero();
    for (j, nj) in num_u.iter().enumerate() {
        res = &res + &nj.scaled(recip[m - 1 - j]);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn from_roots_examples() {
        assert_eq!(
            Polynomial::from_roots(&[0.0, 1.0]).coeffs(),
            &[0.0, -1.0, 1.0]
        );
        assert_eq!(Polynomial::from_roots(&[]).coeffs(), &[1.0]);
        assert_eq!(
            Polynomial::from_roots(&[2.0, 2.0]).coeffs(),
            &[4.0, -4.0, 1.0]
        );
    }

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        let p = Polynomial::from_coeffs(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.coeffs(), &[1.0, 2.0]);
        assert!(Polynomial::from_coeffs(vec![0.0, 0.0]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn derivative_examples() {
        let p = Polynomial::from_coeffs(vec![0.0, -1.0, 1.0]); // t² − t
        assert_eq!(p.derivative_n(1).coeffs(), &[-1.0, 2.0]);
        assert_eq!(Polynomial::constant(5.0).derivative_n(1).coeffs(), &[] as &[f64]);
        let c = Polynomial::from_coeffs(vec![0.0, 0.0, 0.0, 1.0]); // t³
        assert_eq!(c.derivative_n(3).coeffs(), &[6.0]);
    }

    #[test]
    fn horner_agrees_with_naive_eval() {
        let p = Polynomial::from_coeffs(vec![3.0, -1.0, 0.5, 2.0, -0.25]);
        for &t in &[-2.5f64, -1.0, 0.0, 0.3, 1.7, 4.0] {
            let naive: f64 = p
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * t.powi(k as i32))
                .sum();
            assert_abs_diff_eq!(p.eval(t), naive, epsilon = 1e-12 * (1.0 + naive.abs()));
        }
    }

    #[test]
    fn taylor_shift_matches_direct_expansion() {
        let p = Polynomial::from_coeffs(vec![1.0, -2.0, 0.0, 3.0]);
        let c = 1.7;
        let s = p.taylor_shift(c);
        for &u in &[-1.0, -0.2, 0.0, 0.5, 2.0] {
            assert_abs_diff_eq!(s.eval(u), p.eval(c + u), epsilon = 1e-12);
        }
    }

    #[test]
    fn affine_composition() {
        let p = Polynomial::from_coeffs(vec![0.0, 0.0, 1.0]); // t²
        let q = p.compose_affine(2.0, -1.0); // (2t−1)²
        assert_eq!(q.coeffs(), &[1.0, -4.0, 4.0]);
    }

    #[test]
    fn residue_simple_pole() {
        // 1/(z(z−1)): residue at 0 is −1, at 1 is +1.
        let r = RationalFunction::new(Polynomial::constant(1.0), vec![(0.0, 1), (1.0, 1)]).unwrap();
        assert_abs_diff_eq!(r.residue(0.0, 1).unwrap(), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.residue(1.0, 1).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn residue_double_pole_of_simple_square() {
        // 1/z² has zero residue at 0.
        let r = RationalFunction::new(Polynomial::constant(1.0), vec![(0.0, 2)]).unwrap();
        assert_abs_diff_eq!(r.residue(0.0, 2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn residue_rejects_unrecorded_pole() {
        let r = RationalFunction::new(Polynomial::constant(1.0), vec![(0.0, 2)]).unwrap();
        assert!(matches!(
            r.residue(1.0, 1),
            Err(Error::PoleMismatch { .. })
        ));
        assert!(matches!(
            r.residue(0.0, 1),
            Err(Error::PoleMismatch { .. })
        ));
    }

    #[test]
    fn merged_roots_accumulate_multiplicity() {
        let r = RationalFunction::merged(
            Polynomial::constant(1.0),
            &[(0.0, 2), (1e-12, 1), (1.0, 2)],
            1e-9,
        )
        .unwrap();
        assert_eq!(r.poles(), &[(0.0, 3), (1.0, 2)]);
    }

    #[test]
    fn bivariate_residue_two_node_case() {
        // Residue at z = 0 (double pole) of −(z−t)²/(z²(z−1)²), as a
        // polynomial in t. Closed form −2(λ₁−t)(t−λ₂)/(λ₁−λ₂)³ for nodes
        // (λ₁, λ₂) = (0, 1) gives 2t − 2t².
        let num = vec![
            Polynomial::from_coeffs(vec![0.0, 0.0, -1.0]), // z⁰: −t²
            Polynomial::from_coeffs(vec![0.0, 2.0]),       // z¹: 2t
            Polynomial::constant(-1.0),                    // z²: −1
        ];
        let poles = vec![(0.0, 2), (1.0, 2)];
        let res = residue_in_z(&num, &poles, 0).unwrap();
        assert_eq!(res.coeffs().len(), 3);
        assert_abs_diff_eq!(res.coeff(0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(res.coeff(1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(res.coeff(2), -2.0, epsilon = 1e-14);
    }

    #[test]
    fn series_recip_inverts() {
        let a = [2.0, -1.0, 0.5, 0.25];
        let r = series_recip(&a, 4);
        let p = series_mul(&a, &r, 4);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        for &c in &p[1..] {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-15);
        }
    }
}
