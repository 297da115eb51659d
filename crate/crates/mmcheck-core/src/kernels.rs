//! The two piecewise-polynomial weight kernels.
//!
//! For a tuple Λ of n distinct points, the kernel `I` is assembled from the
//! residues in `z`, at each λᵢ (double poles), of
//! `−(z−t)^{2n−2} / ∏(z−λᵢ)²`; the kernel `J` with anchor λ₀ likewise from
//! the residues of `−(z−t)^{2n−1} / ((z−λ₀)·∏(z−λᵢ)²)` at all n+1 poles.
//! Each residue is a polynomial in `t` that vanishes at its own pole
//! location, so the running sums form a continuous piecewise polynomial
//! supported exactly on the hull of the pole set, non-negative there, with
//! total mass `1/(2n−1)` for `I` and `1/(2n)` for `J`.
//!
//! Residues are extracted with `t` kept symbolic and centered at their own
//! pole, where every coefficient is a single product. Individual residues
//! reach `1/gap²`-scale values that cancel down to the order-one kernel, so
//! coefficients and evaluation are carried in compensated double-double
//! arithmetic; the returned values are then accurate relative to the
//! kernel itself rather than to the cancelled intermediates. Expanded
//! per-interval polynomials are kept alongside for inspection and export.

use serde::Serialize;

use crate::dd::Dd;
use crate::divided::PointTuple;
use crate::error::{Error, Result};
use crate::poly::{binomial, Polynomial};
use crate::quad;

/// Merge threshold for an anchor falling onto a tuple point, as a fraction
/// of the hull width.
pub const POLE_MERGE_FRACTION: f64 = 1e-9;

const NORMALIZATION_NODES: usize = 64;
const NORMALIZATION_PANELS: usize = 2;

/// One residue polynomial in powers of `t − pole`.
#[derive(Clone, Debug)]
struct CenteredResidue {
    pole: f64,
    coeffs: Vec<Dd>, // ascending; constant term identically zero
}

impl CenteredResidue {
    fn eval_dd(&self, t: f64) -> Dd {
        let v = Dd::diff(t, self.pole);
        let mut acc = Dd::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(v).add(*c);
        }
        acc
    }

    /// Integral from the pole to `upper` via the exact antiderivative.
    fn integral_to(&self, upper: f64) -> Dd {
        let v = Dd::diff(upper, self.pole);
        let mut acc = Dd::ZERO;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc.mul(v).add(c.div(Dd::from((k + 1) as f64)));
        }
        acc.mul(v)
    }

    /// Rounded to an ordinary polynomial in `t` (global coordinates).
    fn expanded(&self) -> Polynomial {
        let local = Polynomial::from_coeffs(self.coeffs.iter().map(|c| c.to_f64()).collect());
        local.taylor_shift(-self.pole)
    }
}

/// A continuous piecewise polynomial, identically zero outside its support.
#[derive(Clone, Debug, Serialize)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
    #[serde(skip)]
    centered: Vec<CenteredResidue>,
}

impl PiecewisePolynomial {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Expanded per-interval polynomials (inspection form). For clustered
    /// tuples their coefficients are large and evaluation near the knots
    /// loses accuracy; `eval` goes through the compensated representation
    /// instead.
    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.breakpoints[0],
            *self.breakpoints.last().expect("non-empty breakpoints"),
        )
    }

    /// Zero outside the support; inside, the compensated sum of the
    /// residues whose poles lie at or left of `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        let k = match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i.min(self.pieces.len() - 1),
            Err(i) => i - 1,
        };
        let mut acc = Dd::ZERO;
        for r in &self.centered[..=k] {
            acc = acc.add(r.eval_dd(t));
        }
        acc.to_f64()
    }

    /// Exact total integral: each residue contributes the integral of its
    /// centered antiderivative from its own pole to the right end of the
    /// support.
    pub fn total_integral(&self) -> f64 {
        let hi = *self.breakpoints.last().expect("non-empty breakpoints");
        let mut acc = Dd::ZERO;
        for r in &self.centered {
            acc = acc.add(r.integral_to(hi));
        }
        acc.to_f64()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient magnitude across the expanded pieces; a
    /// conditioning indicator for the inspection form.
    pub fn max_piece_coefficient(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.max_abs_coeff())
            .fold(0.0, f64::max)
    }

    /// Largest jump of the expanded pieces across interior breakpoints,
    /// relative to the kernel's peak magnitude. The evaluated kernel itself
    /// is continuous by construction (residues vanish at their own pole);
    /// this measures the inspection form.
    pub fn continuity_defect(&self) -> f64 {
        let scale = self.grid_extrema(256).1.abs().max(1e-300);
        let mut worst: f64 = 0.0;
        for k in 1..self.pieces.len() {
            let t = self.breakpoints[k];
            let jump = (self.pieces[k].eval(t) - self.pieces[k - 1].eval(t)).abs();
            worst = worst.max(jump / scale);
        }
        worst
    }

    /// `(min, max)` over a uniform grid of the support, endpoints included.
    pub fn grid_extrema(&self, samples: usize) -> (f64, f64) {
        let (lo, hi) = self.support();
        let n = samples.max(2);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..n {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let v = self.eval(t);
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }
}

// ---------------------------------------------------------------------------
// Double-double truncated series helpers
// ---------------------------------------------------------------------------

fn series_mul_dd(a: &[Dd], b: &[Dd], len: usize) -> Vec<Dd> {
    let mut out = vec![Dd::ZERO; len];
    for (i, ai) in a.iter().enumerate().take(len) {
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].add(ai.mul(*bj));
        }
    }
    out
}

fn series_recip_dd(a: &[Dd], len: usize) -> Vec<Dd> {
    let mut out = vec![Dd::ZERO; len];
    out[0] = a[0].recip();
    for k in 1..len {
        let mut s = Dd::ZERO;
        for j in 1..=k {
            if j < a.len() {
                s = s.add(a[j].mul(out[k - j]));
            }
        }
        out[k] = s.neg().div(a[0]);
    }
    out
}

/// Series of `(delta + u)^mult` with `delta` given exactly.
fn factor_series_dd(delta: Dd, mult: u32, len: usize) -> Vec<Dd> {
    let m = mult as usize;
    let mut out = vec![Dd::ZERO; len];
    for (j, slot) in out.iter_mut().enumerate().take(m + 1) {
        let mut p = Dd::from(binomial(m, j));
        for _ in 0..(m - j) {
            p = p.mul(delta);
        }
        *slot = p;
    }
    out
}

/// Residue in `z`, at `poles[idx]`, of `−(z−t)^degree / ∏ (z−poleⱼ)^multⱼ`,
/// written in the centered variable `v = t − pole`. With `u = z − pole` the
/// numerator is `−(u−v)^degree`, so the coefficient of `v^{degree−j}` is the
/// single product `−C(degree,j)·(−1)^{degree−j}·r_{m−1−j}`, where `r` is the
/// reciprocal series of the remaining denominator factors at the pole.
fn centered_residue(degree: usize, poles: &[(f64, u32)], idx: usize) -> CenteredResidue {
    let (pole, mult) = poles[idx];
    let m = mult as usize;
    let mut den = vec![Dd::ZERO; m];
    den[0] = Dd::from(1.0);
    for (j, &(other, mj)) in poles.iter().enumerate() {
        if j == idx {
            continue;
        }
        den = series_mul_dd(&den, &factor_series_dd(Dd::diff(pole, other), mj, m), m);
    }
    let recip = series_recip_dd(&den, m);

    let mut coeffs = vec![Dd::ZERO; degree + 1];
    for (j, r) in recip.iter().rev().enumerate().take(m) {
        let d = degree - j;
        let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
        coeffs[d] = r.mul_f64(-binomial(degree, j) * sign);
    }
    CenteredResidue { pole, coeffs }
}

fn validate_tuple(points: &PointTuple, n: usize) -> Result<Vec<f64>> {
    if points.len() != n {
        return Err(Error::InvalidArgument(format!(
            "tuple has {} points but n = {n}",
            points.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("kernels require n ≥ 2".into()));
    }
    let sorted = points.sorted_points();
    let hull = sorted[n - 1] - sorted[0];
    if points.min_separation() <= POLE_MERGE_FRACTION * hull {
        return Err(Error::InvalidPoints(
            "kernel construction requires distinct points".into(),
        ));
    }
    Ok(sorted)
}

/// Builds the kernel from sorted poles: running sums of the expanded
/// residues form the inspectable pieces, while the centered residues carry
/// the evaluation.
fn assemble(numerator_degree: usize, poles: Vec<(f64, u32)>) -> PiecewisePolynomial {
    let centered: Vec<CenteredResidue> = (0..poles.len())
        .map(|i| centered_residue(numerator_degree, &poles, i))
        .collect();
    let breakpoints: Vec<f64> = poles.iter().map(|&(p, _)| p).collect();
    let mut pieces = Vec::with_capacity(poles.len() - 1);
    let mut acc = Polynomial::zero();
    for r in centered.iter().take(poles.len() - 1) {
        acc = &acc + &r.expanded();
        pieces.push(acc.clone());
    }
    PiecewisePolynomial {
        breakpoints,
        pieces,
        centered,
    }
}

/// The weight kernel `I` for a tuple of n distinct points: piece degrees at
/// most `2n−2`, support `[min Λ, max Λ]`, total mass `1/(2n−1)`.
pub fn weight_i(points: &PointTuple, n: usize) -> Result<PiecewisePolynomial> {
    let sorted = validate_tuple(points, n)?;
    let poles: Vec<(f64, u32)> = sorted.iter().map(|&p| (p, 2)).collect();
    Ok(assemble(2 * n - 2, poles))
}

/// The weight kernel `J` for a tuple of n distinct points and an anchor
/// λ₀ anywhere in the interval: piece degrees at most `2n−1`, support the
/// hull of Λ ∪ {λ₀}, total mass `1/(2n)`. An anchor within the merge
/// threshold of a tuple point joins it as a triple pole.
pub fn weight_j(anchor: f64, points: &PointTuple, n: usize) -> Result<PiecewisePolynomial> {
    let sorted = validate_tuple(points, n)?;
    if !anchor.is_finite() {
        return Err(Error::InvalidArgument("anchor must be finite".into()));
    }
    let hull_lo = sorted[0].min(anchor);
    let hull_hi = sorted[n - 1].max(anchor);
    let merge_tol = POLE_MERGE_FRACTION * (hull_hi - hull_lo);

    let mut poles: Vec<(f64, u32)> = sorted.iter().map(|&p| (p, 2)).collect();
    match poles
        .iter_mut()
        .find(|(p, _)| (*p - anchor).abs() <= merge_tol)
    {
        Some((_, mult)) => *mult += 1,
        None => {
            poles.push((anchor, 1));
            poles.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }

    Ok(assemble(2 * n - 1, poles))
}

fn ensure_outside_support(kernel: &PiecewisePolynomial, z: f64) -> Result<()> {
    let (lo, hi) = kernel.support();
    if z >= lo && z <= hi {
        return Err(Error::InsideSupport { z, lo, hi });
    }
    Ok(())
}

fn kernel_moment(kernel: &PiecewisePolynomial, z: f64, inverse_power: i32) -> f64 {
    let (nodes, weights) = quad::gauss_legendre(NORMALIZATION_NODES);
    let mut acc = 0.0;
    for w in kernel.breakpoints().windows(2) {
        let panel = (w[1] - w[0]) / NORMALIZATION_PANELS as f64;
        for p in 0..NORMALIZATION_PANELS {
            let a = w[0] + p as f64 * panel;
            acc += quad::integrate(&nodes, &weights, a, a + panel, |t| {
                kernel.eval(t) * (z - t).powi(-inverse_power)
            });
        }
    }
    acc
}

/// Relative defect of the moment identity for `I`:
/// `(2n−1)·∫ I(t)/(z−t)^{2n} dt` against `1/p_Λ(z)²`, for real `z` outside
/// the support.
pub fn check_normalization_i(
    kernel: &PiecewisePolynomial,
    points: &PointTuple,
    z: f64,
    n: usize,
) -> Result<f64> {
    ensure_outside_support(kernel, z)?;
    let lhs = (2 * n - 1) as f64 * kernel_moment(kernel, z, 2 * n as i32);
    let p = Polynomial::from_roots(points.points()).eval(z);
    let rhs = 1.0 / (p * p);
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Relative defect of the moment identity for `J`:
/// `2n·∫ J(t)/(z−t)^{2n+1} dt` against `1/((z−λ₀)·p_Λ(z)²)`.
pub fn check_normalization_j(
    kernel: &PiecewisePolynomial,
    anchor: f64,
    points: &PointTuple,
    z: f64,
    n: usize,
) -> Result<f64> {
    ensure_outside_support(kernel, z)?;
    let lhs = (2 * n) as f64 * kernel_moment(kernel, z, 2 * n as i32 + 1);
    let p = Polynomial::from_roots(points.points()).eval(z);
    let rhs = 1.0 / ((z - anchor) * p * p);
    Ok((lhs - rhs).abs() / rhs.abs())
}
