//! Divided differences in three forms: the recursive table on distinct
//! points, the confluent extension through derivative-filled blocks for
//! repeated points, and a trapezoidal contour-integral oracle for sources
//! with an analytic continuation.
//!
//! The recursive table runs in compensated (double-double) arithmetic:
//! divided differences lose roughly `log10(hull/gap)` digits per clustered
//! pair, and the compensation keeps the table accurate through the
//! separations this crate accepts.

use crate::complex::Complex;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::expr::FunctionOracle;
use crate::interval::Interval;

/// Points closer than this fraction of the hull width are treated as
/// coincident and merged into a confluent block.
pub const COINCIDENCE_FRACTION: f64 = 1e-7;

/// Distinct points closer than this fraction of the hull width trigger the
/// ill-conditioning warning on the result.
pub const WARNING_FRACTION: f64 = 1e-4;

/// An ordered tuple of points strictly inside an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTuple {
    points: Vec<f64>,
    sorted: bool,
    min_separation: f64,
}

impl PointTuple {
    pub fn new(points: Vec<f64>, domain: &Interval) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPoints("tuple must be non-empty".into()));
        }
        for &p in &points {
            if !p.is_finite() {
                return Err(Error::InvalidPoints(format!("non-finite point {p}")));
            }
            if !domain.contains(p) {
                return Err(Error::InvalidPoints(format!(
                    "point {p} is not strictly inside {domain}"
                )));
            }
        }
        let sorted = points.windows(2).all(|w| w[0] <= w[1]);
        let mut sorted_pts = points.clone();
        sorted_pts.sort_by(f64::total_cmp);
        let min_separation = sorted_pts
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            points,
            sorted,
            min_separation,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Smallest pairwise gap; infinite for a single point, zero when a
    /// point repeats exactly.
    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn sorted_points(&self) -> Vec<f64> {
        let mut s = self.points.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    pub fn hull(&self) -> (f64, f64) {
        let lo = self.points.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self
            .points
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn hull_width(&self) -> f64 {
        let (lo, hi) = self.hull();
        hi - lo
    }
}

/// A computed divided difference; `ill_conditioned` flags tuples whose
/// smallest distinct gap fell inside the cancellation warning band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DividedDifference {
    pub value: f64,
    pub ill_conditioned: bool,
}

/// The divided difference of `f` over the tuple, invariant under
/// permutations, with points closer than the coincidence threshold merged
/// into confluent (derivative-filled) blocks.
pub fn divided_difference(f: &FunctionOracle, points: &PointTuple) -> Result<DividedDifference> {
    divided_difference_points(f, points.points())
}

pub(crate) fn divided_difference_points(
    f: &FunctionOracle,
    points: &[f64],
) -> Result<DividedDifference> {
    assert!(!points.is_empty());
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let hull = sorted[sorted.len() - 1] - sorted[0];
    let merge_tol = COINCIDENCE_FRACTION * hull;

    // Group coincident points; each group is represented by its mean.
    let mut groups: Vec<(f64, usize)> = Vec::new(); // (sum, count), finalized below
    for &p in &sorted {
        match groups.last_mut() {
            Some((sum, count)) if p - *sum / *count as f64 <= merge_tol => {
                *sum += p;
                *count += 1;
            }
            _ => groups.push((p, 1)),
        }
    }
    let reps: Vec<f64> = groups.iter().map(|&(s, c)| s / c as f64).collect();
    let sizes: Vec<usize> = groups.iter().map(|&(_, c)| c).collect();

    let mut ill_conditioned = false;
    for w in reps.windows(2) {
        if w[1] - w[0] < WARNING_FRACTION * hull {
            ill_conditioned = true;
        }
    }

    // One jet per group carries the confluent diagonal entries
    // [λ,…,λ] (k+1 copies) = f⁽ᵏ⁾(λ)/k!.
    let mut jets = Vec::with_capacity(reps.len());
    for (rep, size) in reps.iter().zip(&sizes) {
        jets.push(f.jet(*rep, (*size - 1) as u32)?);
    }

    // Positions in the flattened multiset.
    let m = points.len();
    let mut z = Vec::with_capacity(m);
    let mut gid = Vec::with_capacity(m);
    for (g, (&rep, &size)) in reps.iter().zip(&sizes).enumerate() {
        for _ in 0..size {
            z.push(rep);
            gid.push(g);
        }
    }

    // Newton table over windows of increasing span.
    let mut col: Vec<Dd> = (0..m).map(|i| Dd::from(jets[gid[i]].coeff(0))).collect();
    for span in 1..m {
        let mut next = Vec::with_capacity(m - span);
        for i in 0..m - span {
            let entry = if gid[i] == gid[i + span] {
                Dd::from(jets[gid[i]].coeff(span as u32))
            } else {
                col[i + 1].sub(col[i]).div(Dd::from(z[i + span] - z[i]))
            };
            next.push(entry);
        }
        col = next;
    }

    Ok(DividedDifference {
        value: col[0].to_f64(),
        ill_conditioned,
    })
}

/// Contour-integral form of the divided difference for analytic sources:
/// the trapezoidal rule on a circle of the given radius centered at the
/// midpoint of the hull, which converges spectrally for analytic
/// integrands. The circle must enclose every point and no singularity.
pub fn divided_difference_contour(
    f: &FunctionOracle,
    points: &PointTuple,
    radius: f64,
    nodes: usize,
) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Contour(format!("radius must be positive, got {radius}")));
    }
    if nodes < 4 {
        return Err(Error::Contour("at least 4 nodes are required".into()));
    }
    let (lo, hi) = points.hull();
    let center = 0.5 * (lo + hi);
    let reach = points
        .points()
        .iter()
        .map(|p| (p - center).abs())
        .fold(0.0, f64::max);
    if reach >= radius {
        return Err(Error::Contour(format!(
            "radius {radius} does not enclose all points (need > {reach})"
        )));
    }
    if let Some(sings) = f.singularities() {
        let clearance = 1e-9 * (1.0 + radius);
        for s in sings {
            if (s - center).abs() <= radius + clearance {
                return Err(Error::Contour(format!(
                    "singularity at {s} lies on or inside the contour"
                )));
            }
        }
    }

    let n = nodes as f64;
    let mut acc = Complex::ZERO;
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n;
        let offset = Complex::new(radius * theta.cos(), radius * theta.sin());
        let zj = Complex::from_real(center) + offset;
        let mut den = Complex::ONE;
        for &p in points.points() {
            den = den * (zj - Complex::from_real(p));
        }
        acc = acc + f.eval_complex(zj)? * offset / den;
    }
    Ok(acc.re / n)
}

/// Grid estimate of the range of `f⁽ᵐ⁻¹⁾(ξ)/(m−1)!` over the hull of the
/// tuple — the mean-value envelope every divided difference must respect.
pub fn mean_value_envelope(
    f: &FunctionOracle,
    points: &PointTuple,
    grid: usize,
) -> Result<(f64, f64)> {
    let m = points.len();
    let (lo, hi) = points.hull();
    let order = (m - 1) as u32;
    let samples = if hi > lo { grid.max(2) } else { 1 };
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 0..samples {
        let xi = if samples == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (samples - 1) as f64
        };
        let c = f.jet(xi, order)?.coeff(order);
        min = min.min(c);
        max = max.max(c);
    }
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Builtin;
    use approx::assert_abs_diff_eq;

    fn oracle(text: &str) -> FunctionOracle {
        FunctionOracle::parse(text, Interval::UNBOUNDED).unwrap()
    }

    fn tuple(pts: &[f64]) -> PointTuple {
        PointTuple::new(pts.to_vec(), &Interval::UNBOUNDED).unwrap()
    }

    #[test]
    fn square_function_table_values() {
        let f = oracle("x^2");
        let dd = divided_difference(&f, &tuple(&[1.0, 3.0])).unwrap();
        assert_abs_diff_eq!(dd.value, 4.0, epsilon = 1e-13);

        // Confluent pair: [2, 2] = f'(2).
        let dd = divided_difference(&f, &tuple(&[2.0, 2.0])).unwrap();
        assert_abs_diff_eq!(dd.value, 4.0, epsilon = 1e-13);

        // Any three points give the leading coefficient.
        let dd = divided_difference(&f, &tuple(&[-0.3, 1.7, 0.4])).unwrap();
        assert_abs_diff_eq!(dd.value, 1.0, epsilon = 1e-12);

        let c = oracle("5");
        let dd = divided_difference(&c, &tuple(&[0.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(dd.value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn permutation_invariance() {
        let f = oracle("exp(x)");
        let a = divided_difference(&f, &tuple(&[0.1, 0.9, 0.4, 0.6])).unwrap();
        let b = divided_difference(&f, &tuple(&[0.6, 0.1, 0.9, 0.4])).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12 * a.value.abs());
    }

    #[test]
    fn near_coincident_points_merge() {
        let f = oracle("exp(x)");
        // Gap far below the coincidence threshold merges to a confluent pair.
        let merged = divided_difference(&f, &tuple(&[0.5, 0.5 + 1e-12, 2.0])).unwrap();
        let exact = divided_difference(&f, &tuple(&[0.5, 0.5, 2.0])).unwrap();
        assert_abs_diff_eq!(merged.value, exact.value, epsilon = 1e-10 * exact.value.abs());
    }

    #[test]
    fn warning_flag_in_the_conditioning_band() {
        let f = oracle("exp(x)");
        let flagged = divided_difference(&f, &tuple(&[0.0, 1e-5, 1.0])).unwrap();
        assert!(flagged.ill_conditioned);
        let clean = divided_difference(&f, &tuple(&[0.0, 0.5, 1.0])).unwrap();
        assert!(!clean.ill_conditioned);
    }

    #[test]
    fn contour_matches_recursive_for_polynomial() {
        let f = FunctionOracle::polynomial(
            crate::poly::Polynomial::from_coeffs(vec![0.0, 0.0, 1.0]),
            Interval::UNBOUNDED,
        );
        let pts = tuple(&[0.0, 1.0]);
        let via_contour = divided_difference_contour(&f, &pts, 2.0, 64).unwrap();
        assert_abs_diff_eq!(via_contour, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn contour_matches_recursive_for_exp() {
        let f = FunctionOracle::builtin(Builtin::Exp, Interval::UNBOUNDED).unwrap();
        let pts = tuple(&[0.0, 0.5, 1.0]);
        let recursive = divided_difference(&f, &pts).unwrap().value;
        let contour = divided_difference_contour(&f, &pts, 2.0, 128).unwrap();
        assert_abs_diff_eq!(contour, recursive, epsilon = 1e-12);
    }

    #[test]
    fn contour_on_resolvent_partial_fractions() {
        // [0, 1] of x ↦ 1/(3−x) equals 1/((3−0)(3−1)) = 1/6.
        let f = FunctionOracle::resolvent(3.0);
        let pts = tuple(&[0.0, 1.0]);
        let v = divided_difference_contour(&f, &pts, 1.5, 96).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn contour_rejects_bad_geometry() {
        let f = FunctionOracle::resolvent(3.0);
        let pts = tuple(&[0.0, 1.0]);
        // Radius too small to enclose the points.
        assert!(matches!(
            divided_difference_contour(&f, &pts, 0.3, 64),
            Err(Error::Contour(_))
        ));
        // Circle swallows the pole at 3.
        assert!(matches!(
            divided_difference_contour(&f, &pts, 4.0, 64),
            Err(Error::Contour(_))
        ));
    }

    #[test]
    fn mean_value_envelope_brackets_the_difference() {
        let f = oracle("exp(x)");
        let pts = tuple(&[0.0, 0.3, 0.9, 1.4]);
        let dd = divided_difference(&f, &pts).unwrap().value;
        let (lo, hi) = mean_value_envelope(&f, &pts, 512).unwrap();
        assert!(lo - 1e-9 <= dd && dd <= hi + 1e-9, "{lo} ≤ {dd} ≤ {hi}");
    }

    #[test]
    fn tuple_validation() {
        let domain = Interval::new(0.0, 1.0).unwrap();
        assert!(PointTuple::new(vec![], &domain).is_err());
        assert!(PointTuple::new(vec![0.0], &domain).is_err());
        assert!(PointTuple::new(vec![0.5, 1.5], &domain).is_err());
        let t = PointTuple::new(vec![0.5, 0.2, 0.9], &domain).unwrap();
        assert!(!t.is_sorted());
        assert_abs_diff_eq!(t.min_separation(), 0.3, epsilon = 1e-15);
    }
}
