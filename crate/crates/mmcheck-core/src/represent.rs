//! Numerical verification of the integral representations that express the
//! Loewner and Kraus matrices as weighted integrals of congruated Hankel
//! matrices:
//!
//! ```text
//! L(Λ, f)        = (2n−1) ∫ Cᵀ(t,Λ) M(t,f) C(t,Λ) I_Λ(t)      dt
//! Kr(λ₀, Λ, f)   =  2n    ∫ Cᵀ(t,Λ) K(t,f) C(t,Λ) J_{λ₀,Λ}(t) dt
//! ```
//!
//! The weight kernels vanish outside the hull of their pole set, so the
//! integrals truncate exactly to the support, and the integrand is smooth
//! inside each piece; fixed-order Gauss–Legendre per piece is then
//! spectrally accurate. Nodes are strictly interior, so breakpoint values
//! are never sampled.

use serde::Serialize;

use crate::divided::PointTuple;
use crate::error::Result;
use crate::expr::FunctionOracle;
use crate::kernels::{weight_i, weight_j, PiecewisePolynomial};
use crate::matrices::{coeff_matrix, hankel_k, hankel_m, kraus, loewner, SymmetricMatrix};
use crate::quad;

/// Gauss–Legendre rule applied per kernel piece.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub const DEFAULT_NODES: usize = 48;

    pub fn new(nodes_per_piece: usize) -> Self {
        let (nodes, weights) = quad::gauss_legendre(nodes_per_piece.max(1));
        Self { nodes, weights }
    }

    pub fn nodes_per_piece(&self) -> usize {
        self.nodes.len()
    }

    /// Interior nodes and scaled weights for a piece `[a, b]`.
    fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(Self::DEFAULT_NODES)
    }
}

/// Side-by-side comparison of a directly built matrix against its
/// quadrature reconstruction. Defects are entrywise maxima; the relative
/// defect is normalized by the larger max-magnitude of the two sides.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentationReport {
    pub lhs: SymmetricMatrix,
    pub rhs: SymmetricMatrix,
    pub max_abs_defect: f64,
    pub max_rel_defect: f64,
    pub pieces_used: usize,
}

impl RepresentationReport {
    fn from_sides(lhs: SymmetricMatrix, rhs: SymmetricMatrix, pieces_used: usize) -> Self {
        let max_abs_defect = lhs.max_abs_diff(&rhs);
        let scale = lhs.max_abs().max(rhs.max_abs()).max(1e-300);
        Self {
            lhs,
            rhs,
            max_abs_defect,
            max_rel_defect: max_abs_defect / scale,
            pieces_used,
        }
    }
}

fn weighted_congruence_integral<H>(
    points: &PointTuple,
    kernel: &PiecewisePolynomial,
    rule: &QuadratureRule,
    factor: f64,
    mut hankel_at: H,
) -> Result<SymmetricMatrix>
where
    H: FnMut(f64) -> Result<SymmetricMatrix>,
{
    let n = points.len();
    let mut acc = SymmetricMatrix::zero(n);
    for w in kernel.breakpoints().windows(2) {
        for (t, weight) in rule.mapped(w[0], w[1]) {
            let h = hankel_at(t)?;
            let c = coeff_matrix(t, points)?;
            let term = c.congruence(&h).scaled(weight * kernel.eval(t));
            acc = acc.add(&term);
        }
    }
    Ok(acc.scaled(factor))
}

/// Rebuilds the Loewner matrix from the weighted Hankel integral and
/// reports the entrywise defect against the direct construction.
pub fn verify_loewner_representation(
    f: &FunctionOracle,
    points: &PointTuple,
    rule: &QuadratureRule,
) -> Result<RepresentationReport> {
    let n = points.len();
    let lhs = loewner(f, points)?;
    let kernel = weight_i(points, n)?;
    let rhs = weighted_congruence_integral(points, &kernel, rule, (2 * n - 1) as f64, |t| {
        hankel_m(f, t, n)
    })?;
    Ok(RepresentationReport::from_sides(
        lhs,
        rhs,
        kernel.pieces().len(),
    ))
}

/// Rebuilds the Kraus matrix from the weighted Hankel integral and reports
/// the entrywise defect against the direct construction.
pub fn verify_kraus_representation(
    f: &FunctionOracle,
    anchor: f64,
    points: &PointTuple,
    rule: &QuadratureRule,
) -> Result<RepresentationReport> {
    let n = points.len();
    let lhs = kraus(f, anchor, points)?;
    let kernel = weight_j(anchor, points, n)?;
    let rhs = weighted_congruence_integral(points, &kernel, rule, (2 * n) as f64, |t| {
        hankel_k(f, t, n)
    })?;
    Ok(RepresentationReport::from_sides(
        lhs,
        rhs,
        kernel.pieces().len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use approx::assert_abs_diff_eq;

    fn tuple(pts: &[f64]) -> PointTuple {
        PointTuple::new(pts.to_vec(), &Interval::UNBOUNDED).unwrap()
    }

    #[test]
    fn loewner_representation_for_exp() {
        let f = FunctionOracle::parse("exp(x)", Interval::UNBOUNDED).unwrap();
        let report =
            verify_loewner_representation(&f, &tuple(&[0.0, 0.5, 1.0]), &QuadratureRule::default())
                .unwrap();
        assert!(report.max_rel_defect < 1e-8, "{}", report.max_rel_defect);
    }

    #[test]
    fn loewner_representation_polynomial_integrand_is_exact() {
        let f = FunctionOracle::parse("x^2", Interval::UNBOUNDED).unwrap();
        let report =
            verify_loewner_representation(&f, &tuple(&[-0.4, 0.9]), &QuadratureRule::default())
                .unwrap();
        assert!(report.max_rel_defect < 1e-10, "{}", report.max_rel_defect);
    }

    #[test]
    fn loewner_representation_for_resolvent_closed_form() {
        let f = FunctionOracle::resolvent(5.0);
        let pts = tuple(&[0.2, 0.8]);
        let report =
            verify_loewner_representation(&f, &pts, &QuadratureRule::default()).unwrap();
        assert!(report.max_rel_defect < 1e-9, "{}", report.max_rel_defect);
        // Closed form entry check: [a, b] of 1/(z−x) is 1/((z−a)(z−b)).
        assert_abs_diff_eq!(
            report.lhs.get(0, 1),
            1.0 / ((5.0 - 0.2) * (5.0 - 0.8)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn kraus_representation_for_square_is_all_ones() {
        let f = FunctionOracle::parse("x^2", Interval::UNBOUNDED).unwrap();
        let report = verify_kraus_representation(
            &f,
            0.3,
            &tuple(&[-0.5, 0.4, 1.1]),
            &QuadratureRule::default(),
        )
        .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(report.rhs.get(i, j), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn kraus_representation_for_recip() {
        let f = FunctionOracle::parse("1/x", Interval::new(0.5, 4.0).unwrap()).unwrap();
        let pts = PointTuple::new(vec![1.0, 2.0, 3.0], &f.domain()).unwrap();
        let report =
            verify_kraus_representation(&f, 2.0, &pts, &QuadratureRule::default()).unwrap();
        assert!(report.max_rel_defect < 1e-8, "{}", report.max_rel_defect);
    }

    #[test]
    fn kraus_representation_with_anchor_outside_hull() {
        let f = FunctionOracle::parse("exp(x)", Interval::UNBOUNDED).unwrap();
        let report = verify_kraus_representation(
            &f,
            1.5,
            &tuple(&[0.0, 1.0]),
            &QuadratureRule::default(),
        )
        .unwrap();
        assert!(report.max_rel_defect < 1e-8, "{}", report.max_rel_defect);
        assert_eq!(report.pieces_used, 2);
    }

    #[test]
    fn doubling_nodes_does_not_worsen_defect() {
        let f = FunctionOracle::parse("log(x)", Interval::new(0.5, 4.0).unwrap()).unwrap();
        let pts = PointTuple::new(vec![1.0, 1.8, 3.0], &f.domain()).unwrap();
        let coarse = verify_loewner_representation(&f, &pts, &QuadratureRule::new(48)).unwrap();
        let fine = verify_loewner_representation(&f, &pts, &QuadratureRule::new(96)).unwrap();
        assert!(fine.max_abs_defect <= coarse.max_abs_defect + 1e-12);
    }
}
