//! Dense real symmetric matrices with a cyclic-Jacobi eigensolver, builders
//! for the divided-difference matrices (Loewner, Kraus) and derivative
//! Hankel matrices, the coefficient matrix that conjugates Hankel into
//! Loewner form, tolerance-qualified positive-semidefinite verdicts, and
//! matrix functions of symmetric matrices.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::divided::{divided_difference_points, PointTuple};
use crate::error::{Error, Result};
use crate::expr::FunctionOracle;

/// Default tolerance for positive-semidefinite verdicts.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

/// Verdicts with `|margin|` below this multiple of the tolerance are
/// flagged marginal in reports.
pub const MARGINAL_BAND: f64 = 10.0;

/// Dense real symmetric matrix. Builders fill both triangles from a single
/// computation, so symmetry is exact, not approximate.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>, // row-major
}

impl SymmetricMatrix {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Builds from a fallible entry function evaluated only on `i ≤ j`;
    /// the lower triangle mirrors the upper.
    pub fn try_from_fn<F>(dim: usize, mut entry: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = entry(i, j)?;
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn<F>(dim: usize, mut entry: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        Self::try_from_fn(dim, |i, j| Ok(entry(i, j))).expect("infallible entries")
    }

    /// Builds from rows, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows must form a square matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, other) in rows.iter().enumerate().take(i) {
                if row[j] != other[i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &SymmetricMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// All eigenvalues, ascending, by cyclic Jacobi sweeps.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = jacobi(self, false);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Eigendecomposition `A = U diag(vals) Uᵀ`; `U` is returned column-major
    /// (column `k` is the eigenvector of `vals[k]`).
    pub fn eigen_decomposition(&self) -> (Vec<f64>, Vec<f64>) {
        let (vals, vecs) = jacobi(self, true);
        (vals, vecs.expect("eigenvectors requested"))
    }
}

impl Serialize for SymmetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SymmetricMatrix", 2)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("rows", &self.rows())?;
        st.end()
    }
}

impl std::fmt::Display for SymmetricMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.dim {
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:+.6e}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Cyclic Jacobi with threshold sweeps. Always converges on symmetric
/// input; eigenvalues are returned ascending.
fn jacobi(m: &SymmetricMatrix, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = m.dim;
    let mut a = m.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[idx(i, i)] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let mut d: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[idx(p, q)].abs();
            }
        }
        if off == 0.0 {
            break;
        }
        let tresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let g = 100.0 * a[idx(p, q)].abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[idx(p, q)] = 0.0;
                } else if a[idx(p, q)].abs() > tresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        a[idx(p, q)] / h
                    } else {
                        let theta = 0.5 * h / a[idx(p, q)];
                        let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * a[idx(p, q)];
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    a[idx(p, q)] = 0.0;

                    let rotate = |arr: &mut [f64], i1: usize, j1: usize, i2: usize, j2: usize| {
                        let g = arr[idx(i1, j1)];
                        let h = arr[idx(i2, j2)];
                        arr[idx(i1, j1)] = g - s * (h + g * tau);
                        arr[idx(i2, j2)] = h + s * (g - h * tau);
                    };
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q);
                    }
                    for j in p + 1..q {
                        rotate(&mut a, p, j, j, q);
                    }
                    for j in q + 1..n {
                        rotate(&mut a, p, j, q, j);
                    }
                    if let Some(vv) = v.as_mut() {
                        for j in 0..n {
                            let g = vv[idx(j, p)];
                            let h = vv[idx(j, q)];
                            vv[idx(j, p)] = g - s * (h + g * tau);
                            vv[idx(j, q)] = h + s * (g - h * tau);
                        }
                    }
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            d[p] = b[p];
            z[p] = 0.0;
        }
    }

    // Sort ascending, permuting eigenvectors alongside.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vecs = v.map(|vv| {
        let mut out = vec![0.0; n * n];
        for (new_k, &old_k) in order.iter().enumerate() {
            for i in 0..n {
                out[i * n + new_k] = vv[idx(i, old_k)];
            }
        }
        out
    });
    (vals, vecs)
}

/// Tolerance-qualified positive-semidefinite decision.
/// `margin` is the minimum eigenvalue normalized by the matrix scale;
/// `is_psd` holds exactly when `margin ≥ −tol`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
    pub margin: f64,
    pub scale: f64,
}

impl PsdVerdict {
    /// Near the decision boundary in either direction.
    pub fn is_marginal(&self) -> bool {
        self.margin.abs() < MARGINAL_BAND * self.tolerance_used
    }
}

pub fn psd_verdict(a: &SymmetricMatrix, tol: f64) -> PsdVerdict {
    let min_eigenvalue = a.min_eigenvalue();
    let scale = a.max_abs();
    let margin = min_eigenvalue / (1.0 + scale);
    PsdVerdict {
        is_psd: margin >= -tol,
        min_eigenvalue,
        tolerance_used: tol,
        margin,
        scale,
    }
}

/// Loewner matrix of first divided differences `[λᵢ, λⱼ]`; diagonal entries
/// are the confluent values `f'(λᵢ)`.
pub fn loewner(f: &FunctionOracle, points: &PointTuple) -> Result<SymmetricMatrix> {
    let pts = points.points();
    SymmetricMatrix::try_from_fn(pts.len(), |i, j| {
        Ok(divided_difference_points(f, &[pts[i], pts[j]])?.value)
    })
}

/// Kraus matrix of second divided differences `[λᵢ, λⱼ, anchor]`. The anchor
/// may lie anywhere in the domain, including on a tuple point (handled
/// confluently).
pub fn kraus(f: &FunctionOracle, anchor: f64, points: &PointTuple) -> Result<SymmetricMatrix> {
    if !f.domain().contains(anchor) {
        return Err(Error::Domain(format!(
            "anchor {anchor} outside the domain {} of {}",
            f.domain(),
            f.label()
        )));
    }
    let pts = points.points();
    SymmetricMatrix::try_from_fn(pts.len(), |i, j| {
        Ok(divided_difference_points(f, &[pts[i], pts[j], anchor])?.value)
    })
}

/// Hankel matrix of scaled odd-offset derivatives:
/// entry `(i, j)` is `f⁽ⁱ⁺ʲ⁻¹⁾(t)/(i+j−1)!` (1-based indices).
pub fn hankel_m(f: &FunctionOracle, t: f64, n: usize) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let jet = f.jet(t, 2 * n as u32 - 1)?;
    SymmetricMatrix::try_from_fn(n, |i, j| Ok(jet.coeff((i + j + 1) as u32)))
}

/// Hankel matrix of scaled even-offset derivatives:
/// entry `(i, j)` is `f⁽ⁱ⁺ʲ⁾(t)/(i+j)!` (1-based indices).
pub fn hankel_k(f: &FunctionOracle, t: f64, n: usize) -> Result<SymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let jet = f.jet(t, 2 * n as u32)?;
    SymmetricMatrix::try_from_fn(n, |i, j| Ok(jet.coeff((i + j + 2) as u32)))
}

/// Coefficient matrix `C(t, Λ)`: column `j` holds the coefficients (in `y`)
/// of `∏_{k≠j} (1 + y(t − λₖ))`, so row 1 is all ones and row `i` carries
/// the degree-`(i−1)` elementary symmetric sums of the `(t − λₖ)`.
#[derive(Clone, Debug)]
pub struct CoeffMatrix {
    n: usize,
    entries: Vec<f64>, // row-major
    anchor: f64,
    points: Vec<f64>,
}

impl CoeffMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// The congruence `Cᵀ M C`, symmetric by construction.
    pub fn congruence(&self, m: &SymmetricMatrix) -> SymmetricMatrix {
        let n = self.n;
        assert_eq!(m.dim(), n);
        // B = M · C
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m.get(i, k) * self.get(k, j);
                }
                b[i * n + j] = s;
            }
        }
        SymmetricMatrix::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += self.get(k, i) * b[k * n + j];
            }
            s
        })
    }
}

pub fn coeff_matrix(t: f64, points: &PointTuple) -> Result<CoeffMatrix> {
    if points.min_separation() <= 0.0 && points.len() > 1 {
        return Err(Error::InvalidPoints(
            "coefficient matrix requires distinct points".into(),
        ));
    }
    let pts = points.points();
    let n = pts.len();
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        // Expand ∏_{k≠j} (1 + y·(t − λₖ)) by repeated convolution.
        let mut col = vec![0.0; n];
        col[0] = 1.0;
        let mut deg = 0;
        for (k, &lam) in pts.iter().enumerate() {
            if k == j {
                continue;
            }
            let c = t - lam;
            deg += 1;
            for i in (1..=deg).rev() {
                col[i] += c * col[i - 1];
            }
        }
        for i in 0..n {
            entries[i * n + j] = col[i];
        }
    }
    Ok(CoeffMatrix {
        n,
        entries,
        anchor: t,
        points: pts.to_vec(),
    })
}

/// `f(A) = U f(D) Uᵀ` from the Jacobi eigendecomposition. Every eigenvalue
/// must lie in the domain of `f`.
pub fn matrix_function(f: &FunctionOracle, a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = a.dim();
    let (vals, vecs) = a.eigen_decomposition();
    let mut fv = Vec::with_capacity(n);
    for &lam in &vals {
        fv.push(f.value(lam).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("eigenvalue {lam}: {msg}")),
            other => other,
        })?);
    }
    Ok(SymmetricMatrix::from_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += fv[k] * vecs[i * n + k] * vecs[j * n + k];
        }
        s
    }))
}
