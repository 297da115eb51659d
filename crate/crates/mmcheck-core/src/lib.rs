//! Numerical certification of matrix monotonicity and matrix convexity of
//! fixed order `n` on an open interval.
//!
//! A smooth function `f` is matrix monotone of order `n` when `A ≤ B`
//! (Loewner order, spectra inside the interval) implies `f(A) ≤ f(B)` for
//! `n×n` symmetric matrices, and matrix convex of order `n` when
//! `f(λA + (1−λ)B) ≤ λf(A) + (1−λ)f(B)`. This crate implements the three
//! classical certificates and the integral identities that connect them:
//!
//! * **Loewner / Kraus matrices** of first and second divided differences,
//!   whose positivity over all point tuples characterizes the two
//!   properties ([`matrices::loewner`], [`matrices::kraus`]);
//! * **Hankel matrices** of scaled derivatives `f⁽ⁱ⁺ʲ⁻¹⁾(t)/(i+j−1)!` and
//!   `f⁽ⁱ⁺ʲ⁾(t)/(i+j)!`, whose pointwise positivity gives equivalent local
//!   tests ([`matrices::hankel_m`], [`matrices::hankel_k`]);
//! * **weight kernels** `I` and `J` — non-negative piecewise polynomials
//!   built from residues of explicit rational functions — and the integral
//!   representations that transport Hankel positivity to Loewner/Kraus
//!   positivity ([`kernels`], [`represent`]);
//! * a **definition oracle** that probes the defining inequalities on
//!   randomized pairs of symmetric matrices ([`classify`]).
//!
//! Everything is plain `f64` with explicit tolerance policies; matrices are
//! dense, eigenvalues come from cyclic Jacobi sweeps, and all randomness is
//! seeded and reproducible.
//!
//! ```
//! use mmcheck_core::{classify, FunctionOracle, Interval};
//!
//! let f = FunctionOracle::parse("sqrt(x)", Interval::new(0.01, 100.0).unwrap()).unwrap();
//! let req = classify::CertificationRequest::new(f, 3, classify::Property::Monotone)
//!     .with_grid_size(64)
//!     .with_random_tuples(16);
//! let report = classify::certify(&req).unwrap();
//! assert_eq!(report.verdict, classify::Verdict::CertifiedPositive);
//! ```

pub mod classify;
pub(crate) mod dd;
pub mod complex;
pub mod divided;
pub mod error;
pub mod expr;
pub mod interval;
pub mod kernels;
pub mod matrices;
pub mod poly;
pub(crate) mod quad;
pub mod represent;

pub use complex::Complex;
pub use divided::PointTuple;
pub use error::{Error, Result};
pub use expr::{Builtin, Expr, Expression, FunctionOracle, Jet};
pub use interval::Interval;
pub use kernels::PiecewisePolynomial;
pub use matrices::{PsdVerdict, SymmetricMatrix};
pub use poly::{Polynomial, RationalFunction};
