//! Certification pipelines. Three verdict paths are implemented for each
//! property:
//!
//! * a **local Hankel sweep**: the derivative Hankel matrix checked for
//!   positive semidefiniteness on a uniform grid of the interval;
//! * **Loewner / Kraus sampling**: the divided-difference matrices checked
//!   on randomized distinct tuples (with anchors drawn inside, outside and
//!   on the tuple for the convex case);
//! * a **definition oracle** probing the defining matrix inequalities on
//!   randomized pairs of real symmetric matrices.
//!
//! Verdicts are tolerance-qualified: a check whose worst normalized margin
//! stays above `−tol` certifies, one below `−10·tol` refutes, and anything
//! between is reported as marginal rather than overclaimed either way.
//!
//! All randomness is driven by a seed split deterministically per work
//! index, so results are reproducible regardless of thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divided::PointTuple;
use crate::error::{Error, Result};
use crate::expr::FunctionOracle;
use crate::interval::Interval;
use crate::matrices::{
    hankel_k, hankel_m, kraus, loewner, matrix_function, psd_verdict, SymmetricMatrix,
    DEFAULT_PSD_TOL, MARGINAL_BAND,
};

/// Fraction of the interval width used as the minimum gap when drawing
/// random distinct tuples.
pub const TUPLE_MIN_GAP_FRACTION: f64 = 1e-4;

/// Spectra of randomly drawn matrices are inset from the interval ends by
/// this fraction of the width.
const SPECTRUM_MARGIN_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Monotone,
    Convex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedPositive,
    Refuted,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Hankel,
    LoewnerOrKraus,
    DefinitionOracle,
}

/// A concrete object exhibiting a (near-)negative eigenvalue.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    HankelPoint {
        t: f64,
        min_eigenvalue: f64,
        matrix: SymmetricMatrix,
    },
    Tuple {
        points: Vec<f64>,
        anchor: Option<f64>,
        min_eigenvalue: f64,
        matrix: SymmetricMatrix,
    },
    MatrixPair {
        a: SymmetricMatrix,
        b: SymmetricMatrix,
        lambda: Option<f64>,
        min_eigenvalue: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodOutcome {
    pub method: MethodKind,
    pub verdict: Verdict,
    pub worst_margin: f64,
    pub checks: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub worst_margin: f64,
    pub methods: Vec<MethodOutcome>,
    pub methods_agreeing: Vec<MethodKind>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

/// What to certify and how hard to look.
#[derive(Clone, Debug)]
pub struct CertificationRequest {
    pub f: FunctionOracle,
    pub n: usize,
    pub property: Property,
    pub grid_size: usize,
    pub random_tuples: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub threads: usize,
}

impl CertificationRequest {
    pub fn new(f: FunctionOracle, n: usize, property: Property) -> Self {
        Self {
            f,
            n,
            property,
            grid_size: 256,
            random_tuples: 64,
            trials: 200,
            seed: 0,
            tolerance: DEFAULT_PSD_TOL,
            threads: 1,
        }
    }

    pub fn with_grid_size(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }

    pub fn with_random_tuples(mut self, random_tuples: usize) -> Self {
        self.random_tuples = random_tuples;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    fn validate(&self) -> Result<Interval> {
        let domain = self.f.domain();
        if !domain.is_bounded() {
            return Err(Error::InvalidArgument(
                "certification requires a bounded interval".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument("order n must be at least 2".into()));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidArgument("grid size must be at least 2".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let needed = match self.property {
            Property::Monotone => 2 * self.n as u32 - 1,
            Property::Convex => 2 * self.n as u32,
        };
        if self.f.max_order() < needed {
            return Err(Error::OrderExceeded {
                requested: needed,
                available: self.f.max_order(),
            });
        }
        Ok(domain)
    }
}

fn verdict_from_margin(worst_margin: f64, tol: f64) -> Verdict {
    if worst_margin < -MARGINAL_BAND * tol {
        Verdict::Refuted
    } else if worst_margin < -tol {
        Verdict::Marginal
    } else {
        Verdict::CertifiedPositive
    }
}

/// Collects the most negative margins with their witnesses.
struct MarginTracker {
    worst: f64,
    offenders: Vec<(f64, Witness)>,
}

const WITNESS_CAP: usize = 8;

impl MarginTracker {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            offenders: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, tol: f64, witness: impl FnOnce() -> Witness) {
        self.worst = self.worst.min(margin);
        if margin < -tol {
            self.offenders.push((margin, witness()));
        }
    }

    fn finish(mut self) -> (f64, Vec<Witness>) {
        self.offenders
            .sort_by(|a, b| a.0.total_cmp(&b.0));
        self.offenders.truncate(WITNESS_CAP);
        (
            self.worst,
            self.offenders.into_iter().map(|(_, w)| w).collect(),
        )
    }
}

fn rng_for(seed: u64, family: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((family << 48) ^ index);
    rng
}

const FAMILY_TUPLES: u64 = 1;
const FAMILY_ORACLE: u64 = 2;

fn uniform_open(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return lo + u * (hi - lo);
        }
    }
}

/// Sorted distinct tuple with the minimum-gap rejection rule.
fn draw_tuple(rng: &mut ChaCha8Rng, domain: &Interval, n: usize) -> Vec<f64> {
    let min_gap = TUPLE_MIN_GAP_FRACTION * domain.width();
    loop {
        let mut pts: Vec<f64> = (0..n)
            .map(|_| uniform_open(rng, domain.lower(), domain.upper()))
            .collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return pts;
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

/// Random orthogonal matrix (column-major) from Gram–Schmidt on a Gaussian
/// sample.
fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    'retry: loop {
        let mut q = vec![0.0; n * n];
        for col in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
            for prev in 0..col {
                let dot: f64 = (0..n).map(|i| v[i] * q[i * n + prev]).sum();
                for i in 0..n {
                    v[i] -= dot * q[i * n + prev];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                continue 'retry;
            }
            for i in 0..n {
                q[i * n + col] = v[i] / norm;
            }
        }
        return q;
    }
}

/// Random symmetric matrix with a known spectrum drawn uniformly from the
/// inset interval: a random orthogonal conjugation of a uniform diagonal.
fn random_symmetric(rng: &mut ChaCha8Rng, domain: &Interval, n: usize) -> (SymmetricMatrix, f64) {
    let margin = SPECTRUM_MARGIN_FRACTION * domain.width();
    let spectrum: Vec<f64> = (0..n)
        .map(|_| uniform_open(rng, domain.lower() + margin, domain.upper() - margin))
        .collect();
    let q = random_orthogonal(rng, n);
    let max_eig = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a = SymmetricMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| spectrum[k] * q[i * n + k] * q[j * n + k]).sum()
    });
    (a, max_eig)
}

/// Random positive-semidefinite Gram matrix.
fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    let g: Vec<f64> = (0..n * n).map(|_| standard_normal(rng)).collect();
    SymmetricMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum::<f64>() / n as f64
    })
}

/// Deterministic indexed parallel map: contiguous chunks over scoped
/// threads, results assembled in index order so thread count never changes
/// the outcome.
fn par_map_indexed<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let chunk = count.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slice) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = w * chunk;
                for (k, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(base + k));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("worker filled slot")).collect()
}

/// Runs the Hankel sweep and the tuple sampling for the requested property
/// and combines their verdicts; any clearly negative witness refutes.
pub fn certify(req: &CertificationRequest) -> Result<CertificationReport> {
    let domain = req.validate()?;
    let tol = req.tolerance;

    // Local sweep: Hankel matrices on the half-step-inset grid.
    let grid = domain.half_step_grid(req.grid_size)?;
    let hankel_results = par_map_indexed(grid.len(), req.threads, |i| {
        let t = grid[i];
        let m = match req.property {
            Property::Monotone => hankel_m(&req.f, t, req.n),
            Property::Convex => hankel_k(&req.f, t, req.n),
        }?;
        let v = psd_verdict(&m, tol);
        Ok::<_, Error>((t, v.min_eigenvalue, v.margin, m))
    });
    let mut hankel_tracker = MarginTracker::new();
    for r in hankel_results {
        let (t, min_eig, margin, m) = r?;
        hankel_tracker.record(margin, tol, || Witness::HankelPoint {
            t,
            min_eigenvalue: min_eig,
            matrix: m,
        });
    }
    let (hankel_worst, hankel_witnesses) = hankel_tracker.finish();
    let hankel_outcome = MethodOutcome {
        method: MethodKind::Hankel,
        verdict: verdict_from_margin(hankel_worst, tol),
        worst_margin: hankel_worst,
        checks: grid.len(),
    };

    // Global sampling: Loewner or Kraus matrices on random tuples.
    let tuple_results = par_map_indexed(req.random_tuples, req.threads, |k| {
        let mut rng = rng_for(req.seed, FAMILY_TUPLES, k as u64);
        let pts = draw_tuple(&mut rng, &domain, req.n);
        let tuple = PointTuple::new(pts.clone(), &domain)?;
        let (matrix, anchor) = match req.property {
            Property::Monotone => (loewner(&req.f, &tuple)?, None),
            Property::Convex => {
                let (lo, hi) = tuple.hull();
                let anchor = if k % 8 == 3 {
                    // Anchor on a tuple point: the confluent triple case.
                    pts[k % req.n]
                } else if k % 2 == 0 {
                    uniform_open(&mut rng, lo, hi)
                } else {
                    // Outside the hull, proportionally to the two gaps.
                    let left = lo - domain.lower();
                    let right = domain.upper() - hi;
                    let pos = uniform_open(&mut rng, 0.0, left + right);
                    if pos < left {
                        domain.lower() + pos
                    } else {
                        hi + (pos - left)
                    }
                };
                (kraus(&req.f, anchor, &tuple)?, Some(anchor))
            }
        };
        let v = psd_verdict(&matrix, tol);
        Ok::<_, Error>((pts, anchor, v.min_eigenvalue, v.margin, matrix))
    });
    let mut tuple_tracker = MarginTracker::new();
    for r in tuple_results {
        let (points, anchor, min_eig, margin, matrix) = r?;
        tuple_tracker.record(margin, tol, || Witness::Tuple {
            points,
            anchor,
            min_eigenvalue: min_eig,
            matrix,
        });
    }
    let (tuple_worst, tuple_witnesses) = tuple_tracker.finish();
    let tuple_outcome = MethodOutcome {
        method: MethodKind::LoewnerOrKraus,
        verdict: verdict_from_margin(tuple_worst, tol),
        worst_margin: tuple_worst,
        checks: req.random_tuples,
    };

    let worst_margin = hankel_worst.min(tuple_worst);
    let verdict = verdict_from_margin(worst_margin, tol);
    let methods = vec![hankel_outcome, tuple_outcome];
    let methods_agreeing = methods
        .iter()
        .filter(|m| m.verdict == verdict)
        .map(|m| m.method)
        .collect();
    let mut witnesses: Vec<Witness> = Vec::new();
    witnesses.extend(hankel_witnesses);
    witnesses.extend(tuple_witnesses);
    witnesses.truncate(WITNESS_CAP);

    Ok(CertificationReport {
        verdict,
        worst_margin,
        methods,
        methods_agreeing,
        witnesses,
        notes: Vec::new(),
    })
}

/// Monotonicity pipeline regardless of the request's property field.
pub fn certify_monotone(req: &CertificationRequest) -> Result<CertificationReport> {
    let mut req = req.clone();
    req.property = Property::Monotone;
    certify(&req)
}

/// Convexity pipeline regardless of the request's property field.
pub fn certify_convex(req: &CertificationRequest) -> Result<CertificationReport> {
    let mut req = req.clone();
    req.property = Property::Convex;
    certify(&req)
}

/// Probes the defining inequality of the property on randomized matrix
/// pairs. Monotone trials draw a comparable pair `B = A + sP` with `P`
/// positive semidefinite and a scale mix biased toward small steps; convex
/// trials draw independent pairs, alternating far pairs with nearby ones,
/// and a uniform mixing parameter.
///
/// The oracle works over real symmetric matrices; reports carry a note
/// recording the restriction.
pub fn definition_oracle(req: &CertificationRequest) -> Result<CertificationReport> {
    let domain = req.validate()?;
    let tol = req.tolerance;
    let n = req.n;

    let results = par_map_indexed(req.trials, req.threads, |k| {
        let mut rng = rng_for(req.seed, FAMILY_ORACLE, k as u64);
        match req.property {
            Property::Monotone => {
                let (a, a_max) = random_symmetric(&mut rng, &domain, n);
                let p = random_psd(&mut rng, n);
                let p_max = p.eigenvalues()[n - 1].max(f64::MIN_POSITIVE);
                let room = (domain.upper()
                    - SPECTRUM_MARGIN_FRACTION * domain.width()
                    - a_max)
                    .max(0.0);
                let u: f64 = rng.gen();
                let s = if k % 2 == 0 { u } else { u * u * u } * room / p_max;
                let b = a.add(&p.scaled(s));
                let fa = matrix_function(&req.f, &a)?;
                let fb = matrix_function(&req.f, &b)?;
                let d = fb.sub(&fa);
                let v = psd_verdict(&d, tol);
                Ok::<_, Error>((a, b, None, v.min_eigenvalue, v.margin))
            }
            Property::Convex => {
                let (a, _) = random_symmetric(&mut rng, &domain, n);
                let b = if k % 2 == 0 {
                    random_symmetric(&mut rng, &domain, n).0
                } else {
                    // A nearby second matrix probes the second-order
                    // behaviour along the segment.
                    let eps = 0.05 * domain.width() * rng.gen::<f64>();
                    let s = SymmetricMatrix::from_fn(n, |_, _| standard_normal(&mut rng));
                    clamp_spectrum(&a.add(&s.scaled(eps)), &domain)
                };
                let lambda: f64 = rng.gen();
                let c = a.scaled(lambda).add(&b.scaled(1.0 - lambda));
                let fa = matrix_function(&req.f, &a)?;
                let fb = matrix_function(&req.f, &b)?;
                let fc = matrix_function(&req.f, &c)?;
                let d = fa.scaled(lambda).add(&fb.scaled(1.0 - lambda)).sub(&fc);
                let v = psd_verdict(&d, tol);
                Ok::<_, Error>((a, b, Some(lambda), v.min_eigenvalue, v.margin))
            }
        }
    });

    let mut tracker = MarginTracker::new();
    for r in results {
        let (a, b, lambda, min_eig, margin) = r?;
        tracker.record(margin, tol, || Witness::MatrixPair {
            a,
            b,
            lambda,
            min_eigenvalue: min_eig,
        });
    }
    let (worst_margin, witnesses) = tracker.finish();
    let verdict = verdict_from_margin(worst_margin, tol);
    let outcome = MethodOutcome {
        method: MethodKind::DefinitionOracle,
        verdict,
        worst_margin,
        checks: req.trials,
    };
    Ok(CertificationReport {
        verdict,
        worst_margin,
        methods_agreeing: vec![outcome.method],
        methods: vec![outcome],
        witnesses,
        notes: vec!["definition oracle restricted to real symmetric matrices".into()],
    })
}

/// Definition oracle for monotonicity regardless of the request's property.
pub fn definition_oracle_monotone(req: &CertificationRequest) -> Result<CertificationReport> {
    let mut req = req.clone();
    req.property = Property::Monotone;
    definition_oracle(&req)
}

/// Definition oracle for convexity regardless of the request's property.
pub fn definition_oracle_convex(req: &CertificationRequest) -> Result<CertificationReport> {
    let mut req = req.clone();
    req.property = Property::Convex;
    definition_oracle(&req)
}

/// Projects the spectrum of a symmetric matrix back into the inset
/// interval, keeping the eigenbasis.
fn clamp_spectrum(a: &SymmetricMatrix, domain: &Interval) -> SymmetricMatrix {
    let margin = SPECTRUM_MARGIN_FRACTION * domain.width();
    let (lo, hi) = (domain.lower() + margin, domain.upper() - margin);
    let n = a.dim();
    let (vals, vecs) = a.eigen_decomposition();
    let clamped: Vec<f64> = vals.iter().map(|v| v.clamp(lo, hi)).collect();
    SymmetricMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| clamped[k] * vecs[i * n + k] * vecs[j * n + k])
            .sum()
    })
}

/// The first divided difference of `f` anchored at `anchor`, as an oracle:
/// `g(x) = (f(x) − f(anchor))/(x − anchor)`. Transports convexity
/// certificates to monotonicity certificates.
pub fn monotone_from_convex(f: &FunctionOracle, anchor: f64) -> Result<FunctionOracle> {
    FunctionOracle::divided_anchor(f.clone(), anchor)
}

/// Reference functions with matched safe intervals, used across the test
/// suites and exposed for quick experiments.
#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub expression: &'static str,
    pub interval: (f64, f64),
}

impl CatalogEntry {
    pub fn oracle(&self) -> FunctionOracle {
        let domain = Interval::new(self.interval.0, self.interval.1).expect("catalog interval");
        FunctionOracle::parse(self.expression, domain)
            .expect("catalog expression")
            .with_label(self.name)
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry { name: "x", expression: "x", interval: (-1.0, 1.0) },
        CatalogEntry { name: "x^2", expression: "x^2", interval: (-1.0, 1.0) },
        CatalogEntry { name: "x^3", expression: "x^3", interval: (0.1, 10.0) },
        CatalogEntry { name: "sqrt(x)", expression: "sqrt(x)", interval: (0.01, 100.0) },
        CatalogEntry { name: "1/x", expression: "1/x", interval: (0.1, 10.0) },
        CatalogEntry { name: "-1/x", expression: "-1/x", interval: (0.1, 10.0) },
        CatalogEntry { name: "log(x)", expression: "log(x)", interval: (0.01, 100.0) },
        CatalogEntry { name: "exp(x)", expression: "exp(x)", interval: (-1.0, 1.0) },
        CatalogEntry { name: "x*log(x)", expression: "x*log(x)", interval: (0.01, 10.0) },
        CatalogEntry { name: "x^1.5", expression: "x^1.5", interval: (0.01, 100.0) },
    ]
}
