//! Report envelope and emission. JSON reports are versioned, echo the full
//! run configuration, and are byte-identical for identical configurations
//! (all randomness is seeded, serialization order is fixed by struct
//! declaration order).

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use mmcheck_core::classify::{CertificationReport, MethodKind, Verdict, Witness};
use mmcheck_core::kernels::PiecewisePolynomial;
use mmcheck_core::matrices::PsdVerdict;
use mmcheck_core::represent::RepresentationReport;
use mmcheck_core::SymmetricMatrix;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    schema_version: u32,
    tool: Tool,
    command: &'static str,
    config: C,
    result: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, config: C, result: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: Tool {
                name: "mmcheck",
                version: env!("CARGO_PKG_VERSION"),
            },
            command,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultBody {
    Certification {
        property: String,
        n: usize,
        verdict: Verdict,
        worst_margin: f64,
        methods: Vec<serde_json::Value>,
        methods_agreeing: Vec<MethodKind>,
        witnesses: Vec<Witness>,
        notes: Vec<String>,
    },
    Matrix {
        which: String,
        matrix: SymmetricMatrix,
        psd: PsdVerdict,
    },
    Kernel {
        which: String,
        anchor: Option<f64>,
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
        support: (f64, f64),
        mass: f64,
    },
    Representation {
        which: String,
        lhs: SymmetricMatrix,
        rhs: SymmetricMatrix,
        max_abs_defect: f64,
        max_rel_defect: f64,
        pieces_used: usize,
        nodes_per_piece: usize,
        within_tolerance: bool,
    },
    Oracle {
        property: String,
        n: usize,
        trials: usize,
        verdict: Verdict,
        worst_margin: f64,
        witnesses: Vec<Witness>,
        notes: Vec<String>,
    },
}

impl ResultBody {
    pub fn certification(property: String, n: usize, report: &CertificationReport) -> Self {
        ResultBody::Certification {
            property,
            n,
            verdict: report.verdict,
            worst_margin: report.worst_margin,
            methods: report
                .methods
                .iter()
                .map(|m| serde_json::to_value(m).expect("method serialization"))
                .collect(),
            methods_agreeing: report.methods_agreeing.clone(),
            witnesses: report.witnesses.clone(),
            notes: report.notes.clone(),
        }
    }

    pub fn oracle(property: String, n: usize, trials: usize, report: &CertificationReport) -> Self {
        ResultBody::Oracle {
            property,
            n,
            trials,
            verdict: report.verdict,
            worst_margin: report.worst_margin,
            witnesses: report.witnesses.clone(),
            notes: report.notes.clone(),
        }
    }

    pub fn kernel(which: &str, anchor: Option<f64>, kernel: &PiecewisePolynomial) -> Self {
        ResultBody::Kernel {
            which: which.to_string(),
            anchor,
            breakpoints: kernel.breakpoints().to_vec(),
            pieces: kernel
                .pieces()
                .iter()
                .map(|p| p.coeffs().to_vec())
                .collect(),
            support: kernel.support(),
            mass: kernel.total_integral(),
        }
    }

    pub fn representation(
        which: &str,
        report: &RepresentationReport,
        nodes_per_piece: usize,
        within_tolerance: bool,
    ) -> Self {
        ResultBody::Representation {
            which: which.to_string(),
            lhs: report.lhs.clone(),
            rhs: report.rhs.clone(),
            max_abs_defect: report.max_abs_defect,
            max_rel_defect: report.max_rel_defect,
            pieces_used: report.pieces_used,
            nodes_per_piece,
            within_tolerance,
        }
    }
}

/// Human-readable rendering of a result.
pub fn render_text(result: &ResultBody) -> String {
    let mut out = String::new();
    match result {
        ResultBody::Certification {
            property,
            n,
            verdict,
            worst_margin,
            methods,
            witnesses,
            ..
        } => {
            out.push_str(&format!(
                "{property} order {n}: {} (worst margin {worst_margin:.3e})\n",
                verdict_text(verdict)
            ));
            for m in methods {
                let method = m.get("method").and_then(|v| v.as_str()).unwrap_or("?");
                let v = m.get("verdict").and_then(|v| v.as_str()).unwrap_or("?");
                let margin = m.get("worst_margin").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
                let checks = m.get("checks").and_then(|v| v.as_u64()).unwrap_or(0);
                out.push_str(&format!(
                    "  {method}: {v} over {checks} checks (worst margin {margin:.3e})\n"
                ));
            }
            render_witnesses(&mut out, witnesses);
        }
        ResultBody::Matrix { which, matrix, psd } => {
            out.push_str(&format!("{which} matrix ({0}×{0}):\n", matrix.dim()));
            out.push_str(&format!("{matrix}"));
            out.push_str(&format!(
                "psd: {} (min eigenvalue {:.6e}, margin {:.3e}, tolerance {:.1e})\n",
                psd.is_psd, psd.min_eigenvalue, psd.margin, psd.tolerance_used
            ));
        }
        ResultBody::Kernel {
            which,
            anchor,
            breakpoints,
            pieces,
            support,
            mass,
        } => {
            out.push_str(&format!("kernel {which}"));
            if let Some(a) = anchor {
                out.push_str(&format!(" (anchor {a})"));
            }
            out.push_str(&format!(
                ": support [{}, {}], mass {mass:.12}\n",
                support.0, support.1
            ));
            out.push_str(&format!("breakpoints: {breakpoints:?}\n"));
            for (i, p) in pieces.iter().enumerate() {
                out.push_str(&format!("piece {i}: {p:?}\n"));
            }
        }
        ResultBody::Representation {
            which,
            max_abs_defect,
            max_rel_defect,
            pieces_used,
            nodes_per_piece,
            within_tolerance,
            ..
        } => {
            out.push_str(&format!(
                "{which} representation: max abs defect {max_abs_defect:.3e}, \
                 max rel defect {max_rel_defect:.3e} \
                 ({pieces_used} pieces × {nodes_per_piece} nodes) — {}\n",
                if *within_tolerance { "verified" } else { "NOT verified" }
            ));
        }
        ResultBody::Oracle {
            property,
            n,
            trials,
            verdict,
            worst_margin,
            witnesses,
            notes,
        } => {
            out.push_str(&format!(
                "{property} order {n} definition oracle over {trials} trials: {} \
                 (worst margin {worst_margin:.3e})\n",
                verdict_text(verdict)
            ));
            for note in notes {
                out.push_str(&format!("  note: {note}\n"));
            }
            render_witnesses(&mut out, witnesses);
        }
    }
    out
}

fn verdict_text(v: &Verdict) -> &'static str {
    match v {
        Verdict::CertifiedPositive => "certified-positive",
        Verdict::Refuted => "refuted",
        Verdict::Marginal => "marginal",
    }
}

fn render_witnesses(out: &mut String, witnesses: &[Witness]) {
    for w in witnesses.iter().take(3) {
        match w {
            Witness::HankelPoint { t, min_eigenvalue, .. } => {
                out.push_str(&format!(
                    "  witness: local matrix at t = {t} with min eigenvalue {min_eigenvalue:.6e}\n"
                ));
            }
            Witness::Tuple {
                points,
                anchor,
                min_eigenvalue,
                ..
            } => {
                out.push_str(&format!("  witness: tuple {points:?}"));
                if let Some(a) = anchor {
                    out.push_str(&format!(" anchor {a}"));
                }
                out.push_str(&format!(" with min eigenvalue {min_eigenvalue:.6e}\n"));
            }
            Witness::MatrixPair { min_eigenvalue, lambda, .. } => {
                out.push_str("  witness: matrix pair");
                if let Some(l) = lambda {
                    out.push_str(&format!(" (lambda {l:.6})"));
                }
                out.push_str(&format!(" with min eigenvalue {min_eigenvalue:.6e}\n"));
            }
        }
    }
    if witnesses.len() > 3 {
        out.push_str(&format!("  ... and {} more witnesses\n", witnesses.len() - 3));
    }
}

/// Writes the report to the output path, or standard output when none is
/// given. Text goes to stdout by default.
pub fn emit(payload: &str, output: Option<&PathBuf>) -> std::io::Result<()> {
    match output {
        Some(path) => std::fs::write(path, payload),
        None => std::io::stdout().write_all(payload.as_bytes()),
    }
}
