//! Kernel serialization: grid samples as CSV and the exact piecewise form as
//! JSON.
//!
//! The JSON form is
//! `{"half_width": T, "pieces": [{"region": [half-planes], "terms": [{"exp_t": [re, im], "exp_s": [re, im], "coeffs": [[[re, im], ..], ..]}]}]}`
//! where a term stands for `sum coeffs[i][j] t^i s^j e^{exp_t t + exp_s s}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exppoly::{BiTerm, BivariateExpPoly, HalfPlane, Piece, PiecewiseKernel, Region};
use crate::numeric::C64;

const MAX_JSON_BYTES: usize = 1 << 22;
const MAX_PIECES: usize = 256;
const MAX_DEGREE: usize = 64;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelJson {
    half_width: f64,
    pieces: Vec<PieceJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceJson {
    region: Vec<HalfPlane>,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    exp_t: [f64; 2],
    exp_s: [f64; 2],
    coeffs: Vec<Vec<[f64; 2]>>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub fn encode_kernel_json(k: &PiecewiseKernel) -> String {
    let doc = KernelJson {
        half_width: k.half_width(),
        pieces: k
            .pieces()
            .iter()
            .map(|p| PieceJson {
                region: p.region.constraints.clone(),
                terms: p
                    .expr
                    .terms()
                    .iter()
                    .map(|t| TermJson {
                        exp_t: pair(t.exp_t),
                        exp_s: pair(t.exp_s),
                        coeffs: t.coeffs.iter().map(|row| row.iter().copied().map(pair).collect()).collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("kernel JSON is always serializable")
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Rejects anything that would not describe a finite kernel covering the
/// square: non-finite numbers, ragged coefficient blocks, gaps or overlaps.
pub fn decode_kernel_json(text: &str) -> Result<PiecewiseKernel> {
    if text.len() > MAX_JSON_BYTES {
        return Err(invalid("kernel JSON too large"));
    }
    let doc: KernelJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        expected: format!("kernel JSON ({e})"),
    })?;
    if !(doc.half_width.is_finite() && doc.half_width > 0.0 && doc.half_width < 1e6) {
        return Err(invalid("half_width must be positive and moderate"));
    }
    if doc.pieces.is_empty() || doc.pieces.len() > MAX_PIECES {
        return Err(invalid(format!("expected 1 to {MAX_PIECES} pieces")));
    }
    let mut pieces = Vec::with_capacity(doc.pieces.len());
    for p in doc.pieces {
        for h in &p.region {
            if ![h.alpha, h.beta, h.gamma].iter().all(|x| x.is_finite() && x.abs() < 1e12) {
                return Err(invalid("half-plane coefficients must be finite"));
            }
        }
        let mut terms = Vec::with_capacity(p.terms.len());
        for t in p.terms {
            let width = t.coeffs.first().map_or(0, Vec::len);
            if t.coeffs.len() > MAX_DEGREE + 1 || width > MAX_DEGREE + 1 || t.coeffs.iter().any(|r| r.len() != width) {
                return Err(invalid("coefficient blocks must be rectangular and of moderate degree"));
            }
            let numbers = t.exp_t.iter().chain(&t.exp_s).chain(t.coeffs.iter().flatten().flatten());
            if !numbers.clone().all(|x| x.is_finite()) {
                return Err(invalid("kernel terms must be finite"));
            }
            if !t.exp_t.iter().chain(&t.exp_s).all(|x| x.abs() < 1e3) {
                return Err(invalid("exponents out of range"));
            }
            terms.push(BiTerm {
                exp_t: complex(t.exp_t),
                exp_s: complex(t.exp_s),
                coeffs: t.coeffs.into_iter().map(|row| row.into_iter().map(complex).collect()).collect(),
            });
        }
        pieces.push(Piece { region: Region::new(p.region), expr: BivariateExpPoly::from_terms(terms) });
    }
    PiecewiseKernel::new(doc.half_width, pieces)
}

/// The `N × N` grid `-T + 2T i/(N-1)` in both variables (`N = 1` samples the
/// centre).
pub fn grid_points(half_width: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Header `t,s,re,im`; values carry 17 significant digits, enough to read
/// back the exact doubles.
pub fn kernel_csv(k: &PiecewiseKernel, n: usize) -> Result<String> {
    let pts = grid_points(k.half_width(), n);
    let mut out = String::from("t,s,re,im\n");
    for &t in &pts {
        for &s in &pts {
            let g = k.eval(t, s)?;
            writeln!(out, "{t:.16e},{s:.16e},{:.16e},{:.16e}", g.re, g.im).expect("writing to a String");
        }
    }
    Ok(out)
}
