//! Polynomial roots with multiplicities by Aberth-Ehrlich iteration.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exppoly::poly;
use crate::numeric::{C64, ZERO};

/// Roots closer than this (relative to their magnitude, at least 1) are one cluster.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;
/// Clusters this close are merged if the merged point passes the multiplicity test.
const LOOSE_CLUSTER_TOL: f64 = 1e-3;
const MULTIPLICITY_TOL: f64 = 1e-11;
const RESIDUAL_TOL: f64 = 1e-7;
const MAX_ITER: usize = 500;

/// All complex roots of `p` (ascending coefficients) as `(root, multiplicity)`,
/// sorted by real then imaginary part. Real input yields exactly conjugate-symmetric
/// output with near-real roots snapped to the axis.
pub fn roots(p: &[C64]) -> Result<Vec<(C64, usize)>> {
    let mut p = p.to_vec();
    poly::trim(&mut p);
    if p.len() < 2 {
        return Err(Error::InvalidInput("root finding needs degree ≥ 1".into()));
    }
    if p.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
    }
    let real_input = p.iter().all(|c| c.im == 0.0);

    let zeros = p.iter().take_while(|c| **c == ZERO).count();
    let reduced: Vec<C64> = p[zeros..].to_vec();
    let mut out = Vec::new();
    if zeros > 0 {
        out.push((ZERO, zeros));
    }
    if reduced.len() > 1 {
        let lead = reduced[reduced.len() - 1];
        let monic: Vec<C64> = reduced.iter().map(|c| c / lead).collect();
        let approx = aberth(&monic);
        let mut clusters = cluster(&monic, &approx);
        if real_input {
            symmetrize(&mut clusters);
        }
        for (r, _) in &clusters {
            let residual = poly::eval(&monic, *r).norm();
            let scale: f64 = monic.iter().enumerate().map(|(k, c)| c.norm() * r.norm().powi(k as i32)).sum();
            if !(residual <= RESIDUAL_TOL * scale) {
                return Err(Error::ConvergenceFailure(format!(
                    "root {r} has residual {residual:e} against scale {scale:e}"
                )));
            }
        }
        out.extend(clusters);
    }
    out.sort_by(|a, b| cmp(a.0, b.0));
    Ok(out)
}

fn cmp(a: C64, b: C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn aberth(monic: &[C64]) -> Vec<C64> {
    let d = monic.len() - 1;
    let center = -monic[d - 1] / d as f64;
    let radius = (0..d)
        .map(|k| monic[k].norm().powf(1.0 / (d - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<C64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.7;
            center + C64::from_polar(radius, theta)
        })
        .collect();
    let dp = poly::diff(monic);
    for _ in 0..MAX_ITER {
        let mut done = true;
        for i in 0..d {
            let pv = poly::eval(monic, z[i]);
            if pv == ZERO {
                continue;
            }
            let dv = poly::eval(&dp, z[i]);
            let ratio = if dv == ZERO { C64::new(1e-8, 1e-8) } else { pv / dv };
            let repulsion: C64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff == ZERO {
                        C64::new(1e16, 0.0)
                    } else {
                        1.0 / diff
                    }
                })
                .sum();
            let denom = 1.0 - ratio * repulsion;
            let w = if denom == ZERO { ratio } else { ratio / denom };
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
            }
            if w.norm() > 1e-15 * z[i].norm().max(1e-300) {
                done = false;
            }
        }
        if done {
            break;
        }
    }
    z
}

fn centroid(points: &[C64]) -> C64 {
    points.iter().sum::<C64>() / points.len() as f64
}

fn tol_at(z: C64, rel: f64) -> f64 {
    rel * z.norm().max(1.0)
}

// Groups approximations into (root, multiplicity).
fn cluster(monic: &[C64], approx: &[C64]) -> Vec<(C64, usize)> {
    // single linkage at the tight tolerance
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &z in approx {
        let hits: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|w| (z - w).norm() <= tol_at(z, ROOT_CLUSTER_TOL).max(tol_at(*w, ROOT_CLUSTER_TOL))))
            .map(|(i, _)| i)
            .collect();
        let mut merged = vec![z];
        for &i in hits.iter().rev() {
            merged.extend(groups.remove(i));
        }
        groups.push(merged);
    }
    let mut clusters: Vec<(C64, usize)> = groups
        .iter()
        .map(|g| {
            let c = centroid(g);
            let m = g.len();
            let refined = if m > 1 { refine(monic, c, m) } else { c };
            (refined, m)
        })
        .collect();

    // loose merging, closest pairs first, accepted only for genuine multiplicity
    let mut rejected: Vec<(C64, C64)> = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (a, b) = (clusters[i].0, clusters[j].0);
                let d = (a - b).norm();
                if d > tol_at(a, LOOSE_CLUSTER_TOL).max(tol_at(b, LOOSE_CLUSTER_TOL)) {
                    continue;
                }
                if rejected.iter().any(|&(x, y)| (x == a && y == b) || (x == b && y == a)) {
                    continue;
                }
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((i, j, d));
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        let (a, ma) = clusters[i];
        let (b, mb) = clusters[j];
        let m = ma + mb;
        let guess = (a * ma as f64 + b * mb as f64) / m as f64;
        let c = refine(monic, guess, m);
        if is_multiple_root(monic, c, m) && (c - guess).norm() <= (a - b).norm().max(tol_at(guess, ROOT_CLUSTER_TOL)) {
            clusters.remove(j);
            clusters[i] = (c, m);
        } else {
            rejected.push((a, b));
        }
    }
    clusters
}

// Newton on p^(m-1), for which an m-fold root of p is simple.
fn refine(monic: &[C64], start: C64, m: usize) -> C64 {
    let mut d = monic.to_vec();
    for _ in 1..m {
        d = poly::diff(&d);
    }
    let dd = poly::diff(&d);
    let mut z = start;
    for _ in 0..8 {
        let den = poly::eval(&dd, z);
        if den == ZERO {
            break;
        }
        let step = poly::eval(&d, z) / den;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm() {
            break;
        }
    }
    if (z - start).norm() > tol_at(start, LOOSE_CLUSTER_TOL) {
        start
    } else {
        z
    }
}

fn is_multiple_root(monic: &[C64], z: C64, m: usize) -> bool {
    let mut d = monic.to_vec();
    for _ in 0..m {
        let value = poly::eval(&d, z).norm();
        let scale: f64 = d.iter().enumerate().map(|(k, c)| c.norm() * z.norm().powi(k as i32)).sum();
        if value > MULTIPLICITY_TOL * scale {
            return false;
        }
        d = poly::diff(&d);
    }
    true
}

fn symmetrize(clusters: &mut [(C64, usize)]) {
    for (z, _) in clusters.iter_mut() {
        if z.im.abs() <= 1e-9 * z.norm().max(1.0) {
            z.im = 0.0;
        }
    }
    let n = clusters.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] || clusters[i].0.im <= 0.0 {
            continue;
        }
        let target = clusters[i].0.conj();
        let partner = (0..n)
            .filter(|&j| !paired[j] && clusters[j].0.im < 0.0 && clusters[j].1 == clusters[i].1)
            .min_by(|&a, &b| (clusters[a].0 - target).norm().total_cmp(&(clusters[b].0 - target).norm()));
        if let Some(j) = partner {
            let re = 0.5 * (clusters[i].0.re + clusters[j].0.re);
            let im = 0.5 * (clusters[i].0.im - clusters[j].0.im);
            clusters[i].0 = C64::new(re, im);
            clusters[j].0 = C64::new(re, -im);
            paired[i] = true;
            paired[j] = true;
        }
    }
}
