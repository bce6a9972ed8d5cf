use serde::{Deserialize, Serialize};

/// `alpha·t + beta·s + gamma ≥ 0` (or `> 0` when `strict`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub strict: bool,
}

impl HalfPlane {
    pub fn new(alpha: f64, beta: f64, gamma: f64, strict: bool) -> Self {
        Self { alpha, beta, gamma, strict }
    }

    pub fn value(&self, t: f64, s: f64) -> f64 {
        self.alpha * t + self.beta * s + self.gamma
    }

    pub fn holds(&self, t: f64, s: f64) -> bool {
        let v = self.value(t, s);
        if self.strict {
            v > 0.0
        } else {
            v >= 0.0
        }
    }

    fn norm(&self) -> f64 {
        self.alpha.abs() + self.beta.abs()
    }
}

/// Finite intersection of half-planes, read inside the square `[-T, T]²`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub constraints: Vec<HalfPlane>,
}

impl Region {
    pub fn whole() -> Self {
        Self::default()
    }

    pub fn new(constraints: Vec<HalfPlane>) -> Self {
        Self { constraints }
    }

    /// Exact membership, honouring strictness.
    pub fn contains(&self, t: f64, s: f64) -> bool {
        self.constraints.iter().all(|c| c.holds(t, s))
    }

    /// Membership in the closure, with absolute slack `tol`.
    pub fn closure_contains(&self, t: f64, s: f64, tol: f64) -> bool {
        self.constraints.iter().all(|c| c.value(t, s) >= -tol * (1.0 + c.norm()))
    }

    pub fn reflect_t(&self) -> Self {
        Self::new(
            self.constraints
                .iter()
                .map(|c| HalfPlane { alpha: -c.alpha, ..*c })
                .collect(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.constraints
                .iter()
                .map(|c| HalfPlane { alpha: c.beta, beta: c.alpha, ..*c })
                .collect(),
        )
    }

    pub fn intersect(&self, other: &Region) -> Self {
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().copied());
        Self::new(constraints)
    }

    /// Vertices of the closure clipped to `[-half_width, half_width]²`.
    pub fn polygon(&self, half_width: f64) -> Vec<(f64, f64)> {
        polygon_of(self.constraints.iter(), half_width)
    }

    pub fn area(&self, half_width: f64) -> f64 {
        shoelace(&self.polygon(half_width))
    }

    pub fn is_empty(&self, half_width: f64) -> bool {
        self.area(half_width) <= 1e-12 * half_width * half_width
    }

    /// Drops constraints implied by the others together with the square.
    pub fn simplified(&self, half_width: f64) -> Self {
        let mut kept = self.constraints.clone();
        let mut i = 0;
        while i < kept.len() {
            let c = kept[i];
            let others = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c);
            let poly = polygon_of(others, half_width);
            let slack = 1e-12 * half_width * (1.0 + c.norm());
            if !poly.is_empty() && poly.iter().all(|&(t, s)| c.value(t, s) >= -slack) {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Self::new(kept)
    }
}

fn polygon_of<'a>(constraints: impl Iterator<Item = &'a HalfPlane>, h: f64) -> Vec<(f64, f64)> {
    let mut poly = vec![(-h, -h), (h, -h), (h, h), (-h, h)];
    for c in constraints {
        if poly.is_empty() {
            break;
        }
        poly = clip(&poly, c);
    }
    poly
}

// Sutherland-Hodgman against the closed half-plane.
fn clip(poly: &[(f64, f64)], c: &HalfPlane) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let vp = c.value(p.0, p.1);
        let vq = c.value(q.0, q.1);
        if vp >= 0.0 {
            out.push(p);
        }
        if (vp >= 0.0) != (vq >= 0.0) {
            let w = vp / (vp - vq);
            out.push((p.0 + w * (q.0 - p.0), p.1 + w * (q.1 - p.1)));
        }
    }
    out
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|k| {
            let (x0, y0) = poly[k];
            let (x1, y1) = poly[(k + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice.abs() / 2.0
}
