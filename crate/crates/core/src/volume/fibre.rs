//! Arc length of the curve `{ |y|^2 - 1 = u_1 } ∩ { F_{x,r}(y) = u_2 }` in
//! three dimensions, traced by predictor-corrector continuation.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::Radii;

type V3 = [f64; 3];

const NEWTON_TOL: f64 = 1e-10;
const MAX_CORRECTIONS: usize = 20;
/// `|g1 x g2| / (|g1| |g2|)` below this counts as tangential contact.
const DEGENERATE_SINE: f64 = 1e-6;

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &V3) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(a: f64, x: &V3, y: &V3) -> V3 {
    [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]]
}

/// Solve a 3 x 3 system by Cramer's rule.
fn solve3(m: &[V3; 3], b: &V3) -> Option<V3> {
    let det = dot(&m[0], &cross(&m[1], &m[2]));
    let scale = norm(&m[0]) * norm(&m[1]) * norm(&m[2]);
    if !(det.abs() > 1e-14 * scale) {
        return None;
    }
    // Columns of the inverse are the cross products of rows.
    let c0 = cross(&m[1], &m[2]);
    let c1 = cross(&m[2], &m[0]);
    let c2 = cross(&m[0], &m[1]);
    Some([
        (c0[0] * b[0] + c1[0] * b[1] + c2[0] * b[2]) / det,
        (c0[1] * b[0] + c1[1] * b[1] + c2[1] * b[2]) / det,
        (c0[2] * b[0] + c1[2] * b[1] + c2[2] * b[2]) / det,
    ])
}

/// The pair of level sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fibre {
    x: V3,
    inv_r2: V3,
    u: [f64; 2],
}

impl Fibre {
    pub fn new(x: &[f64], r: &Radii<f64>, u: [f64; 2]) -> Result<Self> {
        check_dim(3, x.len())?;
        check_dim(3, r.dim())?;
        let rs = r.as_slice();
        Ok(Self {
            x: [x[0], x[1], x[2]],
            inv_r2: [1.0 / (rs[0] * rs[0]), 1.0 / (rs[1] * rs[1]), 1.0 / (rs[2] * rs[2])],
            u,
        })
    }

    pub fn values(&self, y: &V3) -> [f64; 2] {
        let d = sub(y, &self.x);
        [
            dot(y, y) - 1.0 - self.u[0],
            d[0] * d[0] * self.inv_r2[0] + d[1] * d[1] * self.inv_r2[1] + d[2] * d[2] * self.inv_r2[2]
                - 1.0
                - self.u[1],
        ]
    }

    pub fn gradients(&self, y: &V3) -> [V3; 2] {
        let d = sub(y, &self.x);
        [
            [2.0 * y[0], 2.0 * y[1], 2.0 * y[2]],
            [
                2.0 * d[0] * self.inv_r2[0],
                2.0 * d[1] * self.inv_r2[1],
                2.0 * d[2] * self.inv_r2[2],
            ],
        ]
    }

    /// Unit tangent and the sine of the angle between the gradients.
    fn tangent(&self, y: &V3) -> (V3, f64) {
        let [g1, g2] = self.gradients(y);
        let c = cross(&g1, &g2);
        let nc = norm(&c);
        let s = nc / (norm(&g1) * norm(&g2)).max(f64::MIN_POSITIVE);
        if nc == 0.0 {
            return ([0.0; 3], 0.0);
        }
        ([c[0] / nc, c[1] / nc, c[2] / nc], s)
    }

    /// Newton on `F1 = F2 = 0`, `plane . (q - anchor) = 0`.
    fn correct(&self, start: V3, plane: &V3, anchor: &V3) -> Result<V3> {
        let mut q = start;
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_CORRECTIONS {
            let f = self.values(&q);
            let lin = dot(plane, &sub(&q, anchor));
            residual = f[0].abs().max(f[1].abs()).max(lin.abs());
            let [g1, g2] = self.gradients(&q);
            let step = solve3(&[g1, g2, *plane], &[-f[0], -f[1], -lin]).ok_or(Error::Singular)?;
            q = axpy(1.0, &step, &q);
            if residual < NEWTON_TOL && norm(&step) < 1e-9 {
                let f = self.values(&q);
                return Ok(q).and_then(|q| {
                    if f[0].abs().max(f[1].abs()) < NEWTON_TOL {
                        Ok(q)
                    } else {
                        Err(Error::NonConvergent { iterations: MAX_CORRECTIONS, residual })
                    }
                });
            }
        }
        let f = self.values(&q);
        let r = f[0].abs().max(f[1].abs());
        if r < NEWTON_TOL {
            return Ok(q);
        }
        Err(Error::NonConvergent {
            iterations: MAX_CORRECTIONS,
            residual: r.min(residual),
        })
    }

    /// Gauss-Newton projection of `y` onto the fibre.
    fn project(&self, mut y: V3) -> Option<(V3, f64)> {
        for _ in 0..60 {
            let f = self.values(&y);
            let [g1, g2] = self.gradients(&y);
            let (a, b, c) = (dot(&g1, &g1), dot(&g1, &g2), dot(&g2, &g2));
            let lam = 1e-12 * (a + c);
            let (a, c) = (a + lam, c + lam);
            let det = a * c - b * b;
            if !(det > 0.0) {
                return None;
            }
            let s1 = (c * f[0] - b * f[1]) / det;
            let s2 = (a * f[1] - b * f[0]) / det;
            let step = [
                -(s1 * g1[0] + s2 * g2[0]),
                -(s1 * g1[1] + s2 * g2[1]),
                -(s1 * g1[2] + s2 * g2[2]),
            ];
            y = axpy(1.0, &step, &y);
            if norm(&step) < 1e-14 {
                break;
            }
        }
        let f = self.values(&y);
        Some((y, f[0].abs().max(f[1].abs())))
    }

    /// Seeds on the sphere `|y|^2 = 1 + u_1` projected onto the fibre.
    fn starts(&self, count: usize) -> Result<Vec<V3>> {
        let rad2 = 1.0 + self.u[0];
        if !(rad2 > 0.0) {
            return Err(Error::Domain("first level set is empty".into()));
        }
        let rad = rad2.sqrt();
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let mut found = Vec::new();
        let mut tangential = false;
        for i in 0..count {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            let y = [rad * s * phi.cos(), rad * s * phi.sin(), rad * z];
            if let Some((p, res)) = self.project(y) {
                if res < 1e-7 {
                    if self.tangent(&p).1 < 1e-4 {
                        tangential = true;
                    } else if res < 1e-12 {
                        found.push(p);
                    }
                }
            }
        }
        if found.is_empty() {
            return Err(if tangential {
                Error::DegenerateIntersection
            } else {
                Error::Domain("fibre is empty".into())
            });
        }
        Ok(found)
    }

    /// Follow one closed component from `start` with step `h`.
    fn trace_component(&self, start: V3, h: f64) -> Result<Component> {
        let (t0, s0) = self.tangent(&start);
        if s0 < DEGENERATE_SINE {
            return Err(Error::DegenerateIntersection);
        }
        let mut pts = vec![start];
        let mut tangents = vec![t0];
        let mut p = start;
        let mut tp = t0;
        let mut travelled = 0.0;
        let mut weak = 0;
        let max_steps = (1e3 / h) as usize;
        for _ in 0..max_steps {
            let mut step = h;
            let q = loop {
                let pred = axpy(step, &tp, &p);
                match self.correct(pred, &tp, &pred) {
                    Ok(q) => break q,
                    Err(e) if step < h / 1000.0 => return Err(e),
                    Err(_) => step /= 2.0,
                }
            };
            let (mut tq, sq) = self.tangent(&q);
            if dot(&tq, &tp) < 0.0 {
                tq = [-tq[0], -tq[1], -tq[2]];
            }
            weak = if sq < DEGENERATE_SINE { weak + 1 } else { 0 };
            if weak >= 3 {
                return Err(Error::DegenerateIntersection);
            }
            let sp = dot(&sub(&p, &start), &t0);
            let sq_plane = dot(&sub(&q, &start), &t0);
            if travelled > 3.0 * h && sp < 0.0 && sq_plane >= 0.0 && norm(&sub(&q, &start)) < 4.0 * h {
                // Land exactly on the start plane.
                let end = self.correct(p, &t0, &start)?;
                let gap = norm(&sub(&end, &start));
                pts.push(end);
                tangents.push(t0);
                return Ok(Component { points: pts, tangents, closure_gap: gap });
            }
            travelled += norm(&sub(&q, &p));
            pts.push(q);
            tangents.push(tq);
            p = q;
            tp = tq;
        }
        Err(Error::Domain("fibre did not close".into()))
    }
}

/// One traced closed component as a polyline with unit tangents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub points: Vec<V3>,
    pub tangents: Vec<V3>,
    pub closure_gap: f64,
}

/// Chord length corrected by the turning angle: exact to fourth order for
/// smooth curves.
fn arc_factor(ta: &V3, tb: &V3) -> f64 {
    let c = dot(ta, tb).clamp(-1.0, 1.0);
    let theta = c.acos();
    1.0 + theta * theta / 24.0
}

/// Length of the part of segment `[a, b]` inside the ball.
fn chord_in_ball(a: &V3, b: &V3, centre: &V3, rho: f64) -> f64 {
    let d = sub(b, a);
    let len2 = dot(&d, &d);
    if len2 == 0.0 {
        return 0.0;
    }
    let f = sub(a, centre);
    let bq = dot(&f, &d);
    let cq = dot(&f, &f) - rho * rho;
    let disc = bq * bq - len2 * cq;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let lo = ((-bq - s) / len2).max(0.0);
    let hi = ((-bq + s) / len2).min(1.0);
    (hi - lo).max(0.0) * len2.sqrt()
}

impl Component {
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .zip(self.tangents.windows(2))
            .map(|(p, t)| norm(&sub(&p[1], &p[0])) * arc_factor(&t[0], &t[1]))
            .sum()
    }

    pub fn length_in_ball(&self, centre: &V3, rho: f64) -> f64 {
        self.points
            .windows(2)
            .zip(self.tangents.windows(2))
            .map(|(p, t)| chord_in_ball(&p[0], &p[1], centre, rho) * arc_factor(&t[0], &t[1]))
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        let stride = (self.points.len() / 400).max(1);
        for a in self.points.iter().step_by(stride) {
            for b in self.points.iter().step_by(stride) {
                best = best.max(norm(&sub(a, b)));
            }
        }
        best
    }

    fn near(&self, y: &V3, tol: f64) -> bool {
        self.points.iter().any(|p| norm(&sub(p, y)) < tol)
    }
}

/// All closed components of a fibre.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FibreTrace {
    pub components: Vec<Component>,
    pub step: f64,
}

impl FibreTrace {
    pub fn length(&self) -> f64 {
        self.components.iter().map(Component::length).sum()
    }

    pub fn length_in_ball(&self, centre: &V3, rho: f64) -> f64 {
        self.components.iter().map(|c| c.length_in_ball(centre, rho)).sum()
    }

    pub fn closure_gap(&self) -> f64 {
        self.components.iter().map(|c| c.closure_gap).fold(0.0, f64::max)
    }
}

/// Trace every component reachable from 64 projected seeds.
pub fn trace_fibre(x: &[f64], r: &Radii<f64>, u: [f64; 2], h: f64) -> Result<FibreTrace> {
    if !(h > 0.0) {
        return Err(invalid("h", "step must be positive"));
    }
    let fibre = Fibre::new(x, r, u)?;
    let mut components: Vec<Component> = Vec::new();
    for s in fibre.starts(64)? {
        if components.iter().any(|c| c.near(&s, 2.0 * h)) {
            continue;
        }
        components.push(fibre.trace_component(s, h)?);
    }
    Ok(FibreTrace { components, step: h })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FibreLength {
    pub total: f64,
    pub in_ball: f64,
    pub closure_gap: f64,
    pub components: usize,
}

/// Length of the fibre inside `B(xi, rho)` with step `min(rho / 10, 0.01)`.
pub fn fibre_length_in_ball(x: &[f64], r: &Radii<f64>, u: [f64; 2], xi: &[f64], rho: f64) -> Result<FibreLength> {
    check_dim(3, xi.len())?;
    if !(rho > 0.0) {
        return Err(invalid("rho", "radius must be positive"));
    }
    let trace = trace_fibre(x, r, u, (rho / 10.0).min(0.01))?;
    let centre = [xi[0], xi[1], xi[2]];
    Ok(FibreLength {
        total: trace.length(),
        in_ball: trace.length_in_ball(&centre, rho),
        closure_gap: trace.closure_gap(),
        components: trace.components.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_circle_fibre() -> (Vec<f64>, Radii<f64>, [f64; 2]) {
        // |y| = 1 and |y - (1/2, 0, 0)|^2 = 5/4 force y_1 = 0.
        (vec![0.5, 0.0, 0.0], Radii::unit(3), [0.0, 0.25])
    }

    #[test]
    fn calibration_circle() {
        let (x, r, u) = unit_circle_fibre();
        let t = trace_fibre(&x, &r, u, 0.01).unwrap();
        assert_eq!(t.components.len(), 1);
        assert!((t.length() - 2.0 * PI).abs() < 1e-6, "{}", t.length() - 2.0 * PI);
        assert!(t.closure_gap() < 1e-8);
        for p in &t.components[0].points {
            assert!(p[0].abs() < 1e-9);
        }
    }

    #[test]
    fn arc_through_pole() {
        let (x, r, u) = unit_circle_fibre();
        for rho in [0.02, 0.05, 0.1] {
            let l = fibre_length_in_ball(&x, &r, u, &[0.0, 0.0, 1.0], rho).unwrap();
            // Exact: 2 * asin-type chord, 4 asin(rho / 2) -> 2 rho.
            let exact = 4.0 * (rho / 2.0f64).asin();
            assert!((l.in_ball - exact).abs() < 1e-6);
            assert!((l.in_ball / (2.0 * rho) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn tangential_contact_is_degenerate() {
        let r = Radii::new(vec![1.2, 1.0, 1.0]).unwrap();
        let e = trace_fibre(&[0.0; 3], &r, [0.0, 0.0], 0.01).unwrap_err();
        assert_eq!(e, Error::DegenerateIntersection);
    }

    #[test]
    fn empty_fibre_is_reported() {
        let r = Radii::unit(3);
        assert!(matches!(
            trace_fibre(&[5.0, 0.0, 0.0], &r, [0.0, 0.0], 0.01),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ellipsoidal_fibre_matches_refinement() {
        let x = [0.3, -0.2, 0.1];
        let r = Radii::new(vec![1.1, 0.8, 1.3]).unwrap();
        let a = trace_fibre(&x, &r, [0.1, -0.05], 0.01).unwrap();
        let b = trace_fibre(&x, &r, [0.1, -0.05], 0.005).unwrap();
        assert!((a.length() - b.length()).abs() < 1e-6 * a.length());
        let f = Fibre::new(&x, &r, [0.1, -0.05]).unwrap();
        for c in &a.components {
            assert!(c.closure_gap < 1e-8);
            for p in &c.points {
                let v = f.values(p);
                assert!(v[0].abs() < 1e-9 && v[1].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn chord_clipping() {
        let c = [0.0; 3];
        assert!((chord_in_ball(&[-2.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &c, 1.0) - 2.0).abs() < 1e-15);
        assert!((chord_in_ball(&[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &c, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(chord_in_ball(&[0.0, 3.0, 0.0], &[2.0, 3.0, 0.0], &c, 1.0), 0.0);
    }
}
