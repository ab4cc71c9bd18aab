use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::slab::{normal_frame, orthogonality_residual};
use crate::error::{invalid, Result};
use crate::maximal::{BoxRegion, Field};
use crate::volume::unit_sphere_area;

/// `g(x', x_n) = |x'|^{-(n-1)} log2(1/|x'|)^{-n/(n+1)}` on
/// `{|x_n| <= C |x'|^2, |x'| <= 1/2}`, zero elsewhere.
pub fn g_value(n: usize, c: f64, xp_norm: f64, xn: f64) -> f64 {
    if !(xp_norm > 0.0 && xp_norm <= 0.5) || xn.abs() > c * xp_norm * xp_norm {
        return 0.0;
    }
    let nf = n as f64;
    xp_norm.powf(-(nf - 1.0)) * (1.0 / xp_norm).log2().powf(-nf / (nf + 1.0))
}

/// `f = g o U`, with `U` orthogonal and last row `N`.
#[derive(Debug, Clone)]
pub struct CounterexampleField {
    n: usize,
    c: f64,
    u: Vec<Vec<f64>>,
    bbox: BoxRegion,
}

impl CounterexampleField {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "need n >= 2"));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(invalid("C", format!("{c} is not >= 1")));
        }
        let reach = (0.25 + (c / 4.0).powi(2)).sqrt();
        Ok(Self {
            n,
            c,
            u: normal_frame(n),
            bbox: BoxRegion::cube(&vec![0.0; n], reach)?,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn rotation(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.u)
    }

    /// `U y` as `(|x'|, x_n)`.
    pub fn coordinates(&self, y: &[f64]) -> (f64, f64) {
        let mut s = 0.0;
        let mut last = 0.0;
        for (i, row) in self.u.iter().enumerate() {
            let c: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
            if i + 1 == self.n {
                last = c;
            } else {
                s += c * c;
            }
        }
        (s.sqrt(), last)
    }
}

impl Field for CounterexampleField {
    fn bounding_box(&self) -> &BoxRegion {
        &self.bbox
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        let (a, b) = self.coordinates(y);
        g_value(self.n, self.c, a, b)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=q {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pq = if q == 1 { x } else { p1 };
            let pm = if q == 1 { 1.0 } else { p0 };
            dp = q as f64 * (x * pq - pm) / (x * x - 1.0);
            let dx = pq / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    (nodes, weights)
}

/// `||g||_p^p` by the radial reduction, split into panels `[u_k, 2 u_k]` in
/// `u = ln(1/|x'|)`, so panel `k` ends at the cutoff `|x'| = 2^{-2^k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GNorm {
    pub n: usize,
    pub p: f64,
    pub c: f64,
    /// `||g||_p`, infinite when the cutoff study diverges.
    pub value: f64,
    /// `||g||_p^p`.
    pub integral: f64,
    pub finite: bool,
    /// `(ln(1/cutoff), partial integral)`.
    pub cutoffs: Vec<(f64, f64)>,
    /// Slope of `ln(partial)` against `ln(1/cutoff)` over the last panels.
    pub cutoff_slope: f64,
    /// Change of the extrapolated limit between the last two panels.
    pub extrapolation_error: f64,
}

const MAX_PANELS: usize = 40;

struct Radial {
    a: f64,
    b: f64,
    prefactor: f64,
}

impl Radial {
    fn new(n: usize, p: f64, c: f64) -> Self {
        let nf = n as f64;
        Self {
            a: nf + 1.0 - (nf - 1.0) * p,
            b: nf * p / (nf + 1.0),
            prefactor: 2.0 * c * unit_sphere_area(n - 1),
        }
    }

    /// Integrand in `u`.
    fn h(&self, u: f64) -> f64 {
        (-self.a * u).exp() * (u / LN_2).powf(-self.b)
    }
}

fn panel(f: &Radial, lo: f64, hi: f64, gl: &(Vec<f64>, Vec<f64>), depth: usize) -> f64 {
    let rule = |a: f64, b: f64| {
        let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
        gl.0.iter().zip(&gl.1).map(|(x, w)| w * f.h(m + r * x)).sum::<f64>() * r
    };
    let whole = rule(lo, hi);
    let mid = (lo + hi) / 2.0;
    let halves = rule(lo, mid) + rule(mid, hi);
    if depth == 0 || !halves.is_finite() || (whole - halves).abs() <= 1e-13 * halves.abs() {
        halves
    } else {
        panel(f, lo, mid, gl, depth - 1) + panel(f, mid, hi, gl, depth - 1)
    }
}

/// `||g||_p` in dimension `n` with slab constant `c`.
pub fn g_lp_norm(n: usize, p: f64, c: f64, quad_points: usize) -> Result<GNorm> {
    if n < 2 {
        return Err(invalid("n", "need n >= 2"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is not in [1, inf)")));
    }
    if quad_points < 2 {
        return Err(invalid("quad_points", "need at least 2 nodes per panel"));
    }
    let f = Radial::new(n, p, c);
    let gl = gauss_legendre(quad_points);
    let mut partial = 0.0;
    let mut cutoffs = Vec::new();
    let mut increments = Vec::new();
    let mut finite = true;
    let mut u = LN_2;
    for _ in 0..MAX_PANELS {
        let d = f.prefactor * panel(&f, u, 2.0 * u, &gl, 24);
        if !(d.is_finite() && (partial + d).is_finite()) {
            finite = false;
            break;
        }
        partial += d;
        u *= 2.0;
        cutoffs.push((u, partial));
        increments.push(d);
    }
    let k = increments.len();
    let ratio = |i: usize| increments[i] / increments[i - 1];
    if finite && k >= 3 && ratio(k - 1) >= 1.0 {
        finite = false;
    }
    let slope = if cutoffs.len() >= 2 {
        let (a, b) = (cutoffs[cutoffs.len() - 2], cutoffs[cutoffs.len() - 1]);
        (b.1.ln() - a.1.ln()) / (b.0 - a.0)
    } else {
        f64::INFINITY
    };
    let aitken = |i: usize| {
        let r = ratio(i);
        let s = cutoffs[i].1;
        if increments[i] == 0.0 || !(r < 1.0) {
            s
        } else {
            s + increments[i] * r / (1.0 - r)
        }
    };
    let (integral, extrapolation_error) = if finite && k >= 3 {
        let last = aitken(k - 1);
        (last, (last - aitken(k - 2)).abs())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Ok(GNorm {
        n,
        p,
        c,
        value: integral.powf(1.0 / p),
        integral,
        finite,
        cutoffs,
        cutoff_slope: slope,
        extrapolation_error,
    })
}

/// Independent midpoint-rule value of `||g||_p^p` after the substitution
/// `u = ln 2 / tau^2`, which maps `|x'| in (0, 1/2]` onto `tau in (0, 1]`.
pub fn g_lp_norm_midpoint(n: usize, p: f64, c: f64, points: usize) -> f64 {
    let f = Radial::new(n, p, c);
    let step = 1.0 / points as f64;
    let mut acc = 0.0;
    for i in 0..points {
        let tau = (i as f64 + 0.5) * step;
        let u = LN_2 / (tau * tau);
        acc += f.h(u) * 2.0 * LN_2 / (tau * tau * tau);
    }
    f.prefactor * acc * step
}
