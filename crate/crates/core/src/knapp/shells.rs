use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counterexample::CounterexampleField;
use super::tangency_set::TangencySample;
use crate::error::{invalid, Result};
use crate::maximal::Field;
use crate::mc::{estimate_means, fit_power_law, Moments, RngStream, ScalingFit};
use crate::volume::{surface_area, surface_weight, unit_sphere_area};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellTerm {
    pub ell: usize,
    pub value: f64,
    pub std_error: f64,
    /// Samples that landed in the support of `f`.
    pub hits: usize,
    pub low_confidence: bool,
    /// `max |<y, N>| / |proj_V y|^2` over the hits.
    pub normal_constant: f64,
    /// Surface measure of the near sheet of `E_l` divided by `2^{-l(n-1)/2}`.
    pub area_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSeries {
    pub terms: Vec<ShellTerm>,
    /// `S_1, ..., S_L`.
    pub partial_sums: Vec<f64>,
    /// `ln S_L` against `ln L` at `L = 4, 8, ...`; needs `L >= 16`.
    pub raw_fit: Option<ScalingFit>,
    /// `ln(S_{2L} - S_L)` against `ln L`; free of the constant term of the
    /// series, so it approaches `1/(n+1)` much faster than the raw fit.
    pub increment_fit: Option<ScalingFit>,
    pub surface_area: f64,
}

/// Geometry of the ellipsoid near its tangency point at the origin, in
/// coordinates `y = rho v + rho^2 eta N` with `v` a unit vector of `V`.
struct LocalChart<'a> {
    inv_r2: Vec<f64>,
    x: &'a [f64],
    normal: &'a [f64],
    gamma: f64,
    q_normal: f64,
}

impl<'a> LocalChart<'a> {
    fn new(s: &'a TangencySample, normal: &'a [f64]) -> Self {
        let inv_r2: Vec<f64> = s.r.as_slice().iter().map(|r| 1.0 / (r * r)).collect();
        let gamma = s.x.iter().zip(&inv_r2).zip(normal).map(|((x, i), nv)| 2.0 * x * i * nv).sum();
        let q_normal = normal.iter().zip(&inv_r2).map(|(nv, i)| nv * nv * i).sum();
        Self {
            inv_r2,
            x: &s.x,
            normal,
            gamma,
            q_normal,
        }
    }

    /// `eta` of the near sheet over `rho v`, if it exists.
    fn eta(&self, rho: f64, v: &[f64]) -> Option<f64> {
        let q: f64 = v.iter().zip(&self.inv_r2).map(|(a, i)| a * a * i).sum();
        let b: f64 = v.iter().zip(self.normal).zip(&self.inv_r2).map(|((a, nv), i)| a * nv * i).sum();
        let qa = rho * rho * self.q_normal;
        let qb = 2.0 * rho * b - self.gamma;
        let disc = qb * qb - 4.0 * qa * q;
        (disc >= 0.0).then(|| 2.0 * q / (-qb + disc.sqrt()))
    }

    /// Surface element of the graph over `V`: `|grad F| / |<grad F, N>|`.
    fn jacobian(&self, rho: f64, eta: f64, v: &[f64]) -> f64 {
        let mut norm2 = 0.0;
        let mut along = 0.0;
        for (j, &vj) in v.iter().enumerate() {
            let y = rho * vj + rho * rho * eta * self.normal[j];
            let g = 2.0 * (y - self.x[j]) * self.inv_r2[j];
            norm2 += g * g;
            along += g * self.normal[j];
        }
        norm2.sqrt() / along.abs()
    }
}

fn check(field: &CounterexampleField, s: &TangencySample) -> Result<()> {
    crate::error::check_dim(field.dim(), s.x.len())
}

/// Terms `T_l = sigma(E)^{-1} int_{E_l} |f| d sigma` for `l = 1..=l_max`,
/// computed in the scaled chart around the tangency point so that shells far
/// below `f64` resolution stay well conditioned.
pub fn shell_partial_sums(
    field: &CounterexampleField,
    s: &TangencySample,
    l_max: usize,
    m: usize,
    seed: u64,
) -> Result<ShellSeries> {
    check(field, s)?;
    if l_max < 4 {
        return Err(invalid("L", "need L >= 4"));
    }
    if m == 0 {
        return Err(invalid("m", "need at least one sample"));
    }
    let n = s.x.len();
    let nf = n as f64;
    let frame = field.rotation();
    let normal = &frame[n - 1];
    let chart = LocalChart::new(s, normal);
    let area = surface_area(&s.r, 1 << 20, seed).value;
    let sphere = unit_sphere_area(n - 1);
    let c = field.c();
    let terms: Vec<ShellTerm> = (1..=l_max)
        .into_par_iter()
        .map(|ell| {
            let mut rng = RngStream::derived(seed, 0x7368_656c, ell as u64);
            let mut coeffs = vec![0.0; n - 1];
            let mut v = vec![0.0; n];
            let mut mom = Moments::default();
            let mut area_mom = Moments::default();
            let mut hits = 0;
            let mut normal_constant = 0.0f64;
            for _ in 0..m {
                let t = (ell as f64 + rng.uniform()) / 2.0;
                let rho = (-t).exp2();
                rng.unit_vector_into(&mut coeffs);
                v.iter_mut().for_each(|a| *a = 0.0);
                for (cf, u) in coeffs.iter().zip(frame) {
                    v.iter_mut().zip(u).for_each(|(a, b)| *a += cf * b);
                }
                let Some(eta) = chart.eta(rho, &v) else {
                    mom.push(0.0);
                    area_mom.push(0.0);
                    continue;
                };
                let jac = chart.jacobian(rho, eta, &v);
                // rho^{n-1} relative to the top of the shell.
                area_mom.push(jac * (-(t - ell as f64 / 2.0) * (nf - 1.0)).exp2());
                if rho <= 0.5 && eta.abs() <= c {
                    hits += 1;
                    normal_constant = normal_constant.max(eta.abs());
                    mom.push(t.powf(-nf / (nf + 1.0)) * jac);
                } else {
                    mom.push(0.0);
                }
            }
            // d(sigma) = J rho^{n-2} d rho d theta and d rho = rho ln 2 dt; g
            // supplies rho^{-(n-1)}, and t ranges over an interval of length 1/2.
            let scale = LN_2 * sphere / 2.0 / area;
            let est = mom.estimate(seed).scale(scale);
            ShellTerm {
                ell,
                value: est.value,
                std_error: est.std_error,
                hits,
                low_confidence: hits < (m / 10).max(1),
                normal_constant,
                area_ratio: area_mom.mean * LN_2 * sphere / 2.0,
            }
        })
        .collect();
    let mut partial_sums = Vec::with_capacity(l_max);
    let mut acc = 0.0;
    for t in &terms {
        acc += t.value;
        partial_sums.push(acc);
    }
    let mut raw = Vec::new();
    let mut inc = Vec::new();
    let mut l = 4;
    while l <= l_max {
        raw.push((l as f64, partial_sums[l - 1]));
        if 2 * l <= l_max {
            inc.push((l as f64, partial_sums[2 * l - 1] - partial_sums[l - 1]));
        }
        l *= 2;
    }
    Ok(ShellSeries {
        terms,
        partial_sums,
        raw_fit: fit_power_law(&raw).ok(),
        increment_fit: fit_power_law(&inc).ok(),
        surface_area: area,
    })
}

/// `T_l` by direct weighted sampling of the whole ellipsoid, filtered to
/// `E_l`. Only practical for small `l`.
pub fn shell_term_direct(
    field: &CounterexampleField,
    s: &TangencySample,
    ell: usize,
    m: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check(field, s)?;
    let n = s.x.len();
    let frame = field.rotation();
    let r = s.r.as_slice();
    let prod = s.r.product();
    let sphere = unit_sphere_area(n);
    let lo = (-((ell + 1) as f64) / 2.0).exp2();
    let hi = (-(ell as f64) / 2.0).exp2();
    let [num, den] = estimate_means::<2, _>(m, seed, 0, |rng| {
        let mut theta = [0.0; 16];
        let mut y = [0.0; 16];
        let (theta, y) = (&mut theta[..n], &mut y[..n]);
        rng.unit_vector_into(theta);
        let w = surface_weight(r, prod, sphere, theta);
        for j in 0..n {
            y[j] = s.x[j] + r[j] * theta[j];
        }
        let tangential: f64 = frame[..n - 1]
            .iter()
            .map(|u| u.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        let inside = tangential > lo && tangential <= hi;
        [if inside { w * field.eval(y).abs() } else { 0.0 }, w]
    });
    Ok((num.value / den.value, num.std_error / den.value))
}
