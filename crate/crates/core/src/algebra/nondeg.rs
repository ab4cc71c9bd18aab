use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{d_omega_phi_k, default_c_n, phi_k, AxisFrame, Radii, TangencyConfig};
use crate::linalg::Matrix;
use crate::mc::{derive_stream_id, RngStream};

const NONDEG_STREAM: u64 = 0x6e6f_6e64;
const NEWTON_ITERS: usize = 60;
const NEWTON_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegParams {
    pub n: usize,
    pub k: usize,
    /// Accepted samples wanted.
    pub trials: usize,
    pub c_bar: f64,
    pub c_n: f64,
    /// Range of `log2 t`.
    pub log2_t: (f64, f64),
    /// Give up after this many proposals per wanted sample.
    pub max_proposals_per_trial: usize,
    pub seed: u64,
}

impl NondegParams {
    /// `c_bar = c_n / 10`, `t in [2^-8, 2]`.
    pub fn new(n: usize, k: usize, trials: usize, seed: u64) -> Self {
        let c_n = default_c_n(n);
        Self {
            n,
            k,
            trials,
            c_bar: 0.1 * c_n,
            c_n,
            log2_t: (-8.0, 1.0),
            max_proposals_per_trial: 20,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", "need n >= 2"));
        }
        if self.k >= self.n {
            return Err(Error::AxisOutOfRange { k: self.k, n: self.n });
        }
        if !(self.c_bar > 0.0) {
            return Err(invalid("c_bar", "must be positive"));
        }
        if !(self.c_n > 0.0) {
            return Err(invalid("c_n", "must be positive"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        let (lo, hi) = self.log2_t;
        if !(lo <= hi && hi <= 1.0) {
            return Err(invalid("log2_t", "need lo <= hi <= 1"));
        }
        Ok(())
    }
}

/// Empirical constants of the non-degeneracy bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegReport {
    pub n: usize,
    pub k: usize,
    pub c_bar: f64,
    pub proposals: usize,
    pub accepted: usize,
    /// `min |det D Phi| prod |omega_j| / t^{n-1}`.
    pub min_det_ratio: f64,
    /// `max t |(D Phi)^{-1}|`, Frobenius norm.
    pub max_inverse_ratio: f64,
    /// `max_{alpha, beta} |det M_{alpha, beta}| prod |omega_j| / t^{n-2}`.
    pub max_minor_ratio: f64,
    pub t_min: f64,
    pub t_max: f64,
}

struct Sample {
    t: f64,
    det_ratio: f64,
    inverse_ratio: f64,
    minor_ratio: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iteration for `Phi^k(omega) = target`.
fn solve(cfg: &TangencyConfig<f64>, start: &[f64], target: &[f64]) -> Option<Vec<f64>> {
    let mut w = start.to_vec();
    for _ in 0..NEWTON_ITERS {
        let f: Vec<f64> = phi_k(cfg, &w).ok()?.iter().zip(target).map(|(a, b)| a - b).collect();
        if norm(&f) < NEWTON_TOL {
            return Some(w);
        }
        let step = d_omega_phi_k(cfg, &w).ok()?.lu().ok()?.solve(&f);
        w.iter_mut().zip(&step).for_each(|(a, s)| *a -= s);
        if !w.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let f: Vec<f64> = phi_k(cfg, &w).ok()?.iter().zip(target).map(|(a, b)| a - b).collect();
    (norm(&f) < 1e3 * NEWTON_TOL).then_some(w)
}

/// One proposal: random `(t, r, d~)`, a root of `Phi^k` near `+-e_k`, then a
/// point whose image is uniform in the ball of radius `c_bar t`.
fn propose(p: &NondegParams, index: u64) -> Option<Sample> {
    let n = p.n;
    let mut rng = RngStream::derived(p.seed, derive_stream_id(NONDEG_STREAM, n as u64), index);
    let t = rng.uniform_in(p.log2_t.0, p.log2_t.1).exp2();
    let radii = Radii::new((0..n).map(|_| rng.uniform_in(0.5, 2.0)).collect()).ok()?;
    let c2 = p.c_n * p.c_n;
    let d_tilde: Vec<f64> = (0..n)
        .map(|j| f64::from(u8::from(j != p.k)) + 0.99 * rng.uniform_in(-c2, c2))
        .collect();
    let frame = AxisFrame::perturbed(n, p.k, d_tilde, &p.c_n).ok()?;
    let cfg = TangencyConfig::new(frame, t, radii).ok()?;

    let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
    let mut start: Vec<f64> = (0..n).map(|_| 0.3 * rng.normal()).collect();
    start[p.k] += sign;
    let zero = vec![0.0; n];
    let root = solve(&cfg, &start, &zero)?;

    let mut target = rng.unit_vector(n);
    let radius = p.c_bar * t * rng.uniform().powf(1.0 / n as f64);
    target.iter_mut().for_each(|v| *v *= radius);
    let omega = solve(&cfg, &root, &target)?;

    if omega[p.k].abs().powi(3) < 2.0 * p.c_n {
        return None;
    }
    if !(norm(&phi_k(&cfg, &omega).ok()?) < p.c_bar * t) {
        return None;
    }
    let jac = d_omega_phi_k(&cfg, &omega).ok()?;
    Some(measure(&jac, &omega, t))
}

fn measure(jac: &Matrix<f64>, omega: &[f64], t: f64) -> Sample {
    let n = omega.len();
    let weight: f64 = omega.iter().map(|w| w.abs()).product();
    let det_ratio = jac.det().abs() * weight / t.powi(n as i32 - 1);
    let inverse_ratio = jac.inverse().map_or(f64::INFINITY, |m| t * m.frobenius_norm());
    let mut minor_ratio = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let m = jac.minor(a, b).det().abs() * weight / t.powi(n as i32 - 2);
            minor_ratio = minor_ratio.max(m);
        }
    }
    Sample { t, det_ratio, inverse_ratio, minor_ratio }
}

/// Rejection-sample `X^k` near the roots of `Phi^k` and record the constants
/// of the determinant, inverse and minor bounds.
pub fn nondeg_bounds_scan(p: &NondegParams) -> Result<NondegReport> {
    p.validate()?;
    let budget = p.trials * p.max_proposals_per_trial;
    let mut accepted: Vec<Sample> = Vec::with_capacity(p.trials);
    let mut proposals = 0usize;
    while accepted.len() < p.trials && proposals < budget {
        let batch = (p.trials - accepted.len()).max(64).min(budget - proposals);
        let found: Vec<Option<Sample>> = (proposals..proposals + batch)
            .into_par_iter()
            .map(|i| propose(p, i as u64))
            .collect();
        for s in found {
            proposals += 1;
            if let Some(s) = s {
                accepted.push(s);
                if accepted.len() == p.trials {
                    break;
                }
            }
        }
    }
    if accepted.is_empty() {
        return Err(Error::InsufficientData("no proposal satisfied |Phi^k| < c_bar t".into()));
    }
    let fold = |f: fn(&Sample) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        accepted.iter().map(f).fold(init, op)
    };
    Ok(NondegReport {
        n: p.n,
        k: p.k,
        c_bar: p.c_bar,
        proposals,
        accepted: accepted.len(),
        min_det_ratio: fold(|s| s.det_ratio, f64::INFINITY, f64::min),
        max_inverse_ratio: fold(|s| s.inverse_ratio, 0.0, f64::max),
        max_minor_ratio: fold(|s| s.minor_ratio, 0.0, f64::max),
        t_min: fold(|s| s.t, f64::INFINITY, f64::min),
        t_max: fold(|s| s.t, 0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_scan() {
        let rep = nondeg_bounds_scan(&NondegParams::new(3, 0, 300, 1)).unwrap();
        assert_eq!(rep.accepted, 300);
        assert!(rep.min_det_ratio > 0.0 && rep.min_det_ratio.is_finite());
        assert!(rep.max_inverse_ratio.is_finite());
        assert!(rep.max_minor_ratio.is_finite());
        assert!(rep.t_min < 0.05 && rep.t_max > 1.0);
    }

    #[test]
    fn floors_are_stable_across_seeds() {
        let a = nondeg_bounds_scan(&NondegParams::new(3, 0, 300, 2)).unwrap();
        let b = nondeg_bounds_scan(&NondegParams::new(3, 0, 300, 3)).unwrap();
        let drift = |x: f64, y: f64| x.max(y) / x.min(y);
        assert!(drift(a.max_inverse_ratio, b.max_inverse_ratio) <= 2.0, "{a:?} {b:?}");
        assert!(drift(a.min_det_ratio, b.min_det_ratio) <= 2.0, "{a:?} {b:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = NondegParams::new(3, 3, 10, 0);
        assert!(nondeg_bounds_scan(&p).is_err());
        p.k = 1;
        p.c_bar = 0.0;
        assert!(nondeg_bounds_scan(&p).is_err());
    }

    #[test]
    fn impossible_tolerance_reports_no_data() {
        let mut p = NondegParams::new(3, 0, 5, 0);
        p.c_n = 0.9;
        p.max_proposals_per_trial = 4;
        // |omega_k|^3 >= 1.8 is impossible near the unit sphere.
        assert!(matches!(nondeg_bounds_scan(&p), Err(Error::InsufficientData(_))));
    }
}
