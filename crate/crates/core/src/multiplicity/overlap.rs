use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{generate_family, EllipsoidFamily};
use crate::error::{invalid, Result};
use crate::geometry::{Annulus, ShellKernel};
use crate::maximal::BoxRegion;
use crate::mc::{derive_stream_id, estimate_means, MCEstimate};
use crate::volume::{shell_volume, ShellSampler};

/// `|A_i ∩ A_j|` for refined and plain annuli on the same samples of the
/// plain shell of `i`, so the refined value never exceeds the plain one.
fn pair_volumes(family: &EllipsoidFamily, i: usize, j: usize, m: usize, seed: u64) -> Result<[MCEstimate; 2]> {
    let n = family.n;
    let a = family.refined(i);
    let b = family.refined(j);
    let ka = ShellKernel::new(&a);
    let kb = ShellKernel::new(&b);
    let kb_plain = ShellKernel::new(b.spec());
    let sampler = ShellSampler::new(n, family.delta);
    let vol = shell_volume(&family.radii[i], family.delta)?;
    let stream = derive_stream_id(0x7061_6972, (i * family.len() + j) as u64);
    let est = estimate_means::<2, _>(m, seed, stream, |rng| {
        let mut omega = [0.0; 16];
        let mut y = [0.0; 16];
        let (omega, y) = (&mut omega[..n], &mut y[..n]);
        sampler.sample_into(rng, omega);
        ka.forward_into(omega, y);
        let plain = kb_plain.contains(y);
        let refined = plain && ka.passes_refinement(omega) && kb.contains(y);
        [f64::from(u8::from(refined)), f64::from(u8::from(plain))]
    });
    Ok(est.map(|e| e.scale(vol)))
}

/// Samples for a pair at parameter distance `tau`: `m / 2^c` for dyadic
/// class `c = floor(log2(tau / delta))`, floored at `m / 16`.
pub fn pair_samples(m: usize, delta: f64, tau: f64) -> usize {
    let class = (tau / delta).log2().floor().max(0.0) as u32;
    (m >> class.min(63)).max(m / 16).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// `|sum chi_{E^{delta,k}}|_2`.
    pub norm: MCEstimate,
    /// Same for the plain annuli.
    pub norm_unrefined: MCEstimate,
    /// Diagonal part `sum_E |E^{delta,k}|`.
    pub diagonal: f64,
    pub pairs: usize,
    /// `max_{E_1, tau} #{E : tau <= |t - t_1| < 2 tau} / (tau / delta)` over
    /// dyadic `tau >= delta`.
    pub max_class_density: f64,
}

/// `|sum chi|_2^2 = sum_{i,j} |E_i ∩ E_j|`, pairwise, with fewer samples for
/// pairs in distant dyadic classes.
pub fn overlap_l2(family: &EllipsoidFamily, m: usize, seed: u64) -> Result<OverlapReport> {
    if family.is_empty() {
        return Err(invalid("family", "empty family"));
    }
    if m == 0 {
        return Err(invalid("m", "need at least one sample"));
    }
    let count = family.len();
    let pairs: Vec<(usize, usize)> = (0..count).flat_map(|i| (i..count).map(move |j| (i, j))).collect();
    let vols = pairs
        .par_iter()
        .map(|&(i, j)| {
            let tau = (family.ts[i] - family.ts[j]).abs();
            let mm = if i == j { m } else { pair_samples(m, family.delta, tau) };
            pair_volumes(family, i, j, mm, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sq = [(0.0f64, 0.0f64); 2];
    let mut diagonal = 0.0;
    for (&(i, j), v) in pairs.iter().zip(&vols) {
        let w = if i == j { 1.0 } else { 2.0 };
        if i == j {
            diagonal += v[0].value;
        }
        for (s, e) in sq.iter_mut().zip(v) {
            s.0 += w * e.value;
            s.1 += (w * e.std_error).powi(2);
        }
    }
    let root = |(v, var): (f64, f64)| {
        let value = v.max(0.0).sqrt();
        MCEstimate {
            value,
            std_error: if value > 0.0 { var.sqrt() / (2.0 * value) } else { 0.0 },
            n_samples: m as u64,
            seed,
        }
    };
    Ok(OverlapReport {
        norm: root(sq[0]),
        norm_unrefined: root(sq[1]),
        diagonal,
        pairs: pairs.len(),
        max_class_density: class_density(family),
    })
}

fn class_density(family: &EllipsoidFamily) -> f64 {
    let mut worst = 0.0f64;
    for &t1 in &family.ts {
        let mut tau = family.delta;
        while tau <= 2.0 {
            let c = family
                .ts
                .iter()
                .filter(|&&t| {
                    let d = (t - t1).abs();
                    d >= tau && d < 2.0 * tau
                })
                .count();
            worst = worst.max(c as f64 / (tau / family.delta));
            tau *= 2.0;
        }
    }
    worst
}

/// `int (sum chi_{E^{delta,k}})^2` by uniform sampling of a box around the
/// family; the independent oracle for small families.
pub fn overlap_l2_direct(family: &EllipsoidFamily, m: usize, seed: u64) -> Result<MCEstimate> {
    if family.is_empty() {
        return Err(invalid("family", "empty family"));
    }
    let n = family.n;
    let kernels: Vec<ShellKernel> = (0..family.len()).map(|i| ShellKernel::new(&family.refined(i))).collect();
    let mut bbox: Option<BoxRegion> = None;
    for i in 0..family.len() {
        let e = family.ellipsoid(i);
        let reach = e.radii().as_slice().iter().fold(0.0f64, |a, r| a.max(*r)) * (1.0 + family.delta).sqrt();
        let b = BoxRegion::cube(e.centre(), reach)?;
        bbox = Some(match bbox {
            None => b,
            Some(acc) => acc.union(&b)?,
        });
    }
    let bbox = bbox.expect("family is non-empty");
    let vol = bbox.volume();
    let [sq] = estimate_means::<1, _>(m, seed, 0x0064_6972, |rng| {
        let mut y = [0.0; 16];
        bbox.sample_into(rng, &mut y[..n]);
        let c = kernels.iter().filter(|k| k.contains(&y[..n])).count() as f64;
        [c * c]
    });
    Ok(sq.scale(vol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CordobaParams {
    pub n: usize,
    pub k: usize,
    pub deltas: Vec<f64>,
    pub trials: usize,
    /// Pair samples at distance below `2 delta`.
    pub samples: usize,
    pub c_n: f64,
    pub seed: u64,
}

/// `N(delta) = floor(1/delta)`.
pub fn default_count(delta: f64) -> usize {
    (1.0 / delta).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CordobaRow {
    pub delta: f64,
    pub trial_seed: u64,
    pub count: usize,
    pub norm: f64,
    pub std_error: f64,
    pub bound: f64,
    pub c: f64,
    pub c_unrefined: f64,
    pub max_class_density: f64,
    /// `|sum chi|_2^2` divided by the diagonal `sum |E^{delta,k}|`.
    pub diagonal_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CordobaReport {
    pub rows: Vec<CordobaRow>,
    /// Worst `C` per delta, in grid order.
    pub worst: Vec<(f64, f64)>,
    /// `max / min` of the worst constants.
    pub drift: f64,
}

/// `C(delta) = |sum chi|_2 / (ln(1/delta) delta^{1/2} N^{1/2})`, worst over
/// seeded families.
pub fn cordoba_check(p: &CordobaParams, count_rule: impl Fn(f64) -> usize) -> Result<CordobaReport> {
    if p.deltas.len() < 3 {
        return Err(invalid("deltas", "need at least 3 values"));
    }
    if p.trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let mut rows = Vec::new();
    let mut worst = Vec::new();
    for (di, &delta) in p.deltas.iter().enumerate() {
        let count = count_rule(delta);
        let mut w = 0.0f64;
        for trial in 0..p.trials {
            let trial_seed = derive_stream_id(p.seed, (di * p.trials + trial) as u64);
            let family = generate_family(p.n, p.k, delta, count, p.c_n, trial_seed)?;
            let rep = overlap_l2(&family, p.samples, trial_seed)?;
            let bound = (1.0 / delta).ln() * delta.sqrt() * (count as f64).sqrt();
            let c = rep.norm.value / bound;
            w = w.max(c);
            rows.push(CordobaRow {
                delta,
                trial_seed,
                count,
                norm: rep.norm.value,
                std_error: rep.norm.std_error,
                bound,
                c,
                c_unrefined: rep.norm_unrefined.value / bound,
                max_class_density: rep.max_class_density,
                diagonal_ratio: rep.norm.value.powi(2) / rep.diagonal,
            });
        }
        worst.push((delta, w));
    }
    let hi = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let lo = worst.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    Ok(CordobaReport {
        rows,
        worst,
        drift: hi / lo,
    })
}
