use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slab::KnappSlab;
use super::tangency_set::{phi_jacobian, sample_tangency_set, TangencySample, TangencySet};
use crate::error::{invalid, Result};
use crate::geometry::{Annulus, AnnulusSpec, Ellipsoid, ShellKernel};
use crate::mc::{derive_stream_id, fit_line, Moments, RngStream, ScalingFit};
use crate::volume::shell_volume;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappParams {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub p: f64,
    /// Tangency samples `(x, r_x)`.
    pub x_samples: usize,
    /// Slab samples per tangency sample.
    pub slab_samples: usize,
    pub rho_omega: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappRow {
    pub delta: f64,
    pub p: f64,
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappExponent {
    pub rows: Vec<KnappRow>,
    /// Slope of `ln R` against `ln delta`.
    pub fit: ScalingFit,
    /// `(n - 1)/2 - (n + 1)/(2p)`.
    pub predicted_slope: f64,
}

/// Average of the slab indicator over `E^delta(x, r)`, computed as
/// `|K| P(y in E^delta | y ~ K) / |E^delta|`.
pub fn slab_shell_average(slab: &KnappSlab, s: &TangencySample, samples: usize, rng: &mut RngStream) -> Result<f64> {
    let delta = slab.delta();
    let spec = AnnulusSpec::new(Ellipsoid::new(s.x.clone(), s.r.clone())?, delta)?;
    let kernel = ShellKernel::new(&spec);
    let n = s.x.len();
    let mut y = vec![0.0; n];
    let mut hits = 0usize;
    for _ in 0..samples {
        slab.sample_into(rng, &mut y);
        if kernel.contains(&y) {
            hits += 1;
        }
    }
    debug_assert!(spec.refinement().is_none());
    Ok(slab.volume() * hits as f64 / samples as f64 / shell_volume(&s.r, delta)?)
}

/// Knapp ratio `R(delta) = |L^delta|_{L^p(F)} / |chi_K|_p` with
/// `L^delta(x)` the slab average over the tangent annulus at `x`.
/// Integrals over `F` are pulled back to `Omega` with weight `|det J Phi|`.
pub fn knapp_exponent(p: &KnappParams) -> Result<KnappExponent> {
    if !(p.p >= 1.0 && p.p.is_finite()) {
        return Err(invalid("p", format!("{} is not in [1, inf)", p.p)));
    }
    if p.deltas.len() < 3 {
        return Err(invalid("deltas", "need at least 3 values"));
    }
    if p.x_samples == 0 || p.slab_samples == 0 {
        return Err(invalid("samples", "need positive sample counts"));
    }
    let set = TangencySet::new(p.n, p.rho_omega)?;
    let points = sample_tangency_set(&set, p.x_samples, p.seed);
    let weights: Vec<f64> = points.iter().map(|s| phi_jacobian(s.r.as_slice()).det().abs()).collect();
    let mut rows = Vec::with_capacity(p.deltas.len());
    for (di, &delta) in p.deltas.iter().enumerate() {
        let slab = KnappSlab::new(p.n, delta)?;
        let vals = points
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let mut rng = RngStream::derived(p.seed, derive_stream_id(0x6b6e, di as u64), i as u64);
                slab_shell_average(&slab, s, p.slab_samples, &mut rng).map(|l| l.powf(p.p) * weights[i])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mom = Moments::default();
        vals.iter().for_each(|&v| mom.push(v));
        let integral = mom.estimate(p.seed).scale(set.omega_volume() / slab.volume());
        if !(integral.value > 0.0) {
            return Err(crate::Error::Domain(format!("no slab mass captured at delta = {delta}")));
        }
        let ratio = integral.value.powf(1.0 / p.p);
        rows.push(KnappRow {
            delta,
            p: p.p,
            ratio,
            std_error: ratio * integral.std_error / integral.value / p.p,
        });
    }
    let fit = fit_line(rows.iter().map(|r| (r.delta.ln(), r.ratio.ln())).collect())?;
    let n = p.n as f64;
    Ok(KnappExponent {
        rows,
        fit,
        predicted_slope: (n - 1.0) / 2.0 - (n + 1.0) / (2.0 * p.p),
    })
}
