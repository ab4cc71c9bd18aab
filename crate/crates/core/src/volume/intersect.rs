use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{shell_volume, ShellSampler};
use crate::error::{check_dim, invalid, Result};
use crate::geometry::{
    Annulus, AnnulusSpec, AxisFrame, Ellipsoid, GramKernel, Radii, ShellKernel, TangencyConfig,
};
use crate::mc::{derive_stream_id, estimate_mean, estimate_means_dyn, MCEstimate, RngStream};

/// `|a ∩ b|` as `|shell(a)|` times the fraction of uniform `a`-shell samples
/// that pass both refinement filters and land in `b`.
pub fn intersection_volume<A, B>(a: &A, b: &B, m: usize, seed: u64) -> Result<MCEstimate>
where
    A: Annulus<f64> + ?Sized,
    B: Annulus<f64> + ?Sized,
{
    intersection_volume_on(a, b, m, seed, 0)
}

/// [`intersection_volume`] on an explicit stream.
pub fn intersection_volume_on<A, B>(a: &A, b: &B, m: usize, seed: u64, stream: u64) -> Result<MCEstimate>
where
    A: Annulus<f64> + ?Sized,
    B: Annulus<f64> + ?Sized,
{
    let n = a.spec().dim();
    check_dim(n, b.spec().dim())?;
    let delta = *a.spec().delta();
    let vol = shell_volume(a.spec().ellipsoid().radii(), delta)?;
    let sampler = ShellSampler::new(n, delta);
    let ka = ShellKernel::new(a);
    let kb = ShellKernel::new(b);
    let est = estimate_mean(m, seed, stream, |rng| {
        let mut omega = [0.0; 16];
        let mut y = [0.0; 16];
        let (omega, y) = (&mut omega[..n], &mut y[..n]);
        sampler.sample_into(rng, omega);
        if !ka.passes_refinement(omega) {
            return 0.0;
        }
        ka.forward_into(omega, y);
        if kb.contains(y) {
            1.0
        } else {
            0.0
        }
    });
    Ok(est.scale(vol))
}

/// `ln(1/delta) delta^2 / (delta + t)`.
pub fn volume_bound(delta: f64, t: f64) -> f64 {
    (1.0 / delta).ln() * delta * delta / (delta + t)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeBoundRow {
    pub delta: f64,
    pub t: f64,
    pub trial: usize,
    pub measured: MCEstimate,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeBoundScan {
    pub rows: Vec<VolumeBoundRow>,
    /// `(delta, max ratio over t and trials)`.
    pub max_ratio: Vec<(f64, f64)>,
    /// Largest over smallest of the per-delta maxima.
    pub drift: f64,
}

/// Parameters of [`volume_bound_scan`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeBoundParams {
    pub n: usize,
    pub k: usize,
    pub deltas: Vec<f64>,
    pub ts: Vec<f64>,
    pub pair_trials: usize,
    pub samples: usize,
    pub c_n: f64,
    pub seed: u64,
}

/// Refined intersection volumes of `E^{delta,k}(0, 1)` and
/// `E^{delta,k}(t d~, r_2 / r_1)` with `d~ = d_k / r_1`, for radii pairs
/// drawn from the restricted box, divided by [`volume_bound`].
pub fn volume_bound_scan(p: &VolumeBoundParams) -> Result<VolumeBoundScan> {
    if p.deltas.is_empty() || p.ts.is_empty() || p.pair_trials == 0 {
        return Err(invalid("grid", "delta list, t list and trials must be non-empty"));
    }
    if let Some(&d) = p.deltas.iter().find(|&&d| !(d > 0.0 && d <= 0.5)) {
        return Err(invalid("delta", format!("{d} not in (0, 1/2]")));
    }
    if let Some(&t) = p.ts.iter().find(|&&t| !(t > 0.0 && t <= 2.0)) {
        return Err(invalid("t", format!("{t} not in (0, 2]")));
    }
    let n = p.n;
    let hi = 1.0 + p.c_n * p.c_n;
    let pairs: Vec<(Radii<f64>, Radii<f64>)> = (0..p.pair_trials)
        .map(|i| {
            let mut rng = RngStream::derived(p.seed, 1, i as u64);
            let mut draw = || Radii::new((0..n).map(|_| rng.uniform_in(1.0, hi)).collect());
            Ok((draw()?, draw()?))
        })
        .collect::<Result<_>>()?;
    let d_k = AxisFrame::<f64>::new(n, p.k)?.d().to_vec();

    let mut cells = Vec::new();
    for &delta in &p.deltas {
        for &t in &p.ts {
            for trial in 0..p.pair_trials {
                cells.push((delta, t, trial));
            }
        }
    }
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(delta, t, trial))| {
            let (r1, r2) = &pairs[trial];
            let a = AnnulusSpec::new(Ellipsoid::unit_sphere(n), delta)?.refine(p.k, p.c_n)?;
            let centre: Vec<f64> = d_k.iter().zip(r1.as_slice()).map(|(d, r)| t * d / r).collect();
            let b = AnnulusSpec::new(Ellipsoid::new(centre, r2.ratio(r1)?)?, delta)?.refine(p.k, p.c_n)?;
            let measured = intersection_volume_on(&a, &b, p.samples, p.seed, derive_stream_id(2, idx as u64))?;
            let bound = volume_bound(delta, t);
            Ok(VolumeBoundRow {
                delta,
                t,
                trial,
                ratio: measured.value / bound,
                measured,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio: Vec<(f64, f64)> = p
        .deltas
        .iter()
        .map(|&d| {
            let m = rows
                .iter()
                .filter(|r| r.delta == d)
                .map(|r| r.ratio)
                .fold(0.0, f64::max);
            (d, m)
        })
        .collect();
    let hi = max_ratio.iter().map(|x| x.1).fold(0.0, f64::max);
    let lo = max_ratio.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok(VolumeBoundScan {
        rows,
        max_ratio,
        drift: hi / lo,
    })
}

/// Intersection volume split by the size of the tangency functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandDecomposition {
    pub tang_volume: MCEstimate,
    pub trans_volume: MCEstimate,
    /// `(rho, volume of { max(rho, 2 sqrt(t delta)) <= ||J|| < min(2 rho, t) })`.
    pub dyadic_bands: Vec<(f64, MCEstimate)>,
    pub total: MCEstimate,
    pub delta: f64,
    pub t: f64,
}

impl BandDecomposition {
    /// Sum of the class volumes; equals `total` sample by sample.
    pub fn class_sum(&self) -> MCEstimate {
        let mut s = self.tang_volume.add_independent(self.trans_volume);
        for (_, b) in &self.dyadic_bands {
            s = s.add_independent(*b);
        }
        s
    }
}

/// Dyadic scales `t/2, t/4, ...` down to the last one `>= sqrt(t delta)`.
pub fn dyadic_scales(t: f64, delta: f64) -> Vec<f64> {
    let floor = (t * delta).sqrt();
    let mut out = Vec::new();
    let mut rho = t / 2.0;
    while rho >= floor {
        out.push(rho);
        rho /= 2.0;
    }
    out
}

/// Splits `|E^{delta,k}(0, 1) ∩ E^delta(t d~, r)|` into the tangential part
/// `||J|| < 2 (t delta)^{1/2}`, the transversal part `||J|| >= t`, and
/// dyadic bands in between, with `||J||` taken at the preimage point.
pub fn banded_intersection_scan(
    cfg: &TangencyConfig<f64>,
    delta: f64,
    c_n: f64,
    m: usize,
    seed: u64,
) -> Result<BandDecomposition> {
    let t = *cfg.t();
    if !(t > 10.0 * delta) {
        return Err(invalid("t", format!("{t} must exceed 10 delta = {}", 10.0 * delta)));
    }
    let n = cfg.dim();
    let a = AnnulusSpec::new(Ellipsoid::unit_sphere(n), delta)?.refine(cfg.k(), c_n)?;
    let b = AnnulusSpec::new(Ellipsoid::new(cfg.centre(), cfg.radii().clone())?, delta)?;
    let vol = shell_volume(&Radii::unit(n), delta)?;
    let scales = dyadic_scales(t, delta);
    let tang_cut = 2.0 * (t * delta).sqrt();
    let nb = scales.len();
    let sampler = ShellSampler::new(n, delta);
    let (ka, kb) = (ShellKernel::new(&a), ShellKernel::new(&b));
    let gram = GramKernel::new(cfg);
    // Slots: tang, bands..., trans, total.
    let est = estimate_means_dyn(nb + 3, m, seed, 0, |rng, out| {
        let mut omega = [0.0; 16];
        let omega = &mut omega[..n];
        sampler.sample_into(rng, omega);
        if !ka.passes_refinement(omega) || !kb.contains(omega) {
            return;
        }
        out[nb + 2] = 1.0;
        let j = gram.norm(omega);
        if j < tang_cut {
            out[0] = 1.0;
        } else if j >= t {
            out[nb + 1] = 1.0;
        } else {
            // Largest rho with rho <= j; rho = t / 2^(i+1).
            let i = scales.iter().position(|&rho| j >= rho).unwrap_or(nb - 1);
            out[1 + i] = 1.0;
        }
    });
    let est: Vec<MCEstimate> = est.into_iter().map(|e| e.scale(vol)).collect();
    Ok(BandDecomposition {
        tang_volume: est[0],
        trans_volume: est[nb + 1],
        dyadic_bands: scales.iter().copied().zip(est[1..=nb].iter().copied()).collect(),
        total: est[nb + 2],
        delta,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_c_n;

    fn plain(centre: Vec<f64>, r: Vec<f64>, delta: f64) -> AnnulusSpec<f64> {
        AnnulusSpec::new(Ellipsoid::new(centre, Radii::new(r).unwrap()).unwrap(), delta).unwrap()
    }

    #[test]
    fn self_intersection_is_shell_volume() {
        let a = plain(vec![0.2, -0.1, 0.0], vec![1.2, 0.8, 1.0], 0.1);
        for seed in 0..5 {
            let v = intersection_volume(&a, &a, 50_000, seed).unwrap();
            let exact = shell_volume(a.ellipsoid().radii(), 0.1).unwrap();
            assert!((v.value - exact).abs() < 1e-12, "all samples hit");
        }
        let r = a.clone().refine(0, default_c_n(3)).unwrap();
        let v = intersection_volume(&r, &r, 100_000, 1).unwrap();
        let p = 1.0 - v.value / shell_volume(a.ellipsoid().radii(), 0.1).unwrap();
        // On the sphere |omega_0| is uniform, so the removed fraction is (2 c_n)^{1/3}.
        let cut = (2.0 * default_c_n(3)).cbrt();
        assert!((p - cut).abs() < 0.01, "{p} vs {cut}");
    }

    #[test]
    fn distant_annuli_do_not_meet() {
        let a = plain(vec![0.0; 3], vec![1.0; 3], 0.2);
        let b = plain(vec![10.0, 0.0, 0.0], vec![1.0; 3], 0.2);
        let v = intersection_volume(&a, &b, 20_000, 0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.std_error, 0.0);
    }

    #[test]
    fn planar_intersection_matches_grid_quadrature() {
        let delta = 0.05;
        let a = plain(vec![0.0, 0.0], vec![1.0, 1.0], delta);
        let b = plain(vec![1.0, 0.0], vec![1.0, 1.0], delta);
        let v = intersection_volume(&a, &b, 1_000_000, 5).unwrap();
        // Midpoint grid on [-1.1, 1.1] x [-1.1, 1.1], 4096^2 cells.
        let g = 4096;
        let h = 2.2 / g as f64;
        let mut hits = 0u64;
        for i in 0..g {
            let x = -1.1 + (i as f64 + 0.5) * h;
            for j in 0..g {
                let y = -1.1 + (j as f64 + 0.5) * h;
                let fa = x * x + y * y - 1.0;
                let fb = (x - 1.0) * (x - 1.0) + y * y - 1.0;
                if fa.abs() < delta && fb.abs() < delta {
                    hits += 1;
                }
            }
        }
        let grid = hits as f64 * h * h;
        assert!(v.agrees_with_value(grid, 3.0), "{v:?} vs {grid}");
    }

    #[test]
    fn refined_never_exceeds_plain() {
        let c = default_c_n(3);
        let a = plain(vec![0.0; 3], vec![1.0; 3], 0.1);
        let b = plain(vec![0.0, 0.4, 0.4], vec![1.1, 0.9, 1.0], 0.1);
        let p = intersection_volume(&a, &b, 100_000, 3).unwrap();
        for k in 0..3 {
            let ra = a.clone().refine(k, c).unwrap();
            let rb = b.clone().refine(k, c).unwrap();
            let q = intersection_volume(&ra, &rb, 100_000, 3).unwrap();
            assert!(q.value <= p.value);
        }
    }

    #[test]
    fn bound_scan_is_monotone_in_t() {
        let p = VolumeBoundParams {
            n: 3,
            k: 0,
            deltas: vec![1.0 / 32.0],
            ts: vec![0.125, 0.25, 0.5, 1.0],
            pair_trials: 2,
            samples: 100_000,
            c_n: default_c_n(3),
            seed: 4,
        };
        let s = volume_bound_scan(&p).unwrap();
        assert_eq!(s.rows.len(), 8);
        for trial in 0..2 {
            let v: Vec<&VolumeBoundRow> = s.rows.iter().filter(|r| r.trial == trial).collect();
            for w in v.windows(2) {
                let slack = 3.0 * w[0].measured.std_error.hypot(w[1].measured.std_error);
                assert!(w[1].measured.value <= w[0].measured.value + slack);
            }
        }
    }

    #[test]
    fn small_t_stays_below_shell() {
        let delta = 0.05;
        let p = VolumeBoundParams {
            n: 3,
            k: 1,
            deltas: vec![delta],
            ts: vec![0.04],
            pair_trials: 3,
            samples: 50_000,
            c_n: default_c_n(3),
            seed: 1,
        };
        let vol = shell_volume(&Radii::unit(3), delta).unwrap();
        for r in volume_bound_scan(&p).unwrap().rows {
            assert!(r.measured.value <= vol);
        }
        let bad = VolumeBoundParams { deltas: vec![0.7], ..p };
        assert!(volume_bound_scan(&bad).is_err());
    }

    #[test]
    fn bands_partition_the_total() {
        let frame = AxisFrame::new(3, 0).unwrap();
        let cfg = TangencyConfig::new(frame, 0.8, Radii::new(vec![0.9, 1.2, 1.1]).unwrap()).unwrap();
        let b = banded_intersection_scan(&cfg, 0.01, default_c_n(3), 400_000, 2).unwrap();
        assert!(!b.dyadic_bands.is_empty());
        let s = b.class_sum();
        assert!((s.value - b.total.value).abs() < 1e-12);
        assert!(s.agrees_with(&b.total, 3.0));
        let small = TangencyConfig::new(AxisFrame::new(3, 0).unwrap(), 0.05, Radii::unit(3)).unwrap();
        assert!(banded_intersection_scan(&small, 0.01, default_c_n(3), 10, 0).is_err());
    }

    #[test]
    fn scales_cover_down_to_the_tangential_cut() {
        let s = dyadic_scales(1.0, 1.0 / 64.0);
        assert_eq!(s, vec![0.5, 0.25, 0.125]);
        assert!(s.last().unwrap() * 2.0 >= 2.0 * (1.0f64 / 64.0).sqrt());
    }
}
