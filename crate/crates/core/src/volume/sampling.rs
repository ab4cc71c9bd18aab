use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{Annulus, AnnulusSpec, Ellipsoid, Radii, ShellKernel};
use crate::mc::{estimate_mean, run_chunks, MCEstimate, RngStream};

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Surface area of `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Exact Lebesgue measure of `{ |F_{x,r}| < delta }`.
pub fn shell_volume(r: &Radii<f64>, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("{delta} not in (0, 1)")));
    }
    let h = r.dim() as f64 / 2.0;
    Ok(r.product() * unit_ball_volume(r.dim()) * ((1.0 + delta).powf(h) - (1.0 - delta).powf(h)))
}

/// Uniform sampler of the spherical shell `1 - delta < |omega|^2 < 1 + delta`.
#[derive(Debug, Clone, Copy)]
pub struct ShellSampler {
    n: usize,
    lo: f64,
    span: f64,
}

impl ShellSampler {
    pub fn new(n: usize, delta: f64) -> Self {
        let h = n as f64 / 2.0;
        let lo = (1.0 - delta).powf(h);
        Self {
            n,
            lo,
            span: (1.0 + delta).powf(h) - lo,
        }
    }

    /// Direction uniform on the sphere, radius with density `s^{n-1}`.
    #[inline]
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        rng.unit_vector_into(out);
        let s = (self.lo + self.span * rng.uniform()).powf(1.0 / self.n as f64);
        out.iter_mut().for_each(|v| *v *= s);
    }
}

/// `m` points uniform on the annulus.
pub fn sample_annulus(spec: &AnnulusSpec<f64>, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = spec.dim();
    let sampler = ShellSampler::new(n, *spec.delta());
    let kernel = ShellKernel::new(spec);
    run_chunks(m, seed, 0, |rng, len| {
        let mut omega = vec![0.0; n];
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            sampler.sample_into(rng, &mut omega);
            let mut y = vec![0.0; n];
            kernel.forward_into(&omega, &mut y);
            // Guards the open boundary against rounding.
            if spec.contains(&y) {
                out.push(y);
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Surface weight of `A(theta)` relative to the uniform law on the sphere:
/// `|S^{n-1}| * prod(r) * |theta / r|`.
#[inline]
pub fn surface_weight(r: &[f64], prod_r: f64, sphere_area: f64, theta: &[f64]) -> f64 {
    let s: f64 = theta.iter().zip(r).map(|(t, ri)| (t / ri) * (t / ri)).sum();
    sphere_area * prod_r * s.sqrt()
}

/// Points `A(theta)` with `theta` uniform on the sphere, each with its
/// surface weight; the mean weight is the surface area.
pub fn sample_surface(e: &Ellipsoid<f64>, m: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let n = e.dim();
    let r = e.radii().as_slice().to_vec();
    let prod = e.radii().product();
    let area = unit_sphere_area(n);
    run_chunks(m, seed, 0, |rng, len| {
        (0..len)
            .map(|_| {
                let theta = rng.unit_vector(n);
                let w = surface_weight(&r, prod, area, &theta);
                let y = e.from_preimage(&theta).expect("dimensions agree");
                (y, w)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Surface area of the ellipsoid by the same weights.
pub fn surface_area(r: &Radii<f64>, m: usize, seed: u64) -> MCEstimate {
    let n = r.dim();
    let rs = r.as_slice().to_vec();
    let prod = r.product();
    let area = unit_sphere_area(n);
    estimate_mean(m, seed, 0, |rng| {
        let mut theta = [0.0; 16];
        let theta = &mut theta[..n];
        rng.unit_vector_into(theta);
        surface_weight(&rs, prod, area, theta)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Annulus;

    fn unit(n: usize, delta: f64) -> AnnulusSpec<f64> {
        AnnulusSpec::new(Ellipsoid::unit_sphere(n), delta).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn shell_volume_examples() {
        assert!((shell_volume(&Radii::unit(2), 0.25).unwrap() - PI / 2.0).abs() < 1e-14);
        let v = shell_volume(&Radii::unit(3), 0.1).unwrap();
        assert!((v - 1.256112477).abs() < 1e-8);
        let v2 = shell_volume(&Radii::uniform(3, 2.0).unwrap(), 0.1).unwrap();
        assert!((v2 / v - 8.0).abs() < 1e-12);
        assert!(shell_volume(&Radii::unit(3), 1.0).is_err());
    }

    #[test]
    fn shell_volume_by_rejection() {
        // Uniform points in [-1.1, 1.1]^3.
        let e = estimate_mean(2_000_000, 4, 0, |rng| {
            let s: f64 = (0..3).map(|_| rng.uniform_in(-1.1, 1.1).powi(2)).sum();
            if (s - 1.0).abs() < 0.1 { 2.2f64.powi(3) } else { 0.0 }
        });
        assert!(e.agrees_with_value(shell_volume(&Radii::unit(3), 0.1).unwrap(), 3.0), "{e:?}");
    }

    #[test]
    fn annulus_samples_are_members_and_centred() {
        let e = Ellipsoid::new(vec![1.0, -2.0, 0.5], Radii::new(vec![1.5, 0.7, 1.1]).unwrap()).unwrap();
        let spec = AnnulusSpec::new(e, 0.2).unwrap();
        let pts = sample_annulus(&spec, 100_000, 9);
        assert_eq!(pts.len(), 100_000);
        assert!(pts.iter().all(|p| spec.contains(p)));
        for j in 0..3 {
            let vals: Vec<f64> = pts.iter().map(|p| p[j]).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
            let se = sd / (vals.len() as f64).sqrt();
            assert!((m - spec.ellipsoid().centre()[j]).abs() < 3.0 * se);
        }
    }

    #[test]
    fn outer_fraction_matches_radial_law() {
        let (n, delta) = (3, 0.3);
        let pts = sample_annulus(&unit(n, delta), 200_000, 1);
        let frac = pts.iter().filter(|p| p.iter().map(|v| v * v).sum::<f64>() > 1.0).count() as f64
            / pts.len() as f64;
        let h = n as f64 / 2.0;
        let p = ((1.0 + delta).powf(h) - 1.0) / ((1.0 + delta).powf(h) - (1.0 - delta).powf(h));
        let se = (p * (1.0 - p) / pts.len() as f64).sqrt();
        assert!((frac - p).abs() < 3.0 * se);
    }

    #[test]
    fn sphere_area_and_centroid() {
        let e = Ellipsoid::new(vec![0.3, 0.0, -1.0], Radii::unit(3)).unwrap();
        let s = sample_surface(&e, 50_000, 2);
        let mean = s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64;
        assert!((mean - 4.0 * PI).abs() < 1e-10);
        let wsum: f64 = s.iter().map(|p| p.1).sum();
        for j in 0..3 {
            let c: f64 = s.iter().map(|(y, w)| y[j] * w).sum::<f64>() / wsum;
            assert!((c - e.centre()[j]).abs() < 0.02);
        }
    }

    #[test]
    fn prolate_spheroid_area() {
        let a = surface_area(&Radii::new(vec![2.0, 1.0, 1.0]).unwrap(), 400_000, 3);
        // 2 pi b^2 (1 + a / (b e) asin e), e = sqrt(3)/2, asin e = pi/3.
        let exact = 2.0 * PI * (1.0 + 4.0 / 3f64.sqrt() * PI / 3.0);
        assert!((exact - 21.478).abs() < 1e-3);
        assert!(a.agrees_with_value(exact, 3.0), "{a:?}");
    }
}
