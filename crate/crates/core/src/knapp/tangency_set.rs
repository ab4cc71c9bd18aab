use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{defining_gradient, defining_value, tangency_centre, tangency_radii, Radii};
use crate::linalg::Matrix;
use crate::mc::RngStream;
use crate::volume::unit_ball_volume;

/// Ball `Omega` of radii around `(3/2, ..., 3/2)`; its image under
/// `r -> r^2 / |r|` is the tangency set `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencySet {
    pub n: usize,
    pub rho: f64,
}

impl TangencySet {
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "need n >= 2"));
        }
        if !(rho > 0.0 && rho <= 0.5) {
            return Err(invalid("rho_omega", format!("{rho} not in (0, 1/2], Omega must stay inside [1, 2]^n")));
        }
        Ok(Self { n, rho })
    }

    pub fn omega_volume(&self) -> f64 {
        unit_ball_volume(self.n) * self.rho.powi(self.n as i32)
    }

    /// Radii uniform in `Omega`.
    pub fn sample_radii(&self, rng: &mut RngStream) -> Radii<f64> {
        let mut v = rng.unit_vector(self.n);
        let s = self.rho * rng.uniform().powf(1.0 / self.n as f64);
        v.iter_mut().for_each(|c| *c = 1.5 + s * *c);
        Radii::new(v).expect("Omega lies in the positive orthant")
    }
}

/// A point of `F` with its tangency radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencySample {
    pub x: Vec<f64>,
    pub r: Radii<f64>,
}

impl TangencySample {
    /// `|F_{x,r}(0)|`, `max |r - tangency_radii(x)|`, and the spread of the
    /// gradient components at the origin relative to their size.
    pub fn residuals(&self) -> (f64, f64, f64) {
        let zero = vec![0.0; self.x.len()];
        let f0 = defining_value(&self.x, &self.r, &zero).map(f64::abs).unwrap_or(f64::INFINITY);
        let round = tangency_radii(&self.x)
            .map(|back| {
                back.as_slice()
                    .iter()
                    .zip(self.r.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY);
        let g = defining_gradient(&self.x, &self.r, &zero).expect("dimensions agree");
        let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (f0, round, (hi - lo) / hi.abs().max(lo.abs()))
    }
}

/// `m` seeded draws `r ~ Omega`, `x = Phi(r)`.
pub fn sample_tangency_set(set: &TangencySet, m: usize, seed: u64) -> Vec<TangencySample> {
    (0..m)
        .map(|i| {
            let mut rng = RngStream::derived(seed, 0x7461_6e67, i as u64);
            let r = set.sample_radii(&mut rng);
            TangencySample {
                x: tangency_centre(&r),
                r,
            }
        })
        .collect()
}

/// `Phi(r) = r^2 / |r|` componentwise.
pub fn phi(r: &[f64]) -> Vec<f64> {
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    r.iter().map(|v| v * v / norm).collect()
}

/// `d Phi_i / d r_j = 2 r_i [i = j] / |r| - r_i^2 r_j / |r|^3`.
pub fn phi_jacobian(r: &[f64]) -> Matrix<f64> {
    let s = r.iter().map(|v| v * v).sum::<f64>();
    let norm = s.sqrt();
    Matrix::from_fn(r.len(), r.len(), |i, j| {
        let diag = if i == j { 2.0 * r[i] / norm } else { 0.0 };
        diag - r[i] * r[i] * r[j] / (s * norm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centre_of_omega_maps_to_norm_three_halves() {
        let x = phi(&[1.5; 3]);
        for v in &x {
            assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-15);
        }
        assert!((x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn samples_satisfy_tangency() {
        let set = TangencySet::new(4, 0.1).unwrap();
        for s in sample_tangency_set(&set, 500, 3) {
            let (f0, round, spread) = s.residuals();
            assert!(f0 < 1e-12 && round < 1e-12 && spread < 1e-12, "{f0} {round} {spread}");
            assert!(s.r.within(&1.0, &2.0));
        }
    }

    #[test]
    fn rho_is_validated() {
        assert!(TangencySet::new(3, 0.6).is_err());
        assert!(TangencySet::new(3, 0.0).is_err());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let r = [1.2, 1.7, 1.4];
        let j = phi_jacobian(&r);
        let h = 1e-6;
        for c in 0..3 {
            let mut p = r;
            let mut q = r;
            p[c] += h;
            q[c] -= h;
            let (fp, fq) = (phi(&p), phi(&q));
            for i in 0..3 {
                assert!(((fp[i] - fq[i]) / (2.0 * h) - j[(i, c)]).abs() < 1e-8);
            }
        }
    }
}
