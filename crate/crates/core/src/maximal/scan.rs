use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{BoxRegion, Field};
use super::net::RadiiNet;
use super::operator::{discretised_maximal, power_estimate, MaximalParams};
use crate::error::{invalid, Result};
use crate::mc::{derive_stream_id, fit_power_law, Moments, RngStream, ScalingFit};

/// `sum_i a_i exp(-|y - c_i|^2 / (2 s_i^2))`, truncated to `c_i +- 6 s_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpMixture {
    centres: Vec<Vec<f64>>,
    widths: Vec<f64>,
    weights: Vec<f64>,
    bbox: BoxRegion,
}

impl BumpMixture {
    pub fn new(centres: Vec<Vec<f64>>, widths: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if centres.is_empty() || centres.len() != widths.len() || centres.len() != weights.len() {
            return Err(invalid("centres", "need matching non-empty centre, width and weight lists"));
        }
        if widths.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("widths", "must be positive"));
        }
        let mut bbox = BoxRegion::cube(&centres[0], 6.0 * widths[0])?;
        for (c, w) in centres.iter().zip(&widths).skip(1) {
            bbox = bbox.union(&BoxRegion::cube(c, 6.0 * w)?)?;
        }
        Ok(Self {
            centres,
            widths,
            weights,
            bbox,
        })
    }

    /// Random mixture of `bumps` Gaussians, centres in `[-spread, spread]^n`,
    /// rescaled to unit `L^2` norm.
    pub fn random(n: usize, bumps: usize, spread: f64, rng: &mut RngStream) -> Result<Self> {
        let centres = (0..bumps)
            .map(|_| (0..n).map(|_| rng.uniform_in(-spread, spread)).collect())
            .collect();
        let widths = (0..bumps).map(|_| rng.uniform_in(0.15, 0.4)).collect();
        let weights = (0..bumps).map(|_| rng.uniform_in(0.5, 1.5)).collect();
        let mut f = Self::new(centres, widths, weights)?;
        let norm = f.l2_norm();
        f.weights.iter_mut().for_each(|w| *w /= norm);
        Ok(f)
    }

    /// `L^2` norm of the untruncated mixture, in closed form.
    pub fn l2_norm(&self) -> f64 {
        let n = self.bbox.dim() as i32;
        let mut s = 0.0;
        for i in 0..self.centres.len() {
            for j in 0..self.centres.len() {
                let (a, b) = (self.widths[i].powi(2), self.widths[j].powi(2));
                let d2: f64 = self.centres[i]
                    .iter()
                    .zip(&self.centres[j])
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum();
                s += self.weights[i] * self.weights[j] * (2.0 * PI * a * b / (a + b)).powf(n as f64 / 2.0)
                    * (-d2 / (2.0 * (a + b))).exp();
            }
        }
        s.sqrt()
    }
}

impl Field for BumpMixture {
    fn bounding_box(&self) -> &BoxRegion {
        &self.bbox
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((c, w), a) in self.centres.iter().zip(&self.widths).zip(&self.weights) {
            let d2: f64 = y.iter().zip(c).map(|(u, v)| (u - v) * (u - v)).sum();
            let e = d2 / (2.0 * w * w);
            if e < 18.0 {
                acc += a * (-e).exp();
            }
        }
        acc
    }
}

/// `count` seeded unit-norm bump mixtures.
pub fn bump_family(n: usize, count: usize, seed: u64) -> Result<Vec<BumpMixture>> {
    (0..count)
        .map(|i| {
            let mut rng = RngStream::derived(seed, 0x6275_6d70, i as u64);
            let bumps = 2 + rng.index(3);
            BumpMixture::random(n, bumps, 1.2, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetPolicy {
    /// `[1, 1 + c_n^2]^n`.
    Restricted,
    /// `[1, 2]^n`.
    UnitBox,
}

impl NetPolicy {
    pub fn net(self, n: usize, c_n: f64, delta: f64) -> Result<RadiiNet> {
        match self {
            Self::Restricted => RadiiNet::restricted(n, c_n, delta),
            Self::UnitBox => RadiiNet::unit_box(n, delta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2GrowthParams {
    pub deltas: Vec<f64>,
    pub net: NetPolicy,
    pub x_region: BoxRegion,
    pub x_samples: usize,
    /// Samples per annulus average.
    pub samples: usize,
    pub c_n: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2GrowthRow {
    pub delta: f64,
    pub field_id: usize,
    pub norm_estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2GrowthScan {
    pub rows: Vec<L2GrowthRow>,
    /// Slope of `ln max_f |M f|_2` against `ln(1/delta)`.
    pub fit: ScalingFit,
}

/// `|M^delta f|_{L^2(x_region)}` for every field and delta, and the growth
/// rate of the worst field as `delta -> 0`.
pub fn l2_growth_scan<F: Field>(family: &[F], p: &L2GrowthParams) -> Result<L2GrowthScan> {
    if p.deltas.len() < 3 {
        return Err(invalid("deltas", "need at least 3 values"));
    }
    if p.deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("deltas", "must be strictly decreasing"));
    }
    if family.is_empty() || p.x_samples == 0 {
        return Err(invalid("family", "need at least one field and one x sample"));
    }
    let n = p.x_region.dim();
    let xs: Vec<Vec<f64>> = (0..p.x_samples)
        .map(|i| {
            let mut rng = RngStream::derived(p.seed, 0x7873, i as u64);
            let mut x = vec![0.0; n];
            p.x_region.sample_into(&mut rng, &mut x);
            x
        })
        .collect();
    let vol = p.x_region.volume();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (di, &delta) in p.deltas.iter().enumerate() {
        let net = p.net.net(n, p.c_n, delta)?;
        let mut worst = 0.0f64;
        for (fi, f) in family.iter().enumerate() {
            let mp = MaximalParams {
                delta,
                samples: p.samples,
                c_n: p.c_n,
                seed: derive_stream_id(p.seed, (di as u64) << 32 | fi as u64),
            };
            let sq = xs
                .par_iter()
                .enumerate()
                .map(|(i, x)| discretised_maximal(f, x, i as u64, &net, None, &mp).map(|v| v * v))
                .collect::<Result<Vec<_>>>()?;
            let mut mom = Moments::default();
            sq.iter().for_each(|&v| mom.push(v));
            let est = power_estimate(mom.estimate(p.seed).scale(vol), 0.5);
            worst = worst.max(est.value);
            rows.push(L2GrowthRow {
                delta,
                field_id: fi,
                norm_estimate: est.value,
                std_error: est.std_error,
            });
        }
        points.push((1.0 / delta, worst));
    }
    Ok(L2GrowthScan {
        rows,
        fit: fit_power_law(&points)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_c_n;
    use crate::maximal::field::box_indicator;
    use crate::maximal::operator::lp_norm;

    #[test]
    fn bump_family_is_normalised() {
        for f in bump_family(3, 3, 4).unwrap() {
            assert!((f.l2_norm() - 1.0).abs() < 1e-12);
            let e = lp_norm(&f, 2.0, f.bounding_box(), 400_000, 1).unwrap();
            assert!(e.agrees_with_value(1.0, 4.0), "{e:?}");
        }
    }

    #[test]
    fn constant_field_has_flat_growth() {
        let one = [box_indicator(BoxRegion::cube(&[0.0; 3], 5.0).unwrap())];
        let p = L2GrowthParams {
            deltas: vec![0.25, 0.125, 0.0625],
            net: NetPolicy::Restricted,
            x_region: BoxRegion::cube(&[0.0; 3], 0.5).unwrap(),
            x_samples: 4,
            samples: 16,
            c_n: default_c_n(3),
            seed: 1,
        };
        let scan = l2_growth_scan(&one, &p).unwrap();
        assert!(scan.fit.slope.abs() < 1e-12);
        assert!(scan.rows.iter().all(|r| r.norm_estimate == 1.0));
    }

    #[test]
    fn too_few_deltas_is_an_error() {
        let one = [box_indicator(BoxRegion::cube(&[0.0; 2], 5.0).unwrap())];
        let p = L2GrowthParams {
            deltas: vec![0.25, 0.125],
            net: NetPolicy::UnitBox,
            x_region: BoxRegion::cube(&[0.0; 2], 0.5).unwrap(),
            x_samples: 4,
            samples: 16,
            c_n: default_c_n(2),
            seed: 1,
        };
        assert!(l2_growth_scan(&one, &p).is_err());
    }
}
