use crate::error::{invalid, Result};
use crate::geometry::tangency_normal;
use crate::maximal::{BoxRegion, Field};
use crate::mc::RngStream;

/// Rows `u_1, ..., u_n` of an orthogonal matrix with `u_n = N`, from
/// Gram-Schmidt on `N, e_1, ..., e_{n-1}`.
pub fn normal_frame(n: usize) -> Vec<Vec<f64>> {
    let normal = tangency_normal::<f64>(n);
    let mut q: Vec<Vec<f64>> = vec![normal];
    for i in 0..n - 1 {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // Two passes keep the residual at rounding level.
        for _ in 0..2 {
            for b in &q {
                let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
    }
    q.rotate_left(1);
    q
}

/// `max |U U^T - I|`.
pub fn orthogonality_residual(u: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in u.iter().enumerate() {
        for (j, b) in u.iter().enumerate() {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

/// Slab at the origin of thickness `delta` along `N` and width
/// `delta^{1/2}` along each direction of `V = N^perp`.
#[derive(Debug, Clone)]
pub struct KnappSlab {
    delta: f64,
    frame: Vec<Vec<f64>>,
    bbox: BoxRegion,
}

impl KnappSlab {
    pub fn new(n: usize, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", "need n >= 2"));
        }
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(invalid("delta", format!("{delta} not in (0, 1/2]")));
        }
        let frame = normal_frame(n);
        let half = Self::half_widths(n, delta);
        let reach: Vec<f64> = (0..n)
            .map(|j| frame.iter().zip(&half).map(|(u, h)| u[j].abs() * h).sum::<f64>() * (1.0 + 1e-12))
            .collect();
        let bbox = BoxRegion::new(reach.iter().map(|r| -r).collect(), reach)?;
        Ok(Self { delta, frame, bbox })
    }

    fn half_widths(n: usize, delta: f64) -> Vec<f64> {
        let mut h = vec![delta.sqrt() / 2.0; n];
        h[n - 1] = delta / 2.0;
        h
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// `delta * delta^{(n-1)/2}`.
    pub fn volume(&self) -> f64 {
        let n = self.frame.len() as f64;
        self.delta.powf((n + 1.0) / 2.0)
    }

    /// Uniform point of the slab.
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        let n = self.frame.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (u, h) in self.frame.iter().zip(Self::half_widths(n, self.delta)) {
            let c = rng.uniform_in(-h, h);
            out.iter_mut().zip(u).for_each(|(o, a)| *o += c * a);
        }
    }
}

impl Field for KnappSlab {
    fn bounding_box(&self) -> &BoxRegion {
        &self.bbox
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        let n = self.frame.len();
        let tangential = self.delta.sqrt() / 2.0;
        for (i, u) in self.frame.iter().enumerate() {
            let c: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
            let h = if i + 1 == n { self.delta / 2.0 } else { tangential };
            if c.abs() > h {
                return 0.0;
            }
        }
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::lp_norm;

    #[test]
    fn frame_is_orthogonal_with_normal_last() {
        for n in 2..=8 {
            let u = normal_frame(n);
            assert!(orthogonality_residual(&u) < 1e-12);
            let normal = tangency_normal::<f64>(n);
            for (a, b) in u[n - 1].iter().zip(&normal) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn membership_examples() {
        let delta = 0.01;
        let s = KnappSlab::new(3, delta).unwrap();
        let normal = tangency_normal::<f64>(3);
        assert_eq!(s.eval(&[0.0; 3]), 1.0);
        let out: Vec<f64> = normal.iter().map(|v| 0.6 * delta * v).collect();
        assert_eq!(s.eval(&out), 0.0);
        let v = &s.frame()[1];
        let inside: Vec<f64> = v.iter().map(|a| delta.sqrt() / 4.0 * a).collect();
        assert_eq!(s.eval(&inside), 1.0);
        assert!(KnappSlab::new(3, 0.7).is_err());
    }

    #[test]
    fn samples_lie_inside_and_volume_matches() {
        let s = KnappSlab::new(3, 0.04).unwrap();
        let mut rng = RngStream::new(1, 0);
        let mut y = [0.0; 3];
        for _ in 0..10_000 {
            s.sample_into(&mut rng, &mut y);
            assert_eq!(s.eval(&y), 1.0);
        }
        assert!((s.volume() - 0.04f64.powf(2.0)).abs() < 1e-15);
        let e = lp_norm(&s, 2.0, s.bounding_box(), 400_000, 3).unwrap();
        assert!(e.agrees_with_value(s.volume().sqrt(), 4.0), "{e:?}");
    }
}
