use crate::error::{invalid, Result};
use crate::geometry::Radii;

/// Grid of radii over a cube `[lo, hi]^n`.
///
/// Each point keeps the id it had in the full grid, so a sub-net draws the
/// same random samples as the corresponding points of the full net.
#[derive(Debug, Clone)]
pub struct RadiiNet {
    n: usize,
    lo: f64,
    hi: f64,
    step: f64,
    ids: Vec<u64>,
    points: Vec<Radii<f64>>,
}

impl RadiiNet {
    /// Grid with spacing at most `max_step`, endpoints included.
    pub fn with_step(n: usize, lo: f64, hi: f64, max_step: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "dimension must be positive"));
        }
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid("hi", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        if !(max_step > 0.0) {
            return Err(invalid("step", format!("{max_step} is not positive")));
        }
        let width = hi - lo;
        let per_axis = if width == 0.0 { 1 } else { (width / max_step - 1e-9).ceil() as usize + 1 };
        let step = if per_axis > 1 { width / (per_axis - 1) as f64 } else { 0.0 };
        let total = per_axis
            .checked_pow(n as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or_else(|| invalid("step", format!("{per_axis}^{n} net points is too many")))?;
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut r = vec![0.0; n];
            for v in r.iter_mut().rev() {
                let i = rem % per_axis;
                rem /= per_axis;
                *v = if i + 1 == per_axis { hi } else { lo + step * i as f64 };
            }
            points.push(Radii::new(r)?);
        }
        Ok(Self {
            n,
            lo,
            hi,
            step,
            ids: (0..total as u64).collect(),
            points,
        })
    }

    /// Net over the restricted box `[1, 1 + c_n^2]^n` with step
    /// `min(delta / 4, c_n^2 / 4)`.
    pub fn restricted(n: usize, c_n: f64, delta: f64) -> Result<Self> {
        let width = c_n * c_n;
        Self::with_step(n, 1.0, 1.0 + width, (delta / 4.0).min(width / 4.0))
    }

    /// Net over `[1, 2]^n` with step `delta / 4`.
    pub fn unit_box(n: usize, delta: f64) -> Result<Self> {
        Self::with_step(n, 1.0, 2.0, (delta / 4.0).min(0.25))
    }

    /// Net with a single point.
    pub fn single(r: Radii<f64>) -> Self {
        let v = r[0];
        Self {
            n: r.dim(),
            lo: v,
            hi: v,
            step: 0.0,
            ids: vec![0],
            points: vec![r],
        }
    }

    /// Points whose position satisfies `keep`, ids preserved.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let (ids, points) = self
            .ids
            .iter()
            .zip(&self.points)
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, (id, p))| (*id, p.clone()))
            .unzip();
        Self { ids, points, ..*self }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn point(&self, i: usize) -> &Radii<f64> {
        &self.points[i]
    }

    pub fn id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Radii<f64>)> {
        self.ids.iter().copied().zip(&self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_c_n;
    use proptest::prelude::*;

    #[test]
    fn restricted_net_has_five_points_per_axis() {
        let c = default_c_n(3);
        let net = RadiiNet::restricted(3, c, 1.0 / 64.0).unwrap();
        assert_eq!(net.len(), 125);
        assert!(net.step() <= c * c / 4.0 * (1.0 + 1e-9));
        for (_, r) in net.iter() {
            assert!(r.check_restricted(&c).is_ok());
        }
    }

    #[test]
    fn restriction_keeps_ids() {
        let net = RadiiNet::unit_box(2, 0.5).unwrap();
        let sub = net.restrict(|i| i % 3 == 1);
        assert_eq!(sub.id(0), 1);
        assert_eq!(sub.point(1), net.point(4));
    }

    proptest! {
        #[test]
        fn net_covers_the_box(delta in 0.05f64..0.5, n in 1usize..4, q in prop::collection::vec(1.0f64..2.0, 3)) {
            let net = RadiiNet::unit_box(n, delta).unwrap();
            prop_assert!(net.step() <= delta / 4.0 + 1e-15);
            let nearest = net
                .iter()
                .map(|(_, r)| (0..n).map(|j| (r[j] - q[j]).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest <= net.step() / 2.0 + 1e-12);
        }
    }
}
