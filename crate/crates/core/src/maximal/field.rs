use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::mc::RngStream;

/// Axis-parallel box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(invalid("lo", "empty box"));
        }
        if let Some(j) = (0..lo.len()).find(|&j| !(lo[j].is_finite() && hi[j].is_finite() && lo[j] < hi[j])) {
            return Err(invalid("hi", format!("axis {j}: need finite lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    /// `centre + [-half, half]^n`.
    pub fn cube(centre: &[f64], half: f64) -> Result<Self> {
        Self::new(
            centre.iter().map(|c| c - half).collect(),
            centre.iter().map(|c| c + half).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    #[inline]
    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.lo.len()
            && y.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = rng.uniform_in(self.lo[j], self.hi[j]);
        }
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Closure,
    Grid,
}

/// A real function on `R^n` supported in a box.
pub trait Field: Send + Sync {
    fn bounding_box(&self) -> &BoxRegion;

    /// Value inside the bounding box; callers go through [`Field::eval`].
    fn value_in_box(&self, y: &[f64]) -> f64;

    fn kind(&self) -> FieldKind {
        FieldKind::Closure
    }

    fn dim(&self) -> usize {
        self.bounding_box().dim()
    }

    #[inline]
    fn eval(&self, y: &[f64]) -> f64 {
        if self.bounding_box().contains(y) {
            self.value_in_box(y)
        } else {
            0.0
        }
    }
}

impl<F: Field + ?Sized> Field for Box<F> {
    fn bounding_box(&self) -> &BoxRegion {
        (**self).bounding_box()
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        (**self).value_in_box(y)
    }

    fn kind(&self) -> FieldKind {
        (**self).kind()
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn bounding_box(&self) -> &BoxRegion {
        (**self).bounding_box()
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        (**self).value_in_box(y)
    }

    fn kind(&self) -> FieldKind {
        (**self).kind()
    }
}

/// Field evaluated exactly by a closure.
pub struct ClosureField<F> {
    bbox: BoxRegion,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ClosureField<F> {
    pub fn new(bbox: BoxRegion, f: F) -> Self {
        Self { bbox, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Field for ClosureField<F> {
    fn bounding_box(&self) -> &BoxRegion {
        &self.bbox
    }

    #[inline]
    fn value_in_box(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
}

impl<F> std::fmt::Debug for ClosureField<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosureField").field("bbox", &self.bbox).finish_non_exhaustive()
    }
}

/// `1` on the box, `0` elsewhere.
pub fn box_indicator(bbox: BoxRegion) -> ClosureField<fn(&[f64]) -> f64> {
    ClosureField::new(bbox, |_| 1.0)
}

/// Node values on a regular grid with multilinear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    bbox: BoxRegion,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridField {
    /// Sample `f` at `shape[j]` equispaced nodes per axis, endpoints included.
    pub fn from_fn(bbox: BoxRegion, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_dim(bbox.dim(), shape.len())?;
        if shape.iter().any(|&s| s < 2) {
            return Err(invalid("shape", "need at least 2 nodes per axis"));
        }
        let total: usize = shape.iter().product();
        let n = shape.len();
        let mut values = Vec::with_capacity(total);
        let mut y = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            for j in (0..n).rev() {
                let i = rem % shape[j];
                rem /= shape[j];
                let (a, b) = (bbox.lo[j], bbox.hi[j]);
                y[j] = a + (b - a) * i as f64 / (shape[j] - 1) as f64;
            }
            values.push(f(&y));
        }
        Ok(Self { bbox, shape, values })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
}

impl Field for GridField {
    fn bounding_box(&self) -> &BoxRegion {
        &self.bbox
    }

    fn kind(&self) -> FieldKind {
        FieldKind::Grid
    }

    fn value_in_box(&self, y: &[f64]) -> f64 {
        let n = self.shape.len();
        let mut base = [0usize; 16];
        let mut frac = [0.0f64; 16];
        for j in 0..n {
            let cells = (self.shape[j] - 1) as f64;
            let u = (y[j] - self.bbox.lo[j]) / (self.bbox.hi[j] - self.bbox.lo[j]) * cells;
            let i = (u.floor().max(0.0) as usize).min(self.shape[j] - 2);
            base[j] = i;
            frac[j] = (u - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0;
            for j in 0..n {
                let bit = (corner >> (n - 1 - j)) & 1;
                w *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                flat = flat * self.shape[j] + base[j] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn outside_the_box_is_zero() {
        let f = ClosureField::new(BoxRegion::cube(&[0.0, 0.0], 1.0).unwrap(), |_| 7.0);
        assert_eq!(f.eval(&[0.5, -0.5]), 7.0);
        assert_eq!(f.eval(&[1.5, 0.0]), 0.0);
        assert_eq!(f.eval(&[0.0]), 0.0);
    }

    #[test]
    fn rejects_empty_boxes() {
        assert!(BoxRegion::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxRegion::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn grid_reproduces_nodes() {
        let bbox = BoxRegion::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let g = GridField::from_fn(bbox, vec![3, 5], |y| (y[0] * 10.0).sin() + y[1] * y[1]).unwrap();
        assert_eq!(g.kind(), FieldKind::Grid);
        for (y0, y1) in [(0.0, 0.0), (0.5, 1.5), (1.0, 2.0)] {
            let exact = (y0 * 10.0f64).sin() + y1 * y1;
            assert!((g.eval(&[y0, y1]) - exact).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn grid_is_exact_on_multilinear_functions(y in prop::collection::vec(-1.0f64..1.0, 3), c in prop::collection::vec(-2.0f64..2.0, 4)) {
            let f = |p: &[f64]| c[0] + c[1] * p[0] + c[2] * p[1] * p[2] + c[3] * p[0] * p[1] * p[2];
            let g = GridField::from_fn(BoxRegion::cube(&[0.0; 3], 1.0).unwrap(), vec![4, 3, 6], f).unwrap();
            prop_assert!((g.eval(&y) - f(&y)).abs() < 1e-12);
        }
    }
}
