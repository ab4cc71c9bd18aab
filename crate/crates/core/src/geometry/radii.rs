use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Principal radii of an axis-parallel ellipsoid; every component positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Radii<T>(Vec<T>);

impl<T: Scalar> Radii<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !(*v > T::zero())) {
            return Err(Error::NonPositiveRadius { index });
        }
        Ok(Self(values))
    }

    /// `value * (1, ..., 1)`.
    pub fn uniform(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn unit(n: usize) -> Self {
        Self(vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn product(&self) -> T {
        self.0.iter().fold(T::one(), |acc, r| acc * r.clone())
    }

    /// Every component in `[lo, hi]`.
    pub fn within(&self, lo: &T, hi: &T) -> bool {
        self.0.iter().all(|r| r >= lo && r <= hi)
    }

    /// Check membership in the restricted box `[1, 1 + c_n^2]^n`.
    pub fn check_restricted(&self, c_n: &T) -> Result<()> {
        let hi = T::one() + c_n.clone() * c_n.clone();
        match self.0.iter().position(|r| *r < T::one() || *r > hi) {
            Some(index) => Err(Error::OutsideRestrictedBox { index }),
            None => Ok(()),
        }
    }

    /// Componentwise quotient `self / other`.
    pub fn ratio(&self, other: &Self) -> Result<Self> {
        crate::error::check_dim(self.dim(), other.dim())?;
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() / b.clone())
                .collect(),
        )
    }
}

impl<T> std::ops::Index<usize> for Radii<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Default refinement constant `(2n)^{-3/2} / 4`.
pub fn default_c_n(n: usize) -> f64 {
    max_c_n(n) / 2.0
}

/// Largest admissible refinement constant: `2 c_n <= (2n)^{-3/2}`.
pub fn max_c_n(n: usize) -> f64 {
    (2.0 * n as f64).powf(-1.5) / 2.0
}

/// `max_k |omega_k|^3 >= 2 c_n`.
pub fn covering_holds(omega: &[f64], c_n: f64) -> bool {
    let m = omega.iter().fold(0.0f64, |acc, w| acc.max(w.abs()));
    m * m * m >= 2.0 * c_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::RngStream;

    #[test]
    fn rejects_non_positive() {
        assert_eq!(
            Radii::new(vec![1.0, 0.0, 2.0]).unwrap_err(),
            Error::NonPositiveRadius { index: 1 }
        );
        assert!(Radii::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn restricted_box() {
        let c = default_c_n(3);
        let r = Radii::new(vec![1.0, 1.0 + c * c / 2.0, 1.0]).unwrap();
        assert!(r.check_restricted(&c).is_ok());
        let bad = Radii::new(vec![1.0, 1.0 + 2.0 * c * c, 1.0]).unwrap();
        assert_eq!(
            bad.check_restricted(&c).unwrap_err(),
            Error::OutsideRestrictedBox { index: 1 }
        );
    }

    #[test]
    fn default_constant_for_three_dimensions() {
        assert!((default_c_n(3) - 0.017010345).abs() < 1e-8);
    }

    #[test]
    fn default_constant_does_not_cover_radius_one_half() {
        // The diagonal direction is the worst case; the default constant only
        // covers |omega| >= 1/sqrt(2), which is all a delta <= 1/2 shell needs.
        let n = 3;
        let w = vec![0.5 / (n as f64).sqrt(); n];
        assert!(!covering_holds(&w, default_c_n(n)));
        let w = vec![std::f64::consts::FRAC_1_SQRT_2 / (n as f64).sqrt(); n];
        assert!(covering_holds(&w, default_c_n(n)));
    }

    #[test]
    fn covering_on_random_shell_points() {
        for n in 2..=8 {
            let c = default_c_n(n);
            let mut rng = RngStream::new(11, n as u64);
            for _ in 0..20_000 {
                let mut w: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                let s = std::f64::consts::FRAC_1_SQRT_2 + 1.3 * rng.uniform();
                w.iter_mut().for_each(|v| *v *= s / norm);
                assert!(covering_holds(&w, c));
            }
        }
    }
}
