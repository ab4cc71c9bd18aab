use super::radii::Radii;
use crate::error::{Error, Result};
use crate::scalar::RealScalar;

/// Radii `r` of the ellipsoid centred at `x` that passes through the origin
/// with normal parallel to `(1, ..., 1)`: `r_j = (x_j sum_i x_i)^{1/2}`.
pub fn tangency_radii<T: RealScalar>(x: &[T]) -> Result<Radii<T>> {
    if let Some(j) = x.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::Domain(format!("centre component {j} is not positive")));
    }
    let s = x.iter().fold(T::zero(), |a, &v| a + v);
    Radii::new(x.iter().map(|&v| (v * s).sqrt()).collect())
}

/// Inverse of [`tangency_radii`]: `x_j = r_j^2 / |r|`.
pub fn tangency_centre<T: RealScalar>(r: &Radii<T>) -> Vec<T> {
    let norm = r.as_slice().iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
    r.as_slice().iter().map(|&v| v * v / norm).collect()
}

/// `(1, ..., 1) / sqrt(n)`.
pub fn tangency_normal<T: RealScalar>(n: usize) -> Vec<T> {
    let v = T::one() / T::from_usize_exact(n).sqrt();
    vec![v; n]
}
