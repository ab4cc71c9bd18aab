use serde::{Deserialize, Serialize};

use super::radii::Radii;
use crate::error::{check_dim, invalid, Error, Result};
use crate::scalar::Scalar;

/// `F_{x,r}(y) = sum_j (y_j - x_j)^2 / r_j^2 - 1`.
pub fn defining_value<T: Scalar>(x: &[T], r: &Radii<T>, y: &[T]) -> Result<T> {
    check_dim(r.dim(), x.len())?;
    check_dim(r.dim(), y.len())?;
    let mut acc = -T::one();
    for ((xj, yj), rj) in x.iter().zip(y).zip(r.as_slice()) {
        let d = yj.clone() - xj.clone();
        acc = acc + d.clone() * d / (rj.clone() * rj.clone());
    }
    Ok(acc)
}

pub fn defining_gradient<T: Scalar>(x: &[T], r: &Radii<T>, y: &[T]) -> Result<Vec<T>> {
    check_dim(r.dim(), x.len())?;
    check_dim(r.dim(), y.len())?;
    Ok(x.iter()
        .zip(y)
        .zip(r.as_slice())
        .map(|((xj, yj), rj)| T::two() * (yj.clone() - xj.clone()) / (rj.clone() * rj.clone()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `omega -> x + r * omega`.
pub fn affine_forward<T: Scalar>(x: &[T], r: &Radii<T>, omega: &[T]) -> Result<Vec<T>> {
    affine_map(x, r, omega, Direction::Forward)
}

/// `y -> (y - x) / r`.
pub fn affine_inverse<T: Scalar>(x: &[T], r: &Radii<T>, y: &[T]) -> Result<Vec<T>> {
    affine_map(x, r, y, Direction::Inverse)
}

pub fn affine_map<T: Scalar>(x: &[T], r: &Radii<T>, p: &[T], direction: Direction) -> Result<Vec<T>> {
    check_dim(r.dim(), x.len())?;
    check_dim(r.dim(), p.len())?;
    let it = x.iter().zip(p).zip(r.as_slice());
    Ok(match direction {
        Direction::Forward => it
            .map(|((xj, pj), rj)| xj.clone() + rj.clone() * pj.clone())
            .collect(),
        Direction::Inverse => it
            .map(|((xj, pj), rj)| (pj.clone() - xj.clone()) / rj.clone())
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid<T> {
    centre: Vec<T>,
    radii: Radii<T>,
}

impl<T: Scalar> Ellipsoid<T> {
    pub fn new(centre: Vec<T>, radii: Radii<T>) -> Result<Self> {
        check_dim(radii.dim(), centre.len())?;
        Ok(Self { centre, radii })
    }

    pub fn unit_sphere(n: usize) -> Self {
        Self {
            centre: vec![T::zero(); n],
            radii: Radii::unit(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.radii.dim()
    }

    pub fn centre(&self) -> &[T] {
        &self.centre
    }

    pub fn radii(&self) -> &Radii<T> {
        &self.radii
    }

    pub fn value(&self, y: &[T]) -> Result<T> {
        defining_value(&self.centre, &self.radii, y)
    }

    pub fn gradient(&self, y: &[T]) -> Result<Vec<T>> {
        defining_gradient(&self.centre, &self.radii, y)
    }

    pub fn to_preimage(&self, y: &[T]) -> Result<Vec<T>> {
        affine_inverse(&self.centre, &self.radii, y)
    }

    pub fn from_preimage(&self, omega: &[T]) -> Result<Vec<T>> {
        affine_forward(&self.centre, &self.radii, omega)
    }
}

/// The open shell `{ y : |F(y)| < delta }` with `0 < delta <= 1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec<T> {
    ellipsoid: Ellipsoid<T>,
    delta: T,
}

impl<T: Scalar> AnnulusSpec<T> {
    pub fn new(ellipsoid: Ellipsoid<T>, delta: T) -> Result<Self> {
        let half = T::one() / T::two();
        if !(delta > T::zero() && delta <= half) {
            return Err(invalid("delta", format!("{delta:?} not in (0, 1/2]")));
        }
        Ok(Self { ellipsoid, delta })
    }

    pub fn ellipsoid(&self) -> &Ellipsoid<T> {
        &self.ellipsoid
    }

    pub fn delta(&self) -> &T {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.ellipsoid.dim()
    }

    /// Restrict to the preimage region `|omega_k|^3 >= 2 c_n`.
    pub fn refine(self, k: usize, c_n: T) -> Result<RefinedAnnulusSpec<T>> {
        RefinedAnnulusSpec::new(self, k, c_n)
    }
}

/// Annulus minus the exceptional set where the `k`-th preimage coordinate is small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedAnnulusSpec<T> {
    base: AnnulusSpec<T>,
    k: usize,
    c_n: T,
}

impl<T: Scalar> RefinedAnnulusSpec<T> {
    pub fn new(base: AnnulusSpec<T>, k: usize, c_n: T) -> Result<Self> {
        let n = base.dim();
        if k >= n {
            return Err(Error::AxisOutOfRange { k, n });
        }
        // 2 c_n <= (2n)^{-3/2}  <=>  32 n^3 c_n^2 <= 1, checked without roots.
        let n3 = T::from_usize_exact(32 * n * n * n);
        if !(c_n > T::zero()) || n3 * c_n.clone() * c_n.clone() > T::one() {
            return Err(invalid("c_n", format!("{c_n:?} violates 0 < 2 c_n <= (2n)^(-3/2)")));
        }
        Ok(Self { base, k, c_n })
    }

    pub fn base(&self) -> &AnnulusSpec<T> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c_n(&self) -> &T {
        &self.c_n
    }
}

/// Membership in a plain or refined annulus.
pub trait Annulus<T: Scalar> {
    fn spec(&self) -> &AnnulusSpec<T>;

    /// `(k, c_n)` when a refinement applies.
    fn refinement(&self) -> Option<(usize, &T)>;

    /// Membership of `A(omega)`, tested in preimage coordinates.
    fn contains_preimage(&self, omega: &[T]) -> bool {
        if omega.len() != self.spec().dim() {
            return false;
        }
        let mut s = -T::one();
        for w in omega {
            s = s + w.clone() * w.clone();
        }
        if !(s.abs() < *self.spec().delta()) {
            return false;
        }
        match self.refinement() {
            None => true,
            Some((k, c)) => {
                let w = omega[k].abs();
                w.clone() * w.clone() * w >= T::two() * c.clone()
            }
        }
    }

    fn contains(&self, y: &[T]) -> bool {
        match self.spec().ellipsoid().to_preimage(y) {
            Ok(omega) => self.contains_preimage(&omega),
            Err(_) => false,
        }
    }
}

impl<T: Scalar> Annulus<T> for AnnulusSpec<T> {
    fn spec(&self) -> &AnnulusSpec<T> {
        self
    }

    fn refinement(&self) -> Option<(usize, &T)> {
        None
    }
}

impl<T: Scalar> Annulus<T> for RefinedAnnulusSpec<T> {
    fn spec(&self) -> &AnnulusSpec<T> {
        &self.base
    }

    fn refinement(&self) -> Option<(usize, &T)> {
        Some((self.k, &self.c_n))
    }
}

/// Allocation-free `f64` membership test for the sampling loops.
#[derive(Debug, Clone)]
pub struct ShellKernel {
    centre: Vec<f64>,
    r: Vec<f64>,
    inv_r: Vec<f64>,
    delta: f64,
    refine: Option<(usize, f64)>,
}

impl ShellKernel {
    pub fn new<A: Annulus<f64> + ?Sized>(a: &A) -> Self {
        let spec = a.spec();
        Self {
            centre: spec.ellipsoid().centre().to_vec(),
            r: spec.ellipsoid().radii().as_slice().to_vec(),
            inv_r: spec.ellipsoid().radii().as_slice().iter().map(|r| 1.0 / r).collect(),
            delta: *spec.delta(),
            refine: a.refinement().map(|(k, c)| (k, 2.0 * c)),
        }
    }

    pub fn dim(&self) -> usize {
        self.inv_r.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `|omega|^2 - 1` at the preimage of `y`.
    #[inline]
    pub fn value(&self, y: &[f64]) -> f64 {
        let mut s = -1.0;
        for ((yj, xj), ij) in y.iter().zip(&self.centre).zip(&self.inv_r) {
            let w = (yj - xj) * ij;
            s += w * w;
        }
        s
    }

    #[inline]
    pub fn contains(&self, y: &[f64]) -> bool {
        if self.value(y).abs() >= self.delta {
            return false;
        }
        match self.refine {
            None => true,
            Some((k, two_c)) => {
                let w = ((y[k] - self.centre[k]) * self.inv_r[k]).abs();
                w * w * w >= two_c
            }
        }
    }

    /// Refinement filter alone, in preimage coordinates.
    #[inline]
    pub fn passes_refinement(&self, omega: &[f64]) -> bool {
        match self.refine {
            None => true,
            Some((k, two_c)) => {
                let w = omega[k].abs();
                w * w * w >= two_c
            }
        }
    }

    #[inline]
    pub fn forward_into(&self, omega: &[f64], out: &mut [f64]) {
        for j in 0..omega.len() {
            out[j] = self.centre[j] + self.r[j] * omega[j];
        }
    }
}
