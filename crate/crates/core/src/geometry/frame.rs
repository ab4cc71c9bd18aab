use serde::{Deserialize, Serialize};

use super::radii::Radii;
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{relative_residual, RealScalar, Scalar};

/// Slicing axis `k` with its direction `d_k` (ones except a zero in slot `k`)
/// and a perturbed copy `d~_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisFrame<T> {
    k: usize,
    d: Vec<T>,
    d_tilde: Vec<T>,
}

impl<T: Scalar> AxisFrame<T> {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::AxisOutOfRange { k, n });
        }
        let d: Vec<T> = (0..n)
            .map(|j| if j == k { T::zero() } else { T::one() })
            .collect();
        Ok(Self {
            k,
            d_tilde: d.clone(),
            d,
        })
    }

    /// Frame with `d~_k` supplied; requires `|d~_k - d_k|_inf < c_n^2`.
    pub fn perturbed(n: usize, k: usize, d_tilde: Vec<T>, c_n: &T) -> Result<Self> {
        let mut frame = Self::new(n, k)?;
        check_dim(n, d_tilde.len())?;
        let bound = c_n.clone() * c_n.clone();
        if let Some(j) = frame
            .d
            .iter()
            .zip(&d_tilde)
            .position(|(a, b)| !((a.clone() - b.clone()).abs() < bound))
        {
            return Err(invalid("d_tilde", format!("component {j} deviates by c_n^2 or more")));
        }
        frame.d_tilde = d_tilde;
        Ok(frame)
    }

    /// Frame without the perturbation bound; used by the algebraic checks,
    /// where the identities hold for arbitrary `d~_k`.
    pub fn with_direction(n: usize, k: usize, d_tilde: Vec<T>) -> Result<Self> {
        let mut frame = Self::new(n, k)?;
        check_dim(n, d_tilde.len())?;
        frame.d_tilde = d_tilde;
        Ok(frame)
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn d_tilde(&self) -> &[T] {
        &self.d_tilde
    }

    /// Point `s * d_k` of the line through the origin.
    pub fn line_point(&self, s: &T) -> Vec<T> {
        self.d.iter().map(|v| v.clone() * s.clone()).collect()
    }

    /// Projection onto the hyperplane orthogonal to `d_k`.
    pub fn project_hyperplane(&self, y: &[T]) -> Vec<T> {
        let dd = self.d.iter().fold(T::zero(), |a, v| a + v.clone() * v.clone());
        let yd = self
            .d
            .iter()
            .zip(y)
            .fold(T::zero(), |a, (v, w)| a + v.clone() * w.clone());
        let s = yd / dd;
        y.iter()
            .zip(&self.d)
            .map(|(w, v)| w.clone() - s.clone() * v.clone())
            .collect()
    }
}

/// Second surface `E(t d~_k, r)` against the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyConfig<T> {
    frame: AxisFrame<T>,
    t: T,
    radii: Radii<T>,
}

impl<T: Scalar> TangencyConfig<T> {
    /// Requires `t in [0, 2]` and radii in `[1/2, 2]`.
    pub fn new(frame: AxisFrame<T>, t: T, radii: Radii<T>) -> Result<Self> {
        let two = T::two();
        if !(t >= T::zero() && t <= two) {
            return Err(invalid("t", format!("{t:?} not in [0, 2]")));
        }
        let half = T::one() / two.clone();
        if !radii.within(&half, &two) {
            return Err(invalid("radii", "components must lie in [1/2, 2]"));
        }
        Self::unchecked(frame, t, radii)
    }

    /// No range checks beyond dimensions; the polynomial identities do not need them.
    pub fn unchecked(frame: AxisFrame<T>, t: T, radii: Radii<T>) -> Result<Self> {
        check_dim(frame.dim(), radii.dim())?;
        Ok(Self { frame, t, radii })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn k(&self) -> usize {
        self.frame.k
    }

    pub fn frame(&self) -> &AxisFrame<T> {
        &self.frame
    }

    pub fn t(&self) -> &T {
        &self.t
    }

    pub fn radii(&self) -> &Radii<T> {
        &self.radii
    }

    /// Second centre `t d~_k`.
    pub fn centre(&self) -> Vec<T> {
        self.frame
            .d_tilde
            .iter()
            .map(|d| self.t.clone() * d.clone())
            .collect()
    }

    fn inv_r2(&self, j: usize) -> T {
        let r = self.radii[j].clone();
        T::one() / (r.clone() * r)
    }
}

impl<T: RealScalar> TangencyConfig<T> {
    /// Radii for which `E(t d~_k, r)` touches the unit sphere at `omega`
    /// (`|omega| = 1`) with parallel normals, so `omega` is a root of [`phi_k`].
    ///
    /// Solves `omega - t d~ = lambda r^2 omega` with `lambda` fixed by
    /// `F(omega) = 0`; fails unless every `r_j^2` comes out positive.
    pub fn tangent_at(frame: AxisFrame<T>, t: T, omega: &[T]) -> Result<Self> {
        let n = frame.dim();
        check_dim(n, omega.len())?;
        let shifted: Vec<T> = omega
            .iter()
            .zip(frame.d_tilde())
            .map(|(&w, &d)| w - t * d)
            .collect();
        let s = omega
            .iter()
            .zip(&shifted)
            .fold(T::zero(), |a, (&w, &v)| a + w * v);
        if s.is_zero() {
            return Err(Error::Domain("no tangent ellipsoid through this point".into()));
        }
        let r2: Vec<T> = omega
            .iter()
            .zip(&shifted)
            .map(|(&w, &v)| if w.is_zero() { T::zero() } else { v * s / w })
            .collect();
        if r2.iter().any(|v| !(*v > T::zero())) {
            return Err(Error::Domain("no tangent ellipsoid through this point".into()));
        }
        Ok(Self {
            radii: Radii::new(r2.into_iter().map(|v| v.sqrt()).collect())?,
            frame,
            t,
        })
    }

}

/// `G_{i,j}(omega) = (1/r_j^2 - 1/r_i^2) w_i w_j - t (d~_j w_i / r_j^2 - d~_i w_j / r_i^2)`.
pub fn g_ij<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T], i: usize, j: usize) -> T {
    let (ii, ij) = (cfg.inv_r2(i), cfg.inv_r2(j));
    let d = cfg.frame.d_tilde();
    let (wi, wj) = (omega[i].clone(), omega[j].clone());
    (ij.clone() - ii.clone()) * wi.clone() * wj.clone()
        - cfg.t.clone() * (d[j].clone() * wi * ij - d[i].clone() * wj * ii)
}

/// `G_j = G_{j,k}`.
pub fn g_j<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T], j: usize) -> T {
    g_ij(cfg, omega, j, cfg.k())
}

/// `(G_j for j != k, (|omega|^2 - 1) / 2)`.
pub fn phi_k<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Result<Vec<T>> {
    check_dim(cfg.dim(), omega.len())?;
    let k = cfg.k();
    let mut out: Vec<T> = (0..cfg.dim())
        .filter(|&j| j != k)
        .map(|j| g_j(cfg, omega, j))
        .collect();
    let s = omega.iter().fold(-T::one(), |a, w| a + w.clone() * w.clone());
    out.push(s / T::two());
    Ok(out)
}

/// Jacobian of [`phi_k`] in `omega`: rows `grad G_j` for `j != k`, then `omega`.
pub fn d_omega_phi_k<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Result<Matrix<T>> {
    let n = cfg.dim();
    check_dim(n, omega.len())?;
    let k = cfg.k();
    let d = cfg.frame.d_tilde();
    let ik = cfg.inv_r2(k);
    let t = cfg.t.clone();
    let mut m = Matrix::zeros(n, n);
    for (row, j) in (0..n).filter(|&j| j != k).enumerate() {
        let ij = cfg.inv_r2(j);
        let diff = ik.clone() - ij.clone();
        m[(row, j)] = diff.clone() * omega[k].clone() - t.clone() * d[k].clone() * ik.clone();
        m[(row, k)] = diff * omega[j].clone() + t.clone() * d[j].clone() * ij;
    }
    for (j, w) in omega.iter().enumerate() {
        m[(n - 1, j)] = w.clone();
    }
    Ok(m)
}

fn gradients<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> (Vec<T>, Vec<T>) {
    let centre = cfg.centre();
    let a = omega.iter().map(|w| T::two() * w.clone()).collect();
    let b = omega
        .iter()
        .zip(&centre)
        .enumerate()
        .map(|(j, (w, x))| T::two() * (w.clone() - x.clone()) * cfg.inv_r2(j))
        .collect();
    (a, b)
}

/// `det(J J^T)` for `J` the 2 x n matrix of the two gradients.
pub fn gram_norm_sq_gram<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Result<T> {
    check_dim(cfg.dim(), omega.len())?;
    let (a, b) = gradients(cfg, omega);
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |s, (p, q)| s + p.clone() * q.clone());
    let ab = dot(&a, &b);
    Ok(dot(&a, &a) * dot(&b, &b) - ab.clone() * ab)
}

/// `16 sum_{i<j} G_{i,j}^2`.
pub fn gram_norm_sq_cauchy_binet<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Result<T> {
    let n = cfg.dim();
    check_dim(n, omega.len())?;
    let mut s = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            let g = g_ij(cfg, omega, i, j);
            s = s + g.clone() * g;
        }
    }
    Ok(T::from_usize_exact(16) * s)
}

/// `||J||` evaluated along both paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramNorm<T> {
    pub via_gram: T,
    pub via_cauchy_binet: T,
    pub relative_residual: T,
}

impl<T: Copy> GramNorm<T> {
    pub fn value(&self) -> T {
        self.via_cauchy_binet
    }
}

pub fn jacobian_gram_norm<T: RealScalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Result<GramNorm<T>> {
    // Cancellation can leave the Gram determinant a hair below zero.
    let gram = gram_norm_sq_gram(cfg, omega)?.max(T::zero()).sqrt();
    let cb = gram_norm_sq_cauchy_binet(cfg, omega)?.sqrt();
    Ok(GramNorm {
        via_gram: gram,
        via_cauchy_binet: cb,
        relative_residual: relative_residual(&gram, &cb),
    })
}

/// `f64` evaluator of `||J||` for the sampling loops.
#[derive(Debug, Clone)]
pub struct GramKernel {
    centre: Vec<f64>,
    inv_r2: Vec<f64>,
}

impl GramKernel {
    pub fn new(cfg: &TangencyConfig<f64>) -> Self {
        Self {
            centre: cfg.centre(),
            inv_r2: cfg.radii().as_slice().iter().map(|r| 1.0 / (r * r)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.inv_r2.len()
    }

    /// `||J(omega)||` as `4 (sum_{i<j} m_ij^2)^{1/2}` with `m_ij` the
    /// half-gradient minors.
    #[inline]
    pub fn norm(&self, omega: &[f64]) -> f64 {
        let n = omega.len();
        let mut s = 0.0;
        for i in 0..n {
            let bi = (omega[i] - self.centre[i]) * self.inv_r2[i];
            for j in i + 1..n {
                let bj = (omega[j] - self.centre[j]) * self.inv_r2[j];
                let m = omega[i] * bj - omega[j] * bi;
                s += m * m;
            }
        }
        4.0 * s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::RngStream;
    use crate::Rational;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_traits::Zero;

    fn cfg(n: usize, k: usize, t: f64, r: Vec<f64>) -> TangencyConfig<f64> {
        TangencyConfig::new(AxisFrame::new(n, k).unwrap(), t, Radii::new(r).unwrap()).unwrap()
    }

    fn random_cfg(rng: &mut RngStream, n: usize) -> (TangencyConfig<f64>, Vec<f64>) {
        let k = (rng.uniform() * n as f64) as usize;
        let d: Vec<f64> = (0..n)
            .map(|j| if j == k { 0.0 } else { 1.0 } + 0.01 * (rng.uniform() - 0.5))
            .collect();
        let frame = AxisFrame::with_direction(n, k, d).unwrap();
        let r = Radii::new((0..n).map(|_| 0.5 + 1.5 * rng.uniform()).collect()).unwrap();
        let c = TangencyConfig::new(frame, 2.0 * rng.uniform(), r).unwrap();
        let w = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        (c, w)
    }

    /// Second transcription of `G_{i,j}`, written from the 2 x 2 minor of
    /// the half-gradients rather than the expanded polynomial.
    fn g_from_minor(c: &TangencyConfig<f64>, w: &[f64], i: usize, j: usize) -> f64 {
        let x = c.centre();
        let r = c.radii().as_slice();
        let bi = (w[i] - x[i]) / (r[i] * r[i]);
        let bj = (w[j] - x[j]) / (r[j] * r[j]);
        w[i] * bj - w[j] * bi
    }

    #[test]
    fn frame_direction_has_zero_in_axis_slot() {
        let f = AxisFrame::<f64>::new(4, 2).unwrap();
        assert_eq!(f.d(), &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(f.project_hyperplane(&[1.0, 1.0, 5.0, 1.0]), vec![0.0, 0.0, 5.0, 0.0]);
        assert!(AxisFrame::<f64>::new(3, 3).is_err());
    }

    #[test]
    fn perturbation_bound_is_enforced() {
        let c = 0.1;
        assert!(AxisFrame::perturbed(2, 0, vec![0.005, 1.005], &c).is_ok());
        assert!(AxisFrame::perturbed(2, 0, vec![0.02, 1.0], &c).is_err());
    }

    #[test]
    fn config_ranges() {
        let f = AxisFrame::new(3, 0).unwrap();
        assert!(TangencyConfig::new(f.clone(), 2.5, Radii::unit(3)).is_err());
        assert!(TangencyConfig::new(f, 1.0, Radii::uniform(3, 3.0).unwrap()).is_err());
    }

    #[test]
    fn coincident_spheres_have_zero_norm() {
        let c = cfg(3, 1, 0.0, vec![1.0; 3]);
        let mut rng = RngStream::new(3, 0);
        for _ in 0..100 {
            let w: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            assert_eq!(jacobian_gram_norm(&c, &w).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn planar_example() {
        // Gradients (0, 2) and (-2, 2).
        let c = cfg(2, 1, 1.0, vec![1.0, 1.0]);
        let g = jacobian_gram_norm(&c, &[0.0, 1.0]).unwrap();
        assert_relative_eq!(g.via_gram, 4.0, epsilon = 1e-14);
        assert_relative_eq!(g.via_cauchy_binet, 4.0, epsilon = 1e-14);
        assert_relative_eq!(GramKernel::new(&c).norm(&[0.0, 1.0]), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn dual_paths_agree() {
        let mut rng = RngStream::new(17, 1);
        for n in 2..=8 {
            for _ in 0..100 {
                let (c, w) = random_cfg(&mut rng, n);
                let g = jacobian_gram_norm(&c, &w).unwrap();
                assert!(g.relative_residual < 1e-10, "{g:?}");
                assert_relative_eq!(GramKernel::new(&c).norm(&w), g.value(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn g_matches_minor_transcription() {
        let mut rng = RngStream::new(5, 2);
        for n in 2..=6 {
            let (c, w) = random_cfg(&mut rng, n);
            for i in 0..n {
                for j in 0..n {
                    let a = g_ij(&c, &w, i, j);
                    assert!((a - g_from_minor(&c, &w, i, j)).abs() < 1e-12);
                    assert!((a + g_ij(&c, &w, j, i)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn syzygy_holds() {
        let mut rng = RngStream::new(8, 3);
        for n in 3..=8 {
            for _ in 0..50 {
                let (c, w) = random_cfg(&mut rng, n);
                let k = c.k();
                for i in (0..n).filter(|&i| i != k) {
                    for j in (i + 1..n).filter(|&j| j != k) {
                        let lhs = w[k] * g_ij(&c, &w, i, j);
                        let rhs = w[j] * g_j(&c, &w, i) - w[i] * g_j(&c, &w, j);
                        assert!((lhs - rhs).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn concentric_tangency_root() {
        let t = 1.2;
        let rho = (1.0 - t * 2f64.sqrt()).abs();
        let c = cfg(3, 2, t, vec![rho; 3]);
        let s = 0.5f64.sqrt();
        let phi = phi_k(&c, &[s, s, 0.0]).unwrap();
        for v in phi {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn tangent_construction_is_a_root() {
        let mut rng = RngStream::new(4, 9);
        let mut built = 0;
        while built < 50 {
            let w = rng.unit_vector(3);
            let t = rng.uniform_in(0.1, 1.0);
            let Ok(c) = TangencyConfig::tangent_at(AxisFrame::new(3, 1).unwrap(), t, &w) else {
                continue;
            };
            built += 1;
            for v in phi_k(&c, &w).unwrap() {
                assert!(v.abs() < 1e-13);
            }
            assert!(jacobian_gram_norm(&c, &w).unwrap().value() < 1e-12);
            let f = crate::geometry::defining_value(&c.centre(), c.radii(), &w).unwrap();
            assert!(f.abs() < 1e-13);
        }
        let e = TangencyConfig::tangent_at(AxisFrame::new(2, 0).unwrap(), 1.0, &[0.6, 0.8]);
        assert!(e.is_err(), "the point shifts across the axis, r^2 < 0");
    }

    #[test]
    fn last_component_vanishes_on_sphere() {
        let c = cfg(4, 0, 0.7, vec![0.8, 1.3, 1.9, 0.6]);
        let w = [0.5, 0.5, 0.5, -0.5];
        assert_eq!(*phi_k(&c, &w).unwrap().last().unwrap(), 0.0);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = RngStream::new(21, 4);
        for n in 2..=6 {
            let (c, w) = random_cfg(&mut rng, n);
            let m = d_omega_phi_k(&c, &w).unwrap();
            let h = 1e-6;
            for col in 0..n {
                let mut p = w.clone();
                let mut q = w.clone();
                p[col] += h;
                q[col] -= h;
                let fp = phi_k(&c, &p).unwrap();
                let fq = phi_k(&c, &q).unwrap();
                for row in 0..n {
                    let fd = (fp[row] - fq[row]) / (2.0 * h);
                    assert!((fd - m[(row, col)]).abs() < 1e-7, "n={n} ({row},{col})");
                }
            }
        }
    }

    #[test]
    fn rational_paths_agree_exactly() {
        let q = |a: i64, b: i64| Rational::new(BigInt::from(a), BigInt::from(b));
        let frame = AxisFrame::with_direction(3, 1, vec![q(99, 100), q(1, 1000), q(101, 100)]).unwrap();
        let c = TangencyConfig::new(frame, q(3, 2), Radii::new(vec![q(1, 2), q(5, 4), q(7, 3)]).unwrap_or_else(|_| unreachable!()));
        // 7/3 > 2 is outside the admissible range; the identity does not care.
        assert!(c.is_err());
        let frame = AxisFrame::with_direction(3, 1, vec![q(99, 100), q(1, 1000), q(101, 100)]).unwrap();
        let c = TangencyConfig::unchecked(frame, q(3, 2), Radii::new(vec![q(1, 2), q(5, 4), q(7, 3)]).unwrap()).unwrap();
        let w = [q(1, 3), q(-2, 7), q(5, 11)];
        let d = gram_norm_sq_gram(&c, &w).unwrap() - gram_norm_sq_cauchy_binet(&c, &w).unwrap();
        assert!(d.is_zero());
    }
}
