use serde::{Deserialize, Serialize};

use super::circulant::p_closed_form;
use super::report::{fmt_vec, IdentityReport, WorstCase};
use crate::error::{invalid, Result};
use crate::knapp::{phi, phi_jacobian};
use crate::linalg::Matrix;
use crate::mc::RngStream;
use crate::scalar::relative_residual;

const APPENDIX_STREAM: u64 = 0x6170_7078;
const FD_STEP: f64 = 1e-6;

/// Central differences at steps `h` and `h/2`, combined by one Richardson step.
pub fn finite_difference_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Matrix<f64> {
    let n = x.len();
    let m = f(x).len();
    let mut jac = Matrix::zeros(m, n);
    let mut y = x.to_vec();
    let central = |j: usize, step: f64, y: &mut Vec<f64>| {
        y[j] = x[j] + step;
        let plus = f(y);
        y[j] = x[j] - step;
        let minus = f(y);
        y[j] = x[j];
        plus.iter()
            .zip(&minus)
            .map(|(p, q)| (p - q) / (2.0 * step))
            .collect::<Vec<_>>()
    };
    for j in 0..n {
        let coarse = central(j, h, &mut y);
        let fine = central(j, h / 2.0, &mut y);
        for i in 0..m {
            jac[(i, j)] = (4.0 * fine[i] - coarse[i]) / 3.0;
        }
    }
    jac
}

/// The matrix as printed: `|r|^{-3}` times `2 sum_j r_j^3 - r_i^3` on the
/// diagonal and `-r_i^2 r_j` off it.
pub fn display_jacobian(r: &[f64]) -> Matrix<f64> {
    let norm3 = r.iter().map(|v| v * v).sum::<f64>().powf(1.5);
    let cubes = r.iter().map(|v| v * v * v).sum::<f64>();
    Matrix::from_fn(r.len(), r.len(), |i, j| {
        let v = if i == j {
            2.0 * cubes - r[i].powi(3)
        } else {
            -r[i] * r[i] * r[j]
        };
        v / norm3
    })
}

/// `det JPhi(r 1) = (-1)^n n^{-3n/2} P(-(2n - 1))`, independent of `r`.
pub fn det_at_ones_closed_form(n: usize) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let a = -(2.0 * n as f64 - 1.0);
    sign * (n as f64).powf(-1.5 * n as f64) * p_closed_form(n, &a)
}

/// The printed value `(-1)^n r^{3(n-1)} n^{-3/2} P(-(2n - 1))`.
pub fn det_at_ones_display(n: usize, r: f64) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let a = -(2.0 * n as f64 - 1.0);
    sign * r.powi(3 * (n as i32 - 1)) * (n as f64).powf(-1.5) * p_closed_form(n, &a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianRow {
    pub n: usize,
    /// Finite-difference determinant at `1`.
    pub det_ones: f64,
    /// Largest `|det(r 1) - det(1)|` over `r in {1, 3/2, 2}`.
    pub homogeneity_spread: f64,
    pub det_three_halves: f64,
    pub closed_form: f64,
    /// Printed formula at `r = 1` and its ratio to the measured value.
    pub display_value: f64,
    pub display_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    /// Finite differences against the direct derivative, generic points.
    pub fd_vs_direct: IdentityReport,
    /// Printed matrix against finite differences at `r 1`.
    pub display_symmetric: IdentityReport,
    /// Printed matrix against finite differences at generic points. A
    /// failing residual here is a recorded finding, not a test failure.
    pub display_generic: IdentityReport,
    /// Measured determinant at `r 1` against [`det_at_ones_closed_form`].
    pub closed_form: IdentityReport,
    pub rows: Vec<JacobianRow>,
}

impl AppendixReport {
    pub fn homogeneous(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.homogeneity_spread <= tol)
    }

    pub fn det_ones(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.det_ones)
    }

    pub fn min_abs_det_three_halves(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.det_three_halves.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn max_entry_residual(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let r = relative_residual(&a[(i, j)], &b[(i, j)]);
            worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
        }
    }
    worst
}

/// Audit the Jacobian of `Phi(r) = |r|^{-1} (r_1^2, ..., r_n^2)`:
/// finite differences against the direct derivative and the printed matrix,
/// plus the determinant along the diagonal.
pub fn appendix_jacobian_check(n_list: &[usize], r_samples: usize, seed: u64) -> Result<AppendixReport> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(invalid("n", format!("{n} < 2")));
    }
    let mut direct = WorstCase::default();
    let mut generic = WorstCase::default();
    let mut symmetric = WorstCase::default();
    let mut closed = WorstCase::default();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut rng = RngStream::new(seed, APPENDIX_STREAM ^ n as u64);
        for _ in 0..r_samples {
            let r: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.5, 2.0)).collect();
            let fd = finite_difference_jacobian(phi, &r, FD_STEP);
            direct.record(max_entry_residual(&fd, &phi_jacobian(&r)), || fmt_vec(&r));
            generic.record(max_entry_residual(&fd, &display_jacobian(&r)), || fmt_vec(&r));
        }
        let det_at = |s: f64| finite_difference_jacobian(phi, &vec![s; n], FD_STEP).det();
        let det_ones = det_at(1.0);
        let mut spread = 0.0f64;
        for s in [1.0, 1.5, 2.0] {
            let ones = vec![s; n];
            let fd = finite_difference_jacobian(phi, &ones, FD_STEP);
            symmetric.record(max_entry_residual(&fd, &display_jacobian(&ones)), || {
                format!("(n={n},r={s})")
            });
            spread = spread.max((fd.det() - det_ones).abs());
        }
        let closed_form = det_at_ones_closed_form(n);
        closed.record(relative_residual(&det_ones, &closed_form), || format!("(n={n})"));
        let display_value = det_at_ones_display(n, 1.0);
        rows.push(JacobianRow {
            n,
            det_ones,
            homogeneity_spread: spread,
            det_three_halves: det_at(1.5),
            closed_form,
            display_value,
            display_ratio: display_value / det_ones,
        });
    }
    Ok(AppendixReport {
        fd_vs_direct: direct.into_report("jacobian_fd_vs_direct", 1e-6),
        display_symmetric: symmetric.into_report("jacobian_display_symmetric", 1e-6),
        display_generic: generic.into_report("jacobian_display_generic", 1e-6),
        closed_form: closed.into_report("jacobian_det_closed_form", 1e-6),
        rows,
    })
}
