use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::circulant::{ones_off_diagonal, p_closed_form};
use super::report::{fmt_vec, IdentityReport, WorstCase};
use crate::error::{Error, Result};
use crate::geometry::{d_omega_phi_k, g_ij, g_j, jacobian_gram_norm, AxisFrame, Radii, TangencyConfig};
use crate::linalg::Matrix;
use crate::mc::{derive_stream_id, RngStream};
use crate::scalar::{relative_residual, Scalar};
use crate::Rational;

const SUITE_STREAM: u64 = 0x6964_656e;
const CAUCHY_BINET_STREAM: u64 = 0x6362_696e;
const FLOAT_THRESHOLD: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e6;

/// Scalars the suite can run in.
trait SuiteScalar: Scalar {
    fn from_draw(x: f64) -> Self;
    fn well_conditioned(w: &Matrix<Self>) -> bool;
}

impl SuiteScalar for f64 {
    fn from_draw(x: f64) -> Self {
        x
    }

    fn well_conditioned(w: &Matrix<Self>) -> bool {
        w.condition_one() <= MAX_CONDITION
    }
}

impl SuiteScalar for Rational {
    /// Rounded to a multiple of `1/256`.
    fn from_draw(x: f64) -> Self {
        let p = (x * 256.0).round().to_i64().expect("finite draw");
        Rational::new(BigInt::from(p), BigInt::from(256))
    }

    fn well_conditioned(w: &Matrix<Self>) -> bool {
        !num_traits::Zero::is_zero(&w.det())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteParams {
    pub dims: Vec<usize>,
    /// Fixed slicing axis; `None` cycles through all axes trial by trial.
    pub k: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl SuiteParams {
    pub fn new(dims: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self { dims, k: None, trials, seed }
    }
}

/// `A^k` with rows `j != k` in order, then `(r_j^2 omega_j^2)_j`.
pub fn a_k_matrix<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Matrix<T> {
    let n = cfg.dim();
    let k = cfg.k();
    let d = cfg.frame().d_tilde();
    let t = cfg.t().clone();
    let r = cfg.radii();
    let mut m = Matrix::zeros(n, n);
    for (row, j) in (0..n).filter(|&j| j != k).enumerate() {
        m[(row, j)] = -(t.clone() * d[j].clone() * omega[k].clone());
        m[(row, k)] = t.clone() * d[k].clone() * omega[j].clone();
    }
    for j in 0..n {
        m[(n - 1, j)] = r[j].clone() * r[j].clone() * omega[j].clone() * omega[j].clone();
    }
    m
}

/// `(-1)^k t^{n-1} omega_k^{n-2} sum_j (prod_{i != j} d~_i) r_j^2 omega_j^3`, `k` zero-based.
pub fn a_k_closed_form<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> T {
    let n = cfg.dim();
    let k = cfg.k();
    let d = cfg.frame().d_tilde();
    let r = cfg.radii();
    let pow = |x: &T, e: usize| (0..e).fold(T::one(), |a, _| a * x.clone());
    let sum = (0..n).fold(T::zero(), |acc, j| {
        let prod = (0..n)
            .filter(|&i| i != j)
            .fold(T::one(), |a, i| a * d[i].clone());
        acc + prod * r[j].clone() * r[j].clone() * pow(&omega[j], 3)
    });
    let v = pow(cfg.t(), n - 1) * pow(&omega[k], n - 2) * sum;
    if k % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `B^k`: `r_j^2 G_j` in column `j`, `r_k^2 G_j` in column `k`, last row zero.
fn b_k_matrix<T: Scalar>(cfg: &TangencyConfig<T>, omega: &[T]) -> Matrix<T> {
    let n = cfg.dim();
    let k = cfg.k();
    let r = cfg.radii();
    let mut m = Matrix::zeros(n, n);
    for (row, j) in (0..n).filter(|&j| j != k).enumerate() {
        let g = g_j(cfg, omega, j);
        m[(row, j)] = r[j].clone() * r[j].clone() * g.clone();
        m[(row, k)] = r[k].clone() * r[k].clone() * g;
    }
    m
}

/// Size of the leading block in the Schur check: `3` for `n = 8`.
pub fn schur_split(n: usize) -> usize {
    (3 * n / 8).clamp(1, n - 1)
}

struct Trial<T> {
    cfg: TangencyConfig<T>,
    omega: Vec<T>,
    draws: Vec<f64>,
}

fn draw_trial<T: SuiteScalar>(n: usize, k: usize, rng: &mut RngStream) -> Result<Trial<T>> {
    let mut draws = Vec::with_capacity(3 * n + 1);
    let mut take = |lo: f64, hi: f64| {
        let v = rng.uniform_in(lo, hi);
        draws.push(v);
        T::from_draw(v)
    };
    let omega: Vec<T> = (0..n).map(|_| take(-1.5, 1.5)).collect();
    let t = take(0.01, 2.0);
    let radii: Vec<T> = (0..n).map(|_| take(0.5, 2.0)).collect();
    let d_tilde: Vec<T> = (0..n)
        .map(|j| {
            let base = if j == k { T::zero() } else { T::one() };
            base + take(-0.25, 0.25)
        })
        .collect();
    let frame = AxisFrame::with_direction(n, k, d_tilde)?;
    let cfg = TangencyConfig::unchecked(frame, t, Radii::new(radii)?)?;
    Ok(Trial { cfg, omega, draws })
}

#[derive(Default)]
struct Residuals {
    syzygy: Option<f64>,
    derivative: f64,
    schur: f64,
    det_a_k: f64,
    factorisation: f64,
    circulant: f64,
}

fn run_trial<T: SuiteScalar>(n: usize, k: usize, rng: &mut RngStream) -> Result<(Residuals, String)> {
    let Trial { cfg, omega, draws } = draw_trial::<T>(n, k, rng)?;
    let res = |a: &T, b: &T| relative_residual(a, b).as_f64();
    let mut out = Residuals::default();
    let d = cfg.frame().d_tilde();
    let t = cfg.t().clone();
    let r = cfg.radii();

    for i in (0..n).filter(|&i| i != k) {
        for j in (i + 1..n).filter(|&j| j != k) {
            let lhs = omega[k].clone() * g_ij(&cfg, &omega, i, j);
            let rhs = omega[j].clone() * g_j(&cfg, &omega, i) - omega[i].clone() * g_j(&cfg, &omega, j);
            let v = res(&lhs, &rhs);
            out.syzygy = Some(out.syzygy.map_or(v, |w: f64| w.max(v)));
        }
    }

    let h = T::one() / T::from_usize_exact(1024);
    let partial = |j: usize, axis: usize| {
        let mut w = omega.clone();
        w[axis] = omega[axis].clone() + h.clone();
        let plus = g_j(&cfg, &w, j);
        w[axis] = omega[axis].clone() - h.clone();
        let minus = g_j(&cfg, &w, j);
        (plus - minus) / (T::two() * h.clone())
    };
    for j in (0..n).filter(|&j| j != k) {
        let g = g_j(&cfg, &omega, j);
        let rj2 = r[j].clone() * r[j].clone();
        let rk2 = r[k].clone() * r[k].clone();
        let lhs = omega[j].clone() * partial(j, j);
        let rhs = g.clone() - t.clone() * d[j].clone() * omega[k].clone() / rj2;
        out.derivative = out.derivative.max(res(&lhs, &rhs));
        let lhs = omega[k].clone() * partial(j, k);
        let rhs = g + t.clone() * d[k].clone() * omega[j].clone() / rk2;
        out.derivative = out.derivative.max(res(&lhs, &rhs));
    }

    let a = a_k_matrix(&cfg, &omega);
    out.det_a_k = res(&a.det(), &a_k_closed_form(&cfg, &omega));

    let b = b_k_matrix(&cfg, &omega);
    let ab = Matrix::from_fn(n, n, |i, j| a[(i, j)].clone() + b[(i, j)].clone());
    let weight = (0..n).fold(T::one(), |acc, j| {
        acc * r[j].clone() * r[j].clone() * omega[j].clone()
    });
    out.factorisation = res(&ab.det(), &(weight * d_omega_phi_k(&cfg, &omega)?.det()));

    let p = schur_split(n);
    let q = n - p;
    let full = loop {
        let m = Matrix::from_fn(n, n, |_, _| T::from_draw(rng.uniform_in(-1.0, 1.0)));
        if T::well_conditioned(&m.block(0, 0, p, p)) {
            break m;
        }
    };
    let w = full.block(0, 0, p, p);
    let x = full.block(0, p, p, q);
    let y = full.block(p, 0, q, p);
    let z = full.block(p, p, q, q);
    let schur = z.sub(&y.mul(&w.inverse()?).mul(&x));
    out.schur = res(&full.det(), &(w.det() * schur.det()));

    let a_scalar = T::from_draw(rng.uniform_in(-10.0, 10.0));
    out.circulant = res(&ones_off_diagonal(n, &a_scalar).det(), &p_closed_form(n, &a_scalar));

    let input = format!("(n={n},k={k},draws={},a={})", fmt_vec(&draws), a_scalar.as_f64());
    Ok((out, input))
}

fn suite<T: SuiteScalar>(params: &SuiteParams, threshold: f64, suffix: &str) -> Result<Vec<IdentityReport>> {
    for &n in &params.dims {
        if n < 2 {
            return Err(crate::error::invalid("n", format!("{n} < 2")));
        }
        if let Some(k) = params.k.filter(|&k| k >= n) {
            return Err(Error::AxisOutOfRange { k, n });
        }
    }
    let names = ["circulant_det", "syzygy", "derivative", "schur", "det_a_k", "jacobian_factorisation"];
    let mut worst: Vec<WorstCase> = vec![WorstCase::default(); names.len()];
    for &n in &params.dims {
        let results: Vec<(Residuals, String)> = (0..params.trials)
            .into_par_iter()
            .map(|trial| {
                let k = params.k.unwrap_or(trial % n);
                let mut rng = RngStream::derived(params.seed, derive_stream_id(SUITE_STREAM, n as u64), trial as u64);
                run_trial::<T>(n, k, &mut rng)
            })
            .collect::<Result<_>>()?;
        for (r, input) in &results {
            let vals = [Some(r.circulant), r.syzygy, Some(r.derivative), Some(r.schur), Some(r.det_a_k), Some(r.factorisation)];
            for (w, v) in worst.iter_mut().zip(vals) {
                if let Some(v) = v {
                    w.record(v, || input.clone());
                }
            }
        }
    }
    Ok(worst
        .into_iter()
        .zip(names)
        .map(|(w, name)| w.into_report(format!("{name}{suffix}"), threshold))
        .collect())
}

/// `||J||` from the Gram determinant against `4 (sum_{i<j} G_{i,j}^2)^{1/2}`
/// at seeded tuples `(omega, t, r, d~_k)`.
pub fn cauchy_binet_check(dims: &[usize], trials: usize, seed: u64) -> Result<IdentityReport> {
    let mut worst = WorstCase::default();
    for &n in dims {
        if n < 2 {
            return Err(crate::error::invalid("n", format!("{n} < 2")));
        }
        let results: Vec<(f64, String)> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = RngStream::derived(seed, derive_stream_id(CAUCHY_BINET_STREAM, n as u64), trial as u64);
                let Trial { cfg, omega, draws } = draw_trial::<f64>(n, trial % n, &mut rng)?;
                let norm = jacobian_gram_norm(&cfg, &omega)?;
                Ok((norm.relative_residual, format!("(n={n},draws={})", fmt_vec(&draws))))
            })
            .collect::<Result<_>>()?;
        for (r, input) in results {
            worst.record(r, || input);
        }
    }
    Ok(worst.into_report("cauchy_binet", 1e-10))
}

/// Every polynomial identity at seeded random `(omega, t, r, d~_k)`, in `f64`.
pub fn identity_suite(params: &SuiteParams) -> Result<Vec<IdentityReport>> {
    suite::<f64>(params, FLOAT_THRESHOLD, "")
}

/// The same identities over exact rationals; every residual must be zero.
/// Cost grows quickly with `n`; intended for `n <= 4`.
pub fn identity_suite_exact(params: &SuiteParams) -> Result<Vec<IdentityReport>> {
    suite::<Rational>(params, 0.0, "_exact")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_three_dimensional_example() {
        let frame = AxisFrame::new(3, 0).unwrap();
        let cfg = TangencyConfig::new(frame, 1.0f64, Radii::unit(3)).unwrap();
        let omega = [1.0f64; 3];
        assert_eq!(a_k_closed_form(&cfg, &omega), 1.0);
        assert!((a_k_matrix(&cfg, &omega).det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn float_suite_passes() {
        let reps = identity_suite(&SuiteParams::new((2..=8).collect(), 200, 3)).unwrap();
        assert_eq!(reps.len(), 6);
        for r in &reps {
            assert!(r.passed(), "{r:?}");
        }
        assert_eq!(reps[0].trials, 7 * 200);
        // No admissible pair i < j avoids k when n = 2.
        assert_eq!(reps[1].trials, 6 * 200);
    }

    #[test]
    fn exact_suite_is_zero() {
        let reps = identity_suite_exact(&SuiteParams::new(vec![2, 3, 4], 40, 5)).unwrap();
        for r in &reps {
            assert_eq!(r.max_relative_residual, 0.0, "{r:?}");
        }
    }

    #[test]
    fn fixed_axis_is_validated() {
        let mut p = SuiteParams::new(vec![2, 3], 1, 0);
        p.k = Some(2);
        assert_eq!(identity_suite(&p).unwrap_err(), Error::AxisOutOfRange { k: 2, n: 2 });
    }

    #[test]
    fn suite_is_reproducible() {
        let p = SuiteParams::new(vec![3, 5], 50, 17);
        assert_eq!(identity_suite(&p).unwrap(), identity_suite(&p).unwrap());
    }

    #[test]
    fn cauchy_binet_paths_agree() {
        let r = cauchy_binet_check(&[2, 3, 5], 2000, 4).unwrap();
        assert_eq!(r.trials, 6000);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn split_sizes() {
        assert_eq!(schur_split(8), 3);
        assert_eq!(schur_split(2), 1);
        assert_eq!(schur_split(3), 1);
    }
}
