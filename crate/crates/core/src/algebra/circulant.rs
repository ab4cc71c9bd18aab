use super::report::{IdentityReport, WorstCase};
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::scalar::{relative_residual, Scalar};
use crate::Rational;

/// `a` on the diagonal, `1` everywhere else.
pub fn ones_off_diagonal<T: Scalar>(n: usize, a: &T) -> Matrix<T> {
    Matrix::from_fn(n, n, |i, j| if i == j { a.clone() } else { T::one() })
}

/// `P(a) = (a - 1)^{n-1} (a + n - 1)`.
pub fn p_closed_form<T: Scalar>(n: usize, a: &T) -> T {
    let base = a.clone() - T::one();
    let mut p = a.clone() + T::from_usize_exact(n) - T::one();
    for _ in 1..n {
        p = p * base.clone();
    }
    p
}

fn check<T: Scalar>(n_list: &[usize], a_samples: &[T], threshold: f64) -> Result<IdentityReport> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(invalid("n", format!("{n} < 2")));
    }
    let mut worst = WorstCase::default();
    for &n in n_list {
        for a in a_samples {
            let lhs = ones_off_diagonal(n, a).det();
            let rhs = p_closed_form(n, a);
            let res = relative_residual(&lhs, &rhs).as_f64();
            worst.record(res, || format!("(n={n},a={})", a.as_f64()));
        }
    }
    Ok(worst.into_report("circulant_det", threshold))
}

/// LU determinant of [`ones_off_diagonal`] against [`p_closed_form`].
pub fn circulant_det_check(n_list: &[usize], a_samples: &[f64]) -> Result<IdentityReport> {
    check(n_list, a_samples, 1e-9)
}

/// Same comparison in exact arithmetic; the residual must be exactly zero.
pub fn circulant_det_check_exact(n_list: &[usize], a_samples: &[Rational]) -> Result<IdentityReport> {
    let mut r = check(n_list, a_samples, 0.0)?;
    r.name = "circulant_det_exact".into();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::seeded_uniform;
    use crate::linalg::det_cofactor;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_is_difference_of_squares() {
        for a in [-3.0, 0.0, 0.5, 7.0] {
            assert_eq!(p_closed_form(2, &a), a * a - 1.0);
        }
    }

    #[test]
    fn three_by_three_at_two() {
        let m = ones_off_diagonal(3, &2.0);
        assert_eq!(det_cofactor(&m), 4.0);
        assert_eq!(p_closed_form(3, &2.0), 4.0);
    }

    #[test]
    fn eight_dimensional_samples() {
        let a = seeded_uniform(100, -10.0, 10.0, 8);
        let r = circulant_det_check(&[8], &a).unwrap();
        assert_eq!(r.trials, 100);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn exact_mode_is_zero() {
        let a: Vec<Rational> = (-20..=20)
            .map(|p| Rational::new(BigInt::from(p), BigInt::from(7)))
            .collect();
        let r = circulant_det_check_exact(&[2, 3, 4, 5], &a).unwrap();
        assert_eq!(r.max_relative_residual, 0.0);
        assert!(r.passed());
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(circulant_det_check(&[1, 3], &[2.0]).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_matches_cofactor(n in 2usize..6, a in -10.0f64..10.0) {
            let m = ones_off_diagonal(n, &a);
            let d = det_cofactor(&m);
            prop_assert!(relative_residual(&d, &p_closed_form(n, &a)) < 1e-10);
        }
    }
}
