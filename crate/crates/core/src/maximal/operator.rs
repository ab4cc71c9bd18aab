use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{BoxRegion, Field};
use super::net::RadiiNet;
use crate::error::{check_dim, invalid, Result};
use crate::geometry::{Annulus, AnnulusSpec, Ellipsoid, Radii, ShellKernel};
use crate::mc::{derive_stream_id, estimate_mean, ExactSum, MCEstimate, RngStream};
use crate::volume::ShellSampler;

const MAXIMAL_STREAM: u64 = 0x6d61_7869;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AverageMode {
    /// Average of `|f|`.
    Absolute,
    /// Average of `f`; only meaningful as a symmetry diagnostic.
    Signed,
}

/// Average of `|f|` over the annulus. For a refined annulus the samples
/// failing the refinement count as zero and the normaliser stays the full
/// shell.
pub fn annulus_average<F, A>(f: &F, a: &A, m: usize, seed: u64) -> Result<MCEstimate>
where
    F: Field + ?Sized,
    A: Annulus<f64> + ?Sized,
{
    annulus_average_mode(f, a, AverageMode::Absolute, m, seed)
}

pub fn annulus_average_mode<F, A>(f: &F, a: &A, mode: AverageMode, m: usize, seed: u64) -> Result<MCEstimate>
where
    F: Field + ?Sized,
    A: Annulus<f64> + ?Sized,
{
    let n = a.spec().dim();
    check_dim(n, f.dim())?;
    if m == 0 {
        return Err(invalid("m", "need at least one sample"));
    }
    let sampler = ShellSampler::new(n, *a.spec().delta());
    let kernel = ShellKernel::new(a);
    Ok(estimate_mean(m, seed, 0, |rng| {
        let mut omega = [0.0; 16];
        let mut y = [0.0; 16];
        let (omega, y) = (&mut omega[..n], &mut y[..n]);
        sampler.sample_into(rng, omega);
        if !kernel.passes_refinement(omega) {
            return 0.0;
        }
        kernel.forward_into(omega, y);
        match mode {
            AverageMode::Absolute => f.eval(y).abs(),
            AverageMode::Signed => f.eval(y),
        }
    }))
}

/// Shared settings for the maximal operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalParams {
    pub delta: f64,
    /// Samples per annulus average.
    pub samples: usize,
    pub c_n: f64,
    pub seed: u64,
}

impl MaximalParams {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(invalid("delta", format!("{} not in (0, 1/2]", self.delta)));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "need at least one sample"));
        }
        if !(self.c_n > 0.0) {
            return Err(invalid("c_n", "must be positive"));
        }
        Ok(())
    }

    fn rng(&self, x_id: u64, net_id: u64) -> RngStream {
        RngStream::derived(self.seed, derive_stream_id(MAXIMAL_STREAM, x_id), net_id)
    }
}

/// One net point: `m` shell samples mapped to `E^delta(x, r)`, visited in a
/// fixed order. `visit(omega, |f(y)|)`.
fn for_each_sample<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    r: &Radii<f64>,
    p: &MaximalParams,
    mut rng: RngStream,
    mut visit: impl FnMut(&[f64], f64),
) {
    let n = x.len();
    let sampler = ShellSampler::new(n, p.delta);
    let mut omega = [0.0; 16];
    let mut y = [0.0; 16];
    let (omega, y) = (&mut omega[..n], &mut y[..n]);
    for _ in 0..p.samples {
        sampler.sample_into(&mut rng, omega);
        for j in 0..n {
            y[j] = x[j] + r[j] * omega[j];
        }
        visit(omega, f.eval(y).abs());
    }
}

fn check_inputs<F: Field + ?Sized>(f: &F, x: &[f64], net: &RadiiNet, p: &MaximalParams) -> Result<()> {
    p.validate()?;
    check_dim(f.dim(), x.len())?;
    check_dim(net.dim(), x.len())?;
    if net.is_empty() {
        return Err(invalid("net", "empty radii net"));
    }
    if x.len() > 16 {
        return Err(invalid("n", "dimensions above 16 are not supported"));
    }
    Ok(())
}

/// Average at net position `i`, with the samples [`discretised_maximal`]
/// uses there. `refine = Some(k)` selects the refined average for axis `k`.
pub fn net_point_average<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    x_id: u64,
    net: &RadiiNet,
    i: usize,
    refine: Option<usize>,
    p: &MaximalParams,
) -> Result<f64> {
    check_inputs(f, x, net, p)?;
    if let Some(k) = refine {
        if k >= x.len() {
            return Err(crate::Error::AxisOutOfRange { k, n: x.len() });
        }
    }
    let two_c = 2.0 * p.c_n;
    let mut sum = 0.0;
    for_each_sample(f, x, net.point(i), p, p.rng(x_id, net.id(i)), |omega, v| {
        let keep = match refine {
            None => true,
            Some(k) => {
                let w = omega[k].abs();
                w * w * w >= two_c
            }
        };
        if keep {
            sum += v;
        }
    });
    Ok(sum / p.samples as f64)
}

/// `max` over the net of the (refined) annulus averages at `x`. Samples are
/// keyed by `(seed, x_id, net id)`.
pub fn discretised_maximal<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    x_id: u64,
    net: &RadiiNet,
    refine: Option<usize>,
    p: &MaximalParams,
) -> Result<f64> {
    check_inputs(f, x, net, p)?;
    let mut best = f64::NEG_INFINITY;
    for i in 0..net.len() {
        best = best.max(net_point_average(f, x, x_id, net, i, refine, p)?);
    }
    Ok(best)
}

/// Plain and refined maxima at one point, evaluated on shared samples with
/// exact summation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedMaximal {
    pub plain: f64,
    pub refined: Vec<f64>,
    /// `plain - sum(refined)`, sign exact.
    pub violation: f64,
}

pub fn shared_maximal<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    x_id: u64,
    net: &RadiiNet,
    p: &MaximalParams,
) -> Result<SharedMaximal> {
    check_inputs(f, x, net, p)?;
    let n = x.len();
    let two_c = 2.0 * p.c_n;
    let mut best_plain = ExactSum::new();
    let mut best_refined = vec![ExactSum::new(); n];
    for i in 0..net.len() {
        let mut plain = ExactSum::new();
        let mut refined = vec![ExactSum::new(); n];
        for_each_sample(f, x, net.point(i), p, p.rng(x_id, net.id(i)), |omega, v| {
            plain.add(v);
            for (k, acc) in refined.iter_mut().enumerate() {
                let w = omega[k].abs();
                if w * w * w >= two_c {
                    acc.add(v);
                }
            }
        });
        if i == 0 || plain.cmp_exact(&best_plain) == Ordering::Greater {
            best_plain = plain;
        }
        for (b, r) in best_refined.iter_mut().zip(refined) {
            if i == 0 || r.cmp_exact(b) == Ordering::Greater {
                *b = r;
            }
        }
    }
    let m = p.samples as f64;
    let mut diff = best_plain.clone();
    for b in &best_refined {
        diff.sub_sum(b);
    }
    Ok(SharedMaximal {
        plain: best_plain.value() / m,
        refined: best_refined.iter().map(|b| b.value() / m).collect(),
        violation: diff.value() / m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// Largest `M f(x) - sum_k M_k f(x)` over the sampled points.
    pub max_violation: f64,
    pub violations: usize,
    pub points: usize,
    pub max_plain: f64,
}

/// Check `M f <= sum_k M_k f` at every `x` on shared samples.
pub fn domination_check<F: Field + ?Sized>(
    f: &F,
    xs: &[Vec<f64>],
    net: &RadiiNet,
    p: &MaximalParams,
) -> Result<DominationReport> {
    let per_x = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| shared_maximal(f, x, i as u64, net, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DominationReport {
        max_violation: per_x.iter().map(|s| s.violation).fold(f64::NEG_INFINITY, f64::max),
        violations: per_x.iter().filter(|s| s.violation > 0.0).count(),
        points: per_x.len(),
        max_plain: per_x.iter().map(|s| s.plain).fold(0.0, f64::max),
    })
}

/// `(|region| mean |f|^p)^{1/p}` with the error propagated to first order.
pub fn lp_norm<F: Field + ?Sized>(f: &F, p: f64, region: &BoxRegion, m: usize, seed: u64) -> Result<MCEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} is not in [1, inf)")));
    }
    check_dim(f.dim(), region.dim())?;
    if m == 0 {
        return Err(invalid("m", "need at least one sample"));
    }
    let n = region.dim();
    let vol = region.volume();
    let est = estimate_mean(m, seed, 0, |rng| {
        let mut y = [0.0; 16];
        region.sample_into(rng, &mut y[..n]);
        f.eval(&y[..n]).abs().powf(p)
    })
    .scale(vol);
    Ok(power_estimate(est, 1.0 / p))
}

/// `est^q` with first-order error propagation.
pub(crate) fn power_estimate(est: MCEstimate, q: f64) -> MCEstimate {
    let value = est.value.max(0.0).powf(q);
    let std_error = if est.value > 0.0 {
        q.abs() * value * est.std_error / est.value
    } else {
        0.0
    };
    MCEstimate {
        value,
        std_error,
        ..est
    }
}

/// `E^delta(x, r)` as a plain annulus spec.
pub fn shell_spec(x: &[f64], r: &Radii<f64>, delta: f64) -> Result<AnnulusSpec<f64>> {
    AnnulusSpec::new(Ellipsoid::new(x.to_vec(), r.clone())?, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_c_n;
    use crate::maximal::field::{box_indicator, ClosureField};
    use proptest::prelude::*;

    fn params(delta: f64, samples: usize, seed: u64) -> MaximalParams {
        MaximalParams {
            delta,
            samples,
            c_n: default_c_n(3),
            seed,
        }
    }

    fn bump(centre: [f64; 3], width: f64, height: f64) -> ClosureField<impl Fn(&[f64]) -> f64 + Send + Sync> {
        ClosureField::new(BoxRegion::cube(&centre, 4.0 * width).unwrap(), move |y| {
            let d2: f64 = y.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
            height * (-d2 / (2.0 * width * width)).exp()
        })
    }

    #[test]
    fn constant_field_averages_to_itself() {
        let f = ClosureField::new(BoxRegion::cube(&[0.0; 3], 10.0).unwrap(), |_| 2.5);
        let spec = shell_spec(&[0.1, 0.0, -0.2], &Radii::uniform(3, 1.3).unwrap(), 0.1).unwrap();
        let a = annulus_average(&f, &spec, 10_000, 1).unwrap();
        assert_eq!(a.value, 2.5);
        assert_eq!(a.std_error, 0.0);
    }

    #[test]
    fn signed_average_of_odd_function_vanishes() {
        let f = ClosureField::new(BoxRegion::cube(&[0.0; 3], 3.0).unwrap(), |y| y[0]);
        let spec = shell_spec(&[0.0; 3], &Radii::unit(3), 0.2).unwrap();
        let a = annulus_average_mode(&f, &spec, AverageMode::Signed, 200_000, 3).unwrap();
        assert!(a.agrees_with_value(0.0, 3.0), "{a:?}");
        let abs = annulus_average(&f, &spec, 200_000, 3).unwrap();
        assert!(abs.value > 0.4);
    }

    #[test]
    fn refined_average_keeps_the_full_normaliser() {
        let one = box_indicator(BoxRegion::cube(&[0.0; 3], 10.0).unwrap());
        let spec = shell_spec(&[0.0; 3], &Radii::unit(3), 0.05).unwrap();
        let c = default_c_n(3);
        let refined = spec.clone().refine(0, c).unwrap();
        let a = annulus_average(&one, &refined, 400_000, 9).unwrap();
        // Uniform direction: P(|omega_0| >= s) = 1 - s on S^2, s = (2c)^{1/3}.
        let expect = 1.0 - (2.0 * c).cbrt();
        assert!((a.value - expect).abs() < 5.0 * a.std_error + 0.01, "{a:?} vs {expect}");
    }

    #[test]
    fn maximal_of_constant_is_the_constant() {
        let one = box_indicator(BoxRegion::cube(&[0.0; 3], 10.0).unwrap());
        let net = RadiiNet::restricted(3, default_c_n(3), 0.1).unwrap();
        let v = discretised_maximal(&one, &[0.0; 3], 0, &net, None, &params(0.1, 64, 1)).unwrap();
        assert_eq!(v, 1.0);
        let s = shared_maximal(&one, &[0.0; 3], 0, &net, &params(0.1, 64, 1)).unwrap();
        assert_eq!(s.plain, 1.0);
        assert!(s.refined.iter().sum::<f64>() <= 3.0);
        assert!(s.violation <= 0.0);
    }

    #[test]
    fn shared_and_direct_maxima_agree() {
        let f = bump([0.9, 0.3, 0.2], 0.3, 1.0);
        let net = RadiiNet::with_step(3, 1.0, 1.2, 0.1).unwrap();
        let p = params(0.1, 500, 4);
        let x = [0.1, 0.0, 0.0];
        let s = shared_maximal(&f, &x, 7, &net, &p).unwrap();
        let direct = discretised_maximal(&f, &x, 7, &net, None, &p).unwrap();
        assert!((s.plain - direct).abs() <= 1e-12 * direct);
        for k in 0..3 {
            let d = discretised_maximal(&f, &x, 7, &net, Some(k), &p).unwrap();
            assert!((s.refined[k] - d).abs() <= 1e-12 * d.max(1e-300));
        }
    }

    #[test]
    fn domination_on_a_field_concentrated_near_an_axis() {
        // Mass near omega = e_0, where only the k = 0 refinement survives.
        let f = bump([1.0, 0.0, 0.0], 0.05, 3.0);
        let net = RadiiNet::restricted(3, default_c_n(3), 0.125).unwrap();
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![0.002 * i as f64, 0.0, 0.0]).collect();
        let rep = domination_check(&f, &xs, &net, &params(0.125, 200, 5)).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.max_violation <= 0.0);
        assert!(rep.max_plain > 0.0);
    }

    #[test]
    fn lp_norm_of_unit_cube_indicator() {
        let f = box_indicator(BoxRegion::new(vec![0.0; 3], vec![1.0; 3]).unwrap());
        let region = BoxRegion::cube(&[0.5; 3], 1.0).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let e = lp_norm(&f, p, &region, 200_000, 2).unwrap();
            assert!(e.agrees_with_value(1.0, 4.0), "p={p}: {e:?}");
        }
        let exact = lp_norm(&f, 2.0, &BoxRegion::new(vec![0.0; 3], vec![1.0; 3]).unwrap(), 100, 2).unwrap();
        assert_eq!(exact.value, 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn maximal_is_monotone_and_dominates(seed in 0u64..1000, x in prop::collection::vec(-0.3f64..0.3, 3),
                                             h in 0.1f64..2.0, extra in 0.0f64..1.0) {
            let f = bump([0.8, 0.4, -0.3], 0.4, h);
            let g = bump([0.8, 0.4, -0.3], 0.4, h + extra);
            let net = RadiiNet::with_step(3, 1.0, 1.3, 0.1).unwrap();
            let p = params(0.2, 64, seed);
            let mf = discretised_maximal(&f, &x, 3, &net, None, &p).unwrap();
            let mg = discretised_maximal(&g, &x, 3, &net, None, &p).unwrap();
            prop_assert!(mf <= mg);
            for i in 0..net.len() {
                prop_assert!(net_point_average(&f, &x, 3, &net, i, None, &p).unwrap() <= mf);
            }
            let sub = net.restrict(|i| i % 2 == 0);
            prop_assert!(discretised_maximal(&f, &x, 3, &sub, None, &p).unwrap() <= mf);
            for k in 0..3 {
                prop_assert!(discretised_maximal(&f, &x, 3, &net, Some(k), &p).unwrap() <= mf);
            }
            prop_assert!(shared_maximal(&f, &x, 3, &net, &p).unwrap().violation <= 0.0);
        }

        #[test]
        fn lp_norm_is_homogeneous(c in 0.1f64..5.0, p in 1.0f64..4.0) {
            let f = bump([0.0; 3], 0.3, 1.0);
            let g = bump([0.0; 3], 0.3, c);
            let region = f.bounding_box().clone();
            let a = lp_norm(&f, p, &region, 4096, 8).unwrap();
            let b = lp_norm(&g, p, &region, 4096, 8).unwrap();
            prop_assert!((b.value - c * a.value).abs() <= 1e-12 * b.value);
        }
    }
}
