use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{AnnulusSpec, AxisFrame, Ellipsoid, Radii, RefinedAnnulusSpec};
use crate::mc::RngStream;

/// Ellipsoids centred at `t_i d_k` with `delta`-separated `t_i in [-1, 1]`
/// and radii in the restricted box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidFamily {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub c_n: f64,
    pub ts: Vec<f64>,
    pub radii: Vec<Radii<f64>>,
}

/// Largest `delta`-separated count in `[-1, 1]`.
pub fn max_family_size(delta: f64) -> usize {
    (2.0 / delta).floor() as usize + 1
}

impl EllipsoidFamily {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn ellipsoid(&self, i: usize) -> Ellipsoid<f64> {
        let frame = AxisFrame::<f64>::new(self.n, self.k).expect("validated on construction");
        Ellipsoid::new(frame.line_point(&self.ts[i]), self.radii[i].clone()).expect("dimensions agree")
    }

    pub fn annulus(&self, i: usize) -> AnnulusSpec<f64> {
        AnnulusSpec::new(self.ellipsoid(i), self.delta).expect("delta validated on construction")
    }

    pub fn refined(&self, i: usize) -> RefinedAnnulusSpec<f64> {
        self.annulus(i).refine(self.k, self.c_n).expect("validated on construction")
    }

    /// Smallest gap between parameters.
    pub fn min_separation(&self) -> f64 {
        let mut t = self.ts.clone();
        t.sort_by(f64::total_cmp);
        t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `count` parameters with gaps `delta + extra`, the total slack split by
/// uniform spacings; at the maximal count the centred lattice is returned.
pub fn generate_family(n: usize, k: usize, delta: f64, count: usize, c_n: f64, seed: u64) -> Result<EllipsoidFamily> {
    AxisFrame::<f64>::new(n, k)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid("delta", format!("{delta} not in (0, 1/2]")));
    }
    if !(c_n > 0.0 && 32.0 * (n as f64).powi(3) * c_n * c_n <= 1.0) {
        return Err(invalid("c_n", format!("{c_n} outside (0, (2n)^(-3/2)/2]")));
    }
    let cap = max_family_size(delta);
    if count == 0 || count > cap {
        return Err(invalid("N", format!("{count} not in [1, {cap}] for delta = {delta}")));
    }
    let mut rng = RngStream::derived(seed, 0x0066_616d, 0);
    let slack = 2.0 - (count - 1) as f64 * delta;
    let ts: Vec<f64> = if count == cap {
        (0..count).map(|i| -1.0 + slack / 2.0 + i as f64 * delta).collect()
    } else {
        let mut cuts: Vec<f64> = (0..count).map(|_| rng.uniform() * slack).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.iter().enumerate().map(|(i, c)| -1.0 + c + i as f64 * delta).collect()
    };
    let hi = 1.0 + c_n * c_n;
    let radii = (0..count)
        .map(|_| Radii::new((0..n).map(|_| rng.uniform_in(1.0, hi)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(EllipsoidFamily {
        n,
        k,
        delta,
        c_n,
        ts,
        radii,
    })
}
