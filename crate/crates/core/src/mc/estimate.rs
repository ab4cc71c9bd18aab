use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;

/// Samples per chunk. Fixed so that results do not depend on the number of
/// worker threads.
pub const CHUNK_SIZE: usize = 1 << 16;

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn exact(value: f64, seed: u64) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: 1,
            seed,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
            ..self
        }
    }

    /// Sum of independent estimates; errors add in quadrature.
    pub fn add_independent(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            std_error: self.std_error.hypot(other.std_error),
            n_samples: self.n_samples + other.n_samples,
            seed: self.seed,
        }
    }

    /// `|self - other| <= z * combined error`.
    pub fn agrees_with(&self, other: &Self, z: f64) -> bool {
        (self.value - other.value).abs() <= z * self.std_error.hypot(other.std_error)
    }

    /// `|self - exact| <= z * std_error`.
    pub fn agrees_with_value(&self, exact: f64, z: f64) -> bool {
        (self.value - exact).abs() <= z * self.std_error
    }
}

/// Running mean and centred second moment, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        let wa = self.count as f64 / n;
        let wb = other.count as f64 / n;
        self.mean += d * wb;
        self.m2 += other.m2 + d * d * wa * other.count as f64;
        self.count += other.count;
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        MCEstimate {
            value: self.mean,
            std_error: (self.variance() / self.count.max(1) as f64).sqrt(),
            n_samples: self.count,
            seed,
        }
    }
}

/// Split `m` samples into fixed-size chunks, run `f(rng, len)` on each with
/// its own derived stream, and return the chunk results in chunk order.
pub fn run_chunks<A, F>(m: usize, seed: u64, stream_id: u64, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut RngStream, usize) -> A + Sync,
{
    let chunks = m.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(m - c * CHUNK_SIZE);
            let mut rng = RngStream::derived(seed, stream_id, c as u64);
            f(&mut rng, len)
        })
        .collect()
}

/// Mean of `f` over `m` draws.
pub fn estimate_mean<F>(m: usize, seed: u64, stream_id: u64, f: F) -> MCEstimate
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    estimate_means::<1, _>(m, seed, stream_id, |rng| [f(rng)])[0]
}

/// Means of `K` integrands evaluated on shared draws.
pub fn estimate_means<const K: usize, F>(m: usize, seed: u64, stream_id: u64, f: F) -> [MCEstimate; K]
where
    F: Fn(&mut RngStream) -> [f64; K] + Sync,
{
    let parts = run_chunks(m, seed, stream_id, |rng, len| {
        let mut acc = [Moments::default(); K];
        for _ in 0..len {
            let v = f(rng);
            for (a, x) in acc.iter_mut().zip(v) {
                a.push(x);
            }
        }
        acc
    });
    let mut total = [Moments::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.map(|t| t.estimate(seed))
}

/// Like [`estimate_means`] with a runtime number of integrands; `f` writes
/// into the provided buffer.
pub fn estimate_means_dyn<F>(k: usize, m: usize, seed: u64, stream_id: u64, f: F) -> Vec<MCEstimate>
where
    F: Fn(&mut RngStream, &mut [f64]) + Sync,
{
    let parts = run_chunks(m, seed, stream_id, |rng, len| {
        let mut acc = vec![Moments::default(); k];
        let mut buf = vec![0.0; k];
        for _ in 0..len {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(rng, &mut buf);
            for (a, &x) in acc.iter_mut().zip(&buf) {
                a.push(x);
            }
        }
        acc
    });
    let mut total = vec![Moments::default(); k];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total.into_iter().map(|t| t.estimate(seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(f)
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut seq = Moments::default();
        xs.iter().for_each(|&x| seq.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - seq.mean).abs() < 1e-12);
        assert!((a.variance() - seq.variance()).abs() < 1e-9);
    }

    #[test]
    fn bit_identical_across_thread_counts() {
        let f = |r: &mut RngStream| r.uniform().powi(2);
        let one = with_threads(1, || estimate_mean(300_000, 7, 1, f));
        let four = with_threads(4, || estimate_mean(300_000, 7, 1, f));
        assert_eq!(one.value.to_bits(), four.value.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
    }

    #[test]
    fn estimate_of_known_integral() {
        let e = estimate_mean(400_000, 3, 0, |r| r.uniform().powi(2));
        assert!(e.agrees_with_value(1.0 / 3.0, 4.0));
        assert_eq!(e.n_samples, 400_000);
        let exact = (4.0 / 45.0f64 / 400_000.0).sqrt();
        assert!((e.std_error / exact - 1.0).abs() < 0.02);
    }

    #[test]
    fn std_error_shrinks_like_inverse_root() {
        let f = |r: &mut RngStream| r.uniform().sqrt();
        let small = estimate_mean(50_000, 11, 0, f);
        let large = estimate_mean(800_000, 11, 0, f);
        let ratio = small.std_error / large.std_error;
        assert!((ratio / 4.0 - 1.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn shared_draws_give_consistent_means() {
        let [a, b] = estimate_means(100_000, 5, 0, |r| {
            let u = r.uniform();
            [u, 1.0 - u]
        });
        assert!((a.value + b.value - 1.0).abs() < 1e-12);
        let d = estimate_means_dyn(2, 100_000, 5, 0, |r, out| {
            let u = r.uniform();
            out[0] = u;
            out[1] = 1.0 - u;
        });
        assert_eq!(d[0].value.to_bits(), a.value.to_bits());
    }

    #[test]
    fn combinators() {
        let a = MCEstimate { value: 1.0, std_error: 3.0, n_samples: 10, seed: 0 };
        let b = MCEstimate { value: 2.0, std_error: 4.0, n_samples: 10, seed: 0 };
        let s = a.add_independent(b);
        assert_eq!((s.value, s.std_error), (3.0, 5.0));
        assert_eq!(a.scale(-2.0).std_error, 6.0);
        assert!(a.agrees_with(&b, 1.0));
    }
}
