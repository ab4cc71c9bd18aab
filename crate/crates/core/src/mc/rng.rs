use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8, a keyed permutation of a block counter: the `i`-th
/// output is a pure function of `(seed, stream_id, i)`, so any number of
/// streams can be consumed concurrently without shared state.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { inner }
    }

    /// Sub-stream for work item `index` of stream `stream_id`.
    pub fn derived(seed: u64, stream_id: u64, index: u64) -> Self {
        Self::new(seed, derive_stream_id(stream_id, index))
    }

    /// Jump so the next [`uniform`](Self::uniform) returns the `index`-th
    /// uniform of the stream.
    pub fn seek(&mut self, index: u64) {
        self.inner.set_word_pos(u128::from(index) * 2);
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform point on the unit sphere `S^{n-1}`, written into `out`.
    pub fn unit_vector_into(&mut self, out: &mut [f64]) {
        loop {
            let mut s = 0.0;
            for v in out.iter_mut() {
                *v = self.normal();
                s += *v * *v;
            }
            if s > 1e-300 {
                let inv = 1.0 / s.sqrt();
                out.iter_mut().for_each(|v| *v *= inv);
                return;
            }
        }
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.unit_vector_into(&mut v);
        v
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream id for work item `index` under `stream_id`.
pub fn derive_stream_id(stream_id: u64, index: u64) -> u64 {
    mix64(mix64(stream_id) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}
