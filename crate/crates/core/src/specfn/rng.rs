use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Seeded, stream-indexed random source.
///
/// Built on ChaCha8: the same `(seed, stream_id)` reproduces the exact
/// sample sequence, and distinct stream ids select disjoint keystreams, so
/// per-worker streams are independent without coordination. Instances are
/// owned by one worker each and never shared.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One N(0, 1) draw.
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// One draw from the noncentral chi-square distribution with `dof` degrees
/// of freedom and noncentrality `lambda`.
///
/// Uses the exact split chi2_dof(lambda) = chi2_(dof-1)(0) + (Z + sqrt(lambda))^2,
/// so the cost is O(1) in `dof` (the central part is a single Gamma draw).
pub fn sample_noncentral_chisq(dof: u64, lambda: f64, rng: &mut RngStream) -> f64 {
    assert!(dof >= 1, "dof must be >= 1");
    assert!(lambda >= 0.0, "lambda must be >= 0");
    let z = rng.standard_normal() + lambda.sqrt();
    let central = if dof > 1 {
        Gamma::new((dof - 1) as f64 / 2.0, 2.0)
            .expect("valid gamma parameters")
            .sample(rng)
    } else {
        0.0
    };
    central + z * z
}
