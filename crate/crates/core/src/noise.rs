//! Counter-based noise streams.
//!
//! Each `(step, particle, channel)` triple gets its own generator, seeded by
//! hashing the triple together with the run key. A particle's draws therefore
//! do not depend on the order particles are visited, which keeps parallel
//! runs bit-identical to sequential ones.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// Distribution of the standardized exploration noise θ (mean 0, variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// Uniform on `[-√3, √3]`.
    UniformSqrt3,
}

/// Which Brownian motion a draw belongs to.
///
/// The consensus (global best) term always uses `Global`, so schemes that
/// share that term consume identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Global,
    Local,
}

impl Channel {
    fn tag(self) -> u64 {
        match self {
            Channel::Global => 0x6c6f_6261_6c00_0001,
            Channel::Local => 0x6c6f_6361_6c00_0002,
        }
    }
}

/// Source of per-particle random draws.
pub trait NoiseSource: Sync {
    /// Fills `out` with i.i.d. uniform draws on `[0, 1)`.
    fn uniform(&self, step: u64, particle: usize, channel: Channel, out: &mut [f64]);

    /// Fills `out` with i.i.d. standard normal draws.
    fn gaussian(&self, step: u64, particle: usize, channel: Channel, out: &mut [f64]);

    /// Fills `out` with standardized draws of the requested kind.
    fn standardized(
        &self,
        kind: NoiseKind,
        step: u64,
        particle: usize,
        channel: Channel,
        out: &mut [f64],
    ) {
        match kind {
            NoiseKind::Gaussian => self.gaussian(step, particle, channel, out),
            NoiseKind::UniformSqrt3 => {
                self.uniform(step, particle, channel, out);
                for u in out.iter_mut() {
                    *u = uniform_to_sqrt3(*u);
                }
            }
        }
    }
}

/// Maps `u ∈ [0,1)` to `√3 (2u − 1)`.
#[inline]
pub fn uniform_to_sqrt3(u: f64) -> f64 {
    3f64.sqrt() * (2.0 * u - 1.0)
}

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a sequence of words.
pub fn derive_seed(words: &[u64]) -> u64 {
    words.iter().fold(0x5157_4152_4d4b_4954u64, |acc, &w| {
        splitmix64(acc ^ splitmix64(w))
    })
}

/// Noise streams keyed by `(seed, run)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededNoise {
    key: u64,
}

impl SeededNoise {
    pub fn new(seed: u64, run: u64) -> Self {
        Self {
            key: derive_seed(&[seed, run]),
        }
    }

    fn stream(&self, step: u64, particle: usize, channel: Channel) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(&[
            self.key,
            step,
            particle as u64,
            channel.tag(),
        ]))
    }

    /// Generator for initial conditions; independent of every step stream.
    pub fn init_rng(&self) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(&[self.key, u64::MAX, 0x696e_6974]))
    }
}

impl NoiseSource for SeededNoise {
    fn uniform(&self, step: u64, particle: usize, channel: Channel, out: &mut [f64]) {
        let mut rng = self.stream(step, particle, channel);
        for u in out.iter_mut() {
            *u = rng.random::<f64>();
        }
    }

    fn gaussian(&self, step: u64, particle: usize, channel: Channel, out: &mut [f64]) {
        let mut rng = self.stream(step, particle, channel);
        for g in out.iter_mut() {
            *g = rng.sample(StandardNormal);
        }
    }
}

/// Deterministic constant draws, for pinning the random factors in tests and
/// degenerate runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantNoise {
    pub uniform: f64,
    pub gaussian: f64,
}

impl NoiseSource for ConstantNoise {
    fn uniform(&self, _: u64, _: usize, _: Channel, out: &mut [f64]) {
        out.fill(self.uniform);
    }

    fn gaussian(&self, _: u64, _: usize, _: Channel, out: &mut [f64]) {
        out.fill(self.gaussian);
    }
}
