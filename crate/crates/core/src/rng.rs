//! Counter-based normal variates.
//!
//! Every draw is a pure function of a `(stream, path, channel, counter)` key:
//! the first three words seed a ChaCha8 keystream and the counter selects a
//! fixed 128-bit block of it. Two uniforms per block feed one Box-Muller
//! normal. Paths can therefore be generated in any order, on any thread, and
//! comparisons across scenarios can reuse the exact same noise.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Words of keystream consumed per normal variate (two `u64`).
const WORDS_PER_DRAW: u128 = 4;

/// Identifies one independent noise sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub stream: u64,
    pub path: u64,
    pub channel: u64,
}

impl StreamKey {
    pub fn new(stream: u64, path: u64, channel: u64) -> Self {
        Self {
            stream,
            path,
            channel,
        }
    }

    fn seed(&self) -> [u8; 32] {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.stream.to_le_bytes());
        seed[8..16].copy_from_slice(&self.path.to_le_bytes());
        seed[16..24].copy_from_slice(&self.channel.to_le_bytes());
        seed[24..].copy_from_slice(b"sdechan\x01");
        seed
    }
}

/// Sequential reader over the normals of one key: the `k`-th call to
/// [`NormalStream::next_normal`] returns `normal_at(key, k)`.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(key: StreamKey) -> Self {
        Self {
            rng: ChaCha8Rng::from_seed(key.seed()),
        }
    }

    /// Positions the stream so the next draw has the given counter.
    pub fn seek(&mut self, counter: u64) {
        self.rng.set_word_pos(counter as u128 * WORDS_PER_DRAW);
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        box_muller(a, b)
    }
}

/// Random access to the standard normal with the given key and counter.
pub fn normal_at(key: StreamKey, counter: u64) -> f64 {
    let mut s = NormalStream::new(key);
    s.seek(counter);
    s.next_normal()
}

#[inline]
fn box_muller(a: u64, b: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform generator for non-channel randomness (traffic draws, restarts).
pub fn seeded_rng(seed: u64, domain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(domain);
    rng
}
