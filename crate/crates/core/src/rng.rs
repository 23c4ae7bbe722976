//! Counter-based random stream derivation.
//!
//! A [`Seed`] names one replicate: `(master, point, run)`. The ChaCha8 key is
//! the 256-bit SplitMix64 expansion of `(master, point)` and the ChaCha stream
//! id is `run << 4 | role`, so every `(master, point, run, role)` tuple maps
//! to an independent, position-addressable keystream. Nothing is shared
//! between replicates, which keeps results bitwise identical regardless of
//! how runs are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct roles never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    /// Inter-sample spacings.
    Times = 1,
    /// Gaussian process values.
    Values = 2,
    /// Random phases/frequencies of spectral synthesis.
    Spectral = 3,
    /// Anything else a test or demo needs.
    Auxiliary = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed {
    pub master: u64,
    /// Sweep point (or experiment arm) index.
    pub point: u64,
    /// Monte Carlo replicate index; must stay below 2^60.
    pub run: u64,
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Seed {
            master,
            point: 0,
            run: 0,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self::from(master)
    }

    pub fn point(self, point: u64) -> Self {
        Seed { point, ..self }
    }

    pub fn run(self, run: u64) -> Self {
        Seed { run, ..self }
    }

    /// Generator for one role of this replicate.
    pub fn rng(self, role: StreamRole) -> ChaCha8Rng {
        assert!(self.run < (1 << 60), "run index exceeds stream id space");
        let mut state = self.master;
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            if i == 2 {
                state ^= self.point.wrapping_mul(0xD6E8_FEB8_6659_FD93);
            }
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream((self.run << 4) | role as u64);
        rng
    }
}
