//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by the
//! master seed, the work-unit index (realization or trial) and a role. The
//! key depends on `(seed, role)` and the 64-bit ChaCha stream id is the
//! index, so adding a role or reordering work units never perturbs other
//! draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamRole {
    Geometry = 1,
    Activity = 2,
    Bands = 3,
    Shadowing = 4,
    Offset = 5,
    Measurement = 6,
    Bpp = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, index, role)`.
pub fn stream(seed: u64, index: u64, role: StreamRole) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ (role as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
