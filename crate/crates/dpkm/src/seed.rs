//! Deterministic derivation of per-trial RNG seeds.
//!
//! Reports must be byte-identical across runs, machines, and thread
//! counts, so every trial's generator is derived from the master seed,
//! the trial index, and a role tag — never from a shared stream whose
//! consumption order could vary.  The mixer is fixed here rather than
//! borrowed from the standard library's hasher, whose output is not
//! guaranteed stable across releases.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(hash: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(hash, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix (master seed, role tag, indices) into a 256-bit seed.
pub fn derive_seed(master: u64, tag: &str, indices: &[u64]) -> [u8; 32] {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    h = fnv1a(h, &(tag.len() as u64).to_le_bytes());
    h = fnv1a(h, tag.as_bytes());
    for &idx in indices {
        h = fnv1a(h, &idx.to_le_bytes());
    }
    let mut state = h;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    seed
}

/// A generator seeded by `derive_seed` with the same arguments.
pub fn derive_rng(master: u64, tag: &str, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(master, tag, indices))
}
