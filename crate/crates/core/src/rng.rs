//! Deterministic random streams.
//!
//! Every random quantity in the crate comes from [`SimRng`], a ChaCha8
//! counter-based generator seeded with a 64-bit value. Long streams are cut
//! into fixed-size chunks of [`CHUNK_LEN`] draws; chunk `c` of a stream with
//! seed `s` is generated by `SimRng::seed_from_u64(derive_seed(s, c))`. The
//! output therefore depends only on `(seed, length)` and never on how many
//! worker threads produce the chunks.
//!
//! Seeds for independent sub-streams (sweep points, noise vs. symbols,
//! bootstrap resampling) are derived with [`derive_seed`], a SplitMix64-based
//! splitter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// The generator used for every stream in the crate.
pub type SimRng = ChaCha8Rng;

/// Number of draws per independently seeded chunk.
pub const CHUNK_LEN: usize = 1 << 16;

/// Stream tags used with [`derive_seed`] to separate sub-streams of one seed.
pub mod tags {
    pub const NOISE: u64 = 0x6e6f_6973_6500_0001;
    pub const BOOTSTRAP: u64 = 0x626f_6f74_0000_0002;
    pub const CALIBRATION: u64 = 0x6361_6c69_6200_0003;
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// `n` i.i.d. standard normal draws, chunked as described in the module docs.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out.par_chunks_mut(CHUNK_LEN)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = rng_from_seed(derive_seed(seed, c as u64));
            for v in chunk.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
        });
    out
}
