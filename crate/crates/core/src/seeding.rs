use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags so that independent random streams never share a seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Stream {
    Allocation = 1,
    PositionError = 2,
    Randomization = 3,
    ScaStart = 4,
    Trial = 5,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for item `index` of stream `tag` under a master seed.
pub(crate) fn derive_seed(seed: u64, tag: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag as u64)) ^ index)
}

pub(crate) fn rng(seed: u64, tag: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}
