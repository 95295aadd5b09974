//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one manifest seed by
//! mixing in a tag with the SplitMix64 finalizer, so sub-streams are stable
//! regardless of the order in which they are requested.

/// Stream tag for the pilot capture of a scene.
pub const TAG_PILOT: u64 = 0x0070_696c_6f74;
/// Stream tag for the full-resolution captures of a scene.
pub const TAG_CAPTURE: u64 = 0x6361_7074;
/// Stream tag for synthetic scene generation.
pub const TAG_SCENE: u64 = 0x0073_6365_6e65;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a stream `tag`.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Derives the seed of the `index`-th item (e.g. scene) of a tagged stream.
pub fn derive_indexed(seed: u64, tag: u64, index: u64) -> u64 {
    derive(derive(seed, tag), index)
}
