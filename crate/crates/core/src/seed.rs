//! Seed mixing shared by the engines and the sweep harness.

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit seed. Each word is absorbed as
/// `h = splitmix64(h ^ word)`, starting from `splitmix64(len)` so sequences of
/// different lengths start from different states.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(words.len() as u64), |h, &w| splitmix64(h ^ w))
}
