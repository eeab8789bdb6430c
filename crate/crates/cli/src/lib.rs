//! Command-line companion to `fracdiff-core`: file formats, result
//! emission, the named equation examples, and the self-test suite. The
//! binary in `main.rs` is a thin dispatcher over these modules.

pub mod checks;
pub mod config;
pub mod emit;
pub mod examples;

/// Seed used by randomized verification when `FRACDIFF_SEED` is unset.
pub const DEFAULT_SEED: u64 = 0xf5eed;

/// Reproducibility seed: `FRACDIFF_SEED` from the environment, or the
/// default.
pub fn seed_from_env() -> u64 {
    std::env::var("FRACDIFF_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}
