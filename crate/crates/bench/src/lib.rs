//! Fixed inputs shared by the benchmarks.

use hkz_core::experiments::random_gram;
use hkz_core::GramMatrix;

pub const SEED: u64 = 2024;
pub const ENTRY_BOUND: i64 = 10;

/// `count` random Gram matrices of rank `rank`, the same on every run.
pub fn fixtures(rank: usize, count: usize) -> Vec<GramMatrix> {
    (0..count as u64)
        .map(|i| random_gram(rank, SEED + i, ENTRY_BOUND).expect("generator"))
        .collect()
}
