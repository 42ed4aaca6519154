//! Resource caps derived from the `ALGDYN_MEM_CAP_MB` environment variable.

/// Default memory budget in megabytes.
pub const DEFAULT_MEM_CAP_MB: u64 = 2048;

/// Hard cap on the number of terms of an intermediate exact polynomial.
pub const MAX_POLY_TERMS: usize = 200_000;

/// Witness enumeration cap for independence checks.
pub const WITNESS_CAP: usize = 4096;

/// Family cap for packing lower bounds.
pub const PACKING_FAMILY_CAP: usize = 1 << 20;

pub fn memory_cap_bytes() -> u64 {
    std::env::var("ALGDYN_MEM_CAP_MB")
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .filter(|&mb| mb > 0)
        .unwrap_or(DEFAULT_MEM_CAP_MB)
        .saturating_mul(1 << 20)
}

/// Largest torus grid (in points) that fits the memory budget; a grid point
/// costs one complex value plus a scratch copy.
pub fn max_grid_points() -> u128 {
    (memory_cap_bytes() / 32) as u128
}
