//! Hard size limits for the dense desk-scale engines.
//!
//! Everything in this crate is exact dense numerics, so each entry point caps
//! its problem size instead of degrading silently. The environment variable
//! `WALK_MAX_DIM` lowers the walk-space caps further (it can never raise
//! them), which is useful to fence off memory-hungry runs in CI.

use std::sync::OnceLock;

/// Largest state count accepted by the exact classical propagation engine.
pub const MAX_PROPAGATION_STATES: usize = 1 << 20;

/// Largest state count for which dense transition matrices are built.
pub const MAX_DENSE_CHAIN_STATES: usize = 4096;

/// Largest chain dimension for the bipartite walk construction; the walk
/// unitary lives on `d²` so this keeps dense walk matrices at or below
/// 4096 × 4096.
pub const MAX_WALK_BASE_STATES: usize = 64;

/// Largest total register dimension for the coin-walk evolution engine
/// (system ⊗ move ⊗ coin). Evolution applies the walk factor by factor, so
/// only vectors of this length are ever allocated.
pub const MAX_COIN_WALK_DIM: usize = 1 << 22;

/// Largest dimension at which a coin-walk unitary may be materialized densely.
pub const MAX_DENSE_UNITARY_DIM: usize = 4096;

/// Largest qubit count for the dense Fourier-transform matrix.
pub const MAX_QFT_QUBITS: usize = 12;

/// Deepest fixed-point recursion level; level `m` costs `3^m` preparer calls.
pub const MAX_PI3_DEPTH: u32 = 12;

/// Inverse temperatures are clamped here; larger values are numerically
/// indistinguishable from the zero-temperature limit at f64 precision.
pub const BETA_CAP: f64 = 1e6;

fn env_walk_max_dim() -> Option<usize> {
    static CACHED: OnceLock<Option<usize>> = OnceLock::new();
    *CACHED.get_or_init(|| {
        std::env::var("WALK_MAX_DIM")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
    })
}

/// Effective cap on the bipartite walk space (`d²`), after `WALK_MAX_DIM`.
pub fn walk_space_cap() -> usize {
    let hard = MAX_WALK_BASE_STATES * MAX_WALK_BASE_STATES;
    match env_walk_max_dim() {
        Some(v) if v < hard => v,
        _ => hard,
    }
}

/// Effective cap on the coin-walk register dimension, after `WALK_MAX_DIM`.
pub fn coin_walk_cap() -> usize {
    match env_walk_max_dim() {
        Some(v) if v < MAX_COIN_WALK_DIM => v,
        _ => MAX_COIN_WALK_DIM,
    }
}
