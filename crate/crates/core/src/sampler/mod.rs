//! Random walks and Brownian paths on the spider and their functionals.

pub mod cycles;
pub mod lattice;
pub mod path;

use rayon::prelude::*;

use crate::numerics::rng::{derive_stream, RngStream};

pub use cycles::{
    sample_coupon_count, sample_cover_time, sample_cycle_count, sample_cycle_duration, sample_geometric,
    sample_stable_half, CoverSample, CycleCountVariant, Resolution, Tau1Sampler,
};
pub use lattice::{
    lattice_distribution_by_enumeration, lattice_passage_gf, lattice_step, lattice_transition_probability, lattice_transition_probability_exact,
    lattice_walk, sample_lattice_hitting_time, LatticePoint,
};
pub use path::{
    richardson, sample_bm_path, sample_bm_path_from, sample_first_exit, sample_first_exit_from,
    sample_first_exit_within,
    sample_occupation_fraction, sample_position, FunctionalSample, PathSample,
};

/// Runs `f` on streams `first_id, …, first_id + n − 1` of `master_seed` in
/// parallel. Results come back in stream order, so the output does not
/// depend on scheduling.
pub fn run_replicas<T, F>(master_seed: u64, first_id: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngStream) -> T + Sync + Send,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| f(derive_stream(master_seed, first_id + i)))
        .collect()
}
