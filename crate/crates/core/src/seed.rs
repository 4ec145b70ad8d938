//! Seed derivation for ensemble runs.
//!
//! Every task in an ensemble gets its own RNG seed computed from the master
//! seed, a stream tag and the task's indices, so results do not depend on
//! the order in which a worker pool executes tasks.
//!
//! The mixing function is SplitMix64's finalizer applied in a chain:
//!
//! ```text
//! h0 = mix(master ^ stream)
//! h(k+1) = mix(h(k) ^ mix(index(k) + GOLDEN))
//! ```
//!
//! where `mix` is the 64-bit SplitMix64 output function and
//! `GOLDEN = 0x9E3779B97F4A7C15`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tag for graph-generation seeds (ASCII `"graph"`).
pub const GRAPH_STREAM: u64 = 0x0067_7261_7068;
/// Stream tag for simulation (seed-node selection) seeds (ASCII `"sim"`).
pub const SIM_STREAM: u64 = 0x0073_696d;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a task seed from `master`, a stream tag and task indices.
pub fn derive_seed(master: u64, stream: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(mix64(master ^ stream), |h, &i| mix64(h ^ mix64(i.wrapping_add(GOLDEN))))
}

/// Seed for graph `graph_index` of an ensemble.
pub fn graph_seed(master: u64, graph_index: u64) -> u64 {
    derive_seed(master, GRAPH_STREAM, &[graph_index])
}

/// Seed for simulation `sim_index` on graph `graph_index`.
pub fn sim_seed(master: u64, graph_index: u64, sim_index: u64) -> u64 {
    derive_seed(master, SIM_STREAM, &[graph_index, sim_index])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn mix64_matches_reference_splitmix_output() {
        // First output of the reference SplitMix64 generator seeded with 0.
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn no_collisions_in_a_paper_sized_ensemble() {
        let mut seen = HashSet::new();
        for g in 0..100 {
            assert!(seen.insert(graph_seed(42, g)));
            for s in 0..100 {
                assert!(seen.insert(sim_seed(42, g, s)));
            }
        }
    }

    #[test]
    fn streams_and_masters_are_separated() {
        assert_ne!(graph_seed(1, 0), sim_seed(1, 0, 0));
        assert_ne!(graph_seed(1, 0), graph_seed(2, 0));
        assert_ne!(sim_seed(1, 0, 1), sim_seed(1, 1, 0));
    }
}
