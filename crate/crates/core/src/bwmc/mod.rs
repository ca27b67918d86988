//! Bounded-ones weighted model counting by dynamic programming over a
//! bipartite contraction sequence of the signed incidence graph.

pub mod engine;
pub mod profile;

pub use num_bigint::BigUint;

pub use engine::{base_record, solve_bwmc, solve_bwmc_traced, solve_bwmc_with, BwmcOutcome, LevelStats, MAX_REGION};
pub use profile::{
    enumerate_red_connected, estimate_bounds, profile_realized_by, realizes, red_connected_containing,
    ComplexityEstimate, Entries, Profile, ProfileKey, Record,
};
