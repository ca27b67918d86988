//! Signed twin-width of CNF formulas and bounded-ones weighted model counting
//! along bipartite contraction sequences.

pub mod bipartize;
pub mod bounds;
pub mod bwmc;
pub mod cnf;
pub mod encoder;
pub mod error;
pub mod generators;
pub mod oracle;
pub mod sequence;
pub mod solver;
pub mod trigraph;

pub use bwmc::solve_bwmc;
pub use cnf::{Formula, Lit, Weight, WeightFunction};
pub use sequence::{verify, ContractionSequence};
pub use trigraph::{incidence_graph, EdgeKind, Side, SignedTrigraph, VertexId};
