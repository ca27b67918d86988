//! Upper bounds and exact values of signed twin-width.

pub mod cliquewidth;
pub mod exact;
pub mod greedy;
pub mod subdivision;

pub use cliquewidth::{cw_to_sequence, random_expression, CwExpr};
pub use exact::{exact_tww_bruteforce, BRUTEFORCE_LIMIT};
pub use greedy::{greedy_sequence, greedy_sequence_with, TieBreak};
pub use subdivision::{check_subdivided_clique, recover_branch_vertices, subdivided_clique_sequence};
