//! Relational structures, homomorphism decision and brute-force answers.

mod answers;
mod search;
mod structure;
mod tddp;

pub use answers::{
    count_answers_bruteforce, enumerate_answers_bruteforce, enumerate_answers_with_limit,
    is_solution, sol_bag, DEFAULT_BRUTE_FORCE_LIMIT,
};
pub use search::{find_homomorphism, hom_exists_bruteforce, is_homomorphism};
pub use structure::{build_a, build_b, complement_symbol, structure_size, Structure};
pub use tddp::{hom_exists_td, nice_decomposition_of, TdPlan};
