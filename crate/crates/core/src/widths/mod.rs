//! Hypergraphs, tree decompositions and width measures.

mod decomposition;
mod fractional;
mod hypergraph;
mod lp;
mod treewidth;

pub use decomposition::{
    covered_vertices, is_nice, is_valid_td, make_nice, nice_kind, td_width, NiceKind, TdNode,
    TreeDecomposition,
};
pub use fractional::{
    check_independent, fhw_exact_small, fhw_exact_small_with_limit, fhw_of_td,
    fractional_edge_cover_number, max_fractional_independent_set, mu_width, mu_width_with_limit,
    FractionalWeights, DEFAULT_FHW_LIMIT, DEFAULT_MU_WIDTH_LIMIT,
};
pub use hypergraph::{induced_hypergraph, Hypergraph, VertexSet};
pub use lp::{Constraint, LinearProgram, LpOutcome, Sense};
pub use treewidth::{
    elimination_neighbourhood, min_fill_order, treewidth_exact, treewidth_exact_with_limit,
    treewidth_heuristic, DEFAULT_TREEWIDTH_LIMIT,
};
