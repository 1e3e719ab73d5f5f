//! Tree automata, their construction from nice tree decompositions, and
//! exact counting of accepted trees of a given size.

mod construct;
mod tree;

pub use construct::{
    build_automaton, build_automaton_with_limits, count_answers_fhw_pipeline,
    count_answers_fhw_pipeline_with_limits, AutomatonLimits, DecompositionAutomaton, FhwPipelineReport,
    DEFAULT_MAX_BAG_SOLUTIONS,
};
pub use tree::{
    accepts, approx_count_slice, count_slice_enumerative, count_slice_exact, count_slice_exact_with_limit,
    LabeledTree, Successors, Transition, TreeAutomaton, DEFAULT_MAX_REACHABLE_SETS,
};
