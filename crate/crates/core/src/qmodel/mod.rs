//! Queries, databases, their text formats and instance generators.

mod database;
mod generate;
mod parse;
mod query;

use std::collections::BTreeSet;

pub use database::{database_size, validate_pair, Database, Value};
pub use generate::{gen_hampath, gen_li_hom, gen_random, Graph, RandomParams};
pub use parse::parse_query;
pub use query::{normalize_equalities, query_size, Atom, MergeMap, Query, QueryBuilder};

use crate::widths::Hypergraph;

/// H(φ): one vertex per variable and one hyperedge per predicate and per
/// negated predicate. Disequalities contribute no hyperedges; repeated
/// variables collapse (`E(x,x)` yields the edge `{x}`).
pub fn build_hypergraph(q: &Query) -> Hypergraph {
    let vertices: BTreeSet<usize> = (0..q.num_vars()).collect();
    let edges = q.relational_atoms().map(|a| a.var_set());
    Hypergraph::new(vertices, edges).expect("atom variables are query variables")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_sets(h: &Hypergraph) -> Vec<Vec<usize>> {
        h.edges().iter().map(|e| e.iter().copied().collect()).collect()
    }

    #[test]
    fn disequalities_add_no_edges() {
        let q = parse_query("phi(x,y) :- E(x,y), x != y").unwrap();
        let h = build_hypergraph(&q);
        assert_eq!(h.num_vertices(), 2);
        assert_eq!(edge_sets(&h), vec![vec![0, 1]]);
    }

    #[test]
    fn negated_predicates_add_edges() {
        let q = parse_query("phi(x) :- E(x,y), !R(y,z)").unwrap();
        assert_eq!(edge_sets(&build_hypergraph(&q)), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn repeated_variable_gives_smaller_edge() {
        let q = parse_query("phi(x) :- E(x,x)").unwrap();
        assert_eq!(edge_sets(&build_hypergraph(&q)), vec![vec![0]]);
        assert_eq!(q.atoms_with_repeated_vars().len(), 1);
    }
}
