use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub type VertexSet = BTreeSet<usize>;

/// A finite hypergraph. Edges are distinct non-empty subsets of the vertex
/// set, kept in first-insertion order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Hypergraph {
    vertices: VertexSet,
    edges: Vec<VertexSet>,
}

impl Hypergraph {
    pub fn new(
        vertices: impl IntoIterator<Item = usize>,
        edges: impl IntoIterator<Item = VertexSet>,
    ) -> Result<Self> {
        let vertices: VertexSet = vertices.into_iter().collect();
        let mut out: Vec<VertexSet> = Vec::new();
        for e in edges {
            if e.is_empty() {
                return Err(Error::InvalidParameter("hyperedges must be non-empty".into()));
            }
            if let Some(v) = e.iter().find(|v| !vertices.contains(v)) {
                return Err(Error::InvalidParameter(format!(
                    "hyperedge mentions vertex {v} outside the vertex set"
                )));
            }
            if !out.contains(&e) {
                out.push(e);
            }
        }
        Ok(Hypergraph {
            vertices,
            edges: out,
        })
    }

    /// A graph as a 2-uniform hypergraph on `0..n`.
    pub fn from_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            0..n,
            edges.iter().map(|&(a, b)| [a, b].into_iter().collect::<VertexSet>()),
        )
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[VertexSet] {
        &self.edges
    }

    /// Maximum edge size (0 without edges).
    pub fn arity(&self) -> usize {
        self.edges.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Vertex list and, for each position, the bitmask of its neighbours in
    /// the primal graph. Only meaningful for at most 64 vertices.
    pub(crate) fn primal_masks(&self) -> (Vec<usize>, Vec<u64>) {
        let verts: Vec<usize> = self.vertices.iter().copied().collect();
        assert!(verts.len() <= 64, "bitmask view supports at most 64 vertices");
        let pos = |v: &usize| verts.binary_search(v).expect("edge vertex in vertex set");
        let mut adj = vec![0u64; verts.len()];
        for e in &self.edges {
            let idx: Vec<usize> = e.iter().map(pos).collect();
            for &a in &idx {
                for &b in &idx {
                    if a != b {
                        adj[a] |= 1 << b;
                    }
                }
            }
        }
        (verts, adj)
    }
}

/// H[X]: vertex set X and edges `e ∩ X` for every edge meeting X.
pub fn induced_hypergraph(h: &Hypergraph, x: &VertexSet) -> Hypergraph {
    let vertices: VertexSet = x.iter().copied().filter(|v| h.vertices.contains(v)).collect();
    let edges = h
        .edges
        .iter()
        .map(|e| e.intersection(&vertices).copied().collect::<VertexSet>())
        .filter(|e| !e.is_empty());
    Hypergraph::new(vertices.clone(), edges).expect("restricted edges stay inside X")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn induced_identity_and_empty() {
        let h = Hypergraph::from_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(induced_hypergraph(&h, h.vertices()), h);
        let empty = induced_hypergraph(&h, &VertexSet::new());
        assert_eq!(empty.num_vertices(), 0);
        assert!(empty.edges().is_empty());
    }

    #[test]
    fn induced_triangle_on_two_vertices() {
        let h = Hypergraph::from_graph(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let sub = induced_hypergraph(&h, &set(&[0, 1]));
        let edges: BTreeSet<VertexSet> = sub.edges().iter().cloned().collect();
        let expected: BTreeSet<VertexSet> = [set(&[0, 1]), set(&[0]), set(&[1])].into_iter().collect();
        assert_eq!(edges, expected);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Hypergraph::new(0..2, [set(&[])]).is_err());
        assert!(Hypergraph::new(0..2, [set(&[3])]).is_err());
    }
}
