use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::Rational;

use super::decomposition::TreeDecomposition;
use super::hypergraph::{induced_hypergraph, Hypergraph, VertexSet};
use super::lp::{LinearProgram, LpOutcome, Sense};
use super::treewidth::{decomposition_from_order, optimal_elimination};

pub const DEFAULT_FHW_LIMIT: usize = 8;
pub const DEFAULT_MU_WIDTH_LIMIT: usize = 8;

/// Non-negative rational weights keyed by edge index or by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FractionalWeights(pub BTreeMap<usize, Rational>);

impl FractionalWeights {
    pub fn get(&self, key: usize) -> Rational {
        self.0.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.0.values().sum()
    }

    pub fn uniform(keys: impl IntoIterator<Item = usize>, w: Rational) -> Self {
        FractionalWeights(keys.into_iter().map(|k| (k, w.clone())).collect())
    }
}

/// ρ*(h) and an optimal fractional edge cover (keyed by edge index).
pub fn fractional_edge_cover_number(h: &Hypergraph) -> Result<(Rational, FractionalWeights)> {
    let edges = h.edges();
    for &v in h.vertices() {
        if !edges.iter().any(|e| e.contains(&v)) {
            return Err(Error::UncoverableVertex(v));
        }
    }
    if h.num_vertices() == 0 {
        return Ok((Rational::zero(), FractionalWeights::default()));
    }
    let m = edges.len();
    let mut lp = LinearProgram::new(vec![Rational::one(); m]);
    for &v in h.vertices() {
        let row = edges
            .iter()
            .map(|e| if e.contains(&v) { Rational::one() } else { Rational::zero() })
            .collect();
        lp.constrain(row, Sense::Ge, Rational::one());
    }
    for i in 0..m {
        let mut row = vec![Rational::zero(); m];
        row[i] = Rational::one();
        lp.constrain(row, Sense::Le, Rational::one());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, solution } => Ok((
            value,
            FractionalWeights(
                solution
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .collect(),
            ),
        )),
        other => unreachable!("edge cover LP of a coverable hypergraph is bounded and feasible: {other:?}"),
    }
}

/// The LP dual of the edge cover problem: the maximum total weight of a
/// fractional independent set (`Σ_{v∈e} μ(v) ≤ 1` per edge) over the
/// vertices covered by some edge.
pub fn max_fractional_independent_set(h: &Hypergraph) -> (Rational, FractionalWeights) {
    let verts: Vec<usize> = h
        .vertices()
        .iter()
        .copied()
        .filter(|v| h.edges().iter().any(|e| e.contains(v)))
        .collect();
    if verts.is_empty() {
        return (Rational::zero(), FractionalWeights::default());
    }
    let mut lp = LinearProgram::new(vec![-Rational::one(); verts.len()]);
    for e in h.edges() {
        let row = verts
            .iter()
            .map(|v| if e.contains(v) { Rational::one() } else { Rational::zero() })
            .collect();
        lp.constrain(row, Sense::Le, Rational::one());
    }
    match lp.solve() {
        LpOutcome::Optimal { value, solution } => (
            -value,
            FractionalWeights(
                verts
                    .iter()
                    .copied()
                    .zip(solution)
                    .filter(|(_, w)| !w.is_zero())
                    .collect(),
            ),
        ),
        other => unreachable!("packing LP is feasible at 0 and bounded: {other:?}"),
    }
}

/// Fractional hypertreewidth of a given decomposition: the largest ρ* of a
/// bag-induced hypergraph (empty bags count 0).
pub fn fhw_of_td(h: &Hypergraph, td: &TreeDecomposition) -> Result<Rational> {
    let mut cache: HashMap<VertexSet, Rational> = HashMap::new();
    let mut best = Rational::zero();
    for node in td.nodes() {
        let rho = match cache.get(&node.bag) {
            Some(r) => r.clone(),
            None => {
                let r = fractional_edge_cover_number(&induced_hypergraph(h, &node.bag))?.0;
                cache.insert(node.bag.clone(), r.clone());
                r
            }
        };
        if rho > best {
            best = rho;
        }
    }
    Ok(best)
}

fn mask_to_set(verts: &[usize], mask: u64) -> VertexSet {
    (0..verts.len())
        .filter(|&i| mask >> i & 1 == 1)
        .map(|i| verts[i])
        .collect()
}

fn check_limit(h: &Hypergraph, limit: usize, what: &'static str) -> Result<()> {
    if h.num_vertices() > limit.min(30) {
        return Err(Error::LimitExceeded {
            what,
            value: h.num_vertices() as u128,
            limit: limit as u128,
        });
    }
    Ok(())
}

/// Exact fractional hypertreewidth by minimising over elimination orders.
/// Since ρ* of induced hypergraphs is monotone under bag inclusion, some
/// optimal decomposition arises from an elimination order.
pub fn fhw_exact_small_with_limit(h: &Hypergraph, limit: usize) -> Result<(Rational, TreeDecomposition)> {
    check_limit(h, limit, "exact fhw vertex")?;
    let (verts, adj) = h.primal_masks();
    let found = optimal_elimination(&adj, |bag| {
        Ok(fractional_edge_cover_number(&induced_hypergraph(h, &mask_to_set(&verts, bag)))?.0)
    })?;
    match found {
        None => Ok((Rational::zero(), TreeDecomposition::with_root(VertexSet::new()))),
        Some((w, order)) => Ok((w, decomposition_from_order(&verts, &adj, &order))),
    }
}

pub fn fhw_exact_small(h: &Hypergraph) -> Result<(Rational, TreeDecomposition)> {
    fhw_exact_small_with_limit(h, DEFAULT_FHW_LIMIT)
}

/// Checks `μ(v) ∈ [0, 1]` and `Σ_{v∈e} μ(v) ≤ 1` for every edge.
pub fn check_independent(h: &Hypergraph, mu: &FractionalWeights) -> Result<()> {
    for (&v, w) in &mu.0 {
        if !h.vertices().contains(&v) {
            return Err(Error::NotIndependent(format!("vertex {v} is not in the hypergraph")));
        }
        if w.is_negative() || *w > Rational::one() {
            return Err(Error::NotIndependent(format!("weight of vertex {v} outside [0, 1]")));
        }
    }
    for (i, e) in h.edges().iter().enumerate() {
        let mass: Rational = e.iter().map(|&v| mu.get(v)).sum();
        if mass > Rational::one() {
            return Err(Error::NotIndependent(format!("edge {i} carries mass {mass}")));
        }
    }
    Ok(())
}

/// μ-width: the least, over all tree decompositions, of the largest bag
/// μ-mass. A lower bound on adaptive width for this μ.
pub fn mu_width_with_limit(h: &Hypergraph, mu: &FractionalWeights, limit: usize) -> Result<Rational> {
    check_independent(h, mu)?;
    check_limit(h, limit, "mu-width vertex")?;
    let (verts, adj) = h.primal_masks();
    let found = optimal_elimination(&adj, |bag| {
        Ok(mask_to_set(&verts, bag).iter().map(|&v| mu.get(v)).sum::<Rational>())
    })?;
    Ok(found.map_or_else(Rational::zero, |(w, _)| w))
}

pub fn mu_width(h: &Hypergraph, mu: &FractionalWeights) -> Result<Rational> {
    mu_width_with_limit(h, mu, DEFAULT_MU_WIDTH_LIMIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widths::{is_valid_td, make_nice};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn clique(n: usize) -> Hypergraph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Hypergraph::from_graph(n, &edges).unwrap()
    }

    #[test]
    fn rho_star_small_cases() {
        let edge = Hypergraph::from_graph(2, &[(0, 1)]).unwrap();
        assert_eq!(fractional_edge_cover_number(&edge).unwrap().0, r(1, 1));
        let (rho, gamma) = fractional_edge_cover_number(&clique(3)).unwrap();
        assert_eq!(rho, r(3, 2));
        assert_eq!(gamma.total(), r(3, 2));
        assert_eq!(fractional_edge_cover_number(&clique(4)).unwrap().0, r(2, 1));
    }

    #[test]
    fn uncoverable_vertex() {
        let h = Hypergraph::from_graph(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            fractional_edge_cover_number(&h),
            Err(Error::UncoverableVertex(2))
        ));
    }

    #[test]
    fn dual_matches_primal_on_cliques() {
        for n in 2..6 {
            let h = clique(n);
            assert_eq!(
                fractional_edge_cover_number(&h).unwrap().0,
                max_fractional_independent_set(&h).0
            );
        }
    }

    #[test]
    fn fhw_cases() {
        let edge = Hypergraph::from_graph(2, &[(0, 1)]).unwrap();
        assert_eq!(fhw_exact_small(&edge).unwrap().0, r(1, 1));
        let tri = clique(3);
        let (w, td) = fhw_exact_small(&tri).unwrap();
        assert_eq!(w, r(3, 2));
        assert!(is_valid_td(&tri, &td));
        assert_eq!(fhw_of_td(&tri, &td).unwrap(), r(3, 2));
        assert_eq!(
            fhw_of_td(&tri, &TreeDecomposition::with_root([0, 1, 2].into_iter().collect())).unwrap(),
            r(3, 2)
        );
        // acyclic: R(a,b,c), S(c,d), T(d,e)
        let set = |v: &[usize]| v.iter().copied().collect::<VertexSet>();
        let acyclic = Hypergraph::new(0..5, [set(&[0, 1, 2]), set(&[2, 3]), set(&[3, 4])]).unwrap();
        assert_eq!(fhw_exact_small(&acyclic).unwrap().0, r(1, 1));
    }

    #[test]
    fn nice_version_does_not_increase_fhw() {
        let tri = clique(3);
        let td = TreeDecomposition::with_root([0, 1, 2].into_iter().collect());
        let nice = make_nice(&tri, &td).unwrap();
        assert!(fhw_of_td(&tri, &nice).unwrap() <= fhw_of_td(&tri, &td).unwrap());
    }

    #[test]
    fn mu_width_cases() {
        let tri = clique(3);
        let zero = FractionalWeights::uniform(0..3, r(0, 1));
        assert_eq!(mu_width(&tri, &zero).unwrap(), r(0, 1));
        let edge = Hypergraph::from_graph(2, &[(0, 1)]).unwrap();
        let half = FractionalWeights::uniform(0..2, r(1, 2));
        assert_eq!(mu_width(&edge, &half).unwrap(), r(1, 1));
        let half3 = FractionalWeights::uniform(0..3, r(1, 2));
        assert_eq!(mu_width(&tri, &half3).unwrap(), r(3, 2));
        let heavy = FractionalWeights::uniform(0..3, r(2, 3));
        assert!(matches!(mu_width(&tri, &heavy), Err(Error::NotIndependent(_))));
    }
}
