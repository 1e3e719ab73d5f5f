use std::collections::HashMap;

use crate::error::{Error, Result};

use super::decomposition::TreeDecomposition;
use super::hypergraph::{Hypergraph, VertexSet};

pub const DEFAULT_TREEWIDTH_LIMIT: usize = 16;

/// Vertices outside `eliminated ∪ {v}` reachable from `v` through paths
/// whose interior lies in `eliminated`: the neighbourhood of `v` at the
/// moment it is eliminated after `eliminated`.
pub fn elimination_neighbourhood(adj: &[u64], eliminated: u64, v: usize) -> u64 {
    let mut seen = 1u64 << v;
    let mut frontier = adj[v];
    let mut result = 0u64;
    while frontier & !seen != 0 {
        let next = frontier & !seen;
        seen |= next;
        result |= next & !eliminated;
        let mut inner = next & eliminated;
        let mut grow = 0u64;
        while inner != 0 {
            let w = inner.trailing_zeros() as usize;
            inner &= inner - 1;
            grow |= adj[w];
        }
        frontier = grow;
    }
    result
}

/// Minimises `max_v cost(bag_v)` over all elimination orders, where `bag_v`
/// is `v` plus its neighbourhood when eliminated. `cost` must be monotone
/// under bag inclusion. Returns `None` for an empty vertex set.
pub(crate) fn optimal_elimination<T, F>(adj: &[u64], mut cost: F) -> Result<Option<(T, Vec<usize>)>>
where
    T: Ord + Clone,
    F: FnMut(u64) -> Result<T>,
{
    let n = adj.len();
    if n == 0 {
        return Ok(None);
    }
    assert!(n < 32, "subset dynamic program needs fewer than 32 vertices");
    let full: u64 = (1u64 << n) - 1;
    let mut cost_cache: HashMap<u64, T> = HashMap::new();
    let mut cost_of = |bag: u64| -> Result<T> {
        if let Some(c) = cost_cache.get(&bag) {
            return Ok(c.clone());
        }
        let c = cost(bag)?;
        cost_cache.insert(bag, c.clone());
        Ok(c)
    };
    // best[S] = optimal value when exactly S is eliminated first; None = empty prefix
    let size = 1usize << n;
    let mut best: Vec<Option<T>> = vec![None; size];
    let mut last: Vec<u8> = vec![0; size];
    for s in 1..size as u64 {
        let mut chosen: Option<(T, usize)> = None;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1u64 << v);
            let bag = (1u64 << v) | elimination_neighbourhood(adj, prev, v);
            let here = cost_of(bag)?;
            let val = match &best[prev as usize] {
                Some(p) if *p > here => p.clone(),
                _ => here,
            };
            if chosen.as_ref().is_none_or(|(c, _)| val < *c) {
                chosen = Some((val, v));
            }
        }
        let (val, v) = chosen.expect("non-empty subset");
        best[s as usize] = Some(val);
        last[s as usize] = v as u8;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = last[s as usize] as usize;
        order.push(v);
        s &= !(1u64 << v);
    }
    order.reverse();
    Ok(Some((best[full as usize].clone().expect("full set"), order)))
}

/// Tree decomposition induced by eliminating `order` (positions into
/// `verts`) on the primal graph `adj`.
pub(crate) fn decomposition_from_order(verts: &[usize], adj: &[u64], order: &[usize]) -> TreeDecomposition {
    let n = verts.len();
    if n == 0 {
        return TreeDecomposition::with_root(VertexSet::new());
    }
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut g: Vec<u64> = adj.to_vec();
    let mut bags: Vec<u64> = vec![0; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut alive: u64 = (1u64 << n) - 1;
    for &v in order {
        let nb = g[v] & alive & !(1u64 << v);
        bags[v] = nb | (1u64 << v);
        let mut rest = nb;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            g[a] |= nb & !(1u64 << a);
        }
        alive &= !(1u64 << v);
        let mut best: Option<usize> = None;
        let mut rest = nb;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if best.is_none_or(|b| rank[a] < rank[b]) {
                best = Some(a);
            }
        }
        parent[v] = best;
    }
    let to_set = |mask: u64| -> VertexSet {
        (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| verts[i]).collect()
    };
    let root_v = *order.last().expect("non-empty order");
    let mut td = TreeDecomposition::with_root(to_set(bags[root_v]));
    let mut node_of = vec![usize::MAX; n];
    node_of[root_v] = td.root();
    for &v in order.iter().rev().skip(1) {
        // parents are eliminated later, so they already have nodes;
        // component roots hang below the overall root
        let p = parent[v].map_or(td.root(), |p| node_of[p]);
        node_of[v] = td.add_child(p, to_set(bags[v]));
    }
    td
}

/// Exact treewidth over elimination orders, for at most `limit` vertices.
pub fn treewidth_exact_with_limit(h: &Hypergraph, limit: usize) -> Result<(i64, TreeDecomposition)> {
    if h.num_vertices() > limit.min(30) {
        return Err(Error::LimitExceeded {
            what: "exact treewidth vertex",
            value: h.num_vertices() as u128,
            limit: limit as u128,
        });
    }
    let (verts, adj) = h.primal_masks();
    match optimal_elimination(&adj, |bag| Ok(bag.count_ones() as i64 - 1))? {
        None => Ok((-1, TreeDecomposition::with_root(VertexSet::new()))),
        Some((w, order)) => Ok((w, decomposition_from_order(&verts, &adj, &order))),
    }
}

/// Exact treewidth with the default vertex limit; use
/// [`treewidth_heuristic`] for larger hypergraphs.
pub fn treewidth_exact(h: &Hypergraph) -> Result<(i64, TreeDecomposition)> {
    treewidth_exact_with_limit(h, DEFAULT_TREEWIDTH_LIMIT)
}

/// Min-fill elimination ordering (ties: fewer neighbours, then lower vertex).
pub fn min_fill_order(h: &Hypergraph) -> Vec<usize> {
    let (_, adj) = h.primal_masks();
    let n = adj.len();
    let mut g = adj.clone();
    let mut alive: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut order = Vec::with_capacity(n);
    while alive != 0 {
        let mut best: Option<(usize, u32, usize)> = None;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let nb = g[v] & alive;
            let mut fill = 0usize;
            let mut it = nb;
            while it != 0 {
                let a = it.trailing_zeros() as usize;
                it &= it - 1;
                fill += (nb & !g[a] & !(1u64 << a)).count_ones() as usize;
            }
            let key = (fill / 2, nb.count_ones(), v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let v = best.expect("alive vertex").2;
        let nb = g[v] & alive;
        let mut it = nb;
        while it != 0 {
            let a = it.trailing_zeros() as usize;
            it &= it - 1;
            g[a] |= nb & !(1u64 << a);
        }
        alive &= !(1u64 << v);
        order.push(v);
    }
    order
}

/// Decomposition from a min-fill elimination ordering.
pub fn treewidth_heuristic(h: &Hypergraph) -> TreeDecomposition {
    let (verts, adj) = h.primal_masks();
    let order = min_fill_order(h);
    decomposition_from_order(&verts, &adj, &order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::widths::{is_valid_td, td_width};

    fn grid(k: usize) -> Hypergraph {
        let mut edges = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let v = r * k + c;
                if c + 1 < k {
                    edges.push((v, v + 1));
                }
                if r + 1 < k {
                    edges.push((v, v + k));
                }
            }
        }
        Hypergraph::from_graph(k * k, &edges).unwrap()
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

    /// Width of one elimination order, computed by explicit fill-in.
    fn order_width(n: usize, edges: &[(usize, usize)], order: &[usize]) -> usize {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let mut gone = vec![false; n];
        let mut width = 0;
        for &v in order {
            let nb: Vec<usize> = (0..n).filter(|&u| !gone[u] && adj[v][u]).collect();
            width = width.max(nb.len());
            for &a in &nb {
                for &b in &nb {
                    if a != b {
                        adj[a][b] = true;
                    }
                }
            }
            gone[v] = true;
        }
        width
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for v in 0..used.len() {
                if !used[v] {
                    used[v] = true;
                    cur.push(v);
                    rec(cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    #[test]
    fn path_and_triangle() {
        let path = Hypergraph::from_graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let (w, td) = treewidth_exact(&path).unwrap();
        assert_eq!(w, 1);
        assert!(is_valid_td(&path, &td));
        assert_eq!(td_width(&td), 1);
        assert_eq!(treewidth_exact(&clique(3)).unwrap().0, 2);
    }

    #[test]
    fn grid_3x3_matches_brute_force_over_orders() {
        let h = grid(3);
        let edges: Vec<(usize, usize)> = h
            .edges()
            .iter()
            .map(|e| {
                let v: Vec<usize> = e.iter().copied().collect();
                (v[0], v[1])
            })
            .collect();
        let brute = permutations(9)
            .iter()
            .map(|o| order_width(9, &edges, o))
            .min()
            .unwrap();
        assert_eq!(brute, 3);
        let (w, td) = treewidth_exact(&h).unwrap();
        assert_eq!(w, brute as i64);
        assert!(is_valid_td(&h, &td));
    }

    #[test]
    fn heuristic_on_tree_and_clique() {
        let star = Hypergraph::from_graph(6, &[(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)]).unwrap();
        let td = treewidth_heuristic(&star);
        assert!(is_valid_td(&star, &td));
        assert_eq!(td_width(&td), treewidth_exact(&star).unwrap().0);
        assert_eq!(td_width(&td), 1);
        let k5 = clique(5);
        assert_eq!(td_width(&treewidth_heuristic(&k5)), 4);
        assert_eq!(treewidth_exact(&k5).unwrap().0, 4);
    }

    #[test]
    fn empty_hypergraph() {
        let h = Hypergraph::default();
        let td = treewidth_heuristic(&h);
        assert_eq!(td.len(), 1);
        assert!(td.bag(0).is_empty());
        assert_eq!(treewidth_exact(&h).unwrap().0, -1);
    }

    #[test]
    fn limit_exceeded() {
        let h = grid(5);
        assert!(matches!(treewidth_exact(&h), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn disconnected_components_share_one_tree() {
        let h = Hypergraph::from_graph(5, &[(0, 1), (2, 3)]).unwrap();
        let (w, td) = treewidth_exact(&h).unwrap();
        assert_eq!(w, 1);
        assert!(is_valid_td(&h, &td));
        let covered = crate::widths::decomposition::covered_vertices(&td);
        assert_eq!(covered.len(), 5);
    }
}
