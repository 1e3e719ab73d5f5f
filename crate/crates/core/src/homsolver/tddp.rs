//! Homomorphism decision by dynamic programming over a nice tree
//! decomposition of H(A).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::widths::{
    is_nice, is_valid_td, make_nice, nice_kind, treewidth_exact, treewidth_heuristic, NiceKind,
    TreeDecomposition, DEFAULT_TREEWIDTH_LIMIT,
};

use super::search::check_signature;
use super::structure::Structure;

/// A nice decomposition of H(A): exact treewidth when small enough,
/// min-fill otherwise.
pub fn nice_decomposition_of(a: &Structure) -> TreeDecomposition {
    let h = a.hypergraph();
    let td = if h.num_vertices() <= DEFAULT_TREEWIDTH_LIMIT {
        treewidth_exact(&h).map(|(_, td)| td).unwrap_or_else(|_| treewidth_heuristic(&h))
    } else {
        treewidth_heuristic(&h)
    };
    make_nice(&h, &td).expect("decompositions built from H(A) are valid")
}

enum Step {
    Leaf,
    /// Insert `vertex` at `pos`; then check each (relation, bag positions).
    Introduce {
        child: usize,
        pos: usize,
        checks: Vec<(String, Vec<usize>)>,
    },
    Forget {
        child: usize,
        pos: usize,
    },
    Join {
        left: usize,
        right: usize,
    },
}

/// Preprocessed decomposition for a fixed left-hand structure A; can be run
/// against many right-hand structures.
pub struct TdPlan {
    order: Vec<usize>,
    steps: Vec<Step>,
    root: usize,
}

impl TdPlan {
    pub fn new(a: &Structure, td: &TreeDecomposition) -> Result<Self> {
        let h = a.hypergraph();
        if !is_valid_td(&h, td) {
            return Err(Error::InvalidDecomposition(
                "not a tree decomposition of H(A)".into(),
            ));
        }
        if !is_nice(td) {
            return Err(Error::InvalidDecomposition("decomposition is not nice".into()));
        }
        let mut steps = Vec::with_capacity(td.len());
        for t in 0..td.len() {
            let bag: Vec<usize> = td.bag(t).iter().copied().collect();
            let step = match nice_kind(td, t) {
                NiceKind::Leaf => Step::Leaf,
                NiceKind::Forget { child, vertex } => Step::Forget {
                    child,
                    pos: td.bag(child).iter().position(|&x| x == vertex).expect("forgotten vertex"),
                },
                NiceKind::Join { left, right } => Step::Join { left, right },
                NiceKind::Introduce { child, vertex } => {
                    let pos = bag.iter().position(|&x| x == vertex).expect("introduced vertex");
                    let mut checks = Vec::new();
                    for (name, r) in a.relations() {
                        for tuple in &r.tuples {
                            if tuple.contains(&vertex) && tuple.iter().all(|e| td.bag(t).contains(e)) {
                                let at = tuple
                                    .iter()
                                    .map(|e| bag.iter().position(|x| x == e).unwrap())
                                    .collect();
                                checks.push((name.to_string(), at));
                            }
                        }
                    }
                    Step::Introduce { child, pos, checks }
                }
            };
            steps.push(step);
        }
        Ok(TdPlan {
            order: td.post_order(),
            steps,
            root: td.root(),
        })
    }

    pub fn for_structure(a: &Structure) -> Self {
        Self::new(a, &nice_decomposition_of(a)).expect("own decomposition is valid and nice")
    }

    /// Decides whether A → B, where A is the structure the plan was built for.
    pub fn run(&self, a: &Structure, b: &Structure) -> Result<bool> {
        check_signature(a, b)?;
        let m = b.universe_size();
        // elements outside every bag only need some target element
        if m == 0 {
            return Ok(a.universe_size() == 0);
        }
        let mut tables: Vec<Option<HashSet<Vec<usize>>>> = (0..self.steps.len()).map(|_| None).collect();
        for &t in &self.order {
            let table = match &self.steps[t] {
                Step::Leaf => std::iter::once(Vec::new()).collect(),
                Step::Forget { child, pos } => {
                    let src = tables[*child].take().expect("child before parent");
                    src.into_iter()
                        .map(|mut row| {
                            row.remove(*pos);
                            row
                        })
                        .collect()
                }
                Step::Join { left, right } => {
                    let l = tables[*left].take().expect("child before parent");
                    let r = tables[*right].take().expect("child before parent");
                    let (small, big) = if l.len() <= r.len() { (l, r) } else { (r, l) };
                    small.into_iter().filter(|row| big.contains(row)).collect()
                }
                Step::Introduce { child, pos, checks } => {
                    let src = tables[*child].take().expect("child before parent");
                    let rels: Vec<_> = checks
                        .iter()
                        .map(|(name, at)| (b.relation(name).expect("signature checked"), at))
                        .collect();
                    let mut out = HashSet::new();
                    let mut probe = Vec::new();
                    for row in src {
                        for v in 0..m {
                            let mut ext = row.clone();
                            ext.insert(*pos, v);
                            let ok = rels.iter().all(|(rel, at)| {
                                probe.clear();
                                probe.extend(at.iter().map(|&p| ext[p]));
                                rel.contains(&probe)
                            });
                            if ok {
                                out.insert(ext);
                            }
                        }
                    }
                    out
                }
            };
            if table.is_empty() {
                return Ok(false);
            }
            tables[t] = Some(table);
        }
        Ok(tables[self.root].as_ref().is_some_and(|t| !t.is_empty()))
    }
}

/// Decides A → B over the given nice decomposition of H(A).
pub fn hom_exists_td(a: &Structure, b: &Structure, td: &TreeDecomposition) -> Result<bool> {
    TdPlan::new(a, td)?.run(a, b)
}
