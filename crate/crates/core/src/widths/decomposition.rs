use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::hypergraph::{Hypergraph, VertexSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TdNode {
    pub bag: VertexSet,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Indices into the hypergraph's edge list.
    pub guard: Option<Vec<usize>>,
}

/// A rooted tree decomposition; node ids are indices into `nodes`, child
/// order is significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    nodes: Vec<TdNode>,
    root: usize,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    parent: Option<usize>,
    bag: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TdDoc {
    nodes: Vec<NodeDoc>,
}

impl TreeDecomposition {
    pub fn with_root(bag: VertexSet) -> Self {
        TreeDecomposition {
            nodes: vec![TdNode {
                bag,
                parent: None,
                children: Vec::new(),
                guard: None,
            }],
            root: 0,
        }
    }

    pub fn add_child(&mut self, parent: usize, bag: VertexSet) -> usize {
        let id = self.nodes.len();
        self.nodes.push(TdNode {
            bag,
            parent: Some(parent),
            children: Vec::new(),
            guard: None,
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn set_guard(&mut self, node: usize, guard: Vec<usize>) {
        self.nodes[node].guard = Some(guard);
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[TdNode] {
        &self.nodes
    }

    pub fn node(&self, t: usize) -> &TdNode {
        &self.nodes[t]
    }

    pub fn bag(&self, t: usize) -> &VertexSet {
        &self.nodes[t].bag
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in post-order (children before parents, children left to right).
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                out.push(t);
            } else {
                stack.push((t, true));
                for &c in self.nodes[t].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    fn has_guards(&self) -> bool {
        self.nodes.iter().any(|n| n.guard.is_some())
    }

    pub fn to_json(&self) -> String {
        let doc = TdDoc {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeDoc {
                    id,
                    parent: n.parent,
                    bag: n.bag.iter().copied().collect(),
                    guard: n.guard.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("decompositions always serialize")
    }

    /// Reads the node document; child order follows node order.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TdDoc = serde_json::from_str(text)?;
        let n = doc.nodes.len();
        if n == 0 {
            return Err(Error::InvalidDecomposition("no nodes".into()));
        }
        let mut ids: Vec<usize> = doc.nodes.iter().map(|d| d.id).collect();
        ids.sort_unstable();
        if ids != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidDecomposition("node ids must be 0..n".into()));
        }
        let mut nodes: Vec<TdNode> = vec![
            TdNode {
                bag: VertexSet::new(),
                parent: None,
                children: Vec::new(),
                guard: None
            };
            n
        ];
        for d in &doc.nodes {
            nodes[d.id].bag = d.bag.iter().copied().collect();
            nodes[d.id].parent = d.parent;
            nodes[d.id].guard = d.guard.clone();
        }
        for d in &doc.nodes {
            if let Some(p) = d.parent {
                if p >= n {
                    return Err(Error::InvalidDecomposition(format!("unknown parent {p}")));
                }
                nodes[p].children.push(d.id);
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&t| nodes[t].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidDecomposition(format!(
                "expected one root, found {}",
                roots.len()
            )));
        }
        let td = TreeDecomposition {
            nodes,
            root: roots[0],
        };
        if td.post_order().len() != n {
            return Err(Error::InvalidDecomposition("parent links contain a cycle".into()));
        }
        Ok(td)
    }
}

/// Checks that the node set forms a tree hanging from the root.
fn is_tree(td: &TreeDecomposition) -> bool {
    let n = td.nodes.len();
    if n == 0 || td.root >= n || td.nodes[td.root].parent.is_some() {
        return false;
    }
    for (t, node) in td.nodes.iter().enumerate() {
        if t != td.root && node.parent.is_none() {
            return false;
        }
        for &c in &node.children {
            if c >= n || td.nodes[c].parent != Some(t) {
                return false;
            }
        }
        if let Some(p) = node.parent {
            if p >= n || !td.nodes[p].children.contains(&t) {
                return false;
            }
        }
    }
    td.post_order().len() == n
}

/// Validity of a (possibly guarded) tree decomposition of `h`: every edge
/// lies in a bag, every vertex occurs in a connected set of nodes and, when
/// guards are present, every bag is covered by its guard and the
/// guard-descendant condition holds.
pub fn is_valid_td(h: &Hypergraph, td: &TreeDecomposition) -> bool {
    if !is_tree(td) {
        return false;
    }
    if td.nodes.iter().any(|n| !n.bag.is_subset(h.vertices())) {
        return false;
    }
    for e in h.edges() {
        if !td.nodes.iter().any(|n| e.is_subset(&n.bag)) {
            return false;
        }
    }
    // connected occurrence: exactly one topmost node per vertex
    for v in h.vertices() {
        let tops = td
            .nodes
            .iter()
            .filter(|n| {
                n.bag.contains(v)
                    && n.parent.is_none_or(|p| !td.nodes[p].bag.contains(v))
            })
            .count();
        if tops > 1 {
            return false;
        }
    }
    if td.has_guards() {
        let mut below: Vec<VertexSet> = vec![VertexSet::new(); td.nodes.len()];
        for t in td.post_order() {
            let mut acc = td.nodes[t].bag.clone();
            for &c in &td.nodes[t].children {
                acc.extend(below[c].iter().copied());
            }
            below[t] = acc;
        }
        for (t, node) in td.nodes.iter().enumerate() {
            let Some(guard) = &node.guard else {
                return false;
            };
            let mut covered = VertexSet::new();
            for &e in guard {
                match h.edges().get(e) {
                    Some(edge) => covered.extend(edge.iter().copied()),
                    None => return false,
                }
            }
            if !node.bag.is_subset(&covered) {
                return false;
            }
            if !covered.intersection(&below[t]).all(|v| node.bag.contains(v)) {
                return false;
            }
        }
    }
    true
}

/// max |B_t| − 1 (so −1 when every bag is empty).
pub fn td_width(td: &TreeDecomposition) -> i64 {
    td.nodes.iter().map(|n| n.bag.len() as i64).max().unwrap_or(0) - 1
}

/// Niceness: empty root and leaf bags, at most two children, join nodes
/// with equal bags, and single-child nodes differing by exactly one vertex.
pub fn is_nice(td: &TreeDecomposition) -> bool {
    if !td.nodes[td.root].bag.is_empty() {
        return false;
    }
    td.nodes.iter().all(|n| match n.children.as_slice() {
        [] => n.bag.is_empty(),
        [c] => n.bag.symmetric_difference(&td.nodes[*c].bag).count() == 1,
        [a, b] => n.bag == td.nodes[*a].bag && n.bag == td.nodes[*b].bag,
        _ => false,
    })
}

/// Kind of a node in a nice decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    /// The node's bag adds `vertex` to its child's bag.
    Introduce { child: usize, vertex: usize },
    /// The node's bag drops `vertex` from its child's bag.
    Forget { child: usize, vertex: usize },
    Join { left: usize, right: usize },
}

/// Classifies node `t` of a nice decomposition.
pub fn nice_kind(td: &TreeDecomposition, t: usize) -> NiceKind {
    let n = &td.nodes[t];
    match n.children.as_slice() {
        [] => NiceKind::Leaf,
        [c] => {
            let child = &td.nodes[*c].bag;
            if let Some(&v) = n.bag.difference(child).next() {
                NiceKind::Introduce { child: *c, vertex: v }
            } else {
                let v = *child.difference(&n.bag).next().expect("nice single-child node");
                NiceKind::Forget { child: *c, vertex: v }
            }
        }
        [a, b] => NiceKind::Join { left: *a, right: *b },
        _ => panic!("node {t} has more than two children"),
    }
}

/// Converts a valid decomposition of `h` into a nice one. Every bag of the
/// result is a subset of some input bag.
pub fn make_nice(h: &Hypergraph, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    if !is_valid_td(h, td) {
        return Err(Error::InvalidDecomposition(
            "input is not a tree decomposition of the hypergraph".into(),
        ));
    }
    let mut builder = NiceBuilder { nodes: Vec::new() };
    let top = builder.build(td, td.root);
    let root = builder.connect(&VertexSet::new(), top);

    // renumber so that the root is node 0 and ids follow pre-order
    let mut out = TreeDecomposition::with_root(builder.nodes[root].bag.clone());
    let mut stack: Vec<(usize, usize)> = vec![(root, out.root)];
    while let Some((old, new)) = stack.pop() {
        let kids = builder.nodes[old].children.clone();
        let mut mapped = Vec::new();
        for &c in &kids {
            mapped.push((c, out.add_child(new, builder.nodes[c].bag.clone())));
        }
        stack.extend(mapped.into_iter().rev());
    }
    Ok(out)
}

struct NiceBuilder {
    nodes: Vec<TdNode>,
}

impl NiceBuilder {
    fn push(&mut self, bag: VertexSet, children: Vec<usize>) -> usize {
        let id = self.nodes.len();
        for &c in &children {
            self.nodes[c].parent = Some(id);
        }
        self.nodes.push(TdNode {
            bag,
            parent: None,
            children,
            guard: None,
        });
        id
    }

    /// Builds a nice subtree for original node `t`; its top bag equals `B_t`.
    fn build(&mut self, td: &TreeDecomposition, t: usize) -> usize {
        let bag = td.nodes[t].bag.clone();
        let children = td.nodes[t].children.clone();
        match children.len() {
            0 => {
                let leaf = self.push(VertexSet::new(), Vec::new());
                self.connect(&bag, leaf)
            }
            1 => {
                let sub = self.build(td, children[0]);
                self.connect(&bag, sub)
            }
            _ => {
                let subs: Vec<usize> = children
                    .iter()
                    .map(|&c| {
                        let sub = self.build(td, c);
                        self.connect(&bag, sub)
                    })
                    .collect();
                self.join_balanced(&bag, &subs)
            }
        }
    }

    fn join_balanced(&mut self, bag: &VertexSet, subs: &[usize]) -> usize {
        if subs.len() == 1 {
            return subs[0];
        }
        let mid = subs.len().div_ceil(2);
        let left = self.join_balanced(bag, &subs[..mid]);
        let right = self.join_balanced(bag, &subs[mid..]);
        self.push(bag.clone(), vec![left, right])
    }

    /// Returns a node with bag `bag` above `sub`, inserting a path that first
    /// drops `bag \ B_sub` one vertex at a time and then adds `B_sub \ bag`.
    fn connect(&mut self, bag: &VertexSet, sub: usize) -> usize {
        let target = self.nodes[sub].bag.clone();
        if *bag == target {
            return sub;
        }
        // path bags from the top (bag) down to target, excluding both ends
        let mut path: Vec<VertexSet> = Vec::new();
        let mut cur = bag.clone();
        let drop: Vec<usize> = bag.difference(&target).copied().collect();
        let add: Vec<usize> = target.difference(bag).copied().collect();
        for v in drop {
            cur.remove(&v);
            path.push(cur.clone());
        }
        for v in add {
            cur.insert(v);
            path.push(cur.clone());
        }
        debug_assert_eq!(path.last(), Some(&target));
        path.pop();
        let mut below = sub;
        for b in path.into_iter().rev() {
            below = self.push(b, vec![below]);
        }
        self.push(bag.clone(), vec![below])
    }
}

/// Vertices that occur in some bag.
pub fn covered_vertices(td: &TreeDecomposition) -> BTreeSet<usize> {
    td.nodes.iter().flat_map(|n| n.bag.iter().copied()).collect()
}
