//! Tree automata over ordered binary labelled trees and slice counting.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side of a transition `(state, label) → rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Successors {
    /// Accept at a leaf.
    Leaf,
    One(usize),
    Two(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub state: usize,
    pub label: usize,
    pub successors: Successors,
}

/// A top-down tree automaton (S, Σ, Δ, s₀) over binary trees. States and
/// labels are named for serialisation; transitions refer to them by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeAutomaton {
    states: Vec<String>,
    alphabet: Vec<String>,
    transitions: BTreeSet<Transition>,
    initial: usize,
}

impl TreeAutomaton {
    pub fn new(states: Vec<String>, alphabet: Vec<String>, initial: usize) -> Result<Self> {
        if initial >= states.len() {
            return Err(Error::InvalidParameter(format!("initial state {initial} is not declared")));
        }
        Ok(TreeAutomaton {
            states,
            alphabet,
            transitions: BTreeSet::new(),
            initial,
        })
    }

    pub fn add_transition(&mut self, state: usize, label: usize, successors: Successors) -> Result<()> {
        let n = self.states.len();
        let targets: Vec<usize> = match successors {
            Successors::Leaf => vec![],
            Successors::One(a) => vec![a],
            Successors::Two(a, b) => vec![a, b],
        };
        if state >= n || targets.iter().any(|&s| s >= n) {
            return Err(Error::InvalidParameter("transition mentions an undeclared state".into()));
        }
        if label >= self.alphabet.len() {
            return Err(Error::InvalidParameter(format!("label {label} is not declared")));
        }
        self.transitions.insert(Transition {
            state,
            label,
            successors,
        });
        Ok(())
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Transition> {
        self.transitions.iter()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("automata always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: TreeAutomaton = serde_json::from_str(text)?;
        let mut checked = TreeAutomaton::new(a.states, a.alphabet, a.initial)?;
        for t in a.transitions {
            checked.add_transition(t.state, t.label, t.successors)?;
        }
        Ok(checked)
    }

    /// Transitions grouped by label.
    fn by_label(&self) -> Vec<Vec<&Transition>> {
        let mut out = vec![Vec::new(); self.alphabet.len()];
        for t in &self.transitions {
            out[t.label].push(t);
        }
        out
    }
}

/// A rooted ordered tree with at most two children per node and one label
/// (an alphabet index) per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTree {
    labels: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl LabeledTree {
    /// A single root node; the root is node 0.
    pub fn new(root_label: usize) -> Self {
        LabeledTree {
            labels: vec![root_label],
            children: vec![Vec::new()],
        }
    }

    pub fn add_child(&mut self, parent: usize, label: usize) -> Result<usize> {
        if parent >= self.labels.len() || self.children[parent].len() >= 2 {
            return Err(Error::InvalidParameter(format!("cannot attach a child to node {parent}")));
        }
        let id = self.labels.len();
        self.labels.push(label);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }
}

/// States from which `label` can be read given the children's reachable sets.
fn reachable(rules: &[&Transition], kids: &[&[usize]]) -> Vec<usize> {
    let has = |set: &[usize], s: usize| set.binary_search(&s).is_ok();
    let mut out: Vec<usize> = rules
        .iter()
        .filter(|t| match (&t.successors, kids) {
            (Successors::Leaf, []) => true,
            (Successors::One(a), [k]) => has(k, *a),
            (Successors::Two(a, b), [l, r]) => has(l, *a) && has(r, *b),
            _ => false,
        })
        .map(|t| t.state)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether some run of `a` on `lt` puts the initial state at the root.
pub fn accepts(a: &TreeAutomaton, lt: &LabeledTree) -> bool {
    if lt.labels.iter().any(|&l| l >= a.alphabet.len()) {
        return false;
    }
    let rules = a.by_label();
    // children always have larger ids than their parent
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); lt.len()];
    for node in (0..lt.len()).rev() {
        let kids: Vec<&[usize]> = lt.children[node].iter().map(|&c| sets[c].as_slice()).collect();
        sets[node] = reachable(&rules[lt.labels[node]], &kids);
    }
    sets[0].binary_search(&a.initial).is_ok()
}

pub const DEFAULT_MAX_REACHABLE_SETS: usize = 1 << 20;

/// |L_N(a)|: the number of labelled trees with exactly `n` nodes accepted
/// by `a`. Dynamic program over tree sizes of the number of trees with
/// each non-empty set of states reachable at their root.
pub fn count_slice_exact(a: &TreeAutomaton, n: usize) -> Result<BigUint> {
    count_slice_exact_with_limit(a, n, DEFAULT_MAX_REACHABLE_SETS)
}

pub fn count_slice_exact_with_limit(a: &TreeAutomaton, n: usize, max_sets: usize) -> Result<BigUint> {
    if n == 0 {
        return Ok(BigUint::zero());
    }
    let rules: Vec<LabelRules> = a.by_label().into_iter().map(LabelRules::split).collect();
    // slices[k]: reachable set → number of trees of size k
    let mut slices: Vec<Vec<(Vec<usize>, BigUint)>> = vec![Vec::new()];
    // index[k][state] = entries of slices[k] containing the state
    let mut index: Vec<HashMap<usize, Vec<usize>>> = vec![HashMap::new()];
    let mut total_sets = 0usize;
    for size in 1..=n {
        let mut acc: HashMap<Vec<usize>, BigUint> = HashMap::new();
        for LabelRules { leaves, ones, twos, one_targets, left_targets, right_targets } in &rules {
            if size == 1 && !leaves.is_empty() {
                let set = reachable(leaves, &[]);
                *acc.entry(set).or_insert_with(BigUint::zero) += 1u32;
            }
            if size >= 2 && !ones.is_empty() {
                let cands = candidates(&index[size - 1], one_targets);
                for e in cands {
                    let (set, c) = &slices[size - 1][e];
                    let r = reachable(ones, &[set]);
                    if !r.is_empty() {
                        *acc.entry(r).or_insert_with(BigUint::zero) += c;
                    }
                }
            }
            if size >= 3 && !twos.is_empty() {
                for left in 1..size - 1 {
                    let right = size - 1 - left;
                    let lc = candidates(&index[left], left_targets);
                    if lc.is_empty() {
                        continue;
                    }
                    let rc = candidates(&index[right], right_targets);
                    for &l in &lc {
                        for &r in &rc {
                            let (ls, lcount) = &slices[left][l];
                            let (rs, rcount) = &slices[right][r];
                            let set = reachable(twos, &[ls, rs]);
                            if !set.is_empty() {
                                *acc.entry(set).or_insert_with(BigUint::zero) += lcount * rcount;
                            }
                        }
                    }
                }
            }
        }
        total_sets += acc.len();
        if total_sets > max_sets {
            return Err(Error::LimitExceeded {
                what: "reachable state sets",
                value: total_sets as u128,
                limit: max_sets as u128,
            });
        }
        let mut entries: Vec<(Vec<usize>, BigUint)> = acc.into_iter().collect();
        entries.sort();
        let mut idx: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, (set, _)) in entries.iter().enumerate() {
            for &s in set {
                idx.entry(s).or_default().push(i);
            }
        }
        slices.push(entries);
        index.push(idx);
    }
    let mut total = BigUint::zero();
    for (set, c) in &slices[n] {
        if set.binary_search(&a.initial).is_ok() {
            total += c;
        }
    }
    Ok(total)
}

struct LabelRules<'a> {
    leaves: Vec<&'a Transition>,
    ones: Vec<&'a Transition>,
    twos: Vec<&'a Transition>,
    one_targets: Vec<usize>,
    left_targets: Vec<usize>,
    right_targets: Vec<usize>,
}

impl<'a> LabelRules<'a> {
    fn split(rules: Vec<&'a Transition>) -> Self {
        let mut out = LabelRules {
            leaves: Vec::new(),
            ones: Vec::new(),
            twos: Vec::new(),
            one_targets: Vec::new(),
            left_targets: Vec::new(),
            right_targets: Vec::new(),
        };
        for t in rules {
            match t.successors {
                Successors::Leaf => out.leaves.push(t),
                Successors::One(a) => {
                    out.ones.push(t);
                    out.one_targets.push(a);
                }
                Successors::Two(a, b) => {
                    out.twos.push(t);
                    out.left_targets.push(a);
                    out.right_targets.push(b);
                }
            }
        }
        for v in [&mut out.one_targets, &mut out.left_targets, &mut out.right_targets] {
            v.sort_unstable();
            v.dedup();
        }
        out
    }
}

fn candidates(index: &HashMap<usize, Vec<usize>>, states: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = states
        .iter()
        .filter_map(|s| index.get(s))
        .flatten()
        .copied()
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Brute-force |L_N(a)| by enumerating every labelled tree with `n` nodes.
/// Only for tiny automata; used to cross-check the dynamic program.
pub fn count_slice_enumerative(a: &TreeAutomaton, n: usize) -> BigUint {
    let mut count = BigUint::zero();
    for shape in shapes(n) {
        let k = shape.len();
        let sigma = a.alphabet.len();
        if sigma == 0 {
            break;
        }
        let mut labels = vec![0usize; k];
        loop {
            let mut lt = LabeledTree::new(labels[0]);
            let mut ids = vec![0usize; k];
            for (node, &parent) in shape.iter().enumerate().skip(1) {
                ids[node] = lt.add_child(ids[parent], labels[node]).expect("binary shape");
            }
            if accepts(a, &lt) {
                count += BigUint::one();
            }
            // next label vector
            let mut i = 0;
            while i < k {
                labels[i] += 1;
                if labels[i] < sigma {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    count
}

/// All ordered binary tree shapes with `n` nodes as parent arrays in
/// pre-order (node 0 is the root).
fn shapes(n: usize) -> Vec<Vec<usize>> {
    fn build(n: usize) -> Vec<Vec<Vec<usize>>> {
        // returns, for each shape, children lists in pre-order numbering
        if n == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        if n == 1 {
            out.push(vec![vec![]]);
            return out;
        }
        for sub in build(n - 1) {
            let mut t = vec![vec![1]];
            t.extend(sub.into_iter().map(|c| c.into_iter().map(|x| x + 1).collect()));
            out.push(t);
        }
        for left in 1..n - 1 {
            let right = n - 1 - left;
            for l in build(left) {
                for r in build(right) {
                    let mut t = vec![vec![1, 1 + left]];
                    t.extend(l.iter().map(|c| c.iter().map(|x| x + 1).collect::<Vec<_>>()));
                    t.extend(r.iter().map(|c| c.iter().map(|x| x + 1 + left).collect::<Vec<_>>()));
                    out.push(t);
                }
            }
        }
        out
    }
    build(n)
        .into_iter()
        .map(|children| {
            let mut parent = vec![0; children.len()];
            for (p, cs) in children.iter().enumerate() {
                for &c in cs {
                    parent[c] = p;
                }
            }
            parent
        })
        .collect()
}

/// (ε, δ)-approximation of |L_N(a)|. The current implementation is exact,
/// so every output is within any ε with probability 1.
pub fn approx_count_slice(a: &TreeAutomaton, n: usize, epsilon: f64, delta: f64) -> Result<BigUint> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("epsilon and delta must lie in (0, 1)".into()));
    }
    count_slice_exact(a, n)
}
