//! Automata whose accepted trees encode the answers of a plain CQ, built
//! from a nice tree decomposition and per-bag solution sets.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::homsolver::sol_bag;
use crate::qmodel::{build_hypergraph, normalize_equalities, Database, Query};
use crate::widths::{
    fhw_exact_small_with_limit, fhw_of_td, is_nice, is_valid_td, make_nice, nice_kind, treewidth_heuristic,
    NiceKind, TreeDecomposition, VertexSet, DEFAULT_FHW_LIMIT,
};
use crate::Rational;

use super::tree::{count_slice_exact_with_limit, LabeledTree, Successors, TreeAutomaton, DEFAULT_MAX_REACHABLE_SETS};

pub const DEFAULT_MAX_BAG_SOLUTIONS: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AutomatonLimits {
    /// Upper bound on |Sol_t| for every bag.
    pub max_bag_solutions: usize,
    pub max_reachable_sets: usize,
    /// Largest hypergraph for which fhw is computed exactly; larger ones
    /// use a heuristic decomposition.
    pub exact_fhw_vertices: usize,
}

impl Default for AutomatonLimits {
    fn default() -> Self {
        AutomatonLimits {
            max_bag_solutions: DEFAULT_MAX_BAG_SOLUTIONS,
            max_reachable_sets: DEFAULT_MAX_REACHABLE_SETS,
            exact_fhw_vertices: DEFAULT_FHW_LIMIT,
        }
    }
}

/// A built automaton together with the decomposition and the meaning of
/// its states (t, α) and labels (t, β).
#[derive(Clone, Debug)]
pub struct DecompositionAutomaton {
    automaton: TreeAutomaton,
    td: TreeDecomposition,
    free: usize,
    /// per node: projection of a bag assignment onto free variables → label
    labels: Vec<HashMap<Vec<usize>, usize>>,
    label_meaning: Vec<(usize, Vec<usize>)>,
    satisfiable: bool,
}

impl DecompositionAutomaton {
    pub fn automaton(&self) -> &TreeAutomaton {
        &self.automaton
    }

    pub fn decomposition(&self) -> &TreeDecomposition {
        &self.td
    }

    /// False when Sol at the root is empty, in which case no tree is accepted.
    pub fn satisfiable(&self) -> bool {
        self.satisfiable
    }

    /// The tree size the counting pipeline uses, N = |V(T)|.
    pub fn tree_size(&self) -> usize {
        self.td.len()
    }

    /// ψ(t) = (t, proj(τ, B_t)) for an answer τ over the free variables.
    /// None if some label is missing from the alphabet.
    pub fn tree_for_answer(&self, answer: &[usize]) -> Option<LabeledTree> {
        if answer.len() != self.free {
            return None;
        }
        let label = |t: usize| -> Option<usize> {
            let beta: Vec<usize> = self.td.bag(t).iter().filter(|&&v| v < self.free).map(|&v| answer[v]).collect();
            self.labels[t].get(&beta).copied()
        };
        let root = self.td.root();
        let mut lt = LabeledTree::new(label(root)?);
        let mut stack = vec![(root, 0usize)];
        while let Some((t, id)) = stack.pop() {
            for &c in &self.td.node(t).children {
                let cid = lt.add_child(id, label(c)?).ok()?;
                stack.push((c, cid));
            }
        }
        Some(lt)
    }

    /// Reads an answer back off a labelled tree of the decomposition's
    /// shape. None if the shape differs or the labels disagree.
    pub fn answer_of(&self, lt: &LabeledTree) -> Option<Vec<usize>> {
        let mut answer: Vec<Option<usize>> = vec![None; self.free];
        let mut stack = vec![(self.td.root(), 0usize)];
        while let Some((t, id)) = stack.pop() {
            let (node, beta) = self.label_meaning.get(lt.label(id))?;
            if *node != t {
                return None;
            }
            let free_in_bag = self.td.bag(t).iter().filter(|&&v| v < self.free);
            for (&v, &val) in free_in_bag.zip(beta) {
                match answer[v] {
                    Some(w) if w != val => return None,
                    _ => answer[v] = Some(val),
                }
            }
            let kids = &self.td.node(t).children;
            if kids.len() != lt.children(id).len() {
                return None;
            }
            stack.extend(kids.iter().copied().zip(lt.children(id).iter().copied()));
        }
        answer.into_iter().collect()
    }
}

fn project(bag: &VertexSet, alpha: &[usize], onto: impl Fn(usize) -> bool) -> Vec<usize> {
    bag.iter().zip(alpha).filter(|(&v, _)| onto(v)).map(|(_, &a)| a).collect()
}

fn fmt_tuple(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn build_automaton(q: &Query, d: &Database, ntd: &TreeDecomposition) -> Result<DecompositionAutomaton> {
    build_automaton_with_limits(q, d, ntd, &AutomatonLimits::default())
}

pub fn build_automaton_with_limits(
    q: &Query,
    d: &Database,
    ntd: &TreeDecomposition,
    limits: &AutomatonLimits,
) -> Result<DecompositionAutomaton> {
    if !q.is_plain_cq() {
        return Err(Error::NotPlainCq(
            "the automaton construction needs a query without negations, disequalities or equalities".into(),
        ));
    }
    if !is_nice(ntd) {
        return Err(Error::InvalidDecomposition("decomposition is not nice".into()));
    }
    if !is_valid_td(&build_hypergraph(q), ntd) {
        return Err(Error::InvalidDecomposition(
            "not a tree decomposition of the query hypergraph".into(),
        ));
    }
    let free = q.num_free();
    let is_free = |v: usize| v < free;

    let mut by_bag: HashMap<VertexSet, BTreeSet<Vec<usize>>> = HashMap::new();
    let mut sols: Vec<Vec<Vec<usize>>> = Vec::with_capacity(ntd.len());
    for t in 0..ntd.len() {
        let bag = ntd.bag(t);
        if !by_bag.contains_key(bag) {
            let s = sol_bag(q, d, bag)?;
            if s.len() > limits.max_bag_solutions {
                return Err(Error::LimitExceeded {
                    what: "bag solutions",
                    value: s.len() as u128,
                    limit: limits.max_bag_solutions as u128,
                });
            }
            by_bag.insert(bag.clone(), s);
        }
        sols.push(by_bag[bag].iter().cloned().collect());
    }

    let root = ntd.root();
    let mut states = Vec::new();
    let mut state_id: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); ntd.len()];
    // the initial state (t*, ε) is always declared
    states.push(format!("({root},[])"));
    state_id[root].insert(Vec::new(), 0);
    for (t, sol) in sols.iter().enumerate() {
        for alpha in sol {
            if t == root {
                continue;
            }
            state_id[t].insert(alpha.clone(), states.len());
            states.push(format!("({t},{})", fmt_tuple(alpha)));
        }
    }
    let mut alphabet = Vec::new();
    let mut labels: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new(); ntd.len()];
    let mut label_meaning = Vec::new();
    for (t, sol) in sols.iter().enumerate() {
        for alpha in sol {
            let beta = project(ntd.bag(t), alpha, is_free);
            if !labels[t].contains_key(&beta) {
                labels[t].insert(beta.clone(), alphabet.len());
                alphabet.push(format!("({t},{})", fmt_tuple(&beta)));
                label_meaning.push((t, beta));
            }
        }
    }

    let mut automaton = TreeAutomaton::new(states, alphabet, 0)?;
    let satisfiable = !sols[root].is_empty();
    if satisfiable {
        for (t, sol) in sols.iter().enumerate() {
            let bag = ntd.bag(t);
            for alpha in sol {
                let s = state_id[t][alpha];
                let label = labels[t][&project(bag, alpha, is_free)];
                match nice_kind(ntd, t) {
                    NiceKind::Leaf => automaton.add_transition(s, label, Successors::Leaf)?,
                    NiceKind::Join { left, right } => {
                        // equal bags, so α is a state of both children
                        let (l, r) = (state_id[left][alpha], state_id[right][alpha]);
                        automaton.add_transition(s, label, Successors::Two(l, r))?;
                    }
                    NiceKind::Introduce { child, vertex } => {
                        let sub = project(bag, alpha, |v| v != vertex);
                        // Sol is closed under projection onto sub-bags
                        let c = state_id[child][&sub];
                        automaton.add_transition(s, label, Successors::One(c))?;
                    }
                    NiceKind::Forget { child, vertex } => {
                        let cbag = ntd.bag(child);
                        for a1 in &sols[child] {
                            if project(cbag, a1, |v| v != vertex) == *alpha {
                                automaton.add_transition(s, label, Successors::One(state_id[child][a1]))?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(DecompositionAutomaton {
        automaton,
        td: ntd.clone(),
        free,
        labels,
        label_meaning,
        satisfiable,
    })
}

/// Outcome of the decomposition-and-automaton counting route.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FhwPipelineReport {
    pub count: BigUint,
    /// fhw of the decomposition used (exact fhw when `fhw_exact`).
    pub fhw: Rational,
    pub fhw_exact: bool,
    pub td_nodes: usize,
    pub states: usize,
    pub transitions: usize,
}

pub fn count_answers_fhw_pipeline(q: &Query, d: &Database) -> Result<FhwPipelineReport> {
    count_answers_fhw_pipeline_with_limits(q, d, &AutomatonLimits::default())
}

pub fn count_answers_fhw_pipeline_with_limits(
    q: &Query,
    d: &Database,
    limits: &AutomatonLimits,
) -> Result<FhwPipelineReport> {
    let (q, _) = normalize_equalities(q);
    if !q.is_plain_cq() {
        return Err(Error::NotPlainCq(
            "the fhw pipeline counts queries without negations or disequalities".into(),
        ));
    }
    let h = build_hypergraph(&q);
    let (fhw, td, fhw_exact) = if h.num_vertices() <= limits.exact_fhw_vertices {
        let (w, td) = fhw_exact_small_with_limit(&h, limits.exact_fhw_vertices)?;
        (w, td, true)
    } else {
        let td = treewidth_heuristic(&h);
        (fhw_of_td(&h, &td)?, td, false)
    };
    let ntd = make_nice(&h, &td)?;
    let built = build_automaton_with_limits(&q, d, &ntd, limits)?;
    let count = if built.satisfiable() {
        count_slice_exact_with_limit(built.automaton(), built.tree_size(), limits.max_reachable_sets)?
    } else {
        BigUint::zero()
    };
    Ok(FhwPipelineReport {
        count,
        fhw,
        fhw_exact,
        td_nodes: ntd.len(),
        states: built.automaton().states().len(),
        transitions: built.automaton().num_transitions(),
    })
}
