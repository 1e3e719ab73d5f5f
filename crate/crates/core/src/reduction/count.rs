//! Counting the edges of G(φ,D) through EdgeFree: an exact halving counter
//! and a random-walk estimator of the halving tree's leaf count.
//!
//! Neither reproduces the polylogarithmic call bound of the general
//! decision-to-counting reduction: the exact counter is linear in |E|, and
//! the estimator's cost grows with its empirical variance.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmodel::{normalize_equalities, validate_pair, Database, Query};

use super::hat::{ImplicitAnswerHypergraph, PartiteSubset};
use super::oracle::{ColourCodingEdgeFree, EdgeFreeOracle, HomBackend, OracleStats};

type Parts = Vec<Vec<usize>>;

fn to_subset(parts: &Parts) -> PartiteSubset {
    PartiteSubset::restricted(parts.iter().map(|p| p.iter().copied().collect::<BTreeSet<_>>()).collect())
}

/// Splits the lowest-index part with at least two values into its first
/// ⌈n/2⌉ and last ⌊n/2⌋ values.
fn split(parts: &Parts) -> Option<(Parts, Parts)> {
    let i = parts.iter().position(|p| p.len() >= 2)?;
    let mid = parts[i].len().div_ceil(2);
    let (mut a, mut b) = (parts.clone(), parts.clone());
    a[i] = parts[i][..mid].to_vec();
    b[i] = parts[i][mid..].to_vec();
    Some((a, b))
}

fn root_parts(ih: &ImplicitAnswerHypergraph) -> Parts {
    vec![(0..ih.domain_size()).collect(); ih.ell()]
}

fn ceil_log2(n: usize) -> u128 {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as u128
    }
}

/// 2(|E|+1)·Σ_i ⌈log₂|U(D)|⌉ + 1, the call bound of the halving counter.
pub fn exact_call_bound(edges: u128, ell: usize, domain: usize) -> u128 {
    2 * (edges + 1) * (ell as u128 * ceil_log2(domain)) + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCount {
    pub edges: u128,
    pub calls: u64,
}

/// Exact |E(G(φ,D))| by recursive halving, descending only into halves the
/// oracle reports as non-empty.
pub fn count_edges_exact_oracle(
    ih: &ImplicitAnswerHypergraph,
    oracle: &mut dyn EdgeFreeOracle,
    budget: Option<u64>,
) -> Result<ExactCount> {
    let mut calls = 0u64;
    let mut ask = |parts: &Parts, calls: &mut u64| -> Result<bool> {
        if budget.is_some_and(|b| *calls >= b) {
            return Err(Error::BudgetExceeded { calls: *calls });
        }
        *calls += 1;
        oracle.edge_free(&to_subset(parts))
    };
    let root = root_parts(ih);
    if ask(&root, &mut calls)? {
        return Ok(ExactCount { edges: 0, calls });
    }
    let mut edges = 0u128;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        match split(&node) {
            None => edges += 1,
            Some((a, b)) => {
                // push the second half first so the walk stays in domain order
                let keep_b = !ask(&b, &mut calls)?;
                let keep_a = !ask(&a, &mut calls)?;
                if keep_b {
                    stack.push(b);
                }
                if keep_a {
                    stack.push(a);
                }
            }
        }
    }
    Ok(ExactCount { edges, calls })
}

/// One root-to-leaf walk in the halving tree, moving to a uniformly chosen
/// non-empty child. Returns the product of the branching counts (0 when the
/// root is empty): an unbiased estimate of the number of leaves.
pub fn single_walk_estimate<R: Rng + ?Sized>(
    ih: &ImplicitAnswerHypergraph,
    oracle: &mut dyn EdgeFreeOracle,
    rng: &mut R,
) -> Result<u128> {
    let mut node = root_parts(ih);
    if oracle.edge_free(&to_subset(&node))? {
        return Ok(0);
    }
    let mut product = 1u128;
    while let Some((a, b)) = split(&node) {
        let live: Vec<Parts> = [a, b]
            .into_iter()
            .map(|c| Ok((!oracle.edge_free(&to_subset(&c))?).then_some(c)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if live.is_empty() {
            // only possible when a one-sided oracle misses an edge
            return Ok(0);
        }
        product *= live.len() as u128;
        node = live[rng.gen_range(0..live.len())].clone();
    }
    Ok(product)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Count exactly when the pilot suggests that is cheaper.
    pub exact_fallback: bool,
    pub pilot_walks: u64,
    /// Multiplier on the pilot variance when sizing the groups.
    pub variance_safety: f64,
    pub max_group_size: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            exact_fallback: true,
            pilot_walks: 64,
            variance_safety: 2.0,
            max_group_size: 1 << 14,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub estimate: u128,
    /// True when the value came from the exact halving counter.
    pub exact: bool,
    pub walks: u64,
    pub groups: u64,
    pub group_size: u64,
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} outside (0, 1)")))
    }
}

/// Number of groups in the median of means, ⌈18 ln(2/δ)⌉.
pub fn median_groups(delta: f64) -> u64 {
    (18.0 * (2.0 / delta).ln()).ceil() as u64
}

/// (ε,δ)-estimate of |E(G(φ,D))|: median of ⌈18 ln(2/δ)⌉ means of walk
/// estimates, with the group size chosen from a pilot so that each mean is
/// within ε of |E| with probability at least 3/4 by Chebyshev.
pub fn estimate_edges<R: Rng + ?Sized>(
    ih: &ImplicitAnswerHypergraph,
    oracle: &mut dyn EdgeFreeOracle,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
    config: &EstimatorConfig,
) -> Result<EdgeEstimate> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    if oracle.edge_free(&to_subset(&root_parts(ih)))? {
        return Ok(EdgeEstimate {
            estimate: 0,
            exact: true,
            walks: 0,
            groups: 0,
            group_size: 0,
        });
    }
    let pilot: Vec<f64> = (0..config.pilot_walks.max(2))
        .map(|_| single_walk_estimate(ih, oracle, rng).map(|x| x as f64))
        .collect::<Result<_>>()?;
    let n = pilot.len() as f64;
    let mean = pilot.iter().sum::<f64>() / n;
    let var = pilot.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let groups = median_groups(delta);
    let group_size = if mean > 0.0 {
        let g = (4.0 * config.variance_safety * var / (epsilon * epsilon * mean * mean)).ceil();
        (g.max(1.0) as u64).min(config.max_group_size)
    } else {
        1
    };
    let walk_budget = groups * group_size;

    if config.exact_fallback && mean <= walk_budget as f64 {
        let budget = exact_call_bound(walk_budget as u128, ih.ell(), ih.domain_size());
        match count_edges_exact_oracle(ih, oracle, Some(budget.min(u64::MAX as u128) as u64)) {
            Ok(c) => {
                return Ok(EdgeEstimate {
                    estimate: c.edges,
                    exact: true,
                    walks: pilot.len() as u64,
                    groups: 0,
                    group_size: 0,
                })
            }
            Err(Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let mut means = Vec::with_capacity(groups as usize);
    for _ in 0..groups {
        let mut sum = 0f64;
        for _ in 0..group_size {
            sum += single_walk_estimate(ih, oracle, rng)? as f64;
        }
        means.push(sum / group_size as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let median = means[means.len() / 2];
    Ok(EdgeEstimate {
        estimate: median.round() as u128,
        exact: false,
        walks: pilot.len() as u64 + walk_budget,
        groups,
        group_size,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    pub estimator: EstimatorConfig,
    /// Initial cap T on simulated EdgeFree calls; grows ×4 on each restart.
    pub initial_call_cap: u64,
    pub max_call_cap: u64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            estimator: EstimatorConfig::default(),
            initial_call_cap: 1 << 10,
            max_call_cap: 1 << 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxCount {
    pub estimate: u128,
    pub exact_path: bool,
    pub call_cap: u64,
    pub per_call_delta: f64,
    pub estimator: EdgeEstimate,
    pub stats: OracleStats,
}

/// (ε,δ)-approximation of |ans(φ,D)| using only Hom(Â(φ), ·) queries:
/// δ/2 goes to the estimator, δ/2 is spread evenly over at most T
/// simulated EdgeFree calls. If the run needs more than T calls it starts
/// over with a larger T.
pub fn approx_count_answers_with(
    q: &Query,
    d: &Database,
    epsilon: f64,
    delta: f64,
    backend: HomBackend,
    seed: u64,
    config: &ApproxConfig,
) -> Result<ApproxCount> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    validate_pair(q, d)?;
    let (normal, _) = normalize_equalities(q);
    let ih = ImplicitAnswerHypergraph::new(&normal, d)?;
    let mut cap = config.initial_call_cap.max(1);
    let mut restarts = 0;
    loop {
        let per_call = delta / 2.0 / cap as f64;
        let mut oracle = ColourCodingEdgeFree::new(&ih, backend, per_call, seed).with_cap(cap);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match estimate_edges(&ih, &mut oracle, epsilon, delta / 2.0, &mut rng, &config.estimator) {
            Ok(est) => {
                let mut stats = oracle.into_stats();
                stats.estimator_samples = est.walks;
                stats.restarts = restarts;
                return Ok(ApproxCount {
                    estimate: est.estimate,
                    exact_path: est.exact,
                    call_cap: cap,
                    per_call_delta: per_call,
                    estimator: est,
                    stats,
                });
            }
            Err(Error::BudgetExceeded { calls }) if oracle.cap_hit() => {
                if cap >= config.max_call_cap {
                    return Err(Error::BudgetExceeded { calls });
                }
                cap = (cap * 4).min(config.max_call_cap);
                restarts += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn approx_count_answers(
    q: &Query,
    d: &Database,
    epsilon: f64,
    delta: f64,
    backend: HomBackend,
    seed: u64,
) -> Result<ApproxCount> {
    approx_count_answers_with(q, d, epsilon, delta, backend, seed, &ApproxConfig::default())
}
