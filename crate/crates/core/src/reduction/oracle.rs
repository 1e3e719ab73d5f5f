//! Homomorphism oracles and the EdgeFree simulation on top of them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homsolver::{enumerate_answers_bruteforce, hom_exists_bruteforce, Structure, TdPlan};

use super::hat::{ColouringFamily, HatBase, ImplicitAnswerHypergraph, PartiteSubset};

/// Counters for one run. All fields only ever grow.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub hom_calls: u64,
    /// EdgeFree questions answered by simulation (cache misses).
    pub edgefree_calls: u64,
    pub edgefree_cache_hits: u64,
    pub colourings_sampled: u64,
    pub estimator_samples: u64,
    pub restarts: u64,
}

impl OracleStats {
    pub fn absorb(&mut self, other: &OracleStats) {
        self.hom_calls += other.hom_calls;
        self.edgefree_calls += other.edgefree_calls;
        self.edgefree_cache_hits += other.edgefree_cache_hits;
        self.colourings_sampled += other.colourings_sampled;
        self.estimator_samples += other.estimator_samples;
        self.restarts += other.restarts;
    }
}

/// Decides whether a homomorphism A → B exists.
pub trait HomOracle {
    fn hom(&mut self, a: &Structure, b: &Structure) -> Result<bool>;
}

pub struct BruteForceHom;

impl HomOracle for BruteForceHom {
    fn hom(&mut self, a: &Structure, b: &Structure) -> Result<bool> {
        hom_exists_bruteforce(a, b)
    }
}

/// Tree-decomposition DP; one plan per distinct left-hand structure.
#[derive(Default)]
pub struct TdDpHom {
    plans: Vec<(Structure, TdPlan)>,
}

impl HomOracle for TdDpHom {
    fn hom(&mut self, a: &Structure, b: &Structure) -> Result<bool> {
        let idx = match self.plans.iter().position(|(s, _)| s.same_as(a)) {
            Some(i) => i,
            None => {
                self.plans.push((a.clone(), TdPlan::for_structure(a)));
                self.plans.len() - 1
            }
        };
        self.plans[idx].1.run(a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomBackend {
    Bruteforce,
    TdDp,
}

impl HomBackend {
    pub fn oracle(self) -> Box<dyn HomOracle> {
        match self {
            HomBackend::Bruteforce => Box::new(BruteForceHom),
            HomBackend::TdDp => Box::<TdDpHom>::default(),
        }
    }
}

impl fmt::Display for HomBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HomBackend::Bruteforce => "bruteforce",
            HomBackend::TdDp => "td-dp",
        })
    }
}

impl FromStr for HomBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bruteforce" => Ok(HomBackend::Bruteforce),
            "td-dp" => Ok(HomBackend::TdDp),
            other => Err(Error::InvalidParameter(format!("unknown homomorphism backend `{other}`"))),
        }
    }
}

/// Exact emptiness of G(φ,D)[V₁..V_ℓ] from the brute-force answer set.
pub fn edgefree_bruteforce(ih: &ImplicitAnswerHypergraph, vs: &PartiteSubset) -> Result<bool> {
    let answers = enumerate_answers_bruteforce(ih.query(), ih.database())?;
    Ok(!answers.iter().any(|tau| vs.contains_edge(tau)))
}

/// Q(δ′) = ⌈ln(1/δ′)⌉ · 4^{|Δ|}.
pub fn colouring_repetitions(delta_prime: f64, disequalities: usize) -> Result<u64> {
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::InvalidParameter(format!("δ′ = {delta_prime} outside (0, 1)")));
    }
    let logs = (1.0 / delta_prime).ln().ceil() as u64;
    4u64.checked_pow(disequalities as u32)
        .and_then(|p| p.checked_mul(logs))
        .ok_or(Error::LimitExceeded {
            what: "colouring repetitions",
            value: u128::MAX,
            limit: u64::MAX as u128,
        })
}

/// EdgeFree on a restricted subset (V_i ⊆ U_i(D)) through Hom(Â, B̂).
/// Never reports an edge that is not there; misses an edge with
/// probability at most δ′.
pub fn edgefree_restricted(
    ih: &ImplicitAnswerHypergraph,
    vs: &PartiteSubset,
    hom: &mut dyn HomOracle,
    delta_prime: f64,
    rng: &mut dyn RngCore,
    stats: &mut OracleStats,
) -> Result<bool> {
    let values = vs
        .restricted_values()
        .ok_or_else(|| Error::InvalidParameter("subset is not layer-aligned".into()))?;
    let q = colouring_repetitions(delta_prime, ih.query().disequalities().len())?;
    if values.len() != ih.ell() {
        return Err(Error::InvalidParameter(format!("expected {} parts", ih.ell())));
    }
    if values.iter().any(BTreeSet::is_empty) {
        return Ok(true);
    }
    let base = HatBase::new(ih, &values)?;
    // a coloured homomorphism is in particular an uncoloured one
    stats.hom_calls += 1;
    if !hom.hom(ih.hat_a_plain(), base.plain())? {
        return Ok(true);
    }
    let deq = ih.query().disequalities().len();
    if deq == 0 {
        return Ok(false);
    }
    for _ in 0..q {
        let f = ColouringFamily::random(deq, ih.domain_size(), rng);
        stats.colourings_sampled += 1;
        stats.hom_calls += 1;
        if hom.hom(ih.hat_a(), &base.with_colouring(&f))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Steps through all permutations of `0..n` in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// EdgeFree on an arbitrary ℓ-partite subset W₁..W_ℓ: one restricted call
/// per permutation π with V_{π(i)} = W_i ∩ U_{π(i)}(D), each at δ′/ℓ!.
pub fn edgefree_general(
    ih: &ImplicitAnswerHypergraph,
    ws: &PartiteSubset,
    hom: &mut dyn HomOracle,
    delta_prime: f64,
    rng: &mut dyn RngCore,
    stats: &mut OracleStats,
) -> Result<bool> {
    let ell = ih.ell();
    if ws.len() != ell {
        return Err(Error::InvalidParameter(format!("expected {ell} parts, got {}", ws.len())));
    }
    let per_call = delta_prime / factorial(ell);
    let mut pi: Vec<usize> = (0..ell).collect();
    loop {
        let mut values = vec![BTreeSet::new(); ell];
        for (i, part) in ws.parts().iter().enumerate() {
            values[pi[i]] = part.iter().filter(|&&(_, l)| l == pi[i]).map(|&(v, _)| v).collect();
        }
        if values.iter().all(|v| !v.is_empty())
            && !edgefree_restricted(ih, &PartiteSubset::restricted(values), hom, per_call, rng, stats)?
        {
            return Ok(false);
        }
        if !next_permutation(&mut pi) {
            return Ok(true);
        }
    }
}

/// The EdgeFree predicate as consumed by the edge counters.
pub trait EdgeFreeOracle {
    fn edge_free(&mut self, vs: &PartiteSubset) -> Result<bool>;
    fn stats(&self) -> &OracleStats;
}

/// Exact oracle backed by the brute-force answer set.
pub struct BruteForceEdgeFree {
    answers: BTreeSet<Vec<usize>>,
    stats: OracleStats,
}

impl BruteForceEdgeFree {
    pub fn new(ih: &ImplicitAnswerHypergraph) -> Result<Self> {
        Ok(BruteForceEdgeFree {
            answers: enumerate_answers_bruteforce(ih.query(), ih.database())?,
            stats: OracleStats::default(),
        })
    }
}

impl EdgeFreeOracle for BruteForceEdgeFree {
    fn edge_free(&mut self, vs: &PartiteSubset) -> Result<bool> {
        self.stats.edgefree_calls += 1;
        Ok(!self.answers.iter().any(|tau| vs.contains_edge(tau)))
    }

    fn stats(&self) -> &OracleStats {
        &self.stats
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for one subset: answers do not depend on query order.
fn subset_seed(seed: u64, vs: &PartiteSubset) -> u64 {
    let mut h = splitmix(seed);
    for (i, part) in vs.parts().iter().enumerate() {
        h = splitmix(h ^ (i as u64) ^ 0xA5A5_0000);
        for &(v, l) in part {
            h = splitmix(h ^ ((v as u64) << 16) ^ l as u64);
        }
    }
    h
}

/// Colour-coding simulation of EdgeFree through a homomorphism oracle.
/// Each subset gets its own random stream derived from the seed and the
/// subset, and answers are cached for the run.
pub struct ColourCodingEdgeFree<'a> {
    ih: &'a ImplicitAnswerHypergraph,
    hom: Box<dyn HomOracle>,
    delta_prime: f64,
    seed: u64,
    cap: Option<u64>,
    cap_hit: bool,
    cache: HashMap<PartiteSubset, bool>,
    stats: OracleStats,
}

impl<'a> ColourCodingEdgeFree<'a> {
    /// `delta_prime` is the failure probability allowed per simulated call.
    pub fn new(ih: &'a ImplicitAnswerHypergraph, backend: HomBackend, delta_prime: f64, seed: u64) -> Self {
        ColourCodingEdgeFree {
            ih,
            hom: backend.oracle(),
            delta_prime,
            seed,
            cap: None,
            cap_hit: false,
            cache: HashMap::new(),
            stats: OracleStats::default(),
        }
    }

    /// Fail with `BudgetExceeded` once more than `cap` distinct calls are needed.
    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn cap_hit(&self) -> bool {
        self.cap_hit
    }

    pub fn into_stats(self) -> OracleStats {
        self.stats
    }
}

impl EdgeFreeOracle for ColourCodingEdgeFree<'_> {
    fn edge_free(&mut self, vs: &PartiteSubset) -> Result<bool> {
        if let Some(&hit) = self.cache.get(vs) {
            self.stats.edgefree_cache_hits += 1;
            return Ok(hit);
        }
        if self.cap.is_some_and(|c| self.stats.edgefree_calls >= c) {
            self.cap_hit = true;
            return Err(Error::BudgetExceeded {
                calls: self.stats.edgefree_calls,
            });
        }
        self.stats.edgefree_calls += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(subset_seed(self.seed, vs));
        let answer = edgefree_general(
            self.ih,
            vs,
            self.hom.as_mut(),
            self.delta_prime,
            &mut rng,
            &mut self.stats,
        )?;
        self.cache.insert(vs.clone(), answer);
        Ok(answer)
    }

    fn stats(&self) -> &OracleStats {
        &self.stats
    }
}
