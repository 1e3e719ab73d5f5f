//! The answer hypergraph G(φ,D) and the coloured structures Â(φ), B̂.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homsolver::{build_a, build_b, Structure};
use crate::qmodel::{validate_pair, Database, Query};
use crate::relation::Relation;

/// Unary symbol pinning variable `i` to its layer.
pub fn layer_symbol(i: usize) -> String {
    format!("@P{i}")
}

/// Unary symbols R_η and B_η for the disequality η = {x_i, x_j}.
pub fn colour_symbols(i: usize, j: usize) -> (String, String) {
    (format!("@R{i},{j}"), format!("@B{i},{j}"))
}

/// G(φ,D), kept implicit: vertices are pairs (value, layer) for the ℓ free
/// layers, and edges are the answers of (φ,D).
#[derive(Clone, Debug)]
pub struct ImplicitAnswerHypergraph {
    query: Query,
    database: Database,
    base_b: Structure,
    hat_a: Structure,
    hat_a_plain: Structure,
}

impl ImplicitAnswerHypergraph {
    /// `q` must have no equality atoms.
    pub fn new(q: &Query, d: &Database) -> Result<Self> {
        if !q.is_normalized() {
            return Err(Error::InvalidParameter(
                "normalize equalities before building the answer hypergraph".into(),
            ));
        }
        validate_pair(q, d)?;
        Ok(ImplicitAnswerHypergraph {
            query: q.clone(),
            database: d.clone(),
            base_b: build_b(q, d)?,
            hat_a: build_hat_a(q),
            hat_a_plain: hat_a_without_colours(q),
        })
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn database(&self) -> &Database {
        &self.database
    }

    /// ℓ, the uniformity of G(φ,D).
    pub fn ell(&self) -> usize {
        self.query.num_free()
    }

    pub fn domain_size(&self) -> usize {
        self.database.domain_size()
    }

    /// N = ℓ·|U(D)|.
    pub fn num_vertices(&self) -> usize {
        self.ell() * self.domain_size()
    }

    pub fn hat_a(&self) -> &Structure {
        &self.hat_a
    }

    /// Â(φ) without the colour relations.
    pub fn hat_a_plain(&self) -> &Structure {
        &self.hat_a_plain
    }

    pub fn base_b(&self) -> &Structure {
        &self.base_b
    }

    pub fn full_subset(&self) -> PartiteSubset {
        PartiteSubset::restricted(vec![(0..self.domain_size()).collect(); self.ell()])
    }
}

/// ℓ pairwise disjoint sets of vertices (value, layer) of G(φ,D).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartiteSubset {
    parts: Vec<BTreeSet<(usize, usize)>>,
}

impl PartiteSubset {
    pub fn general(parts: Vec<BTreeSet<(usize, usize)>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &parts {
            for v in p {
                if !seen.insert(*v) {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {v:?} lies in two parts"
                    )));
                }
            }
        }
        Ok(PartiteSubset { parts })
    }

    /// V_i = values × {i}.
    pub fn restricted(values: Vec<BTreeSet<usize>>) -> Self {
        PartiteSubset {
            parts: values
                .into_iter()
                .enumerate()
                .map(|(i, vs)| vs.into_iter().map(|v| (v, i)).collect())
                .collect(),
        }
    }

    pub fn parts(&self) -> &[BTreeSet<(usize, usize)>] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Values per layer when every V_i lies in layer i.
    pub fn restricted_values(&self) -> Option<Vec<BTreeSet<usize>>> {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.iter()
                    .map(|&(v, layer)| (layer == i).then_some(v))
                    .collect::<Option<BTreeSet<usize>>>()
            })
            .collect()
    }

    /// Whether the edge of the answer `tau` lies in G[V₁,…,V_ℓ], i.e. each
    /// part holds exactly one of its vertices.
    pub fn contains_edge(&self, tau: &[usize]) -> bool {
        tau.len() == self.parts.len()
            && self.parts.iter().all(|p| {
                tau.iter()
                    .enumerate()
                    .filter(|&(layer, &v)| p.contains(&(v, layer)))
                    .count()
                    == 1
            })
    }
}

/// One colouring f_η: U(D) → {r, b} per disequality, `true` meaning r.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColouringFamily {
    pub colours: Vec<Vec<bool>>,
}

impl ColouringFamily {
    pub fn random<R: Rng + ?Sized>(disequalities: usize, domain: usize, rng: &mut R) -> Self {
        ColouringFamily {
            colours: (0..disequalities)
                .map(|_| (0..domain).map(|_| rng.gen_bool(0.5)).collect())
                .collect(),
        }
    }

    /// The `index`-th family in a fixed enumeration of all 2^{|Δ|·|U|}.
    pub fn nth(disequalities: usize, domain: usize, index: u64) -> Self {
        let mut bit = 0;
        ColouringFamily {
            colours: (0..disequalities)
                .map(|_| {
                    (0..domain)
                        .map(|_| {
                            let c = index >> bit & 1 == 1;
                            bit += 1;
                            c
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn hat_a_without_colours(q: &Query) -> Structure {
    let mut s = build_a(q);
    for i in 0..q.num_vars() {
        s.add_relation(layer_symbol(i), Relation::with_tuples(1, [vec![i]]))
            .expect("variable in universe");
    }
    s
}

/// Â(φ): A(φ) plus P_i = {x_i} for every variable and R_η = {x_i},
/// B_η = {x_j} for every disequality η = {x_i, x_j}, i ≤ j.
pub fn build_hat_a(q: &Query) -> Structure {
    let mut s = hat_a_without_colours(q);
    for &(i, j) in q.disequalities() {
        let (r, b) = colour_symbols(i, j);
        s.add_relation(r, Relation::with_tuples(1, [vec![i]])).expect("in universe");
        s.add_relation(b, Relation::with_tuples(1, [vec![j]])).expect("in universe");
    }
    s
}

/// The colour-independent part of B̂(φ,D,V₁..V_ℓ,f) for one restricted
/// subset; colour relations are attached per sample.
pub struct HatBase {
    structure: Structure,
    element_values: Vec<usize>,
    disequalities: Vec<(usize, usize)>,
    names: Vec<(Arc<str>, Arc<str>)>,
    // (η, f_η) → (R_η, B_η); colourings repeat often on small domains
    colour_cache: RefCell<HashMap<(usize, Vec<u64>), (Arc<Relation>, Arc<Relation>)>>,
}

impl HatBase {
    pub fn new(ih: &ImplicitAnswerHypergraph, values: &[BTreeSet<usize>]) -> Result<Self> {
        let q = ih.query();
        if values.len() != ih.ell() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parts, got {}",
                ih.ell(),
                values.len()
            )));
        }
        let n = ih.domain_size();
        let k = q.num_vars();
        // S_i = V_i for free layers, U_i(D) otherwise
        let mut pos: Vec<Vec<Option<usize>>> = vec![vec![None; n]; k];
        let mut labels = Vec::new();
        let mut element_values = Vec::new();
        let mut layers: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, layer) in pos.iter_mut().enumerate() {
            let members: Vec<usize> = if i < ih.ell() {
                values[i].iter().copied().collect()
            } else {
                (0..n).collect()
            };
            for w in members {
                if w >= n {
                    return Err(Error::InvalidParameter(format!("value {w} outside the domain")));
                }
                layer[w] = Some(labels.len());
                layers[i].push(labels.len());
                labels.push(format!("({},{})", ih.database().domain()[w], i + 1));
                element_values.push(w);
            }
        }
        let mut s = Structure::new(labels);
        for (name, rel) in ih.base_b().relations() {
            let mut lifted = Relation::new(rel.arity);
            let mut buf = Vec::with_capacity(rel.arity);
            for t in &rel.tuples {
                lift(t, &pos, &mut buf, &mut lifted);
            }
            s.add_relation(name.to_string(), lifted)?;
        }
        for (i, members) in layers.into_iter().enumerate() {
            s.add_relation(layer_symbol(i), Relation::with_tuples(1, members.into_iter().map(|e| vec![e])))?;
        }
        let names = q
            .disequalities()
            .iter()
            .map(|&(i, j)| {
                let (r, b) = colour_symbols(i, j);
                (Arc::from(r), Arc::from(b))
            })
            .collect();
        Ok(HatBase {
            structure: s,
            element_values,
            disequalities: q.disequalities().to_vec(),
            names,
            colour_cache: RefCell::new(HashMap::new()),
        })
    }

    /// B̂ without colour relations.
    pub fn plain(&self) -> &Structure {
        &self.structure
    }

    pub fn with_colouring(&self, f: &ColouringFamily) -> Structure {
        let mut s = self.structure.clone();
        let mut cache = self.colour_cache.borrow_mut();
        for eta in 0..self.disequalities.len() {
            let (red, blue) = cache
                .entry((eta, pack(&f.colours[eta])))
                .or_insert_with(|| {
                    let (mut red, mut blue) = (Relation::new(1), Relation::new(1));
                    for (e, &w) in self.element_values.iter().enumerate() {
                        if f.colours[eta][w] {
                            red.insert(vec![e]);
                        } else {
                            blue.insert(vec![e]);
                        }
                    }
                    (Arc::new(red), Arc::new(blue))
                })
                .clone();
            let (rs, bs) = &self.names[eta];
            s.add_shared(rs.clone(), red).expect("elements in universe");
            s.add_shared(bs.clone(), blue).expect("elements in universe");
        }
        s
    }
}

fn pack(bits: &[bool]) -> Vec<u64> {
    bits.chunks(64)
        .map(|c| c.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | (b as u64) << i))
        .collect()
}

/// All tagged copies of `t` whose elements exist in B̂.
fn lift(t: &[usize], pos: &[Vec<Option<usize>>], buf: &mut Vec<usize>, out: &mut Relation) {
    let i = buf.len();
    if i == t.len() {
        out.insert(buf.clone());
        return;
    }
    for layer in pos {
        if let Some(e) = layer[t[i]] {
            buf.push(e);
            lift(t, pos, buf, out);
            buf.pop();
        }
    }
}

/// B̂(φ,D,V₁..V_ℓ,f) for a restricted subset.
pub fn build_hat_b(ih: &ImplicitAnswerHypergraph, vs: &PartiteSubset, f: &ColouringFamily) -> Result<Structure> {
    let values = vs
        .restricted_values()
        .ok_or_else(|| Error::InvalidParameter("B̂ needs a restricted partite subset".into()))?;
    Ok(HatBase::new(ih, &values)?.with_colouring(f))
}
