//! Instance generators: Hamiltonian paths, locally injective homomorphisms
//! and seeded random queries.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::database::{Database, Value};
use super::query::{Query, QueryBuilder};

/// A simple undirected graph on integer-labelled vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<i64>,
    edges: BTreeSet<(i64, i64)>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: &[(i64, i64)]) -> Result<Self> {
        let mut g = Graph::new();
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: i64) {
        self.vertices.insert(v);
    }

    pub fn add_edge(&mut self, u: i64, v: i64) -> Result<()> {
        if u == v {
            return Err(Error::InvalidParameter(format!("self-loop on vertex {u}")));
        }
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.edges.insert((u.min(v), u.max(v)));
        Ok(())
    }

    pub fn vertices(&self) -> &BTreeSet<i64> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(i64, i64)> {
        &self.edges
    }

    fn neighbours(&self, v: i64) -> BTreeSet<i64> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Parses lines `u v` (an edge) or `u` (an isolated vertex); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = Graph::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|s| s.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| {
                    Error::InvalidParameter(format!("graph line {}: expected integers", lineno + 1))
                })?;
            match nums.as_slice() {
                [v] => g.add_vertex(*v),
                [u, v] => g.add_edge(*u, *v)?,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "graph line {}: expected `u v`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut touched = BTreeSet::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
            touched.insert(u);
            touched.insert(v);
        }
        for v in self.vertices.difference(&touched) {
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}

fn graph_database(g: &Graph) -> Database {
    let mut db = Database::new(g.vertices.iter().map(|&v| Value::Int(v)).collect())
        .expect("graph vertices are distinct");
    db.add_relation("E", 2).expect("fresh relation");
    for &(u, v) in &g.edges {
        db.insert("E", &[Value::Int(u), Value::Int(v)]).expect("edge endpoints are vertices");
        db.insert("E", &[Value::Int(v), Value::Int(u)]).expect("edge endpoints are vertices");
    }
    db
}

/// Query and database whose answers are the directed Hamiltonian paths of
/// `graph`. When `n` exceeds the number of vertices the graph mentions, fresh
/// isolated vertices are added.
pub fn gen_hampath(graph: &Graph, n: usize) -> Result<(Query, Database)> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if graph.vertices.len() > n {
        return Err(Error::InvalidParameter(format!(
            "graph has {} vertices but n = {n}",
            graph.vertices.len()
        )));
    }
    let mut g = graph.clone();
    let mut next = g.vertices.iter().next_back().map_or(1, |&m| m + 1);
    while g.vertices.len() < n {
        g.add_vertex(next);
        next += 1;
    }
    let mut db = graph_database(&g);

    let var = |i: usize| format!("x{i}");
    let mut b = QueryBuilder::new("hampath");
    for i in 1..=n {
        b.free(var(i));
    }
    if n == 1 {
        // no edge atom mentions the single variable
        db.add_relation("V", 1)?;
        for v in 0..db.domain_size() {
            db.insert_indices("V", vec![v])?;
        }
        b.atom("V", &[var(1)]);
    }
    for i in 1..n {
        b.atom("E", &[var(i), var(i + 1)]);
    }
    for i in 1..=n {
        for j in i + 1..=n {
            b.disequality(var(i), var(j));
        }
    }
    Ok((b.build()?, db))
}

/// Query and database whose answers are the locally injective homomorphisms
/// from `pattern` to `target`.
pub fn gen_li_hom(pattern: &Graph, target: &Graph) -> Result<(Query, Database)> {
    if pattern.edges.is_empty() {
        return Err(Error::InvalidParameter("pattern graph has no edges".into()));
    }
    if pattern.vertices.iter().any(|&v| pattern.neighbours(v).is_empty()) {
        return Err(Error::InvalidParameter(
            "pattern graph has isolated vertices".into(),
        ));
    }
    let var = |v: i64| format!("x{v}");
    let mut b = QueryBuilder::new("lihom");
    for &v in &pattern.vertices {
        b.free(var(v));
    }
    for &(u, v) in &pattern.edges {
        b.atom("E", &[var(u), var(v)]);
    }
    let verts: Vec<i64> = pattern.vertices.iter().copied().collect();
    let nbrs: BTreeMap<i64, BTreeSet<i64>> =
        verts.iter().map(|&v| (v, pattern.neighbours(v))).collect();
    for (a, &i) in verts.iter().enumerate() {
        for &j in &verts[a + 1..] {
            if !nbrs[&i].is_disjoint(&nbrs[&j]) {
                b.disequality(var(i), var(j));
            }
        }
    }
    Ok((b.build()?, graph_database(target)))
}

/// Parameters for [`gen_random`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub vars: usize,
    pub atoms: usize,
    pub domain: usize,
    /// Probability that an atom is negated.
    pub p_neg: f64,
    /// Probability that a variable pair gets a disequality.
    pub p_diseq: f64,
    pub seed: u64,
    /// Number of free variables; drawn from `1..=vars` when `None`.
    pub free: Option<usize>,
    pub max_arity: usize,
    pub relations: usize,
    /// Probability that a tuple of the domain is a fact.
    pub density: f64,
    pub max_negated: usize,
    pub max_disequalities: usize,
}

impl RandomParams {
    pub fn new(vars: usize, atoms: usize, domain: usize, p_neg: f64, p_diseq: f64, seed: u64) -> Self {
        RandomParams {
            vars,
            atoms,
            domain,
            p_neg,
            p_diseq,
            seed,
            free: None,
            max_arity: 2,
            relations: 2,
            density: 0.5,
            max_negated: usize::MAX,
            max_disequalities: usize::MAX,
        }
    }
}

/// Seeded random query/database pair. The same parameters always produce the
/// same pair.
pub fn gen_random(p: &RandomParams) -> Result<(Query, Database)> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    if p.vars == 0 || p.atoms == 0 || p.domain == 0 || p.relations == 0 || p.max_arity == 0 {
        return bad("vars, atoms, domain, relations and max_arity must be positive");
    }
    for (name, prob) in [("p_neg", p.p_neg), ("p_diseq", p.p_diseq), ("density", p.density)] {
        if !(0.0..=1.0).contains(&prob) {
            return bad(&format!("{name} must lie in [0, 1]"));
        }
    }
    if p.atoms * p.max_arity < p.vars {
        return bad("too few atom slots to mention every variable");
    }
    if matches!(p.free, Some(f) if f > p.vars) {
        return bad("more free variables than variables");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut arities: Vec<usize> = (0..p.relations)
        .map(|_| rng.gen_range(1..=p.max_arity))
        .collect();
    arities[0] = p.max_arity;
    let widest = 0;
    let rel_name = |r: usize| format!("R{r}");

    let var = |i: usize| format!("x{}", i + 1);
    let mut uncovered: Vec<usize> = (0..p.vars).collect();
    uncovered.shuffle(&mut rng);
    let mut atoms: Vec<(usize, Vec<usize>)> = Vec::with_capacity(p.atoms);
    for k in 0..p.atoms {
        let remaining_after = p.atoms - k - 1;
        let mut r = rng.gen_range(0..p.relations);
        if uncovered.len() > remaining_after * p.max_arity + arities[r] {
            r = widest;
        }
        let args: Vec<usize> = (0..arities[r])
            .map(|_| uncovered.pop().unwrap_or_else(|| rng.gen_range(0..p.vars)))
            .collect();
        atoms.push((r, args));
    }

    let free = p.free.unwrap_or_else(|| rng.gen_range(1..=p.vars));
    let mut b = QueryBuilder::new("q");
    for i in 0..free {
        b.free(var(i));
    }
    let mut negated = 0;
    for (r, args) in &atoms {
        let names: Vec<String> = args.iter().map(|&v| var(v)).collect();
        if negated < p.max_negated && rng.gen_bool(p.p_neg) {
            negated += 1;
            b.negated_atom(rel_name(*r), &names);
        } else {
            b.atom(rel_name(*r), &names);
        }
    }
    let mut diseqs = 0;
    for i in 0..p.vars {
        for j in i + 1..p.vars {
            if diseqs < p.max_disequalities && rng.gen_bool(p.p_diseq) {
                diseqs += 1;
                b.disequality(var(i), var(j));
            }
        }
    }
    let query = b.build()?;

    let mut db = Database::with_int_domain(p.domain);
    for (r, &arity) in arities.iter().enumerate() {
        db.add_relation(rel_name(r), arity)?;
        for tuple in crate::relation::all_tuples(p.domain, arity) {
            if rng.gen_bool(p.density) {
                db.insert_indices(&rel_name(r), tuple)?;
            }
        }
    }
    Ok((query, db))
}
