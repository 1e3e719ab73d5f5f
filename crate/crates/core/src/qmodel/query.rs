use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// A relational atom `R(v1, ..., vk)`; arguments are variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<usize>,
}

impl Atom {
    /// The distinct variables of the atom, in ascending order.
    pub fn var_set(&self) -> BTreeSet<usize> {
        self.args.iter().copied().collect()
    }
}

/// An extended conjunctive query.
///
/// Variables are stored by index: the free variables come first (in head
/// order), followed by the existential ones in the order they first occur in
/// the body (predicates, then negated predicates, disequalities, equalities).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    name: String,
    vars: Vec<String>,
    num_free: usize,
    signature: BTreeMap<String, usize>,
    predicates: Vec<Atom>,
    negated: Vec<Atom>,
    disequalities: Vec<(usize, usize)>,
    equalities: Vec<(usize, usize)>,
}

impl Query {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.vars[v]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// ℓ, the number of free variables.
    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn free_vars(&self) -> &[String] {
        &self.vars[..self.num_free]
    }

    pub fn exist_vars(&self) -> &[String] {
        &self.vars[self.num_free..]
    }

    pub fn signature(&self) -> &BTreeMap<String, usize> {
        &self.signature
    }

    /// Maximum arity of the signature (0 for an empty signature).
    pub fn max_arity(&self) -> usize {
        self.signature.values().copied().max().unwrap_or(0)
    }

    pub fn predicates(&self) -> &[Atom] {
        &self.predicates
    }

    pub fn negated_predicates(&self) -> &[Atom] {
        &self.negated
    }

    /// Disequalities as index pairs `(i, j)` with `i <= j`, sorted and deduplicated.
    pub fn disequalities(&self) -> &[(usize, usize)] {
        &self.disequalities
    }

    pub fn equalities(&self) -> &[(usize, usize)] {
        &self.equalities
    }

    pub fn is_normalized(&self) -> bool {
        self.equalities.is_empty()
    }

    /// True for a plain CQ: no negations, disequalities or equalities.
    pub fn is_plain_cq(&self) -> bool {
        self.negated.is_empty() && self.disequalities.is_empty() && self.equalities.is_empty()
    }

    /// All relational atoms, positive first.
    pub fn relational_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.predicates.iter().chain(self.negated.iter())
    }

    /// The same query with every disequality dropped.
    pub fn without_disequalities(&self) -> Query {
        Query {
            disequalities: Vec::new(),
            ..self.clone()
        }
    }

    /// Atoms whose variable tuple repeats a variable, e.g. `E(x,x)`.
    pub fn atoms_with_repeated_vars(&self) -> Vec<&Atom> {
        self.relational_atoms()
            .filter(|a| a.var_set().len() < a.args.len())
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |args: &[usize]| {
            args.iter()
                .map(|&v| self.vars[v].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}({}) :- ", self.name, self.free_vars().join(","))?;
        let mut body = Vec::new();
        for a in &self.predicates {
            body.push(format!("{}({})", a.relation, names(&a.args)));
        }
        for a in &self.negated {
            body.push(format!("!{}({})", a.relation, names(&a.args)));
        }
        for &(i, j) in &self.disequalities {
            body.push(format!("{} != {}", self.vars[i], self.vars[j]));
        }
        for &(i, j) in &self.equalities {
            body.push(format!("{} = {}", self.vars[i], self.vars[j]));
        }
        write!(f, "{}", body.join(", "))
    }
}

/// Incremental construction of a [`Query`] from variable names.
#[derive(Clone, Debug, Default)]
pub struct QueryBuilder {
    name: String,
    head: Vec<String>,
    predicates: Vec<(String, Vec<String>)>,
    negated: Vec<(String, Vec<String>)>,
    disequalities: Vec<(String, String)>,
    equalities: Vec<(String, String)>,
}

impl QueryBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        QueryBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn free(&mut self, var: impl Into<String>) -> &mut Self {
        self.head.push(var.into());
        self
    }

    pub fn atom<S: AsRef<str>>(&mut self, relation: impl Into<String>, args: &[S]) -> &mut Self {
        let args = args.iter().map(|s| s.as_ref().to_string()).collect();
        self.predicates.push((relation.into(), args));
        self
    }

    pub fn negated_atom<S: AsRef<str>>(
        &mut self,
        relation: impl Into<String>,
        args: &[S],
    ) -> &mut Self {
        let args = args.iter().map(|s| s.as_ref().to_string()).collect();
        self.negated.push((relation.into(), args));
        self
    }

    pub fn disequality(&mut self, a: impl Into<String>, b: impl Into<String>) -> &mut Self {
        self.disequalities.push((a.into(), b.into()));
        self
    }

    pub fn equality(&mut self, a: impl Into<String>, b: impl Into<String>) -> &mut Self {
        self.equalities.push((a.into(), b.into()));
        self
    }

    pub fn build(&self) -> Result<Query> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vars: Vec<String> = Vec::new();
        for v in &self.head {
            if index.contains_key(v) {
                return Err(Error::InvalidParameter(format!(
                    "variable `{v}` appears twice in the head"
                )));
            }
            index.insert(v.clone(), vars.len());
            vars.push(v.clone());
        }
        let num_free = vars.len();
        let mut intern = |name: &String, vars: &mut Vec<String>| -> usize {
            *index.entry(name.clone()).or_insert_with(|| {
                vars.push(name.clone());
                vars.len() - 1
            })
        };

        let mut signature: BTreeMap<String, usize> = BTreeMap::new();
        let mut check_arity = |rel: &str, arity: usize| -> Result<()> {
            if arity == 0 {
                return Err(Error::InvalidParameter(format!(
                    "relation `{rel}` must have positive arity"
                )));
            }
            match signature.get(rel) {
                Some(&a) if a != arity => Err(Error::ArityMismatch {
                    relation: rel.to_string(),
                    expected: a,
                    found: arity,
                }),
                Some(_) => Ok(()),
                None => {
                    signature.insert(rel.to_string(), arity);
                    Ok(())
                }
            }
        };

        let mut convert = |atoms: &[(String, Vec<String>)], vars: &mut Vec<String>| -> Result<Vec<Atom>> {
            atoms
                .iter()
                .map(|(rel, args)| {
                    check_arity(rel, args.len())?;
                    Ok(Atom {
                        relation: rel.clone(),
                        args: args.iter().map(|a| intern(a, vars)).collect(),
                    })
                })
                .collect()
        };
        let predicates = convert(&self.predicates, &mut vars)?;
        let negated = convert(&self.negated, &mut vars)?;

        let mut pair = |(a, b): &(String, String), vars: &mut Vec<String>| {
            let (i, j) = (intern(a, vars), intern(b, vars));
            (i.min(j), i.max(j))
        };
        let mut disequalities: Vec<(usize, usize)> =
            self.disequalities.iter().map(|p| pair(p, &mut vars)).collect();
        disequalities.sort_unstable();
        disequalities.dedup();
        let mut equalities: Vec<(usize, usize)> =
            self.equalities.iter().map(|p| pair(p, &mut vars)).collect();
        equalities.sort_unstable();
        equalities.dedup();

        let mut used = vec![false; vars.len()];
        for a in predicates.iter().chain(negated.iter()) {
            for &v in &a.args {
                used[v] = true;
            }
        }
        for &(i, j) in disequalities.iter().chain(equalities.iter()) {
            used[i] = true;
            used[j] = true;
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::UnboundVariable(vars[v].clone()));
        }

        Ok(Query {
            name: self.name.clone(),
            vars,
            num_free,
            signature,
            predicates,
            negated,
            disequalities,
            equalities,
        })
    }
}

/// Maps every variable of an original query to its representative after
/// equalities have been substituted away.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeMap {
    map: BTreeMap<String, String>,
    original_free: Vec<String>,
}

impl MergeMap {
    pub fn representative(&self, var: &str) -> Option<&str> {
        self.map.get(var).map(String::as_str)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Lifts an answer of the normalized query (values listed in the order
    /// of its free variables) to the original free-variable tuple.
    pub fn lift_answer<T: Clone>(&self, normalized: &Query, answer: &[T]) -> Vec<T> {
        self.original_free
            .iter()
            .map(|v| {
                let rep = &self.map[v];
                let pos = normalized.free_vars().iter().position(|f| f == rep);
                answer[pos.expect("representative of a free variable is free")].clone()
            })
            .collect()
    }
}

/// Removes all equality atoms by substituting each equivalence class of
/// variables with one representative (the class member with the smallest
/// index, so free variables represent their classes when present).
pub fn normalize_equalities(q: &Query) -> (Query, MergeMap) {
    let n = q.vars.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for &(i, j) in &q.equalities {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            let (lo, hi) = (ri.min(rj), ri.max(rj));
            parent[hi] = lo;
        }
    }
    let rep: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();

    let map: BTreeMap<String, String> = (0..n)
        .map(|v| (q.vars[v].clone(), q.vars[rep[v]].clone()))
        .collect();
    let merge = MergeMap {
        map,
        original_free: q.free_vars().to_vec(),
    };
    if q.equalities.is_empty() {
        return (q.clone(), merge);
    }

    let name = |v: usize| q.vars[rep[v]].clone();
    let mut b = QueryBuilder::new(q.name.clone());
    let mut seen = BTreeSet::new();
    for v in 0..q.num_free {
        if seen.insert(rep[v]) {
            b.free(name(v));
        }
    }
    for a in &q.predicates {
        let args: Vec<String> = a.args.iter().map(|&v| name(v)).collect();
        b.atom(a.relation.clone(), &args);
    }
    for a in &q.negated {
        let args: Vec<String> = a.args.iter().map(|&v| name(v)).collect();
        b.negated_atom(a.relation.clone(), &args);
    }
    for &(i, j) in &q.disequalities {
        b.disequality(name(i), name(j));
    }
    // A class whose members only occurred in equalities keeps one
    // representative with no atoms; record it through a reflexive equality
    // so the builder accepts it, then drop that equality again.
    let mut orphan = Vec::new();
    {
        let mut covered = vec![false; n];
        for a in q.relational_atoms() {
            for &v in &a.args {
                covered[rep[v]] = true;
            }
        }
        for &(i, j) in &q.disequalities {
            covered[rep[i]] = true;
            covered[rep[j]] = true;
        }
        for v in 0..n {
            if rep[v] == v && !covered[v] {
                orphan.push(name(v));
            }
        }
    }
    for v in &orphan {
        b.equality(v.clone(), v.clone());
    }
    let mut out = b.build().expect("normalization preserves validity");
    out.equalities.clear();
    (out, merge)
}

/// ‖φ‖: the number of variables plus the sum of atom arities, where
/// disequalities and equalities count as binary atoms.
pub fn query_size(q: &Query) -> usize {
    q.vars.len()
        + q.relational_atoms().map(|a| a.args.len()).sum::<usize>()
        + 2 * q.disequalities.len()
        + 2 * q.equalities.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmodel::parse_query;

    #[test]
    fn builder_orders_free_then_existential() {
        let q = parse_query("phi(x) :- !R(z), E(x,y)").unwrap();
        assert_eq!(q.vars(), &["x", "y", "z"]);
        assert_eq!(q.num_free(), 1);
    }

    #[test]
    fn normalize_without_equalities_is_identity() {
        let q = parse_query("phi(x) :- E(x,y), x != y").unwrap();
        let (n, m) = normalize_equalities(&q);
        assert_eq!(n, q);
        assert!(m.is_identity());
    }

    #[test]
    fn normalize_merges_free_variable() {
        let q = parse_query("phi(x,y) :- E(x,z), x = y").unwrap();
        let (n, m) = normalize_equalities(&q);
        assert_eq!(n.free_vars(), &["x"]);
        assert_eq!(m.representative("y"), Some("x"));
        assert!(n.is_normalized());
        assert_eq!(m.lift_answer(&n, &[7]), vec![7, 7]);
    }

    #[test]
    fn normalize_transitive_chain() {
        let q = parse_query("phi(x) :- E(x,w), x = y, y = z, U(z)").unwrap();
        let (n, m) = normalize_equalities(&q);
        for v in ["x", "y", "z"] {
            assert_eq!(m.representative(v), Some("x"));
        }
        assert_eq!(n.num_vars(), 2);
    }

    #[test]
    fn normalize_can_produce_self_disequality() {
        let q = parse_query("phi(x) :- E(x,y), x = y, x != y").unwrap();
        let (n, _) = normalize_equalities(&q);
        assert_eq!(n.disequalities(), &[(0, 0)]);
    }

    #[test]
    fn sizes_by_definition() {
        let q = parse_query("phi(x1,x2,x3) :- E(x1,x2), E(x2,x3)").unwrap();
        assert_eq!(query_size(&q), 7);
        let q = parse_query("phi(x) :- U(x)").unwrap();
        assert_eq!(query_size(&q), 2);
    }

    #[test]
    fn duplicate_head_variable_rejected() {
        assert!(parse_query("phi(x,x) :- E(x,y)").is_err());
    }
}
