use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qmodel::{Database, Query, Value};
use crate::relation::Relation;
use crate::widths::{Hypergraph, VertexSet};

/// A finite relational structure. Relations are shared behind `Arc` so that
/// structures differing in a few relations can be built cheaply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    universe: Arc<[String]>,
    relations: BTreeMap<Arc<str>, Arc<Relation>>,
}

/// Name of the complement symbol R̄ used for a negated predicate over R.
pub fn complement_symbol(relation: &str) -> String {
    format!("!{relation}")
}

impl Structure {
    pub fn new(universe: Vec<String>) -> Self {
        Structure {
            universe: universe.into(),
            relations: BTreeMap::new(),
        }
    }

    pub fn add_relation(&mut self, name: impl Into<Arc<str>>, relation: Relation) -> Result<()> {
        self.add_shared(name, Arc::new(relation))
    }

    /// Adds or replaces a relation.
    pub fn add_shared(&mut self, name: impl Into<Arc<str>>, relation: Arc<Relation>) -> Result<()> {
        let name: Arc<str> = name.into();
        if relation.arity == 0 {
            return Err(Error::InvalidParameter(format!("relation `{name}` has arity 0")));
        }
        let n = self.universe.len();
        if let Some(t) = relation.tuples.iter().find(|t| t.iter().any(|&e| e >= n)) {
            return Err(Error::InvalidParameter(format!(
                "tuple {t:?} of `{name}` leaves the universe of size {n}"
            )));
        }
        self.relations.insert(name, relation);
        Ok(())
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn universe_size(&self) -> usize {
        self.universe.len()
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name).map(Arc::as_ref)
    }

    pub fn shared_relation(&self, name: &str) -> Option<&Arc<Relation>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(k, v)| (k.as_ref(), v.as_ref()))
    }

    /// Cheap identity test: true when both share the same universe and
    /// relation allocations, falling back to structural equality.
    pub fn same_as(&self, other: &Structure) -> bool {
        let shared = Arc::ptr_eq(&self.universe, &other.universe)
            && self.relations.len() == other.relations.len()
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|((k1, v1), (k2, v2))| k1 == k2 && Arc::ptr_eq(v1, v2));
        shared || self == other
    }

    /// H(A): one hyperedge per distinct element set of a tuple.
    pub fn hypergraph(&self) -> Hypergraph {
        let edges = self
            .relations
            .values()
            .flat_map(|r| r.tuples.iter())
            .map(|t| t.iter().copied().collect::<VertexSet>());
        Hypergraph::new(0..self.universe.len(), edges).expect("tuples stay inside the universe")
    }

    /// Debug view in the database document format.
    pub fn to_json(&self) -> Result<String> {
        let mut db = Database::new(self.universe.iter().map(|s| Value::Str(s.clone())).collect())?;
        for (name, rel) in &self.relations {
            db.add_relation(name.to_string(), rel.arity).expect("fresh relation");
            for t in &rel.tuples {
                db.insert_indices(name, t.clone()).expect("tuple inside the universe");
            }
        }
        Ok(db.to_json())
    }
}

/// ‖A‖ = |sig(A)| + |U(A)| + Σ_R |R^A|·ar(R).
pub fn structure_size(s: &Structure) -> usize {
    s.relations.len()
        + s.universe.len()
        + s.relations.values().map(|r| r.len() * r.arity).sum::<usize>()
}

/// A(φ): universe vars(φ), R from predicates, R̄ from negated predicates.
pub fn build_a(q: &Query) -> Structure {
    let mut s = Structure::new(q.vars().to_vec());
    let mut rels: BTreeMap<String, Relation> = BTreeMap::new();
    let atoms = q
        .predicates()
        .iter()
        .map(|a| (a.relation.clone(), a))
        .chain(q.negated_predicates().iter().map(|a| (complement_symbol(&a.relation), a)));
    for (name, atom) in atoms {
        rels.entry(name)
            .or_insert_with(|| Relation::new(atom.args.len()))
            .insert(atom.args.clone());
    }
    for (name, r) in rels {
        s.add_relation(name, r).expect("query atoms use query variables");
    }
    s
}

/// B(φ,D): universe U(D), R^D for the positive symbols of φ and the
/// complement `U(D)^ar \ R^D` for the negated ones.
pub fn build_b(q: &Query, d: &Database) -> Result<Structure> {
    crate::qmodel::validate_pair(q, d)?;
    let mut s = Structure::new(d.domain().iter().map(Value::to_string).collect());
    for atom in q.predicates() {
        if s.relation(&atom.relation).is_none() {
            let r = d.relation(&atom.relation).expect("validated").clone();
            s.add_relation(atom.relation.clone(), r)?;
        }
    }
    for atom in q.negated_predicates() {
        let name = complement_symbol(&atom.relation);
        if s.relation(&name).is_none() {
            let r = d.relation(&atom.relation).expect("validated");
            s.add_relation(name, r.complement(d.domain_size()))?;
        }
    }
    Ok(s)
}
