use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::Relation;

use super::query::Query;

/// A domain value as it appears in database documents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

/// A finite domain plus named relations. Tuples are stored as indices into
/// the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Database {
    domain: Vec<Value>,
    index: HashMap<Value, usize>,
    relations: BTreeMap<String, Relation>,
}

#[derive(Serialize, Deserialize)]
struct RelationDoc {
    arity: usize,
    tuples: Vec<Vec<Value>>,
}

#[derive(Serialize, Deserialize)]
struct DatabaseDoc {
    domain: Vec<Value>,
    relations: BTreeMap<String, RelationDoc>,
}

impl Database {
    pub fn new(domain: Vec<Value>) -> Result<Self> {
        let mut index = HashMap::with_capacity(domain.len());
        for (i, v) in domain.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidDatabase(format!("duplicate domain value {v}")));
            }
        }
        Ok(Database {
            domain,
            index,
            relations: BTreeMap::new(),
        })
    }

    /// Domain `0..n` as integers.
    pub fn with_int_domain(n: usize) -> Self {
        Self::new((0..n as i64).map(Value::Int).collect()).expect("distinct integers")
    }

    pub fn add_relation(&mut self, name: impl Into<String>, arity: usize) -> Result<()> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::InvalidDatabase(format!(
                "relation `{name}` must have positive arity"
            )));
        }
        match self.relations.get(&name) {
            Some(r) if r.arity != arity => Err(Error::ArityMismatch {
                relation: name,
                expected: r.arity,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.relations.insert(name, Relation::new(arity));
                Ok(())
            }
        }
    }

    /// Inserts a fact given as domain indices.
    pub fn insert_indices(&mut self, name: &str, tuple: Vec<usize>) -> Result<()> {
        let n = self.domain.len();
        let rel = self
            .relations
            .get_mut(name)
            .ok_or_else(|| Error::MissingRelation(name.to_string()))?;
        if tuple.len() != rel.arity {
            return Err(Error::ArityMismatch {
                relation: name.to_string(),
                expected: rel.arity,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidDatabase(format!(
                "tuple of `{name}` references element {bad} outside the domain"
            )));
        }
        rel.insert(tuple);
        Ok(())
    }

    /// Inserts a fact given as domain values.
    pub fn insert(&mut self, name: &str, tuple: &[Value]) -> Result<()> {
        let idx = tuple
            .iter()
            .map(|v| {
                self.index.get(v).copied().ok_or_else(|| {
                    Error::InvalidDatabase(format!("value {v} in `{name}` is not in the domain"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.insert_indices(name, idx)
    }

    pub fn domain(&self) -> &[Value] {
        &self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, v: &Value) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatabaseDoc = serde_json::from_str(text)?;
        let mut db = Database::new(doc.domain)?;
        for (name, rel) in doc.relations {
            db.add_relation(name.clone(), rel.arity)?;
            for t in rel.tuples {
                db.insert(&name, &t)?;
            }
        }
        Ok(db)
    }

    pub fn to_json(&self) -> String {
        let doc = DatabaseDoc {
            domain: self.domain.clone(),
            relations: self
                .relations
                .iter()
                .map(|(name, r)| {
                    let tuples = r
                        .tuples
                        .iter()
                        .map(|t| t.iter().map(|&i| self.domain[i].clone()).collect())
                        .collect();
                    (
                        name.clone(),
                        RelationDoc {
                            arity: r.arity,
                            tuples,
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("database documents always serialize")
    }
}

/// ‖D‖ = |sig(D)| + |U(D)| + the total length of all tuples.
pub fn database_size(d: &Database) -> usize {
    d.relations.len()
        + d.domain.len()
        + d.relations.values().map(|r| r.len() * r.arity).sum::<usize>()
}

/// Checks sig(q) ⊆ sig(d) with matching arities.
pub fn validate_pair(q: &Query, d: &Database) -> Result<()> {
    for (name, &arity) in q.signature() {
        match d.relation(name) {
            None => return Err(Error::MissingRelation(name.clone())),
            Some(r) if r.arity != arity => {
                return Err(Error::ArityMismatch {
                    relation: name.clone(),
                    expected: r.arity,
                    found: arity,
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmodel::parse_query;

    fn db_with(rel: &str, arity: usize) -> Database {
        let mut d = Database::with_int_domain(3);
        d.add_relation(rel, arity).unwrap();
        d
    }

    #[test]
    fn size_of_small_databases() {
        let mut d = db_with("E", 2);
        d.insert_indices("E", vec![0, 1]).unwrap();
        d.insert_indices("E", vec![1, 2]).unwrap();
        assert_eq!(database_size(&d), 8);

        let mut d = Database::with_int_domain(5);
        d.add_relation("A", 1).unwrap();
        d.add_relation("B", 2).unwrap();
        assert_eq!(database_size(&d), 7);
    }

    #[test]
    fn validate_pair_cases() {
        let q = parse_query("phi(x) :- E(x,y)").unwrap();
        assert!(validate_pair(&q, &db_with("E", 2)).is_ok());
        assert!(matches!(
            validate_pair(&q, &db_with("E", 3)),
            Err(Error::ArityMismatch { .. })
        ));
        let q = parse_query("phi(x) :- E(x,y), R(y)").unwrap();
        assert!(matches!(
            validate_pair(&q, &db_with("E", 2)),
            Err(Error::MissingRelation(r)) if r == "R"
        ));
    }

    #[test]
    fn json_document_round_trip() {
        let text = r#"{"domain": [1, 2, "c"], "relations": {"E": {"arity": 2, "tuples": [[1, 2], [2, "c"]]}}}"#;
        let d = Database::from_json(text).unwrap();
        assert_eq!(d.domain_size(), 3);
        assert_eq!(d.relation("E").unwrap().len(), 2);
        let again = Database::from_json(&d.to_json()).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn tuple_outside_domain_rejected() {
        let text = r#"{"domain": [1], "relations": {"E": {"arity": 2, "tuples": [[1, 2]]}}}"#;
        assert!(matches!(
            Database::from_json(text),
            Err(Error::InvalidDatabase(_))
        ));
        let text = r#"{"domain": [1], "relations": {"E": {"arity": 2, "tuples": [[1]]}}}"#;
        assert!(matches!(
            Database::from_json(text),
            Err(Error::ArityMismatch { .. })
        ));
    }
}
