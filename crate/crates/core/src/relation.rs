use std::collections::BTreeSet;

/// A finite relation of fixed arity over element indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl Relation {
    pub fn new(arity: usize) -> Self {
        Relation {
            arity,
            tuples: BTreeSet::new(),
        }
    }

    pub fn with_tuples(arity: usize, tuples: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let tuples: BTreeSet<Vec<usize>> = tuples.into_iter().collect();
        debug_assert!(tuples.iter().all(|t| t.len() == arity));
        Relation { arity, tuples }
    }

    pub fn insert(&mut self, tuple: Vec<usize>) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        self.tuples.insert(tuple)
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// All tuples of `universe^arity` that are not in this relation.
    pub fn complement(&self, universe: usize) -> Relation {
        let mut out = Relation::new(self.arity);
        for tuple in all_tuples(universe, self.arity) {
            if !self.tuples.contains(&tuple) {
                out.tuples.insert(tuple);
            }
        }
        out
    }
}

/// Iterates over `0..universe` to the power `arity` in lexicographic order.
pub fn all_tuples(universe: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if universe == 0 && arity > 0 {
        0
    } else {
        universe.pow(arity as u32)
    };
    (0..total).map(move |mut code| {
        let mut tuple = vec![0; arity];
        for slot in tuple.iter_mut().rev() {
            *slot = code % universe;
            code /= universe;
        }
        tuple
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_single_pair() {
        let r = Relation::with_tuples(2, [vec![0, 1]]);
        let c = r.complement(2);
        let expected: BTreeSet<_> = [vec![0, 0], vec![1, 0], vec![1, 1]].into_iter().collect();
        assert_eq!(c.tuples, expected);
    }

    #[test]
    fn all_tuples_edge_cases() {
        assert_eq!(all_tuples(0, 2).count(), 0);
        assert_eq!(all_tuples(3, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(all_tuples(3, 2).count(), 9);
    }
}
