//! Backtracking homomorphism search with forward checking.

use crate::error::{Error, Result};
use crate::relation::Relation;

use super::structure::Structure;

/// Checks sig(A) ⊆ sig(B) with equal arities.
pub(crate) fn check_signature(a: &Structure, b: &Structure) -> Result<()> {
    for (name, ra) in a.relations() {
        match b.relation(name) {
            Some(rb) if rb.arity == ra.arity => {}
            Some(rb) => {
                return Err(Error::SignatureMismatch(format!(
                    "{name} has arity {} in the source and {} in the target",
                    ra.arity, rb.arity
                )))
            }
            None => return Err(Error::SignatureMismatch(name.to_string())),
        }
    }
    Ok(())
}

struct Constraint<'b> {
    target: &'b Relation,
    scope: Vec<usize>,
}

struct Search<'b> {
    constraints: Vec<Constraint<'b>>,
    by_element: Vec<Vec<usize>>,
    assignment: Vec<Option<usize>>,
}

impl Search<'_> {
    fn run(&mut self, domains: Vec<Vec<usize>>) -> bool {
        let next = (0..self.assignment.len())
            .filter(|&x| self.assignment[x].is_none())
            .min_by_key(|&x| domains[x].len());
        let Some(x) = next else {
            return true;
        };
        for &value in &domains[x] {
            self.assignment[x] = Some(value);
            if let Some(pruned) = self.propagate(x, &domains) {
                if self.run(pruned) {
                    return true;
                }
            }
        }
        self.assignment[x] = None;
        false
    }

    /// Checks constraints touching `x` and narrows the domain of any element
    /// left as the only unassigned one in a constraint.
    fn propagate(&self, x: usize, domains: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
        let mut out: Option<Vec<Vec<usize>>> = None;
        let mut tuple = Vec::new();
        for &c in &self.by_element[x] {
            let con = &self.constraints[c];
            let mut open = None;
            let mut several = false;
            for &e in &con.scope {
                if self.assignment[e].is_none() {
                    match open {
                        None => open = Some(e),
                        Some(o) if o != e => several = true,
                        _ => {}
                    }
                }
            }
            if several {
                continue;
            }
            match open {
                None => {
                    tuple.clear();
                    tuple.extend(con.scope.iter().map(|&e| self.assignment[e].unwrap()));
                    if !con.target.contains(&tuple) {
                        return None;
                    }
                }
                Some(u) => {
                    let doms = out.get_or_insert_with(|| domains.to_vec());
                    doms[u].retain(|&cand| {
                        tuple.clear();
                        tuple.extend(
                            con.scope
                                .iter()
                                .map(|&e| if e == u { cand } else { self.assignment[e].unwrap() }),
                        );
                        con.target.contains(&tuple)
                    });
                    if doms[u].is_empty() {
                        return None;
                    }
                }
            }
        }
        Some(out.unwrap_or_else(|| domains.to_vec()))
    }
}

/// A homomorphism A → B as a map `U(A) → U(B)`, if one exists.
pub fn find_homomorphism(a: &Structure, b: &Structure) -> Result<Option<Vec<usize>>> {
    check_signature(a, b)?;
    let n = a.universe_size();
    let m = b.universe_size();
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    if m == 0 {
        return Ok(None);
    }
    let mut domains: Vec<Vec<usize>> = vec![(0..m).collect(); n];
    let mut constraints = Vec::new();
    for (name, ra) in a.relations() {
        let rb = b.relation(name).expect("signature checked");
        if ra.arity == 1 {
            let mut allowed = vec![false; m];
            for t in &rb.tuples {
                allowed[t[0]] = true;
            }
            for t in &ra.tuples {
                domains[t[0]].retain(|&v| allowed[v]);
            }
            continue;
        }
        for t in &ra.tuples {
            {
                constraints.push(Constraint {
                    target: rb,
                    scope: t.clone(),
                });
            }
        }
    }
    if domains.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let mut by_element = vec![Vec::new(); n];
    for (i, c) in constraints.iter().enumerate() {
        let mut seen = c.scope.clone();
        seen.sort_unstable();
        seen.dedup();
        for e in seen {
            by_element[e].push(i);
        }
    }
    let mut search = Search {
        constraints,
        by_element,
        assignment: vec![None; n],
    };
    if search.run(domains) {
        Ok(Some(search.assignment.into_iter().map(Option::unwrap).collect()))
    } else {
        Ok(None)
    }
}

pub fn hom_exists_bruteforce(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(find_homomorphism(a, b)?.is_some())
}

/// True iff `h` maps every tuple of every relation of A into B.
pub fn is_homomorphism(a: &Structure, b: &Structure, h: &[usize]) -> bool {
    h.len() == a.universe_size()
        && h.iter().all(|&v| v < b.universe_size())
        && a.relations().all(|(name, ra)| match b.relation(name) {
            None => ra.is_empty(),
            Some(rb) => ra
                .tuples
                .iter()
                .all(|t| rb.contains(&t.iter().map(|&e| h[e]).collect::<Vec<_>>())),
        })
}
