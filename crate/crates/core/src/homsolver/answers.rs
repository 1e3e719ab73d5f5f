//! Ground-truth answer enumeration and bag solution sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::qmodel::{validate_pair, Database, Query};
use crate::widths::VertexSet;

/// Default cap on `|U(D)|^|vars(φ)|` for exhaustive enumeration.
pub const DEFAULT_BRUTE_FORCE_LIMIT: u128 = 10_000_000;

enum Check<'a> {
    Positive(&'a [usize], &'a crate::relation::Relation),
    Negative(&'a [usize], &'a crate::relation::Relation),
    Distinct(usize, usize),
    Equal(usize, usize),
}

impl Check<'_> {
    fn holds(&self, asg: &[usize], buf: &mut Vec<usize>) -> bool {
        match *self {
            Check::Positive(args, r) | Check::Negative(args, r) => {
                buf.clear();
                buf.extend(args.iter().map(|&v| asg[v]));
                r.contains(buf) == matches!(self, Check::Positive(..))
            }
            Check::Distinct(i, j) => asg[i] != asg[j],
            Check::Equal(i, j) => asg[i] == asg[j],
        }
    }

    fn last_var(&self) -> usize {
        match *self {
            Check::Positive(args, _) | Check::Negative(args, _) => *args.iter().max().unwrap(),
            Check::Distinct(i, j) | Check::Equal(i, j) => i.max(j),
        }
    }
}

/// Every atom of φ as a check, grouped by the largest variable it mentions.
fn checks_by_last_var<'a>(q: &'a Query, d: &'a Database) -> Vec<Vec<Check<'a>>> {
    let rel = |name: &str| d.relation(name).expect("pair validated");
    let all = q
        .predicates()
        .iter()
        .map(|a| Check::Positive(&a.args, rel(&a.relation)))
        .chain(
            q.negated_predicates()
                .iter()
                .map(|a| Check::Negative(&a.args, rel(&a.relation))),
        )
        .chain(q.disequalities().iter().map(|&(i, j)| Check::Distinct(i, j)))
        .chain(q.equalities().iter().map(|&(i, j)| Check::Equal(i, j)));
    let mut grouped: Vec<Vec<Check>> = (0..q.num_vars()).map(|_| Vec::new()).collect();
    for c in all {
        grouped[c.last_var()].push(c);
    }
    grouped
}

fn check_guard(q: &Query, d: &Database, limit: u128) -> Result<()> {
    let space = (d.domain_size() as u128).checked_pow(q.num_vars() as u32);
    match space {
        Some(s) if s <= limit => Ok(()),
        _ => Err(Error::LimitExceeded {
            what: "brute-force assignment space",
            value: space.unwrap_or(u128::MAX),
            limit,
        }),
    }
}

/// True iff `assignment` (one domain index per variable) satisfies every
/// atom of φ, including disequalities and equalities.
pub fn is_solution(q: &Query, d: &Database, assignment: &[usize]) -> bool {
    if validate_pair(q, d).is_err() || assignment.len() != q.num_vars() {
        return false;
    }
    let mut buf = Vec::new();
    checks_by_last_var(q, d)
        .iter()
        .flatten()
        .all(|c| c.holds(assignment, &mut buf))
}

struct Enumerator<'a> {
    checks: Vec<Vec<Check<'a>>>,
    num_free: usize,
    domain: usize,
    asg: Vec<usize>,
    buf: Vec<usize>,
}

impl Enumerator<'_> {
    fn ok_at(&mut self, i: usize) -> bool {
        let (checks, asg, buf) = (&self.checks[i], &self.asg, &mut self.buf);
        checks.iter().all(|c| c.holds(asg, buf))
    }

    fn free(&mut self, i: usize, out: &mut BTreeSet<Vec<usize>>) {
        if i == self.num_free {
            if self.extends(i) {
                out.insert(self.asg[..self.num_free].to_vec());
            }
            return;
        }
        for v in 0..self.domain {
            self.asg[i] = v;
            if self.ok_at(i) {
                self.free(i + 1, out);
            }
        }
    }

    fn extends(&mut self, i: usize) -> bool {
        if i == self.asg.len() {
            return true;
        }
        for v in 0..self.domain {
            self.asg[i] = v;
            if self.ok_at(i) && self.extends(i + 1) {
                return true;
            }
        }
        false
    }
}

/// ans(φ,D) by exhaustive search; answers list domain indices in the order
/// of the free variables.
pub fn enumerate_answers_with_limit(q: &Query, d: &Database, limit: u128) -> Result<BTreeSet<Vec<usize>>> {
    validate_pair(q, d)?;
    check_guard(q, d, limit)?;
    let mut e = Enumerator {
        checks: checks_by_last_var(q, d),
        num_free: q.num_free(),
        domain: d.domain_size(),
        asg: vec![0; q.num_vars()],
        buf: Vec::new(),
    };
    let mut out = BTreeSet::new();
    e.free(0, &mut out);
    Ok(out)
}

pub fn enumerate_answers_bruteforce(q: &Query, d: &Database) -> Result<BTreeSet<Vec<usize>>> {
    enumerate_answers_with_limit(q, d, DEFAULT_BRUTE_FORCE_LIMIT)
}

pub fn count_answers_bruteforce(q: &Query, d: &Database) -> Result<u128> {
    Ok(enumerate_answers_bruteforce(q, d)?.len() as u128)
}

/// Sol(φ,D,B) for a plain CQ: assignments to B (listed in ascending
/// variable order) such that every atom has a satisfying tuple consistent
/// with them. Computed as a join of per-atom projections onto B.
pub fn sol_bag(q: &Query, d: &Database, bag: &VertexSet) -> Result<BTreeSet<Vec<usize>>> {
    if !q.is_plain_cq() {
        return Err(Error::NotPlainCq(
            "bag solutions need a query without negations, disequalities or equalities".into(),
        ));
    }
    validate_pair(q, d)?;
    if let Some(v) = bag.iter().find(|&&v| v >= q.num_vars()) {
        return Err(Error::InvalidParameter(format!("bag variable {v} is not a query variable")));
    }
    let vars: Vec<usize> = bag.iter().copied().collect();
    let mut rows: BTreeSet<Vec<Option<usize>>> = std::iter::once(vec![None; vars.len()]).collect();
    for atom in q.predicates() {
        let rel = d.relation(&atom.relation).expect("pair validated");
        // positions in the bag for each argument, if the argument is in B
        let slot: Vec<Option<usize>> = atom.args.iter().map(|v| vars.binary_search(v).ok()).collect();
        let mut partials: BTreeSet<Vec<Option<usize>>> = BTreeSet::new();
        'tuples: for t in &rel.tuples {
            let mut p = vec![None; vars.len()];
            let mut seen: Vec<Option<usize>> = vec![None; q.num_vars()];
            for (k, &v) in atom.args.iter().enumerate() {
                match seen[v] {
                    Some(w) if w != t[k] => continue 'tuples,
                    _ => seen[v] = Some(t[k]),
                }
                if let Some(s) = slot[k] {
                    p[s] = Some(t[k]);
                }
            }
            partials.insert(p);
        }
        let mut joined = BTreeSet::new();
        for r in &rows {
            for p in &partials {
                let compatible = r.iter().zip(p).all(|(a, b)| match (a, b) {
                    (Some(x), Some(y)) => x == y,
                    _ => true,
                });
                if compatible {
                    joined.insert(r.iter().zip(p).map(|(a, b)| a.or(*b)).collect());
                }
            }
        }
        rows = joined;
        if rows.is_empty() {
            return Ok(BTreeSet::new());
        }
    }
    // variables of B not pinned by any atom range over the whole domain
    let mut out = BTreeSet::new();
    for r in rows {
        expand(&r, 0, &mut Vec::with_capacity(r.len()), d.domain_size(), &mut out);
    }
    Ok(out)
}

fn expand(row: &[Option<usize>], i: usize, acc: &mut Vec<usize>, domain: usize, out: &mut BTreeSet<Vec<usize>>) {
    if i == row.len() {
        out.insert(acc.clone());
        return;
    }
    let values: Vec<usize> = match row[i] {
        Some(v) => vec![v],
        None => (0..domain).collect(),
    };
    for v in values {
        acc.push(v);
        expand(row, i + 1, acc, domain, out);
        acc.pop();
    }
}
