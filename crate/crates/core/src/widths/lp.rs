//! Two-phase tableau simplex over exact rationals, Bland's rule throughout.

use num_traits::{One, Signed, Zero};

use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `minimize objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, solution: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        LinearProgram {
            num_vars: objective.len(),
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, sense: Sense, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    num_cols: usize,
    num_original: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        // normalise to non-negative right-hand sides
        let normalised: Vec<(Vec<Rational>, Sense, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flip = match c.sense {
                        Sense::Le => Sense::Ge,
                        Sense::Ge => Sense::Le,
                        Sense::Eq => Sense::Eq,
                    };
                    (c.coeffs.iter().map(|x| -x).collect(), flip, -c.rhs.clone())
                } else {
                    (c.coeffs.clone(), c.sense, c.rhs.clone())
                }
            })
            .collect();
        let slacks = normalised.iter().filter(|c| c.1 != Sense::Eq).count();
        let artificials = normalised.iter().filter(|c| c.1 != Sense::Le).count();
        let artificial_start = n + slacks;
        let num_cols = artificial_start + artificials;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n, artificial_start);
        for (coeffs, sense, rhs) in normalised {
            let mut row = vec![Rational::zero(); num_cols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[num_cols] = rhs;
            match sense {
                Sense::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Sense::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            num_cols,
            num_original: n,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimises `cost` over the allowed columns; false when unbounded.
    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let rhs = self.num_cols;
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        reduced -= &cost[b] * &self.rows[i][j];
                    }
                }
                reduced.is_negative()
            });
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(Rational, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[rhs] / &row[j];
                    let better = match &leave {
                        None => true,
                        Some((best, _, bidx)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < *bidx)
                        }
                    };
                    if better {
                        leave = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match leave {
                None => return false,
                Some((_, i, _)) => self.pivot(i, j),
            }
        }
    }

    fn run(mut self, objective: &[Rational]) -> LpOutcome {
        let rhs = self.num_cols;
        if self.artificial_start < self.num_cols {
            let mut phase1 = vec![Rational::zero(); self.num_cols];
            for c in phase1.iter_mut().skip(self.artificial_start) {
                *c = Rational::one();
            }
            self.optimise(&phase1, self.num_cols);
            let infeasibility: Rational = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, &b)| b >= self.artificial_start)
                .map(|(i, _)| self.rows[i][rhs].clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // drive remaining artificials out of the basis or drop redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut cost = vec![Rational::zero(); self.num_cols];
        cost[..self.num_original].clone_from_slice(objective);
        if !self.optimise(&cost, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut solution = vec![Rational::zero(); self.num_original];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_original {
                solution[b] = self.rows[i][rhs].clone();
            }
        }
        let value = solution
            .iter()
            .zip(objective)
            .map(|(x, c)| x * c)
            .sum();
        LpOutcome::Optimal { value, solution }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| r(x, 1)).collect()
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  → 36 at (2, 6)
        let mut lp = LinearProgram::new(ints(&[-3, -5]));
        lp.constrain(ints(&[1, 0]), Sense::Le, r(4, 1));
        lp.constrain(ints(&[0, 2]), Sense::Le, r(12, 1));
        lp.constrain(ints(&[3, 2]), Sense::Le, r(18, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(-36, 1));
                assert_eq!(solution, ints(&[2, 6]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_optimum_with_ge_rows() {
        // triangle edge cover: min a+b+c, a+c>=1, a+b>=1, b+c>=1 → 3/2
        let mut lp = LinearProgram::new(ints(&[1, 1, 1]));
        lp.constrain(ints(&[1, 0, 1]), Sense::Ge, r(1, 1));
        lp.constrain(ints(&[1, 1, 0]), Sense::Ge, r(1, 1));
        lp.constrain(ints(&[0, 1, 1]), Sense::Ge, r(1, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(ints(&[1]));
        lp.constrain(ints(&[1]), Sense::Le, r(1, 1));
        lp.constrain(ints(&[1]), Sense::Ge, r(2, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(ints(&[-1]));
        lp.constrain(ints(&[1]), Sense::Ge, r(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_and_redundant_rows() {
        let mut lp = LinearProgram::new(ints(&[1, 2]));
        lp.constrain(ints(&[1, 1]), Sense::Eq, r(1, 1));
        lp.constrain(ints(&[2, 2]), Sense::Eq, r(2, 1));
        lp.constrain(ints(&[-1, 0]), Sense::Ge, r(-1, 2));
        match lp.solve() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(3, 2));
                assert_eq!(solution, vec![r(1, 2), r(1, 2)]);
            }
            other => panic!("{other:?}"),
        }
    }
}
