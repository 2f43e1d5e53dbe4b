//! Back-substitution enumerator for solutions of a linear system with each
//! variable ranging over its own finite set of vectors.
//!
//! Variables are placed in index order. A variable is solved from the first
//! unused equation whose support is already placed; otherwise it branches
//! over its set. Output is in lexicographic order of the tuples.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Field(u64),
    Integers,
}

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub var: usize,
    pub solve: Option<usize>,
    pub checks: Vec<usize>,
}

/// Placement plan for the given variable order.
pub(crate) fn plan(rows: &[Vec<i64>], order: &[usize]) -> Vec<Step> {
    let r = order.len();
    let mut position = vec![0; r];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    // each equation becomes available once its last variable is placed
    let mut available: Vec<Vec<usize>> = vec![Vec::new(); r];
    for (l, row) in rows.iter().enumerate() {
        if let Some(last) = (0..r).filter(|&v| row[v] != 0).map(|v| position[v]).max() {
            available[last].push(l);
        }
    }
    order
        .iter()
        .enumerate()
        .map(|(k, &var)| {
            let mut eqs = available[k].clone();
            let solve = if k == 0 || eqs.is_empty() {
                None
            } else {
                Some(eqs.remove(0))
            };
            Step {
                var,
                solve,
                checks: eqs,
            }
        })
        .collect()
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    // p is prime, so a^(p-2)
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

pub struct Enumerator<'a> {
    domain: Domain,
    rows: Vec<Vec<i64>>,
    sets: &'a [Vec<Vec<i64>>],
    index: Vec<HashMap<Vec<i64>, usize>>,
    steps: Vec<Step>,
    dim: usize,
    distinct: bool,
}

impl<'a> Enumerator<'a> {
    /// `rows` are residues in `[0, p)` for a field domain. With `distinct`
    /// only tuples with pairwise-distinct entries are produced.
    pub fn new(
        domain: Domain,
        rows: Vec<Vec<i64>>,
        sets: &'a [Vec<Vec<i64>>],
        distinct: bool,
    ) -> Result<Self> {
        let r = sets.len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidArgument(format!(
                "expected {r} sets, one per variable"
            )));
        }
        let dim = sets
            .iter()
            .flat_map(|s| s.first())
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        if sets.iter().flatten().any(|pt| pt.len() != dim) {
            return Err(Error::InvalidArgument(
                "points have inconsistent dimensions".into(),
            ));
        }
        let index = sets
            .iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .map(|(i, pt)| (pt.clone(), i))
                    .collect()
            })
            .collect();
        let order: Vec<usize> = (0..r).collect();
        let steps = plan(&rows, &order);
        Ok(Self {
            domain,
            rows,
            sets,
            index,
            steps,
            dim,
            distinct,
        })
    }

    /// Product of the sizes of the branching sets.
    pub fn work_estimate(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.solve.is_none())
            .map(|s| self.sets[s.var].len() as f64)
            .product()
    }

    pub fn require_within(&self, limit: f64) -> Result<()> {
        let estimate = self.work_estimate();
        if estimate > limit {
            return Err(Error::GuardExceeded { estimate, limit });
        }
        Ok(())
    }

    /// Calls `visit` with the per-variable indices into the sets of every
    /// solution, in lexicographic order. Returns `Break` if `visit` stopped.
    pub fn run(&self, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        let r = self.sets.len();
        if self.sets.iter().any(Vec::is_empty) {
            return ControlFlow::Continue(());
        }
        let mut idx = vec![0usize; r];
        let mut scratch = vec![0i64; self.dim];
        self.rec(0, &mut idx, &mut scratch, &mut visit)
    }

    fn point(&self, var: usize, idx: &[usize]) -> &[i64] {
        &self.sets[var][idx[var]]
    }

    fn row_sum(&self, l: usize, c: usize, idx: &[usize], skip: Option<usize>) -> i128 {
        let row = &self.rows[l];
        (0..row.len())
            .filter(|&v| row[v] != 0 && Some(v) != skip)
            .map(|v| row[v] as i128 * self.point(v, idx)[c] as i128)
            .sum()
    }

    fn satisfied(&self, l: usize, idx: &[usize]) -> bool {
        (0..self.dim).all(|c| {
            let s = self.row_sum(l, c, idx, None);
            match self.domain {
                Domain::Field(p) => s.rem_euclid(p as i128) == 0,
                Domain::Integers => s == 0,
            }
        })
    }

    fn solve(&self, l: usize, var: usize, idx: &[usize], out: &mut [i64]) -> bool {
        let a = self.rows[l][var] as i128;
        for c in 0..self.dim {
            let s = self.row_sum(l, c, idx, Some(var));
            out[c] = match self.domain {
                Domain::Field(p) => {
                    let p = p as i128;
                    let inv = inverse_mod(a.rem_euclid(p) as u64, p as u64) as i128;
                    ((-s).rem_euclid(p) * inv % p) as i64
                }
                Domain::Integers => {
                    if s % a != 0 {
                        return false;
                    }
                    match i64::try_from(-s / a) {
                        Ok(v) => v,
                        Err(_) => return false,
                    }
                }
            };
        }
        true
    }

    fn clashes(&self, k: usize, idx: &[usize]) -> bool {
        let var = self.steps[k].var;
        let pt = self.point(var, idx);
        self.steps[..k].iter().any(|s| self.point(s.var, idx) == pt)
    }

    fn rec(
        &self,
        k: usize,
        idx: &mut [usize],
        scratch: &mut [i64],
        visit: &mut impl FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if k == self.steps.len() {
            return visit(idx);
        }
        let step = &self.steps[k];
        let var = step.var;
        let mut place = |this: &Self, idx: &mut [usize], scratch: &mut [i64]| -> ControlFlow<()> {
            if this.distinct && this.clashes(k, idx) {
                return ControlFlow::Continue(());
            }
            if step.checks.iter().all(|&l| this.satisfied(l, idx)) {
                this.rec(k + 1, idx, scratch, visit)
            } else {
                ControlFlow::Continue(())
            }
        };
        match step.solve {
            Some(l) => {
                if !self.solve(l, var, idx, scratch) {
                    return ControlFlow::Continue(());
                }
                let Some(&i) = self.index[var].get(&scratch[..]) else {
                    return ControlFlow::Continue(());
                };
                idx[var] = i;
                place(self, idx, scratch)
            }
            None => {
                for i in 0..self.sets[var].len() {
                    idx[var] = i;
                    place(self, idx, scratch)?;
                }
                ControlFlow::Continue(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(p: i64) -> Vec<Vec<i64>> {
        (0..p).map(|x| vec![x]).collect()
    }

    #[test]
    fn plan_solves_last_variable() {
        let steps = plan(&[vec![1, -2, 1]], &[0, 1, 2]);
        assert_eq!(
            steps.iter().map(|s| s.solve).collect::<Vec<_>>(),
            vec![None, None, Some(0)]
        );
        let steps = plan(
            &[vec![1, -1, -1, 1, 0], vec![1, 0, -2, 0, 1]],
            &[0, 1, 2, 3, 4],
        );
        assert_eq!(steps[3].solve, Some(0));
        assert_eq!(steps[4].solve, Some(1));
    }

    #[test]
    fn field_and_integer_agree_with_brute_force() {
        let rows = vec![vec![1, 1, 1]]; // 1 - 2 + 1 mod 3
        let sets = vec![line(3), line(3), line(3)];
        let e = Enumerator::new(Domain::Field(3), rows, &sets, false).unwrap();
        let mut found = Vec::new();
        let _ = e.run(|idx| {
            found.push(idx.to_vec());
            ControlFlow::Continue(())
        });
        let mut brute = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    if (a + b + c) % 3 == 0 {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        assert_eq!(found, brute);

        let sets = vec![line(4), line(4), line(4)];
        let e = Enumerator::new(Domain::Integers, vec![vec![1, -2, 1]], &sets, false).unwrap();
        let mut count = 0;
        let _ = e.run(|idx| {
            assert_eq!(idx[0] + idx[2], 2 * idx[1]);
            count += 1;
            ControlFlow::Continue(())
        });
        // (a, c) of equal parity: 8 pairs
        assert_eq!(count, 8);
    }

    #[test]
    fn distinct_mode_and_early_stop() {
        let sets = vec![line(3), line(3), line(3)];
        let e = Enumerator::new(Domain::Field(3), vec![vec![1, 1, 1]], &sets, true).unwrap();
        let mut count = 0;
        let _ = e.run(|_| {
            count += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(count, 6);
        let mut seen = 0;
        let flow = e.run(|_| {
            seen += 1;
            ControlFlow::Break(())
        });
        assert_eq!((seen, flow), (1, ControlFlow::Break(())));
    }

    #[test]
    fn guard_reports_estimate() {
        let big: Vec<Vec<i64>> = (0..1000).map(|x| vec![x]).collect();
        let sets = vec![big.clone(), big.clone(), big];
        let e = Enumerator::new(Domain::Integers, vec![vec![1, -2, 1]], &sets, false).unwrap();
        assert_eq!(e.work_estimate(), 1e6);
        assert!(e.require_within(1e5).is_err());
    }
}
