//! Exact maximum strongly / weakly free subsets of `F_p^n` by branch and
//! bound over points in increasing base-`p` code order.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{plan, Step};
use super::{decode, space_size, PointSet};
use crate::eqsys::FpSystem;
use crate::error::{Error, Result};

/// Largest `p^n` for which the search is expected to finish.
pub const EXACT_SEARCH_LIMIT: u64 = 81;
/// Hard cap on `p^n`; beyond it no search is attempted.
pub const MAX_SEARCH_POINTS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Freeness {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Search nodes before giving up with `exhaustive = false`.
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            node_budget: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub value: usize,
    pub witness: PointSet,
    pub nodes_explored: u64,
    pub exhaustive: bool,
}

/// Incremental freeness test on points encoded as base-`p` codes.
pub(crate) struct CodeChecker {
    p: u64,
    n: usize,
    kind: Freeness,
    rows: Vec<Vec<u64>>,
    digits: Vec<Vec<u64>>,
    /// `plans[i]` places variable `i` first.
    plans: Vec<Vec<Step>>,
}

impl CodeChecker {
    pub(crate) fn new(t: &FpSystem, n: usize, kind: Freeness) -> Result<Self> {
        let p = t.modulus();
        let size = space_size(p, n)?;
        if size > MAX_SEARCH_POINTS {
            return Err(Error::TooLarge {
                what: "p^n for search",
                limit: MAX_SEARCH_POINTS as usize,
            });
        }
        let r = t.variable_count();
        let signed: Vec<Vec<i64>> = t
            .rows()
            .iter()
            .map(|row| row.iter().map(|&a| a as i64).collect())
            .collect();
        let plans = (0..r)
            .map(|i| {
                let order: Vec<usize> = std::iter::once(i)
                    .chain((0..r).filter(|&v| v != i))
                    .collect();
                plan(&signed, &order)
            })
            .collect();
        let digits = (0..size).map(|c| decode(c, p, n)).collect();
        Ok(Self {
            p,
            n,
            kind,
            rows: t.rows().to_vec(),
            digits,
            plans,
        })
    }

    pub(crate) fn size(&self) -> usize {
        self.digits.len()
    }

    /// Does `A ∪ {x}` contain a forbidden tuple through `x`? `member` and
    /// `list` already include `x`.
    pub(crate) fn violates(&self, member: &[bool], list: &[u32], x: u32) -> bool {
        let r = self.plans.len();
        if self.kind == Freeness::Weak && list.len() < r {
            return false;
        }
        let mut vals = vec![0u32; r];
        self.plans.iter().any(|steps| {
            vals[steps[0].var] = x;
            self.rec(steps, 1, member, list, &mut vals)
        })
    }

    fn rec(
        &self,
        steps: &[Step],
        k: usize,
        member: &[bool],
        list: &[u32],
        vals: &mut [u32],
    ) -> bool {
        if k == steps.len() {
            return match self.kind {
                Freeness::Strong => vals.iter().any(|&v| v != vals[0]),
                // distinctness is enforced while placing
                Freeness::Weak => true,
            };
        }
        let step = &steps[k];
        let accept = |vals: &mut [u32]| -> bool {
            if self.kind == Freeness::Weak
                && steps[..k].iter().any(|s| vals[s.var] == vals[step.var])
            {
                return false;
            }
            step.checks.iter().all(|&l| self.holds(l, vals))
                && self.rec(steps, k + 1, member, list, vals)
        };
        match step.solve {
            Some(l) => match self.solve(l, step.var, vals) {
                Some(v) if member[v as usize] => {
                    vals[step.var] = v;
                    accept(vals)
                }
                _ => false,
            },
            None => list.iter().any(|&v| {
                vals[step.var] = v;
                accept(vals)
            }),
        }
    }

    fn holds(&self, l: usize, vals: &[u32]) -> bool {
        let row = &self.rows[l];
        (0..self.n).all(|c| {
            let s: u64 = row
                .iter()
                .zip(vals)
                .filter(|(&a, _)| a != 0)
                .map(|(&a, &v)| a * self.digits[v as usize][c] % self.p)
                .sum();
            s % self.p == 0
        })
    }

    fn solve(&self, l: usize, var: usize, vals: &[u32]) -> Option<u32> {
        let row = &self.rows[l];
        let p = self.p;
        let inv = mod_inverse(row[var], p);
        let mut code = 0u64;
        for c in 0..self.n {
            let s: u64 = (0..row.len())
                .filter(|&u| u != var && row[u] != 0)
                .map(|u| row[u] * self.digits[vals[u] as usize][c] % p)
                .sum::<u64>()
                % p;
            code = code * p + (p - s) % p * inv % p;
        }
        u32::try_from(code).ok()
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

struct Shared<'a> {
    checker: &'a CodeChecker,
    budget: AtomicU64,
    explored: AtomicU64,
    truncated: AtomicBool,
    global_best: AtomicUsize,
}

impl Shared<'_> {
    /// Candidates among `pool` that keep `chosen ∪ {z}` free.
    fn compatible(&self, chosen: &[u32], member: &mut [bool], pool: &[u32]) -> Vec<u32> {
        let mut list = chosen.to_vec();
        pool.iter()
            .copied()
            .filter(|&z| {
                member[z as usize] = true;
                list.push(z);
                let ok = !self.checker.violates(member, &list, z);
                list.pop();
                member[z as usize] = false;
                ok
            })
            .collect()
    }

    fn dfs(
        &self,
        chosen: &mut Vec<u32>,
        member: &mut [bool],
        cands: &[u32],
        best: &mut (usize, Vec<u32>),
    ) {
        if self.truncated.load(Ordering::Relaxed) {
            return;
        }
        if self.budget.fetch_sub(1, Ordering::Relaxed) == 0 {
            self.budget.store(0, Ordering::Relaxed);
            self.truncated.store(true, Ordering::Relaxed);
            return;
        }
        self.explored.fetch_add(1, Ordering::Relaxed);
        if chosen.len() > best.0 {
            *best = (chosen.len(), chosen.clone());
            self.global_best.fetch_max(chosen.len(), Ordering::Relaxed);
        }
        for (i, &y) in cands.iter().enumerate() {
            let reach = chosen.len() + cands.len() - i;
            // local: must beat our own best; global: may tie, for the lexicographic merge
            if reach <= best.0 || reach < self.global_best.load(Ordering::Relaxed) {
                break;
            }
            chosen.push(y);
            member[y as usize] = true;
            let next = self.compatible(chosen, member, &cands[i + 1..]);
            self.dfs(chosen, member, &next, best);
            member[y as usize] = false;
            chosen.pop();
        }
    }

    /// Best set extending `prefix` (already known to be free).
    fn explore(&self, prefix: &[u32], pool: &[u32]) -> (usize, Vec<u32>) {
        let mut member = vec![false; self.checker.size()];
        for &c in prefix {
            member[c as usize] = true;
        }
        let cands = self.compatible(prefix, &mut member, pool);
        let mut chosen = prefix.to_vec();
        let mut best = (0, Vec::new());
        self.dfs(&mut chosen, &mut member, &cands, &mut best);
        best
    }
}

fn better(a: (usize, Vec<u32>), b: (usize, Vec<u32>)) -> (usize, Vec<u32>) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Largest free subset with the lexicographically least witness.
pub fn max_free(
    t: &FpSystem,
    n: usize,
    kind: Freeness,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let checker = CodeChecker::new(t, n, kind)?;
    let size = checker.size() as u32;
    let shared = Shared {
        checker: &checker,
        budget: AtomicU64::new(opts.node_budget),
        explored: AtomicU64::new(0),
        truncated: AtomicBool::new(false),
        global_best: AtomicUsize::new(0),
    };
    let all: Vec<u32> = (0..size).collect();
    let run = || -> (usize, Vec<u32>) {
        if t.is_balanced() {
            // translates of a free set are free, so some optimum contains 0,
            // and the least optimum starts with it
            let mut member = vec![false; size as usize];
            member[0] = true;
            if checker.violates(&member, &[0], 0) {
                return (0, Vec::new());
            }
            let seconds = shared.compatible(&[0], &mut member, &all[1..]);
            let base = (1, vec![0]);
            shared.global_best.fetch_max(1, Ordering::Relaxed);
            seconds
                .par_iter()
                .enumerate()
                .map(|(i, &c1)| shared.explore(&[0, c1], &seconds[i + 1..]))
                .collect::<Vec<_>>()
                .into_iter()
                .fold(base, better)
        } else {
            all.par_iter()
                .filter_map(|&c0| {
                    let mut member = vec![false; size as usize];
                    member[c0 as usize] = true;
                    (!checker.violates(&member, &[c0], c0))
                        .then(|| shared.explore(&[c0], &all[c0 as usize + 1..]))
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold((0, Vec::new()), better)
        }
    };
    let best = if opts.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    };
    let codes: Vec<u64> = best.1.iter().map(|&c| c as u64).collect();
    Ok(SearchResult {
        value: best.0,
        witness: PointSet::from_codes(t.modulus(), n, &codes)?,
        nodes_explored: shared.explored.load(Ordering::Relaxed),
        exhaustive: !shared.truncated.load(Ordering::Relaxed),
    })
}

pub fn max_strongly_free(t: &FpSystem, n: usize) -> Result<SearchResult> {
    max_free(t, n, Freeness::Strong, &SearchOptions::default())
}

pub fn max_weakly_free(t: &FpSystem, n: usize) -> Result<SearchResult> {
    max_free(t, n, Freeness::Weak, &SearchOptions::default())
}
