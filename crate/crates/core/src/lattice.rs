//! Sphere sets in the box `{0,…,k}^n`: norm-class counts, materialization
//! and the embedding into `F_p^n`.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dominance::dominance_of;
use crate::eqsys::{reduce_mod_p, require_prime, ZSystem};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_semishapes, for_each_integer_solution, PointSet};
use crate::structure::{build_hypergraph, is_irreducible};

/// Materialization needs `(k+1)^n` at most this.
pub const MATERIALIZE_LIMIT: u64 = 1 << 24;

fn counts_as_strings<S: Serializer>(
    counts: &BTreeMap<u64, BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(counts.iter().map(|(k, v)| (k.to_string(), v.to_string())))
}

/// Number of non-corner points of the box on each sphere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormClassTable {
    pub n: usize,
    pub k: u64,
    /// Squared norm to count, with `0…0` and `k…k` left out.
    #[serde(serialize_with = "counts_as_strings")]
    pub counts: BTreeMap<u64, BigUint>,
}

impl NormClassTable {
    /// Largest class, smallest norm on ties.
    pub fn best(&self) -> Option<(u64, &BigUint)> {
        let mut best: Option<(u64, &BigUint)> = None;
        for (&norm, count) in &self.counts {
            if best.map_or(true, |(_, c)| count > c) {
                best = Some((norm, count));
            }
        }
        best
    }

    /// `(k+1)^n`.
    pub fn box_size(&self) -> BigUint {
        BigUint::from(self.k + 1).pow(self.n as u32)
    }

    /// Whether the largest class has at least `(k+1)^n / (n k²)` points.
    pub fn meets_pigeonhole_bound(&self) -> bool {
        let Some((_, count)) = self.best() else {
            return false;
        };
        count * BigUint::from(self.n as u64 * self.k * self.k) >= self.box_size()
    }

    /// `(k+1)^n / (n k²)` as a float.
    pub fn pigeonhole_bound(&self) -> f64 {
        ((self.k + 1) as f64).powi(self.n as i32) / (self.n as f64 * (self.k * self.k) as f64)
    }
}

fn check_dims(n: usize, k: u64) -> Result<()> {
    if n < 2 || k < 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and k >= 1, got n = {n}, k = {k}"
        )));
    }
    if n > 4096 || k > 1 << 20 {
        return Err(Error::TooLarge {
            what: "box dimensions",
            limit: 4096,
        });
    }
    Ok(())
}

pub fn norm_class_counts(n: usize, k: u64) -> Result<NormClassTable> {
    check_dims(n, k)?;
    let top = n as u64 * k * k;
    let mut dist: Vec<BigUint> = vec![BigUint::zero(); top as usize + 1];
    dist[0] = BigUint::one();
    let mut reach = 0usize;
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); top as usize + 1];
        for (s, c) in dist.iter().enumerate().take(reach + 1) {
            if c.is_zero() {
                continue;
            }
            for j in 0..=k {
                next[s + (j * j) as usize] += c;
            }
        }
        reach += (k * k) as usize;
        dist = next;
    }
    dist[0] -= 1u32;
    dist[top as usize] -= 1u32;
    let counts = dist
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(s, c)| (s as u64, c))
        .collect();
    Ok(NormClassTable { n, k, counts })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SphereSet {
    pub n: usize,
    pub k: u64,
    pub radius_sq: u64,
    /// Lexicographic order.
    pub points: Vec<Vec<u64>>,
}

impl SphereSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        self.points
            .iter()
            .map(|pt| pt.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
            .collect()
    }

    fn signed(&self) -> Vec<Vec<i64>> {
        self.points
            .iter()
            .map(|pt| pt.iter().map(|&x| x as i64).collect())
            .collect()
    }
}

fn fill(prefix: &mut Vec<u64>, n: usize, k: u64, left: u64, out: &mut Vec<Vec<u64>>) {
    let slots = (n - prefix.len()) as u64;
    if slots == 0 {
        if left == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if left > slots * k * k {
        return;
    }
    for j in 0..=k {
        if j * j > left {
            break;
        }
        prefix.push(j);
        fill(prefix, n, k, left - j * j, out);
        prefix.pop();
    }
}

/// All points of `{0,…,k}^n` with squared norm `radius_sq`, corners excluded.
pub fn sphere_points(n: usize, k: u64, radius_sq: u64) -> Result<SphereSet> {
    check_dims(n, k)?;
    let size = (k + 1)
        .checked_pow(n as u32)
        .filter(|&s| s <= MATERIALIZE_LIMIT);
    if size.is_none() {
        return Err(Error::TooLarge {
            what: "(k+1)^n for materialization",
            limit: MATERIALIZE_LIMIT as usize,
        });
    }
    let top = n as u64 * k * k;
    if radius_sq == 0 || radius_sq == top {
        return Ok(SphereSet {
            n,
            k,
            radius_sq,
            points: Vec::new(),
        });
    }
    let shards: Vec<Vec<Vec<u64>>> = (0..=k)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            if first * first <= radius_sq {
                fill(&mut vec![first], n, k, radius_sq - first * first, &mut out);
            }
            out
        })
        .collect();
    Ok(SphereSet {
        n,
        k,
        radius_sq,
        points: shards.concat(),
    })
}

pub fn best_sphere_set(n: usize, k: u64) -> Result<SphereSet> {
    let table = norm_class_counts(n, k)?;
    let (radius_sq, _) = table
        .best()
        .ok_or_else(|| Error::InvalidArgument("empty box".into()))?;
    sphere_points(n, k, radius_sq)
}

pub fn embed_mod_p(y: &SphereSet, p: u64) -> Result<PointSet> {
    require_prime(p)?;
    if p <= y.k {
        return Err(Error::Precondition(format!(
            "need p > k, got p = {p}, k = {}",
            y.k
        )));
    }
    PointSet::new(p, y.n, y.points.clone())
}

/// Every equation dominant and the system irreducible.
pub fn require_dominant_irreducible(s: &ZSystem) -> Result<()> {
    s.require_balanced()?;
    for (l, eq) in s.equations().iter().enumerate() {
        if dominance_of(eq)?.is_none() {
            return Err(Error::NotDominant { index: l + 1 });
        }
    }
    if !is_irreducible(&build_hypergraph(s)).irreducible {
        return Err(Error::Reducible);
    }
    Ok(())
}

/// Whether every integer solution with all entries in `points` is constant.
pub fn verify_points(s: &ZSystem, points: &[Vec<i64>]) -> Result<bool> {
    let sets = vec![points.to_vec(); s.variable_count()];
    let mut constant_only = true;
    for_each_integer_solution(s, &sets, |tuple| {
        if tuple.iter().any(|pt| *pt != tuple[0]) {
            constant_only = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(constant_only)
}

pub fn verify_construction(s: &ZSystem, y: &SphereSet) -> Result<bool> {
    require_dominant_irreducible(s)?;
    verify_points(s, &y.signed())
}

/// Integer solutions in a box against field solutions in its image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Faithfulness {
    pub p: u64,
    pub n: usize,
    pub k: u64,
    pub integer_solutions: usize,
    pub field_solutions: usize,
    pub coincide: bool,
}

/// Compares both solution lists over `{0,…,k}^n` with `k = ⌊(p-1)/b⌋`,
/// `b` the largest dominant coefficient of `s`.
pub fn mod_p_faithfulness(s: &ZSystem, p: u64, n: usize) -> Result<Faithfulness> {
    require_prime(p)?;
    s.require_balanced()?;
    let mut b = 0;
    for (l, eq) in s.equations().iter().enumerate() {
        b = b.max(
            dominance_of(eq)?
                .ok_or(Error::NotDominant { index: l + 1 })?
                .coefficient,
        );
    }
    let k = (p - 1) / b.max(1);
    let size = (k + 1)
        .checked_pow(n as u32)
        .filter(|&s| s <= MATERIALIZE_LIMIT)
        .ok_or(Error::TooLarge {
            what: "(k+1)^n",
            limit: MATERIALIZE_LIMIT as usize,
        })?;
    let box_points: Vec<Vec<u64>> = (0..size)
        .map(|mut c| {
            let mut pt = vec![0; n];
            for x in pt.iter_mut().rev() {
                *x = c % (k + 1);
                c /= k + 1;
            }
            pt
        })
        .collect();
    let signed: Vec<Vec<i64>> = box_points
        .iter()
        .map(|pt| pt.iter().map(|&x| x as i64).collect())
        .collect();
    let mut integer = Vec::new();
    for_each_integer_solution(s, &vec![signed; s.variable_count()], |tuple| {
        integer.push(
            tuple
                .iter()
                .map(|pt| pt.iter().map(|&x| x as u64).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        );
        ControlFlow::Continue(())
    })?;
    let reduced = reduce_mod_p(s, p)?;
    let embedded = PointSet::new(p, n, box_points)?;
    let field = enumerate_semishapes(&reduced.system, &vec![embedded; s.variable_count()], None)?;
    Ok(Faithfulness {
        p,
        n,
        k,
        integer_solutions: integer.len(),
        field_solutions: field.len(),
        coincide: integer == field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::s_3ap;
    use crate::parse_system;

    fn brute(n: usize, k: u64) -> BTreeMap<u64, BigUint> {
        let mut out: BTreeMap<u64, BigUint> = BTreeMap::new();
        let size = (k + 1).pow(n as u32);
        for mut c in 0..size {
            let mut norm = 0;
            for _ in 0..n {
                let x = c % (k + 1);
                norm += x * x;
                c /= k + 1;
            }
            *out.entry(norm).or_default() += 1u32;
        }
        let top = n as u64 * k * k;
        for corner in [0, top] {
            let c = out.get_mut(&corner).unwrap();
            *c -= 1u32;
            if c.is_zero() {
                out.remove(&corner);
            }
        }
        out
    }

    fn table(pairs: &[(u64, u32)]) -> BTreeMap<u64, BigUint> {
        pairs.iter().map(|&(k, v)| (k, BigUint::from(v))).collect()
    }

    #[test]
    fn class_tables() {
        assert_eq!(norm_class_counts(2, 1).unwrap().counts, table(&[(1, 2)]));
        assert_eq!(
            norm_class_counts(2, 2).unwrap().counts,
            table(&[(1, 2), (2, 1), (4, 2), (5, 2)])
        );
        assert_eq!(
            norm_class_counts(3, 1).unwrap().counts,
            table(&[(1, 3), (2, 3)])
        );
        assert!(norm_class_counts(1, 3).is_err());
        assert!(norm_class_counts(2, 0).is_err());
    }

    #[test]
    fn dp_matches_enumeration() {
        for k in 1..=6u64 {
            for n in 2..=12usize {
                if (k + 1).pow(n as u32) > 100_000 {
                    break;
                }
                let t = norm_class_counts(n, k).unwrap();
                assert_eq!(t.counts, brute(n, k), "n={n} k={k}");
                let total: BigUint = t.counts.values().sum();
                assert_eq!(total, t.box_size() - 2u32);
                let top = (n as u64 - 1) * k * k + (k - 1) * (k - 1);
                assert!(t.counts.keys().all(|&s| (1..=top).contains(&s)));
            }
        }
    }

    #[test]
    fn pigeonhole_bound_over_grid() {
        for n in 2..=12 {
            for k in 1..=4 {
                assert!(
                    norm_class_counts(n, k).unwrap().meets_pigeonhole_bound(),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn best_sets() {
        let y = best_sphere_set(2, 1).unwrap();
        assert_eq!(y.points, vec![vec![0, 1], vec![1, 0]]);
        let y = best_sphere_set(2, 2).unwrap();
        assert_eq!((y.radius_sq, y.len()), (1, 2));
        let y = best_sphere_set(3, 1).unwrap();
        assert_eq!(y.len(), 3);
        for (n, k) in [(4, 3), (6, 2), (5, 4)] {
            let y = best_sphere_set(n, k).unwrap();
            let t = norm_class_counts(n, k).unwrap();
            assert_eq!(BigUint::from(y.len()), *t.best().unwrap().1);
            assert!(y
                .points
                .iter()
                .all(|pt| pt.iter().map(|x| x * x).sum::<u64>() == y.radius_sq));
            assert!(y.points.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(sphere_points(25, 1, 3).is_err());
    }

    #[test]
    fn embedding() {
        let y = best_sphere_set(2, 1).unwrap();
        assert_eq!(
            embed_mod_p(&y, 3).unwrap().points(),
            &[vec![0, 1], vec![1, 0]]
        );
        let y = best_sphere_set(2, 2).unwrap();
        assert_eq!(embed_mod_p(&y, 5).unwrap().points(), y.points.as_slice());
        assert!(embed_mod_p(&y, 2).is_err());
    }

    #[test]
    fn construction_examples() {
        let s = s_3ap();
        assert!(verify_construction(&s, &best_sphere_set(2, 1).unwrap()).unwrap());
        let diag = vec![vec![0, 0], vec![1, 1], vec![2, 2]];
        assert!(!verify_points(&s, &diag).unwrap());
        let eq = parse_system("x1 - 2x2 + x3 = 0").unwrap();
        assert!(verify_construction(&eq, &best_sphere_set(3, 1).unwrap()).unwrap());
        for (n, k) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            assert!(verify_construction(&s, &best_sphere_set(n, k).unwrap()).unwrap());
        }
        let sw = crate::catalog::s_w();
        assert!(verify_construction(&sw, &best_sphere_set(2, 1).unwrap()).is_err());
    }

    #[test]
    fn faithfulness_small_primes() {
        for p in [3, 5, 7] {
            let f = mod_p_faithfulness(&s_3ap(), p, 2).unwrap();
            assert!(f.coincide, "p={p}");
            assert_eq!(f.k, (p - 1) / 2);
        }
        // x1 + x2 + x3 - 3x4 has b = 3
        let s = parse_system("x1 + x2 + x3 - 3x4 = 0").unwrap();
        assert!(mod_p_faithfulness(&s, 7, 1).unwrap().coincide);
    }
}
