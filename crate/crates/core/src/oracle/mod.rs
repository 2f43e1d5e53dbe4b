//! Exhaustive ground truth at desk scale: semishape enumeration, strong, weak
//! and multicolored freeness, exact maximum free sets and the W-shape devices.

pub mod enumerate;
pub mod search;
pub mod wshape;

use std::collections::HashSet;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::eqsys::{require_prime, FpSystem, ZSystem};
use crate::error::{Error, Result};
use enumerate::{Domain, Enumerator};

pub use search::{
    max_free, max_strongly_free, max_weakly_free, Freeness, SearchOptions, SearchResult,
};
pub use wshape::{
    build_colored_subcollection, build_colored_subcollection_with, check_family,
    classify_semishape_w, extendable_pairs, random_three_ap_family, w_system, ColoredSubcollection,
    FamilyCheck, RemovalRule, ThreeApFamily, WClass,
};

/// Enumeration work limit (product of branching set sizes).
pub const ENUMERATION_GUARD: f64 = 1e8;

/// A finite subset of `F_p^n`, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PointSet {
    p: u64,
    n: usize,
    points: Vec<Vec<u64>>,
}

impl PointSet {
    pub fn new(p: u64, n: usize, mut points: Vec<Vec<u64>>) -> Result<Self> {
        require_prime(p)?;
        for pt in &points {
            if pt.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "point {pt:?} does not have {n} coordinates"
                )));
            }
            if pt.iter().any(|&x| x >= p) {
                return Err(Error::InvalidArgument(format!(
                    "point {pt:?} has an entry outside [0, {p})"
                )));
            }
        }
        points.sort();
        points.dedup();
        Ok(Self { p, n, points })
    }

    /// Points given by their base-`p` codes, most significant coordinate first.
    pub fn from_codes(p: u64, n: usize, codes: &[u64]) -> Result<Self> {
        Self::new(p, n, codes.iter().map(|&c| decode(c, p, n)).collect())
    }

    /// The whole space `F_p^n`.
    pub fn full(p: u64, n: usize) -> Result<Self> {
        let size = space_size(p, n)?;
        Self::from_codes(p, n, &(0..size).collect::<Vec<_>>())
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<u64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, pt: &[u64]) -> bool {
        self.points
            .binary_search_by(|q| q.as_slice().cmp(pt))
            .is_ok()
    }

    pub fn codes(&self) -> Vec<u64> {
        self.points.iter().map(|pt| encode(pt, self.p)).collect()
    }

    /// `A + v`.
    pub fn translate(&self, v: &[u64]) -> Self {
        let points = self
            .points
            .iter()
            .map(|pt| pt.iter().zip(v).map(|(&a, &b)| (a + b) % self.p).collect())
            .collect();
        Self::new(self.p, self.n, points).expect("translation stays in range")
    }

    /// One CSV row of residues per point.
    pub fn to_csv(&self) -> String {
        self.points
            .iter()
            .map(|pt| csv_row(pt))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Reads CSV rows; the dimension is the row width.
    pub fn parse_csv(p: u64, text: &str) -> Result<Self> {
        let rows = parse_csv_rows(text)?;
        let n = rows.first().map_or(0, Vec::len);
        Self::new(
            p,
            n,
            rows.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|x| x.rem_euclid(p as i64) as u64)
                        .collect()
                })
                .collect(),
        )
    }

    fn signed(&self) -> Vec<Vec<i64>> {
        self.points
            .iter()
            .map(|pt| pt.iter().map(|&x| x as i64).collect())
            .collect()
    }
}

pub(crate) fn space_size(p: u64, n: usize) -> Result<u64> {
    u32::try_from(n)
        .ok()
        .and_then(|n| p.checked_pow(n))
        .ok_or(Error::TooLarge {
            what: "p^n",
            limit: u64::MAX as usize,
        })
}

pub(crate) fn encode(pt: &[u64], p: u64) -> u64 {
    pt.iter().fold(0, |acc, &x| acc * p + x)
}

pub(crate) fn decode(mut code: u64, p: u64, n: usize) -> Vec<u64> {
    let mut pt = vec![0; n];
    for c in (0..n).rev() {
        pt[c] = code % p;
        code /= p;
    }
    pt
}

pub(crate) fn csv_row<T: ToString>(pt: &[T]) -> String {
    pt.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_csv_rows(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("CSV line {}: {e}", ln + 1)))?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(Error::InvalidArgument(format!(
                    "CSV line {} has {} fields, expected {first}",
                    ln + 1,
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rows of `r`-tuples of points whose columns `X_1..X_r` have distinct
/// entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Matching {
    p: u64,
    n: usize,
    rows: Vec<Vec<Vec<u64>>>,
}

impl Matching {
    pub fn new(p: u64, n: usize, rows: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        require_prime(p)?;
        let r = rows.first().map_or(0, Vec::len);
        for row in &rows {
            if row.len() != r {
                return Err(Error::InvalidArgument(
                    "matching rows have different arities".into(),
                ));
            }
            if row
                .iter()
                .any(|pt| pt.len() != n || pt.iter().any(|&x| x >= p))
            {
                return Err(Error::InvalidArgument(format!(
                    "matching row {row:?} is not in F_{p}^{n}"
                )));
            }
        }
        for c in 0..r {
            let mut seen = HashSet::new();
            if !rows.iter().all(|row| seen.insert(&row[c])) {
                return Err(Error::Precondition(format!(
                    "column {} repeats a point",
                    c + 1
                )));
            }
        }
        Ok(Self { p, n, rows })
    }

    /// `{(a, …, a) : a ∈ A}`.
    pub fn diagonal(a: &PointSet, r: usize) -> Self {
        let rows = a.points().iter().map(|pt| vec![pt.clone(); r]).collect();
        Self {
            p: a.modulus(),
            n: a.dimension(),
            rows,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<Vec<u64>>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn columns(&self) -> Vec<PointSet> {
        (0..self.arity())
            .map(|c| {
                PointSet::new(
                    self.p,
                    self.n,
                    self.rows.iter().map(|row| row[c].clone()).collect(),
                )
                .expect("validated")
            })
            .collect()
    }

    /// One CSV row of `r·n` residues per matching row.
    pub fn to_csv(&self) -> String {
        self.rows
            .iter()
            .map(|row| csv_row(&row.concat()))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse_csv(p: u64, n: usize, text: &str) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        let flat = parse_csv_rows(text)?;
        let mut rows = Vec::new();
        for row in flat {
            if row.len() % n != 0 {
                return Err(Error::InvalidArgument(format!(
                    "matching row width {} is not a multiple of n = {n}",
                    row.len()
                )));
            }
            rows.push(
                row.chunks(n)
                    .map(|c| c.iter().map(|x| x.rem_euclid(p as i64) as u64).collect())
                    .collect(),
            );
        }
        Self::new(p, n, rows)
    }
}

fn field_enumerator<'a>(
    t: &FpSystem,
    sets: &'a [Vec<Vec<i64>>],
    distinct: bool,
) -> Result<Enumerator<'a>> {
    let rows = t
        .rows()
        .iter()
        .map(|row| row.iter().map(|&a| a as i64).collect())
        .collect();
    let e = Enumerator::new(Domain::Field(t.modulus()), rows, sets, distinct)?;
    e.require_within(ENUMERATION_GUARD)?;
    Ok(e)
}

fn check_sets(t: &FpSystem, sets: &[PointSet]) -> Result<()> {
    if sets.len() != t.variable_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} sets, got {}",
            t.variable_count(),
            sets.len()
        )));
    }
    if sets.iter().any(|s| s.modulus() != t.modulus()) {
        return Err(Error::InvalidArgument(
            "set modulus differs from the system's".into(),
        ));
    }
    let dims: HashSet<usize> = sets
        .iter()
        .filter(|s| !s.is_empty())
        .map(PointSet::dimension)
        .collect();
    if dims.len() > 1 {
        return Err(Error::InvalidArgument(
            "sets have different dimensions".into(),
        ));
    }
    Ok(())
}

/// Visits every solution in `A_1 × … × A_r` in lexicographic order.
pub fn for_each_semishape(
    t: &FpSystem,
    sets: &[PointSet],
    mut visit: impl FnMut(&[&[u64]]) -> ControlFlow<()>,
) -> Result<()> {
    check_sets(t, sets)?;
    let signed: Vec<Vec<Vec<i64>>> = sets.iter().map(PointSet::signed).collect();
    let e = field_enumerator(t, &signed, false)?;
    let mut tuple: Vec<&[u64]> = Vec::with_capacity(sets.len());
    let _ = e.run(|idx| {
        tuple.clear();
        tuple.extend(
            idx.iter()
                .enumerate()
                .map(|(v, &i)| sets[v].points()[i].as_slice()),
        );
        visit(&tuple)
    });
    Ok(())
}

/// All semishapes, at most `limit` of them.
pub fn enumerate_semishapes(
    t: &FpSystem,
    sets: &[PointSet],
    limit: Option<usize>,
) -> Result<Vec<Vec<Vec<u64>>>> {
    let mut out = Vec::new();
    for_each_semishape(t, sets, |tuple| {
        out.push(tuple.iter().map(|pt| pt.to_vec()).collect());
        if limit.is_some_and(|l| out.len() >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(out)
}

/// Visits integer solutions with variable `v` ranging over `sets[v]`.
pub fn for_each_integer_solution(
    s: &ZSystem,
    sets: &[Vec<Vec<i64>>],
    mut visit: impl FnMut(&[&[i64]]) -> ControlFlow<()>,
) -> Result<()> {
    if sets.len() != s.variable_count() {
        return Err(Error::InvalidArgument(format!(
            "expected {} sets, got {}",
            s.variable_count(),
            sets.len()
        )));
    }
    let e = Enumerator::new(Domain::Integers, s.rows(), sets, false)?;
    e.require_within(ENUMERATION_GUARD)?;
    let mut tuple: Vec<&[i64]> = Vec::with_capacity(sets.len());
    let _ = e.run(|idx| {
        tuple.clear();
        tuple.extend(idx.iter().enumerate().map(|(v, &i)| sets[v][i].as_slice()));
        visit(&tuple)
    });
    Ok(())
}

fn uniform(t: &FpSystem, a: &PointSet) -> Result<Vec<PointSet>> {
    let sets = vec![a.clone(); t.variable_count()];
    check_sets(t, &sets)?;
    Ok(sets)
}

/// Every semishape in `A` is constant.
pub fn is_strongly_free(t: &FpSystem, a: &PointSet) -> Result<bool> {
    let sets = uniform(t, a)?;
    let mut free = true;
    for_each_semishape(t, &sets, |tuple| {
        if tuple.iter().any(|pt| *pt != tuple[0]) {
            free = false;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(free)
}

/// No semishape in `A` has pairwise-distinct entries.
pub fn is_weakly_free(t: &FpSystem, a: &PointSet) -> Result<bool> {
    let sets = uniform(t, a)?;
    if a.len() < t.variable_count() {
        return Ok(true);
    }
    let signed: Vec<Vec<Vec<i64>>> = sets.iter().map(PointSet::signed).collect();
    let e = field_enumerator(t, &signed, true)?;
    Ok(e.run(|_| ControlFlow::Break(())).is_continue())
}

/// The semishapes of `X_1 × … × X_r` are exactly the rows of `m`.
pub fn is_multicolored_free(t: &FpSystem, m: &Matching) -> Result<bool> {
    if m.is_empty() {
        return Ok(true);
    }
    if m.arity() != t.variable_count() || m.modulus() != t.modulus() {
        return Err(Error::InvalidArgument(
            "matching does not fit the system".into(),
        ));
    }
    let rows: HashSet<&Vec<Vec<u64>>> = m.rows().iter().collect();
    let mut found = 0usize;
    let mut exact = true;
    let mut buf: Vec<Vec<u64>> = Vec::new();
    for_each_semishape(t, &m.columns(), |tuple| {
        buf.clear();
        buf.extend(tuple.iter().map(|pt| pt.to_vec()));
        if rows.contains(&buf) {
            found += 1;
            ControlFlow::Continue(())
        } else {
            exact = false;
            ControlFlow::Break(())
        }
    })?;
    Ok(exact && found == rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::eqsys::reduce_mod_p;

    fn sys(s: &ZSystem, p: u64) -> FpSystem {
        reduce_mod_p(s, p).unwrap().system
    }

    fn line(p: u64, pts: &[u64]) -> PointSet {
        PointSet::new(p, 1, pts.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn three_ap_semishapes_over_f3() {
        let t = sys(&catalog::s_3ap(), 3);
        let f3 = PointSet::full(3, 1).unwrap();
        let all = enumerate_semishapes(&t, &[f3.clone(), f3.clone(), f3], None).unwrap();
        assert_eq!(all.len(), 9);
        let constant = all.iter().filter(|x| x[0] == x[1] && x[1] == x[2]).count();
        let distinct = all
            .iter()
            .filter(|x| x[0] != x[1] && x[1] != x[2] && x[0] != x[2])
            .count();
        assert_eq!((constant, distinct), (3, 6));
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn w_semishapes_on_small_sets() {
        let t = sys(&catalog::s_w(), 5);
        let one = line(5, &[2]);
        assert_eq!(
            enumerate_semishapes(&t, &vec![one; 5], None).unwrap(),
            vec![vec![vec![2]; 5]]
        );
        let two = line(5, &[1, 3]);
        let all = enumerate_semishapes(&t, &vec![two; 5], None).unwrap();
        assert!(all.contains(&vec![vec![1], vec![3], vec![1], vec![3], vec![1]]));
    }

    #[test]
    fn freeness_examples() {
        let w3 = sys(&catalog::s_w(), 3);
        assert!(!is_strongly_free(&w3, &line(3, &[0, 1])).unwrap());
        assert!(is_weakly_free(&w3, &PointSet::full(3, 1).unwrap()).unwrap());
        let ap3 = sys(&catalog::s_3ap(), 3);
        assert!(is_strongly_free(&ap3, &line(3, &[0, 1])).unwrap());
        assert!(!is_weakly_free(&ap3, &PointSet::full(3, 1).unwrap()).unwrap());
        for p in [3, 5, 7] {
            assert!(is_weakly_free(&sys(&catalog::s_3ap(), p), &line(p, &[0, 1])).unwrap());
        }
        assert!(is_strongly_free(&w3, &line(3, &[2])).unwrap());
    }

    #[test]
    fn multicolored_examples() {
        let ap3 = sys(&catalog::s_3ap(), 3);
        let free = line(3, &[0, 1]);
        assert!(is_multicolored_free(&ap3, &Matching::diagonal(&free, 3)).unwrap());
        let w5 = sys(&catalog::s_w(), 5);
        assert!(!is_multicolored_free(&w5, &Matching::diagonal(&line(5, &[0, 1]), 5)).unwrap());
        let single = Matching::new(5, 1, vec![vec![vec![4]; 5]]).unwrap();
        assert!(is_multicolored_free(&w5, &single).unwrap());
    }

    #[test]
    fn matching_rejects_repeated_column_points() {
        let rows = vec![vec![vec![0], vec![1]], vec![vec![0], vec![2]]];
        assert!(matches!(
            Matching::new(3, 1, rows),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn csv_round_trips() {
        let a = PointSet::new(5, 2, vec![vec![1, 4], vec![0, 3]]).unwrap();
        assert_eq!(PointSet::parse_csv(5, &a.to_csv()).unwrap(), a);
        let m = Matching::new(
            5,
            2,
            vec![vec![vec![0, 1], vec![2, 3]], vec![vec![4, 4], vec![1, 1]]],
        )
        .unwrap();
        assert_eq!(Matching::parse_csv(5, 2, &m.to_csv()).unwrap(), m);
        assert!(PointSet::parse_csv(5, "1,2\n3").is_err());
    }

    #[test]
    fn codes_are_lexicographic() {
        let full = PointSet::full(3, 2).unwrap();
        assert_eq!(full.codes(), (0..9).collect::<Vec<_>>());
        assert_eq!(decode(encode(&[2, 1, 0], 3), 3, 3), vec![2, 1, 0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_set(p: u64, n: usize) -> impl Strategy<Value = PointSet> {
            let size = p.pow(n as u32);
            proptest::collection::btree_set(0..size, 1..(size as usize).min(7)).prop_map(
                move |codes| {
                    PointSet::from_codes(p, n, &codes.into_iter().collect::<Vec<_>>()).unwrap()
                },
            )
        }

        proptest! {
            #[test]
            fn translation_invariance(a in arb_set(5, 2), v in proptest::collection::vec(0u64..5, 2)) {
                let shifted = a.translate(&v);
                for s in [catalog::s_w(), catalog::s_3ap(), catalog::s_4ap()] {
                    let t = sys(&s, 5);
                    prop_assert_eq!(is_strongly_free(&t, &a).unwrap(), is_strongly_free(&t, &shifted).unwrap());
                    prop_assert_eq!(is_weakly_free(&t, &a).unwrap(), is_weakly_free(&t, &shifted).unwrap());
                }
            }

            #[test]
            fn strong_implies_weak(a in arb_set(7, 1)) {
                for s in [catalog::s_w(), catalog::s_3ap(), catalog::s_p()] {
                    let t = sys(&s, 7);
                    if is_strongly_free(&t, &a).unwrap() {
                        prop_assert!(is_weakly_free(&t, &a).unwrap());
                    }
                }
            }

            #[test]
            fn strong_freeness_matches_diagonal_multicoloring(a in arb_set(5, 1)) {
                let t = sys(&catalog::s_3ap(), 5);
                prop_assert_eq!(is_strongly_free(&t, &a).unwrap(), is_multicolored_free(&t, &Matching::diagonal(&a, 3)).unwrap());
            }
        }
    }
}
