//! Devices around the W-shape system `x1 - x2 - x3 + x4 = 0, x1 - 2x3 + x5 = 0`:
//! classification of degenerate semishapes, extendable pairs, and the greedy
//! extraction of a 5-colored free subcollection from disjoint 3-APs.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::search::{CodeChecker, Freeness};
use super::{
    decode, encode, for_each_semishape, is_multicolored_free, is_weakly_free, space_size, Matching,
    PointSet,
};
use crate::catalog;
use crate::eqsys::{reduce_mod_p, require_prime, FpSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WClass {
    Nondegenerate,
    #[serde(rename = "4AP")]
    FourAp,
    #[serde(rename = "3AP")]
    ThreeAp,
    TwoPoint,
    Singleton,
}

pub fn w_system(p: u64) -> Result<FpSystem> {
    Ok(reduce_mod_p(&catalog::s_w(), p)?.system)
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
}

fn is_w_semishape(x: &[Vec<u64>], p: u64) -> bool {
    let n = x[0].len();
    (0..n).all(|c| {
        let v: Vec<u64> = x.iter().map(|pt| pt[c]).collect();
        (v[0] + v[3] + 2 * p - v[1] - v[2]) % p == 0
            && (v[0] + v[4] + 2 * p - 2 * v[2] % p) % p == 0
    })
}

/// Which coincidence pattern an `S_W(p)` semishape has. For `p = 3` the two
/// 4-AP patterns can hold at once; that case is reported as `FourAp`.
pub fn classify_semishape_w(p: u64, x: &[Vec<u64>]) -> Result<WClass> {
    if x.len() != 5
        || x.iter()
            .any(|pt| pt.len() != x[0].len() || pt.iter().any(|&c| c >= p))
    {
        return Err(Error::InvalidArgument(
            "expected five points of F_p^n".into(),
        ));
    }
    if !is_w_semishape(x, p) {
        return Err(Error::Precondition(
            "tuple is not a semishape of the W-shape system".into(),
        ));
    }
    let eq = |i: usize, j: usize| x[i - 1] == x[j - 1];
    let distinct: HashSet<&Vec<u64>> = x.iter().collect();
    let class = if distinct.len() == 1 {
        WClass::Singleton
    } else if distinct.len() == 5 {
        WClass::Nondegenerate
    } else if eq(1, 3) && eq(3, 5) && eq(2, 4) {
        WClass::TwoPoint
    } else if (eq(1, 2) && eq(3, 4)) || (eq(2, 3) && eq(4, 5)) {
        WClass::ThreeAp
    } else if eq(2, 5) || eq(1, 4) {
        WClass::FourAp
    } else {
        return Err(Error::Precondition(format!(
            "unexpected degenerate pattern {x:?}"
        )));
    };
    Ok(class)
}

/// Pairs `(x, y) ∈ X_i × X_j` (0-based `i`, `j`) that occur together in a
/// semishape of `X_1 × … × X_r`.
pub fn extendable_pairs(
    t: &FpSystem,
    sets: &[PointSet],
    i: usize,
    j: usize,
) -> Result<Vec<(Vec<u64>, Vec<u64>)>> {
    let r = t.variable_count();
    if i >= r || j >= r {
        return Err(Error::InvalidArgument(format!(
            "positions must be below {r}"
        )));
    }
    let mut out = BTreeSet::new();
    for_each_semishape(t, sets, |tuple| {
        out.insert((tuple[i].to_vec(), tuple[j].to_vec()));
        ControlFlow::Continue(())
    })?;
    Ok(out.into_iter().collect())
}

/// Disjoint nondegenerate 3-APs `(a, a + d, a + 2d)` in `F_p^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreeApFamily {
    pub p: u64,
    pub n: usize,
    pub progressions: Vec<[Vec<u64>; 3]>,
}

impl ThreeApFamily {
    /// Rows `(a, a, a', a', a'')`.
    pub fn matching(&self) -> Result<Matching> {
        let rows = self
            .progressions
            .iter()
            .map(|[a, b, c]| vec![a.clone(), a.clone(), b.clone(), b.clone(), c.clone()])
            .collect();
        Matching::new(self.p, self.n, rows)
    }

    pub fn union(&self) -> Result<PointSet> {
        PointSet::new(
            self.p,
            self.n,
            self.progressions
                .iter()
                .flat_map(|ap| ap.iter().cloned())
                .collect(),
        )
    }
}

/// Grows a random family of disjoint 3-APs whose union stays weakly
/// `S_W(p)`-free, up to a random target size.
pub fn random_three_ap_family<R: Rng>(p: u64, n: usize, rng: &mut R) -> Result<ThreeApFamily> {
    if p < 5 {
        return Err(Error::InvalidArgument(
            "need p >= 5 for nondegenerate disjoint families".into(),
        ));
    }
    let t = w_system(p)?;
    let checker = CodeChecker::new(&t, n, Freeness::Weak)?;
    let size = space_size(p, n)?;
    let mut starts: Vec<(u64, u64)> = (0..size)
        .flat_map(|a| (1..size).map(move |d| (a, d)))
        .collect();
    starts.shuffle(rng);
    let target = rng.gen_range(1..=(size / 3).max(1) as usize);
    let mut member = vec![false; size as usize];
    let mut list: Vec<u32> = Vec::new();
    let mut progressions = Vec::new();
    for (a, d) in starts {
        if progressions.len() >= target {
            break;
        }
        let a_pt = decode(a, p, n);
        let d_pt = decode(d, p, n);
        let b_pt: Vec<u64> = a_pt.iter().zip(&d_pt).map(|(&x, &y)| (x + y) % p).collect();
        let c_pt: Vec<u64> = b_pt.iter().zip(&d_pt).map(|(&x, &y)| (x + y) % p).collect();
        let codes = [a, encode(&b_pt, p), encode(&c_pt, p)].map(|c| c as u32);
        if codes.iter().any(|&c| member[c as usize]) {
            continue;
        }
        let mut added = 0;
        let mut ok = true;
        for &c in &codes {
            member[c as usize] = true;
            list.push(c);
            added += 1;
            if checker.violates(&member, &list, c) {
                ok = false;
                break;
            }
        }
        if ok {
            progressions.push([a_pt, b_pt, c_pt]);
        } else {
            for _ in 0..added {
                let c = list.pop().expect("pushed above");
                member[c as usize] = false;
            }
        }
    }
    Ok(ThreeApFamily { p, n, progressions })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoredSubcollection {
    pub matching: Matching,
    /// Rows of the input, `t`.
    pub t: usize,
    /// `2p^n / t`.
    pub threshold: f64,
    pub bad: Vec<Vec<u64>>,
    /// `⌈t² / (4p^n)⌉`.
    pub guaranteed: usize,
}

fn validate_family_rows(m: &Matching, p: u64) -> Result<()> {
    if m.arity() != 5 {
        return Err(Error::Precondition("rows must have five entries".into()));
    }
    for row in m.rows() {
        let d = sub(&row[2], &row[0], p);
        let ok = row[0] == row[1]
            && row[2] == row[3]
            && sub(&row[4], &row[2], p) == d
            && d.iter().any(|&x| x != 0);
        if !ok {
            return Err(Error::Precondition(format!(
                "row {row:?} is not of the form (a, a, a', a', a'') for a nondegenerate 3-AP"
            )));
        }
    }
    let cols = m.columns();
    for (i, j) in [(0, 2), (0, 4), (2, 4)] {
        if cols[i].points().iter().any(|pt| cols[j].contains(pt)) {
            return Err(Error::Precondition(format!(
                "columns {} and {} overlap",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

/// Which rows a selected first term `x` knocks out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalRule {
    /// Rows whose third term `y` has `(x, y)` extendable.
    Forward,
    /// Those, plus rows whose first term `x''` has `(x'', y_x)` extendable,
    /// `y_x` the third term of the row of `x`.
    #[default]
    Symmetric,
}

/// Steps (I)/(II) with the symmetric removal rule.
pub fn build_colored_subcollection(m: &Matching, p: u64, n: usize) -> Result<ColoredSubcollection> {
    build_colored_subcollection_with(m, p, n, RemovalRule::Symmetric)
}

/// Drops first terms with many extendable partners, then repeatedly picks
/// the least remaining first term and discards the rows it conflicts with.
pub fn build_colored_subcollection_with(
    m: &Matching,
    p: u64,
    n: usize,
    rule: RemovalRule,
) -> Result<ColoredSubcollection> {
    require_prime(p)?;
    if m.modulus() != p || (!m.is_empty() && m.dimension() != n) {
        return Err(Error::InvalidArgument(
            "matching does not live in F_p^n".into(),
        ));
    }
    if m.is_empty() {
        return Err(Error::Precondition("matching has no rows".into()));
    }
    validate_family_rows(m, p)?;
    let t_sys = w_system(p)?;
    let union = PointSet::new(
        p,
        n,
        m.rows()
            .iter()
            .flat_map(|row| row.iter().cloned())
            .collect(),
    )?;
    if !is_weakly_free(&t_sys, &union)? {
        return Err(Error::Precondition(
            "the union of the rows contains a W-shape".into(),
        ));
    }
    let t = m.len();
    let space = space_size(p, n)?;
    let cols = m.columns();
    let pairs = extendable_pairs(&t_sys, &cols, 0, 2)?;
    let mut partners: BTreeMap<&Vec<u64>, Vec<&Vec<u64>>> = BTreeMap::new();
    let mut sources: BTreeMap<&Vec<u64>, Vec<&Vec<u64>>> = BTreeMap::new();
    for (x, y) in &pairs {
        partners.entry(x).or_default().push(y);
        sources.entry(y).or_default().push(x);
    }
    let row_by_first: BTreeMap<&Vec<u64>, &Vec<Vec<u64>>> =
        m.rows().iter().map(|row| (&row[0], row)).collect();
    let first_by_third: BTreeMap<&Vec<u64>, &Vec<u64>> =
        m.rows().iter().map(|row| (&row[2], &row[0])).collect();

    let degree = |x: &Vec<u64>| partners.get(x).map_or(0, Vec::len) as u64;
    // deg >= 2p^n / t, in integers
    let (bad, mut good): (Vec<&Vec<u64>>, Vec<&Vec<u64>>) = cols[0]
        .points()
        .iter()
        .partition(|x| degree(x) * t as u64 >= 2 * space);
    let mut chosen = Vec::new();
    while let Some(&x) = good.first() {
        chosen.push(row_by_first[x].clone());
        let mut drop: HashSet<&Vec<u64>> = partners
            .get(x)
            .into_iter()
            .flatten()
            .map(|y| first_by_third[*y])
            .collect();
        drop.insert(x);
        if rule == RemovalRule::Symmetric {
            drop.extend(
                sources
                    .get(&row_by_first[x][2])
                    .into_iter()
                    .flatten()
                    .copied(),
            );
        }
        good.retain(|g| !drop.contains(g));
    }
    let guaranteed = (t * t).div_ceil(4 * space as usize);
    Ok(ColoredSubcollection {
        matching: Matching::new(p, n, chosen)?,
        t,
        threshold: 2.0 * space as f64 / t as f64,
        bad: bad.into_iter().cloned().collect(),
        guaranteed,
    })
}

/// Outcome of the proof-device checks on one family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyCheck {
    pub rows: usize,
    /// Every semishape of `X_1 × … × X_5` has `x_1 = x_2` and `x_3 = x_4`.
    pub repeated_entries: bool,
    pub extendable: usize,
    /// Extendable `(1,3)`-pairs have pairwise distinct `x - y`.
    pub distinct_differences: bool,
    pub selected: usize,
    pub guaranteed: usize,
    pub multicolored_free: bool,
    /// Selected rows in order, for determinism comparisons.
    pub selection: Vec<Vec<Vec<u64>>>,
}

impl FamilyCheck {
    pub fn passed(&self) -> bool {
        self.repeated_entries
            && self.distinct_differences
            && self.multicolored_free
            && self.selected >= self.guaranteed
    }
}

pub fn check_family(fam: &ThreeApFamily) -> Result<FamilyCheck> {
    let p = fam.p;
    let t = w_system(p)?;
    let m = fam.matching()?;
    let cols = m.columns();
    let mut repeated_entries = true;
    for_each_semishape(&t, &cols, |x| {
        if x[0] == x[1] && x[2] == x[3] {
            ControlFlow::Continue(())
        } else {
            repeated_entries = false;
            ControlFlow::Break(())
        }
    })?;
    let pairs = extendable_pairs(&t, &cols, 0, 2)?;
    let diffs: HashSet<Vec<u64>> = pairs.iter().map(|(x, y)| sub(x, y, p)).collect();
    let out = build_colored_subcollection(&m, p, fam.n)?;
    Ok(FamilyCheck {
        rows: m.len(),
        repeated_entries,
        extendable: pairs.len(),
        distinct_differences: diffs.len() == pairs.len(),
        selected: out.matching.len(),
        guaranteed: out.guaranteed,
        multicolored_free: is_multicolored_free(&t, &out.matching)?,
        selection: out.matching.rows().to_vec(),
    })
}
