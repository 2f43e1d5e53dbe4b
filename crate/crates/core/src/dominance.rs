//! Dominant equations, standard forms, dominant reductions and the lower
//! bounds they yield.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::eqsys::{require_prime, ZEquation, ZSystem};
use crate::error::{Error, Result};
use crate::structure::{build_hypergraph, is_irreducible, UnionFind};

pub const DEFAULT_EPSILON: f64 = 1.0 / 16.0;
/// Exhaustive reduction search is limited to this many equations.
pub const EXHAUSTIVE_MAX_EQUATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dominance {
    /// 0-based; two entries only for the two-sided form `b x_i - b x_j`.
    pub indices: Vec<usize>,
    pub coefficient: u64,
}

/// Dominance data of a balanced equation, `None` when it is not dominant.
pub fn dominance_of(eq: &ZEquation) -> Result<Option<Dominance>> {
    if !eq.is_balanced() {
        return Err(Error::Unbalanced {
            index: 0,
            sum: eq.coefficient_sum(),
        });
    }
    let c = eq.coeffs();
    let pos: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0).collect();
    let neg: Vec<usize> = (0..c.len()).filter(|&i| c[i] < 0).collect();
    let mut indices = Vec::new();
    if pos.len() == 1 {
        indices.push(pos[0]);
    }
    if neg.len() == 1 {
        indices.push(neg[0]);
    }
    if indices.is_empty() {
        return Ok(None);
    }
    indices.sort_unstable();
    let coefficient = c[indices[0]].unsigned_abs();
    Ok(Some(Dominance {
        indices,
        coefficient,
    }))
}

/// `b'_j x_j = Σ b'_i x_i` with all `b'_i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StandardForm {
    pub dominant_index: usize,
    pub dominant_coefficient: u64,
    /// `(index, coefficient)` pairs in index order.
    pub rhs: Vec<(usize, u64)>,
}

impl StandardForm {
    pub fn render(&self, names: &[String]) -> String {
        let term = |c: u64, i: usize| {
            if c == 1 {
                names[i].clone()
            } else {
                format!("{c}{}", names[i])
            }
        };
        let rhs: Vec<String> = self.rhs.iter().map(|&(i, c)| term(c, i)).collect();
        format!(
            "{} = {}",
            term(self.dominant_coefficient, self.dominant_index),
            rhs.join(" + ")
        )
    }
}

pub fn standard_form(eq: &ZEquation) -> Result<StandardForm> {
    let dom = dominance_of(eq)?.ok_or(Error::NotDominant { index: 0 })?;
    let j = dom.indices[0];
    let c = eq.coeffs();
    let sign = c[j].signum();
    let rhs = (0..c.len())
        .filter(|&i| i != j && c[i] != 0)
        .map(|i| (i, (-sign * c[i]) as u64))
        .collect();
    Ok(StandardForm {
        dominant_index: j,
        dominant_coefficient: dom.coefficient,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominantSubset {
    /// 0-based equation indices.
    pub equations: Vec<usize>,
    /// Largest dominant coefficient among its equations.
    pub coefficient: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominantSubsystems {
    /// The maximal dominant subsystem: every dominant equation, 0-based.
    pub maximal: Vec<usize>,
    pub table: Vec<Option<Dominance>>,
    /// Dominant subsystems that are irreducible in the original variables.
    pub irreducible: Vec<DominantSubset>,
}

fn max_coefficient(table: &[Option<Dominance>], eqs: &[usize]) -> u64 {
    eqs.iter()
        .filter_map(|&i| table[i].as_ref())
        .map(|d| d.coefficient)
        .max()
        .unwrap_or(0)
}

fn dominance_table(s: &ZSystem) -> Result<Vec<Option<Dominance>>> {
    s.equations()
        .iter()
        .enumerate()
        .map(|(l, e)| {
            dominance_of(e).map_err(|_| Error::Unbalanced {
                index: l + 1,
                sum: e.coefficient_sum(),
            })
        })
        .collect()
}

pub fn dominant_subsystems(s: &ZSystem) -> Result<DominantSubsystems> {
    let table = dominance_table(s)?;
    let maximal: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_some()).collect();
    let mut irreducible = Vec::new();
    if maximal.len() <= EXHAUSTIVE_MAX_EQUATIONS {
        for mask in 1u32..(1 << maximal.len()) {
            let eqs: Vec<usize> = (0..maximal.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| maximal[b])
                .collect();
            if is_irreducible(&build_hypergraph(&s.subsystem(&eqs)?)).irreducible {
                irreducible.push(DominantSubset {
                    coefficient: max_coefficient(&table, &eqs),
                    equations: eqs,
                });
            }
        }
        irreducible.sort_by(|a, b| {
            a.equations
                .len()
                .cmp(&b.equations.len())
                .then_with(|| a.equations.cmp(&b.equations))
        });
    }
    Ok(DominantSubsystems {
        maximal,
        table,
        irreducible,
    })
}

/// Original 1-based indices carried by a variable name: `x3` or `x_{1_2_6}`.
pub fn label_of(name: &str, fallback: usize) -> Vec<usize> {
    let parsed = if let Some(inner) = name.strip_prefix("x_{").and_then(|s| s.strip_suffix('}')) {
        inner
            .split('_')
            .map(str::parse)
            .collect::<std::result::Result<Vec<usize>, _>>()
            .ok()
    } else {
        name.strip_prefix('x')
            .and_then(|s| s.parse().ok())
            .map(|i| vec![i])
    };
    parsed.unwrap_or_else(|| vec![fallback + 1])
}

pub fn label_name(label: &[usize]) -> String {
    if label.len() == 1 {
        format!("x{}", label[0])
    } else {
        let parts: Vec<String> = label.iter().map(usize::to_string).collect();
        format!("x_{{{}}}", parts.join("_"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    /// 0-based equation indices in the system before this step.
    pub subsystem: Vec<usize>,
    /// Old variable index to new variable index.
    pub merge: Vec<usize>,
    /// Sorted original indices making up each new variable.
    pub labels: Vec<Vec<usize>>,
    #[serde(serialize_with = "serialize_system")]
    pub result: ZSystem,
    pub coefficient: u64,
}

fn serialize_system<S: serde::Serializer>(
    s: &ZSystem,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&s.render())
}

/// Reduces `s` by the dominant subsystem `sub` (0-based equation indices).
pub fn dominant_reduce(s: &ZSystem, sub: &[usize]) -> Result<ZSystem> {
    reduce_step(s, sub).map(|step| step.result)
}

fn reduce_step(s: &ZSystem, sub: &[usize]) -> Result<ReductionStep> {
    let table = dominance_table(s)?;
    for &i in sub {
        match table.get(i) {
            None => {
                return Err(Error::InvalidArgument(format!(
                    "equation index {} out of range",
                    i + 1
                )))
            }
            Some(None) => return Err(Error::NotDominant { index: i + 1 }),
            Some(Some(_)) => {}
        }
    }
    let r = s.variable_count();
    let mut uf = UnionFind::new(r);
    for &i in sub {
        let support = s.equations()[i].support();
        for w in support.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    // classes ordered by their minimum old index; union-find keeps the minimum as root
    let mut merge = vec![usize::MAX; r];
    let mut root_to_new = vec![usize::MAX; r];
    let mut old_labels: Vec<Vec<usize>> = Vec::new();
    for v in 0..r {
        let root = uf.find(v);
        if root_to_new[root] == usize::MAX {
            root_to_new[root] = old_labels.len();
            old_labels.push(Vec::new());
        }
        merge[v] = root_to_new[root];
        old_labels[merge[v]].extend(label_of(&s.names()[v], v));
    }
    for l in &mut old_labels {
        l.sort_unstable();
    }
    let new_r = old_labels.len();
    let mut rows = Vec::new();
    for e in s.equations() {
        let mut row = vec![0i64; new_r];
        for (v, &c) in e.coeffs().iter().enumerate() {
            row[merge[v]] = row[merge[v]].checked_add(c).ok_or(Error::TooLarge {
                what: "merged coefficient",
                limit: i64::MAX as usize,
            })?;
        }
        let nonzero = row.iter().filter(|&&c| c != 0).count();
        debug_assert!(
            nonzero != 1,
            "balanced rows cannot collapse to a single variable"
        );
        if nonzero > 0 {
            rows.push(row);
        }
    }
    let names = old_labels.iter().map(|l| label_name(l)).collect();
    let result = ZSystem::with_names(rows, names)?;
    Ok(ReductionStep {
        subsystem: sub.to_vec(),
        merge,
        labels: old_labels,
        result,
        coefficient: max_coefficient(&table, sub),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionTrace {
    #[serde(serialize_with = "serialize_system")]
    pub initial: ZSystem,
    pub steps: Vec<ReductionStep>,
    #[serde(serialize_with = "serialize_system")]
    pub terminal: ZSystem,
    /// True iff the terminal system is `∅(1)`.
    pub reaches_empty_one: bool,
    pub b_tilde: u64,
}

impl ReductionTrace {
    fn from_steps(initial: &ZSystem, steps: Vec<ReductionStep>) -> Self {
        let terminal = steps
            .last()
            .map_or_else(|| initial.clone(), |s| s.result.clone());
        let reaches_empty_one = terminal.variable_count() == 1 && terminal.equation_count() == 0;
        let b_tilde = steps.iter().map(|s| s.coefficient).max().unwrap_or(0);
        Self {
            initial: initial.clone(),
            steps,
            terminal,
            reaches_empty_one,
            b_tilde,
        }
    }

    /// The systems in order, initial first, as the trace is usually written.
    pub fn render(&self) -> String {
        let mut out = self.initial.render();
        for (k, step) in self.steps.iter().enumerate() {
            let eqs: Vec<String> = step.subsystem.iter().map(|i| (i + 1).to_string()).collect();
            out.push_str(&format!(
                "\n-- step {}: reduce by equations {{{}}}, dominant coefficient {}\n{}",
                k + 1,
                eqs.join(","),
                step.coefficient,
                step.result.render()
            ));
        }
        out
    }
}

/// Greedy reduction by the maximal dominant subsystem; stops when no
/// equations remain or none is dominant. The trace may end anywhere.
pub fn greedy_trace(s: &ZSystem) -> Result<ReductionTrace> {
    s.require_balanced()?;
    let mut steps: Vec<ReductionStep> = Vec::new();
    let mut current = s.clone();
    while current.equation_count() > 0 {
        let table = dominance_table(&current)?;
        let sub: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_some()).collect();
        if sub.is_empty() {
            break;
        }
        let step = reduce_step(&current, &sub)?;
        current = step.result.clone();
        steps.push(step);
    }
    Ok(ReductionTrace::from_steps(s, steps))
}

type Key = (u64, usize, Vec<Vec<usize>>);

struct Exhaustive {
    memo: HashMap<ZSystem, Option<(Key, Vec<ReductionStep>)>>,
}

impl Exhaustive {
    /// Best terminating continuation from `s`, compared by (b̃, length, steps).
    fn best(
        &mut self,
        s: &ZSystem,
        bound: &AtomicU64,
    ) -> Result<Option<(Key, Vec<ReductionStep>)>> {
        if s.equation_count() == 0 {
            return Ok((s.variable_count() == 1).then(|| ((0, 0, Vec::new()), Vec::new())));
        }
        if let Some(hit) = self.memo.get(s) {
            return Ok(hit.clone());
        }
        let table = dominance_table(s)?;
        let dominant: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_some()).collect();
        let mut best: Option<(Key, Vec<ReductionStep>)> = None;
        for mask in 1u32..(1 << dominant.len()) {
            let sub: Vec<usize> = (0..dominant.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| dominant[b])
                .collect();
            let step = reduce_step(s, &sub)?;
            // strict: sequences tying the best b̃ must survive for the tie-break
            if step.coefficient > bound.load(Ordering::Relaxed) {
                continue;
            }
            if let Some((k, rest)) = self.best(&step.result, bound)? {
                let mut encoding = vec![sub.clone()];
                encoding.extend(k.2);
                let key = (k.0.max(step.coefficient), k.1 + 1, encoding);
                if best.as_ref().map_or(true, |b| key < b.0) {
                    let mut steps = vec![step];
                    steps.extend(rest);
                    best = Some((key, steps));
                }
            }
        }
        self.memo.insert(s.clone(), best.clone());
        Ok(best)
    }
}

/// All terminating reduction sequences are compared by `(b̃, length, step
/// encoding)`; the least one is returned.
fn exhaustive_trace(s: &ZSystem) -> Result<Option<ReductionTrace>> {
    s.require_balanced()?;
    if s.equation_count() > EXHAUSTIVE_MAX_EQUATIONS {
        return Err(Error::TooLarge {
            what: "equation count for exhaustive reduction",
            limit: EXHAUSTIVE_MAX_EQUATIONS,
        });
    }
    if s.equation_count() == 0 {
        let t = ReductionTrace::from_steps(s, Vec::new());
        return Ok(t.reaches_empty_one.then_some(t));
    }
    let table = dominance_table(s)?;
    let dominant: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_some()).collect();
    let bound = AtomicU64::new(u64::MAX);
    let candidates: Vec<Option<(Key, Vec<ReductionStep>)>> = (1u32..(1 << dominant.len()))
        .into_par_iter()
        .map(|mask| -> Result<_> {
            let sub: Vec<usize> = (0..dominant.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| dominant[b])
                .collect();
            let step = reduce_step(s, &sub)?;
            let mut search = Exhaustive {
                memo: HashMap::new(),
            };
            Ok(search.best(&step.result, &bound)?.map(|(k, rest)| {
                let mut encoding = vec![sub];
                encoding.extend(k.2);
                let key = (k.0.max(step.coefficient), k.1 + 1, encoding);
                bound.fetch_min(key.0, Ordering::Relaxed);
                let mut steps = vec![step];
                steps.extend(rest);
                (key, steps)
            }))
        })
        .collect::<Result<_>>()?;
    let best = candidates
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.cmp(&b.0));
    Ok(best.map(|(_, steps)| ReductionTrace::from_steps(s, steps)))
}

/// A sequence of dominant reductions ending in `∅(1)`, if the strategy finds one.
pub fn reduction_sequence(s: &ZSystem, strategy: Strategy) -> Result<Option<ReductionTrace>> {
    match strategy {
        Strategy::Greedy => greedy_trace(s).map(|t| t.reaches_empty_one.then_some(t)),
        Strategy::Exhaustive => exhaustive_trace(s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub b: u64,
    pub p: u64,
    /// `(1-ε)·⌊(p+b-1)/b⌋` for the strong bound, `p/b` for the weak one.
    pub base: f64,
    pub floor_term: u64,
    /// `p/b`, reported for `b ≥ 2`.
    pub simple_base: Option<f64>,
    pub epsilon: f64,
    pub kind: BoundKind,
    /// The floor form only holds for `n ≥ n0(p, ε)`.
    pub asymptotic_note: bool,
    /// Smallest `n` with `(k+1)^n/(nk²) ≥ ((1-ε)(k+1))^n`, `k = ⌊(p-1)/b⌋`.
    pub n0: Option<u64>,
}

fn smallest_valid_n(k: u64, epsilon: f64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let rate = -(1.0 - epsilon).ln();
    let k2 = (k * k) as f64;
    (1..=100_000_000u64).find(|&n| n as f64 * rate >= (n as f64 * k2).ln())
}

pub fn lower_bound_strong(
    trace: &ReductionTrace,
    p: u64,
    epsilon: f64,
) -> Result<LowerBoundReport> {
    if !trace.reaches_empty_one {
        return Err(Error::Precondition(
            "reduction trace does not end in the one-variable empty system".into(),
        ));
    }
    lower_bound_from_coefficient(trace.b_tilde, p, epsilon)
}

pub fn lower_bound_from_coefficient(b: u64, p: u64, epsilon: f64) -> Result<LowerBoundReport> {
    require_prime(p)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if p <= b {
        return Err(Error::Precondition(format!(
            "need p > b, got p = {p}, b = {b}"
        )));
    }
    let floor_term = (p + b - 1) / b;
    Ok(LowerBoundReport {
        b,
        p,
        base: (1.0 - epsilon) * floor_term as f64,
        floor_term,
        simple_base: (b >= 2).then(|| p as f64 / b as f64),
        epsilon,
        kind: BoundKind::Strong,
        asymptotic_note: true,
        n0: smallest_valid_n((p - 1) / b, epsilon),
    })
}

/// Uses the smallest dominant coefficient `b ≥ 2` with `p > b`.
pub fn lower_bound_weak(s: &ZSystem, p: u64) -> Result<Option<LowerBoundReport>> {
    require_prime(p)?;
    let table = dominance_table(s)?;
    let b = table
        .iter()
        .flatten()
        .map(|d| d.coefficient)
        .filter(|&b| b >= 2 && p > b)
        .min();
    Ok(b.map(|b| LowerBoundReport {
        b,
        p,
        base: p as f64 / b as f64,
        floor_term: (p + b - 1) / b,
        simple_base: Some(p as f64 / b as f64),
        epsilon: 0.0,
        kind: BoundKind::Weak,
        asymptotic_note: false,
        n0: None,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn eq(c: &[i64]) -> ZEquation {
        ZEquation::new(c.to_vec()).unwrap()
    }

    fn names(r: usize) -> Vec<String> {
        (1..=r).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(
            dominance_of(&eq(&[1, 0, -2, 0, 1])).unwrap(),
            Some(Dominance {
                indices: vec![2],
                coefficient: 2
            })
        );
        assert_eq!(dominance_of(&eq(&[1, -1, -1, 1])).unwrap(), None);
        assert_eq!(
            dominance_of(&eq(&[1, 1, 1, 1, -4])).unwrap(),
            Some(Dominance {
                indices: vec![4],
                coefficient: 4
            })
        );
        assert_eq!(
            dominance_of(&eq(&[0, 3, -3])).unwrap(),
            Some(Dominance {
                indices: vec![1, 2],
                coefficient: 3
            })
        );
        assert!(dominance_of(&eq(&[1, 1])).is_err());
    }

    #[test]
    fn standard_form_examples() {
        let f = standard_form(&eq(&[1, 0, -2, 0, 1])).unwrap();
        assert_eq!(f.render(&names(5)), "2x3 = x1 + x5");
        let f = standard_form(&eq(&[3, -3])).unwrap();
        assert_eq!(f.dominant_index, 0);
        assert_eq!(f.render(&names(2)), "3x1 = 3x2");
        let f = standard_form(&eq(&[0, -1, 0, 2, 0, -1])).unwrap();
        assert_eq!(f.render(&names(6)), "2x4 = x2 + x6");
        assert_eq!(
            standard_form(&eq(&[1, -1, -1, 1])).unwrap_err(),
            Error::NotDominant { index: 0 }
        );
    }

    #[test]
    fn subsystem_examples() {
        let d = dominant_subsystems(&catalog::s2()).unwrap();
        assert_eq!(d.maximal, vec![0, 2]);
        assert!(d.irreducible.contains(&DominantSubset {
            equations: vec![0, 2],
            coefficient: 4
        }));

        let d = dominant_subsystems(&catalog::s_w()).unwrap();
        assert_eq!(d.maximal, vec![1]);
        assert!(d.irreducible.is_empty());

        let d = dominant_subsystems(&catalog::s_3ap()).unwrap();
        assert_eq!(
            d.irreducible,
            vec![DominantSubset {
                equations: vec![0],
                coefficient: 2
            }]
        );
    }

    #[test]
    fn s3_reduction_chain() {
        let s1 = dominant_reduce(&catalog::s3(), &[2]).unwrap();
        assert_eq!(s1.render(), "-x3 + x4 = 0\nx_{1_2_6} - x3 - x4 + x5 = 0");
        let s2 = dominant_reduce(&s1, &[0]).unwrap();
        assert_eq!(s2.render(), "x_{1_2_6} - 2x_{3_4} + x5 = 0");
        let s3 = dominant_reduce(&s2, &[0]).unwrap();
        assert_eq!(s3.render(), "∅(1)");
        assert_eq!(s3.names(), &["x_{1_2_3_4_5_6}".to_string()]);
        assert_eq!(
            dominant_reduce(&catalog::s3(), &[0]).unwrap_err(),
            Error::NotDominant { index: 1 }
        );
    }

    #[test]
    fn greedy_on_s3() {
        let t = reduction_sequence(&catalog::s3(), Strategy::Greedy)
            .unwrap()
            .unwrap();
        assert_eq!(t.steps.len(), 3);
        assert_eq!(t.b_tilde, 2);
        let coeffs: Vec<u64> = t.steps.iter().map(|s| s.coefficient).collect();
        assert_eq!(coeffs, vec![2, 1, 2]);
        assert!(t.reaches_empty_one);
        let ex = reduction_sequence(&catalog::s3(), Strategy::Exhaustive)
            .unwrap()
            .unwrap();
        assert!(ex.b_tilde <= t.b_tilde);
    }

    #[test]
    fn non_terminating_systems() {
        assert!(reduction_sequence(&catalog::s_pp(), Strategy::Greedy)
            .unwrap()
            .is_none());
        assert!(reduction_sequence(&catalog::s_pp(), Strategy::Exhaustive)
            .unwrap()
            .is_none());
        assert!(reduction_sequence(&catalog::s_w(), Strategy::Greedy)
            .unwrap()
            .is_none());
        let t = reduction_sequence(&catalog::s_3ap(), Strategy::Greedy)
            .unwrap()
            .unwrap();
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn exhaustive_can_beat_greedy() {
        // the maximal subsystem carries coefficient 4; reducing 2x3 = x1 + x5 first
        // and then the merged copy of the other equation stays at 2
        let s = crate::eqsys::parse_system(
            "x1 - 2x3 + x5 = 0\nx1 - 2x3 + x5 = 0\n2x1 + x2 - 4x3 + x4 = 0",
        )
        .unwrap();
        let g = reduction_sequence(&s, Strategy::Greedy).unwrap().unwrap();
        let e = reduction_sequence(&s, Strategy::Exhaustive)
            .unwrap()
            .unwrap();
        assert_eq!((g.b_tilde, e.b_tilde), (4, 2));
    }

    #[test]
    fn lower_bound_examples() {
        let r = lower_bound_from_coefficient(2, 7, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.floor_term, 4);
        assert_eq!(r.simple_base, Some(3.5));
        assert_eq!(
            lower_bound_from_coefficient(4, 5, DEFAULT_EPSILON)
                .unwrap()
                .floor_term,
            2
        );
        let t = reduction_sequence(&catalog::s3(), Strategy::Greedy)
            .unwrap()
            .unwrap();
        let r = lower_bound_strong(&t, 3, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.simple_base, Some(1.5));
        assert!(r.n0.is_some());
        assert!(lower_bound_from_coefficient(2, 2, DEFAULT_EPSILON).is_err());
        assert!(lower_bound_from_coefficient(2, 9, DEFAULT_EPSILON).is_err());
    }

    #[test]
    fn n0_is_minimal() {
        let r = lower_bound_from_coefficient(2, 7, DEFAULT_EPSILON).unwrap();
        let n0 = r.n0.unwrap();
        let k = 3.0f64;
        let ok = |n: f64| {
            (k + 1.0).powf(n) / (n * k * k) >= ((1.0 - DEFAULT_EPSILON) * (k + 1.0)).powf(n)
        };
        assert!(ok(n0 as f64));
        assert!(!ok((n0 - 1) as f64));
    }

    #[test]
    fn weak_lower_bounds() {
        assert_eq!(
            lower_bound_weak(&catalog::s_w(), 5).unwrap().unwrap().base,
            2.5
        );
        assert!(lower_bound_weak(&catalog::s_pp(), 7).unwrap().is_none());
        assert_eq!(
            lower_bound_weak(&catalog::s_3ap(), 3)
                .unwrap()
                .unwrap()
                .base,
            1.5
        );
        assert!(lower_bound_weak(&catalog::s_3ap(), 2).unwrap().is_none());
    }

    mod props {
        use crate::dominance::{
            dominance_table, dominant_reduce, reduction_sequence, standard_form, Strategy as Plan,
        };
        use crate::eqsys::{ZEquation, ZSystem};
        use crate::structure::build_hypergraph;
        use proptest::prelude::*;

        /// Balanced rows: random left part plus a balancing last entry.
        fn arb_balanced(r: usize) -> impl proptest::strategy::Strategy<Value = Vec<Vec<i64>>> {
            proptest::collection::vec(proptest::collection::vec(-3i64..4, r - 1), 1..5).prop_map(
                |rows| {
                    rows.into_iter()
                        .map(|mut row| {
                            let s: i64 = row.iter().sum();
                            row.push(-s);
                            row
                        })
                        .filter(|row| row.iter().any(|&c| c != 0))
                        .collect()
                },
            )
        }

        fn arb_dominant_eq() -> impl proptest::strategy::Strategy<Value = Vec<i64>> {
            (
                proptest::collection::vec(0i64..4, 2..7),
                0usize..7,
                any::<bool>(),
            )
                .prop_filter_map("nonzero", |(rhs, pos, flip)| {
                    let b: i64 = rhs.iter().sum();
                    if b == 0 {
                        return None;
                    }
                    let mut row: Vec<i64> = rhs.iter().map(|&c| -c).collect();
                    row.insert(pos.min(rhs.len()), b);
                    if flip {
                        row.iter_mut().for_each(|c| *c = -*c);
                    }
                    Some(row)
                })
        }

        proptest! {
            #[test]
            fn standard_form_is_balanced(row in arb_dominant_eq()) {
                let f = standard_form(&ZEquation::new(row).unwrap()).unwrap();
                prop_assert_eq!(f.dominant_coefficient, f.rhs.iter().map(|&(_, c)| c).sum::<u64>());
            }

            #[test]
            fn reduction_bookkeeping(rows in arb_balanced(6)) {
                prop_assume!(!rows.is_empty());
                let s = ZSystem::from_rows(6, rows).unwrap();
                let table = dominance_table(&s).unwrap();
                let sub: Vec<usize> = (0..table.len()).filter(|&i| table[i].is_some()).collect();
                prop_assume!(!sub.is_empty());
                let h = build_hypergraph(&s.subsystem(&sub).unwrap());
                let out = dominant_reduce(&s, &sub).unwrap();
                prop_assert_eq!(out.variable_count(), 6 - (h.vertices.len() - h.components.len()));
                prop_assert!(out.is_balanced());
                prop_assert!(out.equation_count() <= s.equation_count() - sub.len());
            }

            #[test]
            fn dominant_irreducible_single_step(row in arb_dominant_eq()) {
                let row: Vec<i64> = row;
                let r = row.len();
                let support: Vec<usize> = (0..r).filter(|&i| row[i] != 0).collect();
                let compact: Vec<i64> = support.iter().map(|&i| row[i]).collect();
                let s = ZSystem::from_rows(compact.len(), vec![compact]).unwrap();
                let t = reduction_sequence(&s, Plan::Greedy).unwrap().unwrap();
                prop_assert_eq!(t.steps.len(), 1);
            }

            #[test]
            fn exhaustive_never_worse(rows in arb_balanced(5)) {
                prop_assume!(!rows.is_empty());
                let s = ZSystem::from_rows(5, rows).unwrap();
                if let Some(g) = reduction_sequence(&s, Plan::Greedy).unwrap() {
                    let e = reduction_sequence(&s, Plan::Exhaustive).unwrap().unwrap();
                    prop_assert!(e.b_tilde <= g.b_tilde);
                }
            }
        }
    }
}
