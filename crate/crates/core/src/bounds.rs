//! `Λ_{m,α,h} = min_{0<u≤1} u^{-αh}(1 + u + … + u^{mh})`, the two-class
//! constant `C̃`, the Θ-count and the upper bounds built from them.
//!
//! Minimisation works in `t = -ln u`, where `ln G` is convex.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::eqsys::{require_prime, FpSystem};
use crate::error::{Error, Result};
use crate::structure::{build_hypergraph, is_irreducible, parameters, SystemParameters};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
const SCAN_POINTS: usize = 4096;
const GOLDEN_ITERS: usize = 200;
const BISECT_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    /// Relative tolerance attached to every minimised value.
    pub rel_tol: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaQuery {
    pub m: u64,
    pub alpha: f64,
    pub h: u64,
}

impl LambdaQuery {
    pub fn new(m: u64, alpha: f64, h: u64) -> Result<Self> {
        if m == 0 || h == 0 {
            return Err(Error::InvalidArgument("m and h must be at least 1".into()));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be a finite nonnegative number, got {alpha}"
            )));
        }
        Ok(Self { m, alpha, h })
    }

    /// Number of terms `mh + 1` of the geometric sum.
    fn terms(&self) -> f64 {
        self.m as f64 * self.h as f64 + 1.0
    }

    /// `ln G` at `u = e^{-t}`.
    fn ln_g(&self, t: f64) -> f64 {
        self.alpha * self.h as f64 * t + ln_geometric(self.terms(), t)
    }
}

/// `ln(1 + e^{-t} + … + e^{-(M-1)t})`.
fn ln_geometric(terms: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return terms.ln();
    }
    let num = (-terms * t).exp_m1();
    let den = (-t).exp_m1();
    (num / den).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Optimizer {
    Point(f64),
    Pair { alpha: f64, beta: f64 },
    Allocation(Vec<f64>),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub optimizer: Optimizer,
    pub tolerance: f64,
    pub method: String,
}

impl BoundReport {
    /// `value + tolerance`; what bound computations consume.
    pub fn upper(&self) -> f64 {
        self.value + self.tolerance
    }
}

pub fn g_value(q: &LambdaQuery, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "u must lie in (0, 1], got {u}"
        )));
    }
    if u == 1.0 {
        return Ok(q.terms());
    }
    Ok(q.ln_g(-u.ln()).exp())
}

/// Golden-section minimisation of `f` on `[a, b]`; returns `(x, f(x))`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Log-spaced scan on `[lo, hi]` plus `0`, then golden refinement around the
/// best sample. Returns `(t, f(t))`.
fn scan_then_refine(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let ratio = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = std::iter::once(0.0)
        .chain((0..SCAN_POINTS).map(|k| lo * (ratio * k as f64).exp()))
        .collect();
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (k, &t) in grid.iter().enumerate() {
        let v = f(t);
        if v < best_val {
            best_val = v;
            best = k;
        }
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (t, v) = golden_min(&f, a, b);
    if v < best_val {
        (t, v)
    } else {
        (grid[best], best_val)
    }
}

pub fn lambda(q: &LambdaQuery) -> BoundReport {
    lambda_with(q, &NumericOptions::default())
}

pub fn lambda_with(q: &LambdaQuery, opts: &NumericOptions) -> BoundReport {
    if q.alpha == 0.0 {
        return BoundReport {
            value: 1.0,
            optimizer: Optimizer::None,
            tolerance: 0.0,
            method: "alpha = 0 convention".into(),
        };
    }
    // d/dt ln G at t = 0 is h(alpha - m/2); with convexity this settles the case.
    if 2.0 * q.alpha >= q.m as f64 {
        return BoundReport {
            value: q.terms(),
            optimizer: Optimizer::Point(1.0),
            tolerance: 0.0,
            method: "exact: nonnegative slope at u = 1".into(),
        };
    }
    let ah = q.alpha * q.h as f64;
    let lo = 1e-12 / (q.m as f64 * q.h as f64);
    let hi = f64::max(64.0, 2.0 * (1.0 / ah).ln() + 10.0);
    let (t, ln_v) = scan_then_refine(|t| q.ln_g(t), lo, hi);
    let value = ln_v.exp();
    BoundReport {
        value,
        optimizer: Optimizer::Point((-t).exp()),
        tolerance: opts.rel_tol * value,
        method: format!("log-scan({SCAN_POINTS}) + golden-section"),
    }
}

/// `#{θ ∈ {0..mh}^n : Σθ ≤ αhn}` with exact rational `α`.
pub fn count_theta(m: u64, alpha: Ratio<u64>, h: u64, n: u64) -> Result<BigUint> {
    if m == 0 || h == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "m, h and n must be at least 1".into(),
        ));
    }
    let top = m.checked_mul(h).ok_or(Error::TooLarge {
        what: "m*h",
        limit: u64::MAX as usize,
    })?;
    let threshold = (*alpha.numer() as u128 * h as u128 * n as u128) / *alpha.denom() as u128;
    let cap = (top as u128 * n as u128).min(threshold);
    let cap = usize::try_from(cap)
        .ok()
        .filter(|&c| c <= 1 << 24)
        .ok_or(Error::TooLarge {
            what: "theta threshold",
            limit: 1 << 24,
        })?;
    // dist[s] = number of prefixes with sum s (sums above cap are never needed)
    let mut dist = vec![BigUint::zero(); cap + 1];
    dist[0] = BigUint::from(1u8);
    let width = top.min(cap as u64) as usize;
    for _ in 0..n {
        // sliding window sum over the last width+1 entries
        let mut next = vec![BigUint::zero(); cap + 1];
        let mut window = BigUint::zero();
        for s in 0..=cap {
            window += &dist[s];
            if s > width {
                window -= &dist[s - width - 1];
            }
            next[s] = window.clone();
        }
        dist = next;
    }
    Ok(dist.into_iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarVerdict {
    pub holds: bool,
    pub margin: f64,
}

pub fn star_inequality(params: &SystemParameters) -> StarVerdict {
    let margin = params.r1 as f64 / 2.0 + params.r2 as f64 / std::f64::consts::E - params.l as f64;
    StarVerdict {
        holds: margin > 0.0,
        margin,
    }
}

pub fn c_tilde(r1: u64, r2: u64, l: u64, m: u64, d: u64) -> Result<BoundReport> {
    c_tilde_with(r1, r2, l, m, d, &NumericOptions::default())
}

/// `inf { max(Λ_{1,α,d-1}, Λ_{m,β,d-1}) : r1 α + r2 β = L }`.
pub fn c_tilde_with(
    r1: u64,
    r2: u64,
    l: u64,
    m: u64,
    d: u64,
    opts: &NumericOptions,
) -> Result<BoundReport> {
    if r1 == 0 && r2 == 0 {
        return Err(Error::InvalidArgument(
            "r1 and r2 cannot both be zero".into(),
        ));
    }
    if d < 2 || m == 0 || l == 0 {
        return Err(Error::InvalidArgument("need d >= 2, m >= 1, L >= 1".into()));
    }
    let h = d - 1;
    let lf = l as f64;
    if r2 == 0 {
        let alpha = lf / r1 as f64;
        let rep = lambda_with(&LambdaQuery::new(1, alpha, h)?, opts);
        return Ok(BoundReport {
            optimizer: Optimizer::Pair { alpha, beta: 0.0 },
            method: "forced: r2 = 0".into(),
            ..rep
        });
    }
    if r1 == 0 {
        let beta = lf / r2 as f64;
        let rep = lambda_with(&LambdaQuery::new(m, beta, h)?, opts);
        return Ok(BoundReport {
            optimizer: Optimizer::Pair { alpha: 0.0, beta },
            method: "forced: r1 = 0".into(),
            ..rep
        });
    }
    let beta_of = |a: f64| ((lf - r1 as f64 * a) / r2 as f64).max(0.0);
    let f = |a: f64| lambda_with(&LambdaQuery { m: 1, alpha: a, h }, opts).value;
    let g = |a: f64| {
        lambda_with(
            &LambdaQuery {
                m,
                alpha: beta_of(a),
                h,
            },
            opts,
        )
        .value
    };
    let a_max = lf / r1 as f64;

    let samples: Vec<(f64, f64)> = (0..=32)
        .map(|k| a_max * k as f64 / 32.0)
        .map(|a| (f(a), g(a)))
        .collect();
    let slack = |x: f64| 1e-9 * x.max(1.0);
    let monotone = samples
        .windows(2)
        .all(|w| w[1].0 >= w[0].0 - slack(w[0].0) && w[1].1 <= w[0].1 + slack(w[0].1));

    let (alpha, value, method) = if monotone {
        let (mut lo, mut hi) = (0.0, a_max);
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if f(mid) < g(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (vlo, vhi) = (f(lo).max(g(lo)), f(hi).max(g(hi)));
        if vlo <= vhi {
            (lo, vlo, "crossing bisection")
        } else {
            (hi, vhi, "crossing bisection")
        }
    } else {
        let obj = |a: f64| f(a).max(g(a));
        let k = (0..=2000)
            .map(|k| a_max * k as f64 / 2000.0)
            .map(|a| (a, obj(a)))
            .fold((0.0, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        let step = a_max / 2000.0;
        let (a, v) = golden_min(obj, (k.0 - step).max(0.0), (k.0 + step).min(a_max));
        if v < k.1 {
            (a, v, "dense scan + golden-section")
        } else {
            (k.0, k.1, "dense scan + golden-section")
        }
    };
    Ok(BoundReport {
        value,
        optimizer: Optimizer::Pair {
            alpha,
            beta: beta_of(alpha),
        },
        tolerance: opts.rel_tol * value,
        method: method.into(),
    })
}

/// Largest `α` with `Λ_{m,α,h} ≤ λ`, capped at `m/2` where `Λ` saturates.
fn alpha_at_level(m: u64, h: u64, level: f64) -> f64 {
    let terms = m as f64 * h as f64 + 1.0;
    let cap = m as f64 / 2.0;
    if level <= 1.0 {
        return 0.0;
    }
    if level >= terms {
        return cap;
    }
    let ln_level = level.ln();
    let hf = h as f64;
    let phi = |t: f64| {
        if t <= 0.0 {
            f64::INFINITY
        } else {
            -(ln_level - ln_geometric(terms, t)) / (hf * t)
        }
    };
    let lo = 1e-12 / (m as f64 * hf);
    let hi = f64::max(64.0, 2.0 * (1.0 / ln_level).ln() + 10.0);
    let (_, neg) = scan_then_refine(phi, lo, hi);
    (-neg).clamp(0.0, cap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongUpperBound {
    /// `C̄^n`, using the upward-rounded base.
    pub bound: f64,
    pub base: BoundReport,
    pub star: StarVerdict,
    pub warnings: Vec<String>,
}

pub fn upper_bound_strong(t: &FpSystem, n: u32) -> Result<StrongUpperBound> {
    upper_bound_strong_with(t, n, &NumericOptions::default())
}

/// Minimises `max_i Λ_{m_i,α_i,p-1}` over `Σ α_i = L` and raises it to `n`.
pub fn upper_bound_strong_with(
    t: &FpSystem,
    n: u32,
    opts: &NumericOptions,
) -> Result<StrongUpperBound> {
    if !t.is_balanced() {
        let index = t
            .rows()
            .iter()
            .position(|row| row.iter().fold(0u64, |s, &a| (s + a) % t.modulus()) != 0)
            .unwrap_or(0);
        return Err(Error::Unbalanced {
            index: index + 1,
            sum: 0,
        });
    }
    let h = build_hypergraph(t);
    if !is_irreducible(&h).irreducible {
        return Err(Error::Reducible);
    }
    let params = parameters(&h);
    let star = star_inequality(&params);
    let mut warnings = Vec::new();
    if !star.holds {
        warnings.push(format!(
            "inequality r1/2 + r2/e > L fails (margin {:.6}); the bound is valid but weak",
            star.margin
        ));
    }
    let hh = t.modulus() - 1;
    let mults = &h.multiplicities;
    let mut distinct: Vec<u64> = mults.iter().map(|&m| m as u64).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let count = |m: u64| mults.iter().filter(|&&x| x as u64 == m).count() as f64;
    let l = params.l as f64;
    let supply = |level: f64| {
        distinct
            .iter()
            .map(|&m| count(m) * alpha_at_level(m, hh, level))
            .sum::<f64>()
    };

    let top = distinct
        .iter()
        .map(|&m| m as f64 * hh as f64 + 1.0)
        .fold(1.0, f64::max);
    let (mut lo, mut hi) = (1.0, top);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if supply(mid) >= l {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let total = supply(hi);
    let scale = if total > 0.0 { l / total } else { 0.0 };
    let alloc: Vec<f64> = mults
        .iter()
        .map(|&m| alpha_at_level(m as u64, hh, hi) * scale)
        .collect();
    let value = mults
        .iter()
        .zip(&alloc)
        .map(|(&m, &a)| {
            lambda_with(
                &LambdaQuery {
                    m: m as u64,
                    alpha: a,
                    h: hh,
                },
                opts,
            )
            .value
        })
        .fold(1.0, f64::max);
    let base = BoundReport {
        value,
        optimizer: Optimizer::Allocation(alloc),
        tolerance: opts.rel_tol * value,
        method: "level-set bisection".into(),
    };
    let bound = if n == 0 {
        1.0
    } else {
        base.upper().powi(n as i32)
    };
    Ok(StrongUpperBound {
        bound,
        base,
        star,
        warnings,
    })
}

pub const MAX_FIELD_SIZE: u64 = 1 << 53;

/// `c(p) = C̃(q)^{1/N} / p` with `q = p^N` for the given parameters.
pub fn bound_small_p_params(
    params: &SystemParameters,
    p: u64,
    big_n: u32,
    opts: &NumericOptions,
) -> Result<BoundReport> {
    if big_n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if p < 2 {
        return Err(Error::NotPrime(p));
    }
    let q = p
        .checked_pow(big_n)
        .filter(|&q| q <= MAX_FIELD_SIZE)
        .ok_or(Error::TooLarge {
            what: "p^N",
            limit: MAX_FIELD_SIZE as usize,
        })?;
    let ct = c_tilde_with(
        params.r1 as u64,
        params.r2 as u64,
        params.l as u64,
        params.m_max as u64,
        q,
        opts,
    )?;
    let root = |x: f64| x.powf(1.0 / big_n as f64) / p as f64;
    let value = root(ct.value);
    let tolerance = root(ct.upper()) - value;
    Ok(BoundReport {
        value,
        optimizer: ct.optimizer,
        tolerance,
        method: format!("tensor power N = {big_n}, q = {q}; {}", ct.method),
    })
}

pub fn bound_small_p(t: &FpSystem, big_n: u32) -> Result<BoundReport> {
    let params = parameters(&build_hypergraph(t));
    bound_small_p_params(&params, t.modulus(), big_n, &NumericOptions::default())
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!(
            "p must be an odd prime, got {p}"
        )));
    }
    require_prime(p)
}

/// `C_W(p)`: the two-class constant for the W-shape parameters `(3,2,2,2)`.
pub fn c_w(p: u64, opts: &NumericOptions) -> Result<BoundReport> {
    require_odd_prime(p)?;
    c_tilde_with(3, 2, 2, 2, p, opts)
}

pub fn wshape_upper(p: u64, n: u32) -> Result<f64> {
    wshape_upper_with(p, n, &NumericOptions::default())
}

pub fn wshape_upper_with(p: u64, n: u32, opts: &NumericOptions) -> Result<f64> {
    let c = c_w(p, opts)?.upper();
    Ok(7.0 * (c * p as f64).powf(n as f64 / 2.0))
}

pub fn parallelogram_upper(p: u64, n: u32) -> Result<f64> {
    require_odd_prime(p)?;
    let lam = lambda(&LambdaQuery::new(1, 0.25, p - 1)?).upper();
    Ok(7.0 * (lam * p as f64).powf(n as f64 / 2.0))
}

/// Exact `f64` view of a rational exponent rate.
pub fn ratio_to_f64(r: Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::eqsys::reduce_mod_p;

    fn q(m: u64, alpha: f64, h: u64) -> LambdaQuery {
        LambdaQuery::new(m, alpha, h).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_value(&q(1, 0.7, 4), 1.0).unwrap(), 5.0);
        assert_eq!(g_value(&q(2, 0.0, 2), 1.0).unwrap(), 5.0);
        let v = g_value(&q(1, 1.0 / 3.0, 2), 0.593070).unwrap();
        assert!((v - 2.75510).abs() < 1e-4, "{v}");
        assert!(g_value(&q(1, 0.5, 2), 0.0).is_err());
        assert!(g_value(&q(1, 0.5, 2), 1.5).is_err());
    }

    #[test]
    fn g_matches_direct_sum() {
        let qq = q(2, 0.3, 3);
        for u in [0.01f64, 0.3, 0.77, 0.999999] {
            let direct: f64 = u.powf(-0.9) * (0..=6).map(|j| u.powi(j)).sum::<f64>();
            assert!(close(g_value(&qq, u).unwrap(), direct, 1e-12));
        }
    }

    #[test]
    fn lambda_examples() {
        let r = lambda(&q(1, 0.0, 5));
        assert_eq!((r.value, r.tolerance), (1.0, 0.0));
        let r = lambda(&q(1, 0.5, 2));
        assert_eq!(r.value, 3.0);
        assert_eq!(r.optimizer, Optimizer::Point(1.0));
        // frozen from a high-precision grid scan
        let r = lambda(&q(1, 1.0 / 3.0, 2));
        assert!(close(r.value, 2.755104613, 1e-9), "{}", r.value);
        match r.optimizer {
            Optimizer::Point(u) => assert!((u - 0.59307).abs() < 1e-4),
            _ => panic!(),
        }
        assert!(close(lambda(&q(1, 0.25, 2)).value, 2.462642, 1e-6));
        assert!(close(lambda(&q(1, 0.25, 4)).value, 3.834437, 1e-6));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(
            count_theta(1, Ratio::new(1, 3), 2, 2).unwrap(),
            BigUint::from(3u8)
        );
        assert_eq!(
            count_theta(1, Ratio::new(0, 1), 7, 5).unwrap(),
            BigUint::from(1u8)
        );
        assert_eq!(
            count_theta(1, Ratio::new(1, 1), 1, 1).unwrap(),
            BigUint::from(2u8)
        );
        // alpha large enough to admit everything: (mh+1)^n
        assert_eq!(
            count_theta(2, Ratio::new(2, 1), 2, 3).unwrap(),
            BigUint::from(125u8)
        );
    }

    #[test]
    fn theta_matches_brute_force() {
        for (m, h, n) in [(1u64, 2u64, 3u64), (2, 1, 4), (3, 2, 2)] {
            for alpha in [
                Ratio::new(1, 4),
                Ratio::new(1, 3),
                Ratio::new(1, 2),
                Ratio::new(1, 1),
            ] {
                let top = m * h + 1;
                let thr = (alpha * Ratio::from_integer(h * n)).to_integer();
                let mut count = 0u64;
                for code in 0..top.pow(n as u32) {
                    let (mut c, mut s) = (code, 0);
                    for _ in 0..n {
                        s += c % top;
                        c /= top;
                    }
                    if s <= thr {
                        count += 1;
                    }
                }
                assert_eq!(count_theta(m, alpha, h, n).unwrap(), BigUint::from(count));
            }
        }
    }

    #[test]
    fn star_examples() {
        let p = |r1, r2, l| SystemParameters {
            r1,
            r2,
            l,
            m_max: 2,
        };
        let v = star_inequality(&p(3, 2, 2));
        assert!(v.holds && (v.margin - (1.5 + 2.0 / std::f64::consts::E - 2.0)).abs() < 1e-12);
        assert!(!star_inequality(&p(2, 2, 2)).holds);
        let v = star_inequality(&p(3, 0, 1));
        assert!(v.holds && (v.margin - 0.5).abs() < 1e-12);
    }

    #[test]
    fn c_w_values() {
        // frozen from an independent high-precision crossing search
        for (p, expect) in [(3u64, 2.978842), (5, 4.931823), (7, 6.877458)] {
            let r = c_tilde(3, 2, 2, 2, p).unwrap();
            assert!(close(r.value, expect, 2e-6), "p={p}: {}", r.value);
        }
        assert!(c_tilde(3, 2, 2, 2, 3).unwrap().upper() / 3.0 <= 0.994 + 1e-3);
        assert!(c_tilde(3, 2, 2, 2, 7).unwrap().upper() / 7.0 <= 0.983 + 1e-3);
    }

    #[test]
    fn c_tilde_degenerate() {
        let r = c_tilde(3, 0, 1, 1, 5).unwrap();
        assert_eq!(r.value, lambda(&q(1, 1.0 / 3.0, 4)).value);
        let r = c_tilde(0, 2, 1, 2, 5).unwrap();
        assert_eq!(r.value, lambda(&q(2, 0.5, 4)).value);
        assert!(c_tilde(0, 0, 1, 1, 5).is_err());
    }

    #[test]
    fn remark_ratios_at_large_p() {
        let p = 1e6;
        let h = 999_999;
        let u = 1.0 - 0.874964 / p;
        let v = 1.0 - 2.72792 / p;
        let a = g_value(&q(1, 0.428, h), u).unwrap() / p;
        let b = g_value(&q(2, 0.358, h), v).unwrap() / p;
        assert!((a - 0.969185).abs() < 5e-6, "{a}");
        assert!((b - 0.969258).abs() < 5e-6, "{b}");
    }

    #[test]
    fn strong_upper_examples() {
        let w3 = reduce_mod_p(&catalog::s_w(), 3).unwrap().system;
        let b = upper_bound_strong(&w3, 1).unwrap();
        assert!(b.bound <= 2.982, "{}", b.bound);
        assert!(close(b.base.value, 2.978842, 1e-5));
        if let Optimizer::Allocation(a) = &b.base.optimizer {
            assert!((a.iter().sum::<f64>() - 2.0).abs() < 1e-9);
        } else {
            panic!();
        }
        let ap = reduce_mod_p(&catalog::s_3ap(), 3).unwrap().system;
        let b = upper_bound_strong(&ap, 2).unwrap();
        assert!(close(b.bound, 2.755104613f64.powi(2), 1e-6), "{}", b.bound);
        assert_eq!(upper_bound_strong(&ap, 0).unwrap().bound, 1.0);
        let ap4 = reduce_mod_p(&catalog::s_4ap(), 5).unwrap().system;
        assert!(!upper_bound_strong(&ap4, 1).unwrap().warnings.is_empty());
    }

    #[test]
    fn strong_upper_rejects_bad_input() {
        let s1p = catalog::s1().subsystem(&[0, 1, 2]).unwrap();
        let t = reduce_mod_p(&s1p, 5).unwrap().system;
        assert_eq!(upper_bound_strong(&t, 1).unwrap_err(), Error::Reducible);
        let t = FpSystem::new(5, 2, vec![vec![1, 1]]).unwrap();
        assert!(matches!(
            upper_bound_strong(&t, 1),
            Err(Error::Unbalanced { .. })
        ));
    }

    #[test]
    fn tensor_power_examples() {
        let w3 = reduce_mod_p(&catalog::s_w(), 3).unwrap().system;
        let one = bound_small_p(&w3, 1).unwrap();
        assert!(close(
            one.value,
            c_tilde(3, 2, 2, 2, 3).unwrap().value / 3.0,
            1e-12
        ));
        let two = bound_small_p(&w3, 2).unwrap();
        assert!(two.value < one.value);
        assert!(close(two.value, 0.98996, 1e-4), "{}", two.value);

        let params = SystemParameters {
            r1: 3,
            r2: 2,
            l: 2,
            m_max: 2,
        };
        let opts = NumericOptions::default();
        let n3 = bound_small_p_params(&params, 2, 3, &opts).unwrap();
        assert!(n3.value < 1.0, "{}", n3.value);
        assert!(bound_small_p_params(&params, 3, 40, &opts).is_err());
    }

    #[test]
    fn shape_bounds() {
        assert_eq!(wshape_upper(3, 0).unwrap(), 7.0);
        let w = wshape_upper(3, 1).unwrap();
        assert!(w <= 7.0 * (2.982f64 * 3.0).sqrt() && w > 20.9, "{w}");
        assert!(wshape_upper(7, 2).unwrap() <= 7.0 * 0.984 * 49.0);
        assert!(wshape_upper(2, 1).is_err());
        assert_eq!(parallelogram_upper(3, 0).unwrap(), 7.0);
        assert!(close(
            parallelogram_upper(3, 2).unwrap(),
            7.0 * 2.462642 * 3.0,
            1e-6
        ));
        assert!(close(
            parallelogram_upper(5, 1).unwrap(),
            7.0 * (3.834437f64 * 5.0).sqrt(),
            1e-6
        ));
    }

    #[test]
    fn c_w_exceeds_three_ap_constant() {
        for p in [3, 5, 7] {
            assert!(c_tilde(3, 2, 2, 2, p).unwrap().value > lambda(&q(1, 1.0 / 3.0, p - 1)).value);
        }
    }

    #[test]
    fn theta_count_below_lambda_power() {
        for m in 1..=3u64 {
            for h in [1u64, 2, 4] {
                for alpha in [
                    Ratio::new(0, 1),
                    Ratio::new(1, 4),
                    Ratio::new(1, 3),
                    Ratio::new(1, 2),
                    Ratio::new(1, 1),
                ] {
                    let lam = lambda(&q(m, ratio_to_f64(alpha), h)).upper();
                    for n in 1..=8u64 {
                        let c = count_theta(m, alpha, h, n).unwrap().to_f64().unwrap();
                        assert!(
                            c <= lam.powi(n as i32) * (1.0 + 1e-12),
                            "m={m} h={h} a={alpha} n={n}"
                        );
                    }
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lambda_is_lower_envelope(m in 1u64..4, alpha in 0.0f64..2.0, h in 1u64..20, u in 1e-6f64..=1.0) {
                let qq = q(m, alpha, h);
                let lam = lambda(&qq).value;
                prop_assert!(lam <= g_value(&qq, u).unwrap() * (1.0 + 1e-12));
                prop_assert!(lam >= 1.0);
            }

            #[test]
            fn lambda_monotone(m in 1u64..4, a in 0.0f64..1.0, da in 0.0f64..0.5, h in 1u64..12) {
                let base = lambda(&q(m, a, h)).value;
                prop_assert!(lambda(&q(m, a + da, h)).value >= base * (1.0 - 1e-9));
                prop_assert!(lambda(&q(m + 1, a, h)).value >= base * (1.0 - 1e-9));
            }

            #[test]
            fn normalized_lambda_decreases_in_d(alpha in 0.01f64..0.49) {
                let mut prev = f64::INFINITY;
                for d in [3u64, 5, 7, 11, 13] {
                    let ratio = lambda(&q(1, alpha, d - 1)).value / d as f64;
                    prop_assert!(ratio < 1.0);
                    prop_assert!(ratio <= prev * (1.0 + 1e-12));
                    prev = ratio;
                }
            }
        }
    }
}
