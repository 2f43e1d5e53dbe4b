//! The acceptance suite: thirteen checks with frozen reference values,
//! independent oracles and runtime limits.

use std::time::Instant;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    c_tilde_with, count_theta, g_value, lambda, star_inequality, wshape_upper, LambdaQuery,
    NumericOptions,
};
use crate::catalog;
use crate::dominance::{
    lower_bound_strong, lower_bound_weak, reduction_sequence, Strategy, DEFAULT_EPSILON,
};
use crate::eqsys::{parse_system, reduce_mod_p, FpSystem};
use crate::error::{Error, Result};
use crate::lattice::{best_sphere_set, mod_p_faithfulness, norm_class_counts, verify_construction};
use crate::oracle::{
    check_family, max_free, random_three_ap_family, FamilyCheck, Freeness, PointSet, SearchOptions,
    SearchResult,
};
use crate::structure::{build_hypergraph, parameters, SystemParameters};

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const FAMILY_COUNT: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Relative tolerance attached to minimised values.
    pub lambda_tol: f64,
    /// Worker counts compared by the determinism check; the first one is
    /// used by the other criteria.
    pub workers: Vec<usize>,
    pub enforce_timing: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            lambda_tol: crate::bounds::DEFAULT_REL_TOL,
            workers: vec![1, 4, 8],
            enforce_timing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
    pub limit_ms: Option<f64>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let limit = self
            .limit_ms
            .map_or_else(String::new, |l| format!(" (limit {l} ms)"));
        format!(
            "criterion {:>2} {:<28} {}  {:.3} ms{}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_ms,
            limit,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub lambda_tol: f64,
    pub criteria: Vec<CriterionResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        self.criteria.iter().map(|c| c.line() + "\n").collect()
    }
}

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            ok: true,
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, cond: bool, note: impl Into<String>) {
        let note = note.into();
        if cond {
            self.notes.push(note);
        } else {
            self.ok = false;
            self.notes.push(format!("MISMATCH {note}"));
        }
    }

    fn fail(&mut self, err: Error) {
        self.ok = false;
        self.notes.push(format!("error: {err}"));
    }
}

fn timed(
    id: u8,
    name: &str,
    limit_ms: Option<f64>,
    enforce: bool,
    body: impl FnOnce(&mut Check) -> Result<()>,
) -> CriterionResult {
    let mut check = Check::new();
    let start = Instant::now();
    if let Err(e) = body(&mut check) {
        check.fail(e);
    }
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    if enforce {
        if let Some(limit) = limit_ms {
            if elapsed_ms > limit {
                check.ok = false;
                check.notes.push(format!(
                    "MISMATCH runtime {elapsed_ms:.3} ms over {limit} ms"
                ));
            }
        }
    }
    CriterionResult {
        id,
        name: name.into(),
        passed: check.ok,
        detail: check.notes.join("; "),
        elapsed_ms,
        limit_ms,
    }
}

fn params_of(s: &crate::ZSystem) -> SystemParameters {
    parameters(&build_hypergraph(s))
}

fn fp(s: &crate::ZSystem, p: u64) -> Result<FpSystem> {
    Ok(reduce_mod_p(s, p)?.system)
}

fn search(t: &FpSystem, n: usize, workers: usize) -> Result<SearchResult> {
    max_free(
        t,
        n,
        Freeness::Strong,
        &SearchOptions {
            workers,
            ..SearchOptions::default()
        },
    )
}

/// Minimum of `u^{-αh}(1 + u + … + u^{mh})` over a uniform grid of `(0, 1]`,
/// summed term by term.
pub fn grid_lambda(m: u64, alpha: f64, h: u64, points: usize) -> f64 {
    let top = (m * h) as i32;
    let mut best = f64::INFINITY;
    for i in 1..=points {
        let u = i as f64 / points as f64;
        let mut sum = 0.0;
        let mut pow = 1.0;
        for _ in 0..=top {
            sum += pow;
            pow *= u;
        }
        best = best.min(sum * u.powf(-alpha * h as f64));
    }
    best
}

/// Value, witness and completeness; node counts depend on scheduling.
type Outcome = (usize, PointSet, bool);

fn outcome(r: &SearchResult) -> Outcome {
    (r.value, r.witness.clone(), r.exhaustive)
}

fn strong_values(workers: usize) -> Result<Vec<SearchResult>> {
    let mut out = Vec::new();
    for p in [3, 5] {
        let t = fp(&catalog::s_w(), p)?;
        for n in [1, 2] {
            out.push(search(&t, n, workers)?);
        }
    }
    Ok(out)
}

fn cap_values(workers: usize) -> Result<Vec<SearchResult>> {
    let t = fp(&catalog::s_3ap(), 3)?;
    Ok(vec![search(&t, 1, workers)?, search(&t, 2, workers)?])
}

const FAMILY_SHAPES: [(u64, usize); 4] = [(5, 1), (7, 1), (5, 2), (7, 2)];

fn family_checks(seed: u64, workers: usize) -> Result<Vec<FamilyCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families = Vec::with_capacity(FAMILY_COUNT);
    for i in 0..FAMILY_COUNT {
        let (p, n) = FAMILY_SHAPES[i % FAMILY_SHAPES.len()];
        families.push(random_three_ap_family(p, n, &mut rng)?);
    }
    let run = || {
        families
            .par_iter()
            .map(check_family)
            .collect::<Result<Vec<_>>>()
    };
    if workers == 0 {
        return run();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
        .install(run)
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let num = NumericOptions {
        rel_tol: opts.lambda_tol,
    };
    let enforce = opts.enforce_timing;
    let workers = opts.workers.first().copied().unwrap_or(0);
    let mut criteria = Vec::new();

    criteria.push(timed(1, "parameters", Some(10.0), enforce, |c| {
        for (name, s, want) in [
            ("S1", catalog::s1(), (5, 4, 4, 3)),
            ("SW", catalog::s_w(), (3, 2, 2, 2)),
        ] {
            let q = params_of(&s);
            let got = (q.r1, q.r2, q.l, q.m_max);
            c.expect(got == want, format!("{name} {got:?} expected {want:?}"));
        }
        Ok(())
    }));

    criteria.push(timed(
        2,
        "inequality (r1/2 + r2/e > L)",
        Some(1.0),
        enforce,
        |c| {
            // margins frozen from exact arithmetic: 3/2 + 2/e - 2, 1 + 2/e - 2, 3/2 - 1
            let cases = [
                ((3, 2, 2), true, 0.235_758_882_342_884_7),
                ((2, 2, 2), false, -0.264_241_117_657_115_3),
                ((3, 0, 1), true, 0.5),
            ];
            for ((r1, r2, l), holds, margin) in cases {
                let v = star_inequality(&SystemParameters {
                    r1,
                    r2,
                    l,
                    m_max: 1,
                });
                c.expect(
                    v.holds == holds && (v.margin - margin).abs() <= 1e-12,
                    format!("({r1},{r2},{l}) holds={} margin={:.15}", v.holds, v.margin),
                );
            }
            Ok(())
        },
    ));

    criteria.push(timed(3, "remark constants", Some(1000.0), enforce, |c| {
        for (p, cap) in [(3u64, 0.994), (5, 0.987), (7, 0.983)] {
            let ct = c_tilde_with(3, 2, 2, 2, p, &num)?;
            let ratio = ct.upper() / p as f64;
            c.expect(
                ratio <= cap + 1e-3,
                format!("C~(3,2,2,2,{p})/{p} = {ratio:.6} vs {cap}"),
            );
        }
        let p = 1e6;
        let h = 999_999;
        let a = g_value(&LambdaQuery::new(1, 0.428, h)?, 1.0 - 0.874964 / p)? / p;
        let b = g_value(&LambdaQuery::new(2, 0.358, h)?, 1.0 - 2.72792 / p)? / p;
        c.expect(
            (a - 0.969185).abs() <= 5e-4,
            format!("G ratio {a:.6} vs 0.969185"),
        );
        c.expect(
            (b - 0.969258).abs() <= 5e-4,
            format!("G ratio {b:.6} vs 0.969258"),
        );
        Ok(())
    }));

    criteria.push(timed(
        4,
        "lambda vs grid oracle",
        Some(100.0),
        enforce,
        |c| {
            let v = lambda(&LambdaQuery::new(1, 1.0 / 3.0, 2)?).value;
            let grid = grid_lambda(1, 1.0 / 3.0, 2, 1_000_000);
            c.expect(
                ((v - grid) / grid).abs() <= 1e-6,
                format!("Λ(1,1/3,2) = {v:.9}, grid {grid:.9}"),
            );
            let half = lambda(&LambdaQuery::new(1, 0.5, 2)?);
            c.expect(
                half.value == 3.0,
                format!("Λ(1,1/2,2) = {} at {:?}", half.value, half.optimizer),
            );
            Ok(())
        },
    ));

    criteria.push(timed(5, "theta count identity", Some(5000.0), enforce, |c| {
        let alphas = [
            Ratio::new(0, 1),
            Ratio::new(1, 4),
            Ratio::new(1, 3),
            Ratio::new(1, 2),
            Ratio::new(1, 1),
        ];
        let mut violations = 0;
        let mut cases = 0;
        for m in 1..=3 {
            for h in [1, 2, 4] {
                for alpha in alphas {
                    let bound =
                        lambda(&LambdaQuery::new(m, crate::bounds::ratio_to_f64(alpha), h)?)
                            .upper();
                    for n in 1..=8 {
                        let count = count_theta(m, alpha, h, n)?
                            .to_f64()
                            .unwrap_or(f64::INFINITY);
                        cases += 1;
                        if count > bound.powi(n as i32) {
                            violations += 1;
                        }
                    }
                }
            }
        }
        c.expect(
            violations == 0,
            format!("{violations} violations in {cases} cases"),
        );
        Ok(())
    }));

    criteria.push(timed(
        6,
        "degenerate strong bound",
        Some(5000.0),
        enforce,
        |c| {
            let got = strong_values(workers)?;
            for (r, (p, n)) in got.iter().zip([(3, 1), (3, 2), (5, 1), (5, 2)]) {
                c.expect(
                    r.value == 1 && r.exhaustive,
                    format!("ex_SW(p={p}, n={n}) = {}", r.value),
                );
            }
            Ok(())
        },
    ));

    criteria.push(timed(
        7,
        "cap set desk scale",
        Some(30000.0),
        enforce,
        |c| {
            let got = cap_values(workers)?;
            let lam = lambda(&LambdaQuery::new(1, 1.0 / 3.0, 2)?).upper();
            for (r, (n, want)) in got.iter().zip([(1, 2), (2, 4)]) {
                let bound = lam.powi(n);
                c.expect(
                    r.value == want && r.exhaustive && (r.value as f64) <= bound,
                    format!("ex_3AP(3, n={n}) = {} <= {bound:.3}", r.value),
                );
            }
            Ok(())
        },
    ));

    criteria.push(timed(8, "reduction chain", Some(10.0), enforce, |c| {
        let trace = reduction_sequence(&catalog::s3(), Strategy::Greedy)?
            .ok_or_else(|| Error::Precondition("S3 has no dominant subsystem".into()))?;
        let want = [
            "-x3 + x4 = 0\nx_{1_2_6} - x3 - x4 + x5 = 0",
            "x_{1_2_6} - 2x_{3_4} + x5 = 0",
            "∅(1)",
        ];
        let got: Vec<String> = trace.steps.iter().map(|s| s.result.render()).collect();
        c.expect(
            got == want,
            format!("{} steps, terminal {}", got.len(), trace.terminal.render()),
        );
        c.expect(
            trace.reaches_empty_one && trace.b_tilde == 2,
            format!("b~ = {}", trace.b_tilde),
        );
        let lb = lower_bound_strong(&trace, 5, DEFAULT_EPSILON)?;
        c.expect(
            lb.simple_base == Some(2.5),
            format!("base p/2 at p = 5: {:?}", lb.simple_base),
        );
        Ok(())
    }));

    criteria.push(timed(9, "sphere sets", Some(10000.0), enforce, |c| {
        let mut short = Vec::new();
        for n in 2..=12 {
            for k in 1..=4 {
                if !norm_class_counts(n, k)?.meets_pigeonhole_bound() {
                    short.push((n, k));
                }
            }
        }
        c.expect(short.is_empty(), format!("class bound fails at {short:?}"));
        let systems = [catalog::s_3ap(), parse_system("2x2 - x1 - x3 = 0")?];
        for (n, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let y = best_sphere_set(n, k)?;
            for s in &systems {
                c.expect(
                    verify_construction(s, &y)?,
                    format!("n={n} k={k} |Y|={} under {}", y.len(), s.render()),
                );
            }
        }
        Ok(())
    }));

    criteria.push(timed(
        10,
        "mod-p faithfulness",
        Some(5000.0),
        enforce,
        |c| {
            for p in [3, 5, 7] {
                let f = mod_p_faithfulness(&catalog::s_3ap(), p, 2)?;
                c.expect(
                    f.coincide,
                    format!(
                        "p={p} k={} integer={} field={}",
                        f.k, f.integer_solutions, f.field_solutions
                    ),
                );
            }
            Ok(())
        },
    ));

    criteria.push(timed(11, "W-shape sandwich", Some(1000.0), enforce, |c| {
        let lower = lower_bound_weak(&catalog::s_w(), 3)?.map(|r| r.base);
        let exact = max_free(
            &fp(&catalog::s_w(), 3)?,
            1,
            Freeness::Weak,
            &SearchOptions {
                workers,
                ..SearchOptions::default()
            },
        )?;
        let upper = wshape_upper(3, 1)?;
        let ok = lower == Some(1.5)
            && exact.value == 3
            && exact.exhaustive
            && 1.5 <= 3.0
            && 3.0 <= upper
            && (upper - 20.93).abs() < 0.01;
        c.expect(ok, format!("{lower:?} <= {} <= {upper:.4}", exact.value));
        Ok(())
    }));

    criteria.push(timed(12, "proof devices", Some(60000.0), enforce, |c| {
        let checks = family_checks(opts.seed, workers)?;
        let failed: Vec<usize> = checks
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.passed())
            .map(|(i, _)| i)
            .collect();
        let rows: usize = checks.iter().map(|f| f.rows).sum();
        c.expect(
            failed.is_empty(),
            format!("{} families, {rows} rows, failing {failed:?}", checks.len()),
        );
        Ok(())
    }));

    criteria.push(timed(13, "determinism", None, enforce, |c| {
        let mut runs = Vec::new();
        for &w in &opts.workers {
            let strong: Vec<Outcome> = strong_values(w)?.iter().map(outcome).collect();
            let cap: Vec<Outcome> = cap_values(w)?.iter().map(outcome).collect();
            runs.push((w, strong, cap, family_checks(opts.seed, w)?));
        }
        let Some(first) = runs.first() else {
            c.expect(false, "no worker counts given");
            return Ok(());
        };
        for run in &runs[1..] {
            c.expect(
                run.1 == first.1,
                format!("criterion 6 with {} vs {} workers", run.0, first.0),
            );
            c.expect(
                run.2 == first.2,
                format!("criterion 7 with {} vs {} workers", run.0, first.0),
            );
            c.expect(
                run.3 == first.3,
                format!("criterion 12 with {} vs {} workers", run.0, first.0),
            );
        }
        Ok(())
    }));

    SelftestReport {
        seed: opts.seed,
        lambda_tol: opts.lambda_tol,
        criteria,
    }
}
