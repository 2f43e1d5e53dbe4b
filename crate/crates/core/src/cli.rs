//! Command-line front end. Exit codes: 0 success, 1 input error,
//! 2 a requested verification failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::{
    bound_small_p, c_tilde, count_theta, lambda_with, parallelogram_upper, star_inequality, upper_bound_strong,
    wshape_upper, LambdaQuery, NumericOptions,
};
use crate::catalog;
use crate::dominance::{
    dominant_subsystems, lower_bound_strong, lower_bound_weak, reduction_sequence, Strategy, DEFAULT_EPSILON,
};
use crate::eqsys::{parse_system, reduce_mod_p, FpSystem, ZSystem};
use crate::error::{Error, Result};
use crate::lattice::{best_sphere_set, embed_mod_p, norm_class_counts, sphere_points, verify_points};
use crate::oracle::{
    is_multicolored_free, is_strongly_free, is_weakly_free, max_free, Freeness, Matching, PointSet, SearchOptions,
};
use crate::oracle::search::EXACT_SEARCH_LIMIT;
use crate::selftest::{run_selftest, SelftestOptions, DEFAULT_SEED};
use crate::structure::{build_hypergraph, is_irreducible, parameters, StructureReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "linsys", version, about = "Balanced linear systems over finite fields: bounds, reductions, constructions, exhaustive checks")]
pub struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Worker threads for searches; 0 lets the runtime decide.
    #[arg(long, env = "LINSYS_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hypergraph, parameters, irreducibility and the slice-rank bound.
    Analyze(AnalyzeArgs),
    /// The constant Λ_{m,α,h}.
    Lambda(LambdaArgs),
    /// The two-class constant C̃_{(r1,r2,L,m)}(d).
    Ctilde(CtildeArgs),
    /// The parameter inequality r1/2 + r2/e > L.
    Star(StarArgs),
    /// Upper bound for strongly free sets.
    Upper(UpperArgs),
    /// Dominant reduction sequence.
    Reduce(ReduceArgs),
    /// Lower bound from dominant reductions.
    LowerBound(LowerBoundArgs),
    /// Norm classes and sphere sets in {0,…,k}^n.
    Behrend(BehrendArgs),
    /// Exact largest free set by exhaustive search.
    Search(SearchArgs),
    /// Check a point set or matching for freeness.
    Verify(VerifyArgs),
    /// Reduction, construction, exact value and bounds side by side.
    Certify(CertifyArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

/// Built-in name (SW, S4AP, S3AP, SP, SPP, S1, S2, S3, STARk) or a `.lineq` file.
#[derive(Debug, Args)]
pub struct SystemArg {
    pub system: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long)]
    pub m: u64,
    /// Decimal or `a/b`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub h: u64,
    /// Keep α as an exact fraction instead of a float.
    #[arg(long)]
    pub rational: bool,
    /// Also count Θ_{m,α,h}(n) for this n; needs --rational.
    #[arg(long)]
    pub theta_n: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CtildeArgs {
    #[arg(long)]
    pub r1: u64,
    #[arg(long)]
    pub r2: u64,
    #[arg(long = "L", alias = "l")]
    pub l: u64,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub d: u64,
}

#[derive(Debug, Args)]
pub struct StarArgs {
    #[arg(long)]
    pub r1: usize,
    #[arg(long)]
    pub r2: usize,
    #[arg(long = "L", alias = "l")]
    pub l: usize,
}

#[derive(Debug, Args)]
pub struct UpperArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Report the tensor-power constant c(p) with q = p^N instead.
    #[arg(long)]
    pub tensor: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Exhaustive,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Greedy => Strategy::Greedy,
            StrategyArg::Exhaustive => Strategy::Exhaustive,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[arg(long, value_enum, default_value = "greedy")]
    pub strategy: StrategyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Strong,
    Weak,
}

#[derive(Debug, Args)]
pub struct LowerBoundArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "strong")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "greedy")]
    pub strategy: StrategyArg,
}

#[derive(Debug, Args)]
pub struct BehrendArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: u64,
    /// List the points of the largest class.
    #[arg(long)]
    pub materialize: bool,
    /// Squared radius to list instead of the largest class.
    #[arg(long)]
    pub radius_sq: Option<u64>,
    /// Embed the listed points into F_p^n.
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "strong")]
    pub kind: KindArg,
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: usize,
    /// Built-in name or file; S3AP when omitted.
    #[arg(long, default_value = "S3AP")]
    pub system: String,
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyKind {
    Strong,
    Weak,
    Multicolor,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub kind: VerifyKind,
    /// CSV of residues, one point per row; for multicolor, r·n columns per row.
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value = "S3AP")]
    pub system: String,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub system: SystemArg,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative tolerance attached to minimised constants.
    #[arg(long)]
    pub lambda_tol: Option<f64>,
    /// Skip the runtime limits.
    #[arg(long)]
    pub no_timing: bool,
}

/// Command output plus the exit code it implies.
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Self { json, text, code: EXIT_OK }
    }
}

pub fn load_system(spec: &str) -> Result<ZSystem> {
    if let Some(s) = catalog::by_name(spec) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::InvalidArgument(format!("{spec}: not a built-in system and not readable ({e})")))?;
    parse_system(&text)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn text_of(v: &Value) -> String {
    match v {
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {}\n", scalar(v))).collect(),
        other => format!("{}\n", scalar(other)),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn plain(json: Value) -> Outcome {
    let text = text_of(&json);
    Outcome::ok(json, text)
}

fn fp_of(s: &ZSystem, p: u64, warnings: &mut Vec<String>) -> Result<FpSystem> {
    let red = reduce_mod_p(s, p)?;
    if red.support_changed() {
        warnings.push(format!("reduction mod {p} changes the support of the system; parameters are taken mod {p}"));
    }
    Ok(red.system)
}

fn search_options(threads: usize, budget: Option<u64>) -> SearchOptions {
    let mut opts = SearchOptions { workers: threads, ..SearchOptions::default() };
    if let Some(b) = budget {
        opts.node_budget = b;
    }
    opts
}

fn analyze(a: &AnalyzeArgs) -> Result<Outcome> {
    let s = load_system(&a.system.system)?;
    s.require_balanced()?;
    let h = build_hypergraph(&s);
    let mut out = match to_json(&StructureReport::new(&h)) {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    let star = star_inequality(&parameters(&h));
    out.insert("star".into(), json!(star.holds));
    out.insert("star_margin".into(), json!(star.margin));
    let mut warnings = Vec::new();
    if let Some(p) = a.p {
        let t = fp_of(&s, p, &mut warnings)?;
        let ht = build_hypergraph(&t);
        out.insert("p".into(), json!(p));
        out.insert("n".into(), json!(a.n));
        if is_irreducible(&ht).irreducible {
            let q = parameters(&ht);
            let ct = c_tilde(q.r1 as u64, q.r2 as u64, q.l as u64, q.m_max as u64, p)?;
            out.insert("c_tilde_bound".into(), json!(ct.upper().powi(a.n as i32)));
            out.insert("c_tilde".into(), to_json(&ct));
            let ub = upper_bound_strong(&t, a.n)?;
            warnings.extend(ub.warnings.iter().cloned());
            out.insert("upper".into(), to_json(&ub));
        } else {
            warnings.push(format!("system mod {p} is not irreducible; no upper bound derived"));
        }
    }
    out.insert("warnings".into(), json!(warnings));
    Ok(plain(Value::Object(out)))
}

fn parse_alpha(text: &str, rational: bool) -> Result<(f64, Option<Ratio<u64>>)> {
    let bad = || Error::InvalidArgument(format!("cannot read alpha from {text:?}"));
    if rational {
        let (num, den) = text.split_once('/').unwrap_or((text, "1"));
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        let r = Ratio::new(num, den);
        Ok((crate::bounds::ratio_to_f64(r), Some(r)))
    } else if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad())?;
        let den: f64 = den.trim().parse().map_err(|_| bad())?;
        Ok((num / den, None))
    } else {
        let v: f64 = text.trim().parse().map_err(|_| bad())?;
        Ok((v, None))
    }
}

fn lambda_cmd(a: &LambdaArgs) -> Result<Outcome> {
    let (alpha, exact) = parse_alpha(&a.alpha, a.rational)?;
    let q = LambdaQuery::new(a.m, alpha, a.h)?;
    let opts = a.tolerance.map_or_else(NumericOptions::default, |rel_tol| NumericOptions { rel_tol });
    let mut out = to_json(&lambda_with(&q, &opts));
    if let Some(n) = a.theta_n {
        let r = exact.ok_or_else(|| Error::InvalidArgument("--theta-n needs --rational".into()))?;
        out["count_theta"] = json!(count_theta(a.m, r, a.h, n)?.to_string());
    }
    Ok(plain(out))
}

fn upper_cmd(a: &UpperArgs) -> Result<Outcome> {
    let s = load_system(&a.system.system)?;
    s.require_balanced()?;
    let mut warnings = Vec::new();
    let t = fp_of(&s, a.p, &mut warnings)?;
    if let Some(big_n) = a.tensor {
        let mut out = to_json(&bound_small_p(&t, big_n)?);
        out["warnings"] = json!(warnings);
        return Ok(plain(out));
    }
    let ub = upper_bound_strong(&t, a.n)?;
    warnings.extend(ub.warnings.iter().cloned());
    Ok(plain(json!({
        "value": ub.bound,
        "optimizer": ub.base.optimizer,
        "tolerance": ub.base.tolerance,
        "base": ub.base.value,
        "method": ub.base.method,
        "star": ub.star.holds,
        "warnings": warnings,
    })))
}

fn reduce_cmd(a: &ReduceArgs) -> Result<Outcome> {
    let s = load_system(&a.system.system)?;
    s.require_balanced()?;
    Ok(match reduction_sequence(&s, a.strategy.into())? {
        Some(trace) => Outcome::ok(to_json(&trace), trace.render() + "\n"),
        None => no_dominant(),
    })
}

fn no_dominant() -> Outcome {
    let msg = "no dominant subsystem; no lower bound derived";
    Outcome::ok(json!({ "dominant": false, "message": msg }), format!("{msg}\n"))
}

fn lower_bound_cmd(a: &LowerBoundArgs) -> Result<Outcome> {
    let s = load_system(&a.system.system)?;
    s.require_balanced()?;
    match a.kind {
        KindArg::Strong => match reduction_sequence(&s, a.strategy.into())? {
            Some(trace) => Ok(plain(to_json(&lower_bound_strong(&trace, a.p, a.epsilon)?))),
            None => Ok(no_dominant()),
        },
        KindArg::Weak => match lower_bound_weak(&s, a.p)? {
            Some(rep) => Ok(plain(to_json(&rep))),
            None => Ok(no_dominant()),
        },
    }
}

fn csv_rows(points: &[Vec<u64>]) -> String {
    points.iter().map(|pt| pt.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n").collect()
}

fn behrend_cmd(a: &BehrendArgs) -> Result<Outcome> {
    let table = norm_class_counts(a.n, a.k)?;
    let (best_norm, best_count) = table.best().ok_or_else(|| Error::InvalidArgument("empty box".into()))?;
    let mut out = json!({
        "n": a.n,
        "k": a.k,
        "counts": to_json(&table)["counts"],
        "best_radius_sq": best_norm,
        "best_count": best_count.to_string(),
        "pigeonhole_bound": table.pigeonhole_bound(),
        "meets_bound": table.meets_pigeonhole_bound(),
    });
    let mut text = format!(
        "n: {}\nk: {}\nbest_radius_sq: {best_norm}\nbest_count: {best_count}\npigeonhole_bound: {}\nmeets_bound: {}\n",
        a.n,
        a.k,
        table.pigeonhole_bound(),
        table.meets_pigeonhole_bound()
    );
    if a.materialize || a.radius_sq.is_some() {
        let y = match a.radius_sq {
            Some(r) => sphere_points(a.n, a.k, r)?,
            None => best_sphere_set(a.n, a.k)?,
        };
        let points = match a.p {
            Some(p) => {
                out["p"] = json!(p);
                embed_mod_p(&y, p)?.points().to_vec()
            }
            None => y.points.clone(),
        };
        out["radius_sq"] = json!(y.radius_sq);
        out["points"] = json!(points);
        text = csv_rows(&points);
    }
    Ok(Outcome::ok(out, text))
}

fn kind_of(k: KindArg) -> Freeness {
    match k {
        KindArg::Strong => Freeness::Strong,
        KindArg::Weak => Freeness::Weak,
    }
}

fn search_cmd(a: &SearchArgs, threads: usize) -> Result<Outcome> {
    let s = load_system(&a.system)?;
    let mut warnings = Vec::new();
    let t = fp_of(&s, a.p, &mut warnings)?;
    let res = max_free(&t, a.n, kind_of(a.kind), &search_options(threads, a.budget))?;
    let text = format!(
        "# value {} ({}), {} nodes\n{}",
        res.value,
        if res.exhaustive { "exhaustive" } else { "budget exhausted, best found" },
        res.nodes_explored,
        res.witness.to_csv()
    );
    let text = if text.ends_with('\n') { text } else { text + "\n" };
    let mut out = to_json(&res);
    out["warnings"] = json!(warnings);
    Ok(Outcome::ok(out, text))
}

fn verify_cmd(a: &VerifyArgs) -> Result<Outcome> {
    let s = load_system(&a.system)?;
    let mut warnings = Vec::new();
    let t = fp_of(&s, a.p, &mut warnings)?;
    let text = std::fs::read_to_string(&a.set).map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.set.display())))?;
    let (free, size) = match a.kind {
        VerifyKind::Strong => {
            let set = PointSet::parse_csv(a.p, &text)?;
            (is_strongly_free(&t, &set)?, set.len())
        }
        VerifyKind::Weak => {
            let set = PointSet::parse_csv(a.p, &text)?;
            (is_weakly_free(&t, &set)?, set.len())
        }
        VerifyKind::Multicolor => {
            let r = t.variable_count();
            let cols = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).find(|l| !l.is_empty()).map_or(0, |l| l.split(',').count());
            if cols == 0 || cols % r != 0 {
                return Err(Error::InvalidArgument(format!("matching rows need a multiple of {r} columns")));
            }
            let m = Matching::parse_csv(a.p, cols / r, &text)?;
            (is_multicolored_free(&t, &m)?, m.len())
        }
    };
    let json = json!({ "kind": format!("{:?}", a.kind).to_lowercase(), "free": free, "size": size, "warnings": warnings });
    let text = text_of(&json);
    Ok(Outcome { json, text, code: if free { EXIT_OK } else { EXIT_VERIFY } })
}

/// Known weak upper bounds by system shape, `p^n` otherwise.
fn weak_upper(s: &ZSystem, p: u64, n: u32) -> Result<(f64, &'static str)> {
    let same = |other: ZSystem| s.rows() == other.rows();
    if same(catalog::s_w()) {
        Ok((wshape_upper(p, n)?, "W-shape bound"))
    } else if same(catalog::s_p()) {
        Ok((parallelogram_upper(p, n)?, "parallelogram bound"))
    } else {
        Ok(((p as f64).powi(n as i32), "trivial p^n"))
    }
}

fn certify_cmd(a: &CertifyArgs, threads: usize) -> Result<Outcome> {
    let s = load_system(&a.system.system)?;
    s.require_balanced()?;
    let p = a.p;
    let n = a.n;
    let mut warnings = Vec::new();
    let t = fp_of(&s, p, &mut warnings)?;
    let opts = search_options(threads, None);
    let searchable = u32::try_from(n).ok().and_then(|e| p.checked_pow(e)).is_some_and(|size| size <= EXACT_SEARCH_LIMIT);
    if dominant_subsystems(&s)?.maximal.is_empty() {
        return Ok(no_dominant());
    }
    let mut out = Map::new();
    let mut text = String::new();
    let mut failed = Vec::new();
    out.insert("system".into(), json!(s.render()));
    out.insert("p".into(), json!(p));
    out.insert("n".into(), json!(n));

    let trace = reduction_sequence(&s, Strategy::Greedy)?.filter(|tr| tr.reaches_empty_one && p > tr.b_tilde);
    if let Some(trace) = trace {
        out.insert("chain".into(), json!("strong"));
        text += &format!("{}\n", trace.render());
        text += &format!("steps: {}, b~ = {}\n", trace.steps.len(), trace.b_tilde);
        out.insert("steps".into(), json!(trace.steps.len()));
        out.insert("b_tilde".into(), json!(trace.b_tilde));
        out.insert("trace".into(), json!(trace.render()));
        let lb = lower_bound_strong(&trace, p, a.epsilon)?;
        out.insert("lower_bound".into(), to_json(&lb));
        let k = (p - 1) / trace.b_tilde;
        let mut lower = 1.0;
        if n >= 2 && k >= 1 {
            let y = best_sphere_set(n, k)?;
            let embedded = embed_mod_p(&y, p)?;
            let signed: Vec<Vec<i64>> = y.points.iter().map(|pt| pt.iter().map(|&x| x as i64).collect()).collect();
            let over_z = verify_points(&s, &signed)?;
            let over_fp = is_strongly_free(&t, &embedded)?;
            let verified = over_z && over_fp;
            if !verified {
                failed.push("sphere set is not strongly free".to_string());
            }
            lower = y.len() as f64;
            text += &format!(
                "sphere set: k = {k}, radius^2 = {}, {} points, {}\n",
                y.radius_sq,
                y.len(),
                if verified { "verified" } else { "NOT free" }
            );
            out.insert(
                "sphere_set".into(),
                json!({ "k": k, "radius_sq": y.radius_sq, "size": y.len(), "points": y.points, "verified": verified }),
            );
        } else {
            text += "sphere set: skipped (needs n >= 2 and k >= 1)\n";
        }
        let exact = if searchable {
            let r = max_free(&t, n, Freeness::Strong, &opts)?;
            r.exhaustive.then_some(r.value)
        } else {
            None
        };
        let upper = if is_irreducible(&build_hypergraph(&t)).irreducible {
            Some(upper_bound_strong(&t, n as u32)?.bound)
        } else {
            None
        };
        sandwich(&mut out, &mut text, &mut failed, lower, exact, upper);
    } else if let Some(lb) = lower_bound_weak(&s, p)? {
        out.insert("chain".into(), json!("weak"));
        let lower = lb.base.powi(n as i32);
        out.insert("lower_bound".into(), to_json(&lb));
        let exact = if searchable {
            let r = max_free(&t, n, Freeness::Weak, &opts)?;
            r.exhaustive.then_some(r.value)
        } else {
            None
        };
        let (upper, source) = weak_upper(&s, p, n as u32)?;
        out.insert("upper_source".into(), json!(source));
        text += "weak chain\n";
        sandwich(&mut out, &mut text, &mut failed, lower, exact, Some(upper));
    } else {
        let msg = "no reduction to the one-variable empty system and no dominant coefficient b with 2 <= b < p; no lower bound derived";
        out.insert("message".into(), json!(msg));
        text += msg;
        text += "\n";
    }
    out.insert("warnings".into(), json!(warnings));
    out.insert("failures".into(), json!(failed));
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_VERIFY };
    Ok(Outcome { json: Value::Object(out), text, code })
}

fn sandwich(out: &mut Map<String, Value>, text: &mut String, failed: &mut Vec<String>, lower: f64, exact: Option<usize>, upper: Option<f64>) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "?".to_string(), |v| format!("{v:.4}"));
    let exact_f = exact.map(|v| v as f64);
    *text += &format!("sandwich: {} <= {} <= {}\n", fmt(Some(lower)), exact.map_or_else(|| "?".into(), |v| v.to_string()), fmt(upper));
    let mut ok = true;
    if let Some(e) = exact_f {
        ok &= lower <= e;
        if let Some(u) = upper {
            ok &= e <= u;
        }
    } else if let Some(u) = upper {
        ok &= lower <= u;
    }
    if !ok {
        failed.push("sandwich violated".into());
    }
    out.insert("sandwich".into(), json!({ "lower": lower, "exact": exact, "upper": upper, "holds": ok }));
}

fn selftest_cmd(a: &SelftestArgs, threads: usize) -> Outcome {
    let mut opts = SelftestOptions { seed: a.seed, enforce_timing: !a.no_timing, ..SelftestOptions::default() };
    if let Some(tol) = a.lambda_tol {
        opts.lambda_tol = tol;
    }
    if threads > 0 && !opts.workers.contains(&threads) {
        opts.workers.insert(0, threads);
    }
    let report = run_selftest(&opts);
    let code = if report.passed() { EXIT_OK } else { EXIT_VERIFY };
    Outcome { json: to_json(&report), text: report.render(), code }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let threads = cli.threads;
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Lambda(a) => lambda_cmd(a),
        Command::Ctilde(a) => Ok(plain(to_json(&c_tilde(a.r1, a.r2, a.l, a.m, a.d)?))),
        Command::Star(a) => {
            let v = star_inequality(&crate::structure::SystemParameters { r1: a.r1, r2: a.r2, l: a.l, m_max: 1 });
            Ok(plain(json!({ "value": v.holds, "holds": v.holds, "margin": v.margin })))
        }
        Command::Upper(a) => upper_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::LowerBound(a) => lower_bound_cmd(a),
        Command::Behrend(a) => behrend_cmd(a),
        Command::Search(a) => search_cmd(a, threads),
        Command::Verify(a) => verify_cmd(a),
        Command::Certify(a) => certify_cmd(a, threads),
        Command::Selftest(a) => Ok(selftest_cmd(a, threads)),
    }
}

/// Parses `args`, runs the command and writes to the given streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string(&o.json).expect("json values print") + "\n",
                Format::Text => o.text,
            };
            let _ = out.write_all(body.as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
