//! Command-line front end: `eval`, `compare` and `domain`.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 a route did not
//! converge, 3 `compare` found a deviation above `--tol-compare`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::domain::{
    classify_domain, make_window_with, parse_rational, BetaIndex, DomainSpec, EvalWindow,
    PowerFunction, WindowRule,
};
use crate::error::Error;
use crate::hypergeom::{hyp_form, DEFAULT_TOL};
use crate::oracle::{quad_rlfd_centered, quad_rlfd_default, quad_rlfi_with_error, QuadratureConfig};
use crate::series::{
    check_alpha, closed_centered, polynomial_value, series_for, OperatorKind, Route, SeriesConfig,
    Status,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_DEVIATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracpow", version, about = "Fractional integrals and derivatives of (t - d)^β")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the operator on every requested route.
    Eval(JobArgs),
    /// Tabulate the largest pairwise deviation between routes.
    Compare {
        #[command(flatten)]
        job: JobArgs,
        /// Deviation threshold (default 1e-7).
        #[arg(long, allow_hyphen_values = true)]
        tol_compare: Option<f64>,
    },
    /// Print the real domain of (t - d)^β and the lower-limit windows.
    Domain(DomainArgs),
}

#[derive(Debug, Args, Default)]
struct BetaArgs {
    #[arg(long, allow_hyphen_values = true)]
    beta_int: Option<i64>,
    /// Reduced or unreduced p/q.
    #[arg(long, allow_hyphen_values = true)]
    beta_rational: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta_real: Option<f64>,
}

#[derive(Debug, Args)]
struct DomainArgs {
    #[command(flatten)]
    beta: BetaArgs,
    #[arg(long, allow_hyphen_values = true)]
    d: f64,
}

#[derive(Debug, Args, Default)]
struct JobArgs {
    /// J (integral) or D (derivative).
    #[arg(long)]
    op: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[command(flatten)]
    beta: BetaArgs,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Explicit lower limit.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Lower limit d + eps.
    #[arg(long)]
    eps: Option<f64>,
    /// Lower limit a = d.
    #[arg(long)]
    centered: bool,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// start,stop,n (inclusive, n points).
    #[arg(long, allow_hyphen_values = true)]
    t_lin: Option<String>,
    /// Comma-separated subset of series,hyp,oracle,closed.
    #[arg(long)]
    route: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_terms: Option<usize>,
    /// table, csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Use the (a, a + ε/2) window on both sides of d.
    #[arg(long)]
    strict_window: bool,
    /// Flat key=value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl JobArgs {
    /// Flags given on the command line, keyed like the config file.
    fn to_map(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k, v);
            }
        };
        put("op", self.op.clone());
        put("alpha", self.alpha.map(|x| x.to_string()));
        put("beta-int", self.beta.beta_int.map(|x| x.to_string()));
        put("beta-rational", self.beta.beta_rational.clone());
        put("beta-real", self.beta.beta_real.map(|x| format!("{x:?}")));
        put("d", self.d.map(|x| format!("{x:?}")));
        put("a", self.a.map(|x| format!("{x:?}")));
        put("eps", self.eps.map(|x| format!("{x:?}")));
        put("centered", self.centered.then(|| "true".to_string()));
        put("t", self.t.map(|x| format!("{x:?}")));
        put("t-lin", self.t_lin.clone());
        put("route", self.route.clone());
        put("tol", self.tol.map(|x| format!("{x:?}")));
        put("max-terms", self.max_terms.map(|x| x.to_string()));
        put("format", self.format.clone());
        put("strict-window", self.strict_window.then(|| "true".to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        m
    }
}

const CONFIG_KEYS: &[&str] = &[
    "op", "alpha", "beta-int", "beta-rational", "beta-real", "d", "a", "eps", "centered", "t",
    "t-lin", "route", "tol", "max-terms", "format", "strict-window", "out", "tol-compare",
];

/// Keys that select the same setting; a command-line flag from a group
/// replaces every config entry of that group.
const EXCLUSIVE_GROUPS: &[&[&str]] = &[
    &["beta-int", "beta-rational", "beta-real"],
    &["a", "eps", "centered"],
    &["t", "t-lin"],
];

fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut m = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let k = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key '{k}'", n + 1));
        }
        m.insert(k, v.trim().to_string());
    }
    Ok(m)
}

fn merge(config: BTreeMap<String, String>, cli: BTreeMap<&'static str, String>) -> BTreeMap<String, String> {
    let mut merged = config;
    for group in EXCLUSIVE_GROUPS {
        if group.iter().any(|k| cli.contains_key(k)) {
            for k in *group {
                merged.remove(*k);
            }
        }
    }
    for (k, v) in cli {
        merged.insert(k.to_string(), v);
    }
    merged
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerLimit {
    Explicit(f64),
    DPlus(f64),
    Centered,
}

/// A fully validated evaluation request.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub beta: BetaIndex,
    pub d: f64,
    pub lower: LowerLimit,
    pub ts: Vec<f64>,
    pub routes: Vec<Route>,
    pub tol: f64,
    pub max_terms: usize,
    pub format: Format,
    pub rule: WindowRule,
    pub out: Option<PathBuf>,
    pub tol_compare: f64,
}

fn get_f64(m: &BTreeMap<String, String>, k: &str) -> Result<Option<f64>, String> {
    m.get(k)
        .map(|v| v.parse::<f64>().map_err(|e| format!("--{k}: {e}")))
        .transpose()
}

fn get_bool(m: &BTreeMap<String, String>, k: &str) -> Result<bool, String> {
    match m.get(k).map(String::as_str) {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(other) => Err(format!("--{k}: expected true or false, got '{other}'")),
    }
}

fn parse_beta(int: Option<&str>, rational: Option<&str>, real: Option<&str>) -> Result<BetaIndex, String> {
    match (int, rational, real) {
        (Some(v), None, None) => v
            .parse::<i64>()
            .map(BetaIndex::integer)
            .map_err(|e| format!("--beta-int: {e}")),
        (None, Some(v), None) => parse_rational(v).map_err(|e| e.to_string()),
        (None, None, Some(v)) => {
            let x = v.parse::<f64>().map_err(|e| format!("--beta-real: {e}"))?;
            BetaIndex::real(x).map_err(|e| e.to_string())
        }
        (None, None, None) => Err("one of --beta-int, --beta-rational, --beta-real is required".into()),
        _ => Err("give exactly one of --beta-int, --beta-rational, --beta-real".into()),
    }
}

fn parse_t_lin(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [start, stop, n] = parts.as_slice() else {
        return Err("--t-lin expects start,stop,n".into());
    };
    let start: f64 = start.parse().map_err(|e| format!("--t-lin start: {e}"))?;
    let stop: f64 = stop.parse().map_err(|e| format!("--t-lin stop: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("--t-lin n: {e}"))?;
    match n {
        0 => Err("--t-lin needs n >= 1".into()),
        1 => Ok(vec![start]),
        _ => Ok((0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn build_job(m: &BTreeMap<String, String>) -> Result<JobSpec, String> {
    let kind = match m.get("op").map(String::as_str) {
        Some("J") | Some("j") => OperatorKind::Integral,
        Some("D") | Some("d") => OperatorKind::Derivative,
        Some(other) => return Err(format!("--op must be J or D, got '{other}'")),
        None => return Err("--op is required".into()),
    };
    let alpha = get_f64(m, "alpha")?.ok_or("--alpha is required")?;
    check_alpha(alpha).map_err(|e| e.to_string())?;
    let beta = parse_beta(
        m.get("beta-int").map(String::as_str),
        m.get("beta-rational").map(String::as_str),
        m.get("beta-real").map(String::as_str),
    )?;
    let d = get_f64(m, "d")?.unwrap_or(0.0);
    let a = get_f64(m, "a")?;
    let eps = get_f64(m, "eps")?;
    let centered = get_bool(m, "centered")?;
    let lower = match (a, eps, centered) {
        (Some(a), None, false) => LowerLimit::Explicit(a),
        (None, Some(e), false) => LowerLimit::DPlus(e),
        (None, None, true) => LowerLimit::Centered,
        (None, None, false) => return Err("one of --a, --eps, --centered is required".into()),
        _ => return Err("give exactly one of --a, --eps, --centered".into()),
    };
    let mut ts = match (get_f64(m, "t")?, m.get("t-lin")) {
        (Some(t), None) => vec![t],
        (None, Some(s)) => parse_t_lin(s)?,
        (None, None) => return Err("one of --t, --t-lin is required".into()),
        _ => return Err("give only one of --t, --t-lin".into()),
    };
    if ts.iter().any(|t| !t.is_finite()) {
        return Err("t values must be finite".into());
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut routes = m
        .get("route")
        .map(String::as_str)
        .unwrap_or("series")
        .split(',')
        .map(str::parse::<Route>)
        .collect::<Result<Vec<_>, _>>()?;
    routes.sort();
    routes.dedup();
    let tol = get_f64(m, "tol")?.unwrap_or(SeriesConfig::default().tol);
    if !(tol > 0.0) {
        return Err("--tol must be positive".into());
    }
    let max_terms = m
        .get("max-terms")
        .map(|v| v.parse::<usize>().map_err(|e| format!("--max-terms: {e}")))
        .transpose()?
        .unwrap_or(SeriesConfig::default().max_terms);
    if max_terms == 0 {
        return Err("--max-terms must be positive".into());
    }
    let format = match m.get("format").map(String::as_str).unwrap_or("table") {
        "table" => Format::Table,
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(format!("--format must be table, csv or json, got '{other}'")),
    };
    let rule = if get_bool(m, "strict-window")? {
        WindowRule::Strict
    } else {
        WindowRule::SideDependent
    };
    let tol_compare = get_f64(m, "tol-compare")?.unwrap_or(1e-7);
    Ok(JobSpec {
        kind,
        alpha,
        beta,
        d,
        lower,
        ts,
        routes,
        tol,
        max_terms,
        format,
        rule,
        out: m.get("out").map(PathBuf::from),
        tol_compare,
    })
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Record {
    pub op: String,
    pub alpha: f64,
    pub beta: String,
    pub d: f64,
    pub a: f64,
    pub t: f64,
    pub route: String,
    pub value: Option<f64>,
    pub terms: usize,
    pub remainder: Option<f64>,
    pub status: String,
}

pub const CSV_HEADER: [&str; 11] = [
    "op", "alpha", "beta", "d", "a", "t", "route", "value", "terms", "remainder", "status",
];

fn machine(x: f64) -> String {
    format!("{x:.16e}")
}

fn machine_opt(x: Option<f64>) -> Option<String> {
    x.filter(|v| v.is_finite()).map(machine)
}

fn human(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.8e}"),
        Some(v) => format!("{v}"),
        None => "-".into(),
    }
}

/// The resolved evaluation problem shared by every route.
struct Problem {
    kind: OperatorKind,
    alpha: f64,
    pf: PowerFunction,
    a: f64,
    /// `None` when only `t >= a` is required (polynomial exponents).
    win: Option<EvalWindow>,
    centered: bool,
}

impl Problem {
    fn new(job: &JobSpec) -> Result<Self, Error> {
        let pf = PowerFunction::new(job.d, job.beta);
        let a = match job.lower {
            LowerLimit::Explicit(a) => a,
            LowerLimit::DPlus(e) => EvalWindow::d_plus(&pf, e, job.rule)?.a,
            LowerLimit::Centered => job.d,
        };
        let centered = a == job.d;
        let win = if job.beta.natural().is_some() || centered {
            None
        } else {
            Some(match job.lower {
                LowerLimit::DPlus(e) => EvalWindow::d_plus(&pf, e, job.rule)?,
                _ => make_window_with(a, &pf, job.rule)?,
            })
        };
        Ok(Problem {
            kind: job.kind,
            alpha: job.alpha,
            pf,
            a,
            win,
            centered,
        })
    }

    fn validate_t(&self, t: f64, routes: &[Route]) -> Result<(), Error> {
        match &self.win {
            Some(w) => w.require(t)?,
            None if t < self.a => {
                return Err(Error::WindowViolation {
                    t,
                    t_min: self.a,
                    t_sup: f64::INFINITY,
                })
            }
            None => {}
        }
        if self.kind == OperatorKind::Derivative && t == self.a && self.alpha > 0.0 && self.alpha < 1.0 {
            return Err(Error::EvalAtLowerLimit(self.a));
        }
        let analytic_at_d = self.pf.beta.natural().is_some();
        if self.centered && !analytic_at_d && (routes.contains(&Route::Series) || routes.contains(&Route::Hypergeometric)) {
            return Err(Error::CenteredNotAnalytic(self.a));
        }
        if routes.contains(&Route::ClosedCentered) && !self.centered {
            return Err(Error::InvalidConfig("the closed route needs --centered".into()));
        }
        Ok(())
    }
}

/// Outcome of one (t, route) evaluation.
struct Outcome {
    value: f64,
    terms: usize,
    remainder: f64,
    status: Status,
}

fn evaluate(p: &Problem, route: Route, t: f64, cfg: &SeriesConfig) -> Result<Outcome, Error> {
    let exact = |value: f64, terms: usize| Outcome {
        value,
        terms,
        remainder: 0.0,
        status: Status::Converged,
    };
    match route {
        Route::Series => {
            if let Some(m) = p.pf.beta.natural() {
                let v = polynomial_value(p.kind, m, p.pf.d, p.a, p.alpha, t)?;
                return Ok(exact(v, m as usize + 1));
            }
            let w = p.win.as_ref().expect("window for non-polynomial exponent");
            match series_for(p.kind, &p.pf, w, p.alpha, t, cfg) {
                Ok(r) => Ok(Outcome {
                    value: r.value,
                    terms: r.terms_used,
                    remainder: r.remainder_bound,
                    status: r.status,
                }),
                Err(Error::SeriesNotConverged(r)) => Ok(Outcome {
                    value: r.value,
                    terms: r.terms_used,
                    remainder: r.remainder_bound,
                    status: r.status,
                }),
                Err(e) => Err(e),
            }
        }
        Route::Hypergeometric => {
            let w = match &p.win {
                Some(w) => *w,
                None => crate::domain::make_window(p.a, &p.pf)?,
            };
            match hyp_form(p.kind, &p.pf, &w, p.alpha, t, DEFAULT_TOL.max(cfg.tol * 1e-5)) {
                Ok(s) => Ok(Outcome {
                    value: s.value,
                    terms: s.terms,
                    remainder: s.tail,
                    status: Status::Converged,
                }),
                Err(Error::ToleranceNotMet(tail)) => Ok(Outcome {
                    value: f64::NAN,
                    terms: crate::hypergeom::MAX_TERMS,
                    remainder: tail,
                    status: Status::Truncated,
                }),
                Err(e) => Err(e),
            }
        }
        Route::Oracle => {
            let qc = QuadratureConfig::tight();
            let r = match p.kind {
                OperatorKind::Integral => quad_rlfi_with_error(&p.pf, p.a, p.alpha, t, &qc),
                OperatorKind::Derivative if p.alpha == 0.0 => {
                    return Ok(exact(p.pf.eval(t), 0));
                }
                OperatorKind::Derivative if p.centered && p.pf.beta.natural().is_none() => {
                    quad_rlfd_centered(&p.pf, p.alpha, t, &qc)
                }
                OperatorKind::Derivative => quad_rlfd_default(&p.pf, p.a, p.alpha, t, &qc),
            };
            match r {
                Ok(v) => Ok(Outcome {
                    value: v.value,
                    terms: 0,
                    remainder: v.error,
                    status: Status::Converged,
                }),
                Err(Error::ToleranceNotMet(err)) => Ok(Outcome {
                    value: f64::NAN,
                    terms: 0,
                    remainder: err,
                    status: Status::Truncated,
                }),
                Err(e) => Err(e),
            }
        }
        Route::ClosedCentered => {
            let v = closed_centered(p.kind, p.pf.beta.value(), p.pf.d, p.alpha, t)?;
            Ok(exact(v, 0))
        }
    }
}

struct Evaluated {
    records: Vec<Record>,
    all_converged: bool,
}

fn run_job(job: &JobSpec) -> Result<Evaluated, Error> {
    let problem = Problem::new(job)?;
    for &t in &job.ts {
        problem.validate_t(t, &job.routes)?;
    }
    let cfg = SeriesConfig {
        tol: job.tol,
        max_terms: job.max_terms,
    };
    let tasks: Vec<(f64, Route)> = job
        .ts
        .iter()
        .flat_map(|&t| job.routes.iter().map(move |&r| (t, r)))
        .collect();
    let outcomes: Vec<Result<Outcome, Error>> = tasks
        .par_iter()
        .map(|&(t, r)| evaluate(&problem, r, t, &cfg))
        .collect();
    let mut records = Vec::with_capacity(tasks.len());
    let mut all_converged = true;
    for ((t, route), outcome) in tasks.into_iter().zip(outcomes) {
        let o = outcome?;
        all_converged &= o.status == Status::Converged;
        records.push(Record {
            op: job.kind.symbol().to_string(),
            alpha: job.alpha,
            beta: job.beta.to_string(),
            d: job.d,
            a: problem.a,
            t,
            route: route.name().to_string(),
            value: Some(o.value).filter(|v| v.is_finite()),
            terms: o.terms,
            remainder: Some(o.remainder).filter(|v| v.is_finite()),
            status: o.status.to_string(),
        });
    }
    Ok(Evaluated {
        records,
        all_converged,
    })
}

pub fn format_records(records: &[Record], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for r in records {
                w.write_record([
                    r.op.clone(),
                    machine(r.alpha),
                    r.beta.clone(),
                    machine(r.d),
                    machine(r.a),
                    machine(r.t),
                    r.route.clone(),
                    machine_opt(r.value).unwrap_or_default(),
                    r.terms.to_string(),
                    machine_opt(r.remainder).unwrap_or_default(),
                    r.status.clone(),
                ])
                .expect("in-memory write");
            }
            out = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
        }
        Format::Json => {
            for r in records {
                let num = |x: Option<f64>| machine_opt(x).unwrap_or_else(|| "null".into());
                let _ = writeln!(
                    out,
                    "{{\"op\":\"{}\",\"alpha\":{},\"beta\":{},\"d\":{},\"a\":{},\"t\":{},\"route\":\"{}\",\"value\":{},\"terms\":{},\"remainder\":{},\"status\":\"{}\"}}",
                    r.op,
                    machine(r.alpha),
                    serde_json::to_string(&r.beta).expect("string"),
                    machine(r.d),
                    machine(r.a),
                    machine(r.t),
                    r.route,
                    num(r.value),
                    r.terms,
                    num(r.remainder),
                    r.status
                );
            }
        }
        Format::Table => {
            let _ = writeln!(
                out,
                "{:<2} {:>15} {:<16} {:>15} {:>15} {:>15} {:<7} {:>16} {:>6} {:>15} {}",
                "op", "alpha", "beta", "d", "a", "t", "route", "value", "terms", "remainder", "status"
            );
            for r in records {
                let _ = writeln!(
                    out,
                    "{:<2} {:>15} {:<16} {:>15} {:>15} {:>15} {:<7} {:>16} {:>6} {:>15} {}",
                    r.op,
                    human(Some(r.alpha)),
                    r.beta,
                    human(Some(r.d)),
                    human(Some(r.a)),
                    human(Some(r.t)),
                    r.route,
                    human(r.value),
                    r.terms,
                    human(r.remainder),
                    r.status
                );
            }
        }
    }
    out
}

/// Reads back CSV written by [`format_records`].
pub fn parse_csv(text: &str) -> Result<Vec<Record>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(format!("unexpected header {header:?}"));
    }
    rdr.deserialize().map(|r| r.map_err(|e| e.to_string())).collect()
}

/// Reads back JSON lines written by [`format_records`].
pub fn parse_json_lines(text: &str) -> Result<Vec<Record>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

/// Largest pairwise deviation between routes at one `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub t: f64,
    pub max_deviation: f64,
    pub pair: (String, String),
}

/// `|vᵢ - vⱼ| / max(1, |vᵢ|, |vⱼ|)`, maximized over route pairs.
pub fn deviations(records: &[Record]) -> Vec<Deviation> {
    let mut out: Vec<Deviation> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let t = records[i].t;
        let mut j = i;
        while j < records.len() && records[j].t.to_bits() == t.to_bits() {
            j += 1;
        }
        let group = &records[i..j];
        let mut best = Deviation {
            t,
            max_deviation: 0.0,
            pair: (String::new(), String::new()),
        };
        for (x, rx) in group.iter().enumerate() {
            for ry in &group[x + 1..] {
                let dev = match (rx.value, ry.value) {
                    (Some(u), Some(v)) => (u - v).abs() / 1f64.max(u.abs()).max(v.abs()),
                    _ => f64::NAN,
                };
                if dev.is_nan() || dev > best.max_deviation || best.pair.0.is_empty() {
                    best.max_deviation = dev;
                    best.pair = (rx.route.clone(), ry.route.clone());
                    if dev.is_nan() {
                        break;
                    }
                }
            }
        }
        out.push(best);
        i = j;
    }
    out
}

fn format_deviations(devs: &[Deviation], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("t,max_deviation,route_i,route_j\n");
            for d in devs {
                let dev = machine_opt(Some(d.max_deviation)).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{}", machine(d.t), dev, d.pair.0, d.pair.1);
            }
        }
        Format::Json => {
            for d in devs {
                let dev = machine_opt(Some(d.max_deviation)).unwrap_or_else(|| "null".into());
                let _ = writeln!(
                    out,
                    "{{\"t\":{},\"max_deviation\":{},\"route_i\":\"{}\",\"route_j\":\"{}\"}}",
                    machine(d.t),
                    dev,
                    d.pair.0,
                    d.pair.1
                );
            }
        }
        Format::Table => {
            let _ = writeln!(out, "{:>15} {:>15} {}", "t", "max_deviation", "pair");
            for d in devs {
                let _ = writeln!(
                    out,
                    "{:>15} {:>15} {}/{}",
                    human(Some(d.t)),
                    human(Some(d.max_deviation)),
                    d.pair.0,
                    d.pair.1
                );
            }
        }
    }
    out
}

fn describe_windows(domain: DomainSpec, beta: BetaIndex, d: f64) -> Vec<String> {
    let mut lines = Vec::new();
    if matches!(domain, DomainSpec::AllReals | DomainSpec::AllRealsExceptD) {
        lines.push(format!("a < {d}: t in [a, a + ({d} - a)/2)"));
    }
    lines.push(format!("a > {d}: t in [a, 2a - {d})   (strict: [a, a + (a - {d})/2))"));
    if beta.natural().is_some() {
        lines.push(format!("a = {d}: t in [a, +∞)"));
    }
    lines
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    }
}

fn resolve_job(args: &JobArgs, tol_compare: Option<f64>) -> Result<JobSpec, String> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut cli = args.to_map();
    if let Some(tc) = tol_compare {
        cli.insert("tol-compare", format!("{tc:?}"));
    }
    build_job(&merge(config, cli))
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let fail = |stderr: &mut dyn Write, msg: &str| {
        let _ = writeln!(stderr, "error: {msg}");
        EXIT_INVALID
    };
    match cli.command {
        Command::Domain(args) => {
            let beta = match parse_beta(
                args.beta.beta_int.map(|v| v.to_string()).as_deref(),
                args.beta.beta_rational.as_deref(),
                args.beta.beta_real.map(|v| format!("{v:?}")).as_deref(),
            ) {
                Ok(b) => b,
                Err(e) => return fail(stderr, &e),
            };
            let domain = classify_domain(args.d, beta);
            let mut text = domain.describe(args.d);
            text.push('\n');
            for line in describe_windows(domain, beta, args.d) {
                text.push_str(&line);
                text.push('\n');
            }
            let _ = stdout.write_all(text.as_bytes());
            EXIT_OK
        }
        Command::Eval(args) => {
            let job = match resolve_job(&args, None) {
                Ok(j) => j,
                Err(e) => return fail(stderr, &e),
            };
            let ev = match run_job(&job) {
                Ok(ev) => ev,
                Err(e) => return fail(stderr, &e.to_string()),
            };
            if let Err(e) = emit(&format_records(&ev.records, job.format), job.out.as_ref(), stdout) {
                return fail(stderr, &e.to_string());
            }
            if ev.all_converged {
                EXIT_OK
            } else {
                let _ = writeln!(stderr, "warning: at least one route did not converge");
                EXIT_NOT_CONVERGED
            }
        }
        Command::Compare { job, tol_compare } => {
            let job = match resolve_job(&job, tol_compare) {
                Ok(j) => j,
                Err(e) => return fail(stderr, &e),
            };
            if job.routes.len() < 2 {
                return fail(stderr, "compare needs at least two routes");
            }
            let ev = match run_job(&job) {
                Ok(ev) => ev,
                Err(e) => return fail(stderr, &e.to_string()),
            };
            let devs = deviations(&ev.records);
            if let Err(e) = emit(&format_deviations(&devs, job.format), job.out.as_ref(), stdout) {
                return fail(stderr, &e.to_string());
            }
            if !ev.all_converged {
                let _ = writeln!(stderr, "warning: at least one route did not converge");
                EXIT_NOT_CONVERGED
            } else if devs.iter().any(|d| !(d.max_deviation <= job.tol_compare)) {
                let _ = writeln!(stderr, "deviation above {:e}", job.tol_compare);
                EXIT_DEVIATION
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("fracpow").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_series_and_oracle_agree() {
        let (code, out, _) = run_str(&[
            "eval", "--op", "J", "--alpha", "0.5", "--beta-rational", "1/2", "--d", "0", "--a", "1", "--t",
            "1.2", "--route", "series,oracle", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let recs = parse_csv(&out).unwrap();
        assert_eq!(recs.len(), 2);
        let (u, v) = (recs[0].value.unwrap(), recs[1].value.unwrap());
        assert!((u - v).abs() <= 1e-8 * u.abs());
    }

    #[test]
    fn eval_derivative_constant() {
        let (code, out, _) = run_str(&[
            "eval", "--op", "D", "--alpha", "0.5", "--beta-int", "0", "--a", "0", "--t", "1", "--format", "json",
        ]);
        assert_eq!(code, 0);
        let recs = parse_json_lines(&out).unwrap();
        assert!((recs[0].value.unwrap() - 0.564_189_6).abs() < 1e-7);
    }

    #[test]
    fn domain_descriptions() {
        let (_, out, _) = run_str(&["domain", "--beta-rational", "-1/2", "--d", "1"]);
        assert_eq!(out.lines().next(), Some("(1, +∞)"));
        let (_, out, _) = run_str(&["domain", "--beta-int", "4", "--d", "0"]);
        assert_eq!(out.lines().next(), Some("R"));
        let (_, out, _) = run_str(&["domain", "--beta-real", "3.14159", "--d", "0"]);
        assert_eq!(out.lines().next(), Some("(0, +∞)"));
    }

    #[test]
    fn out_of_window_is_a_validation_error() {
        let (code, _, err) = run_str(&[
            "compare", "--op", "J", "--alpha", "0.5", "--beta-int", "-2", "--d", "0", "--a", "1", "--t", "2.5",
            "--route", "series,oracle",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("window"), "{err}");
    }

    #[test]
    fn config_merge_prefers_flags() {
        let cfg = parse_config("op=D\nalpha=0.3\nbeta-real=1.5\na=1\n# comment\nt=1.2\n").unwrap();
        let mut cli = BTreeMap::new();
        cli.insert("beta-int", "2".to_string());
        cli.insert("centered", "true".to_string());
        let job = build_job(&merge(cfg, cli)).unwrap();
        assert_eq!(job.beta, BetaIndex::integer(2));
        assert_eq!(job.lower, LowerLimit::Centered);
        assert_eq!(job.kind, OperatorKind::Derivative);
        assert!(parse_config("bogus=1").is_err());
    }

    #[test]
    fn t_lin_is_inclusive() {
        assert_eq!(parse_t_lin("1,2,3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_t_lin("1,2").is_err());
    }
}
