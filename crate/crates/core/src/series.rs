//! Series representations of the fractional integral `J^α` and derivative
//! `D^α` of `(t - d)^β` with lower limit `a ≠ d`.
//!
//! Both operators share one expansion around the lower limit,
//!
//! ```text
//! Σ_k (β)_{-k} (a-d)^{β-k} (t-a)^{γ+k} / Γ(γ+k+1)
//! ```
//!
//! with `γ = α` for the integral and `γ = -α` for the derivative. Terms are
//! generated by their ratio `(β-k)/(γ+k+1) · (t-a)/(a-d)`, and summation stops
//! once the integration-by-parts remainder bound and the next term both fall
//! below `tol · max(1, |partial sum|)`.

use std::fmt;
use std::str::FromStr;

use crate::domain::{make_window, BetaIndex, EvalWindow, PowerFunction, Side};
use crate::error::{Error, Result};
use crate::special_fn::{
    gamma_ratio, gen_binomial, ln_gamma, ln_gamma_ratio, nonpositive_integer, pochhammer_desc,
    rgamma, sin_pi, LogRatio,
};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Integral,
    Derivative,
}

impl OperatorKind {
    /// Signed exponent shift: `α` for the integral, `-α` for the derivative.
    pub fn order(self, alpha: f64) -> f64 {
        match self {
            OperatorKind::Integral => alpha,
            OperatorKind::Derivative => -alpha,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OperatorKind::Integral => "J",
            OperatorKind::Derivative => "D",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Route {
    Series,
    Hypergeometric,
    Oracle,
    ClosedCentered,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Series => "series",
            Route::Hypergeometric => "hyp",
            Route::Oracle => "oracle",
            Route::ClosedCentered => "closed",
        }
    }
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "series" => Ok(Route::Series),
            "hyp" | "hypergeometric" => Ok(Route::Hypergeometric),
            "oracle" => Ok(Route::Oracle),
            "closed" => Ok(Route::ClosedCentered),
            other => Err(format!("unknown route '{other}'")),
        }
    }
}

/// Operator, order and evaluation route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub alpha: f64,
    pub route: Route,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, alpha: f64, route: Route) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(OperatorSpec { kind, alpha, route })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidOrder(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    Truncated,
    Diverged,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::Truncated => "truncated",
            Status::Diverged => "diverged",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "converged" => Ok(Status::Converged),
            "truncated" => Ok(Status::Truncated),
            "diverged" => Ok(Status::Diverged),
            other => Err(format!("unknown status '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub remainder_bound: f64,
    pub status: Status,
}

impl SeriesResult {
    fn exact(value: f64, terms_used: usize) -> Self {
        SeriesResult {
            value,
            terms_used,
            remainder_bound: 0.0,
            status: Status::Converged,
        }
    }
}

/// Truncation controls. `tol` is applied as `tol · max(1, |partial sum|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tol: 1e-10,
            max_terms: 10_000,
        }
    }
}

/// Decay rates of the remainder bound.
///
/// With `ρ₁ = |t-a|/|t-d|` and `ρ₂ = |t-a|/|a-d|`, the bound behaves like
/// `M p^{-α-β-1} |t-a|^α (|t-d|^β e^{-γ(p-1)} - |a-d|^β e^{-η(p-1)})`
/// where `γ = -ln ρ₁`, `η = -ln ρ₂` and `M = |Γ(β+1) sin(πβ)/π|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderParams {
    pub gamma_rate: f64,
    pub eta_rate: f64,
    pub bound_const: f64,
    alpha: f64,
    beta: f64,
    dt: f64,
    dist_t: f64,
    dist_a: f64,
}

impl RemainderParams {
    pub fn new(pf: &PowerFunction, win: &EvalWindow, alpha: f64, t: f64) -> Self {
        let beta = pf.beta.value();
        let dt = t - win.a;
        let dist_a = win.epsilon;
        let dist_t = (win.gap() + dt).abs();
        let bound_const = match ln_gamma(beta + 1.0) {
            Some((ln, _)) => (ln.exp() * sin_pi(beta) / std::f64::consts::PI).abs(),
            // Γ(β+1) sin(πβ) stays finite at the poles: |π / Γ(-β)| / π
            None => rgamma(-beta).abs(),
        };
        RemainderParams {
            gamma_rate: -(dt / dist_t).ln(),
            eta_rate: -(dt / dist_a).ln(),
            bound_const,
            alpha,
            beta,
            dt,
            dist_t,
            dist_a,
        }
    }

    /// Large-`p` form of the remainder bound.
    pub fn asymptotic_bound(&self, p: usize) -> f64 {
        let p = p as f64;
        let bracket = self.dist_t.powf(self.beta) * (-self.gamma_rate * (p - 1.0)).exp()
            - self.dist_a.powf(self.beta) * (-self.eta_rate * (p - 1.0)).exp();
        self.bound_const * p.powf(-self.alpha - self.beta - 1.0) * self.dt.powf(self.alpha) * bracket.abs()
    }
}

/// `ln |e^x - e^y|`.
fn ln_abs_diff_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// One expansion `Σ_k (β)_{-k} gap^{β-k} dt^{order+k} / Γ(order+k+1)`.
#[derive(Debug, Clone, Copy)]
struct Expansion {
    beta: BetaIndex,
    gap: f64,
    dt: f64,
    order: f64,
}

impl Expansion {
    fn new(win: &EvalWindow, pf: &PowerFunction, order: f64, t: f64) -> Self {
        Expansion {
            beta: pf.beta,
            gap: win.gap(),
            dt: t - win.a,
            order,
        }
    }

    fn dt_pow(&self, e: f64) -> f64 {
        if e == 0.0 {
            1.0
        } else {
            self.dt.powf(e)
        }
    }

    fn direct_term(&self, k: u64) -> f64 {
        let c = pochhammer_desc(self.beta.value(), k);
        let rg = rgamma(self.order + k as f64 + 1.0);
        if c == 0.0 || rg == 0.0 {
            return 0.0;
        }
        c * self.beta.pow(self.gap) * self.gap.powi(-(k as i32)) * self.dt_pow(self.order + k as f64) * rg
    }

    fn next_term(&self, k: u64, term: f64) -> f64 {
        let kf = k as f64;
        if nonpositive_integer(self.order + kf + 1.0).is_some() {
            return self.direct_term(k + 1);
        }
        term * (self.beta.value() - kf) / (self.order + kf + 1.0) * (self.dt / self.gap)
    }

    /// Remainder bound after `p` terms from the last included term
    /// `term_{p-1}` and the first omitted one `term_p`.
    fn bound(&self, p: u64, last: f64, next: f64) -> f64 {
        if self.dt == 0.0 {
            return 0.0;
        }
        let pf = p as f64;
        let beta = self.beta.value();
        let ln_r = ((self.gap + self.dt) / self.gap).abs().ln();
        if self.order + pf - 1.0 < 0.0 {
            // kernel not bounded: max of |x-d|^{β-p} times the exact kernel integral
            let e = (beta - pf) * ln_r;
            return (next.abs().ln() + e.max(0.0)).exp();
        }
        if self.beta.negative_integer().is_some() {
            let e = (beta - pf) * ln_r;
            return (next.abs().ln() + e.max(0.0)).exp() * (self.order + pf);
        }
        let e = (beta - pf + 1.0) * ln_r;
        (last.abs().ln() + ln_abs_diff_exp(e, 0.0)).exp()
    }

    fn sum(&self, cfg: &SeriesConfig) -> Result<SeriesResult> {
        let natural = self.beta.natural();
        let mut acc = CompensatedSum::new();
        let mut term = self.direct_term(0);
        let mut k = 0u64;
        loop {
            acc.add(term);
            let p = k + 1;
            let value = acc.value();
            if natural.is_some_and(|m| k >= m) {
                return Ok(SeriesResult::exact(value, p as usize));
            }
            let next = self.next_term(k, term);
            let bound = self.bound(p, term, next);
            let scale = cfg.tol * value.abs().max(1.0);
            if !next.is_finite() || !value.is_finite() {
                return Err(Error::SeriesNotConverged(Box::new(SeriesResult {
                    value,
                    terms_used: p as usize,
                    remainder_bound: f64::INFINITY,
                    status: Status::Diverged,
                })));
            }
            if bound <= scale && next.abs() <= scale {
                return Ok(SeriesResult {
                    value,
                    terms_used: p as usize,
                    remainder_bound: bound,
                    status: Status::Converged,
                });
            }
            if p as usize >= cfg.max_terms {
                return Err(Error::SeriesNotConverged(Box::new(SeriesResult {
                    value,
                    terms_used: p as usize,
                    remainder_bound: bound,
                    status: Status::Truncated,
                })));
            }
            term = next;
            k += 1;
        }
    }

    fn partial_sums(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let mut acc = CompensatedSum::new();
        let mut term = self.direct_term(0);
        for k in 0..count as u64 {
            acc.add(term);
            out.push(acc.value());
            term = self.next_term(k, term);
        }
        out
    }
}

fn polynomial_sum(m: u64, gap: f64, dt: f64, order: f64) -> f64 {
    (0..=m)
        .map(|k| {
            let rg = rgamma(order + k as f64 + 1.0);
            if rg == 0.0 {
                return 0.0;
            }
            let e = order + k as f64;
            let dt_pow = if e == 0.0 { 1.0 } else { dt.powf(e) };
            pochhammer_desc(m as f64, k) * gap.powi((m - k) as i32) * dt_pow * rg
        })
        .collect::<CompensatedSum>()
        .value()
}

fn require_above_lower_limit(a: f64, t: f64) -> Result<()> {
    if t >= a {
        Ok(())
    } else {
        Err(Error::WindowViolation {
            t,
            t_min: a,
            t_sup: f64::INFINITY,
        })
    }
}

/// The derivative series carries `(t-a)^{-α}`, singular at `t = a` unless
/// `α ∈ {0, 1}`.
fn reject_derivative_at_lower_limit(alpha: f64, a: f64, t: f64) -> Result<()> {
    if t == a && alpha > 0.0 && alpha < 1.0 {
        Err(Error::EvalAtLowerLimit(a))
    } else {
        Ok(())
    }
}

/// Finite sum for `β = m ∈ N₀`, valid for every lower limit including `a = d`.
pub fn rlfi_polynomial(m: u64, d: f64, a: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    require_above_lower_limit(a, t)?;
    Ok(polynomial_sum(m, a - d, t - a, alpha))
}

/// [`rlfi_polynomial`] or [`rlfd_polynomial`] by `kind`.
pub fn polynomial_value(kind: OperatorKind, m: u64, d: f64, a: f64, alpha: f64, t: f64) -> Result<f64> {
    match kind {
        OperatorKind::Integral => rlfi_polynomial(m, d, a, alpha, t),
        OperatorKind::Derivative => rlfd_polynomial(m, d, a, alpha, t),
    }
}

/// Derivative counterpart of [`rlfi_polynomial`].
pub fn rlfd_polynomial(m: u64, d: f64, a: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    require_above_lower_limit(a, t)?;
    reject_derivative_at_lower_limit(alpha, a, t)?;
    Ok(polynomial_sum(m, a - d, t - a, -alpha))
}

/// Displaced series for either operator, dispatching on `kind`.
pub fn series_for(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    check_alpha(alpha)?;
    win.require(t)?;
    if kind == OperatorKind::Derivative {
        reject_derivative_at_lower_limit(alpha, win.a, t)?;
    }
    if win.side == Side::Centered {
        let m = pf.beta.natural().ok_or(Error::CenteredNotAnalytic(win.a))?;
        let v = polynomial_sum(m, 0.0, t - win.a, kind.order(alpha));
        return Ok(SeriesResult::exact(v, m as usize + 1));
    }
    Expansion::new(win, pf, kind.order(alpha), t).sum(cfg)
}

/// Fractional integral by the displaced series around `a ≠ d`.
pub fn rlfi_series_displaced(
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    series_for(OperatorKind::Integral, pf, win, alpha, t, cfg)
}

/// Fractional integral with lower limit `d⁺ = d + ε`.
pub fn rlfi_series_above(
    pf: &PowerFunction,
    epsilon: f64,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    let win = EvalWindow::d_plus(pf, epsilon, Default::default())?;
    series_for(OperatorKind::Integral, pf, &win, alpha, t, cfg)
}

/// Fractional derivative by its own series (not by differencing the integral).
pub fn rlfd_series(
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    series_for(OperatorKind::Derivative, pf, win, alpha, t, cfg)
}

pub fn rlfd_series_above(
    pf: &PowerFunction,
    epsilon: f64,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    let win = EvalWindow::d_plus(pf, epsilon, Default::default())?;
    series_for(OperatorKind::Derivative, pf, &win, alpha, t, cfg)
}

/// Partial sums `S_1, …, S_count` of the displaced series (`S_p` holds `p` terms).
pub fn partial_sums(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    count: usize,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    win.require(t)?;
    if win.side == Side::Centered {
        return Err(Error::CenteredNotAnalytic(win.a));
    }
    Ok(Expansion::new(win, pf, kind.order(alpha), t).partial_sums(count))
}

/// Upper bound on `|J - S_p|` for the fractional integral series.
///
/// General `β` uses the integration-by-parts estimate with the kernel
/// `(t-x)^{α+p-1}` bounded by its value at `x = a` and `|x-d|^{β-p}`
/// integrated exactly; `β = -m` bounds both factors by their maxima over
/// `[a, t]`.
pub fn remainder_bound(pf: &PowerFunction, win: &EvalWindow, alpha: f64, t: f64, p: usize) -> f64 {
    remainder_bound_order(pf, win, alpha, t, p)
}

/// Upper bound on `|D - S_p|` for the derivative series.
pub fn remainder_bound_derivative(
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    p: usize,
) -> f64 {
    remainder_bound_order(pf, win, -alpha, t, p)
}

/// Remainder bound for the expansion with exponent shift `order` (`±α`),
/// written directly in gamma functions.
pub fn remainder_bound_order(pf: &PowerFunction, win: &EvalWindow, order: f64, t: f64, p: usize) -> f64 {
    let dt = t - win.a;
    if dt == 0.0 {
        return if order >= 0.0 { 0.0 } else { f64::INFINITY };
    }
    if pf.beta.natural().is_some_and(|m| p as u64 > m) {
        return 0.0;
    }
    let beta = pf.beta.value();
    let pf_ = p as f64;
    let dist_a = win.epsilon;
    let dist_t = (win.gap() + dt).abs();

    if order + pf_ - 1.0 < 0.0 {
        // |(β)_{-p}| / Γ(order+p+1) · max|x-d|^{β-p} · dt^{order+p}
        let coef = match ln_gamma_ratio(beta + 1.0, beta - pf_ + 1.0) {
            Ok(LogRatio::Finite { ln_abs, .. }) => ln_abs,
            Ok(LogRatio::Zero) => return 0.0,
            Err(_) => return f64::INFINITY,
        };
        let Some((ln_g, _)) = ln_gamma(order + pf_ + 1.0) else {
            return 0.0;
        };
        let ln_max = ((beta - pf_) * dist_a.ln()).max((beta - pf_) * dist_t.ln());
        return (coef - ln_g + ln_max + (order + pf_) * dt.ln()).exp();
    }

    if let Some(m) = pf.beta.negative_integer() {
        let mf = m as f64;
        let (Some((a1, _)), Some((a2, _)), Some((a3, _))) =
            (ln_gamma(mf + pf_), ln_gamma(mf), ln_gamma(order + pf_))
        else {
            return f64::INFINITY;
        };
        let nearest = dist_a.min(dist_t);
        return (a1 - a2 - a3 + (order + pf_) * dt.ln() - (mf + pf_) * nearest.ln()).exp();
    }

    let coef = match ln_gamma_ratio(beta + 1.0, beta - pf_ + 2.0) {
        Ok(LogRatio::Finite { ln_abs, .. }) => ln_abs,
        Ok(LogRatio::Zero) => return 0.0,
        Err(_) => return f64::INFINITY,
    };
    let Some((ln_g, _)) = ln_gamma(order + pf_) else {
        return f64::INFINITY;
    };
    let l1 = beta * dist_t.ln() + (pf_ - 1.0) * (dt / dist_t).ln();
    let l2 = beta * dist_a.ln() + (pf_ - 1.0) * (dt / dist_a).ln();
    (coef - ln_g + order * dt.ln() + ln_abs_diff_exp(l1, l2)).exp()
}

/// Alternating form for `β = -m`. Terms follow the recurrence
/// `-(m+k)/(γ+k+1) · (t-a)/(a-d)`; a term is rebuilt from log-gamma values
/// when its predecessor vanished at a pole of `Γ(γ+k+1)`.
fn neg_integer_sum(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    check_alpha(alpha)?;
    let m = pf.beta.negative_integer().ok_or_else(|| {
        Error::InvalidExponent(format!("{} is not a negative integer", pf.beta))
    })?;
    win.require(t)?;
    if kind == OperatorKind::Derivative {
        reject_derivative_at_lower_limit(alpha, win.a, t)?;
    }
    let order = kind.order(alpha);
    let gap = win.gap();
    let dt = t - win.a;
    let mf = m as f64;
    let ln_gm = ln_gamma(mf).map(|g| g.0).unwrap_or(0.0);
    let term = |k: u64| -> f64 {
        let kf = k as f64;
        let e = order + kf;
        let Some((ln_den, den_sign)) = ln_gamma(e + 1.0) else {
            return 0.0;
        };
        let ln_dt = if e == 0.0 {
            0.0
        } else if dt == 0.0 {
            return 0.0;
        } else {
            e * dt.ln()
        };
        let ln_num = ln_gamma(mf + kf).map(|g| g.0).unwrap_or(f64::INFINITY);
        let mag = (ln_num - ln_gm - (mf + kf) * gap.abs().ln() + ln_dt - ln_den).exp();
        let alternating = if k % 2 == 0 { 1.0 } else { -1.0 };
        let gap_sign = if gap < 0.0 && (m + k) % 2 == 1 { -1.0 } else { 1.0 };
        alternating * gap_sign * den_sign * mag
    };

    let mut acc = CompensatedSum::new();
    let mut k = 0u64;
    let mut current = term(0);
    loop {
        acc.add(current);
        let p = (k + 1) as usize;
        let value = acc.value();
        let next = if current == 0.0 {
            term(k + 1)
        } else {
            -current * (mf + k as f64) / gap * dt / (order + k as f64 + 1.0)
        };
        let bound = remainder_bound_order(pf, win, order, t, p);
        let scale = cfg.tol * value.abs().max(1.0);
        if !value.is_finite() {
            return Err(Error::SeriesNotConverged(Box::new(SeriesResult {
                value,
                terms_used: p,
                remainder_bound: f64::INFINITY,
                status: Status::Diverged,
            })));
        }
        if bound <= scale && next.abs() <= scale {
            return Ok(SeriesResult {
                value,
                terms_used: p,
                remainder_bound: bound,
                status: Status::Converged,
            });
        }
        if p >= cfg.max_terms {
            return Err(Error::SeriesNotConverged(Box::new(SeriesResult {
                value,
                terms_used: p,
                remainder_bound: bound,
                status: Status::Truncated,
            })));
        }
        current = next;
        k += 1;
    }
}

/// Fractional integral of `(t-d)^{-m}` through the alternating form.
pub fn rlfi_neg_integer(
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    neg_integer_sum(OperatorKind::Integral, pf, win, alpha, t, cfg)
}

/// Fractional derivative of `(t-d)^{-m}` through the alternating form, with
/// a single factor `ε^{-(m+k)}` per term.
pub fn rlfd_neg_integer(
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    neg_integer_sum(OperatorKind::Derivative, pf, win, alpha, t, cfg)
}

/// Expands `(x-d)^β` in its Taylor series at `a` and applies the operator to
/// each monomial `(x-a)^k`, which maps to `k!/Γ(γ+k+1) (t-a)^{γ+k}`.
pub fn taylor_route(
    kind: OperatorKind,
    pf: &PowerFunction,
    a: f64,
    alpha: f64,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<SeriesResult> {
    check_alpha(alpha)?;
    let win = make_window(a, pf)?;
    win.require(t)?;
    if kind == OperatorKind::Derivative {
        reject_derivative_at_lower_limit(alpha, a, t)?;
    }
    let order = kind.order(alpha);
    let gap = a - pf.d;
    let dt = t - a;
    let monomial = |k: u64| -> f64 {
        let e = order + k as f64;
        let c = gamma_ratio(k as f64 + 1.0, e + 1.0).unwrap_or(f64::NAN);
        if c == 0.0 {
            return 0.0;
        }
        c * if e == 0.0 { 1.0 } else { dt.powf(e) }
    };

    if let Some(m) = pf.beta.natural() {
        let v = (0..=m)
            .map(|k| gen_binomial(m as f64, k) * gap.powi((m - k) as i32) * monomial(k))
            .collect::<CompensatedSum>()
            .value();
        return Ok(SeriesResult::exact(v, m as usize + 1));
    }

    let beta = pf.beta.value();
    let lead = pf.beta.pow(gap);
    let term = |k: u64| -> f64 {
        let mono = monomial(k);
        if mono == 0.0 {
            return 0.0;
        }
        gen_binomial(beta, k) * lead * gap.powi(-(k as i32)) * mono
    };
    let mut acc = CompensatedSum::new();
    let mut k = 0u64;
    let mut current = term(0);
    loop {
        acc.add(current);
        let p = (k + 1) as usize;
        let value = acc.value();
        let next = term(k + 1);
        let bound = remainder_bound_order(pf, &win, order, t, p);
        let scale = cfg.tol * value.abs().max(1.0);
        if bound <= scale && next.abs() <= scale {
            return Ok(SeriesResult {
                value,
                terms_used: p,
                remainder_bound: bound,
                status: Status::Converged,
            });
        }
        if p >= cfg.max_terms || !value.is_finite() {
            return Err(Error::SeriesNotConverged(Box::new(SeriesResult {
                value,
                terms_used: p,
                remainder_bound: bound,
                status: if value.is_finite() { Status::Truncated } else { Status::Diverged },
            })));
        }
        current = next;
        k += 1;
    }
}

/// Centered closed forms `Γ(β+1)/Γ(β±α+1) (t-d)^{β±α}` (lower limit `a = d`),
/// valid for `β > -1`.
pub fn closed_centered(kind: OperatorKind, beta: f64, d: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if beta <= -1.0 {
        return Err(Error::BetaOutOfRange(beta));
    }
    require_above_lower_limit(d, t)?;
    let e = beta + kind.order(alpha);
    let coef = gamma_ratio(beta + 1.0, e + 1.0)?;
    if coef == 0.0 {
        return Ok(0.0);
    }
    if t == d && e < 0.0 {
        return Err(Error::EvalAtLowerLimit(d));
    }
    Ok(coef * if e == 0.0 { 1.0 } else { (t - d).powf(e) })
}
