//! Gauss hypergeometric function and the hypergeometric forms of the
//! operators.
//!
//! Summing the displaced series term by term gives
//!
//! ```text
//! J = (a-d)^β (t-a)^α / Γ(α+1) · ₂F₁(1, -β; α+1; -(t-a)/(a-d))
//! ```
//!
//! and the same expression with `α → -α` for the derivative. The argument
//! stays inside the unit disk for every `t` in the convergence window. Below
//! `d` the `z ↔ 1-z` connection formula also yields a real form in terms of
//! `₂F₁(-α-β, 1-α; 1-α-β; z)` with `z = (t-d)/(a-d) ∈ (1/2, 1]`.

use num_complex::Complex64;

use crate::domain::{EvalWindow, PowerFunction, Side};
use crate::error::{Error, Result};
use crate::series::{check_alpha, OperatorKind};
use crate::special_fn::{gamma, gamma_ratio, nonpositive_integer, rgamma, ExtendedReal};
use crate::sum::{CompensatedSum, ComplexSum};

/// Complex values on the verification path.
pub type ComplexValue = Complex64;

/// Series cap for `₂F₁`.
pub const MAX_TERMS: usize = 20_000;

/// Tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub arg: f64,
}

impl Hyp2F1Params {
    pub fn new(a: f64, b: f64, c: f64, arg: f64) -> Self {
        Hyp2F1Params { a, b, c, arg }
    }

    /// Index of the last non-zero term when `a` or `b` is a non-positive
    /// integer.
    fn terminating_index(&self) -> Option<u64> {
        match (nonpositive_integer(self.a), nonpositive_integer(self.b)) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }

    fn check(&self, arg_abs: f64) -> Result<Option<u64>> {
        let last = self.terminating_index();
        if let Some(nc) = nonpositive_integer(self.c) {
            if !last.is_some_and(|n| n <= nc) {
                return Err(Error::ParamPole(self.c));
            }
        }
        if last.is_none() && arg_abs >= 1.0 {
            return Err(Error::ArgOutOfDisk(arg_abs));
        }
        Ok(last)
    }
}

/// A summed series with its term count and the tail estimate at exit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypSum {
    pub value: f64,
    pub terms: usize,
    pub tail: f64,
}

fn coef_ratio(p: &Hyp2F1Params, k: f64) -> f64 {
    (p.a + k) * (p.b + k) / ((p.c + k) * (k + 1.0))
}

/// `₂F₁(a, b; c; arg)` by its defining series.
pub fn hyp2f1(p: Hyp2F1Params, tol: f64) -> Result<f64> {
    hyp2f1_sum(p, tol).map(|s| s.value)
}

pub fn hyp2f1_sum(p: Hyp2F1Params, tol: f64) -> Result<HypSum> {
    let last = p.check(p.arg.abs())?;
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        acc.add(term);
        let kf = k as f64;
        if last.is_some_and(|n| k as u64 >= n) || p.arg == 0.0 {
            return Ok(HypSum {
                value: acc.value(),
                terms: k + 1,
                tail: 0.0,
            });
        }
        let ratio = coef_ratio(&p, kf) * p.arg;
        let next = term * ratio;
        let rho = ratio.abs().max(p.arg.abs());
        let s = acc.value().abs();
        if last.is_none() && rho < 1.0 {
            let tail = next.abs() / (1.0 - rho);
            if tail <= tol * s {
                return Ok(HypSum {
                    value: acc.value(),
                    terms: k + 1,
                    tail,
                });
            }
        }
        if k + 1 >= MAX_TERMS || !next.is_finite() {
            return Err(Error::ToleranceNotMet(next.abs()));
        }
        term = next;
        k += 1;
    }
}

/// `₂F₁(a, b; c; z)` for real parameters and complex `|z| < 1`.
pub fn hyp2f1_complex(a: f64, b: f64, c: f64, z: Complex64, tol: f64) -> Result<Complex64> {
    let p = Hyp2F1Params::new(a, b, c, 0.0);
    let last = p.check(z.norm())?;
    let mut acc = ComplexSum::default();
    let mut term = Complex64::new(1.0, 0.0);
    let mut k = 0usize;
    loop {
        acc.add(term);
        if last.is_some_and(|n| k as u64 >= n) || z == Complex64::new(0.0, 0.0) {
            return Ok(acc.value());
        }
        let c_ratio = coef_ratio(&p, k as f64);
        let next = term * z * c_ratio;
        let rho = (c_ratio.abs() * z.norm()).max(z.norm());
        if last.is_none() && rho < 1.0 && next.norm() / (1.0 - rho) <= tol * acc.value().norm() {
            return Ok(acc.value());
        }
        if k + 1 >= MAX_TERMS || !next.is_finite() {
            return Err(Error::ToleranceNotMet(next.norm()));
        }
        term = next;
        k += 1;
    }
}

/// Euler's transformation: `₂F₁(a,b;c;z) = (1-z)^{c-a-b} ₂F₁(c-a, c-b; c; z)`.
///
/// Returns the transformed parameters and the prefactor.
pub fn euler_transform(p: Hyp2F1Params) -> (Hyp2F1Params, f64) {
    let q = Hyp2F1Params::new(p.c - p.a, p.c - p.b, p.c, p.arg);
    (q, (1.0 - p.arg).powf(p.c - p.a - p.b))
}

/// Both terms of the connection formula for `₂F₁(1, -β; α+1; 1-z)`:
///
/// ```text
/// Γ(α+1)Γ(α+β)/(Γ(α)Γ(α+β+1)) · ₂F₁(1, -β; 1-α-β; z)
/// + Γ(α+1)Γ(-α-β)/Γ(-β) · z^{α+β} · ₂F₁(α, α+β+1; α+β+1; z)
/// ```
///
/// `z^{α+β}` takes the principal branch.
pub fn connection_pieces(alpha: f64, beta: f64, z: Complex64) -> Result<(ComplexValue, ComplexValue)> {
    let s = alpha + beta;
    if (s - s.round()).abs() <= crate::special_fn::POLE_TOL {
        return Err(Error::DegenerateExponentSum(s));
    }
    let g1 = gamma_ratio(alpha + 1.0, alpha)? * gamma_ratio(s, s + 1.0)?;
    let g2 = match gamma(alpha + 1.0) {
        ExtendedReal::Finite(g) => g * gamma_ratio(-s, -beta)?,
        ExtendedReal::Pole { .. } => unreachable!("alpha + 1 >= 1"),
    };
    let f1 = if g1 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        hyp2f1_complex(1.0, -beta, 1.0 - s, z, DEFAULT_TOL)? * g1
    };
    let f2 = if g2 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        hyp2f1_complex(alpha, s + 1.0, s + 1.0, z, DEFAULT_TOL)? * z.powf(s) * g2
    };
    Ok((f1, f2))
}

/// Hypergeometric value of `J^α` (`kind = Integral`) or `D^α` of
/// `(t-d)^β` with lower limit `win.a`.
///
/// `β ∈ N₀` uses the terminating form, which stays valid at `a = d`. At
/// `α = 1` the derivative has `c = 0` and the regularized identity
/// `F(a,b;c;ξ)/Γ(c) → a b ξ F(a+1, b+1; 2; ξ)` applies.
pub fn hyp_form(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    tol: f64,
) -> Result<HypSum> {
    check_alpha(alpha)?;
    if pf.beta.natural().is_some() {
        if t < win.a {
            return Err(Error::WindowViolation {
                t,
                t_min: win.a,
                t_sup: f64::INFINITY,
            });
        }
    } else {
        win.require(t)?;
    }
    let order = kind.order(alpha);
    let dt = t - win.a;
    if kind == OperatorKind::Derivative && dt == 0.0 && alpha > 0.0 && alpha < 1.0 {
        return Err(Error::EvalAtLowerLimit(win.a));
    }
    let gap = win.gap();

    if let Some(m) = pf.beta.natural() {
        // Σ (-m)_k/(c)_k · (-(t-a)/(a-d))^k, multiplied through by (a-d)^m
        let mut acc = CompensatedSum::new();
        let mut coef = 1.0;
        for k in 0..=m {
            let e = order + k as f64;
            let rg = rgamma(e + 1.0);
            if rg != 0.0 {
                let dt_pow = if e == 0.0 { 1.0 } else { dt.powf(e) };
                acc.add(coef * gap.powi((m - k) as i32) * dt_pow * rg);
            }
            coef *= -(k as f64 - m as f64);
        }
        return Ok(HypSum {
            value: acc.value(),
            terms: m as usize + 1,
            tail: 0.0,
        });
    }
    if win.side == Side::Centered {
        return Err(Error::CenteredNotAnalytic(win.a));
    }

    let beta = pf.beta.value();
    let xi = -dt / gap;
    let lead = pf.beta.pow(gap);
    if nonpositive_integer(order + 1.0).is_some() {
        let s = hyp2f1_sum(Hyp2F1Params::new(2.0, 1.0 - beta, 2.0, xi), tol)?;
        return Ok(HypSum {
            value: beta * lead / gap * s.value,
            ..s
        });
    }
    if dt == 0.0 {
        let value = if order == 0.0 { lead } else { 0.0 };
        return Ok(HypSum {
            value,
            terms: 1,
            tail: 0.0,
        });
    }
    let s = hyp2f1_sum(Hyp2F1Params::new(1.0, -beta, order + 1.0, xi), tol)?;
    let pre = lead * dt.powf(order) * rgamma(order + 1.0);
    Ok(HypSum {
        value: pre * s.value,
        terms: s.terms,
        tail: (pre * s.tail).abs(),
    })
}

pub fn rlfi_hyp_form(pf: &PowerFunction, win: &EvalWindow, alpha: f64, t: f64) -> Result<f64> {
    hyp_form(OperatorKind::Integral, pf, win, alpha, t, DEFAULT_TOL).map(|s| s.value)
}

/// Derivative form: the integral form of order `1-α` differentiated with
/// `d/dx [x^{c-1} F(a,b;c;x)] = (c-1) x^{c-2} F(a,b;c-1;x)`, which lowers
/// `c = 2-α` to `1-α`.
pub fn rlfd_hyp_form(pf: &PowerFunction, win: &EvalWindow, alpha: f64, t: f64) -> Result<f64> {
    hyp_form(OperatorKind::Derivative, pf, win, alpha, t, DEFAULT_TOL).map(|s| s.value)
}

/// Pieces shared by the real and principal-branch connection forms below `d`.
struct ConnectionParts {
    /// `Γ(-γ-β)/Γ(-β) ((d-t)/(d-a))^{γ+β}`
    power_part: f64,
    /// `Γ(γ+β)/(Γ(γ)Γ(γ+β+1)) ₂F₁(-γ-β, 1-γ; 1-γ-β; z)`
    series_part: f64,
    /// `d - a`
    dist: f64,
    s: f64,
}

fn connection_parts(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
    tol: f64,
) -> Result<ConnectionParts> {
    check_alpha(alpha)?;
    win.require(t)?;
    let order = kind.order(alpha);
    let beta = pf.beta.value();
    let s = order + beta;
    if (s - s.round()).abs() <= crate::special_fn::POLE_TOL {
        return Err(Error::DegenerateExponentSum(s));
    }
    let gap = win.gap();
    let z = (t - pf.d) / gap;
    if win.side != Side::BelowD {
        return Err(Error::ArgOutOfDisk(z));
    }
    let power_part = gamma_ratio(-s, -beta)? * z.powf(s);
    let coef = gamma_ratio(s, s + 1.0)? * rgamma(order);
    let series_part = if coef == 0.0 {
        0.0
    } else {
        coef * hyp2f1(Hyp2F1Params::new(-s, 1.0 - order, 1.0 - s, z), tol)?
    };
    Ok(ConnectionParts {
        power_part,
        series_part,
        dist: -gap,
        s,
    })
}

/// Real connection form below `d`:
///
/// ```text
/// J = [(a-d)^β / (d-a)^β] · { (d-t)^{α+β} Γ(-α-β)/Γ(-β)
///       + (d-a)^{α+β} Γ(α+β)/(Γ(α)Γ(α+β+1)) ₂F₁(-α-β, 1-α; 1-α-β; z) }
/// ```
///
/// with `z = (t-d)/(a-d)`; `kind = Derivative` replaces `α` by `-α`. Above
/// `d` the argument `z` exceeds 1 and the form is rejected with
/// [`Error::ArgOutOfDisk`].
pub fn connection_form(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    if t == win.a && !(kind == OperatorKind::Integral && alpha == 0.0) {
        // z = 1 is the edge of the disk; the exact values are known
        if kind == OperatorKind::Integral {
            return Ok(0.0);
        }
        if alpha > 0.0 && alpha < 1.0 {
            return Err(Error::EvalAtLowerLimit(win.a));
        }
    }
    let parts = connection_parts(kind, pf, win, alpha, t, DEFAULT_TOL)?;
    let sign = pf.beta.pow(win.gap()) / parts.dist.powf(pf.beta.value());
    Ok(sign * parts.dist.powf(parts.s) * (parts.power_part + parts.series_part))
}

/// The connection form with `(-1)^{±α} = e^{±iπα}` and principal powers of
/// the negative bases `t-d` and `a-d`, as it reads for a general lower
/// limit below `d`. Its modulus equals the real value; the phase is an
/// artifact of the branch choice.
pub fn principal_branch_form(
    kind: OperatorKind,
    pf: &PowerFunction,
    win: &EvalWindow,
    alpha: f64,
    t: f64,
) -> Result<ComplexValue> {
    let parts = connection_parts(kind, pf, win, alpha, t, DEFAULT_TOL)?;
    let order = kind.order(alpha);
    let minus_one_pow = Complex64::from_polar(1.0, std::f64::consts::PI * order);
    let td = Complex64::new(t - pf.d, 0.0).powf(parts.s);
    let ad = Complex64::new(win.gap(), 0.0).powf(parts.s);
    // power_part carries ((d-t)/(d-a))^s; restore the bare gamma ratio
    let g = gamma_ratio(-parts.s, -pf.beta.value())?;
    Ok(minus_one_pow * (td * g + ad * parts.series_part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_window, BetaIndex};
    use crate::series::{rlfd_series, rlfi_polynomial, rlfi_series_above, rlfi_series_displaced, SeriesConfig};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn series_examples() {
        assert_eq!(hyp2f1(Hyp2F1Params::new(0.3, 0.2, 0.9, 0.0), 1e-15).unwrap(), 1.0);
        let v = hyp2f1(Hyp2F1Params::new(1.0, 1.0, 2.0, 0.5), 1e-15).unwrap();
        assert!(rel(v, 2.0f64.ln() / 0.5) < 1e-14);
        assert!((v - 1.386_294_4).abs() < 1e-7);
        let v = hyp2f1(Hyp2F1Params::new(0.5, 7.0, 7.0, 0.25), 1e-15).unwrap();
        assert!(rel(v, 0.75f64.powf(-0.5)) < 1e-14);
        assert!((v - 1.154_700_5).abs() < 1e-7);
    }

    #[test]
    fn terminating_and_poles() {
        // (1 + x)^3 = F(-3, b; b; -x)
        let v = hyp2f1(Hyp2F1Params::new(-3.0, 2.5, 2.5, -4.0), 1e-15).unwrap();
        assert!(rel(v, 125.0) < 1e-14);
        assert!(matches!(
            hyp2f1(Hyp2F1Params::new(0.5, 1.0, -2.0, 0.3), 1e-15),
            Err(Error::ParamPole(_))
        ));
        // terminates at n = 2 before (c)_k vanishes at k = 4
        assert!(hyp2f1(Hyp2F1Params::new(-2.0, 1.0, -3.0, 0.3), 1e-15).is_ok());
        assert!(matches!(
            hyp2f1(Hyp2F1Params::new(0.5, 1.0, 2.0, 1.0), 1e-15),
            Err(Error::ArgOutOfDisk(_))
        ));
    }

    #[test]
    fn euler_examples() {
        let (alpha, beta, z) = (0.3, 0.45, 0.6);
        let p = Hyp2F1Params::new(1.0, -beta, 1.0 - alpha - beta, z);
        let (q, pre) = euler_transform(p);
        assert_eq!((q.a, q.b, q.c), (-alpha - beta, 1.0 - alpha, 1.0 - alpha - beta));
        assert!(rel(pre, (1.0 - z).powf(-alpha)) < 1e-15);
        let (q0, pre0) = euler_transform(Hyp2F1Params::new(1.0, -beta, 1.0 - alpha - beta, 0.0));
        assert_eq!(pre0 * hyp2f1(q0, 1e-15).unwrap(), 1.0);
        let p = Hyp2F1Params::new(0.3, 0.7, 1.1, 0.4);
        let (q, pre) = euler_transform(p);
        let direct = hyp2f1(p, 1e-16).unwrap();
        assert!(rel(pre * hyp2f1(q, 1e-16).unwrap(), direct) < 1e-12);
    }

    #[test]
    fn connection_examples() {
        let (f1, f2) = connection_pieces(0.5, 0.3, Complex64::new(0.6, 0.0)).unwrap();
        let direct = hyp2f1(Hyp2F1Params::new(1.0, -0.3, 1.5, 0.4), 1e-16).unwrap();
        assert!(((f1 + f2).re - direct).abs() <= 1e-9);
        assert!((f1 + f2).im.abs() <= 1e-12);
        assert!(matches!(
            connection_pieces(0.5, 1.5, Complex64::new(0.6, 0.0)),
            Err(Error::DegenerateExponentSum(_))
        ));
        let (f1, f2) = connection_pieces(0.5, 0.3, Complex64::new(0.99, 0.0)).unwrap();
        assert!(((f1 + f2).re - 1.0).abs() < 1e-2);
        // off the real axis
        let z = Complex64::new(0.6, 0.2);
        let (f1, f2) = connection_pieces(0.4, -0.25, z).unwrap();
        let direct = hyp2f1_complex(1.0, 0.25, 1.4, 1.0 - z, 1e-16).unwrap();
        assert!((f1 + f2 - direct).norm() <= 1e-9);
    }

    #[test]
    fn hyp_form_matches_series_above() {
        let pf = PowerFunction::new(0.0, BetaIndex::real(-1.5).unwrap());
        let w = make_window(1.0, &pf).unwrap();
        let h = rlfi_hyp_form(&pf, &w, 0.5, 1.3).unwrap();
        let s = rlfi_series_above(&pf, 1.0, 0.5, 1.3, &SeriesConfig::default()).unwrap();
        assert!(rel(h, s.value) < 1e-8);
        assert_eq!(rlfi_hyp_form(&pf, &w, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn hyp_form_terminates_for_naturals() {
        let pf = PowerFunction::new(0.5, BetaIndex::integer(2));
        let w = make_window(1.0, &pf).unwrap();
        let h = rlfi_hyp_form(&pf, &w, 0.3, 1.3).unwrap();
        let p = rlfi_polynomial(2, 0.5, 1.0, 0.3, 1.3).unwrap();
        assert!(rel(h, p) < 1e-14);
        let w = make_window(0.5, &pf).unwrap();
        let h = rlfi_hyp_form(&pf, &w, 0.3, 2.7).unwrap();
        let p = rlfi_polynomial(2, 0.5, 0.5, 0.3, 2.7).unwrap();
        assert!(rel(h, p) < 1e-14);
    }

    #[test]
    fn derivative_form_examples() {
        let pf = PowerFunction::new(0.0, BetaIndex::real(0.7).unwrap());
        let w = make_window(1.0, &pf).unwrap();
        let h = rlfd_hyp_form(&pf, &w, 0.4, 1.2).unwrap();
        let s = rlfd_series(&pf, &w, 0.4, 1.2, &SeriesConfig::default()).unwrap();
        assert!(rel(h, s.value) < 1e-8);
        let h = rlfd_hyp_form(&pf, &w, 0.0, 1.2).unwrap();
        assert!(rel(h, 1.2f64.powf(0.7)) < 1e-13);
        let h = rlfd_hyp_form(&pf, &w, 1.0, 1.2).unwrap();
        assert!(rel(h, 0.7 * 1.2f64.powf(-0.3)) < 1e-13);

        let pf = PowerFunction::new(0.0, BetaIndex::integer(1));
        let w = make_window(0.0, &pf).unwrap();
        let h = rlfd_hyp_form(&pf, &w, 0.35, 2.0).unwrap();
        let exact = rgamma(1.65) * 2.0f64.powf(0.65);
        assert!(rel(h, exact) < 1e-14);
    }

    #[test]
    fn derivative_form_is_derivative_of_complementary_integral() {
        let pf = PowerFunction::new(0.0, BetaIndex::real(-0.6).unwrap());
        let w = make_window(1.0, &pf).unwrap();
        let (alpha, t, h) = (0.3, 1.4, 1e-5);
        let j = |x: f64| rlfi_hyp_form(&pf, &w, 1.0 - alpha, x).unwrap();
        let fd = (j(t + h) - j(t - h)) / (2.0 * h);
        let d = rlfd_hyp_form(&pf, &w, alpha, t).unwrap();
        assert!(rel(fd, d) < 1e-8, "{fd} vs {d}");
    }

    #[test]
    fn connection_form_below_d() {
        let pf = PowerFunction::new(2.0, BetaIndex::rational(2, 3).unwrap());
        let w2 = make_window(0.0, &pf).unwrap();
        let cfg = SeriesConfig::default();
        for t in [0.1, 0.5, 0.9] {
            let s = rlfi_series_displaced(&pf, &w2, 0.4, t, &cfg).unwrap().value;
            let c = connection_form(OperatorKind::Integral, &pf, &w2, 0.4, t).unwrap();
            assert!(rel(c, s) < 1e-10, "t={t}: {c} vs {s}");
            let s = rlfd_series(&pf, &w2, 0.4, t, &cfg).unwrap().value;
            let c = connection_form(OperatorKind::Derivative, &pf, &w2, 0.4, t).unwrap();
            assert!(rel(c, s) < 1e-10, "t={t}: {c} vs {s}");
            let p = principal_branch_form(OperatorKind::Integral, &pf, &w2, 0.4, t).unwrap();
            let s = rlfi_series_displaced(&pf, &w2, 0.4, t, &cfg).unwrap().value;
            assert!(rel(p.norm(), s.abs()) < 1e-10);
            assert!(p.im.abs() > 1e-3 * p.norm());
        }
        let above = PowerFunction::new(0.0, BetaIndex::real(0.3).unwrap());
        let wa = make_window(1.0, &above).unwrap();
        assert!(matches!(
            connection_form(OperatorKind::Integral, &above, &wa, 0.4, 1.5),
            Err(Error::ArgOutOfDisk(_))
        ));
        let neg = PowerFunction::new(2.0, BetaIndex::integer(-2));
        let wn = make_window(0.0, &neg).unwrap();
        assert!(matches!(
            connection_form(OperatorKind::Integral, &neg, &wn, 0.5, 0.4),
            Ok(_)
        ));
        assert!(matches!(
            connection_form(OperatorKind::Integral, &neg, &wn, 1.0, 0.4),
            Err(Error::DegenerateExponentSum(_))
        ));
    }
}
