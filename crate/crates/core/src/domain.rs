//! Real domains of `f(t) = (t - d)^β` and the convergence windows of the
//! series representations.
//!
//! The exponent is carried exactly as a [`BetaIndex`]: an integer, a reduced
//! rational `p/q`, or a value the caller declares irrational. The domain
//! depends on that arithmetic nature, not on the floating-point value, so no
//! attempt is made to recognise `0.5` as `1/2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact representation of the exponent `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaIndex {
    IntegerExp(i64),
    /// Lowest terms, `q >= 2`.
    RationalExp { p: i64, q: u64 },
    /// Declared non-rational.
    RealExp(f64),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl BetaIndex {
    pub fn integer(m: i64) -> Self {
        BetaIndex::IntegerExp(m)
    }

    /// Reduces `p/q` to lowest terms; `q = 1` after reduction becomes an
    /// integer exponent.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidExponent(format!("{p}/{q} has a zero denominator")));
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let g = gcd(p.unsigned_abs(), q as u64).max(1);
        let p = p / g as i64;
        let q = q as u64 / g;
        Ok(if q == 1 {
            BetaIndex::IntegerExp(p)
        } else {
            BetaIndex::RationalExp { p, q }
        })
    }

    pub fn real(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidExponent(format!("{x} is not finite")));
        }
        Ok(BetaIndex::RealExp(x))
    }

    pub fn value(&self) -> f64 {
        match *self {
            BetaIndex::IntegerExp(m) => m as f64,
            BetaIndex::RationalExp { p, q } => p as f64 / q as f64,
            BetaIndex::RealExp(x) => x,
        }
    }

    /// `Some(m)` when `β = m ∈ N₀`, i.e. `f` is a polynomial.
    pub fn natural(&self) -> Option<u64> {
        match *self {
            BetaIndex::IntegerExp(m) if m >= 0 => Some(m as u64),
            _ => None,
        }
    }

    /// `Some(m)` when `β = -m` with `m >= 1`.
    pub fn negative_integer(&self) -> Option<u64> {
        match *self {
            BetaIndex::IntegerExp(m) if m < 0 => Some(m.unsigned_abs()),
            _ => None,
        }
    }

    /// Real power `x^β`, following the same branch rules as the domain
    /// classification. Returns NaN where the power is not real.
    pub fn pow(&self, x: f64) -> f64 {
        match *self {
            BetaIndex::IntegerExp(m) => match i32::try_from(m) {
                Ok(m) => x.powi(m),
                Err(_) => {
                    let mag = x.abs().powf(m as f64);
                    if x < 0.0 && m % 2 != 0 {
                        -mag
                    } else {
                        mag
                    }
                }
            },
            BetaIndex::RationalExp { p, q } => {
                let e = p as f64 / q as f64;
                if x >= 0.0 {
                    x.powf(e)
                } else if p % 2 == 0 {
                    (-x).powf(e)
                } else {
                    f64::NAN
                }
            }
            BetaIndex::RealExp(e) => {
                if x >= 0.0 {
                    x.powf(e)
                } else {
                    f64::NAN
                }
            }
        }
    }
}

impl fmt::Display for BetaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BetaIndex::IntegerExp(m) => write!(f, "int:{m}"),
            BetaIndex::RationalExp { p, q } => write!(f, "rational:{p}/{q}"),
            BetaIndex::RealExp(x) => write!(f, "real:{x:?}"),
        }
    }
}

impl FromStr for BetaIndex {
    type Err = Error;

    /// Parses the `int:`, `rational:` and `real:` forms produced by
    /// [`Display`](fmt::Display).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidExponent(s.to_string());
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "int" => body.trim().parse().map(BetaIndex::IntegerExp).map_err(|_| bad()),
            "rational" => parse_rational(body),
            "real" => BetaIndex::real(body.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// Parses `p/q` (or a bare integer) into a reduced exponent.
pub fn parse_rational(s: &str) -> Result<BetaIndex> {
    let bad = || Error::InvalidExponent(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            BetaIndex::rational(p, q)
        }
        None => s.parse().map(BetaIndex::IntegerExp).map_err(|_| bad()),
    }
}

/// Real domain of `(t - d)^β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSpec {
    /// `R`
    AllReals,
    /// `R \ {d}`
    AllRealsExceptD,
    /// `[d, +∞)`
    ClosedFromD,
    /// `(d, +∞)`
    OpenFromD,
}

impl DomainSpec {
    pub fn contains(&self, x: f64, d: f64) -> bool {
        match self {
            DomainSpec::AllReals => x.is_finite(),
            DomainSpec::AllRealsExceptD => x.is_finite() && x != d,
            DomainSpec::ClosedFromD => x >= d,
            DomainSpec::OpenFromD => x > d,
        }
    }

    /// Set notation with `d` substituted, e.g. `(1, +∞)`.
    pub fn describe(&self, d: f64) -> String {
        match self {
            DomainSpec::AllReals => "R".to_string(),
            DomainSpec::AllRealsExceptD => format!("R \\ {{{d}}}"),
            DomainSpec::ClosedFromD => format!("[{d}, +∞)"),
            DomainSpec::OpenFromD => format!("({d}, +∞)"),
        }
    }
}

pub fn classify_domain(_d: f64, beta: BetaIndex) -> DomainSpec {
    match beta {
        BetaIndex::IntegerExp(m) if m >= 0 => DomainSpec::AllReals,
        BetaIndex::IntegerExp(_) => DomainSpec::AllRealsExceptD,
        BetaIndex::RationalExp { p, .. } if p > 0 && p % 2 == 0 => DomainSpec::AllReals,
        BetaIndex::RationalExp { p, .. } if p > 0 => DomainSpec::ClosedFromD,
        BetaIndex::RationalExp { .. } => DomainSpec::OpenFromD,
        BetaIndex::RealExp(_) => DomainSpec::OpenFromD,
    }
}

/// `f(t) = (t - d)^β` together with its real domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFunction {
    pub d: f64,
    pub beta: BetaIndex,
    pub domain: DomainSpec,
}

impl PowerFunction {
    pub fn new(d: f64, beta: BetaIndex) -> Self {
        PowerFunction {
            d,
            beta,
            domain: classify_domain(d, beta),
        }
    }

    /// `f(x)`, NaN outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        if self.domain.contains(x, self.d) {
            self.beta.pow(x - self.d)
        } else {
            f64::NAN
        }
    }
}

/// Position of the lower limit relative to `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    BelowD,
    AboveD,
    Centered,
}

/// Which `t` range to grant above `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowRule {
    /// `[a, a+ε/2)` below `d`, `[a, a+ε)` above `d`.
    #[default]
    SideDependent,
    /// `[a, a+ε/2)` on both sides.
    Strict,
}

/// Lower limit and the half-open interval `[t_min, t_sup)` of admissible `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalWindow {
    pub a: f64,
    pub epsilon: f64,
    pub t_min: f64,
    pub t_sup: f64,
    pub side: Side,
}

impl EvalWindow {
    /// Signed gap `a - d`.
    pub fn gap(&self) -> f64 {
        match self.side {
            Side::BelowD => -self.epsilon,
            Side::AboveD => self.epsilon,
            Side::Centered => 0.0,
        }
    }

    /// Window for the lower limit `d⁺ = d + ε`, with the gap held at exactly `ε`.
    pub fn d_plus(pf: &PowerFunction, epsilon: f64, rule: WindowRule) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidExponent(format!("epsilon = {epsilon} must be positive")));
        }
        let a = pf.d + epsilon;
        if !pf.domain.contains(a, pf.d) {
            return Err(Error::LowerLimitOutsideDomain {
                a,
                domain: pf.domain.describe(pf.d),
            });
        }
        let reach = match rule {
            WindowRule::SideDependent => epsilon,
            WindowRule::Strict => epsilon / 2.0,
        };
        Ok(EvalWindow {
            a,
            epsilon,
            t_min: a,
            t_sup: a + reach,
            side: Side::AboveD,
        })
    }

    pub fn contains(&self, t: f64) -> bool {
        check_t(self, t)
    }

    pub fn require(&self, t: f64) -> Result<()> {
        if check_t(self, t) {
            Ok(())
        } else {
            Err(Error::WindowViolation {
                t,
                t_min: self.t_min,
                t_sup: self.t_sup,
            })
        }
    }
}

pub fn make_window(a: f64, pf: &PowerFunction) -> Result<EvalWindow> {
    make_window_with(a, pf, WindowRule::SideDependent)
}

pub fn make_window_with(a: f64, pf: &PowerFunction, rule: WindowRule) -> Result<EvalWindow> {
    if !pf.domain.contains(a, pf.d) {
        return Err(Error::LowerLimitOutsideDomain {
            a,
            domain: pf.domain.describe(pf.d),
        });
    }
    if a == pf.d {
        if pf.beta.natural().is_none() {
            return Err(Error::CenteredNotAnalytic(a));
        }
        return Ok(EvalWindow {
            a,
            epsilon: 0.0,
            t_min: a,
            t_sup: f64::INFINITY,
            side: Side::Centered,
        });
    }
    let epsilon = (pf.d - a).abs();
    let (side, reach) = if a < pf.d {
        (Side::BelowD, epsilon / 2.0)
    } else {
        match rule {
            WindowRule::SideDependent => (Side::AboveD, epsilon),
            WindowRule::Strict => (Side::AboveD, epsilon / 2.0),
        }
    };
    Ok(EvalWindow {
        a,
        epsilon,
        t_min: a,
        t_sup: a + reach,
        side,
    })
}

pub fn check_t(win: &EvalWindow, t: f64) -> bool {
    win.t_min <= t && t < win.t_sup
}
