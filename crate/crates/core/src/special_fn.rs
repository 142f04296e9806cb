//! Gamma function family on the extended real line.
//!
//! The gamma function is evaluated with a Lanczos approximation for
//! `z >= 0.5` and the reflection formula below that. Its poles at the
//! non-positive integers are reported as values ([`ExtendedReal::Pole`]),
//! not errors, and ratios of gamma values at two poles are resolved with
//! the factorial rule `Γ(-n)/Γ(-m) = (-1)^(m-n) m!/n!`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Distance under which an argument is snapped to a non-positive integer.
pub const POLE_TOL: f64 = 1e-12;

/// Largest `k` for which Pochhammer symbols are formed by direct product.
const DIRECT_PRODUCT_MAX: u64 = 64;

/// Beyond this magnitude gamma ratios are formed from log-gamma differences.
const DIRECT_RATIO_MAX: f64 = 100.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Value of the analytically extended gamma function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    /// `Γ` at a non-positive integer. `sign` is the sign of `Γ(z)` as `z`
    /// approaches the pole from the right, i.e. `(-1)^n` at `z = -n`.
    Pole { sign: i8 },
}

impl ExtendedReal {
    pub fn is_pole(&self) -> bool {
        matches!(self, ExtendedReal::Pole { .. })
    }

    /// Finite value, or a signed infinity at a pole.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Pole { sign } => f64::from(sign) * f64::INFINITY,
        }
    }
}

/// Returns `Some(n)` when `z` is within [`POLE_TOL`] of `-n`, `n >= 0`.
pub fn nonpositive_integer(z: f64) -> Option<u64> {
    if z > POLE_TOL || !z.is_finite() {
        return None;
    }
    let r = z.round();
    if (z - r).abs() <= POLE_TOL {
        Some((-r) as u64)
    } else {
        None
    }
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    if r == 0.0 {
        return 0.0;
    }
    sign * (PI * r).sin()
}

fn lanczos_sum(x: f64) -> f64 {
    // x = z - 1
    let mut s = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        s += p / (x + i as f64);
    }
    s
}

fn factorial(n: u64) -> f64 {
    if n > 170 {
        return f64::INFINITY;
    }
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gamma at a point known not to be a pole.
fn gamma_regular(z: f64) -> f64 {
    if z < 0.5 {
        return PI / (sin_pi(z) * gamma_regular(1.0 - z));
    }
    if z == z.trunc() && z <= 171.0 {
        return factorial(z as u64 - 1);
    }
    if z > 171.7 {
        return f64::INFINITY;
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let half = t.powf((x + 0.5) / 2.0);
    SQRT_2PI * half * (half * (-t).exp()) * lanczos_sum(x)
}

/// `Γ(z)`, with poles reported as [`ExtendedReal::Pole`].
pub fn gamma(z: f64) -> ExtendedReal {
    match nonpositive_integer(z) {
        Some(n) => ExtendedReal::Pole {
            sign: if n % 2 == 0 { 1 } else { -1 },
        },
        None => ExtendedReal::Finite(gamma_regular(z)),
    }
}

/// `1/Γ(z)`, which is entire: zero at the poles of `Γ`.
pub fn rgamma(z: f64) -> f64 {
    match nonpositive_integer(z) {
        Some(_) => 0.0,
        None => {
            if z > 171.7 {
                let (ln, _) = ln_gamma_regular(z);
                (-ln).exp()
            } else {
                1.0 / gamma_regular(z)
            }
        }
    }
}

/// `(ln|Γ(z)|, sign Γ(z))` for `z` away from the poles.
fn ln_gamma_regular(z: f64) -> (f64, f64) {
    if z < 0.5 {
        let s = sin_pi(z);
        let (ln_refl, _) = ln_gamma_regular(1.0 - z);
        return (PI.ln() - s.abs().ln() - ln_refl, s.signum());
    }
    let x = z - 1.0;
    let t = x + LANCZOS_G + 0.5;
    ((x + 0.5) * t.ln() - t + LN_SQRT_2PI + lanczos_sum(x).ln(), 1.0)
}

/// `ln|Γ(z)|` and the sign of `Γ(z)`; `None` at a pole.
pub fn ln_gamma(z: f64) -> Option<(f64, f64)> {
    match nonpositive_integer(z) {
        Some(_) => None,
        None => Some(ln_gamma_regular(z)),
    }
}

/// Sign/log-magnitude of a gamma ratio, or an exact zero.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LogRatio {
    Zero,
    Finite { sign: f64, ln_abs: f64 },
}

impl LogRatio {
    pub fn exp(self) -> f64 {
        match self {
            LogRatio::Zero => 0.0,
            LogRatio::Finite { sign, ln_abs } => sign * ln_abs.exp(),
        }
    }
}

pub(crate) fn ln_gamma_ratio(num: f64, den: f64) -> Result<LogRatio> {
    match (nonpositive_integer(num), nonpositive_integer(den)) {
        (Some(n), Some(m)) => {
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            let ln_abs = ln_gamma_regular(m as f64 + 1.0).0 - ln_gamma_regular(n as f64 + 1.0).0;
            Ok(LogRatio::Finite { sign, ln_abs })
        }
        (None, Some(_)) => Ok(LogRatio::Zero),
        (Some(_), None) => Err(Error::NumeratorPole(num)),
        (None, None) => {
            let (ln_n, s_n) = ln_gamma_regular(num);
            let (ln_d, s_d) = ln_gamma_regular(den);
            Ok(LogRatio::Finite {
                sign: s_n * s_d,
                ln_abs: ln_n - ln_d,
            })
        }
    }
}

/// `Γ(num)/Γ(den)` on the extended domain.
///
/// Both arguments at poles `-n`, `-m` give `(-1)^(m-n) m!/n!`; a pole only in
/// the denominator gives zero; a pole only in the numerator is an error.
pub fn gamma_ratio(num: f64, den: f64) -> Result<f64> {
    match (nonpositive_integer(num), nonpositive_integer(den)) {
        (Some(n), Some(m)) => {
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            if m <= 170 && n <= 170 {
                Ok(sign * factorial(m) / factorial(n))
            } else {
                ln_gamma_ratio(num, den).map(LogRatio::exp)
            }
        }
        (None, Some(_)) => Ok(0.0),
        (Some(_), None) => Err(Error::NumeratorPole(num)),
        (None, None) => {
            if num == den {
                Ok(1.0)
            } else if num.abs().max(den.abs()) <= DIRECT_RATIO_MAX {
                Ok(gamma_regular(num) / gamma_regular(den))
            } else {
                ln_gamma_ratio(num, den).map(LogRatio::exp)
            }
        }
    }
}

/// Ascending Pochhammer symbol `(z)_k = z(z+1)⋯(z+k-1)`.
pub fn pochhammer_asc(z: f64, k: u64) -> f64 {
    if k <= DIRECT_PRODUCT_MAX {
        return (0..k).fold(1.0, |acc, j| acc * (z + j as f64));
    }
    gamma_ratio(z + k as f64, z).unwrap_or(f64::NAN)
}

/// Descending Pochhammer symbol `(z)_{-k} = z(z-1)⋯(z-k+1)`.
pub fn pochhammer_desc(z: f64, k: u64) -> f64 {
    if k <= DIRECT_PRODUCT_MAX {
        return (0..k).fold(1.0, |acc, j| acc * (z - j as f64));
    }
    gamma_ratio(z + 1.0, z - k as f64 + 1.0).unwrap_or(f64::NAN)
}

/// Generalized binomial coefficient `Γ(β+1) / (Γ(β-k+1) Γ(k+1))`.
///
/// Goes through the extended gamma ratio, so `β ∈ N₀` with `k > β` is an
/// exact zero and negative integer `β` follows the factorial rule.
pub fn gen_binomial(beta: f64, k: u64) -> f64 {
    let kf = k as f64;
    if k <= DIRECT_PRODUCT_MAX {
        return pochhammer_desc(beta, k) / factorial(k);
    }
    if k <= 100 {
        return match gamma_ratio(beta + 1.0, beta - kf + 1.0) {
            Ok(r) => r / factorial(k),
            Err(_) => f64::NAN,
        };
    }
    match ln_gamma_ratio(beta + 1.0, beta - kf + 1.0) {
        Ok(LogRatio::Zero) => 0.0,
        Ok(LogRatio::Finite { sign, ln_abs }) => {
            sign * (ln_abs - ln_gamma_regular(kf + 1.0).0).exp()
        }
        Err(_) => f64::NAN,
    }
}
