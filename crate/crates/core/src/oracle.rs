//! Brute-force reference values straight from the definitions.
//!
//! The integral is computed by adaptive Gauss–Kronrod quadrature after the
//! substitution `s = (t-x)^α`, which turns the weakly singular kernel into a
//! bounded integrand:
//!
//! ```text
//! J^α f(t) = 1/Γ(α+1) ∫_0^{(t-a)^α} f(t - s^{1/α}) ds
//! ```
//!
//! The derivative is a Richardson-extrapolated central difference of
//! `J^{1-α} f`. Nothing here uses the series or hypergeometric code.

use crate::domain::PowerFunction;
use crate::error::{Error, Result};
use crate::series::check_alpha;
use crate::special_fn::rgamma;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Closest a panel endpoint may come to the pole at `x = d` when `β < 0`.
    pub split_guard: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_depth: 60,
            split_guard: 1e-12,
        }
    }
}

impl QuadratureConfig {
    /// Tighter settings for inner integrals of finite differences.
    pub fn tight() -> Self {
        QuadratureConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let floor = 100.0 * f64::EPSILON;
        if !(self.abs_tol >= floor && self.rel_tol >= floor) {
            return Err(Error::InvalidConfig(format!(
                "quadrature tolerances must be at least {floor:e}"
            )));
        }
        if self.max_depth == 0 || !(self.split_guard > 0.0) {
            return Err(Error::InvalidConfig(
                "max_depth and split_guard must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// An oracle value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5] and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, depth: u32) -> Panel {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kron.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, x) in XGK[..7].iter().enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        fv[j] = (f1, f2);
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let (kron, resabs, resasc) = (kron * h, resabs * h.abs(), resasc * h.abs());
    let mut err = (kron - gauss * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        lo,
        hi,
        value: kron,
        error: err,
        depth,
    }
}

/// Globally adaptive GK15: bisect the panel with the largest error until the
/// summed error meets the tolerance. Panels at `max_depth` are frozen.
fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<OracleValue> {
    if lo == hi {
        return Ok(OracleValue { value: 0.0, error: 0.0 });
    }
    let mut panels = vec![gk15(f, lo, hi, 0)];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).collect::<CompensatedSum>().value();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::ToleranceNotMet(f64::INFINITY));
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(OracleValue { value, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < cfg.max_depth)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(Error::ToleranceNotMet(error));
        };
        let p = panels.swap_remove(i);
        let mid = 0.5 * (p.lo + p.hi);
        let left = gk15(f, p.lo, mid, p.depth + 1);
        let right = gk15(f, mid, p.hi, p.depth + 1);
        panels.push(left);
        panels.push(right);
    }
}

fn check_support(pf: &PowerFunction, a: f64, alpha: f64, t: f64, cfg: &QuadratureConfig) -> Result<()> {
    check_alpha(alpha)?;
    cfg.validate()?;
    // an integrable endpoint singularity (x-d)^β, β > -1, is allowed at a = d
    let singular_endpoint = a == pf.d && pf.beta.value() > -1.0;
    for x in [a, t] {
        if !pf.domain.contains(x, pf.d) && !(x == a && singular_endpoint) {
            return Err(Error::LowerLimitOutsideDomain {
                a: x,
                domain: pf.domain.describe(pf.d),
            });
        }
    }
    if t < a {
        return Err(Error::WindowViolation {
            t,
            t_min: a,
            t_sup: f64::INFINITY,
        });
    }
    let beta = pf.beta.value();
    if beta < 0.0 && pf.beta.natural().is_none() {
        let d = pf.d;
        if !singular_endpoint && d >= a - cfg.split_guard && d <= t + cfg.split_guard {
            return Err(Error::PoleInsideInterval { a, t, d });
        }
    }
    Ok(())
}

/// `J^α (x-d)^β` at `t` with lower limit `a`, by quadrature of the definition.
pub fn quad_rlfi(pf: &PowerFunction, a: f64, alpha: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    quad_rlfi_with_error(pf, a, alpha, t, cfg).map(|v| v.value)
}

pub fn quad_rlfi_with_error(
    pf: &PowerFunction,
    a: f64,
    alpha: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<OracleValue> {
    check_support(pf, a, alpha, t, cfg)?;
    if alpha == 0.0 {
        return Ok(OracleValue {
            value: pf.eval(t),
            error: 0.0,
        });
    }
    if t == a {
        return Ok(OracleValue { value: 0.0, error: 0.0 });
    }
    let f = |x: f64| pf.eval(x);
    let smooth_at_a = a != pf.d || pf.beta.natural().is_some();
    if smooth_at_a {
        return kernel_substituted(&f, a, alpha, t, cfg);
    }

    // x = d is an endpoint singularity (x-d)^β: split it off and use
    // u = (x-d)^{β+1} on the left half.
    let d = pf.d;
    let beta = pf.beta.value();
    let mid = 0.5 * (d + t);
    let right = kernel_substituted(&f, mid, alpha, t, cfg)?;
    let p = 1.0 / (beta + 1.0);
    let g = |u: f64| (t - d - u.powf(p)).powf(alpha - 1.0);
    let left = integrate(&g, 0.0, (mid - d).powf(beta + 1.0), cfg)?;
    let scale = p * rgamma(alpha);
    Ok(OracleValue {
        value: right.value + scale * left.value,
        error: right.error + scale * left.error,
    })
}

fn kernel_substituted<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    alpha: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<OracleValue> {
    let inv = 1.0 / alpha;
    let g = |s: f64| f(t - s.powf(inv));
    let r = integrate(&g, 0.0, (t - a).powf(alpha), cfg)?;
    let scale = rgamma(alpha + 1.0);
    Ok(OracleValue {
        value: scale * r.value,
        error: scale * r.error,
    })
}

/// `D^α (x-d)^β` as the Richardson-extrapolated central difference of
/// `τ ↦ J^{1-α} f(τ)` with steps `h` and `h/2`. The error estimate is the
/// distance between the extrapolated value and the finer difference.
pub fn quad_rlfd(
    pf: &PowerFunction,
    a: f64,
    alpha: f64,
    t: f64,
    cfg: &QuadratureConfig,
    h: f64,
) -> Result<OracleValue> {
    check_alpha(alpha)?;
    if t - h <= a {
        return Err(Error::StepTooLarge { h });
    }
    let g = |tau: f64| quad_rlfi(pf, a, 1.0 - alpha, tau, cfg);
    let diff = |h: f64| -> Result<f64> { Ok((g(t + h)? - g(t - h)?) / (2.0 * h)) };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    let value = (4.0 * fine - coarse) / 3.0;
    Ok(OracleValue {
        value,
        error: (value - fine).abs(),
    })
}

/// [`quad_rlfd`] with the default step `h = (t-a)·1e-4`.
pub fn quad_rlfd_default(pf: &PowerFunction, a: f64, alpha: f64, t: f64, cfg: &QuadratureConfig) -> Result<OracleValue> {
    quad_rlfd(pf, a, alpha, t, cfg, (t - a) * 1e-4)
}

/// Derivative with lower limit `a = d` from homogeneity: `J^{1-α} f` is
/// `C (t-d)^{β+1-α}`, so one quadrature at `t = d+1` fixes `C` and
/// `D^α f(t) = C (β+1-α) (t-d)^{β-α}`.
pub fn quad_rlfd_centered(pf: &PowerFunction, alpha: f64, t: f64, cfg: &QuadratureConfig) -> Result<OracleValue> {
    check_alpha(alpha)?;
    let d = pf.d;
    if t <= d {
        return Err(Error::EvalAtLowerLimit(d));
    }
    let c = quad_rlfi_with_error(pf, d, 1.0 - alpha, d + 1.0, cfg)?;
    let e = pf.beta.value() - alpha;
    let k = (e + 1.0) * (t - d).powf(e);
    Ok(OracleValue {
        value: c.value * k,
        error: (c.error * k).abs(),
    })
}

/// Closed form and series value of `ln((t-d)/(a-d))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReference {
    pub closed: f64,
    pub series: f64,
    pub terms: usize,
}

/// `ln((t-d)/(a-d))` two ways: directly, and by
/// `Σ_{k≥0} (-1)^k/(k+1) · ((t-a)/(a-d))^{k+1}`, convergent for
/// `d < a ≤ t < 2a-d`.
pub fn log_reference(a: f64, d: f64, t: f64) -> Result<LogReference> {
    if !(d < a && a <= t && t < 2.0 * a - d) {
        return Err(Error::OutOfRadius { t });
    }
    let q = (t - a) / (a - d);
    let closed = ((t - d) / (a - d)).ln();
    let mut acc = CompensatedSum::new();
    let mut power = q;
    let mut k = 0usize;
    if q != 0.0 {
        loop {
            let term = power / (k + 1) as f64;
            acc.add(if k % 2 == 0 { term } else { -term });
            k += 1;
            power *= q;
            // alternating with decreasing terms: the next term bounds the tail
            if power / (k + 1) as f64 <= 1e-17 * acc.value().abs() || k >= 1_000_000 {
                break;
            }
        }
    }
    Ok(LogReference {
        closed,
        series: acc.value(),
        terms: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BetaIndex;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    fn tight() -> QuadratureConfig {
        QuadratureConfig::tight()
    }

    #[test]
    fn linear_hand_integral() {
        let pf = PowerFunction::new(0.0, BetaIndex::integer(1));
        let v = quad_rlfi(&pf, 1.0, 0.5, 1.5, &tight()).unwrap();
        let hand = (3.0 * 0.5f64.sqrt() - (2.0 / 3.0) * 0.5f64.powf(1.5)) / PI.sqrt();
        assert!(rel(v, hand) < 1e-12, "{v} vs {hand}");
        assert!((v - 1.063_846_1).abs() < 1e-7);
        assert_eq!(quad_rlfi(&pf, 1.0, 0.5, 1.0, &tight()).unwrap(), 0.0);
    }

    #[test]
    fn order_one_is_classical_integral() {
        let pf = PowerFunction::new(0.0, BetaIndex::integer(-1));
        let v = quad_rlfi(&pf, 2.0, 1.0, 2.5, &tight()).unwrap();
        assert!(rel(v, 1.25f64.ln()) < 1e-12);
        let pf = PowerFunction::new(0.5, BetaIndex::real(1.7).unwrap());
        let v = quad_rlfi(&pf, 1.0, 1.0, 1.4, &tight()).unwrap();
        assert!(rel(v, (0.9f64.powf(2.7) - 0.5f64.powf(2.7)) / 2.7) < 1e-12);
    }

    #[test]
    fn pole_inside_is_rejected() {
        let pf = PowerFunction::new(1.2, BetaIndex::integer(-2));
        assert!(matches!(
            quad_rlfi(&pf, 1.0, 0.5, 1.5, &tight()),
            Err(Error::PoleInsideInterval { .. }) | Err(Error::LowerLimitOutsideDomain { .. })
        ));
        let pf = PowerFunction::new(1.0, BetaIndex::real(-1.5).unwrap());
        assert!(quad_rlfi(&pf, 1.0, 0.5, 1.5, &tight()).is_err());
    }

    #[test]
    fn centered_endpoint_singularity() {
        // J^α x^β from 0: Γ(β+1)/Γ(β+α+1) t^{β+α}
        for (alpha, beta) in [(0.5, -0.5), (0.3, 0.7), (0.9, -0.8), (0.1, std::f64::consts::SQRT_2)] {
            let pf = PowerFunction::new(0.0, BetaIndex::real(beta).unwrap());
            let v = quad_rlfi(&pf, 0.0, alpha, 2.0, &tight()).unwrap();
            let exact = crate::special_fn::gamma_ratio(beta + 1.0, beta + alpha + 1.0).unwrap()
                * 2.0f64.powf(beta + alpha);
            assert!(rel(v, exact) < 1e-11, "α={alpha} β={beta}: {v} vs {exact}");
        }
    }

    #[test]
    fn derivative_examples() {
        let cfg = tight();
        let pf = PowerFunction::new(0.0, BetaIndex::integer(1));
        let v = quad_rlfd_default(&pf, 0.0, 0.5, 1.0, &cfg).unwrap();
        assert!((v.value - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-6, "{v:?}");
        let pf = PowerFunction::new(0.0, BetaIndex::integer(0));
        let v = quad_rlfd_default(&pf, 0.0, 0.5, 1.0, &cfg).unwrap();
        assert!((v.value - 0.564_189_6).abs() < 1e-6, "{v:?}");
        let pf = PowerFunction::new(0.0, BetaIndex::integer(2));
        let v = quad_rlfd_default(&pf, 1.0, 1.0, 1.5, &cfg).unwrap();
        assert!((v.value - 3.0).abs() < 1e-8, "{v:?}");
        assert!(matches!(
            quad_rlfd(&pf, 1.0, 0.5, 1.5, &cfg, 0.5),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn homogeneity_derivative() {
        let pf = PowerFunction::new(1.0, BetaIndex::real(0.5).unwrap());
        let v = quad_rlfd_centered(&pf, 0.5, 2.0, &tight()).unwrap();
        assert!(rel(v.value, PI.sqrt() / 2.0) < 1e-11);
    }

    #[test]
    fn log_examples() {
        let r = log_reference(2.0, 0.0, 2.5).unwrap();
        assert!((r.closed - 0.223_143_6).abs() < 1e-7);
        assert!((r.series - r.closed).abs() < 1e-12);
        let r = log_reference(2.0, 0.0, 2.0).unwrap();
        assert_eq!((r.closed, r.series), (0.0, 0.0));
        let r = log_reference(2.0, 0.0, 3.9).unwrap();
        assert!((r.series - r.closed).abs() < 1e-12, "{r:?}");
        assert!(matches!(log_reference(2.0, 0.0, 4.0), Err(Error::OutOfRadius { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            abs_tol: 1e-17,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
