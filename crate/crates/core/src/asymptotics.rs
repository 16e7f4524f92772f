//! Closed-form large-sample quantities for the bandwidth of an indicator:
//! the bias coefficient `t(m)`, the bias limit, finite-order predictions,
//! the density-supremum limit, the Bernstein tail bound, parameter
//! schedules and the convergence-condition report.
//!
//! Everything that involves `sigma^{md+1}` or `C^m` is evaluated in log
//! space; those factors leave double range already for moderate `m`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::density::{log_boundary_power_integral, region_mass, sup_on_boundary, GmmModel, Hyperplane};
use crate::error::{Error, Result};

/// Largest order summed term by term; above it the alternating binomial sum
/// cancels too badly and the integral form is used.
const SERIES_MAX_ORDER: usize = 16;

/// Summation range of the bias coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TVariant {
    /// `sum_{r=1}^{m-1} C(m-1, r) (-1)^r (sqrt(r+1) - sqrt(r))`.
    Printed,
    /// The same sum from `r = 0`; equals the printed one plus 1.
    Corrected,
}

impl TVariant {
    pub fn name(self) -> &'static str {
        match self {
            TVariant::Printed => "printed",
            TVariant::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for TVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(TVariant::Printed),
            "corrected" => Ok(TVariant::Corrected),
            other => Err(Error::InvalidInput(format!("unknown t(m) variant {other:?}"))),
        }
    }
}

/// Term-by-term evaluation of the corrected sum. Accurate for small `m` only.
pub fn t_coefficient_series(m: usize) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0; // C(m-1, r)
    for r in 0..m {
        let rf = r as f64;
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom * ((rf + 1.0).sqrt() - rf.sqrt());
        binom = binom * (m as f64 - 1.0 - rf) / (rf + 1.0);
    }
    total
}

/// Corrected sum through its integral form
/// `t(m) = (1 / (2 sqrt(pi))) \int_0^inf (1 - e^{-t})^m t^{-3/2} dt`,
/// obtained from `sqrt(r+1) - sqrt(r) = (1/(2 sqrt(pi))) \int e^{-rt} (1 - e^{-t}) t^{-3/2} dt`
/// and the binomial theorem. Trapezoid rule in `u = ln t` over `[-80, 80]`.
pub fn t_coefficient_integral(m: usize) -> f64 {
    let (lo, hi, h) = (-80.0f64, 80.0f64, 0.01f64);
    let steps = ((hi - lo) / h).round() as usize;
    let mf = m as f64;
    let f = |u: f64| -> f64 {
        let t = u.exp();
        // ln(1 - e^{-t}) without cancellation for small t
        let log_base = (-(-t).exp_m1()).ln();
        (mf * log_base - 0.5 * u).exp()
    };
    let mut sum = 0.5 * (f(lo) + f(hi));
    for i in 1..steps {
        sum += f(lo + i as f64 * h);
    }
    // right tail beyond `hi`: (1 - e^{-t})^m ~ 1, \int e^{-u/2} du = 2 e^{-hi/2}
    let tail = 2.0 * (-0.5 * hi).exp();
    (sum * h + tail) / (2.0 * PI.sqrt())
}

/// The bias coefficient `t(m)` of the chosen variant.
pub fn t_coefficient(m: usize, variant: TVariant) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("order m must be at least 1".into()));
    }
    let corrected = if m <= SERIES_MAX_ORDER { t_coefficient_series(m) } else { t_coefficient_integral(m) };
    if !corrected.is_finite() {
        return Err(Error::NumericalAccuracy(format!("t({m}) is not finite")));
    }
    Ok(match variant {
        TVariant::Corrected => corrected,
        TVariant::Printed => corrected - 1.0,
    })
}

/// Large-sample limit of `E[V]`, `V = (1/(n sigma)) 1_S^T L^m 1_S`:
/// `t(m) / sqrt(2 pi) * \int_{boundary} p^{m+1}`.
pub fn bias_limit(model: &GmmModel, plane: &Hyperplane, m: usize, variant: TVariant) -> Result<f64> {
    let t = t_coefficient(m, variant)?;
    let log_int = log_boundary_power_integral(model, plane, m as f64 + 1.0)?;
    Ok(t / (2.0 * PI).sqrt() * log_int.exp())
}

/// Finite-order counterpart of the empirical `omega_m`:
/// `sigma^{1/m} (bias_limit / mass(S))^{1/m}`.
pub fn finite_m_prediction(model: &GmmModel, plane: &Hyperplane, m: usize, sigma: f64, variant: TVariant) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let t = t_coefficient(m, variant)?;
    if t <= 0.0 {
        return Err(Error::Domain(format!(
            "{} t({m}) = {t:.6} is not positive, so the bias limit has no m-th root (variant inconsistency)",
            variant.name()
        )));
    }
    let log_int = log_boundary_power_integral(model, plane, m as f64 + 1.0)?;
    let mass = region_mass(model, plane)?;
    if log_int == f64::NEG_INFINITY || mass <= 0.0 {
        return Err(Error::Domain("bias limit or region mass vanishes".into()));
    }
    let log_bias = t.ln() - 0.5 * (2.0 * PI).ln() + log_int;
    Ok(((sigma.ln() + log_bias - mass.ln()) / m as f64).exp())
}

/// The limit of `omega_m(1_S)`: the supremum of `p` on the boundary.
pub fn limit_bandwidth(model: &GmmModel, plane: &Hyperplane) -> Result<f64> {
    sup_on_boundary(model, plane)
}

/// `C = 2 / (2 pi)^{d/2}`.
pub fn kernel_sup_constant(d: usize) -> f64 {
    2.0 / (2.0 * PI).powf(d as f64 / 2.0)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln |e^a - e^b|`.
fn log_abs_diff_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == lo {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

/// Bernstein tail bound on `P(|V - E V| > eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub probability: f64,
    pub log_probability: f64,
    /// The exponent inside `2 exp(.)`, always `<= 0`.
    pub exponent: f64,
}

/// `2 exp(-floor(n/(m+1)) sigma^{md+1} eps^2 / (2 C^m E[V] + (2/3)|C^m - sigma^{md+1} E[V]| eps))`.
pub fn bernstein_tail_bound(n: usize, m: usize, sigma: f64, d: usize, expected_v: f64, epsilon: f64) -> Result<TailBound> {
    if n == 0 || m == 0 || d == 0 || !(sigma > 0.0) || !(expected_v > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidInput("all tail-bound parameters must be positive".into()));
    }
    let blocks = (n / (m + 1)) as f64;
    let log_sig_pow = (m * d + 1) as f64 * sigma.ln();
    let log_cm = m as f64 * kernel_sup_constant(d).ln();
    let exponent = if blocks == 0.0 {
        0.0
    } else {
        let log_num = blocks.ln() + log_sig_pow + 2.0 * epsilon.ln();
        let first = 2f64.ln() + log_cm + expected_v.ln();
        let second = (2.0f64 / 3.0).ln() + log_abs_diff_exp(log_cm, log_sig_pow + expected_v.ln()) + epsilon.ln();
        -(log_num - log_add_exp(first, second)).exp()
    };
    let log_probability = 2f64.ln() + exponent;
    Ok(TailBound { probability: log_probability.exp().min(2.0), log_probability, exponent })
}

/// Parameters from the joint scaling `sigma = n^{-x/(md+1)}`, `m = (log n)^y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: usize,
    pub sigma: f64,
    pub m: usize,
    pub x: f64,
    pub y: f64,
}

/// Schedule with the natural logarithm; see [`schedule_with_base`].
pub fn schedule(n: usize, x: f64, y: f64, d: usize) -> Result<Schedule> {
    schedule_with_base(n, x, y, d, std::f64::consts::E)
}

/// `m = max(1, round((log_base n)^y))`, then `sigma = n^{-x/(md+1)}`.
pub fn schedule_with_base(n: usize, x: f64, y: f64, d: usize, log_base: f64) -> Result<Schedule> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidInput(format!("exponent x must lie in (0, 1), got {x}")));
    }
    if !(y > 0.5 && y < 1.0) {
        return Err(Error::InvalidInput(format!("exponent y must lie in (1/2, 1), got {y}")));
    }
    if n < 3 || d == 0 {
        return Err(Error::InvalidInput("schedule needs n >= 3 and d >= 1".into()));
    }
    if !(log_base > 1.0) {
        return Err(Error::InvalidInput(format!("log base must exceed 1, got {log_base}")));
    }
    let log_n = (n as f64).ln() / log_base.ln();
    let m = (log_n.powf(y).round() as usize).max(1);
    let sigma = (n as f64).powf(-x / (m * d + 1) as f64);
    Ok(Schedule { n, sigma, m, x, y })
}

/// Diagnostic quantities of the convergence conditions. No verdict is
/// attached: the conditions are limits, not thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub sigma: f64,
    pub m: usize,
    pub d: usize,
    /// `m / n`
    pub quantity_c3a: f64,
    /// `m sigma^2`
    pub quantity_c3b: f64,
    /// `(1/sigma)^{1/m}`
    pub quantity_c4: f64,
    /// `n sigma^{md+1} / (m C^m)`
    pub quantity_c5: f64,
    pub log_c5: f64,
    /// `quantity_c5 / ln n`
    pub strong_c5: f64,
    pub log_strong_c5: f64,
}

pub fn check_conditions(n: usize, sigma: f64, m: usize, d: usize) -> Result<ConditionReport> {
    if n < 2 || m == 0 || d == 0 || !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput("conditions need n >= 2, m >= 1, d >= 1 and sigma > 0".into()));
    }
    let nf = n as f64;
    let mf = m as f64;
    let log_c5 = nf.ln() + (m * d + 1) as f64 * sigma.ln() - mf.ln() - mf * kernel_sup_constant(d).ln();
    let log_strong_c5 = log_c5 - nf.ln().ln();
    Ok(ConditionReport {
        n,
        sigma,
        m,
        d,
        quantity_c3a: mf / nf,
        quantity_c3b: mf * sigma * sigma,
        quantity_c4: (-sigma.ln() / mf).exp(),
        quantity_c5: log_c5.exp(),
        log_c5,
        strong_c5: log_strong_c5.exp(),
        log_strong_c5,
    })
}
