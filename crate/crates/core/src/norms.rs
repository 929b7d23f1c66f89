//! Orlicz-type norms (ψ_θ, general g, generalized Bernstein-Orlicz) and
//! conversions between tail-class parameters.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, TailIndex};
use crate::error::{ensure, Error, Result};
use crate::numeric::{bisect_increasing, gamma};
use crate::rng::RngStream;

const LN2: f64 = std::f64::consts::LN_2;

/// Young function defining an Orlicz norm.
#[derive(Clone)]
pub enum OrliczSpec {
    /// `ψ_θ(x) = exp(x^θ) - 1`.
    Psi(f64),
    /// Any non-decreasing convex `g` with `g(0) = 0`.
    General(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for OrliczSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczSpec::Psi(t) => write!(f, "Psi({t})"),
            OrliczSpec::General(_) => write!(f, "General(..)"),
        }
    }
}

impl OrliczSpec {
    pub fn psi(theta: f64) -> Self {
        OrliczSpec::Psi(theta)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            OrliczSpec::Psi(t) => x.powf(*t).exp_m1(),
            OrliczSpec::General(g) => g(x),
        }
    }

    /// Checks `g(0) = 0`, monotonicity and midpoint convexity on a grid.
    pub fn validate(&self) -> Result<()> {
        if let OrliczSpec::Psi(t) = self {
            return ensure(*t > 0.0 && t.is_finite(), "theta must be positive");
        }
        ensure(self.eval(0.0).abs() < 1e-12, "g(0) must be 0")?;
        let xs: Vec<f64> = (0..=200).map(|i| f64::from(i) * 0.05).collect();
        for w in xs.windows(3) {
            let (a, b, c) = (self.eval(w[0]), self.eval(w[1]), self.eval(w[2]));
            ensure(b >= a - 1e-12, "g must be non-decreasing")?;
            ensure(b <= 0.5 * (a + c) + 1e-9 * c.abs().max(1.0), "g must be convex")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedForm,
    MgfInversion,
    MonteCarlo,
}

/// A solved norm together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub tolerance: f64,
    pub samples_used: usize,
    /// Monte-Carlo standard error of `value` (delta method), when sampled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub low_confidence: bool,
}

impl NormEstimate {
    fn closed(value: f64) -> Self {
        Self { value, method: NormMethod::ClosedForm, tolerance: 0.0, samples_used: 0, std_error: None, low_confidence: false }
    }
}

/// Tail-class parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailClassParams {
    SubG { sigma2: f64 },
    SubE { lambda: f64 },
    SubE2 { lambda: f64, alpha: f64 },
    SubGamma { v: f64, c: f64 },
    SubW { theta: f64, norm: f64 },
    Bernstein { v2: f64, kappa: f64 },
}

impl TailClassParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        let ok = match *self {
            TailClassParams::SubG { sigma2 } => pos(sigma2),
            TailClassParams::SubE { lambda } => pos(lambda),
            TailClassParams::SubE2 { lambda, alpha } => pos(lambda) && pos(alpha),
            TailClassParams::SubGamma { v, c } => pos(v) && c >= 0.0 && c.is_finite(),
            TailClassParams::SubW { theta, norm } => pos(theta) && pos(norm),
            TailClassParams::Bernstein { v2, kappa } => pos(v2) && pos(kappa),
        };
        ensure(ok, "tail-class parameters must be positive")
    }

    /// `subE2(λ, λ)` is `subE(λ)`.
    pub fn normalized(self) -> Self {
        match self {
            TailClassParams::SubE2 { lambda, alpha } if lambda == alpha => TailClassParams::SubE { lambda },
            other => other,
        }
    }
}

/// `E g(|X - c|/t)` where `c` is 0 or the mean. Infinite expectations are
/// reported as `Divergent`.
fn orlicz_expect(spec: &DistributionSpec, centered: bool, orlicz: &OrliczSpec, t: f64) -> Result<f64> {
    let c = if centered { spec.mean() } else { 0.0 };
    let theta = match orlicz {
        OrliczSpec::General(g) => {
            let v = spec.expect(|x| g((x - c).abs() / t), c, 1e-13)?;
            return if v.is_finite() { Ok(v) } else { Err(Error::Divergent("E g(|X|/t)".into())) };
        }
        OrliczSpec::Psi(theta) => *theta,
    };
    let diverge = || Err(Error::Divergent(format!("E exp((|X|/{t})^{theta}) is infinite")));
    let index = match spec.tail_index() {
        TailIndex::Bounded => f64::INFINITY,
        TailIndex::Index(k) => k,
    };
    if theta > index {
        return diverge();
    }
    let e = if theta == index {
        match *spec {
            DistributionSpec::Gaussian { mu, sigma } => {
                let m = if centered { 0.0 } else { mu };
                let d = t * t - 2.0 * sigma * sigma;
                if d <= 0.0 {
                    return diverge();
                }
                (1.0 - 2.0 * sigma * sigma / (t * t)).powf(-0.5) * (m * m / d).exp()
            }
            DistributionSpec::Weibull { scale, shape } if !centered && shape != 1.0 => {
                let bt = scale * t.powf(shape);
                if bt <= 1.0 {
                    return diverge();
                }
                1.0 / (1.0 - 1.0 / bt)
            }
            DistributionSpec::Weibull { scale, shape } if shape != 1.0 => {
                if scale * t.powf(shape) <= 1.0 {
                    return diverge();
                }
                spec.expect(|x| ((x - c).abs() / t).powf(theta).exp(), c, 1e-13)?
            }
            _ => {
                // theta == 1 for every remaining law
                let r = 1.0 / t;
                let v = if centered || matches!(spec, DistributionSpec::DiscreteLaplace { .. }) {
                    spec.abs_central_mgf(r, 1e-13)
                } else {
                    spec.mgf(r).map_err(|_| Error::Divergent("mgf".into()))
                };
                match v {
                    Ok(v) if v.is_finite() && v > 0.0 => v,
                    _ => return diverge(),
                }
            }
        }
    } else {
        spec.expect(|x| ((x - c).abs() / t).powf(theta).exp(), c, 1e-13)?
    };
    if e.is_finite() {
        Ok(e - 1.0)
    } else {
        diverge()
    }
}

fn closed_form_psi(spec: &DistributionSpec, theta: f64) -> Option<f64> {
    use DistributionSpec::*;
    Some(match *spec {
        Rademacher { scale } => scale / LN2.powf(1.0 / theta),
        Bernoulli { p } => (1.0 + 1.0 / p).ln().powf(-1.0 / theta),
        Gaussian { mu, sigma } if mu == 0.0 && theta == 2.0 => (8.0f64 / 3.0).sqrt() * sigma,
        Exponential { mean } if theta == 1.0 => 2.0 * mean,
        Gamma { shape, scale } if theta == 1.0 => scale / (1.0 - 2f64.powf(-1.0 / shape)),
        ChiSquare { df } if theta == 1.0 => 2.0 / (1.0 - 2f64.powf(-2.0 / df)),
        Poisson { lambda } if theta == 1.0 => 1.0 / (LN2 / lambda).ln_1p(),
        Geometric { q } if theta == 1.0 => 1.0 / (2.0 / (1.0 + q)).ln(),
        DiscreteLaplace { q } if theta == 1.0 => 1.0 / ((1.0 + 3.0 * q) / ((3.0 + q) * q)).ln(),
        Weibull { scale, shape } if theta == shape => (2.0 / scale).powf(1.0 / theta),
        _ => return None,
    })
}

/// Orlicz norm `inf{t > 0 : E g(|X|/t) <= 1}`.
///
/// Returns `Error::InfiniteNorm` when no finite `t` works.
pub fn psi_norm(spec: &DistributionSpec, orlicz: &OrliczSpec, tolerance: f64) -> Result<NormEstimate> {
    spec.validate()?;
    orlicz.validate()?;
    if let OrliczSpec::Psi(theta) = orlicz {
        if let Some(v) = closed_form_psi(spec, *theta) {
            return Ok(NormEstimate::closed(v));
        }
    }
    solve_norm(spec, false, orlicz, tolerance)
}

/// Orlicz norm of the centered variable `X - EX`.
pub fn psi_norm_centered(spec: &DistributionSpec, orlicz: &OrliczSpec, tolerance: f64) -> Result<NormEstimate> {
    spec.validate()?;
    orlicz.validate()?;
    if let (DistributionSpec::Gaussian { sigma, .. }, OrliczSpec::Psi(t)) = (spec, orlicz) {
        if *t == 2.0 {
            return Ok(NormEstimate::closed((8.0f64 / 3.0).sqrt() * sigma));
        }
    }
    solve_norm(spec, true, orlicz, tolerance)
}

fn solve_norm(spec: &DistributionSpec, centered: bool, orlicz: &OrliczSpec, tolerance: f64) -> Result<NormEstimate> {
    ensure(tolerance > 0.0, "tolerance must be positive")?;
    // excess(t) > 0 means t is too small; divergence counts as too small.
    let excess = |t: f64| match orlicz_expect(spec, centered, orlicz, t) {
        Ok(v) => v - 1.0,
        Err(_) => f64::INFINITY,
    };
    let scale = (spec.variance() + if centered { 0.0 } else { spec.mean().powi(2) }).sqrt().max(1e-300);
    let mut hi = scale;
    let mut doublings = 0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::InfiniteNorm);
        }
    }
    let mut lo = 0.5 * hi;
    while excess(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(NormEstimate::closed(0.0));
        }
    }
    // work with the increasing map -excess
    let t = bisect_increasing(|t| -excess(t).min(1e300), lo, hi, tolerance)?;
    Ok(NormEstimate {
        value: t,
        method: NormMethod::MgfInversion,
        tolerance,
        samples_used: 0,
        std_error: None,
        low_confidence: false,
    })
}

/// Moment characterization `sup_p p^{-1/2} (E|X|^p)^{1/p}` over `p = 1..=64`.
/// Equivalent to the ψ₂ norm up to universal constants; used as a cross-check.
pub fn psi2_moment_norm(spec: &DistributionSpec) -> Result<f64> {
    let mut best: f64 = 0.0;
    for p in 1..=64u32 {
        let m = spec.moment(p, true, false)?;
        best = best.max(m.powf(1.0 / f64::from(p)) / f64::from(p).sqrt());
    }
    Ok(best)
}

/// ψ₂ norm σ implies sub-Gaussian with proxy `4σ²`.
pub fn psi2_to_proxy(norm: f64) -> f64 {
    4.0 * norm * norm
}

/// Sub-Gaussian proxy σ² (given as σ) bounds the ψ₂ norm by `2√2 σ / √log 2`.
pub fn proxy_to_psi2(sigma: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / LN2.sqrt() * sigma
}

pub fn psi1_to_sub_e(norm: f64) -> f64 {
    2.0 * norm
}

/// `‖X²‖ψ₁ = ‖X‖ψ₂²`.
pub fn square_psi1(psi2_norm: f64) -> f64 {
    psi2_norm * psi2_norm
}

/// `‖XY‖ψ₁ <= ‖X‖ψ₂ ‖Y‖ψ₂`.
pub fn product_psi1(a: f64, b: f64) -> f64 {
    a * b
}

/// `E|X|^k <= 2 ‖X‖ψθ^k Γ(k/θ + 1)`.
pub fn psi_theta_moment_bound(norm: f64, theta: f64, k: u32) -> Result<f64> {
    ensure(k >= 1, "k must be at least 1")?;
    ensure(theta > 0.0, "theta must be positive")?;
    let kf = f64::from(k);
    Ok(2.0 * norm.powf(kf) * gamma(kf / theta + 1.0))
}

/// `E|X|^k <= 2 ‖X‖ψ₁^k k!`.
pub fn psi1_moment_bound(norm: f64, k: u32) -> Result<f64> {
    psi_theta_moment_bound(norm, 1.0, k)
}

/// For `X ~ subG(σ²)`: `E|X|^k <= (2σ²)^{k/2} k Γ(k/2)`.
pub fn subg_moment_bound(sigma: f64, k: u32) -> Result<f64> {
    ensure(k >= 1, "k must be at least 1")?;
    let kf = f64::from(k);
    Ok((2.0 * sigma * sigma).powf(kf / 2.0) * kf * gamma(kf / 2.0))
}

/// For `X ~ subG(σ²)`: `(E|X|^k)^{1/k} <= σ e^{1/e} √k`.
pub fn subg_moment_root_bound(sigma: f64, k: u32) -> Result<f64> {
    ensure(k >= 1, "k must be at least 1")?;
    Ok(sigma * (1.0 / std::f64::consts::E).exp() * f64::from(k).sqrt())
}

/// `√log(1+t) + L (log(1+t))^{1/θ}`.
pub fn gbo_inverse(theta: f64, l: f64, t: f64) -> f64 {
    let u = t.ln_1p();
    u.sqrt() + l * u.powf(1.0 / theta)
}

/// `Ψ_{θ,L}`, the inverse of [`gbo_inverse`].
pub fn gbo_function(theta: f64, l: f64, x: f64, tolerance: f64) -> f64 {
    gbo_log1p(theta, l, x, tolerance).exp_m1()
}

/// `log(1 + Ψ_{θ,L}(x))`: the `u >= 0` with `√u + L u^{1/θ} = x`.
pub(crate) fn gbo_log1p(theta: f64, l: f64, x: f64, tolerance: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if l == 0.0 || theta == 2.0 {
        return (x / (1.0 + if theta == 2.0 { l } else { 0.0 })).powi(2);
    }
    if theta == 1.0 {
        let r = (-1.0 + (1.0 + 4.0 * l * x).sqrt()) / (2.0 * l);
        return r * r;
    }
    let f = |u: f64| u.sqrt() + l * u.powf(1.0 / theta) - x;
    let mut hi = x * x;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    bisect_increasing(f, 0.0, hi, tolerance).unwrap_or(hi)
}

/// GBO norm of a sample of absolute values: smallest η with
/// `mean Ψ(|x_i|/η) <= 1`. The same draws are used for every η.
pub fn gbo_norm_from_samples(abs_values: &[f64], theta: f64, l: f64, tolerance: f64) -> Result<NormEstimate> {
    ensure(!abs_values.is_empty(), "need at least one sample")?;
    ensure(theta > 0.0 && l >= 0.0, "theta > 0 and L >= 0 required")?;
    let n = abs_values.len() as f64;
    let mean_psi = |eta: f64| abs_values.iter().map(|&x| gbo_function(theta, l, x / eta, 1e-14)).sum::<f64>() / n;
    let xmax = abs_values.iter().cloned().fold(0.0, f64::max);
    if xmax == 0.0 {
        return Ok(NormEstimate { samples_used: abs_values.len(), method: NormMethod::MonteCarlo, ..NormEstimate::closed(0.0) });
    }
    // For η >= xmax / gbo_inverse(1), every term is at most 1.
    let hi = xmax / gbo_inverse(theta, l, 1.0) * (1.0 + 1e-9);
    let mut lo = hi;
    while mean_psi(lo) <= 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    let eta = bisect_increasing(|e| 1.0 - mean_psi(e).min(1e300), lo, hi, tolerance)?;
    // delta-method standard error
    let vals: Vec<f64> = abs_values.iter().map(|&x| gbo_function(theta, l, x / eta, 1e-14)).collect();
    let m = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let h = 1e-4 * eta;
    let slope = (mean_psi(eta + h) - mean_psi(eta - h)) / (2.0 * h);
    let se = if slope != 0.0 { sd / n.sqrt() / slope.abs() } else { f64::INFINITY };
    let low_confidence = !(se.is_finite() && se <= 0.05 * eta);
    Ok(NormEstimate {
        value: eta,
        method: NormMethod::MonteCarlo,
        tolerance,
        samples_used: abs_values.len(),
        std_error: Some(se),
        low_confidence,
    })
}

/// GBO norm of a law by Monte-Carlo over `samples` draws of `stream`.
pub fn gbo_norm(
    spec: &DistributionSpec,
    theta: f64,
    l: f64,
    samples: usize,
    tolerance: f64,
    stream: RngStream,
) -> Result<NormEstimate> {
    let x = spec.sample(stream, samples)?;
    let abs: Vec<f64> = x.into_iter().map(f64::abs).collect();
    gbo_norm_from_samples(&abs, theta, l, tolerance)
}
