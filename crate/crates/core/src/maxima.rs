//! Expectation and tail bounds for maxima of possibly dependent variables.

use serde::{Deserialize, Serialize};

use crate::bounds::clamp;
use crate::error::{ensure, Result};
use crate::matrix::DenseMatrix;
use crate::norms::{OrliczSpec, TailClassParams};
use crate::numeric::invert_increasing;

/// `n` coordinates sharing a tail class; no independence is assumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxModel {
    pub n: usize,
    pub class: TailClassParams,
}

impl MaxModel {
    /// Bound on `E max_i X_i` for the class, where one is available.
    pub fn expect(&self) -> Result<f64> {
        ensure(self.n >= 1, "n must be at least 1")?;
        self.class.validate()?;
        match self.class.clone().normalized() {
            TailClassParams::SubG { sigma2 } => Ok(subg_max_expect(sigma2.sqrt(), self.n)?.0),
            TailClassParams::SubGamma { v, c } => subgamma_max_expect(v, c, self.n),
            TailClassParams::SubW { theta, norm } => orlicz_max_expect(&[norm], &OrliczSpec::Psi(theta), self.n as f64),
            other => Err(crate::Error::Invalid(format!("no maximal bound for class {other:?}"))),
        }
    }
}

/// `E max|X_i| <= n^{1/r} (max_i E|X_i|^r)^{1/r}`.
pub fn crude_max_moment(n: usize, r: f64, moment_r_max: f64) -> Result<f64> {
    ensure(n >= 1, "n must be at least 1")?;
    ensure(r >= 1.0, "r must be at least 1")?;
    ensure(moment_r_max >= 0.0, "moment must be non-negative")?;
    Ok((n as f64 * moment_r_max).powf(1.0 / r))
}

/// `(σ√(2 log n), σ√(2 log 2n))` for `E max X_i` and `E max |X_i|`.
pub fn subg_max_expect(sigma: f64, n: usize) -> Result<(f64, f64)> {
    ensure(sigma > 0.0, "sigma must be positive")?;
    ensure(n >= 1, "n must be at least 1")?;
    let nf = n as f64;
    Ok((sigma * (2.0 * nf.ln()).sqrt(), sigma * (2.0 * (2.0 * nf).ln()).sqrt()))
}

pub(crate) fn subg_max_tail_raw(sigma: f64, n: usize, t: f64, absolute: bool) -> f64 {
    let k = if absolute { 2.0 } else { 1.0 };
    if t <= 0.0 {
        return k * n as f64;
    }
    k * n as f64 * (-t * t / (2.0 * sigma * sigma)).exp()
}

/// `(n e^{-t²/2σ²}, 2n e^{-t²/2σ²})` for `P(max X_i > t)` and `P(max |X_i| > t)`.
pub fn subg_max_tail(sigma: f64, n: usize, t: f64) -> Result<(f64, f64)> {
    ensure(sigma > 0.0, "sigma must be positive")?;
    ensure(n >= 1, "n must be at least 1")?;
    Ok((clamp(subg_max_tail_raw(sigma, n, t, false)), clamp(subg_max_tail_raw(sigma, n, t, true))))
}

/// `√(2v log 2n) + c log 2n`.
pub fn subgamma_max_expect(v: f64, c: f64, n: usize) -> Result<f64> {
    ensure(v > 0.0 && c >= 0.0, "v > 0 and c >= 0 required")?;
    ensure(n >= 1, "n must be at least 1")?;
    let l = (2.0 * n as f64).ln();
    Ok((2.0 * v * l).sqrt() + c * l)
}

/// `g⁻¹(n) max_i ‖X_i‖_g`; for ψ_θ this is `(log(1+n))^{1/θ} max_i ‖X_i‖ψθ`.
pub fn orlicz_max_expect(norms: &[f64], g: &OrliczSpec, n: f64) -> Result<f64> {
    ensure(n > 0.0, "n must be positive")?;
    ensure(!norms.is_empty() && norms.iter().all(|&k| k >= 0.0), "norms must be non-negative")?;
    let m = norms.iter().cloned().fold(0.0, f64::max);
    let inv = match g {
        OrliczSpec::Psi(theta) => {
            ensure(*theta > 0.0, "theta must be positive")?;
            n.ln_1p().powf(1.0 / theta)
        }
        OrliczSpec::General(_) => invert_increasing(|x| g.eval(x), n, 0.0, 1e-13)?,
    };
    Ok(inv * m)
}

/// `√(2 log 2p) max_j (Σ_i a_ij²)^{1/2}` for `|X_ij| <= a_ij`, `a` being `n × p`.
pub fn bounded_sum_max_expect(a: &DenseMatrix) -> Result<f64> {
    ensure(a.cols() >= 1, "need at least one column")?;
    ensure(a.data().iter().all(|&x| x >= 0.0), "envelope must be non-negative")?;
    let p = a.cols() as f64;
    let col = (0..a.cols())
        .map(|j| a.column(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok((2.0 * (2.0 * p).ln()).sqrt() * col)
}

/// `E max_j |mean_j|^m <= [κ log(2p)/n + (v²+1)√(log(2p)/n)]^m` for `1 <= m <= 1 + log p`.
pub fn bernstein_max_moment(v2: f64, kappa: f64, n: usize, p: usize, m: f64) -> Result<f64> {
    ensure(n >= 1, "n must be at least 1")?;
    ensure(p >= 2, "p must be at least 2")?;
    ensure(v2 >= 0.0 && kappa > 0.0, "v² >= 0 and kappa > 0 required")?;
    let pf = p as f64;
    ensure(m >= 1.0 && m <= 1.0 + pf.ln(), "m must lie in [1, 1 + log p]")?;
    let l = (2.0 * pf).ln();
    let nf = n as f64;
    Ok((kappa * l / nf + (v2 + 1.0) * (l / nf).sqrt()).powf(m))
}
