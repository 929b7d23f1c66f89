//! Quadratic forms of random vectors and extreme eigenvalues of sample
//! covariance matrices.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::matrix::DenseMatrix;
use crate::bounds::clamp;
use crate::numeric::bisect_increasing;

fn check_sigma(a: &DenseMatrix, sigma: &[f64]) -> Result<()> {
    ensure(a.is_square(), "square matrix required")?;
    ensure(sigma.len() == a.rows(), "sigma length must match the matrix")?;
    ensure(sigma.iter().all(|s| *s >= 0.0 && s.is_finite()), "sigma must be non-negative")
}

/// `(‖D A D‖_F, ‖D A D‖₂)` with `D = diag(σ)`.
pub fn chaos_norms(a: &DenseMatrix, sigma: &[f64]) -> Result<(f64, f64)> {
    check_sigma(a, sigma)?;
    let m = a.sandwich_diag(sigma);
    Ok((m.frobenius(), m.operator_norm()))
}

/// The `x` at which `2F√x + 2Ox` reaches `t`.
pub(crate) fn chaos_exponent(f: f64, o: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if o == 0.0 {
        return if f == 0.0 { f64::INFINITY } else { (t / (2.0 * f)).powi(2) };
    }
    let r = (-f + (f * f + 2.0 * o * t).sqrt()) / (2.0 * o);
    r * r
}

/// Gaussian chaos: `ξᵀAξ - E ξᵀAξ >= 2‖DAD‖_F √x + 2‖DAD‖₂ x` with
/// probability at most `e^{-x}`. Returns `(threshold, e^{-x})`.
pub fn gaussian_chaos(a: &DenseMatrix, sigma: &[f64], x: f64) -> Result<(f64, f64)> {
    ensure(x >= 0.0, "x must be non-negative")?;
    let (f, o) = chaos_norms(a, sigma)?;
    Ok((2.0 * f * x.sqrt() + 2.0 * o * x, (-x).exp()))
}

pub(crate) fn check_diag_free(a: &DenseMatrix) -> Result<()> {
    ensure(a.is_square(), "square matrix required")?;
    ensure((0..a.rows()).all(|i| a.get(i, i) == 0.0), "diagonal must be exactly zero")
}

pub(crate) fn hw_diagfree_raw(frob: f64, op: f64, k: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let k2 = k * k;
    let g = t * t / (64.0 * k2 * k2 * frob);
    let e = t / (8.0 * std::f64::consts::SQRT_2 * k2 * op);
    (-g.min(e)).exp()
}

/// Hanson-Wright for a zero-diagonal `A` and `max ‖ξ_i‖ψ₂ <= K`; right tail.
pub fn hw_diagfree(a: &DenseMatrix, k: f64, t: f64) -> Result<f64> {
    check_diag_free(a)?;
    ensure(k > 0.0, "K must be positive")?;
    Ok(clamp(hw_diagfree_raw(a.frobenius(), a.operator_norm(), k, t)))
}

/// `(‖A D‖_F, ‖A‖₂)`.
pub fn moment_norms(a: &DenseMatrix, sigma: &[f64]) -> Result<(f64, f64)> {
    check_sigma(a, sigma)?;
    Ok((a.right_diag(sigma).frobenius(), a.operator_norm()))
}

pub(crate) fn hw_moment_raw(frob_ad: f64, op: f64, kappa: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let k2 = kappa * kappa;
    (-(t * t / (192.0 * k2 * frob_ad * frob_ad)).min(t / (256.0 * k2 * op))).exp()
}

/// Quadratic forms under `E|ξ_i|^{2p} <= ½ p! σ_i² κ^{2p-2}`; right tail.
pub fn hw_moment(a: &DenseMatrix, sigma: &[f64], kappa: f64, t: f64) -> Result<f64> {
    ensure(kappa > 0.0, "kappa must be positive")?;
    let (f, o) = moment_norms(a, sigma)?;
    Ok(clamp(hw_moment_raw(f, o, kappa, t)))
}

/// `256κ²‖A‖₂ x + 8√3 κ ‖AD‖_F √x`, exceeded with probability at most `e^{-x}`.
pub fn hw_moment_radius(a: &DenseMatrix, sigma: &[f64], kappa: f64, x: f64) -> Result<f64> {
    ensure(kappa > 0.0 && x >= 0.0, "kappa > 0 and x >= 0 required")?;
    let (f, o) = moment_norms(a, sigma)?;
    Ok(256.0 * kappa * kappa * o * x + 8.0 * 3f64.sqrt() * kappa * f * x.sqrt())
}

pub(crate) fn hw_rv_raw(frob: f64, op: f64, k: f64, c: f64, t: f64) -> f64 {
    if t <= 0.0 || c == 0.0 {
        return 1.0;
    }
    let k2 = k * k;
    (-c * (t * t / (k2 * k2 * frob * frob)).min(t / (k2 * op))).exp()
}

/// Hanson-Wright with a caller-supplied constant `c`; not certified.
pub fn hw_rv(a: &DenseMatrix, k: f64, t: f64, c: f64) -> Result<f64> {
    ensure(a.is_square(), "square matrix required")?;
    ensure(k > 0.0 && c >= 0.0, "K > 0 and c >= 0 required")?;
    Ok(clamp(hw_rv_raw(a.frobenius(), a.operator_norm(), k, c, t)))
}

/// `[σ², tr Σ, tr Σ², ‖Σ‖₂, μᵀΣμ]` for `Σ = AᵀA`.
pub(crate) fn hsu_constants(a: &DenseMatrix, sigma: f64, mu: &[f64]) -> Result<Vec<f64>> {
    ensure(mu.len() == a.cols(), "mu length must equal the number of columns")?;
    let s = a.gram();
    let tr = s.trace();
    let tr2 = s.frobenius().powi(2);
    let op = a.operator_norm().powi(2);
    let am = a.matvec(mu);
    let mm: f64 = am.iter().map(|x| x * x).sum();
    Ok(vec![sigma * sigma, tr, tr2, op, mm])
}

pub(crate) fn hsu_threshold(h: &[f64], t: f64) -> f64 {
    let (s2, tr, tr2, op, mm) = (h[0], h[1], h[2], h[3], h[4]);
    let mean_part = if mm > 0.0 { mm * (1.0 + 2.0 * (op * op / tr2 * t).sqrt()) } else { 0.0 };
    s2 * (tr + 2.0 * (tr2 * t).sqrt() + 2.0 * op * t) + mean_part
}

/// The `x >= 0` whose threshold equals `level`.
pub(crate) fn hsu_exponent(h: &[f64], level: f64) -> Result<f64> {
    let base = hsu_threshold(h, 0.0);
    if level <= base {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while hsu_threshold(h, hi) < level {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoSolution("threshold unreachable".into()));
        }
    }
    bisect_increasing(|x| hsu_threshold(h, x) - level, 0.0, hi, 1e-14)
}

/// Sub-Gaussian vector quadratic form: `‖Aξ‖²` exceeds the returned
/// threshold with probability at most `e^{-t}`.
pub fn subg_vector_quadratic(a: &DenseMatrix, sigma: f64, mu: &[f64], t: f64) -> Result<(f64, f64)> {
    ensure(sigma > 0.0, "sigma must be positive")?;
    ensure(t >= 0.0, "t must be non-negative")?;
    let h = hsu_constants(a, sigma, mu)?;
    Ok((hsu_threshold(&h, t), (-t).exp()))
}

pub(crate) fn subweibull_eta(frob: f64, op: f64, row: f64, maxabs: f64, q: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let q = f64::from(q);
    (t * t / (frob * frob))
        .min(t / op)
        .min((t / row).powf(2.0 / (q + 1.0)))
        .min((t / maxabs).powf(1.0 / q))
}

/// Two-sided sub-Weibull quadratic bound `2 exp(-η(A, q, t/M²)/C)` with a
/// caller-supplied constant `C`; not certified.
pub fn subweibull_quadratic(a: &DenseMatrix, m: f64, q: u32, t: f64, c: f64) -> Result<f64> {
    ensure(a.is_symmetric(1e-12), "symmetric matrix required")?;
    ensure(m > 0.0 && c > 0.0 && q >= 1, "M > 0, C > 0, q >= 1 required")?;
    let eta = subweibull_eta(a.frobenius(), a.operator_norm(), a.row_l2_max(), a.max_abs(), q, t / (m * m));
    Ok(clamp(2.0 * (-eta / c).exp()))
}

/// `(λ_min, λ_max)` of `XᵀX / n`.
pub fn sample_cov_extreme(x: &DenseMatrix) -> Result<(f64, f64)> {
    ensure(x.rows() >= 1 && x.cols() >= 1, "empty matrix")?;
    let s = x.gram().scale(1.0 / x.rows() as f64);
    let hi = s.sym_max_eigen();
    let lo = if x.rows() < x.cols() { 0.0 } else { s.psd_min_eigen().unwrap_or(0.0) };
    Ok((lo.min(hi), hi))
}

/// Limits `σ²(1 ± √y)²` of the extreme sample-covariance eigenvalues.
pub fn baiyin_edges(sigma2: f64, y: f64) -> Result<(f64, f64)> {
    ensure(sigma2 > 0.0, "sigma2 must be positive")?;
    ensure((0.0..=1.0).contains(&y), "y must lie in [0, 1]")?;
    let r = y.sqrt();
    Ok((sigma2 * (1.0 - r).powi(2), sigma2 * (1.0 + r).powi(2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaiYin {
    pub delta: f64,
    pub t: f64,
    pub op_norm_bound: f64,
    pub prob: f64,
    pub eig_window: (f64, f64),
    pub iterations: usize,
}

/// Non-asymptotic Bai-Yin: the fixed point `t = cθ max(δ, δ²)`,
/// `δ = 2c(√(p/n) + t/√n)`, by damped iteration from `t = 0`.
pub fn baiyin_nonasymptotic(n: usize, p: usize, theta: f64, c: f64) -> Result<BaiYin> {
    ensure(n >= 1 && p >= 1, "n and p must be at least 1")?;
    ensure(theta >= 0.0, "theta must be non-negative")?;
    let (nf, pf) = (n as f64, p as f64);
    let c_min = 2.0 * nf * 9f64.ln() / pf;
    if c < c_min * (1.0 - 1e-12) {
        return Err(Error::Incompatible(format!("c must be at least 2n log 9 / p = {c_min}")));
    }
    let delta_of = |t: f64| 2.0 * c * ((pf / nf).sqrt() + t / nf.sqrt());
    let map = |t: f64| {
        let d = delta_of(t);
        c * theta * d.max(d * d)
    };
    let w = 0.5;
    let mut t = 0.0;
    let mut iterations = 0;
    loop {
        let next = (1.0 - w) * t + w * map(t);
        iterations += 1;
        if !next.is_finite() || next > 1e6 {
            return Err(Error::NoSolution("fixed-point iteration diverged".into()));
        }
        if (next - t).abs() <= 1e-15 * next.max(1.0) {
            t = next;
            break;
        }
        if iterations >= 100_000 {
            return Err(Error::NoSolution("fixed-point iteration did not converge".into()));
        }
        t = next;
    }
    let delta = delta_of(t);
    Ok(BaiYin {
        delta,
        t,
        op_norm_bound: 2.0 * c * theta * delta.max(delta * delta),
        prob: (1.0 - 2.0 * (-c * t * t).exp()).max(0.0),
        eig_window: (1.0 - t * t, 1.0 + t * t),
        iterations,
    })
}
