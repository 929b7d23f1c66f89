//! Least squares, the Lasso and the ℓ1-penalized Poisson regression, with the
//! event checks behind their oracle inequalities.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Design {
    #[default]
    IidGaussian,
    /// Rows are stationary AR(1) with correlation `rho^|i-j|` between columns.
    Toeplitz { rho: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressionFamily {
    Gaussian { sigma: f64 },
    Poisson { l: f64, b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionInstance {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    pub support: Vec<usize>,
    pub family: RegressionFamily,
    pub stream: RngStream,
}

impl RegressionInstance {
    pub fn n(&self) -> usize {
        self.x.rows()
    }
    pub fn p(&self) -> usize {
        self.x.cols()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub beta_hat: Vec<f64>,
    pub lambda: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

fn random_support<R: Rng>(rng: &mut R, p: usize, s: usize) -> Vec<usize> {
    let mut idx = sample_indices(rng, p, s).into_vec();
    idx.sort_unstable();
    idx
}

/// Gaussian linear model `y = Xβ* + ε` with `β*` alternating ±1 on a random support.
pub fn gen_linear(
    n: usize,
    p: usize,
    s: usize,
    sigma: f64,
    design: Design,
    column_normalize: bool,
    stream: RngStream,
) -> Result<RegressionInstance> {
    ensure(n >= 1 && p >= 1, "n, p must be at least 1")?;
    ensure(s <= p, "s must not exceed p")?;
    ensure(sigma >= 0.0, "sigma must be non-negative")?;
    let mut rng = stream.rng();
    let mut x = DenseMatrix::zeros(n, p);
    match design {
        Design::IidGaussian => {
            for i in 0..n {
                for v in x.row_mut(i) {
                    *v = rng.sample(StandardNormal);
                }
            }
        }
        Design::Toeplitz { rho } => {
            ensure(rho.abs() < 1.0, "rho must lie in (-1, 1)")?;
            let c = (1.0 - rho * rho).sqrt();
            for i in 0..n {
                let row = x.row_mut(i);
                row[0] = rng.sample(StandardNormal);
                for j in 1..p {
                    let z: f64 = rng.sample(StandardNormal);
                    row[j] = rho * row[j - 1] + c * z;
                }
            }
        }
    }
    if column_normalize {
        normalize_columns(&mut x);
    }
    let support = random_support(&mut rng, p, s);
    let mut beta_star = vec![0.0; p];
    for (k, &j) in support.iter().enumerate() {
        beta_star[j] = if k % 2 == 0 { 1.0 } else { -1.0 };
    }
    let mut y = x.matvec(&beta_star);
    for v in &mut y {
        let e: f64 = rng.sample(StandardNormal);
        *v += sigma * e;
    }
    Ok(RegressionInstance { x, y, beta_star, support, family: RegressionFamily::Gaussian { sigma }, stream })
}

/// Rescale columns so that `X_jᵀX_j / n = 1`; zero columns are left alone.
pub fn normalize_columns(x: &mut DenseMatrix) {
    let (n, p) = (x.rows(), x.cols());
    let mut ss = vec![0.0; p];
    for i in 0..n {
        for (a, v) in ss.iter_mut().zip(x.row(i)) {
            *a += v * v;
        }
    }
    let scale: Vec<f64> = ss.iter().map(|&a| if a > 0.0 { (n as f64 / a).sqrt() } else { 1.0 }).collect();
    for i in 0..n {
        for (v, c) in x.row_mut(i).iter_mut().zip(&scale) {
            *v *= c;
        }
    }
}

/// Poisson regression with covariates uniform on `[-L, L]` and `‖β*‖₁ = B`.
pub fn gen_poisson(n: usize, p: usize, s: usize, l: f64, b: f64, stream: RngStream) -> Result<RegressionInstance> {
    ensure(n >= 1 && p >= 1, "n, p must be at least 1")?;
    ensure(s <= p, "s must not exceed p")?;
    ensure(l > 0.0 && b >= 0.0, "L > 0 and B >= 0 required")?;
    ensure(s >= 1 || b == 0.0, "B > 0 needs s >= 1")?;
    let mut rng = stream.rng();
    let mut x = DenseMatrix::zeros(n, p);
    for i in 0..n {
        for v in x.row_mut(i) {
            *v = l * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
    let support = random_support(&mut rng, p, s);
    let mut beta_star = vec![0.0; p];
    for (k, &j) in support.iter().enumerate() {
        let m = b / s as f64;
        beta_star[j] = if k % 2 == 0 { m } else { -m };
    }
    let eta = x.matvec(&beta_star);
    let y = eta
        .iter()
        .map(|&e| Poisson::new(e.exp()).map(|d| d.sample(&mut rng)).map_err(|e| Error::Domain(e.to_string())))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RegressionInstance { x, y, beta_star, support, family: RegressionFamily::Poisson { l, b }, stream })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub beta: Vec<f64>,
    /// `σ² tr((XᵀX)⁻¹)`, the expected squared estimation error.
    pub mse_identity: f64,
    /// `pσ²/n`, the expected in-sample prediction risk.
    pub insample_risk: f64,
}

pub fn ols(x: &DenseMatrix, y: &[f64], sigma: f64) -> Result<OlsFit> {
    let (n, p) = (x.rows(), x.cols());
    ensure(y.len() == n, "y length must equal the number of rows")?;
    ensure(sigma >= 0.0, "sigma must be non-negative")?;
    if p > n {
        return Err(Error::RankDeficient);
    }
    let g = x.gram();
    let l = g.cholesky()?;
    let beta = crate::matrix::chol_solve(&l, &x.tmatvec(y));
    let inv = g.inverse_spd()?;
    Ok(OlsFit { beta, mse_identity: sigma * sigma * inv.trace(), insample_risk: p as f64 * sigma * sigma / n as f64 })
}

/// `(σ²(p + 2√(pt) + 2t)/n, e^{-t})`: threshold for `‖X(β̂-β*)‖²/n` and its exceedance probability.
pub fn ols_prediction_tail(n: usize, p: usize, sigma: f64, t: f64) -> Result<(f64, f64)> {
    ensure(n >= 1 && p >= 1, "n, p must be at least 1")?;
    ensure(sigma > 0.0, "sigma must be positive")?;
    ensure(t >= 0.0, "t must be non-negative")?;
    let pf = p as f64;
    Ok((sigma * sigma * (pf + 2.0 * (pf * t).sqrt() + 2.0 * t) / n as f64, (-t).exp()))
}

/// `Aσ√(log p / n)`.
pub fn lasso_lambda(a: f64, sigma: f64, n: usize, p: usize) -> Result<f64> {
    ensure(a > 0.0 && sigma > 0.0, "A and sigma must be positive")?;
    ensure(n >= 1 && p >= 2, "n >= 1 and p >= 2 required")?;
    Ok(a * sigma * ((p as f64).ln() / n as f64).sqrt())
}

#[inline]
pub fn soft(z: f64, k: f64) -> f64 {
    if z > k {
        z - k
    } else if z < -k {
        z + k
    } else {
        0.0
    }
}

fn columns(x: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..x.cols()).map(|j| x.column(j)).collect()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Largest violation of the stationarity system `g_j = λ sign(β_j)`, `|g_j| <= λ` at zeros.
fn kkt_violation(g: &[f64], beta: &[f64], lambda: f64) -> f64 {
    g.iter()
        .zip(beta)
        .map(|(&gj, &bj)| if bj != 0.0 { (gj - lambda * bj.signum()).abs() } else { (gj.abs() - lambda).max(0.0) })
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent on `‖y - Xβ‖²/n + λ‖β‖₁`.
pub fn lasso_cd(x: &DenseMatrix, y: &[f64], lambda: f64, tol: f64, max_iter: usize) -> Result<LassoFit> {
    let (n, p) = (x.rows(), x.cols());
    ensure(y.len() == n, "y length must equal the number of rows")?;
    ensure(lambda > 0.0, "lambda must be positive")?;
    ensure(tol > 0.0, "tol must be positive")?;
    let nf = n as f64;
    let cols = columns(x);
    let c: Vec<f64> = cols.iter().map(|col| dot(col, col) / nf).collect();
    let mut beta = vec![0.0; p];
    let mut r = y.to_vec();
    let objective = |r: &[f64], beta: &[f64]| dot(r, r) / nf + lambda * l1(beta);
    let mut trace = vec![objective(&r, &beta)];
    let half = lambda / 2.0;

    let update = |j: usize, beta: &mut [f64], r: &mut [f64]| -> f64 {
        if c[j] == 0.0 {
            return 0.0;
        }
        let col = &cols[j];
        let old = beta[j];
        let z = dot(col, r) / nf + c[j] * old;
        let new = soft(z, half) / c[j];
        let d = new - old;
        if d != 0.0 {
            for (ri, xi) in r.iter_mut().zip(col) {
                *ri -= xi * d;
            }
            beta[j] = new;
        }
        (d * d * c[j]).sqrt()
    };
    let residual = |r: &[f64], beta: &[f64]| -> f64 {
        let g: Vec<f64> = cols.iter().map(|col| 2.0 * dot(col, r) / nf).collect();
        kkt_violation(&g, beta, lambda)
    };

    let mut iterations = 0;
    let mut kkt = residual(&r, &beta);
    while kkt > tol && iterations < max_iter {
        for j in 0..p {
            update(j, &mut beta, &mut r);
        }
        iterations += 1;
        trace.push(objective(&r, &beta));
        // settle the active set before the next full sweep
        while iterations < max_iter {
            let mut moved = 0.0f64;
            for j in 0..p {
                if beta[j] != 0.0 {
                    moved = moved.max(update(j, &mut beta, &mut r));
                }
            }
            iterations += 1;
            trace.push(objective(&r, &beta));
            if moved <= tol * 1e-2 {
                break;
            }
        }
        kkt = residual(&r, &beta);
    }
    Ok(LassoFit { beta_hat: beta, lambda, kkt_residual: kkt, iterations, converged: kkt <= tol, objective_trace: trace })
}

/// `‖Xᵀ(y - Xβ*)/n‖∞ <= λ/2`.
pub fn kkt_event(x: &DenseMatrix, y: &[f64], beta_star: &[f64], lambda: f64) -> Result<bool> {
    ensure(y.len() == x.rows() && beta_star.len() == x.cols(), "dimension mismatch")?;
    let fit = x.matvec(beta_star);
    let r: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    let g = x.tmatvec(&r);
    let n = x.rows() as f64;
    Ok(g.iter().map(|v| (v / n).abs()).fold(0.0, f64::max) <= lambda / 2.0)
}

/// `‖u_{Sᶜ}‖₁ <= η ‖u_S‖₁`.
pub fn cone_check(u: &[f64], support: &[usize], eta: f64) -> Result<bool> {
    ensure(eta >= 0.0, "eta must be non-negative")?;
    ensure(support.iter().all(|&j| j < u.len()), "support index out of range")?;
    let on: f64 = support.iter().map(|&j| u[j].abs()).sum();
    let total = l1(u);
    let off = (total - on).max(0.0);
    Ok(off <= eta * on + 1e-12 * total)
}

/// Projection onto `{b : ‖b_{Sᶜ}‖₁ <= η aᵀ b_S}` with `a = sign(b_S)`.
fn project_cone(b: &mut [f64], in_s: &[bool], eta: f64) {
    let signs: Vec<f64> = b.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let s_count = in_s.iter().filter(|&&f| f).count() as f64;
    let off_l1 = |mu: f64| b.iter().zip(in_s).filter(|(_, &f)| !f).map(|(v, _)| soft(*v, mu).abs()).sum::<f64>();
    let on = b.iter().zip(in_s).filter(|(_, &f)| f).map(|(v, _)| v.abs()).sum::<f64>();
    let gap = |mu: f64| off_l1(mu) - eta * (on + mu * eta * s_count);
    if gap(0.0) <= 0.0 {
        return;
    }
    let mut hi = 1.0;
    while gap(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let mu = hi;
    for (j, v) in b.iter_mut().enumerate() {
        if in_s[j] {
            *v += mu * eta * signs[j];
        } else {
            *v = soft(*v, mu);
        }
    }
}

/// Smallest value of `(bᵀGb)^{1/2}/‖b‖₂` found over the cone `C(η, S)`.
///
/// Projected gradient from `restarts` random starts. The result is an upper
/// estimate of the restricted eigenvalue.
pub fn re_estimate(gram: &DenseMatrix, support: &[usize], eta: f64, restarts: usize, tol: f64, seed: u64) -> Result<f64> {
    ensure(gram.is_square(), "gram must be square")?;
    ensure(!support.is_empty(), "support must be non-empty")?;
    ensure(eta >= 0.0 && tol > 0.0, "eta >= 0 and tol > 0 required")?;
    let p = gram.rows();
    ensure(support.iter().all(|&j| j < p), "support index out of range")?;
    let mut in_s = vec![false; p];
    for &j in support {
        in_s[j] = true;
    }
    let step = 1.0 / gram.operator_norm().max(1e-300);
    let mut best = f64::INFINITY;
    for k in 0..restarts.max(1) {
        let mut rng = RngStream::new(seed, k as u64).rng();
        let mut b: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        project_cone(&mut b, &in_s, eta);
        normalize(&mut b);
        let mut q = gram.quadratic_form(&b);
        for _ in 0..100_000 {
            let g = gram.matvec(&b);
            let mut next: Vec<f64> = b.iter().zip(&g).map(|(bi, gi)| bi - step * gi).collect();
            project_cone(&mut next, &in_s, eta);
            if !normalize(&mut next) {
                break;
            }
            let qn = gram.quadratic_form(&next);
            let done = (q - qn).abs() <= tol * tol;
            b = next;
            q = qn;
            if done {
                break;
            }
        }
        best = best.min(q.max(0.0));
    }
    Ok(best.sqrt())
}

fn normalize(b: &mut [f64]) -> bool {
    let nb = dot(b, b).sqrt();
    if nb == 0.0 || !nb.is_finite() {
        return false;
    }
    b.iter_mut().for_each(|v| *v /= nb);
    true
}

/// Right-hand sides of the Lasso oracle inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoBounds {
    pub l1: f64,
    pub l2sq: f64,
    pub pred: f64,
    /// The same three quantities as they come out of the argument: `3λs/γ`,
    /// `9A²σ² s log p/(nγ²)` and `9A²σ² s log p/(nγ)`.
    pub proof_l1: f64,
    pub proof_l2sq: f64,
    pub proof_pred: f64,
}

pub fn lasso_oracle_bounds(a: f64, sigma: f64, s: usize, n: usize, p: usize, gamma: f64) -> Result<LassoBounds> {
    ensure(gamma > 0.0, "gamma must be positive")?;
    let lambda = lasso_lambda(a, sigma, n, p)?;
    let (sf, nf, lp) = (s as f64, n as f64, (p as f64).ln());
    let g2 = gamma * gamma;
    Ok(LassoBounds {
        l1: 3.0 * a * sigma / g2 * sf * (lp / nf).sqrt(),
        l2sq: 9.0 * a * sigma * sigma / g2 * sf * lp / nf,
        pred: 9.0 * a * sigma / gamma * sf * lp / nf,
        proof_l1: 3.0 * lambda * sf / gamma,
        proof_l2sq: 9.0 * a * a * sigma * sigma / g2 * sf * lp / nf,
        proof_pred: 9.0 * a * a * sigma * sigma / gamma * sf * lp / nf,
    })
}

/// `max{16A²L log(2p)/(3n), 8AL e^{LB/2} √(log(2p)/n), 20AL e^{LB} √(2 log(2p)/n)}`.
pub fn poisson_lambda(a: f64, l: f64, b: f64, n: usize, p: usize) -> Result<f64> {
    ensure(a > 0.0 && l > 0.0 && b >= 0.0, "A > 0, L > 0, B >= 0 required")?;
    ensure(n >= 1 && p >= 1, "n, p must be at least 1")?;
    let lp = (2.0 * p as f64).ln();
    let nf = n as f64;
    let t1 = 16.0 * a * a * l * lp / (3.0 * nf);
    let t2 = 8.0 * a * l * (l * b / 2.0).exp() * (lp / nf).sqrt();
    let t3 = 20.0 * a * l * (l * b).exp() * (2.0 * lp / nf).sqrt();
    Ok(t1.max(t2).max(t3))
}

fn poisson_loss(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> f64 {
    let eta = x.matvec(beta);
    eta.iter().zip(y).map(|(&e, &yi)| e.exp() - yi * e).sum::<f64>() / x.rows() as f64
}

fn poisson_score(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> Vec<f64> {
    let eta = x.matvec(beta);
    let r: Vec<f64> = eta.iter().zip(y).map(|(&e, &yi)| yi - e.exp()).collect();
    let n = x.rows() as f64;
    x.tmatvec(&r).into_iter().map(|v| v / n).collect()
}

const ARMIJO: f64 = 1e-4;

/// Proximal gradient on `-(1/n) Σ [y_i x_iᵀβ - e^{x_iᵀβ}] + λ‖β‖₁` with backtracking.
pub fn poisson_lasso_pg(x: &DenseMatrix, y: &[f64], lambda: f64, tol: f64, max_iter: usize) -> Result<LassoFit> {
    let (n, p) = (x.rows(), x.cols());
    ensure(y.len() == n, "y length must equal the number of rows")?;
    ensure(y.iter().all(|&v| v >= 0.0), "responses must be non-negative counts")?;
    ensure(lambda > 0.0, "lambda must be positive")?;
    ensure(tol > 0.0, "tol must be positive")?;
    let nf = n as f64;
    let mut beta = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut f = poisson_loss(x, y, &beta);
    let mut trace = vec![f];
    let score_at = |eta: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = eta.iter().zip(y).map(|(&e, &yi)| yi - e.exp()).collect();
        x.tmatvec(&r).into_iter().map(|v| v / nf).collect()
    };
    let mut score = score_at(&eta);
    let mut kkt = kkt_violation(&score, &beta, lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    while kkt > tol && iterations < max_iter {
        let mut accepted = false;
        while step > 1e-20 {
            // the score is minus the gradient of the loss
            let cand: Vec<f64> = beta.iter().zip(&score).map(|(b, g)| soft(b + step * g, step * lambda)).collect();
            let d: Vec<f64> = cand.iter().zip(&beta).map(|(a, b)| a - b).collect();
            let delta = x.matvec(&d);
            // objective change summed term by term, so it stays accurate near the optimum
            let change = eta
                .iter()
                .zip(&delta)
                .zip(y)
                .map(|((&e, &de), &yi)| e.exp() * de.exp_m1() - yi * de)
                .sum::<f64>()
                / nf
                + lambda * cand.iter().zip(&beta).map(|(a, b)| a.abs() - b.abs()).sum::<f64>();
            let moved = dot(&d, &d);
            if change.is_finite() && change <= -ARMIJO / step * moved {
                beta = cand;
                eta = x.matvec(&beta);
                f += change;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        trace.push(f);
        score = score_at(&eta);
        kkt = kkt_violation(&score, &beta, lambda);
        step *= 2.0;
    }
    Ok(LassoFit { beta_hat: beta, lambda, kkt_residual: kkt, iterations, converged: kkt <= tol, objective_trace: trace })
}

/// `(4e^{5LB} sλ/k, 12e^{10LB} sλ²/k)`.
pub fn poisson_oracle_bounds(l: f64, b: f64, s: usize, lambda: f64, k: f64) -> Result<(f64, f64)> {
    ensure(l > 0.0 && b >= 0.0 && lambda >= 0.0, "L > 0, B >= 0, lambda >= 0 required")?;
    ensure(k > 0.0 && k < 1.0, "k must lie in (0, 1)")?;
    let sf = s as f64;
    let lb = l * b;
    Ok((4.0 * (5.0 * lb).exp() * sf * lambda / k, 12.0 * (10.0 * lb).exp() * sf * lambda * lambda / k))
}

/// The event `‖(1/n) Xᵀ(y - e^{Xβ*})‖∞ <= λ/4` on which the Poisson fit stays within `4B`.
pub fn poisson_kkt_event(x: &DenseMatrix, y: &[f64], beta_star: &[f64], lambda: f64) -> Result<bool> {
    ensure(y.len() == x.rows() && beta_star.len() == x.cols(), "dimension mismatch")?;
    let g = poisson_score(x, y, beta_star);
    Ok(g.iter().map(|v| v.abs()).fold(0.0, f64::max) <= lambda / 4.0)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(f))
}

fn quantiles(v: &[f64]) -> Quantiles {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let at = |q: f64| {
        if s.is_empty() {
            return f64::NAN;
        }
        s[((q * (s.len() - 1) as f64).round() as usize).min(s.len() - 1)]
    };
    Quantiles { q50: at(0.5), q90: at(0.9), q99: at(0.99), max: at(1.0) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

/// A frequency with its Monte-Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub hits: usize,
    pub total: usize,
    pub freq: f64,
    pub se: f64,
}

impl Frequency {
    pub fn new(hits: usize, total: usize) -> Self {
        let freq = if total == 0 { f64::NAN } else { hits as f64 / total as f64 };
        let se = if total == 0 { f64::NAN } else { (freq * (1.0 - freq) / total as f64).sqrt() };
        Self { hits, total, freq, se }
    }
}

fn count(it: impl Iterator<Item = bool>) -> usize {
    it.filter(|&b| b).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OlsSimConfig {
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub reps: usize,
    #[serde(default = "crate::mc::default_seed")]
    pub seed: u64,
    /// Exponent of the prediction tail.
    #[serde(default = "default_ols_t")]
    pub t: f64,
}

fn default_ols_t() -> f64 {
    3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsSimReport {
    pub config: OlsSimConfig,
    pub expected_risk: f64,
    pub mean_risk: f64,
    pub risk_se: f64,
    pub tail_threshold: f64,
    pub tail_bound: f64,
    pub tail: Frequency,
    pub risks: Vec<f64>,
}

/// In-sample risk `‖X(β̂-β*)‖²/n` over fresh gaussian designs.
pub fn simulate_ols(cfg: &OlsSimConfig, threads: usize) -> Result<OlsSimReport> {
    ensure(cfg.reps >= 2, "need at least two replications")?;
    ensure(cfg.p <= cfg.n, "OLS needs p <= n")?;
    let (thr, bound) = ols_prediction_tail(cfg.n, cfg.p, cfg.sigma, cfg.t)?;
    let one = |r: usize| -> Result<f64> {
        let inst = gen_linear(cfg.n, cfg.p, cfg.p.min(2), cfg.sigma, Design::IidGaussian, false, RngStream::new(cfg.seed, r as u64))?;
        let fit = ols(&inst.x, &inst.y, cfg.sigma)?;
        let u: Vec<f64> = fit.beta.iter().zip(&inst.beta_star).map(|(a, b)| a - b).collect();
        let xu = inst.x.matvec(&u);
        Ok(dot(&xu, &xu) / cfg.n as f64)
    };
    let risks = with_pool(threads, || (0..cfg.reps).into_par_iter().map(one).collect::<Result<Vec<f64>>>())??;
    let m = risks.len() as f64;
    let mean = risks.iter().sum::<f64>() / m;
    let var = risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(OlsSimReport {
        config: *cfg,
        expected_risk: cfg.p as f64 * cfg.sigma * cfg.sigma / cfg.n as f64,
        mean_risk: mean,
        risk_se: (var / m).sqrt(),
        tail_threshold: thr,
        tail_bound: bound,
        tail: Frequency::new(count(risks.iter().map(|&r| r > thr)), risks.len()),
        risks,
    })
}

fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    100_000
}
fn default_gamma() -> f64 {
    1.0
}
fn default_k() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoSimConfig {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub sigma: f64,
    pub a: f64,
    pub reps: usize,
    #[serde(default = "crate::mc::default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub design: Design,
    #[serde(default = "default_true")]
    pub column_normalize: bool,
    /// Restricted eigenvalue used in the bounds; 1 for an isotropic population design.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoRep {
    pub kkt_event: bool,
    pub cone: bool,
    pub l1: f64,
    pub l2sq: f64,
    pub pred: f64,
    pub converged: bool,
    pub kkt_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoSimReport {
    pub config: LassoSimConfig,
    pub lambda: f64,
    pub bounds: LassoBounds,
    /// `1 - 2p^{1-A²/8}`.
    pub kkt_probability: f64,
    pub kkt: Frequency,
    /// Replications with the KKT event but `u ∉ C(3, S)`.
    pub cone_violations_on_kkt: usize,
    pub l1_within: Frequency,
    pub l1_within_proof: Frequency,
    pub l2sq_within: Frequency,
    pub pred_within: Frequency,
    pub unconverged: usize,
    pub l1_quantiles: Quantiles,
    pub l2sq_quantiles: Quantiles,
    pub pred_quantiles: Quantiles,
    pub reps: Vec<LassoRep>,
}

pub fn lasso_replication(cfg: &LassoSimConfig, lambda: f64, r: usize) -> Result<LassoRep> {
    let inst = gen_linear(cfg.n, cfg.p, cfg.s, cfg.sigma, cfg.design, cfg.column_normalize, RngStream::new(cfg.seed, r as u64))?;
    let fit = lasso_cd(&inst.x, &inst.y, lambda, cfg.tol, cfg.max_iter)?;
    let u: Vec<f64> = fit.beta_hat.iter().zip(&inst.beta_star).map(|(a, b)| a - b).collect();
    let xu = inst.x.matvec(&u);
    Ok(LassoRep {
        kkt_event: kkt_event(&inst.x, &inst.y, &inst.beta_star, lambda)?,
        cone: cone_check(&u, &inst.support, 3.0)?,
        l1: l1(&u),
        l2sq: dot(&u, &u),
        pred: dot(&xu, &xu) / cfg.n as f64,
        converged: fit.converged,
        kkt_residual: fit.kkt_residual,
    })
}

pub fn simulate_lasso(cfg: &LassoSimConfig, threads: usize) -> Result<LassoSimReport> {
    ensure(cfg.reps >= 1, "need at least one replication")?;
    let lambda = lasso_lambda(cfg.a, cfg.sigma, cfg.n, cfg.p)?;
    let bounds = lasso_oracle_bounds(cfg.a, cfg.sigma, cfg.s, cfg.n, cfg.p, cfg.gamma)?;
    let reps = with_pool(threads, || {
        (0..cfg.reps).into_par_iter().map(|r| lasso_replication(cfg, lambda, r)).collect::<Result<Vec<_>>>()
    })??;
    let m = reps.len();
    let pf = cfg.p as f64;
    let col = |f: fn(&LassoRep) -> f64| reps.iter().map(f).collect::<Vec<f64>>();
    Ok(LassoSimReport {
        config: *cfg,
        lambda,
        bounds,
        kkt_probability: 1.0 - 2.0 * pf.powf(1.0 - cfg.a * cfg.a / 8.0),
        kkt: Frequency::new(count(reps.iter().map(|r| r.kkt_event)), m),
        cone_violations_on_kkt: count(reps.iter().map(|r| r.kkt_event && !r.cone)),
        l1_within: Frequency::new(count(reps.iter().map(|r| r.l1 <= bounds.l1)), m),
        l1_within_proof: Frequency::new(count(reps.iter().map(|r| r.l1 <= bounds.proof_l1)), m),
        l2sq_within: Frequency::new(count(reps.iter().map(|r| r.l2sq <= bounds.l2sq)), m),
        pred_within: Frequency::new(count(reps.iter().map(|r| r.pred <= bounds.pred)), m),
        unconverged: count(reps.iter().map(|r| !r.converged)),
        l1_quantiles: quantiles(&col(|r| r.l1)),
        l2sq_quantiles: quantiles(&col(|r| r.l2sq)),
        pred_quantiles: quantiles(&col(|r| r.pred)),
        reps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSimConfig {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub l: f64,
    pub b: f64,
    pub a: f64,
    pub reps: usize,
    #[serde(default = "crate::mc::default_seed")]
    pub seed: u64,
    /// Stabil constant; 1/3 for the uniform population design.
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonRep {
    pub kkt_event: bool,
    pub l1: f64,
    pub converged: bool,
    pub kkt_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSimReport {
    pub config: PoissonSimConfig,
    pub lambda: f64,
    pub l1_bound: f64,
    pub pred_bound: f64,
    /// `1 - (2p)^{1-A²} - (2p)^{-A²/2}`.
    pub probability: f64,
    pub l1_within: Frequency,
    pub kkt: Frequency,
    /// Replications with the KKT event but `‖β̂-β*‖₁ > 4B`.
    pub radius_violations_on_kkt: usize,
    pub unconverged: usize,
    pub l1_quantiles: Quantiles,
    pub reps: Vec<PoissonRep>,
}

pub fn poisson_replication(cfg: &PoissonSimConfig, lambda: f64, r: usize) -> Result<PoissonRep> {
    let inst = gen_poisson(cfg.n, cfg.p, cfg.s, cfg.l, cfg.b, RngStream::new(cfg.seed, r as u64))?;
    let fit = poisson_lasso_pg(&inst.x, &inst.y, lambda, cfg.tol, cfg.max_iter)?;
    let u: Vec<f64> = fit.beta_hat.iter().zip(&inst.beta_star).map(|(a, b)| a - b).collect();
    Ok(PoissonRep {
        kkt_event: poisson_kkt_event(&inst.x, &inst.y, &inst.beta_star, lambda)?,
        l1: l1(&u),
        converged: fit.converged,
        kkt_residual: fit.kkt_residual,
    })
}

pub fn simulate_poisson(cfg: &PoissonSimConfig, threads: usize) -> Result<PoissonSimReport> {
    ensure(cfg.reps >= 1, "need at least one replication")?;
    let lambda = poisson_lambda(cfg.a, cfg.l, cfg.b, cfg.n, cfg.p)?;
    let (l1_bound, pred_bound) = poisson_oracle_bounds(cfg.l, cfg.b, cfg.s, lambda, cfg.k)?;
    let reps = with_pool(threads, || {
        (0..cfg.reps).into_par_iter().map(|r| poisson_replication(cfg, lambda, r)).collect::<Result<Vec<_>>>()
    })??;
    let m = reps.len();
    let q = 2.0 * cfg.p as f64;
    let a2 = cfg.a * cfg.a;
    Ok(PoissonSimReport {
        config: *cfg,
        lambda,
        l1_bound,
        pred_bound,
        probability: 1.0 - q.powf(1.0 - a2) - q.powf(-a2 / 2.0),
        l1_within: Frequency::new(count(reps.iter().map(|r| r.l1 <= l1_bound)), m),
        kkt: Frequency::new(count(reps.iter().map(|r| r.kkt_event)), m),
        radius_violations_on_kkt: count(reps.iter().map(|r| r.kkt_event && r.l1 > 4.0 * cfg.b)),
        unconverged: count(reps.iter().map(|r| !r.converged)),
        l1_quantiles: quantiles(&reps.iter().map(|r| r.l1).collect::<Vec<_>>()),
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    /// `√n Q` with `Q` having orthonormal columns, by modified Gram-Schmidt.
    fn orthonormal_design(n: usize, p: usize, seed: u64) -> DenseMatrix {
        let g = DenseMatrix::gaussian(n, p, RngStream::new(seed, 0));
        let mut cols: Vec<Vec<f64>> = (0..p).map(|j| g.column(j)).collect();
        for j in 0..p {
            for k in 0..j {
                let d = dot(&cols[j], &cols[k]);
                let ck = cols[k].clone();
                cols[j].iter_mut().zip(&ck).for_each(|(a, b)| *a -= d * b);
            }
            let nj = dot(&cols[j], &cols[j]).sqrt();
            cols[j].iter_mut().for_each(|a| *a /= nj);
        }
        let mut x = DenseMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                x.set(i, j, cols[j][i] * (n as f64).sqrt());
            }
        }
        x
    }

    #[test]
    fn gen_linear_shapes() {
        let inst = gen_linear(50, 8, 0, 1.0, Design::IidGaussian, true, RngStream::new(1, 0)).unwrap();
        assert!(inst.beta_star.iter().all(|&b| b == 0.0));
        assert!(inst.support.is_empty());
        for j in 0..8 {
            let c = inst.x.column(j);
            assert!(close(dot(&c, &c).sqrt(), 50f64.sqrt(), 1e-12));
        }
        let inst = gen_linear(30, 10, 4, 0.0, Design::IidGaussian, false, RngStream::new(2, 0)).unwrap();
        let nz: Vec<f64> = inst.support.iter().map(|&j| inst.beta_star[j]).collect();
        assert_eq!(nz, vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(inst.beta_star.iter().filter(|&&b| b != 0.0).count(), 4);
        assert_eq!(inst.y, inst.x.matvec(&inst.beta_star));
    }

    #[test]
    fn toeplitz_covariance() {
        // sample covariance of the AR(1) rows against rho^|i-j|
        let (n, p) = (20_000, 4);
        for rho in [0.0, 0.6] {
            let inst = gen_linear(n, p, 0, 1.0, Design::Toeplitz { rho }, false, RngStream::new(3, 0)).unwrap();
            let g = inst.x.gram().scale(1.0 / n as f64);
            for i in 0..p {
                for j in 0..p {
                    let want = rho.powi((i as i32 - j as i32).abs());
                    assert!((g.get(i, j) - want).abs() < 0.05, "{i} {j} {} {want}", g.get(i, j));
                }
            }
        }
    }

    #[test]
    fn gen_poisson_law() {
        let inst = gen_poisson(200, 5, 0, 1.0, 0.0, RngStream::new(4, 0)).unwrap();
        assert!(inst.x.max_abs() <= 1.0);
        assert!(inst.beta_star.iter().all(|&b| b == 0.0));
        let inst = gen_poisson(4000, 6, 3, 0.5, 1.5, RngStream::new(5, 0)).unwrap();
        assert!(inst.x.max_abs() <= 0.5);
        assert!(close(l1(&inst.beta_star), 1.5, 1e-14));
        let rates: Vec<f64> = inst.x.matvec(&inst.beta_star).iter().map(|e| e.exp()).collect();
        let n = inst.y.len() as f64;
        let my = inst.y.iter().sum::<f64>() / n;
        let mr = rates.iter().sum::<f64>() / n;
        let var = rates.iter().sum::<f64>() / n + rates.iter().map(|r| (r - mr).powi(2)).sum::<f64>() / n;
        assert!((my - mr).abs() <= 4.0 * (var / n).sqrt());
    }

    #[test]
    fn ols_identities() {
        let x = orthonormal_design(40, 5, 6);
        let y: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let fit = ols(&x, &y, 2.0).unwrap();
        assert!(close(fit.mse_identity, 5.0 * 4.0 / 40.0, 1e-12));
        assert!(close(fit.insample_risk, 5.0 * 4.0 / 40.0, 1e-15));
        // p = 1: β̂ = Σxy/Σx²
        let x1 = DenseMatrix::from_vec(4, 1, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let y1 = [2.0, 3.0, -1.0, 0.0];
        let f1 = ols(&x1, &y1, 1.0).unwrap();
        let sxx = 1.0 + 4.0 + 1.0 + 0.25;
        assert!(close(f1.beta[0], (2.0 + 6.0 + 1.0) / sxx, 1e-14));
        assert!(close(f1.mse_identity, 1.0 / sxx, 1e-14));
        let wide = DenseMatrix::zeros(2, 3);
        assert_eq!(ols(&wide, &[0.0, 0.0], 1.0).unwrap_err(), Error::RankDeficient);
        let mut dup = DenseMatrix::zeros(4, 2);
        for i in 0..4 {
            dup.set(i, 0, i as f64);
            dup.set(i, 1, i as f64);
        }
        assert!(ols(&dup, &[0.0; 4], 1.0).is_err());
    }

    #[test]
    fn ols_mse_monte_carlo() {
        let (n, p, sigma) = (30, 3, 1.0);
        let x = DenseMatrix::gaussian(n, p, RngStream::new(7, 0));
        let want = ols(&x, &vec![0.0; n], sigma).unwrap().mse_identity;
        let reps = 1000;
        let errs: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = RngStream::new(8, r).rng();
                let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let b = ols(&x, &y, sigma).unwrap().beta;
                dot(&b, &b)
            })
            .collect();
        let m = errs.iter().sum::<f64>() / reps as f64;
        let v = errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((m - want).abs() <= 3.0 * (v / reps as f64).sqrt(), "{m} {want}");
    }

    #[test]
    fn ols_tail_values() {
        let (thr, pr) = ols_prediction_tail(100, 10, 2.0, 0.0).unwrap();
        assert!(close(thr, 4.0 * 10.0 / 100.0, 1e-15));
        assert_eq!(pr, 1.0);
        let mut prev = thr;
        for t in [0.5, 1.0, 2.0, 3.0] {
            let (thr, pr) = ols_prediction_tail(100, 10, 2.0, t).unwrap();
            assert!(thr > prev);
            assert!(close(pr, (-t as f64).exp(), 1e-15));
            prev = thr;
        }
        let b = crate::TailBound::new(crate::BoundFamily::OlsPredictionTail { n: 100, p: 10, sigma: 2.0 }).unwrap();
        let (thr, pr) = ols_prediction_tail(100, 10, 2.0, 3.0).unwrap();
        assert!(close(b.evaluate(thr).unwrap(), pr, 1e-9));
    }

    #[test]
    fn lasso_lambda_value() {
        assert!(close(lasso_lambda(8.0, 1.0, 400, 1000).unwrap(), 8.0 * (1000f64.ln() / 400.0).sqrt(), 1e-15));
        assert!(lasso_lambda(1.0, 1.0, 10, 1).is_err());
    }

    #[test]
    fn lasso_zero_response() {
        let x = DenseMatrix::gaussian(20, 30, RngStream::new(9, 0));
        let fit = lasso_cd(&x, &vec![0.0; 20], 0.1, 1e-8, 1000).unwrap();
        assert!(fit.beta_hat.iter().all(|&b| b == 0.0));
        assert!(fit.converged);
    }

    #[test]
    fn lasso_orthogonal_closed_form() {
        let (n, p) = (60, 8);
        let x = orthonormal_design(n, p, 10);
        let mut rng = RngStream::new(11, 0).rng();
        let beta: Vec<f64> = (0..p).map(|j| if j < 3 { 1.5 } else { 0.0 }).collect();
        let y: Vec<f64> = x.matvec(&beta).iter().map(|v| v + rng.sample::<f64, _>(StandardNormal)).collect();
        let lambda = 0.6;
        let fit = lasso_cd(&x, &y, lambda, 1e-10, 10_000).unwrap();
        assert!(fit.converged && fit.kkt_residual <= 1e-10);
        for j in 0..p {
            let z = dot(&x.column(j), &y) / n as f64;
            let want = soft(z, lambda / 2.0);
            assert!((fit.beta_hat[j] - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn lasso_kkt_and_monotone_trace() {
        let inst = gen_linear(50, 120, 4, 0.5, Design::Toeplitz { rho: 0.5 }, true, RngStream::new(12, 0)).unwrap();
        let lambda = lasso_lambda(2.0, 0.5, 50, 120).unwrap();
        let fit = lasso_cd(&inst.x, &inst.y, lambda, 1e-8, 100_000).unwrap();
        assert!(fit.converged);
        // independent check of the stationarity system
        let r: Vec<f64> = inst.y.iter().zip(inst.x.matvec(&fit.beta_hat)).map(|(a, b)| a - b).collect();
        for j in 0..120 {
            let g = 2.0 * dot(&inst.x.column(j), &r) / 50.0;
            if fit.beta_hat[j] != 0.0 {
                assert!((g - lambda * fit.beta_hat[j].signum()).abs() <= 1e-8);
            } else {
                assert!(g.abs() <= lambda + 1e-8);
            }
        }
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
        let capped = lasso_cd(&inst.x, &inst.y, lambda * 0.01, 1e-14, 2).unwrap();
        assert!(!capped.converged);
    }

    #[test]
    fn kkt_event_cases() {
        let inst = gen_linear(40, 10, 3, 0.0, Design::IidGaussian, true, RngStream::new(13, 0)).unwrap();
        assert!(kkt_event(&inst.x, &inst.y, &inst.beta_star, 1e-9).unwrap());
        let noisy = gen_linear(40, 10, 3, 1.0, Design::IidGaussian, true, RngStream::new(13, 0)).unwrap();
        assert!(!kkt_event(&noisy.x, &noisy.y, &noisy.beta_star, 0.0).unwrap());
    }

    #[test]
    fn kkt_event_frequency() {
        let (n, p, a) = (100, 50, 4.0);
        let lambda = lasso_lambda(a, 1.0, n, p).unwrap();
        let reps = 1000;
        let hits = (0..reps)
            .filter(|&r| {
                let inst = gen_linear(n, p, 2, 1.0, Design::IidGaussian, true, RngStream::new(14, r)).unwrap();
                kkt_event(&inst.x, &inst.y, &inst.beta_star, lambda).unwrap()
            })
            .count();
        let want = 1.0 - 2.0 * (p as f64).powf(1.0 - a * a / 8.0);
        assert!(hits as f64 / reps as f64 >= want);
    }

    #[test]
    fn cone_cases() {
        let s = [0, 2];
        assert!(cone_check(&[1.0, 0.0, -2.0, 0.0], &s, 0.0).unwrap());
        assert!(!cone_check(&[0.0, 1.0, 0.0, 0.0], &s, 3.0).unwrap());
        assert!(cone_check(&[1.0, 3.0, 0.0, 0.0], &s, 3.0).unwrap());
        assert!(!cone_check(&[1.0, 3.1, 0.0, 0.0], &s, 3.0).unwrap());
    }

    #[test]
    fn cone_after_fit_on_kkt_event() {
        let (n, p, s) = (80, 200, 3);
        let lambda = lasso_lambda(4.0, 1.0, n, p).unwrap();
        for r in 0..30 {
            let inst = gen_linear(n, p, s, 1.0, Design::IidGaussian, true, RngStream::new(15, r)).unwrap();
            if kkt_event(&inst.x, &inst.y, &inst.beta_star, lambda).unwrap() {
                let fit = lasso_cd(&inst.x, &inst.y, lambda, 1e-9, 100_000).unwrap();
                let u: Vec<f64> = fit.beta_hat.iter().zip(&inst.beta_star).map(|(a, b)| a - b).collect();
                assert!(cone_check(&u, &inst.support, 3.0).unwrap());
            }
        }
    }

    #[test]
    fn re_identity_and_degenerate() {
        let id = DenseMatrix::identity(7);
        assert!(close(re_estimate(&id, &[1, 4], 3.0, 5, 1e-10, 1).unwrap(), 1.0, 1e-12));
        let mut d = vec![1.0; 6];
        d[5] = 0.0;
        let v = re_estimate(&DenseMatrix::diag(&d), &[0, 1], 3.0, 5, 1e-10, 2).unwrap();
        assert!(v <= 1.0 + 1e-12 && v >= 0.0);
    }

    /// Exact cone minimum for small `p`: on every orthant the cone is polyhedral and
    /// the minimum of the Rayleigh quotient sits at an eigenvector of the gram
    /// restricted to some face.
    fn re_brute_force(gram: &DenseMatrix, s: &[usize], eta: f64) -> f64 {
        use nalgebra::{DMatrix, SymmetricEigen};
        let p = gram.rows();
        let g = DMatrix::from_fn(p, p, |i, j| gram.get(i, j));
        let mut best = f64::INFINITY;
        for signs in 0..(1u32 << p) {
            let sg: Vec<f64> = (0..p).map(|j| if signs >> j & 1 == 1 { -1.0 } else { 1.0 }).collect();
            // constraints c·b >= 0: the p sign constraints and the cone row
            let mut rows: Vec<Vec<f64>> = (0..p)
                .map(|j| {
                    let mut r = vec![0.0; p];
                    r[j] = sg[j];
                    r
                })
                .collect();
            rows.push((0..p).map(|j| if s.contains(&j) { eta * sg[j] } else { -sg[j] }).collect());
            let m = rows.len();
            for active in 0..(1u32 << m) {
                let act: Vec<&Vec<f64>> = (0..m).filter(|k| active >> k & 1 == 1).map(|k| &rows[k]).collect();
                // basis of the null space of the active rows
                let basis: DMatrix<f64> = if act.is_empty() {
                    DMatrix::identity(p, p)
                } else {
                    let a = DMatrix::from_fn(act.len(), p, |i, j| act[i][j]);
                    let eig = SymmetricEigen::new(a.transpose() * &a);
                    let idx: Vec<usize> = (0..p).filter(|&k| eig.eigenvalues[k].abs() <= 1e-10).collect();
                    if idx.is_empty() {
                        continue;
                    }
                    DMatrix::from_fn(p, idx.len(), |i, k| eig.eigenvectors[(i, idx[k])])
                };
                let h = basis.transpose() * &g * &basis;
                let e = SymmetricEigen::new(h);
                for k in 0..e.eigenvalues.len() {
                    let v = &basis * e.eigenvectors.column(k);
                    for flip in [1.0, -1.0] {
                        let b: Vec<f64> = v.iter().map(|x| x * flip).collect();
                        let ok = rows.iter().all(|r| dot(r, &b) >= -1e-9);
                        if ok {
                            best = best.min(e.eigenvalues[k]);
                        }
                    }
                }
            }
        }
        best.max(0.0).sqrt()
    }

    #[test]
    fn re_matches_brute_force() {
        let x = DenseMatrix::gaussian(12, 6, RngStream::new(16, 0));
        let mut gram = x.gram().scale(1.0 / 12.0);
        // pull the off-support block towards the support so the cone binds
        for i in 0..6 {
            gram.set(i, i, gram.get(i, i) + 0.05);
        }
        for (s, eta) in [(vec![0usize, 3], 1.0), (vec![1, 2], 3.0), (vec![4, 5], 0.5)] {
            let want = re_brute_force(&gram, &s, eta);
            let got = re_estimate(&gram, &s, eta, 40, 1e-9, 17).unwrap();
            assert!((got - want).abs() <= 1e-4, "{s:?} {eta}: {got} vs {want}");
        }
    }

    #[test]
    fn oracle_bound_values() {
        let b = lasso_oracle_bounds(8.0, 1.0, 0, 400, 1000, 1.0).unwrap();
        assert_eq!((b.l1, b.l2sq, b.pred), (0.0, 0.0, 0.0));
        let b1 = lasso_oracle_bounds(8.0, 1.0, 5, 400, 1000, 1.0).unwrap();
        let b2 = lasso_oracle_bounds(8.0, 2.0, 5, 400, 1000, 1.0).unwrap();
        assert!(close(b2.l1, 2.0 * b1.l1, 1e-15));
        let r = (1000f64.ln() / 400.0).sqrt();
        assert!(close(b1.l1, 3.0 * 8.0 * 5.0 * r, 1e-14));
        assert!(close(b1.l2sq, 9.0 * 8.0 * 5.0 * r * r, 1e-14));
        assert!(close(b1.pred, 9.0 * 8.0 * 5.0 * r * r, 1e-14));
        assert!(close(b1.proof_l1, 3.0 * 8.0 * r * 5.0, 1e-14));
        assert!(close(b1.proof_l2sq, 9.0 * 64.0 * 5.0 * r * r, 1e-14));
        let g = lasso_oracle_bounds(8.0, 1.0, 5, 400, 1000, 0.5).unwrap();
        assert!(close(g.l1, 4.0 * b1.l1, 1e-14));
        assert!(close(g.proof_l1, 2.0 * b1.proof_l1, 1e-14));
    }

    #[test]
    fn poisson_lambda_values() {
        // independent evaluation at (A, L, B, n, p) = (2, 1, 1, 1e4, 100)
        let lp = 200f64.ln();
        let want = [
            16.0 * 4.0 * lp / 3e4,
            16.0 * 0.5f64.exp() * (lp / 1e4).sqrt(),
            40.0 * 1f64.exp() * (2.0 * lp / 1e4).sqrt(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        assert!(close(poisson_lambda(2.0, 1.0, 1.0, 10_000, 100).unwrap(), want, 1e-14));
        assert!(poisson_lambda(2.0, 1.0, 1.0, 1 << 40, 100).unwrap() < 1e-3);
        assert!(20.0 * 0.5f64.exp() * 2f64.sqrt() / 8.0 > 1.0);
    }

    #[test]
    fn poisson_huge_lambda_gives_zero() {
        let inst = gen_poisson(100, 10, 2, 1.0, 1.0, RngStream::new(18, 0)).unwrap();
        let fit = poisson_lasso_pg(&inst.x, &inst.y, 1e3, 1e-8, 1000).unwrap();
        assert!(fit.beta_hat.iter().all(|&b| b == 0.0));
        assert!(fit.converged);
    }

    fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-12 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn poisson_one_dimensional_oracle() {
        let inst = gen_poisson(300, 1, 1, 1.0, 1.0, RngStream::new(19, 0)).unwrap();
        let xs = inst.x.column(0);
        let lambda = 0.05;
        let obj = |b: f64| {
            xs.iter().zip(&inst.y).map(|(x, y)| (x * b).exp() - y * x * b).sum::<f64>() / 300.0 + lambda * b.abs()
        };
        let want = golden(obj, -10.0, 10.0);
        let fit = poisson_lasso_pg(&inst.x, &inst.y, lambda, 1e-10, 100_000).unwrap();
        assert!(fit.converged, "{} {} {:?}", fit.kkt_residual, fit.iterations, fit.beta_hat);
        assert!((fit.beta_hat[0] - want).abs() <= 1e-6, "{} {want}", fit.beta_hat[0]);
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn poisson_kkt_system() {
        let inst = gen_poisson(200, 20, 3, 1.0, 1.0, RngStream::new(20, 0)).unwrap();
        let lambda = 0.03;
        let fit = poisson_lasso_pg(&inst.x, &inst.y, lambda, 1e-8, 200_000).unwrap();
        assert!(fit.converged);
        let mu: Vec<f64> = inst.x.matvec(&fit.beta_hat).iter().map(|e| e.exp()).collect();
        for j in 0..20 {
            let col = inst.x.column(j);
            let g = col.iter().zip(&inst.y).zip(&mu).map(|((x, y), m)| x * (y - m)).sum::<f64>() / 200.0;
            if fit.beta_hat[j] != 0.0 {
                assert!((g - lambda * fit.beta_hat[j].signum()).abs() <= 1e-8);
            } else {
                assert!(g.abs() <= lambda + 1e-8);
            }
        }
    }

    #[test]
    fn poisson_bound_values() {
        assert_eq!(poisson_oracle_bounds(1.0, 1.0, 0, 0.3, 0.5).unwrap(), (0.0, 0.0));
        let (a, _) = poisson_oracle_bounds(1.0, 1.0, 3, 0.3, 0.5).unwrap();
        let (b, _) = poisson_oracle_bounds(1.0, 1.0, 3, 0.6, 0.5).unwrap();
        assert!(close(b, 2.0 * a, 1e-15));
        assert!(close(a, 4.0 * 5f64.exp() * 3.0 * 0.3 / 0.5, 1e-14));
    }

    #[test]
    fn simulations_do_not_depend_on_threads() {
        let cfg = LassoSimConfig {
            n: 40,
            p: 60,
            s: 2,
            sigma: 1.0,
            a: 4.0,
            reps: 6,
            seed: 3,
            design: Design::IidGaussian,
            column_normalize: true,
            gamma: 1.0,
            tol: 1e-8,
            max_iter: 100_000,
        };
        assert_eq!(simulate_lasso(&cfg, 1).unwrap(), simulate_lasso(&cfg, 3).unwrap());
        let pc = PoissonSimConfig { n: 60, p: 10, s: 2, l: 1.0, b: 1.0, a: 2.0, reps: 4, seed: 3, k: 0.5, tol: 1e-8, max_iter: 10_000 };
        let r = simulate_poisson(&pc, 2).unwrap();
        assert_eq!(r, simulate_poisson(&pc, 1).unwrap());
        assert_eq!(r.radius_violations_on_kkt, 0);
        let oc = OlsSimConfig { n: 50, p: 4, sigma: 1.0, reps: 20, seed: 1, t: 3.0 };
        assert_eq!(simulate_ols(&oc, 1).unwrap(), simulate_ols(&oc, 2).unwrap());
    }
}
