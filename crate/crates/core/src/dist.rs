//! Scalar laws: sampling, exact moments and moment generating functions.

use rand::Rng;
use rand_distr::{self as rd, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure, Error, Result};
use crate::numeric::{gamma, integrate, integrate_to_inf, ln_gamma, norm_cdf};
use crate::rng::RngStream;

/// Default absolute precision for series and quadrature.
pub const DEFAULT_PRECISION: f64 = 1e-12;

/// A scalar law, serialized as `{"family": ..., "params": {...}}`.
///
/// `weibull` has survival function `exp(-scale * x^shape)`; `geometric` has
/// `P(X = k) = (1-q) q^(k-1)` for `k >= 1`; `discrete_laplace` is the difference
/// of two independent geometrics; `rademacher` takes the values `±scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Gaussian { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Bernoulli { p: f64 },
    Exponential { mean: f64 },
    Poisson { lambda: f64 },
    Gamma { shape: f64, scale: f64 },
    ChiSquare { df: f64 },
    Weibull { scale: f64, shape: f64 },
    Geometric { q: f64 },
    DiscreteLaplace { q: f64 },
    Rademacher { scale: f64 },
}

/// Open or closed interval of `s` values where the MGF is finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgfDomain {
    pub lo: f64,
    pub hi: f64,
    pub hi_closed: bool,
}

impl MgfDomain {
    fn all() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, hi_closed: false }
    }
    fn below(hi: f64) -> Self {
        Self { lo: f64::NEG_INFINITY, hi, hi_closed: false }
    }
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && (s < self.hi || (self.hi_closed && s == self.hi))
    }
}

/// How fast the tail of |X| decays: `Bounded`, or `exp(-x^index)`-like.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailIndex {
    Bounded,
    Index(f64),
}

use DistributionSpec::*;

impl DistributionSpec {
    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        Gaussian { mu, sigma }
    }
    pub fn uniform(a: f64, b: f64) -> Self {
        Uniform { a, b }
    }
    pub fn bernoulli(p: f64) -> Self {
        Bernoulli { p }
    }
    pub fn exponential(mean: f64) -> Self {
        Exponential { mean }
    }
    pub fn poisson(lambda: f64) -> Self {
        Poisson { lambda }
    }
    pub fn gamma(shape: f64, scale: f64) -> Self {
        Gamma { shape, scale }
    }
    pub fn chi_square(df: f64) -> Self {
        ChiSquare { df }
    }
    pub fn weibull(scale: f64, shape: f64) -> Self {
        Weibull { scale, shape }
    }
    pub fn geometric(q: f64) -> Self {
        Geometric { q }
    }
    pub fn discrete_laplace(q: f64) -> Self {
        DiscreteLaplace { q }
    }
    pub fn rademacher(scale: f64) -> Self {
        Rademacher { scale }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gaussian { .. } => "gaussian",
            Uniform { .. } => "uniform",
            Bernoulli { .. } => "bernoulli",
            Exponential { .. } => "exponential",
            Poisson { .. } => "poisson",
            Gamma { .. } => "gamma",
            ChiSquare { .. } => "chi_square",
            Weibull { .. } => "weibull",
            Geometric { .. } => "geometric",
            DiscreteLaplace { .. } => "discrete_laplace",
            Rademacher { .. } => "rademacher",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        match *self {
            Gaussian { mu, sigma } => ensure(finite(mu) && finite(sigma) && sigma > 0.0, "gaussian needs sigma > 0"),
            Uniform { a, b } => ensure(finite(a) && finite(b) && b > a, "uniform needs b > a"),
            Bernoulli { p } => ensure(p > 0.0 && p < 1.0, "bernoulli needs p in (0,1)"),
            Exponential { mean } => ensure(finite(mean) && mean > 0.0, "exponential needs mean > 0"),
            Poisson { lambda } => ensure(finite(lambda) && lambda > 0.0, "poisson needs lambda > 0"),
            Gamma { shape, scale } => ensure(
                finite(shape) && finite(scale) && shape > 0.0 && scale > 0.0,
                "gamma needs shape > 0 and scale > 0",
            ),
            ChiSquare { df } => ensure(finite(df) && df >= 1.0, "chi_square needs df >= 1"),
            Weibull { scale, shape } => ensure(
                finite(scale) && finite(shape) && scale > 0.0 && shape > 0.0,
                "weibull needs scale > 0 and shape > 0",
            ),
            Geometric { q } | DiscreteLaplace { q } => ensure(q > 0.0 && q < 1.0, "q must lie in (0,1)"),
            Rademacher { scale } => ensure(finite(scale) && scale > 0.0, "rademacher needs scale > 0"),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Bernoulli { .. } | Poisson { .. } | Geometric { .. } | DiscreteLaplace { .. } | Rademacher { .. })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Gaussian { mu, .. } => mu,
            Uniform { a, b } => 0.5 * (a + b),
            Bernoulli { p } => p,
            Exponential { mean } => mean,
            Poisson { lambda } => lambda,
            Gamma { shape, scale } => shape * scale,
            ChiSquare { df } => df,
            Weibull { scale, shape } => scale.powf(-1.0 / shape) * gamma(1.0 + 1.0 / shape),
            Geometric { q } => 1.0 / (1.0 - q),
            DiscreteLaplace { .. } | Rademacher { .. } => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Gaussian { sigma, .. } => sigma * sigma,
            Uniform { a, b } => (b - a).powi(2) / 12.0,
            Bernoulli { p } => p * (1.0 - p),
            Exponential { mean } => mean * mean,
            Poisson { lambda } => lambda,
            Gamma { shape, scale } => shape * scale * scale,
            ChiSquare { df } => 2.0 * df,
            Weibull { scale, shape } => {
                let g1 = gamma(1.0 + 1.0 / shape);
                scale.powf(-2.0 / shape) * (gamma(1.0 + 2.0 / shape) - g1 * g1)
            }
            Geometric { q } => q / (1.0 - q).powi(2),
            DiscreteLaplace { q } => 2.0 * q / (1.0 - q).powi(2),
            Rademacher { scale } => scale * scale,
        }
    }

    pub fn tail_index(&self) -> TailIndex {
        match *self {
            Uniform { .. } | Bernoulli { .. } | Rademacher { .. } => TailIndex::Bounded,
            Gaussian { .. } => TailIndex::Index(2.0),
            Weibull { shape, .. } => TailIndex::Index(shape),
            _ => TailIndex::Index(1.0),
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Gaussian { mu, sigma } => rd::Normal::new(mu, sigma).expect("validated").sample(rng),
            Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Bernoulli { p } => f64::from(rng.random::<f64>() < p),
            Exponential { mean } => mean * rd::Exp::new(1.0).expect("rate 1").sample(rng),
            Poisson { lambda } => rd::Poisson::new(lambda).expect("validated").sample(rng),
            Gamma { shape, scale } => rd::Gamma::new(shape, scale).expect("validated").sample(rng),
            ChiSquare { df } => rd::Gamma::new(0.5 * df, 2.0).expect("validated").sample(rng),
            Weibull { scale, shape } => rd::Weibull::new(scale.powf(-1.0 / shape), shape).expect("validated").sample(rng),
            Geometric { q } => geometric_draw(q, rng),
            DiscreteLaplace { q } => geometric_draw(q, rng) - geometric_draw(q, rng),
            Rademacher { scale } => {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
        }
    }

    /// `n` draws from the substream `stream`.
    pub fn sample(&self, stream: RngStream, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        ensure(n >= 1, "sample size must be at least 1")?;
        let mut rng = stream.rng();
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }

    pub fn mgf_domain(&self) -> MgfDomain {
        match *self {
            Exponential { mean } => MgfDomain::below(1.0 / mean),
            Gamma { scale, .. } => MgfDomain::below(1.0 / scale),
            ChiSquare { .. } => MgfDomain::below(0.5),
            Weibull { scale, shape } => {
                if shape > 1.0 {
                    MgfDomain::all()
                } else if shape == 1.0 {
                    MgfDomain::below(scale)
                } else {
                    MgfDomain { lo: f64::NEG_INFINITY, hi: 0.0, hi_closed: true }
                }
            }
            Geometric { q } => MgfDomain::below(-q.ln()),
            DiscreteLaplace { q } => MgfDomain { lo: q.ln(), hi: -q.ln(), hi_closed: false },
            _ => MgfDomain::all(),
        }
    }

    /// `E exp(sX)`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        self.validate()?;
        let dom = self.mgf_domain();
        if !dom.contains(s) {
            return Err(Error::MgfDomain { s, region: format!("({}, {})", dom.lo, dom.hi) });
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(match *self {
            Gaussian { mu, sigma } => (mu * s + 0.5 * sigma * sigma * s * s).exp(),
            Uniform { a, b } => ((s * b).exp() - (s * a).exp()) / (s * (b - a)),
            Bernoulli { p } => 1.0 - p + p * s.exp(),
            Exponential { mean } => 1.0 / (1.0 - s * mean),
            Poisson { lambda } => (lambda * s.exp_m1()).exp(),
            Gamma { shape, scale } => (1.0 - scale * s).powf(-shape),
            ChiSquare { df } => (1.0 - 2.0 * s).powf(-0.5 * df),
            Weibull { .. } => self.expect(|x| (s * x).exp(), 0.0, DEFAULT_PRECISION)?,
            Geometric { q } => (1.0 - q) * s.exp() / (1.0 - q * s.exp()),
            DiscreteLaplace { q } => (1.0 - q).powi(2) / ((1.0 - q * s.exp()) * (1.0 - q * (-s).exp())),
            Rademacher { scale } => (s * scale).cosh(),
        })
    }

    /// `E exp(s(X - EX))`.
    pub fn central_mgf(&self, s: f64) -> Result<f64> {
        Ok((-s * self.mean()).exp() * self.mgf(s)?)
    }

    /// `E exp(r|X - EX|)` to absolute precision `precision`.
    pub fn abs_central_mgf(&self, r: f64, precision: f64) -> Result<f64> {
        self.validate()?;
        ensure(r >= 0.0 && r.is_finite(), "r must be finite and non-negative")?;
        if r == 0.0 {
            return Ok(1.0);
        }
        let m = self.mean();
        let diverge = || Err(Error::Divergent(format!("E exp(r|X-EX|) is infinite at r={r}")));
        match *self {
            Gaussian { sigma, .. } => {
                let rs = r * sigma;
                Ok(2.0 * (0.5 * rs * rs).exp() * norm_cdf(rs))
            }
            Uniform { a, b } => {
                let h = 0.5 * (b - a) * r;
                Ok(h.exp_m1() / h)
            }
            Bernoulli { p } => Ok((1.0 - p) * (r * p).exp() + p * (r * (1.0 - p)).exp()),
            Rademacher { scale } => Ok((r * scale).exp()),
            Exponential { mean } => {
                let rm = r * mean;
                if rm >= 1.0 {
                    return diverge();
                }
                Ok(rm.exp() * (1.0 - (-rm - 1.0).exp()) / (rm + 1.0) + (-1.0f64).exp() / (1.0 - rm))
            }
            Gamma { scale, .. } if r * scale >= 1.0 => diverge(),
            ChiSquare { .. } if r >= 0.5 => diverge(),
            Weibull { scale, shape } if shape < 1.0 || (shape == 1.0 && r >= scale) => diverge(),
            Geometric { q } | DiscreteLaplace { q } if q * r.exp() >= 1.0 => diverge(),
            _ => self.expect(|x| (r * (x - m).abs()).exp(), m, precision),
        }
    }

    /// `E X^k`, `E|X|^k`, `E(X-EX)^k` or `E|X-EX|^k`.
    pub fn moment(&self, k: u32, absolute: bool, centered: bool) -> Result<f64> {
        self.validate()?;
        ensure(k >= 1, "moment order must be at least 1")?;
        let kf = f64::from(k);
        let odd = k % 2 == 1;
        match *self {
            Gaussian { mu, sigma } if centered || mu == 0.0 => {
                if absolute {
                    Ok(sigma.powf(kf) * 2f64.powf(kf / 2.0) * gamma((kf + 1.0) / 2.0) / std::f64::consts::PI.sqrt())
                } else if odd {
                    Ok(0.0)
                } else {
                    Ok(sigma.powf(kf) * double_factorial(k - 1))
                }
            }
            Gaussian { mu, sigma } if !absolute => {
                let mut acc = 0.0;
                for j in (0..=k).step_by(2) {
                    let zj = if j == 0 { 1.0 } else { double_factorial(j - 1) };
                    acc += binom(k, j) * mu.powi((k - j) as i32) * sigma.powi(j as i32) * zj;
                }
                Ok(acc)
            }
            Exponential { mean } if !centered => Ok(gamma(kf + 1.0) * mean.powf(kf)),
            Exponential { mean } if !absolute => {
                let mut acc = 0.0;
                for j in 0..=k {
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * binom(k, j) * gamma(f64::from(j) + 1.0);
                }
                Ok(acc * mean.powf(kf))
            }
            Uniform { a, b } if centered => {
                let h = 0.5 * (b - a);
                Ok(if odd && !absolute { 0.0 } else { h.powf(kf) / (kf + 1.0) })
            }
            Uniform { a, b } if !absolute || a >= 0.0 => {
                Ok((b.powf(kf + 1.0) - a.powf(kf + 1.0)) / ((kf + 1.0) * (b - a)))
            }
            _ => {
                let c = if centered { self.mean() } else { 0.0 };
                let g = |x: f64| {
                    let d = x - c;
                    if absolute {
                        d.abs().powf(kf)
                    } else {
                        d.powi(k as i32)
                    }
                };
                self.expect(g, c, DEFAULT_PRECISION)
            }
        }
    }

    fn ln_pmf(&self, k: i64) -> f64 {
        match *self {
            Poisson { lambda } => {
                if k < 0 {
                    f64::NEG_INFINITY
                } else {
                    k as f64 * lambda.ln() - lambda - ln_gamma(k as f64 + 1.0)
                }
            }
            Geometric { q } => {
                if k < 1 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 - q).ln() + (k - 1) as f64 * q.ln()
                }
            }
            DiscreteLaplace { q } => ((1.0 - q) / (1.0 + q)).ln() + k.unsigned_abs() as f64 * q.ln(),
            _ => unreachable!("series only for integer laws"),
        }
    }

    /// Density of a continuous law.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Gaussian { mu, sigma } => crate::numeric::norm_pdf((x - mu) / sigma) / sigma,
            Uniform { a, b } => {
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Gamma { shape, scale } => gamma_pdf(x, shape, scale),
            ChiSquare { df } => gamma_pdf(x, 0.5 * df, 2.0),
            Weibull { scale, shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    scale * shape * x.powf(shape - 1.0) * (-scale * x.powf(shape)).exp()
                }
            }
            _ => 0.0,
        }
    }

    /// `E g(X)` by series (integer laws) or quadrature (continuous laws).
    /// `split` marks a point where `g` may have a kink.
    pub fn expect(&self, g: impl Fn(f64) -> f64, split: f64, precision: f64) -> Result<f64> {
        match *self {
            Bernoulli { p } => Ok((1.0 - p) * g(0.0) + p * g(1.0)),
            Rademacher { scale } => Ok(0.5 * (g(scale) + g(-scale))),
            Poisson { .. } => self.series(&g, 0, 1, precision),
            Geometric { .. } => self.series(&g, 1, 1, precision),
            DiscreteLaplace { .. } => {
                let up = self.series(&g, 0, 1, 0.5 * precision)?;
                let down = self.series(&g, -1, -1, 0.5 * precision)?;
                Ok(up + down)
            }
            Uniform { a, b } => {
                let f = |x: f64| g(x) / (b - a);
                if split > a && split < b {
                    Ok(integrate(f, a, split, 0.5 * precision)? + integrate(f, split, b, 0.5 * precision)?)
                } else {
                    integrate(f, a, b, precision)
                }
            }
            Gaussian { mu, .. } => {
                let f = |x: f64| {
                    let d = self.pdf(x);
                    if d == 0.0 {
                        0.0
                    } else {
                        g(x) * d
                    }
                };
                let c = if split.is_finite() { split } else { mu };
                let right = integrate_to_inf(f, c, 0.5 * precision)?;
                let left = integrate_to_inf(|y| f(2.0 * c - y), c, 0.5 * precision)?;
                Ok(left + right)
            }
            _ => {
                let f = |x: f64| {
                    let d = self.pdf(x);
                    if d == 0.0 {
                        0.0
                    } else {
                        g(x) * d
                    }
                };
                if split > 0.0 {
                    Ok(integrate(f, 0.0, split, 0.5 * precision)? + integrate_to_inf(f, split, 0.5 * precision)?)
                } else {
                    integrate_to_inf(f, 0.0, precision)
                }
            }
        }
    }

    /// Sum `pmf(k) g(k)` for `k = start, start+dir, ...` until the remaining
    /// terms, bounded by a geometric series in the current term ratio, fall
    /// below `precision`.
    fn series(&self, g: &impl Fn(f64) -> f64, start: i64, dir: i64, precision: f64) -> Result<f64> {
        let term = |k: i64| {
            let lp = self.ln_pmf(k);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                lp.exp() * g(k as f64)
            }
        };
        let mode_guard = (self.mean().abs() + 4.0 * self.variance().sqrt() + 5.0) as i64;
        let mut acc = 0.0;
        let mut k = start;
        let mut prev = term(k);
        acc += prev;
        for _ in 0..2_000_000 {
            k += dir;
            let cur = term(k);
            if !cur.is_finite() {
                return Err(Error::Divergent("series term overflow".into()));
            }
            acc += cur;
            if (k - start).abs() > mode_guard {
                if cur == 0.0 {
                    return Ok(acc);
                }
                let ratio = cur / prev;
                if ratio < 1.0 && cur.abs() * ratio / (1.0 - ratio) < precision {
                    return Ok(acc);
                }
            }
            prev = cur;
        }
        Err(Error::Divergent("series did not converge".into()))
    }
}

fn geometric_draw<R: Rng + ?Sized>(q: f64, rng: &mut R) -> f64 {
    // Inversion: P(X > k) = q^k.
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / q.ln()).floor() + 1.0
}

fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

fn double_factorial(n: u32) -> f64 {
    let mut acc = 1.0;
    let mut i = n;
    while i > 1 {
        acc *= f64::from(i);
        i -= 2;
    }
    acc
}

fn binom(n: u32, k: u32) -> f64 {
    (ln_gamma(f64::from(n) + 1.0) - ln_gamma(f64::from(k) + 1.0) - ln_gamma(f64::from(n - k) + 1.0))
        .exp()
        .round()
}

/// Parse a spec from JSON text and validate it.
pub fn parse_spec(text: &str) -> Result<DistributionSpec> {
    let spec: DistributionSpec = serde_json::from_str(text).map_err(|e| domain(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}
