//! Monte-Carlo certification of tail bounds.
//!
//! Replications run in fixed blocks of [`BLOCK`]; block `b` draws from
//! stream `b` of the experiment seed, so results do not depend on how the
//! blocks are spread over threads.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::bounds::{Side, Statistic, TailBound};
use crate::dist::DistributionSpec;
use crate::error::{ensure, Error, Result};
use crate::matrix::{chol_solve, DenseMatrix};
use crate::numeric::{bisect_increasing, ln_gamma};
use crate::rng::RngStream;

pub const BLOCK: usize = 1024;
pub const MIN_REPLICATIONS: usize = 1000;
/// One-sided level of the per-point binomial limits.
pub const LEVEL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzKind {
    /// `‖X‖₂` with `X ~ N(0, I/γ)`.
    GaussianNorm,
    /// `max_i U_i` with `U_i ~ uniform(0, 1)`.
    UniformMax,
}

/// Generative models whose statistic is compared against a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `Σ w_i (X_i - EX_i)`, optionally with `w_i` multiplied by independent
    /// draws from `random_weights`.
    WeightedSum {
        spec: DistributionSpec,
        weights: Vec<f64>,
        #[serde(default)]
        random_weights: Option<DistributionSpec>,
    },
    /// `|X|`, not centered.
    AbsValue { spec: DistributionSpec },
    /// `U - EU` for the U-statistic with kernel `|x - y|` on uniform(0,1) data.
    UStatistic { n: usize },
    /// `f(X) - E f(X)` for a 1-Lipschitz `f`.
    Lipschitz {
        kind: LipschitzKind,
        n: usize,
        #[serde(default = "one")]
        gamma: f64,
    },
    /// `sup_x |F_n(x) - F(x)|` for `n` uniform draws.
    SupEdf { n: usize },
    /// `ξᵀAξ - E ξᵀAξ` with `ξ_i = scale_i (X_i - EX_i)`.
    QuadraticForm { spec: DistributionSpec, matrix: DenseMatrix, scales: Vec<f64> },
    /// `‖Aξ‖²` with `ξ_i` i.i.d. centered draws of `spec`.
    SquaredNorm { spec: DistributionSpec, matrix: DenseMatrix },
    /// `max_i (X_i - EX_i)`, or `max_i |X_i - EX_i|`.
    Max { spec: DistributionSpec, n: usize, absolute: bool },
    /// In-sample prediction risk `‖X(β̂ - β)‖²/n` of least squares on a
    /// fixed design with `N(0, σ²)` noise.
    OlsRisk { design: DenseMatrix, sigma: f64 },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn statistic(&self) -> Statistic {
        match self {
            ModelSpec::WeightedSum { .. } => Statistic::CenteredSum,
            ModelSpec::AbsValue { .. } => Statistic::AbsValue,
            ModelSpec::UStatistic { .. } => Statistic::BoundedDifference,
            ModelSpec::Lipschitz { .. } => Statistic::Lipschitz,
            ModelSpec::SupEdf { .. } => Statistic::SupEdf,
            ModelSpec::QuadraticForm { .. } => Statistic::QuadraticForm,
            ModelSpec::SquaredNorm { .. } => Statistic::SquaredNorm,
            ModelSpec::Max { .. } => Statistic::Max,
            ModelSpec::OlsRisk { .. } => Statistic::PredictionRisk,
        }
    }

    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.get("model").and_then(|m| m.as_str()).map(str::to_string))
            .unwrap_or_default()
    }

    fn prepare(&self) -> Result<Prepared> {
        let mut p = Prepared { center: 0.0, chol: None };
        match self {
            ModelSpec::WeightedSum { spec, weights, random_weights } => {
                spec.validate()?;
                ensure(!weights.is_empty(), "weights must be non-empty")?;
                if let Some(w) = random_weights {
                    w.validate()?;
                }
            }
            ModelSpec::AbsValue { spec } => spec.validate()?,
            ModelSpec::UStatistic { n } => {
                ensure(*n >= 2, "n must be at least 2")?;
                p.center = 1.0 / 3.0;
            }
            ModelSpec::Lipschitz { kind, n, gamma } => {
                ensure(*n >= 1, "n must be at least 1")?;
                ensure(*gamma > 0.0, "gamma must be positive")?;
                let nf = *n as f64;
                p.center = match kind {
                    LipschitzKind::GaussianNorm => {
                        (2f64.ln() / 2.0 + ln_gamma((nf + 1.0) / 2.0) - ln_gamma(nf / 2.0)).exp() / gamma.sqrt()
                    }
                    LipschitzKind::UniformMax => nf / (nf + 1.0),
                };
            }
            ModelSpec::SupEdf { n } => ensure(*n >= 1, "n must be at least 1")?,
            ModelSpec::QuadraticForm { spec, matrix, scales } => {
                spec.validate()?;
                ensure(matrix.is_square() && scales.len() == matrix.rows(), "matrix and scales must agree")?;
                let v = spec.variance();
                p.center = (0..matrix.rows()).map(|i| matrix.get(i, i) * scales[i] * scales[i] * v).sum();
            }
            ModelSpec::SquaredNorm { spec, .. } => spec.validate()?,
            ModelSpec::Max { spec, n, .. } => {
                spec.validate()?;
                ensure(*n >= 1, "n must be at least 1")?;
            }
            ModelSpec::OlsRisk { design, sigma } => {
                ensure(*sigma > 0.0, "sigma must be positive")?;
                ensure(design.rows() >= design.cols(), "design needs n >= p")?;
                p.chol = Some(design.gram().cholesky()?);
            }
        }
        Ok(p)
    }

    fn draw<R: Rng + ?Sized>(&self, prep: &Prepared, rng: &mut R, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        match self {
            ModelSpec::WeightedSum { spec, weights, random_weights } => {
                let mu = spec.mean();
                let mut s = 0.0;
                for w in weights {
                    let x = spec.draw(rng) - mu;
                    let w = match random_weights {
                        Some(r) => w * r.draw(rng),
                        None => *w,
                    };
                    s += w * x;
                }
                s
            }
            ModelSpec::AbsValue { spec } => spec.draw(rng).abs(),
            ModelSpec::UStatistic { n } => {
                buf.extend((0..*n).map(|_| rng.random::<f64>()));
                let mut s = 0.0;
                for i in 0..*n {
                    for j in 0..i {
                        s += (buf[i] - buf[j]).abs();
                    }
                }
                let pairs = (*n * (*n - 1) / 2) as f64;
                s / pairs - prep.center
            }
            ModelSpec::Lipschitz { kind, n, gamma } => {
                let f = match kind {
                    LipschitzKind::GaussianNorm => {
                        let z = DistributionSpec::gaussian(0.0, 1.0 / gamma.sqrt());
                        (0..*n).map(|_| z.draw(rng).powi(2)).sum::<f64>().sqrt()
                    }
                    LipschitzKind::UniformMax => (0..*n).map(|_| rng.random::<f64>()).fold(0.0, f64::max),
                };
                f - prep.center
            }
            ModelSpec::SupEdf { n } => {
                buf.extend((0..*n).map(|_| rng.random::<f64>()));
                buf.sort_by(f64::total_cmp);
                let nf = *n as f64;
                buf.iter()
                    .enumerate()
                    .map(|(i, &u)| ((i + 1) as f64 / nf - u).max(u - i as f64 / nf))
                    .fold(0.0, f64::max)
            }
            ModelSpec::QuadraticForm { spec, matrix, scales } => {
                let mu = spec.mean();
                buf.extend(scales.iter().map(|s| s * (spec.draw(rng) - mu)));
                matrix.quadratic_form(buf) - prep.center
            }
            ModelSpec::SquaredNorm { spec, matrix } => {
                let mu = spec.mean();
                buf.extend((0..matrix.cols()).map(|_| spec.draw(rng) - mu));
                matrix.matvec(buf).iter().map(|x| x * x).sum()
            }
            ModelSpec::Max { spec, n, absolute } => {
                let mu = spec.mean();
                (0..*n)
                    .map(|_| {
                        let x = spec.draw(rng) - mu;
                        if *absolute {
                            x.abs()
                        } else {
                            x
                        }
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            ModelSpec::OlsRisk { design, sigma } => {
                let noise = DistributionSpec::gaussian(0.0, *sigma);
                buf.extend((0..design.rows()).map(|_| noise.draw(rng)));
                // ‖P ε‖² = zᵀ (XᵀX)⁻¹ z with z = Xᵀε
                let z = design.tmatvec(buf);
                let l = prep.chol.as_ref().expect("prepared");
                let y = chol_solve(l, &z);
                z.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / design.rows() as f64
            }
        }
    }
}

struct Prepared {
    center: f64,
    chol: Option<DenseMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub model: ModelSpec,
    pub t_grid: Vec<f64>,
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

pub fn default_seed() -> u64 {
    0x5EED_2024
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.replications >= MIN_REPLICATIONS,
            &format!("replications must be at least {MIN_REPLICATIONS}"),
        )?;
        ensure(!self.t_grid.is_empty(), "t grid must be non-empty")?;
        ensure(self.t_grid.iter().all(|t| t.is_finite()), "t grid must be finite")?;
        ensure(self.t_grid.windows(2).all(|w| w[0] < w[1]), "t grid must be strictly increasing")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageRow {
    pub t: f64,
    pub bound: f64,
    pub exceedances: u64,
    pub empirical_freq: f64,
    pub binomial_upper_conf: f64,
    pub binomial_lower_conf: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageReport {
    pub family: String,
    pub model: String,
    pub side: Side,
    pub seed: u64,
    pub replications: usize,
    pub level: f64,
    pub shrink: f64,
    pub pass: bool,
    pub rows: Vec<CoverageRow>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl CoverageReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,bound,exceedances,empirical_freq,binomial_upper_conf,binomial_lower_conf,verdict\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.t,
                r.bound,
                r.exceedances,
                r.empirical_freq,
                r.binomial_upper_conf,
                r.binomial_lower_conf,
                if r.pass { "pass" } else { "fail" }
            ));
        }
        s
    }
}

/// Exact one-sided upper confidence limit for a binomial proportion:
/// the `p` with `P(Bin(R, p) <= k) = level`.
pub fn binomial_upper(k: u64, r: u64, level: f64) -> Result<f64> {
    ensure(r >= 1 && k <= r, "need 0 <= k <= R and R >= 1")?;
    ensure(level > 0.0 && level < 1.0, "level must lie in (0,1)")?;
    if k == r {
        return Ok(1.0);
    }
    if k == 0 {
        return Ok(-(level.ln() / r as f64).exp_m1());
    }
    let (kf, rf) = (k as f64, r as f64);
    // P(Bin <= k) = 1 - I_p(k+1, R-k) decreases in p
    let f = |p: f64| level - (1.0 - beta_reg(kf + 1.0, rf - kf, p));
    bisect_increasing(f, 0.0, 1.0, 1e-15)
}

/// Exact one-sided lower limit: `1 - binomial_upper(R - k, R, level)`.
pub fn binomial_lower(k: u64, r: u64, level: f64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    Ok(1.0 - binomial_upper(r - k, r, level)?)
}

/// Exceedance counts `#{stat >= t}` per grid point (`|stat|` for two-sided).
pub fn simulate_counts(exp: &Experiment, side: Side, threads: usize) -> Result<Vec<u64>> {
    exp.validate()?;
    let prep = exp.model.prepare()?;
    let blocks = exp.replications.div_ceil(BLOCK);
    let grid = &exp.t_grid;
    let work = |b: usize| -> Vec<u64> {
        let mut rng = RngStream::new(exp.seed, b as u64).rng();
        let reps = BLOCK.min(exp.replications - b * BLOCK);
        let mut buf = Vec::new();
        let mut stats: Vec<f64> = (0..reps)
            .map(|_| {
                let s = exp.model.draw(&prep, &mut rng, &mut buf);
                if side == Side::TwoSided {
                    s.abs()
                } else {
                    s
                }
            })
            .collect();
        stats.sort_by(f64::total_cmp);
        grid.iter().map(|&t| (stats.len() - stats.partition_point(|&x| x < t)) as u64).collect()
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(pool.install(|| (0..blocks).into_par_iter().map(work).reduce(|| vec![0; grid.len()], add)))
}

fn check_pairing(exp: &Experiment, bound: &TailBound) -> Result<()> {
    if exp.model.statistic() != bound.statistic() {
        return Err(Error::Incompatible(format!(
            "model `{}` produces {:?} but bound `{}` controls {:?}",
            exp.model.name(),
            exp.model.statistic(),
            bound.tag(),
            bound.statistic()
        )));
    }
    Ok(())
}

fn assemble(exp: &Experiment, bound: &TailBound, counts: &[u64], shrink: f64, started: Instant) -> Result<CoverageReport> {
    let r = exp.replications as u64;
    let mut rows = Vec::with_capacity(counts.len());
    for (&t, &k) in exp.t_grid.iter().zip(counts) {
        let b = bound.evaluate(t)? * shrink;
        let lower = binomial_lower(k, r, LEVEL)?;
        rows.push(CoverageRow {
            t,
            bound: b,
            exceedances: k,
            empirical_freq: k as f64 / r as f64,
            binomial_upper_conf: binomial_upper(k, r, LEVEL)?,
            binomial_lower_conf: lower,
            pass: b >= lower,
        });
    }
    Ok(CoverageReport {
        family: bound.tag(),
        model: exp.model.name(),
        side: bound.side(),
        seed: exp.seed,
        replications: exp.replications,
        level: LEVEL,
        shrink,
        pass: rows.iter().all(|r| r.pass),
        rows,
        runtime: started.elapsed(),
    })
}

/// Simulate the experiment and compare each grid point with the bound.
pub fn run(exp: &Experiment, bound: &TailBound, threads: usize) -> Result<CoverageReport> {
    falsify(exp, bound, 1.0, threads)
}

/// As [`run`], against `shrink × bound`; a harness that cannot reject a
/// shrunken bound is not testing anything.
pub fn falsify(exp: &Experiment, bound: &TailBound, shrink: f64, threads: usize) -> Result<CoverageReport> {
    ensure(shrink >= 0.0, "shrink factor must be non-negative")?;
    check_pairing(exp, bound)?;
    let started = Instant::now();
    let counts = simulate_counts(exp, bound.side(), threads)?;
    assemble(exp, bound, &counts, shrink, started)
}

/// Both the plain run and the shrunken control from one simulation.
pub fn run_with_control(exp: &Experiment, bound: &TailBound, shrink: f64, threads: usize) -> Result<(CoverageReport, CoverageReport)> {
    check_pairing(exp, bound)?;
    let started = Instant::now();
    let counts = simulate_counts(exp, bound.side(), threads)?;
    Ok((assemble(exp, bound, &counts, 1.0, started)?, assemble(exp, bound, &counts, shrink, started)?))
}

/// Eight points from the start of the bound's domain to where it reaches
/// `1e-4`, spaced evenly in the log of the bound value.
pub fn default_grid(bound: &TailBound) -> Result<Vec<f64>> {
    let mut grid = vec![bound.domain_start()];
    for k in 1..8 {
        let delta = 10f64.powf(-4.0 * f64::from(k) / 7.0);
        let t = bound.radius(delta)?;
        if t > *grid.last().unwrap() {
            grid.push(t);
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoundFamily;

    #[test]
    fn binomial_limits() {
        let r = 1000;
        assert!((binomial_upper(0, r, 1e-4).unwrap() - (1.0 - 1e-4f64.powf(1.0 / 1000.0))).abs() < 1e-15);
        assert_eq!(binomial_upper(r, r, 1e-4).unwrap(), 1.0);
        let u = binomial_upper(5000, 10_000, 0.05).unwrap();
        let approx = 0.5 + 1.6449 * 0.5 / 100.0;
        assert!((u - approx).abs() < 1e-3, "{u}");
        // consistency with the CDF
        let p = binomial_upper(7, 100, 0.01).unwrap();
        let cdf = 1.0 - beta_reg(8.0, 93.0, p);
        assert!((cdf - 0.01).abs() < 1e-10);
        assert_eq!(binomial_lower(0, 100, 0.01).unwrap(), 0.0);
        assert!(binomial_lower(50, 100, 0.01).unwrap() < 0.5);
    }

    fn hoeffding_setup() -> (Experiment, TailBound) {
        let n = 50;
        let exp = Experiment {
            model: ModelSpec::WeightedSum {
                spec: DistributionSpec::bernoulli(0.5),
                weights: vec![1.0 / n as f64; n],
                random_weights: None,
            },
            t_grid: vec![0.1, 0.2, 0.3],
            replications: 100_000,
            seed: 11,
        };
        let bound = TailBound::new(BoundFamily::Hoeffding { intervals: vec![[0.0, 1.0 / n as f64]; n] }).unwrap();
        (exp, bound)
    }

    #[test]
    fn hoeffding_bernoulli_mean_passes_and_control_fails() {
        let (exp, bound) = hoeffding_setup();
        let (rep, ctl) = run_with_control(&exp, &bound, 0.1, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(!ctl.pass);
        assert!(!ctl.rows[1].pass);
        let zero = falsify(&exp, &bound, 0.0, 1).unwrap();
        assert!(zero.rows.iter().filter(|r| r.exceedances > 0).all(|r| !r.pass));
    }

    #[test]
    fn determinism_across_threads() {
        let (mut exp, bound) = hoeffding_setup();
        exp.replications = 5000;
        let a = serde_json::to_string(&run(&exp, &bound, 1).unwrap()).unwrap();
        let b = serde_json::to_string(&run(&exp, &bound, 4).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_experiments() {
        let (mut exp, bound) = hoeffding_setup();
        exp.replications = 999;
        assert!(run(&exp, &bound, 1).is_err());
        exp.replications = 1000;
        exp.t_grid = vec![0.2, 0.1];
        assert!(run(&exp, &bound, 1).is_err());
        exp.t_grid = vec![0.1];
        let dkw = TailBound::new(BoundFamily::Dkw { n: 10 }).unwrap();
        assert!(matches!(run(&exp, &dkw, 1), Err(Error::Incompatible(_))));
    }

    #[test]
    fn model_centers_are_exact() {
        // E‖Z‖ for n = 1 is √(2/π)
        let m = ModelSpec::Lipschitz { kind: LipschitzKind::GaussianNorm, n: 1, gamma: 1.0 };
        let p = m.prepare().unwrap();
        assert!((p.center - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        let m = ModelSpec::Lipschitz { kind: LipschitzKind::GaussianNorm, n: 2, gamma: 4.0 };
        assert!((m.prepare().unwrap().center - (std::f64::consts::PI / 2.0).sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn sup_edf_statistic_is_kolmogorov_distance() {
        let m = ModelSpec::SupEdf { n: 1 };
        let p = m.prepare().unwrap();
        let mut rng = RngStream::new(1, 0).rng();
        let mut buf = Vec::new();
        for _ in 0..100 {
            let d = m.draw(&p, &mut rng, &mut buf);
            let u = buf[0];
            assert!((d - u.max(1.0 - u)).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_is_increasing_and_reaches_deep_tail() {
        let (_, bound) = hoeffding_setup();
        let g = default_grid(&bound).unwrap();
        assert_eq!(g.len(), 8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((bound.evaluate(g[7]).unwrap() - 1e-4).abs() < 1e-10);
    }
}
