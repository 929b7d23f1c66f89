//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line per
//! criterion straight to stdout, so the lines show up without `--nocapture`.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use tailcert::bounds::{BoundFamily, Side, TailBound};
use tailcert::hdreg::{self, Design, LassoSimConfig, OlsSimConfig, PoissonSimConfig};
use tailcert::maxima;
use tailcert::mc::{self, binomial_lower, Experiment, ModelSpec, LEVEL};
use tailcert::norms::{psi_norm, OrliczSpec};
use tailcert::quadform;
use tailcert::{catalog, DenseMatrix, DistributionSpec, RngStream};

const SEED: u64 = 0x5EED_2024;

fn report(id: u32, name: &str, pass: bool, started: Instant, detail: &str) {
    let line = format!(
        "criterion {id:>2} [{}] {name} ({:.1}s): {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

/// Fails only when the exact lower confidence limit of the frequency exceeds `bound`.
fn covered(hits: u64, total: u64, bound: f64) -> bool {
    binomial_lower(hits, total, LEVEL).unwrap() <= bound
}

#[test]
fn c01_closed_form_norms() {
    let started = Instant::now();
    let psi1 = OrliczSpec::General(Arc::new(|x: f64| x.exp() - 1.0));
    let psi2 = OrliczSpec::General(Arc::new(|x: f64| (x * x).exp() - 1.0));
    let ln2 = std::f64::consts::LN_2;
    let mut worst = 0.0f64;
    for v in [0.5, 1.0, 3.0] {
        let cases = [
            (DistributionSpec::rademacher(v), &psi2, OrliczSpec::Psi(2.0), v / ln2.sqrt()),
            (DistributionSpec::gaussian(0.0, v), &psi2, OrliczSpec::Psi(2.0), (8.0f64 / 3.0).sqrt() * v),
            (DistributionSpec::rademacher(v), &psi1, OrliczSpec::Psi(1.0), v / ln2),
            (DistributionSpec::poisson(v), &psi1, OrliczSpec::Psi(1.0), 1.0 / (ln2 / v).ln_1p()),
        ];
        for (spec, general, named, want) in cases {
            // the generic solver never takes the closed-form shortcut
            let solved = psi_norm(&spec, general, 1e-12).unwrap().value;
            let named = psi_norm(&spec, &named, 1e-12).unwrap().value;
            worst = worst.max(((solved - want) / want).abs()).max(((named - want) / want).abs());
        }
    }
    let pass = worst <= 1e-6;
    report(1, "closed-form Orlicz norms", pass, started, &format!("worst relative error {worst:.2e} (tolerance 1e-6)"));
    assert!(pass);
}

#[test]
fn c02_coverage_suite_and_c10_determinism() {
    let started = Instant::now();
    let r = 100_000;
    let entries = catalog::catalog().unwrap();
    let certified = entries.iter().filter(|e| e.certified).count();
    let runs = catalog::certify_all(r, SEED, 0.1, 1).unwrap();
    let mut bad_cover = Vec::new();
    let mut bad_control = Vec::new();
    for (plain, control) in &runs {
        if !plain.pass {
            bad_cover.push(plain.family.clone());
        }
        let live = plain.rows.iter().any(|row| row.empirical_freq > 10.0 / r as f64);
        if live && control.failures() == 0 {
            bad_control.push(plain.family.clone());
        }
    }
    let pass = certified >= 20 && runs.len() == certified && bad_cover.is_empty() && bad_control.is_empty();
    report(
        2,
        "coverage suite",
        pass,
        started,
        &format!(
            "{} families at R={r}; coverage failures {:?}; controls without a rejection {:?}",
            runs.len(),
            bad_cover,
            bad_control
        ),
    );

    let started = Instant::now();
    let serialize = |runs: &[(mc::CoverageReport, mc::CoverageReport)]| serde_json::to_string(runs).unwrap();
    let one = serialize(&runs);
    let eight = serialize(&catalog::certify_all(r, SEED, 0.1, 8).unwrap());
    let same = one == eight;
    report(10, "determinism across thread counts", same, started, &format!("1 vs 8 threads, {} bytes, identical: {same}", one.len()));
    assert!(pass && same);
}

#[test]
fn c03_dkw() {
    let started = Instant::now();
    let (n, eps, r) = (100, 0.2, 100_000);
    let bound = TailBound::new(BoundFamily::Dkw { n }).unwrap();
    let exp = Experiment { model: ModelSpec::SupEdf { n }, t_grid: vec![eps], replications: r, seed: SEED };
    let rep = mc::run(&exp, &bound, 1).unwrap();
    let row = &rep.rows[0];
    let want = 2.0 * (-8.0f64).exp();
    let pass = rep.pass && (row.bound - want).abs() <= 1e-15;
    report(3, "DKW", pass, started, &format!("frequency {:.2e} vs bound {want:.3e}", row.empirical_freq));
    assert!(pass);
}

#[test]
fn c04_chi_square_two_regimes() {
    let started = Instant::now();
    let r = 100_000usize;
    let grid = [0.25, 0.5, 1.0, 2.0];
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [10usize, 100] {
        let nf = n as f64;
        let model = ModelSpec::WeightedSum { spec: DistributionSpec::chi_square(1.0), weights: vec![1.0 / nf; n], random_weights: None };
        let exp = Experiment { model, t_grid: grid.to_vec(), replications: r, seed: SEED };
        let counts = mc::simulate_counts(&exp, Side::TwoSided, 1).unwrap();
        for (&t, &k) in grid.iter().zip(&counts) {
            let b = (2.0 * (-(nf / 8.0) * (t * t).min(t)).exp()).min(1.0);
            let ok = covered(k, r as u64, b);
            pass &= ok;
            detail.push(format!("n={n} t={t}: {:.2e}<={b:.2e}", k as f64 / r as f64));
        }
    }
    report(4, "chi-square two-regime tail", pass, started, &detail.join(", "));
    assert!(pass);
}

#[test]
fn c05_bai_yin() {
    let started = Instant::now();
    let (n, p, reps) = (2000, 200, 100);
    let y = p as f64 / n as f64;
    let (lo_edge, hi_edge) = quadform::baiyin_edges(1.0, y).unwrap();
    let inside = (0..reps)
        .filter(|&k| {
            let x = DenseMatrix::gaussian(n, p, RngStream::new(SEED, k));
            let (lo, hi) = quadform::sample_cov_extreme(&x).unwrap();
            lo >= lo_edge - 0.1 && hi <= hi_edge + 0.1
        })
        .count();
    let (nf, pf) = (n as f64, p as f64);
    let c = 2.0 * nf * 9f64.ln() / pf;
    let theta = 1e-6;
    let fp = quadform::baiyin_nonasymptotic(n, p, theta, c).unwrap();
    let res_delta = (fp.delta - 2.0 * c * ((pf / nf).sqrt() + fp.t / nf.sqrt())).abs();
    let res_t = (fp.t - c * theta * fp.delta.max(fp.delta * fp.delta)).abs();
    let pass = inside >= 95 && res_delta <= 1e-10 && res_t <= 1e-10;
    report(
        5,
        "Bai-Yin desk scale",
        pass,
        started,
        &format!("{inside}/{reps} inside the widened edges; fixed-point residuals {res_delta:.1e}, {res_t:.1e}"),
    );
    assert!(pass);
}

#[test]
fn c06_ols_risk() {
    let started = Instant::now();
    let cfg = OlsSimConfig { n: 500, p: 20, sigma: 1.0, reps: 1000, seed: SEED, t: 3.0 };
    let rep = hdreg::simulate_ols(&cfg, 1).unwrap();
    let mean_ok = (rep.mean_risk - 0.04).abs() <= 3.0 * rep.risk_se;
    let tail_ok = covered(rep.tail.hits as u64, rep.tail.total as u64, (-3.0f64).exp());
    let pass = mean_ok && tail_ok && (rep.expected_risk - 0.04).abs() < 1e-15;
    report(
        6,
        "OLS risk",
        pass,
        started,
        &format!(
            "mean risk {:.5} (SE {:.5}); tail frequency {:.4} vs e^-3",
            rep.mean_risk, rep.risk_se, rep.tail.freq
        ),
    );
    assert!(pass);
}

#[test]
fn c07_lasso_events() {
    let started = Instant::now();
    let cfg = LassoSimConfig {
        n: 400,
        p: 1000,
        s: 5,
        sigma: 1.0,
        a: 8.0,
        reps: 500,
        seed: SEED,
        design: Design::IidGaussian,
        column_normalize: true,
        gamma: 1.0,
        tol: 1e-8,
        max_iter: 100_000,
    };
    let rep = hdreg::simulate_lasso(&cfg, 1).unwrap();
    let kkt_ok = rep.kkt.freq >= rep.kkt_probability - 3.0 * rep.kkt.se;
    let cone_ok = rep.cone_violations_on_kkt == 0;
    let l1_ok = rep.l1_within.freq >= 0.99;
    let pass = kkt_ok && cone_ok && l1_ok && rep.unconverged == 0;
    report(
        7,
        "Lasso oracle events",
        pass,
        started,
        &format!(
            "KKT {:.3} (target {:.6}); cone misses on KKT {}; l1 <= {:.3} in {:.3}; proof variant l1 <= {:.3} in {:.3}; unconverged {}",
            rep.kkt.freq,
            rep.kkt_probability,
            rep.cone_violations_on_kkt,
            rep.bounds.l1,
            rep.l1_within.freq,
            rep.bounds.proof_l1,
            rep.l1_within_proof.freq,
            rep.unconverged
        ),
    );
    assert!(pass);
}

#[test]
fn c08_poisson_lasso() {
    let started = Instant::now();
    let cfg = PoissonSimConfig { n: 500, p: 200, s: 3, l: 1.0, b: 1.0, a: 2.0, reps: 300, seed: SEED, k: 0.5, tol: 1e-8, max_iter: 100_000 };
    let rep = hdreg::simulate_poisson(&cfg, 1).unwrap();
    let l1_ok = rep.l1_within.freq >= rep.probability - 3.0 * rep.l1_within.se;
    let radius_ok = rep.radius_violations_on_kkt == 0;
    let pass = l1_ok && radius_ok && rep.unconverged == 0;
    report(
        8,
        "Poisson Lasso",
        pass,
        started,
        &format!(
            "lambda {:.3}; l1 <= {:.1} in {:.3} (target {:.4}); KKT event {:.3}, 4B misses on it {}; l1 median {:.3}",
            rep.lambda,
            rep.l1_bound,
            rep.l1_within.freq,
            rep.probability,
            rep.kkt.freq,
            rep.radius_violations_on_kkt,
            rep.l1_quantiles.q50
        ),
    );
    assert!(pass);
}

fn mc_mean_max(spec: &DistributionSpec, n: usize, reps: u64, stream_base: u64, center: bool) -> (f64, f64) {
    let mu = if center { spec.mean() } else { 0.0 };
    let vals: Vec<f64> = (0..reps)
        .map(|k| {
            let xs = spec.sample(RngStream::new(SEED, stream_base + k), n).unwrap();
            xs.iter().map(|x| x - mu).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let m = vals.iter().sum::<f64>() / reps as f64;
    let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
    (m, (v / reps as f64).sqrt())
}

#[test]
fn c09_maximal_inequalities() {
    let started = Instant::now();
    let n = 10_000;
    let (g_mean, g_se) = mc_mean_max(&DistributionSpec::gaussian(0.0, 1.0), n, 400, 0, false);
    let g_bound = maxima::subg_max_expect(1.0, n).unwrap().0;
    // centered gamma(2, 1) is sub-Gamma with v = 2, c = 1 on the right
    let (ga_mean, ga_se) = mc_mean_max(&DistributionSpec::gamma(2.0, 1.0), 1000, 400, 1000, true);
    let ga_bound = maxima::subgamma_max_expect(2.0, 1.0, 1000).unwrap();
    // Weibull with P(X > x) = e^{-x^{1/2}}: ψ_{1/2} norm (2/1)^2 = 4
    let wb = DistributionSpec::weibull(1.0, 0.5);
    let norm = psi_norm(&wb, &OrliczSpec::Psi(0.5), 1e-10).unwrap().value;
    let (wb_mean, wb_se) = mc_mean_max(&wb, 1000, 400, 2000, false);
    let wb_bound = maxima::orlicz_max_expect(&[norm], &OrliczSpec::Psi(0.5), 1000.0).unwrap();
    let pass = g_mean <= g_bound + 3.0 * g_se && ga_mean <= ga_bound + 3.0 * ga_se && wb_mean <= wb_bound + 3.0 * wb_se;
    report(
        9,
        "maximal inequalities",
        pass,
        started,
        &format!(
            "gaussian {g_mean:.3} <= {g_bound:.3}; gamma {ga_mean:.3} <= {ga_bound:.3}; weibull {wb_mean:.1} <= {wb_bound:.1}"
        ),
    );
    assert!(pass);
}
