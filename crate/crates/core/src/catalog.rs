//! Every bound family with example parameters, a short anchor naming the
//! result it implements, and, for certified families, a canonical model on
//! which the bound must hold.

use serde::Serialize;

use crate::bounds::{BoundFamily, Side, Statistic, TailBound};
use crate::dist::DistributionSpec;
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::mc::{default_grid, run_with_control, CoverageReport, Experiment, LipschitzKind, ModelSpec};
use crate::norms::{gbo_function, psi_norm, OrliczSpec};
use crate::numeric::bisect_increasing;
use crate::rng::RngStream;

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub family: String,
    pub anchor: &'static str,
    pub certified: bool,
    pub side: Side,
    pub statistic: Statistic,
    pub parameters: Vec<String>,
    pub example: BoundFamily,
    pub model: Option<ModelSpec>,
}

/// The result each family implements.
pub fn anchor(tag: &str) -> &'static str {
    match tag {
        "markov" => "Markov's inequality",
        "chebyshev" => "Chebyshev's inequality",
        "chernoff" => "Chernoff's bound via the moment generating function",
        "hoeffding" => "Hoeffding's inequality",
        "mcdiarmid" => "McDiarmid's bounded-difference inequality",
        "mills_upper" => "Mills' ratio upper bound for the Gaussian tail",
        "mills_sharp" => "Sharp two-sided Gaussian tail bound",
        "subg_tail" => "Sub-Gaussian tail bound",
        "subg_sum" => "Concentration for weighted sums of sub-Gaussian variables (variance proxy form)",
        "subg_sum_psi2" => "Concentration for weighted sums of sub-Gaussian variables (psi2 norm form)",
        "ef_subg_sum" => "Sub-Gaussian concentration for exponential-family sums with bounded variance",
        "ef_random_weight_sum" => "Exponential-family sums with bounded random weights",
        "lipschitz_gaussian" => "Gaussian concentration for Lipschitz functions",
        "lipschitz_logconcave" => "Concentration for Lipschitz functions of strongly log-concave vectors",
        "lipschitz_sepconvex" => "Concentration for separately convex Lipschitz functions of bounded variables",
        "sub_e_sum" => "Concentration for weighted sums of sub-exponential variables",
        "sub_e_mean" => "Two-regime bound for means of sub-exponential variables",
        "psi1_sum" => "Bernstein-type inequality for sums of psi1 variables",
        "psi_theta_tail" => "Tail bound from the psi_theta Orlicz norm",
        "subgamma_tail" => "Sub-Gamma tail bound",
        "subgamma_sum" => "Concentration for sums of sub-Gamma variables",
        "bernstein_bounded" => "Bernstein's inequality for bounded variables",
        "bernstein_moment" => "Bernstein's inequality under the growth of moments condition",
        "ef_bernstein" => "Bernstein-type concentration for exponential-family sums",
        "poisson_sum" => "Concentration for weighted Poisson sums",
        "gbo_tail" => "Tail bound from the generalized Bernstein-Orlicz norm",
        "subweibull_sum" => "Concentration for weighted sums of sub-Weibull variables",
        "dkw" => "Dvoretzky-Kiefer-Wolfowitz inequality",
        "gaussian_chaos" => "Gaussian chaos of order 2",
        "hw_diagfree" => "Diagonal-free Hanson-Wright inequality",
        "hw_moment" => "Quadratic forms concentration with moment conditions",
        "hw_rv" => "Hanson-Wright inequality with an unspecified constant",
        "subg_vector_quadratic" => "Tail inequality for quadratic forms of sub-Gaussian vectors",
        "subweibull_quadratic" => "Concentration for quadratic forms of sub-Weibull variables",
        "subg_max_tail" => "Sub-Gaussian maximal inequality",
        "ols_prediction_tail" => "Prediction-error tail of least squares",
        _ => "",
    }
}

/// GBO norm of `spec` from `E Ψ(|X|/η) = 1` by quadrature.
pub fn gbo_norm_exact(spec: &DistributionSpec, theta: f64, l: f64) -> Result<f64> {
    let excess = |eta: f64| -> f64 {
        match spec.expect(|x| gbo_function(theta, l, x.abs() / eta, 1e-13), 0.0, 1e-12) {
            Ok(v) if v.is_finite() => 1.0 - v,
            _ => -1.0,
        }
    };
    let mut hi = 1.0;
    while excess(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while excess(lo) > 0.0 {
        lo /= 2.0;
    }
    bisect_increasing(excess, lo, hi, 1e-12)
}

fn sum(spec: DistributionSpec, weights: Vec<f64>) -> Option<ModelSpec> {
    Some(ModelSpec::WeightedSum { spec, weights, random_weights: None })
}

fn psi(spec: &DistributionSpec, theta: f64) -> f64 {
    psi_norm(spec, &OrliczSpec::Psi(theta), 1e-12).expect("closed-form norm").value
}

/// Catalog entries; the example parameters double as the canonical
/// certification setting.
pub fn catalog() -> Result<Vec<CatalogEntry>> {
    use BoundFamily as F;
    let gauss = DistributionSpec::gaussian(0.0, 1.0);
    let rad = DistributionSpec::rademacher(1.0);
    let ln2 = std::f64::consts::LN_2;

    let chaos_a = DenseMatrix::from_rows(&[
        vec![2.0, 1.0, 0.0, 0.0, 0.0],
        vec![1.0, 1.0, 0.5, 0.0, 0.0],
        vec![0.0, 0.5, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, -1.0, 1.0, 0.3],
        vec![0.0, 0.0, 0.0, 0.3, -0.5],
    ])?;
    let chaos_sigma = vec![1.0, 0.5, 1.0, 2.0, 1.0];
    let mut hw_a = DenseMatrix::zeros(6, 6);
    for i in 0..5 {
        hw_a.set(i, i + 1, 1.0);
        hw_a.set(i + 1, i, 1.0);
    }
    hw_a.set(0, 5, -0.5);
    hw_a.set(5, 0, -0.5);
    let hsu_a = DenseMatrix::gaussian(5, 50, RngStream::new(17, 0)).scale(1.0 / 50f64.sqrt());
    let design = DenseMatrix::gaussian(50, 5, RngStream::new(17, 1));
    let dl = DistributionSpec::discrete_laplace(0.5);
    let dl_psi1 = psi(&dl, 1.0);

    let mut entries: Vec<(BoundFamily, Option<ModelSpec>)> = vec![
        (F::Markov { mean_abs: 1.0 }, Some(ModelSpec::AbsValue { spec: DistributionSpec::exponential(1.0) })),
        (F::Chebyshev { variance: 1.0 }, sum(gauss.clone(), vec![1.0])),
        (
            F::Chernoff { spec: DistributionSpec::exponential(1.0), n: 5 },
            sum(DistributionSpec::exponential(1.0), vec![1.0; 5]),
        ),
        (
            F::Hoeffding { intervals: vec![[0.0, 0.02]; 50] },
            sum(DistributionSpec::bernoulli(0.3), vec![0.02; 50]),
        ),
        (F::Mcdiarmid { c: vec![4.0 / 20.0; 20] }, Some(ModelSpec::UStatistic { n: 20 })),
        (F::MillsUpper {}, sum(gauss.clone(), vec![1.0])),
        (F::MillsSharp {}, sum(gauss.clone(), vec![1.0])),
        (F::SubgTail { sigma2: 1.0 }, sum(DistributionSpec::uniform(-1.0, 1.0), vec![1.0])),
        (
            F::SubgSum { sigma2: vec![1.0; 10], weights: (1..=10).map(|i| f64::from(i) / 10.0).collect() },
            sum(rad.clone(), (1..=10).map(|i| f64::from(i) / 10.0).collect()),
        ),
        (
            F::SubgSumPsi2 { norms: vec![1.0 / ln2.sqrt(); 10], weights: vec![1.0; 10] },
            sum(rad.clone(), vec![1.0; 10]),
        ),
        (F::EfSubgSum { c_b: 0.5, weights: vec![1.0; 20] }, sum(DistributionSpec::bernoulli(0.2), vec![1.0; 20])),
        (
            F::EfRandomWeightSum { c_b: 0.5, envelope: vec![1.0; 20] },
            Some(ModelSpec::WeightedSum {
                spec: DistributionSpec::bernoulli(0.5),
                weights: vec![1.0; 20],
                random_weights: Some(DistributionSpec::uniform(-1.0, 1.0)),
            }),
        ),
        (
            F::LipschitzGaussian { lipschitz: 1.0 },
            Some(ModelSpec::Lipschitz { kind: LipschitzKind::GaussianNorm, n: 10, gamma: 1.0 }),
        ),
        (
            F::LipschitzLogconcave { gamma: 2.0, lipschitz: 1.0 },
            Some(ModelSpec::Lipschitz { kind: LipschitzKind::GaussianNorm, n: 10, gamma: 2.0 }),
        ),
        (
            F::LipschitzSepconvex { lipschitz: 1.0, a: 0.0, b: 1.0 },
            Some(ModelSpec::Lipschitz { kind: LipschitzKind::UniformMax, n: 10, gamma: 1.0 }),
        ),
        (
            F::SubESum { lambdas: vec![2.0; 10], weights: vec![1.0; 10] },
            sum(DistributionSpec::exponential(1.0), vec![1.0; 10]),
        ),
        (
            F::SubEMean { lambdas: vec![2.0; 10], alphas: vec![4.0; 10] },
            sum(DistributionSpec::chi_square(1.0), vec![0.1; 10]),
        ),
        (F::Psi1Sum { norms: vec![dl_psi1; 10], weights: vec![1.0; 10] }, sum(dl.clone(), vec![1.0; 10])),
        (
            F::PsiThetaTail { norm: (8.0f64 / 3.0).sqrt(), theta: 2.0 },
            Some(ModelSpec::AbsValue { spec: gauss.clone() }),
        ),
        (
            F::SubgammaTail { v: 2.0, c: 1.0, side: Side::TwoSided, relaxed: false },
            sum(DistributionSpec::gamma(2.0, 1.0), vec![1.0]),
        ),
        (F::SubgammaSum { v: vec![2.0; 10], c: vec![1.0; 10] }, sum(DistributionSpec::gamma(2.0, 1.0), vec![1.0; 10])),
        (
            F::BernsteinBounded { variances: vec![0.09; 30], m: 0.9 },
            sum(DistributionSpec::bernoulli(0.1), vec![1.0; 30]),
        ),
        (
            F::BernsteinMoment { v: vec![2f64.sqrt(); 10], kappa: vec![1.0; 10] },
            sum(DistributionSpec::exponential(1.0), vec![1.0; 10]),
        ),
        (
            F::EfBernstein { specs: vec![DistributionSpec::poisson(1.0); 10], weights: vec![1.0; 10], r_max: 50.0 },
            sum(DistributionSpec::poisson(1.0), vec![1.0; 10]),
        ),
        (F::PoissonSum { lambdas: vec![1.0; 10], weights: vec![1.0; 10] }, sum(DistributionSpec::poisson(1.0), vec![1.0; 10])),
        (
            F::GboTail { norm: gbo_norm_exact(&gauss, 1.0, 1.0)?, theta: 1.0, l: 1.0 },
            Some(ModelSpec::AbsValue { spec: gauss.clone() }),
        ),
        (
            F::SubweibullSum { norms: vec![dl_psi1; 10], weights: vec![1.0; 10], theta: 1.0 },
            sum(dl.clone(), vec![1.0; 10]),
        ),
        (F::Dkw { n: 100 }, Some(ModelSpec::SupEdf { n: 100 })),
        (
            F::GaussianChaos { matrix: chaos_a.clone(), sigma: chaos_sigma.clone() },
            Some(ModelSpec::QuadraticForm { spec: gauss.clone(), matrix: chaos_a.clone(), scales: chaos_sigma }),
        ),
        (
            F::HwDiagfree { matrix: hw_a.clone(), k: 1.0 / ln2.sqrt() },
            Some(ModelSpec::QuadraticForm { spec: rad.clone(), matrix: hw_a.clone(), scales: vec![1.0; 6] }),
        ),
        (
            F::HwMoment { matrix: DenseMatrix::identity(10).scale(0.01), sigma: vec![2f64.sqrt(); 10], kappa: 2f64.sqrt() },
            Some(ModelSpec::QuadraticForm {
                spec: gauss.clone(),
                matrix: DenseMatrix::identity(10).scale(0.01),
                scales: vec![1.0; 10],
            }),
        ),
        (F::HwRv { matrix: hw_a.clone(), k: 1.0 / ln2.sqrt(), c: 0.1 }, None),
        (
            F::SubgVectorQuadratic { matrix: hsu_a.clone(), sigma: 1.0, mu: vec![0.0; 50] },
            Some(ModelSpec::SquaredNorm { spec: gauss.clone(), matrix: hsu_a }),
        ),
        (F::SubweibullQuadratic { matrix: chaos_a, m: 1.0, q: 1, c: 1.0 }, None),
        (
            F::SubgMaxTail { sigma: 1.0, n: 20, absolute: false },
            Some(ModelSpec::Max { spec: gauss.clone(), n: 20, absolute: false }),
        ),
        (
            F::OlsPredictionTail { n: 50, p: 5, sigma: 1.0 },
            Some(ModelSpec::OlsRisk { design, sigma: 1.0 }),
        ),
    ];

    let mut out = Vec::with_capacity(entries.len());
    for (family, model) in entries.drain(..) {
        let b = TailBound::new(family.clone())?;
        let json = serde_json::to_value(&family).map_err(|e| crate::Error::Invalid(e.to_string()))?;
        let parameters = json
            .get("params")
            .and_then(|p| p.as_object())
            .map(|o| o.keys().cloned().collect())
            .unwrap_or_default();
        out.push(CatalogEntry {
            family: b.tag(),
            anchor: anchor(&b.tag()),
            certified: b.certified() && model.is_some(),
            side: b.side(),
            statistic: b.statistic(),
            parameters,
            example: family,
            model,
        });
    }
    Ok(out)
}

/// The experiment used to certify a catalog entry.
pub fn experiment(entry: &CatalogEntry, replications: usize, seed: u64) -> Result<Option<(Experiment, TailBound)>> {
    let Some(model) = entry.model.clone() else {
        return Ok(None);
    };
    let bound = TailBound::new(entry.example.clone())?;
    let t_grid = default_grid(&bound)?;
    Ok(Some((Experiment { model, t_grid, replications, seed }, bound)))
}

/// Run every certified entry and its shrunken control.
pub fn certify_all(replications: usize, seed: u64, shrink: f64, threads: usize) -> Result<Vec<(CoverageReport, CoverageReport)>> {
    let mut out = Vec::new();
    for e in catalog()?.iter().filter(|e| e.certified) {
        if let Some((exp, bound)) = experiment(e, replications, seed)? {
            out.push(run_with_control(&exp, &bound, shrink, threads)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_size_and_anchors() {
        let c = catalog().unwrap();
        assert!(c.len() >= 25);
        assert!(c.iter().filter(|e| e.certified).count() >= 20);
        assert!(c.iter().all(|e| !e.anchor.is_empty()));
        assert!(c.iter().filter(|e| !e.certified).all(|e| e.family == "hw_rv" || e.family == "subweibull_quadratic"));
    }

    #[test]
    fn examples_round_trip_through_json() {
        for e in catalog().unwrap() {
            let text = serde_json::to_string(&e.example).unwrap();
            let back = TailBound::from_json(&text).unwrap();
            assert_eq!(back.family, e.example, "{}", e.family);
            if let Some(m) = &e.model {
                let t = serde_json::to_string(m).unwrap();
                let m2: ModelSpec = serde_json::from_str(&t).unwrap();
                assert_eq!(&m2, m);
                assert_eq!(m.statistic(), e.statistic, "{}", e.family);
            }
        }
    }

    #[test]
    fn diag_free_matrix_has_large_frobenius_norm() {
        let c = catalog().unwrap();
        let e = c.iter().find(|e| e.family == "hw_diagfree").unwrap();
        if let BoundFamily::HwDiagfree { matrix, .. } = &e.example {
            assert!(matrix.frobenius() > 1.0);
        }
    }

    #[test]
    fn gbo_norm_of_bounded_variable() {
        let (theta, l) = (1.5, 0.7);
        let eta = gbo_norm_exact(&DistributionSpec::rademacher(1.0), theta, l).unwrap();
        let want = 1.0 / (std::f64::consts::LN_2.sqrt() + l * std::f64::consts::LN_2.powf(1.0 / theta));
        assert!((eta - want).abs() < 1e-9 * want);
    }
}
