//! Benchmark fixtures shared by the criterion targets.
use tailcert::catalog::{self, CatalogEntry};
use tailcert::hdreg::{self, Design, RegressionInstance};
use tailcert::{Experiment, RngStream, TailBound};

pub const SEED: u64 = 0xBE7C;

/// A column-normalized sparse Gaussian design at the acceptance scale.
pub fn lasso_instance(n: usize, p: usize, s: usize) -> RegressionInstance {
    hdreg::gen_linear(n, p, s, 1.0, Design::IidGaussian, true, RngStream::new(SEED, 0)).expect("valid sizes")
}

pub fn poisson_instance(n: usize, p: usize, s: usize) -> RegressionInstance {
    hdreg::gen_poisson(n, p, s, 1.0, 1.0, RngStream::new(SEED, 1)).expect("valid sizes")
}

/// Every catalog bound built from its example parameters.
pub fn catalog_bounds() -> Vec<TailBound> {
    catalog::catalog()
        .expect("catalog builds")
        .into_iter()
        .map(|e| TailBound::new(e.example).expect("example params validate"))
        .collect()
}

/// First certified catalog entry whose family name matches.
pub fn catalog_experiment(family: &str, replications: usize) -> (Experiment, TailBound) {
    let entry: CatalogEntry = catalog::catalog()
        .expect("catalog builds")
        .into_iter()
        .find(|e| e.family == family)
        .unwrap_or_else(|| panic!("no catalog entry {family}"));
    catalog::experiment(&entry, replications, SEED).expect("experiment builds").expect("entry is certified")
}
