//! `tailcert`: evaluate concentration bounds, solve Orlicz norms and run
//! Monte-Carlo certifications from the command line.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use tailcert::bounds::BoundFamily;
use tailcert::hdreg::{self, Design, LassoSimConfig, OlsSimConfig, PoissonSimConfig};
use tailcert::maxima::{self, MaxModel};
use tailcert::mc::{self, CoverageReport, Experiment, ModelSpec};
use tailcert::norms::{psi_norm, psi_norm_centered, OrliczSpec};
use tailcert::{catalog, quadform, DenseMatrix, DistributionSpec, RngStream, TailBound};

#[derive(Parser)]
#[command(name = "tailcert", version, about = "Concentration bounds with explicit constants, checked by simulation")]
struct Cli {
    /// Master seed for every simulation.
    #[arg(long, global = true, default_value_t = mc::default_seed())]
    seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate or invert a tail bound.
    Bound {
        #[command(subcommand)]
        op: BoundOp,
    },
    /// Orlicz ψ_θ norm of a distribution.
    Norm(NormArgs),
    /// Check bounds against simulation.
    Verify(VerifyArgs),
    /// Bounds on maxima of n variables.
    Maxima {
        #[command(subcommand)]
        op: MaximaOp,
    },
    /// Quadratic forms and sample-covariance eigenvalues.
    Matrix {
        #[command(subcommand)]
        op: MatrixOp,
    },
    /// High-dimensional regression simulations.
    Hdreg {
        #[command(subcommand)]
        op: HdregOp,
    },
    /// List every bound family with an example and its canonical model.
    Catalog,
}

#[derive(Args)]
struct FamilyArgs {
    /// Family tag, e.g. `hoeffding`.
    #[arg(long)]
    family: String,
    /// Parameters as JSON, inline or a file path.
    #[arg(long, default_value = "{}")]
    params: String,
}

#[derive(Subcommand)]
enum BoundOp {
    /// Bound values on a grid of thresholds.
    Eval {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated thresholds; defaults to the bound's own 8-point grid.
        #[arg(long, value_delimiter = ',')]
        t: Option<Vec<f64>>,
    },
    /// Smallest threshold at which the bound drops to each δ.
    Radius {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
    },
}

#[derive(Args)]
struct NormArgs {
    /// Distribution as JSON, e.g. `{"family":"poisson","params":{"lambda":1}}`.
    #[arg(long)]
    dist: String,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    /// Norm of `X - EX` instead of `X`.
    #[arg(long)]
    centered: bool,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Experiment JSON with `bound`, `model`, `replications` and optionally `t_grid`, `seed`.
    #[arg(long, conflicts_with = "catalog")]
    experiment: Option<String>,
    /// Certify every catalog family on its canonical model.
    #[arg(long)]
    catalog: bool,
    /// Compare against `shrink × bound`; values below 1 should be rejected.
    #[arg(long, default_value_t = 1.0)]
    shrink: f64,
    /// Replications per family for `--catalog`.
    #[arg(long, default_value_t = 100_000)]
    replications: usize,
}

#[derive(Subcommand)]
enum MaximaOp {
    /// Bound on `E max X_i` for a tail class: `{"n": .., "class": {..}}`.
    Expect {
        #[arg(long)]
        params: String,
    },
    /// Sub-Gaussian maximal tail: `{"sigma": .., "n": .., "t": [..]}`.
    Tail {
        #[arg(long)]
        params: String,
    },
}

#[derive(Subcommand)]
enum MatrixOp {
    /// Hanson-Wright bounds on a grid of deviations.
    Hw {
        #[arg(long)]
        params: String,
    },
    /// Gaussian chaos thresholds.
    Chaos {
        #[arg(long)]
        params: String,
    },
    /// Quadratic forms of sub-Gaussian vectors.
    Quadform {
        #[arg(long)]
        params: String,
    },
    /// Non-asymptotic extreme-eigenvalue window, optionally with simulated spectra.
    Baiyin {
        #[arg(long)]
        params: String,
    },
}

#[derive(Subcommand)]
enum HdregOp {
    Simulate(SimArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegFamily {
    Gaussian,
    Poisson,
    Ols,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum)]
    family: RegFamily,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Tuning constant of λ.
    #[arg(long = "A", default_value_t = 8.0)]
    a: f64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Covariate bound for the Poisson design.
    #[arg(long = "L", default_value_t = 1.0)]
    l: f64,
    /// ℓ1 radius of the Poisson coefficients.
    #[arg(long = "B", default_value_t = 1.0)]
    b: f64,
    /// Stabil constant for the Poisson bound.
    #[arg(long, default_value_t = 0.5)]
    k: f64,
    /// Restricted eigenvalue for the Lasso bound.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// AR(1) correlation between columns; 0 gives an i.i.d. design.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long)]
    no_normalize: bool,
    /// Exponent of the OLS prediction tail.
    #[arg(long, default_value_t = 3.0)]
    t: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Rejected(String),
}

impl From<tailcert::Error> for Failure {
    fn from(e: tailcert::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

struct Output {
    json: Value,
    csv: String,
    default: Format,
    rejected: Option<String>,
}

impl Output {
    fn table(json: Value, csv: String) -> Self {
        Output { json, csv, default: Format::Csv, rejected: None }
    }
    fn with_default(mut self, f: Format) -> Self {
        self.default = f;
        self
    }
}

fn load(arg: &str) -> Outcome<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("cannot read `{arg}`: {e}")))
}

fn parse<T: DeserializeOwned>(what: &str, text: &str) -> Outcome<T> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let msg = full.split(" at line ").next().unwrap_or(&full);
        Failure::Usage(format!("{what}: malformed JSON at line {}, column {}: {msg}", e.line(), e.column()))
    })
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn bound_from(args: &FamilyArgs) -> Outcome<TailBound> {
    let params: Value = parse("--params", &load(&args.params)?)?;
    let doc = json!({ "family": args.family, "params": params });
    let family: BoundFamily = parse("bound", &doc.to_string())?;
    Ok(TailBound::new(family)?)
}

fn bound_cmd(op: BoundOp) -> Outcome<Output> {
    match op {
        BoundOp::Eval { family, t } => {
            let b = bound_from(&family)?;
            let grid = match t {
                Some(t) => t,
                None => mc::default_grid(&b)?,
            };
            let mut rows = Vec::new();
            for &t in &grid {
                rows.push((t, b.raw(t)?, b.evaluate(t)?));
            }
            let json = json!({
                "family": b.tag(),
                "side": b.side(),
                "anchor": b.cite(),
                "rows": rows.iter().map(|(t, r, c)| json!({"t": t, "raw": r, "clamped": c})).collect::<Vec<_>>(),
            });
            let table = csv("t,raw,clamped", rows.iter().map(|(t, r, c)| vec![t.to_string(), r.to_string(), c.to_string()]));
            Ok(Output::table(json, table))
        }
        BoundOp::Radius { family, delta } => {
            let b = bound_from(&family)?;
            let mut rows = Vec::new();
            for &d in &delta {
                rows.push((d, b.radius(d)?));
            }
            let json = json!({
                "family": b.tag(),
                "rows": rows.iter().map(|(d, t)| json!({"delta": d, "t": t})).collect::<Vec<_>>(),
            });
            Ok(Output::table(json, csv("delta,t", rows.iter().map(|(d, t)| vec![d.to_string(), t.to_string()]))))
        }
    }
}

fn norm_cmd(args: NormArgs) -> Outcome<Output> {
    let spec: DistributionSpec = parse("--dist", &load(&args.dist)?)?;
    let g = OrliczSpec::Psi(args.theta);
    let est = if args.centered { psi_norm_centered(&spec, &g, args.tolerance)? } else { psi_norm(&spec, &g, args.tolerance)? };
    let json = to_json(&est);
    let table = csv(
        "value,method,tolerance,samples_used",
        [vec![
            est.value.to_string(),
            json["method"].as_str().unwrap_or_default().to_string(),
            est.tolerance.to_string(),
            est.samples_used.to_string(),
        ]],
    );
    Ok(Output::table(json, table).with_default(Format::Json))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyDoc {
    bound: BoundFamily,
    model: ModelSpec,
    #[serde(default)]
    t_grid: Option<Vec<f64>>,
    replications: usize,
    #[serde(default)]
    seed: Option<u64>,
}

fn reports_csv(reports: &[&CoverageReport]) -> String {
    let mut s = String::from("family,model,t,bound,exceedances,empirical_freq,binomial_upper_conf,binomial_lower_conf,verdict\n");
    for r in reports {
        for row in &r.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.family,
                r.model,
                row.t,
                row.bound,
                row.exceedances,
                row.empirical_freq,
                row.binomial_upper_conf,
                row.binomial_lower_conf,
                if row.pass { "pass" } else { "fail" }
            );
        }
    }
    s
}

fn verify_cmd(args: VerifyArgs, seed: u64, threads: usize) -> Outcome<Output> {
    let reports: Vec<CoverageReport> = if args.catalog {
        catalog::certify_all(args.replications, seed, args.shrink, threads)?
            .into_iter()
            .map(|(plain, control)| if args.shrink == 1.0 { plain } else { control })
            .collect()
    } else {
        let Some(doc) = args.experiment else {
            return Err(Failure::Usage("verify needs --experiment <json> or --catalog".into()));
        };
        let doc: VerifyDoc = parse("--experiment", &load(&doc)?)?;
        let bound = TailBound::new(doc.bound)?;
        let t_grid = match doc.t_grid {
            Some(g) => g,
            None => mc::default_grid(&bound)?,
        };
        let exp = Experiment { model: doc.model, t_grid, replications: doc.replications, seed: doc.seed.unwrap_or(seed) };
        exp.validate()?;
        vec![mc::falsify(&exp, &bound, args.shrink, threads)?]
    };
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.family.clone()).collect();
    let json = if reports.len() == 1 && !args.catalog { to_json(&reports[0]) } else { to_json(&reports) };
    let table = reports_csv(&reports.iter().collect::<Vec<_>>());
    let mut out = Output::table(json, table).with_default(Format::Json);
    if !failed.is_empty() {
        out.rejected = Some(format!("bound exceeded by simulation for: {}", failed.join(", ")));
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaxTailParams {
    sigma: f64,
    n: usize,
    t: Vec<f64>,
}

fn maxima_cmd(op: MaximaOp) -> Outcome<Output> {
    match op {
        MaximaOp::Expect { params } => {
            let m: MaxModel = parse("--params", &load(&params)?)?;
            let v = m.expect()?;
            let json = json!({ "n": m.n, "class": m.class, "bound": v });
            Ok(Output::table(json, csv("n,bound", [vec![m.n.to_string(), v.to_string()]])))
        }
        MaximaOp::Tail { params } => {
            let p: MaxTailParams = parse("--params", &load(&params)?)?;
            let mut rows = Vec::new();
            for &t in &p.t {
                let (plain, abs) = maxima::subg_max_tail(p.sigma, p.n, t)?;
                rows.push(vec![t, plain, abs]);
            }
            let json = json!({
                "sigma": p.sigma,
                "n": p.n,
                "rows": rows.iter().map(|r| json!({"t": r[0], "max": r[1], "abs_max": r[2]})).collect::<Vec<_>>(),
            });
            let table = csv("t,max,abs_max", rows.iter().map(|r| r.iter().map(f64::to_string).collect()));
            Ok(Output::table(json, table))
        }
    }
}

/// A matrix given inline as rows or as a path to a CSV file.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Rows(DenseMatrix),
    Csv(String),
}

impl MatrixInput {
    fn get(self) -> Outcome<DenseMatrix> {
        match self {
            MatrixInput::Rows(m) => Ok(m),
            MatrixInput::Csv(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read `{path}`: {e}")))?;
                Ok(DenseMatrix::from_csv(&text)?)
            }
        }
    }
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum HwVariant {
    Diagfree,
    Moment,
    Rv,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HwParams {
    variant: HwVariant,
    matrix: MatrixInput,
    #[serde(default)]
    k: Option<f64>,
    #[serde(default)]
    sigma: Option<Vec<f64>>,
    #[serde(default)]
    kappa: Option<f64>,
    #[serde(default)]
    c: Option<f64>,
    t: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChaosParams {
    matrix: MatrixInput,
    sigma: Vec<f64>,
    x: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadParams {
    matrix: MatrixInput,
    sigma: f64,
    #[serde(default)]
    mu: Option<Vec<f64>>,
    t: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BaiYinParams {
    n: usize,
    p: usize,
    theta: f64,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    reps: usize,
}

fn need<T>(v: Option<T>, name: &str) -> Outcome<T> {
    v.ok_or_else(|| Failure::Usage(format!("missing parameter `{name}`")))
}

fn matrix_cmd(op: MatrixOp, seed: u64) -> Outcome<Output> {
    match op {
        MatrixOp::Hw { params } => {
            let p: HwParams = parse("--params", &load(&params)?)?;
            let matrix = p.matrix.get()?;
            let family = match p.variant {
                HwVariant::Diagfree => BoundFamily::HwDiagfree { matrix, k: need(p.k, "k")? },
                HwVariant::Moment => BoundFamily::HwMoment { matrix, sigma: need(p.sigma, "sigma")?, kappa: need(p.kappa, "kappa")? },
                HwVariant::Rv => BoundFamily::HwRv { matrix, k: need(p.k, "k")?, c: need(p.c, "c")? },
            };
            let b = TailBound::new(family)?;
            let mut rows = Vec::new();
            for &t in &p.t {
                rows.push(vec![t, b.raw(t)?, b.evaluate(t)?]);
            }
            let json = json!({
                "family": b.tag(),
                "certified": b.certified(),
                "rows": rows.iter().map(|r| json!({"t": r[0], "raw": r[1], "clamped": r[2]})).collect::<Vec<_>>(),
            });
            Ok(Output::table(json, csv("t,raw,clamped", rows.iter().map(|r| r.iter().map(f64::to_string).collect()))))
        }
        MatrixOp::Chaos { params } => {
            let p: ChaosParams = parse("--params", &load(&params)?)?;
            let a = p.matrix.get()?;
            let mut rows = Vec::new();
            for &x in &p.x {
                let (thr, pr) = quadform::gaussian_chaos(&a, &p.sigma, x)?;
                rows.push(vec![x, thr, pr]);
            }
            let json = json!({ "rows": rows.iter().map(|r| json!({"x": r[0], "threshold": r[1], "prob": r[2]})).collect::<Vec<_>>() });
            Ok(Output::table(json, csv("x,threshold,prob", rows.iter().map(|r| r.iter().map(f64::to_string).collect()))))
        }
        MatrixOp::Quadform { params } => {
            let p: QuadParams = parse("--params", &load(&params)?)?;
            let a = p.matrix.get()?;
            let mu = p.mu.unwrap_or_else(|| vec![0.0; a.cols()]);
            let mut rows = Vec::new();
            for &t in &p.t {
                let (thr, pr) = quadform::subg_vector_quadratic(&a, p.sigma, &mu, t)?;
                rows.push(vec![t, thr, pr]);
            }
            let json = json!({ "rows": rows.iter().map(|r| json!({"t": r[0], "threshold": r[1], "prob": r[2]})).collect::<Vec<_>>() });
            Ok(Output::table(json, csv("t,threshold,prob", rows.iter().map(|r| r.iter().map(f64::to_string).collect()))))
        }
        MatrixOp::Baiyin { params } => {
            let p: BaiYinParams = parse("--params", &load(&params)?)?;
            let (nf, pf) = (p.n as f64, p.p as f64);
            let c = p.c.unwrap_or(2.0 * nf * 9f64.ln() / pf);
            let fp = quadform::baiyin_nonasymptotic(p.n, p.p, p.theta, c)?;
            let edges = quadform::baiyin_edges(1.0, pf / nf)?;
            let mut sims = Vec::new();
            for k in 0..p.reps {
                let x = DenseMatrix::gaussian(p.n, p.p, RngStream::new(seed, k as u64));
                sims.push(quadform::sample_cov_extreme(&x)?);
            }
            let json = json!({
                "n": p.n,
                "p": p.p,
                "c": c,
                "fixed_point": fp,
                "edges": edges,
                "simulated": sims.iter().map(|(lo, hi)| json!({"lambda_min": lo, "lambda_max": hi})).collect::<Vec<_>>(),
            });
            let table = csv(
                "rep,lambda_min,lambda_max",
                sims.iter().enumerate().map(|(k, (lo, hi))| vec![k.to_string(), lo.to_string(), hi.to_string()]),
            );
            Ok(Output::table(json, table).with_default(Format::Json))
        }
    }
}

fn hdreg_cmd(op: HdregOp, seed: u64, threads: usize) -> Outcome<Output> {
    let HdregOp::Simulate(a) = op;
    let out = match a.family {
        RegFamily::Gaussian => {
            let cfg = LassoSimConfig {
                n: a.n,
                p: a.p,
                s: a.s,
                sigma: a.sigma,
                a: a.a,
                reps: a.reps,
                seed,
                design: if a.rho == 0.0 { Design::IidGaussian } else { Design::Toeplitz { rho: a.rho } },
                column_normalize: !a.no_normalize,
                gamma: a.gamma,
                tol: 1e-8,
                max_iter: 100_000,
            };
            let r = hdreg::simulate_lasso(&cfg, threads)?;
            let table = csv(
                "rep,kkt_event,cone,l1,l2sq,pred,converged",
                r.reps.iter().enumerate().map(|(k, x)| {
                    vec![
                        k.to_string(),
                        x.kkt_event.to_string(),
                        x.cone.to_string(),
                        x.l1.to_string(),
                        x.l2sq.to_string(),
                        x.pred.to_string(),
                        x.converged.to_string(),
                    ]
                }),
            );
            Output::table(to_json(&r), table)
        }
        RegFamily::Poisson => {
            let cfg = PoissonSimConfig {
                n: a.n,
                p: a.p,
                s: a.s,
                l: a.l,
                b: a.b,
                a: a.a,
                reps: a.reps,
                seed,
                k: a.k,
                tol: 1e-8,
                max_iter: 100_000,
            };
            let r = hdreg::simulate_poisson(&cfg, threads)?;
            let table = csv(
                "rep,kkt_event,l1,converged",
                r.reps
                    .iter()
                    .enumerate()
                    .map(|(k, x)| vec![k.to_string(), x.kkt_event.to_string(), x.l1.to_string(), x.converged.to_string()]),
            );
            Output::table(to_json(&r), table)
        }
        RegFamily::Ols => {
            let cfg = OlsSimConfig { n: a.n, p: a.p, sigma: a.sigma, reps: a.reps, seed, t: a.t };
            let r = hdreg::simulate_ols(&cfg, threads)?;
            let table = csv("rep,risk", r.risks.iter().enumerate().map(|(k, x)| vec![k.to_string(), x.to_string()]));
            Output::table(to_json(&r), table)
        }
    };
    Ok(out.with_default(Format::Json))
}

fn catalog_cmd() -> Outcome<Output> {
    let entries = catalog::catalog()?;
    let table = csv(
        "family,certified,side,statistic,anchor",
        entries.iter().map(|e| {
            vec![
                e.family.clone(),
                e.certified.to_string(),
                to_json(&e.side).as_str().unwrap_or_default().to_string(),
                to_json(&e.statistic).as_str().unwrap_or_default().to_string(),
                format!("\"{}\"", e.anchor),
            ]
        }),
    );
    Ok(Output::table(to_json(&entries), table).with_default(Format::Json))
}

fn dispatch(cli: Cli) -> Outcome<()> {
    let threads = if cli.threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { cli.threads };
    let out = match cli.command {
        Command::Bound { op } => bound_cmd(op)?,
        Command::Norm(args) => norm_cmd(args)?,
        Command::Verify(args) => verify_cmd(args, cli.seed, threads)?,
        Command::Maxima { op } => maxima_cmd(op)?,
        Command::Matrix { op } => matrix_cmd(op, cli.seed)?,
        Command::Hdreg { op } => hdreg_cmd(op, cli.seed, threads)?,
        Command::Catalog => catalog_cmd()?,
    };
    let text = match cli.format.unwrap_or(out.default) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => out.csv,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write `{}`: {e}", path.display())))?,
        None => print!("{text}"),
    }
    match out.rejected {
        Some(msg) => Err(Failure::Rejected(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("certification failed: {msg}");
            ExitCode::from(2)
        }
    }
}
