//! Batch front end: one JSON job in, report files and a manifest out.
//!
//! A job names a command, a kernel spec, an optional quadrature spec and the
//! command's parameters. Every run writes `manifest.json` holding the
//! resolved job, its SHA-256, the seed and the hash of every payload file.
//! Feeding a manifest back in as the config reruns the same job and
//! reproduces the payloads byte for byte.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    default_rule, dominance_trace, finite_rank_difference, rkhs_path_verdict_with, tensor_verdict_with,
    Decision, VerdictOptions, DEFAULT_RIDGE,
};
use crate::error::Error;
use crate::format::{f17, to_json};
use crate::kernels::{Kernel, KernelSpec};
use crate::quadrature::{QuadratureRule, QuadratureSpec};
use crate::sampling::{default_truncation, kl_sample, norm_stats, GENERATOR};
use crate::spectral::{power_kernel, SpectralDecomposition};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status of any failure.
pub const EXIT_ERROR: i32 = 1;
/// Exit status of an `analyze` run that ended `INCONCLUSIVE`.
pub const EXIT_INCONCLUSIVE: i32 = 2;

/// Sample paths written as CSV when `export` is not given.
const DEFAULT_EXPORT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Analyze,
    PowerKernel,
    Sample,
    Dominance,
    RankDiff,
    Tensor,
    ReproduceTable,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Analyze => "analyze",
            Command::PowerKernel => "power-kernel",
            Command::Sample => "sample",
            Command::Dominance => "dominance",
            Command::RankDiff => "rank-diff",
            Command::Tensor => "tensor",
            Command::ReproduceTable => "reproduce-table",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).ok()
    }
}

/// Command parameters; each command reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Truncation `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Sample paths written as CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    /// Second kernel for `dominance` and `rank-diff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<KernelSpec>,
    /// Tensor power for `tensor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Product eigenvalues exported by `tensor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Decay-fit window, 1-based inclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl JobConfig {
    /// Parses a job document, or the `config` member of a manifest.
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("manifest_version") {
            Some(_) => {
                let config = value
                    .get("config")
                    .cloned()
                    .ok_or_else(|| Error::Usage("manifest has no config member".into()))?;
                Ok(serde_json::from_value(config)?)
            }
            None => Ok(serde_json::from_value(value)?),
        }
    }

    /// The job as recorded and hashed: command and seed resolved, output
    /// directory dropped.
    pub fn resolved(&self) -> Result<Self, Error> {
        let command = self
            .command
            .ok_or_else(|| Error::Usage("no command given in the config or on the command line".into()))?;
        let mut out = self.clone();
        out.command = Some(command);
        out.out = None;
        if command == Command::Sample && out.params.seed.is_none() {
            out.params.seed = Some(0);
        }
        Ok(out)
    }
}

/// An error with the operation that raised it.
#[derive(Debug)]
pub struct Failure {
    pub error: Error,
    pub operation: &'static str,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.operation, self.error)
    }
}

impl std::error::Error for Failure {}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: String,
    module: &'a str,
    operation: &'a str,
}

impl Failure {
    fn at(operation: &'static str) -> impl FnOnce(Error) -> Failure {
        move |error| Failure { error, operation }
    }

    /// `{"error", "module", "operation"}` on one line.
    pub fn to_json(&self) -> String {
        let report = ErrorReport {
            error: self.error.to_string(),
            module: self.error.module(),
            operation: self.operation,
        };
        to_json(&report).unwrap_or_else(|_| "{\"error\":\"unprintable error\",\"module\":\"cli\",\"operation\":\"report\"}\n".into())
    }
}

type Step<T> = std::result::Result<T, Failure>;

/// Files written by a run and its exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct FileRecord {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Modules {
    kernels: &'static str,
    quadrature: &'static str,
    spectral: &'static str,
    analysis: &'static str,
    sampling: &'static str,
    cli: &'static str,
    eigensolver: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    tool: &'static str,
    modules: Modules,
    command: &'static str,
    config_sha256: String,
    seed: Option<u64>,
    generator: Option<&'static str>,
    config: &'a JobConfig,
    files: Vec<FileRecord>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Payloads produced by a command, in write order.
struct Payloads {
    files: Vec<(String, String)>,
    exit_code: i32,
}

impl Payloads {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            exit_code: EXIT_OK,
        }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) -> Step<()> {
        let body = to_json(value).map_err(|e| Failure::at("write_report")(e.into()))?;
        self.add(name, body);
        Ok(())
    }
}

/// Runs a job and writes its payloads and manifest into `out_dir`.
pub fn run(config: &JobConfig, out_dir: &Path) -> Step<Outcome> {
    let job = config.resolved().map_err(Failure::at("parse_config"))?;
    let command = job.command.expect("resolved jobs carry a command");
    let payloads = match command {
        Command::Spectrum => spectrum(&job)?,
        Command::Analyze => analyze(&job)?,
        Command::PowerKernel => power(&job)?,
        Command::Sample => sample(&job)?,
        Command::Dominance => dominance(&job)?,
        Command::RankDiff => rank_diff(&job)?,
        Command::Tensor => tensor(&job)?,
        Command::ReproduceTable => reproduce(&job)?,
    };

    let write = Failure::at("write_report");
    fs::create_dir_all(out_dir).map_err(|e| write(e.into()))?;
    let mut files = Vec::new();
    let mut records = Vec::new();
    for (name, body) in &payloads.files {
        let path = out_dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure::at("write_report")(e.into()))?;
        }
        fs::write(&path, body).map_err(|e| Failure::at("write_report")(e.into()))?;
        records.push(FileRecord {
            name: name.clone(),
            sha256: sha256_hex(body.as_bytes()),
        });
        files.push(path);
    }

    let canonical = to_json(&job).map_err(|e| Failure::at("write_report")(e.into()))?;
    let uses_seed = command == Command::Sample;
    let manifest = Manifest {
        manifest_version: 1,
        tool: "rkhs-paths",
        modules: Modules {
            kernels: VERSION,
            quadrature: VERSION,
            spectral: VERSION,
            analysis: VERSION,
            sampling: VERSION,
            cli: VERSION,
            eigensolver: "faer 0.24 self_adjoint_eigen",
        },
        command: command.name(),
        config_sha256: sha256_hex(canonical.as_bytes()),
        seed: if uses_seed { job.params.seed } else { None },
        generator: if uses_seed { Some(GENERATOR) } else { None },
        config: &job,
        files: records,
    };
    let body = to_json(&manifest).map_err(|e| Failure::at("write_report")(e.into()))?;
    let path = out_dir.join("manifest.json");
    fs::write(&path, body).map_err(|e| Failure::at("write_report")(e.into()))?;
    files.push(path);
    Ok(Outcome {
        exit_code: payloads.exit_code,
        files,
    })
}

fn kernel_of(job: &JobConfig) -> Step<Kernel> {
    job.kernel
        .as_ref()
        .ok_or_else(|| Error::Usage("this command needs a kernel spec".into()))
        .and_then(|k| k.build())
        .map_err(Failure::at("build_kernel"))
}

/// The job's quadrature on the kernel's domain, or the default rule. Tensor
/// kernels without explicit bounds get a one-dimensional rule on their first
/// factor's interval.
fn rule_of(job: &JobConfig, kernel: &Kernel) -> Step<QuadratureRule> {
    let at = Failure::at("build_quadrature");
    match &job.quadrature {
        None => default_rule(kernel).map_err(at),
        Some(spec) => {
            let domain = match (kernel.tensor_factors(), &spec.bounds) {
                (Some(f), None) => f[0].domain().clone(),
                _ => kernel.domain().clone(),
            };
            spec.build(&domain).map_err(at)
        }
    }
}

fn decompose_job(job: &JobConfig) -> Step<(Kernel, SpectralDecomposition)> {
    let kernel = kernel_of(job)?;
    if kernel.tensor_factors().is_some() {
        return Err(Failure {
            error: Error::Usage("tensor kernels are decomposed per factor; use the tensor or analyze command".into()),
            operation: "nystrom_decompose",
        });
    }
    let rule = rule_of(job, &kernel)?;
    let decomp = crate::analysis::decompose(&kernel, &rule).map_err(Failure::at("nystrom_decompose"))?;
    Ok((kernel, decomp))
}

fn options_of(job: &JobConfig) -> VerdictOptions {
    VerdictOptions {
        window: job.params.window,
        tensor_budget: job.params.budget.unwrap_or(0),
        ..VerdictOptions::default()
    }
}

fn spectrum(job: &JobConfig) -> Step<Payloads> {
    let (_, decomp) = decompose_job(job)?;
    let mut p = Payloads::new();
    p.add("spectrum.csv", decomp.spectrum_csv());
    Ok(p)
}

fn analyze(job: &JobConfig) -> Step<Payloads> {
    let kernel = kernel_of(job)?;
    let rule = rule_of(job, &kernel)?;
    let verdict = rkhs_path_verdict_with(&kernel, &rule, &options_of(job)).map_err(Failure::at("rkhs_path_verdict"))?;
    let mut p = Payloads::new();
    p.add_json("verdict.json", &verdict)?;
    if verdict.decision == Decision::Inconclusive {
        p.exit_code = EXIT_INCONCLUSIVE;
    }
    Ok(p)
}

#[derive(Serialize)]
struct PowerReport<'a> {
    beta: f64,
    n_terms: usize,
    monitor: &'a crate::spectral::ConvergenceMonitor,
    fraction_converged: f64,
}

fn power(job: &JobConfig) -> Step<Payloads> {
    let (_, decomp) = decompose_job(job)?;
    let beta = job.params.beta.unwrap_or(0.5);
    let n_terms = job.params.n_terms.unwrap_or_else(|| default_truncation(&decomp));
    let pk = power_kernel(&decomp, beta, n_terms).map_err(Failure::at("power_kernel"))?;
    let mut p = Payloads::new();
    p.add_json(
        "power_kernel.json",
        &PowerReport {
            beta,
            n_terms,
            monitor: pk.monitor(),
            fraction_converged: pk.monitor().fraction_converged(),
        },
    )?;
    let rule = decomp.rule();
    let mut csv = String::from(if rule.dim() == 1 { "t,value\n" } else { "node,value\n" });
    for j in 0..rule.len() {
        let t = if rule.dim() == 1 { f17(rule.node(j)[0]) } else { j.to_string() };
        csv.push_str(&format!("{t},{}\n", f17(pk.eval_nodes(j, j))));
    }
    p.add("power_diagonal.csv", csv);
    Ok(p)
}

fn sample(job: &JobConfig) -> Step<Payloads> {
    let (_, decomp) = decompose_job(job)?;
    let n_terms = job.params.n_terms.unwrap_or_else(|| default_truncation(&decomp));
    let seed = job.params.seed.unwrap_or(0);
    let count = job.params.count.unwrap_or(DEFAULT_EXPORT);
    let beta = job.params.beta.unwrap_or(0.5);
    let samples = kl_sample(&decomp, n_terms, seed, count).map_err(Failure::at("kl_sample"))?;
    let stats = norm_stats(&samples, &decomp, beta).map_err(Failure::at("norm_stats"))?;
    let mut p = Payloads::new();
    let export = job.params.export.unwrap_or(DEFAULT_EXPORT).min(count);
    for s in &samples[..export] {
        let csv = s.path_csv(&decomp).map_err(Failure::at("kl_sample"))?;
        p.add(format!("paths/sample_{:05}.csv", s.index), csv);
    }
    p.add_json("norm_stats.json", &stats)?;
    Ok(p)
}

fn second_kernel(job: &JobConfig) -> Step<Kernel> {
    job.params
        .other
        .as_ref()
        .ok_or_else(|| Error::Usage("this command needs params.other, the second kernel".into()))
        .and_then(|k| k.build())
        .map_err(Failure::at("build_kernel"))
}

fn dominance(job: &JobConfig) -> Step<Payloads> {
    let k1 = kernel_of(job)?;
    let k2 = second_kernel(job)?;
    let sizes = job.params.grid_sizes.clone().unwrap_or_else(|| vec![64, 128, 256, 512]);
    let ridge = job.params.ridge.unwrap_or(DEFAULT_RIDGE);
    let report = dominance_trace(&k1, &k2, &sizes, ridge).map_err(Failure::at("dominance_trace"))?;
    let mut p = Payloads::new();
    p.add_json("dominance.json", &report)?;
    Ok(p)
}

fn rank_diff(job: &JobConfig) -> Step<Payloads> {
    let k1 = kernel_of(job)?;
    let k2 = second_kernel(job)?;
    let rule = match &job.quadrature {
        Some(_) => rule_of(job, &k1)?,
        None => {
            let spec = QuadratureSpec {
                scheme: if k1.domain().is_circle() {
                    crate::quadrature::SchemeName::Circle
                } else {
                    crate::quadrature::SchemeName::Gl
                },
                n: 64,
                bounds: None,
            };
            spec.build(k1.domain()).map_err(Failure::at("build_quadrature"))?
        }
    };
    let tol = job.params.tol.unwrap_or(1e-8);
    let report = finite_rank_difference(&k1, &k2, &rule, tol).map_err(Failure::at("finite_rank_difference"))?;
    let mut p = Payloads::new();
    p.add_json("rank.json", &report)?;
    Ok(p)
}

fn tensor(job: &JobConfig) -> Step<Payloads> {
    let kernel = kernel_of(job)?;
    // A tensor power spec is unwrapped to its factor.
    let (factor, d) = match kernel.tensor_factors() {
        Some(f) if f.iter().all(|k| k.same(&f[0])) => (f[0].clone(), f.len()),
        Some(_) => {
            return Err(Failure {
                error: Error::Usage("tensor command needs identical factors; use analyze".into()),
                operation: "tensor_verdict",
            })
        }
        None => (kernel.clone(), job.params.d.unwrap_or(2)),
    };
    let rule = match &job.quadrature {
        Some(spec) => spec.build(factor.domain()).map_err(Failure::at("build_quadrature"))?,
        None => default_rule(&factor).map_err(Failure::at("build_quadrature"))?,
    };
    let decomp = crate::analysis::decompose(&factor, &rule).map_err(Failure::at("nystrom_decompose"))?;
    let budget = job.params.budget.unwrap_or(64);
    let tv = tensor_verdict_with(&decomp, d, budget, &options_of(job)).map_err(Failure::at("tensor_verdict"))?;
    let mut p = Payloads::new();
    p.add_json("verdict.json", &tv.verdict)?;
    let mut csv = String::from("i,mu\n");
    for (i, mu) in tv.products.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, f17(*mu)));
    }
    p.add("products.csv", csv);
    Ok(p)
}

/// One fixture of the reproduction table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureRow {
    pub fixture: String,
    pub expected: Decision,
    pub decision: Option<Decision>,
    pub rho: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `(name, kernel spec, expected decision)` for every reproduced example.
pub fn fixtures() -> Vec<(&'static str, &'static str, Decision)> {
    use Decision::{Exists, NotExists};
    vec![
        ("wiener", r#"{"kind":"wiener"}"#, NotExists),
        ("bridge", r#"{"kind":"bridge"}"#, NotExists),
        ("ou1", r#"{"kind":"ou","variant":1}"#, NotExists),
        ("ou2", r#"{"kind":"ou","variant":2}"#, NotExists),
        ("fbm_0.25", r#"{"kind":"fbm","alpha":0.25}"#, NotExists),
        ("fbm_0.75", r#"{"kind":"fbm","alpha":0.75}"#, Exists),
        ("rl_0.25", r#"{"kind":"rl","alpha":0.25}"#, NotExists),
        ("rl_0.75", r#"{"kind":"rl","alpha":0.75}"#, Exists),
        ("matern_0.25_d1", r#"{"kind":"matern","alpha":0.25}"#, NotExists),
        ("matern_1.5_d1", r#"{"kind":"matern","alpha":1.5}"#, Exists),
        ("matern_0.5_d2", r#"{"kind":"matern","alpha":0.5,"d":2}"#, NotExists),
        ("matern_1.5_d2", r#"{"kind":"matern","alpha":1.5,"d":2}"#, Exists),
        ("circle_n^-1.5", r#"{"kind":"circle","power":1.5}"#, NotExists),
        ("circle_n^-4", r#"{"kind":"circle","power":4}"#, Exists),
        ("tensor_matern_1.5_d2", r#"{"kind":"tensor","factor":{"kind":"matern","alpha":1.5},"d":2}"#, Exists),
        ("tensor_matern_1.5_d5", r#"{"kind":"tensor","factor":{"kind":"matern","alpha":1.5},"d":5}"#, Exists),
    ]
}

fn run_fixture(name: &str, spec: &str, expected: Decision) -> FixtureRow {
    let result = KernelSpec::from_json(spec)
        .and_then(|s| s.build())
        .and_then(|k| default_rule(&k).and_then(|r| crate::analysis::rkhs_path_verdict(&k, &r)));
    match result {
        Ok(v) => FixtureRow {
            fixture: name.to_string(),
            expected,
            decision: Some(v.decision),
            rho: Some(v.rho),
            pass: v.decision == expected,
            error: None,
        },
        Err(e) => FixtureRow {
            fixture: name.to_string(),
            expected,
            decision: None,
            rho: None,
            pass: false,
            error: Some(e.to_string()),
        },
    }
}

/// Runs every fixture on its default rule, spread over the available
/// threads; rows come back in fixture order.
pub fn reproduce_paper_table() -> Vec<FixtureRow> {
    let list = fixtures();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(list.len());
    let mut rows: Vec<Option<FixtureRow>> = vec![None; list.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let list = &list;
                scope.spawn(move || {
                    (t..list.len())
                        .step_by(threads)
                        .map(|i| (i, run_fixture(list[i].0, list[i].1, list[i].2)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, row) in h.join().expect("fixture thread panicked") {
                rows[i] = Some(row);
            }
        }
    });
    rows.into_iter().map(|r| r.expect("every fixture ran")).collect()
}

/// `fixture,expected,decision,rho,pass` rows.
pub fn table_csv(rows: &[FixtureRow]) -> String {
    let mut out = String::from("fixture,expected,decision,rho,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.fixture,
            r.expected.as_str(),
            r.decision.map_or("ERROR", |d| d.as_str()),
            r.rho.map_or(String::new(), f17),
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}

fn reproduce(_job: &JobConfig) -> Step<Payloads> {
    let rows = reproduce_paper_table();
    let mut p = Payloads::new();
    p.add("table.csv", table_csv(&rows));
    p.add_json("table.json", &rows)?;
    if rows.iter().any(|r| !r.pass) {
        p.exit_code = EXIT_ERROR;
    }
    Ok(p)
}
