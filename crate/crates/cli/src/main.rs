mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fpc_core::centrality::{
    eigencentrality, grassmann_distance, solve, EigenTarget, FixedPointMap, Normalizer, SolveConfig,
};
use fpc_core::graph::Graph;
use fpc_core::graphon::{graphon_eigencentrality, graphon_katz, graphon_pagerank, lift, StepGraphon};
use fpc_core::io::{parse_graph, parse_graphon, EdgeListOptions};
use fpc_core::norms::{
    cut_norm_exact, cut_norm_heuristic, matrix_norm, NormKind, PermMode, MAX_EXACT_CUT_N, MAX_EXACT_PERMUTATION_N,
};
use fpc_core::perturbation::{
    constants_analytic_with, constants_empirical_with, prop10_certificate, prop6_certificate, prop7_certificate,
    prop9_certificate, theorem1_certificate, theorem2_certificate, BoundCertificate,
};
use fpc_core::transport::TransportConvention;
use fpc_core::{FpcError, Result};

use manifest::{read_input, sha256_hex, RunManifest};

const LIMIT_VAR: &str = "FPC_MAX_EXACT_N";

/// Fixed-point centralities, graph norms and perturbation-bound certificates.
///
/// Edge orientation: a line `i j w` is the link from i to j, stored as a_ij.
/// Centralities use the transpose A^T.
#[derive(Parser)]
#[command(name = "fpc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the centrality of one graph.
    Centrality(CentralityArgs),
    /// Certify a perturbation bound between two graphs.
    Compare(CompareArgs),
    /// Step-graphon commands.
    #[command(subcommand)]
    Graphon(GraphonCommand),
    /// Evaluate a matrix norm.
    Norms(NormsArgs),
    /// Run many comparisons from a job file.
    Batch(BatchArgs),
}

#[derive(Subcommand)]
enum GraphonCommand {
    /// Convert a symmetric graph to its step graphon.
    Lift(LiftArgs),
    /// Compute a graphon centrality.
    Centrality(GraphonCentralityArgs),
    /// Certify a graphon perturbation bound.
    Compare(GraphonCompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Eigen,
    Katz,
    Pagerank,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Bound {
    Theorem1,
    Prop6,
    Prop7,
    Theorem2,
    Prop9,
    Prop10,
    /// Angle between eigenvector spans; descriptive, no bound.
    Grassmann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Analytic,
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CutMode {
    Exact,
    Heuristic,
}

#[derive(Args, Clone)]
struct InputOpts {
    /// Node count for edge lists (default: largest index + 1).
    #[arg(long)]
    nodes: Option<usize>,
    /// Mirror every edge of an edge list.
    #[arg(long)]
    undirected: bool,
}

impl InputOpts {
    fn edge_list(&self) -> EdgeListOptions {
        EdgeListOptions {
            nodes: self.nodes,
            undirected: self.undirected,
        }
    }
}

#[derive(Args)]
struct OutputOpts {
    /// Write JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a CSV table to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CentralityArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    alpha: Option<f64>,
    /// Output map phi in rho_i = phi(x_i) / sum_j phi(x_j).
    #[arg(long)]
    normalizer: Option<Normalizer>,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args, Clone, Serialize, Deserialize)]
struct CompareParams {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "theorem1")]
    #[serde(default = "default_bound")]
    bound: Bound,
    #[arg(long, default_value = "exact")]
    #[serde(default = "default_perm_mode")]
    perm_mode: PermMode,
    #[arg(long)]
    #[serde(default)]
    normalizer: Option<Normalizer>,
    /// Ground metric for the observed Wasserstein distance.
    #[arg(long, default_value = "permutation_cost")]
    #[serde(default = "default_convention")]
    convention: TransportConvention,
    #[arg(long, value_enum, default_value = "analytic")]
    #[serde(default = "default_method")]
    constants: Method,
    /// Sample count for empirical constants.
    #[arg(long, default_value_t = 200)]
    #[serde(default = "default_samples")]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    seed: u64,
}

fn default_bound() -> Bound {
    Bound::Theorem1
}

fn default_perm_mode() -> PermMode {
    PermMode::Exact
}

fn default_convention() -> TransportConvention {
    TransportConvention::PermutationCost
}

fn default_method() -> Method {
    Method::Analytic
}

fn default_samples() -> usize {
    200
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    params: CompareParams,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct LiftArgs {
    input: PathBuf,
    /// Bound c of the graphon class (default: largest absolute weight).
    #[arg(long)]
    c: Option<f64>,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct GraphonCentralityArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct GraphonCompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "theorem2")]
    bound: Bound,
    #[arg(long, default_value = "exact")]
    perm_mode: PermMode,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct NormsArgs {
    input: PathBuf,
    /// 1, 2, inf or cut.
    #[arg(long)]
    norm: NormKind,
    #[arg(long, value_enum, default_value = "exact")]
    mode: CutMode,
    /// Restarts of the cut-norm heuristic.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON array of jobs: {"a", "b", "family", "alpha", "bound", ...}.
    /// Paths are relative to the job file.
    jobs_file: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Treat inputs as step-graphon JSON.
    #[arg(long)]
    graphon: bool,
    #[command(flatten)]
    input_opts: InputOpts,
    #[command(flatten)]
    out: OutputOpts,
}

fn exit_code(e: &FpcError) -> u8 {
    match e {
        FpcError::Parameter(_)
        | FpcError::SizeLimit { .. }
        | FpcError::Precondition(_)
        | FpcError::Unsupported(_)
        | FpcError::SimplicityViolation { .. } => 2,
        FpcError::NonConvergence { .. } | FpcError::Numerical(_) => 3,
        FpcError::Parse { .. } | FpcError::Io(_) => 4,
    }
}

/// Exhaustive-search threshold, lowered (never raised) by the environment.
fn exact_limit(default: usize) -> Result<usize> {
    match std::env::var(LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|m| m.min(default))
            .map_err(|_| FpcError::Parameter(format!("{LIMIT_VAR} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(default),
    }
}

fn check_limit(what: &'static str, n: usize, default: usize) -> Result<()> {
    let limit = exact_limit(default)?;
    if n > limit {
        return Err(FpcError::SizeLimit {
            what,
            n,
            limit,
            hint: (limit < default).then(|| format!("lowered by {LIMIT_VAR}")),
        });
    }
    Ok(())
}

fn build_map(family: Family, alpha: Option<f64>) -> Result<FixedPointMap> {
    let need = |name: &str| alpha.ok_or_else(|| FpcError::Parameter(format!("--alpha is required for {name}")));
    Ok(match family {
        Family::Eigen => FixedPointMap::Eigen,
        Family::Katz => FixedPointMap::Katz { alpha: need("katz")? },
        Family::Pagerank => FixedPointMap::Pagerank {
            alpha: need("pagerank")?,
        },
    })
}

fn emit(body: Value, manifest: &RunManifest, out: &OutputOpts, csv: Option<String>) -> Result<()> {
    let mut body = body;
    body["manifest"] = serde_json::to_value(manifest).map_err(|e| FpcError::Io(e.to_string()))?;
    let text = serde_json::to_string_pretty(&body).map_err(|e| FpcError::Io(e.to_string()))? + "\n";
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(table)) = (&out.csv, csv) {
        std::fs::write(path, table)?;
    }
    Ok(())
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn read_graph(manifest: &mut RunManifest, path: &Path, opts: &InputOpts) -> Result<Graph> {
    parse_graph(&read_input(manifest, path)?, opts.edge_list())
}

fn read_graphon(manifest: &mut RunManifest, path: &Path) -> Result<StepGraphon> {
    parse_graphon(&read_input(manifest, path)?)
}

fn vector_csv(columns: &[(&str, &[f64])]) -> String {
    let mut s = String::from("node");
    for (name, _) in columns {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    let n = columns.first().map_or(0, |c| c.1.len());
    for i in 0..n {
        write!(s, "{i}").unwrap();
        for (_, col) in columns {
            write!(s, ",{}", col[i]).unwrap();
        }
        s.push('\n');
    }
    s
}

fn cmd_centrality(args: &CentralityArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("centrality");
    let g = read_graph(&mut manifest, &args.input, &args.input_opts)?;
    let map = build_map(args.family, args.alpha)?;
    manifest
        .param("family", map.name())
        .param("tolerance", args.tolerance)
        .param("max_iterations", args.max_iterations);
    if let Some(a) = args.alpha {
        manifest.param("alpha", a);
    }
    if let Some(n) = args.normalizer {
        manifest.param("normalizer", to_value(&n).as_str().unwrap_or_default());
    }
    let cfg = SolveConfig {
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        normalizer: args.normalizer,
        ..SolveConfig::default()
    };
    let res = solve(&g, &map, &cfg)?;
    let body = json!({
        "family": map.name(),
        "rho": res.rho,
        "feature_x": res.feature_x,
        "iterations": res.iterations,
        "residual": res.residual,
        "contraction_estimate": res.contraction_estimate,
    });
    let csv = vector_csv(&[("rho", &res.rho), ("feature_x", &res.feature_x)]);
    emit(body, &manifest, &args.out, Some(csv))?;
    Ok(0)
}

fn record_compare(manifest: &mut RunManifest, p: &CompareParams) {
    manifest
        .param("family", to_value(&p.family).as_str().unwrap_or_default())
        .param("bound", to_value(&p.bound).as_str().unwrap_or_default())
        .param("perm_mode", to_value(&p.perm_mode).as_str().unwrap_or_default())
        .param("convention", to_value(&p.convention).as_str().unwrap_or_default())
        .param("constants", to_value(&p.constants).as_str().unwrap_or_default())
        .param("samples", p.samples)
        .param("seed", p.seed);
    if let Some(a) = p.alpha {
        manifest.param("alpha", a);
    }
    if let Some(n) = p.normalizer {
        manifest.param("normalizer", to_value(&n).as_str().unwrap_or_default());
    }
}

enum CompareOutcome {
    Certificate(Box<BoundCertificate>),
    Descriptive(Value),
}

fn compare_graphs(a: &Graph, b: &Graph, p: &CompareParams) -> Result<CompareOutcome> {
    if a.n() != b.n() {
        return Err(FpcError::Parameter(format!(
            "graphs have {} and {} nodes",
            a.n(),
            b.n()
        )));
    }
    let map = build_map(p.family, p.alpha)?;
    if p.bound == Bound::Grassmann {
        if map != FixedPointMap::Eigen {
            return Err(FpcError::Parameter(
                "the grassmann comparison is for the eigen family".into(),
            ));
        }
        let ea = eigencentrality(a, EigenTarget::Largest, p.normalizer)?;
        let eb = eigencentrality(b, EigenTarget::Largest, p.normalizer)?;
        return Ok(CompareOutcome::Descriptive(json!({
            "family": "eigen",
            "grassmann_distance": grassmann_distance(&ea.feature_x, &eb.feature_x)?,
            "lambda": [ea.lambda, eb.lambda],
        })));
    }
    if p.perm_mode == PermMode::Exact && matches!(p.bound, Bound::Prop6 | Bound::Prop7) {
        check_limit("exact permutation search", a.n(), MAX_EXACT_PERMUTATION_N)?;
    }
    if p.bound == Bound::Prop7 {
        check_limit("exact cut norm", a.n(), MAX_EXACT_CUT_N)?;
    }
    let consts = match p.constants {
        Method::Analytic => constants_analytic_with(a, &map, p.normalizer)?,
        Method::Empirical => constants_empirical_with(a, &map, p.normalizer, p.samples, p.seed)?,
    };
    let cert = match p.bound {
        Bound::Theorem1 => theorem1_certificate(a, b, &map, &consts)?,
        Bound::Prop6 => prop6_certificate(a, b, &map, &consts, p.perm_mode, p.convention)?,
        Bound::Prop7 => prop7_certificate(a, b, &map, &consts, p.perm_mode)?,
        other => {
            return Err(FpcError::Parameter(format!(
                "{} compares graphons; use `fpc graphon compare`",
                to_value(&other).as_str().unwrap_or_default()
            )))
        }
    };
    Ok(CompareOutcome::Certificate(Box::new(cert)))
}

fn compare_graphons(
    a: &StepGraphon,
    b: &StepGraphon,
    family: Family,
    alpha: Option<f64>,
    bound: Bound,
    mode: PermMode,
) -> Result<BoundCertificate> {
    let map = build_map(family, alpha)?;
    if mode == PermMode::Exact && matches!(bound, Bound::Prop9 | Bound::Prop10) {
        check_limit("exact block permutation search", a.k(), MAX_EXACT_PERMUTATION_N)?;
    }
    if bound == Bound::Prop10 {
        check_limit("exact cut norm", a.k(), MAX_EXACT_CUT_N)?;
    }
    match bound {
        Bound::Theorem2 => theorem2_certificate(a, b, &map),
        Bound::Prop9 => prop9_certificate(a, b, &map, mode),
        Bound::Prop10 => prop10_certificate(a, b, &map, mode),
        other => Err(FpcError::Parameter(format!(
            "{} compares finite graphs; use `fpc compare`",
            to_value(&other).as_str().unwrap_or_default()
        ))),
    }
}

fn certificate_csv(rows: &[(String, &BoundCertificate)]) -> String {
    let mut s = String::from("id,kind,family,bound,observed,slack,holds,certified,distance\n");
    for (id, c) in rows {
        writeln!(
            s,
            "{id},{},{},{},{},{},{},{},{}",
            to_value(&c.kind).as_str().unwrap_or_default(),
            c.family,
            c.bound,
            c.observed,
            c.slack,
            c.holds,
            c.certified,
            c.distance
        )
        .unwrap();
    }
    s
}

fn emit_certificate(cert: &BoundCertificate, manifest: &RunManifest, out: &OutputOpts) -> Result<u8> {
    let csv = certificate_csv(&[(cert.inputs_digest.clone(), cert)]);
    emit(to_value(cert), manifest, out, Some(csv))?;
    Ok(if cert.holds { 0 } else { 1 })
}

fn cmd_compare(args: &CompareArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("compare");
    let a = read_graph(&mut manifest, &args.a, &args.input_opts)?;
    let b = read_graph(&mut manifest, &args.b, &args.input_opts)?;
    record_compare(&mut manifest, &args.params);
    match compare_graphs(&a, &b, &args.params)? {
        CompareOutcome::Certificate(cert) => emit_certificate(&cert, &manifest, &args.out),
        CompareOutcome::Descriptive(body) => {
            emit(body, &manifest, &args.out, None)?;
            Ok(0)
        }
    }
}

fn cmd_lift(args: &LiftArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("graphon lift");
    let g = read_graph(&mut manifest, &args.input, &args.input_opts)?;
    if let Some(c) = args.c {
        manifest.param("c", c);
    }
    let w = lift(&g, args.c)?;
    emit(to_value(&w), &manifest, &args.out, None)?;
    Ok(0)
}

fn cmd_graphon_centrality(args: &GraphonCentralityArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("graphon centrality");
    let w = read_graphon(&mut manifest, &args.input)?;
    let map = build_map(args.family, args.alpha)?;
    manifest.param("family", map.name());
    if let Some(a) = args.alpha {
        manifest.param("alpha", a);
    }
    let mut body = json!({ "family": map.name(), "k": w.k() });
    let rho = match map {
        FixedPointMap::Katz { alpha } => graphon_katz(&w, alpha)?,
        FixedPointMap::Pagerank { alpha } => {
            let rho = graphon_pagerank(&w, alpha)?;
            let density = (rho.integral() - 1.0).abs() <= 1e-10 && rho.values().iter().all(|v| *v >= 0.0);
            body["density_check"] = json!(density);
            rho
        }
        _ => {
            let e = graphon_eigencentrality(&w)?;
            body["lambda"] = json!(e.lambda);
            body["gap"] = json!(e.gap);
            e.rho
        }
    };
    body["integral"] = json!(rho.integral());
    body["rho"] = to_value(&rho);
    let csv = vector_csv(&[("rho", rho.values())]).replacen("node", "block", 1);
    emit(body, &manifest, &args.out, Some(csv))?;
    Ok(0)
}

fn cmd_graphon_compare(args: &GraphonCompareArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("graphon compare");
    let a = read_graphon(&mut manifest, &args.a)?;
    let b = read_graphon(&mut manifest, &args.b)?;
    manifest
        .param("family", to_value(&args.family).as_str().unwrap_or_default())
        .param("bound", to_value(&args.bound).as_str().unwrap_or_default())
        .param("perm_mode", to_value(&args.perm_mode).as_str().unwrap_or_default());
    if let Some(a) = args.alpha {
        manifest.param("alpha", a);
    }
    let cert = compare_graphons(&a, &b, args.family, args.alpha, args.bound, args.perm_mode)?;
    emit_certificate(&cert, &manifest, &args.out)
}

fn cmd_norms(args: &NormsArgs) -> Result<u8> {
    let mut manifest = RunManifest::new("norms");
    let g = read_graph(&mut manifest, &args.input, &args.input_opts)?;
    let kind = to_value(&args.norm);
    manifest.param("norm", kind.as_str().unwrap_or_default());
    let body = match (args.norm, args.mode) {
        (NormKind::Cut, CutMode::Exact) => {
            check_limit("exact cut norm", g.n(), MAX_EXACT_CUT_N)?;
            manifest.param("mode", "exact");
            let w = cut_norm_exact(g.weights())?;
            json!({ "kind": kind, "value": w.value, "exact": true, "witness": { "S": w.s, "T": w.t } })
        }
        (NormKind::Cut, CutMode::Heuristic) => {
            manifest
                .param("mode", "heuristic")
                .param("restarts", args.restarts)
                .param("seed", args.seed);
            let w = cut_norm_heuristic(g.weights(), args.restarts, args.seed)?;
            json!({ "kind": kind, "value": w.value, "exact": false, "witness": { "S": w.s, "T": w.t } })
        }
        (norm, _) => json!({ "kind": kind, "value": matrix_norm(g.weights(), norm)? }),
    };
    emit(body, &manifest, &args.out, None)?;
    Ok(0)
}

#[derive(Deserialize)]
struct Job {
    a: PathBuf,
    b: PathBuf,
    #[serde(flatten)]
    params: CompareParams,
}

#[derive(Serialize)]
struct JobReport {
    job: usize,
    inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<Value>,
    #[serde(skip)]
    code: u8,
}

fn run_job(index: usize, job: &Job, base: &Path, graphon: bool, opts: &InputOpts) -> JobReport {
    let read = |p: &Path| std::fs::read(base.join(p)).map_err(FpcError::from);
    let texts = read(&job.a).and_then(|a| Ok((a, read(&job.b)?)));
    let digest = {
        let mut bytes = serde_json::to_vec(&job.params).unwrap_or_default();
        if let Ok((a, b)) = &texts {
            bytes.extend_from_slice(a);
            bytes.extend_from_slice(b);
        }
        sha256_hex(&bytes)
    };
    let outcome = texts.and_then(|(a, b)| {
        let text = |v: Vec<u8>| String::from_utf8(v).map_err(|e| FpcError::Io(e.to_string()));
        let (a, b) = (text(a)?, text(b)?);
        let p = &job.params;
        if graphon {
            compare_graphons(
                &parse_graphon(&a)?,
                &parse_graphon(&b)?,
                p.family,
                p.alpha,
                p.bound,
                p.perm_mode,
            )
            .map(|c| CompareOutcome::Certificate(Box::new(c)))
        } else {
            compare_graphs(
                &parse_graph(&a, opts.edge_list())?,
                &parse_graph(&b, opts.edge_list())?,
                p,
            )
        }
    });
    let (certificate, error, code) = match outcome {
        Ok(CompareOutcome::Certificate(c)) => {
            let code = if c.holds { 0 } else { 1 };
            (Some(to_value(&c)), None, code)
        }
        Ok(CompareOutcome::Descriptive(v)) => (Some(v), None, 0),
        Err(e) => (
            None,
            Some(json!({ "exit_code": exit_code(&e), "message": e.to_string() })),
            exit_code(&e),
        ),
    };
    JobReport {
        job: index,
        inputs_digest: digest,
        certificate,
        error,
        code,
    }
}

fn cmd_batch(args: &BatchArgs) -> Result<u8> {
    if args.jobs == 0 {
        return Err(FpcError::Parameter("--jobs must be at least 1".into()));
    }
    let mut manifest = RunManifest::new("batch");
    let text = read_input(&mut manifest, &args.jobs_file)?;
    let jobs: Vec<Job> = serde_json::from_str(&text).map_err(|e| FpcError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    manifest.param("jobs", args.jobs).param("graphon", args.graphon);
    let base = args.jobs_file.parent().unwrap_or(Path::new(".")).to_path_buf();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| FpcError::Parameter(e.to_string()))?;
    let mut reports: Vec<JobReport> = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(i, job)| run_job(i, job, &base, args.graphon, &args.input_opts))
            .collect()
    });
    reports.sort_by(|x, y| x.inputs_digest.cmp(&y.inputs_digest).then(x.job.cmp(&y.job)));

    let holds = reports.iter().filter(|r| r.code == 0).count();
    let code = reports
        .iter()
        .map(|r| r.code)
        .find(|c| *c >= 2)
        .unwrap_or(if holds == reports.len() { 0 } else { 1 });
    let mut csv = String::from("job,inputs_digest,holds,bound,observed,certified,error\n");
    for r in &reports {
        let c = r.certificate.as_ref();
        let field = |k: &str| c.and_then(|c| c.get(k)).map(|v| v.to_string()).unwrap_or_default();
        let err = r.error.as_ref().map(|e| e["exit_code"].to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.job,
            r.inputs_digest,
            field("holds"),
            field("bound"),
            field("observed"),
            field("certified"),
            err
        )
        .unwrap();
    }
    let body = json!({ "total": reports.len(), "holds": holds, "results": reports });
    emit(body, &manifest, &args.out, Some(csv))?;
    Ok(code)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Centrality(a) => cmd_centrality(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Graphon(GraphonCommand::Lift(a)) => cmd_lift(a),
        Command::Graphon(GraphonCommand::Centrality(a)) => cmd_graphon_centrality(a),
        Command::Graphon(GraphonCommand::Compare(a)) => cmd_graphon_compare(a),
        Command::Norms(a) => cmd_norms(a),
        Command::Batch(a) => cmd_batch(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fpc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
