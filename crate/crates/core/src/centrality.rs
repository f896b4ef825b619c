//! Fixed-point centralities: the generic solver `x = f(A, x)`, `rho = g(x)`,
//! the canonical map families and their closed forms, output normalisers and
//! the principal-angle distance used for eigenvector-type fixed points.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, FpcError, Result};
use crate::graph::{degree_vector, permute, Graph, Permutation};
use crate::norms::{operator_norm, start_vector, vector_norm, NormP};

/// Leading eigenvalues closer than this to the rest of the spectrum are
/// rejected as not simple.
pub const SIMPLICITY_GAP: f64 = 1e-8;

/// Absolute tolerance of the equivariance identity check.
pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;

/// Node scores; every entry is finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CentralityVector(Vec<f64>);

impl CentralityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return param(format!("centrality entry {i} is {v}; entries must be finite and >= 0"));
        }
        Ok(CentralityVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Deref for CentralityVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for CentralityVector {
    type Error = FpcError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        CentralityVector::new(v)
    }
}

impl From<CentralityVector> for Vec<f64> {
    fn from(c: CentralityVector) -> Self {
        c.0
    }
}

/// A family of feature maps `f(A, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FixedPointMap {
    /// `f(A, x) = A^T x / lambda_1`.
    Eigen,
    /// `f(A, x) = alpha A^T x + 1`.
    Katz { alpha: f64 },
    /// `f(A, x) = alpha A^T D^-1 x + (1 - alpha)/n 1`, dangling columns zeroed.
    Pagerank { alpha: f64 },
    /// `f(A, x) = M x + b`, independent of `A`. Used for test fixtures.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

impl FixedPointMap {
    pub fn name(&self) -> &'static str {
        match self {
            FixedPointMap::Eigen => "eigen",
            FixedPointMap::Katz { .. } => "katz",
            FixedPointMap::Pagerank { .. } => "pagerank",
            FixedPointMap::Affine { .. } => "affine",
        }
    }

    /// The norm in which the family's contraction argument runs.
    pub fn native_norm(&self) -> NormP {
        match self {
            FixedPointMap::Pagerank { .. } => NormP::One,
            _ => NormP::Two,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            FixedPointMap::Katz { alpha } | FixedPointMap::Pagerank { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// Checks the family's parameter constraints against `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        match self {
            FixedPointMap::Eigen => Ok(()),
            FixedPointMap::Katz { alpha } => validate_katz(g, *alpha),
            FixedPointMap::Pagerank { alpha } => validate_pagerank(g, *alpha),
            FixedPointMap::Affine { matrix, offset } => {
                let n = g.n();
                if offset.len() != n || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return param(format!("affine map dimensions do not match n = {n}"));
                }
                Ok(())
            }
        }
    }

    /// Fixes the graph argument: returns the affine map `x -> M x + b`.
    pub fn bind(&self, g: &Graph) -> Result<BoundMap> {
        self.validate(g)?;
        let n = g.n();
        let (matrix, offset) = match self {
            FixedPointMap::Eigen => {
                let lambda = eigencentrality(g, EigenTarget::Largest, None)?.lambda;
                (g.weights().transpose() / lambda, DVector::zeros(n))
            }
            FixedPointMap::Katz { alpha } => (g.weights().transpose() * *alpha, DVector::from_element(n, 1.0)),
            FixedPointMap::Pagerank { alpha } => (
                pagerank_kernel(g) * *alpha,
                DVector::from_element(n, (1.0 - alpha) / n as f64),
            ),
            FixedPointMap::Affine { matrix, offset } => (
                DMatrix::from_fn(n, n, |i, j| matrix[i][j]),
                DVector::from_column_slice(offset),
            ),
        };
        Ok(BoundMap {
            matrix,
            offset,
            norm: self.native_norm(),
        })
    }
}

fn validate_katz(g: &Graph, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("katz alpha must lie in (0, 1), got {alpha}"));
    }
    let norm = operator_norm(g.weights(), NormP::Two)?;
    if alpha * norm >= 1.0 {
        return param(format!(
            "katz alpha {alpha} violates alpha < 1/||A||_2 = {}",
            1.0 / norm
        ));
    }
    Ok(())
}

fn validate_pagerank(g: &Graph, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("pagerank alpha must lie in (0, 1), got {alpha}"));
    }
    if !g.is_nonnegative() {
        return param("pagerank requires non-negative weights");
    }
    Ok(())
}

/// `A^T D^-1` with the columns of zero-degree nodes set to zero.
pub fn pagerank_kernel(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let d = degree_vector(g);
    DMatrix::from_fn(n, n, |i, j| if d[j] != 0.0 { g.weight(j, i) / d[j] } else { 0.0 })
}

/// A feature map with its graph argument fixed: `x -> matrix * x + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub norm: NormP,
}

impl BoundMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(x) + &self.offset;
        v.iter().copied().collect()
    }
}

/// Output map `g`: `rho_i = phi(c_i) / sum_j phi(c_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalizer {
    Identity,
    Exp,
    ExpNeg,
    Abs,
}

impl std::str::FromStr for Normalizer {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Normalizer::Identity),
            "exp" => Ok(Normalizer::Exp),
            "exp-neg" | "exp_neg" => Ok(Normalizer::ExpNeg),
            "abs" => Ok(Normalizer::Abs),
            other => param(format!("unknown normalizer '{other}'")),
        }
    }
}

pub fn normalize(v: &[f64], norm: Normalizer) -> Result<CentralityVector> {
    let images: Vec<f64> = match norm {
        Normalizer::Identity => {
            if let Some(x) = v.iter().find(|x| **x < 0.0) {
                return param(format!("identity normalizer needs non-negative input, got {x}"));
            }
            v.to_vec()
        }
        Normalizer::Abs => v.iter().map(|x| x.abs()).collect(),
        // shifted by the extreme value; the ratio is unchanged
        Normalizer::Exp => {
            let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v.iter().map(|x| (x - top).exp()).collect()
        }
        Normalizer::ExpNeg => {
            let low = v.iter().copied().fold(f64::INFINITY, f64::min);
            v.iter().map(|x| (low - x).exp()).collect()
        }
    };
    let total: f64 = images.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return param(format!("normalizer denominator is {total}"));
    }
    CentralityVector::new(images.into_iter().map(|x| x / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Stopping threshold on `||x - f(A, x)||` in the family's native norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Starting feature; all-ones when absent.
    pub initial: Option<Vec<f64>>,
    /// Output map `g`. `None` is the identity, which requires `x >= 0`.
    pub normalizer: Option<Normalizer>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tolerance: 1e-10,
            max_iterations: 100_000,
            initial: None,
            normalizer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResult {
    pub rho: CentralityVector,
    pub feature_x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Largest observed ratio of consecutive residuals, over steps whose
    /// residual is large enough for the ratio to be meaningful.
    pub contraction_estimate: f64,
}

/// Solves `x = f(A, x)` by fixed-point iteration and returns `rho = g(x)`.
///
/// The eigen family is delegated to [`eigencentrality`].
pub fn solve(g: &Graph, map: &FixedPointMap, cfg: &SolveConfig) -> Result<CentralityResult> {
    if cfg.tolerance.is_nan() || cfg.tolerance <= 0.0 {
        return param("tolerance must be positive");
    }
    if let FixedPointMap::Eigen = map {
        let eig = eigencentrality_with(g, EigenTarget::Largest, cfg.normalizer, cfg)?;
        let bound = BoundMap {
            matrix: g.weights().transpose() / eig.lambda,
            offset: DVector::zeros(g.n()),
            norm: NormP::Two,
        };
        let fx = bound.apply(&eig.feature_x);
        let residual = vector_norm(&difference(&eig.feature_x, &fx), NormP::Two);
        return Ok(CentralityResult {
            rho: eig.rho,
            feature_x: eig.feature_x,
            iterations: eig.iterations,
            residual,
            contraction_estimate: eig.convergence_ratio,
        });
    }

    let bound = map.bind(g)?;
    let n = g.n();
    let mut x = match &cfg.initial {
        Some(v) if v.len() != n => return param(format!("initial vector has length {}, expected {n}", v.len())),
        Some(v) => v.clone(),
        None => vec![1.0; n],
    };
    let (x, iterations, residual, ratio) = iterate(&bound, &mut x, cfg)?;
    let rho = output_map(&x, cfg.normalizer)?;
    Ok(CentralityResult {
        rho,
        feature_x: x,
        iterations,
        residual,
        contraction_estimate: ratio,
    })
}

fn iterate(bound: &BoundMap, x: &mut Vec<f64>, cfg: &SolveConfig) -> Result<(Vec<f64>, usize, f64, f64)> {
    let mut prev: Option<f64> = None;
    let mut ratio: f64 = 0.0;
    for it in 1..=cfg.max_iterations {
        let fx = bound.apply(x);
        let r = vector_norm(&difference(x, &fx), bound.norm);
        if !r.is_finite() {
            return Err(FpcError::Numerical("iteration diverged".into()));
        }
        if r <= cfg.tolerance {
            return Ok((std::mem::take(x), it, r, ratio));
        }
        // ratios of residuals near round-off are noise
        let scale = vector_norm(x, bound.norm).max(1.0);
        if let Some(p) = prev.filter(|p| *p >= 1e-6 * scale) {
            ratio = ratio.max(r / p);
        }
        prev = Some(r);
        *x = fx;
    }
    let fx = bound.apply(x);
    Err(FpcError::NonConvergence {
        iterations: cfg.max_iterations,
        residual: vector_norm(&difference(x, &fx), bound.norm),
        last_iterate: x.clone(),
    })
}

fn output_map(x: &[f64], normalizer: Option<Normalizer>) -> Result<CentralityVector> {
    match normalizer {
        Some(n) => normalize(x, n),
        None => CentralityVector::new(x.to_vec()),
    }
}

fn difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn identity_minus(m: DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::identity(m.nrows(), m.ncols()) - m
}

fn direct_solve(system: DMatrix<f64>, rhs: DVector<f64>) -> Result<Vec<f64>> {
    system
        .lu()
        .solve(&rhs)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| FpcError::Numerical("singular linear system".into()))
}

/// Katz-Bonacich centrality from the linear system `(I - alpha A^T) rho = 1`.
pub fn katz_closed_form(g: &Graph, alpha: f64) -> Result<CentralityVector> {
    validate_katz(g, alpha)?;
    let n = g.n();
    let rho = direct_solve(
        identity_minus(g.weights().transpose() * alpha),
        DVector::from_element(n, 1.0),
    )?;
    CentralityVector::new(rho)
}

/// PageRank from `rho = (1 - alpha)/n (I - alpha A^T D^-1)^-1 1`. Columns of
/// dangling nodes are zero, so the result may sum to less than one; it is
/// reported as is.
pub fn pagerank_closed_form(g: &Graph, alpha: f64) -> Result<CentralityVector> {
    validate_pagerank(g, alpha)?;
    let n = g.n();
    let rho = direct_solve(
        identity_minus(pagerank_kernel(g) * alpha),
        DVector::from_element(n, (1.0 - alpha) / n as f64),
    )?;
    CentralityVector::new(rho)
}

/// Which eigenpair to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenTarget {
    /// The largest eigenvalue, by shifted power iteration on `A^T`.
    Largest,
    /// The k-th largest eigenvalue (0-based) of a symmetric matrix.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCentrality {
    pub rho: CentralityVector,
    /// Unit 2-norm eigenvector with non-negative entry sum.
    pub feature_x: Vec<f64>,
    pub lambda: f64,
    /// Distance from `lambda` to the rest of the spectrum.
    pub gap: f64,
    pub iterations: usize,
    /// Observed convergence ratio of the power iteration (0 when direct).
    pub convergence_ratio: f64,
}

/// Eigenvector centrality with default iteration settings (tolerance 1e-12).
///
/// When the oriented eigenvector is entrywise non-negative the centrality is
/// its absolute value. Otherwise `fallback` maps it to a centrality, and
/// without one the call fails.
pub fn eigencentrality(g: &Graph, which: EigenTarget, fallback: Option<Normalizer>) -> Result<EigenCentrality> {
    let cfg = SolveConfig {
        tolerance: 1e-12,
        ..SolveConfig::default()
    };
    eigencentrality_with(g, which, fallback, &cfg)
}

pub fn eigencentrality_with(
    g: &Graph,
    which: EigenTarget,
    fallback: Option<Normalizer>,
    cfg: &SolveConfig,
) -> Result<EigenCentrality> {
    let (mut x, lambda, gap, iterations, ratio) = match which {
        EigenTarget::Largest => leading_eigenpair(g.weights(), cfg)?,
        EigenTarget::Index(k) => indexed_eigenpair(g, k)?,
    };
    if gap < SIMPLICITY_GAP {
        return Err(FpcError::SimplicityViolation {
            gap,
            threshold: SIMPLICITY_GAP,
        });
    }
    orient(&mut x);
    let rho = if x.iter().all(|&v| v >= 0.0) {
        CentralityVector::new(x.iter().map(|v| v.abs()).collect())?
    } else {
        match fallback {
            Some(norm) => normalize(&x, norm)?,
            None => return param("eigenvector has mixed signs; a normalizer is required to map it to a centrality"),
        }
    };
    Ok(EigenCentrality {
        rho,
        feature_x: x,
        lambda,
        gap,
        iterations,
        convergence_ratio: ratio,
    })
}

/// Unit 2-norm, non-negative entry sum; an exactly zero sum is oriented by the
/// first nonzero entry.
fn orient(x: &mut [f64]) {
    let norm = vector_norm(x, NormP::Two);
    let sum: f64 = x.iter().sum();
    let flip = if sum.abs() > 1e-12 {
        sum < 0.0
    } else {
        x.iter().find(|v| v.abs() > 1e-12).is_some_and(|v| *v < 0.0)
    };
    let scale = if flip { -1.0 / norm } else { 1.0 / norm };
    for v in x.iter_mut() {
        *v *= scale;
        if *v == 0.0 {
            *v = 0.0; // clear negative zero
        }
    }
}

type Eigenpair = (Vec<f64>, f64, f64, usize, f64);

/// Power iteration on `A^T + sI`. The shift keeps the largest eigenvalue
/// dominant in modulus when eigenvalues of equal modulus sit elsewhere on the
/// spectral circle (bipartite graphs, directed cycles).
fn leading_eigenpair(a: &DMatrix<f64>, cfg: &SolveConfig) -> Result<Eigenpair> {
    let n = a.nrows();
    if a.iter().all(|&x| x == 0.0) {
        return param("eigencentrality of the zero matrix is undefined");
    }
    let nonneg = a.iter().all(|&x| x >= 0.0);
    let radius_bound = operator_norm(a, NormP::One)?.min(operator_norm(a, NormP::Inf)?);
    let shift = if nonneg { 0.5 * radius_bound } else { radius_bound };
    let at = a.transpose();
    let shifted = &at + DMatrix::identity(n, n) * shift;

    let mut v = if nonneg {
        DVector::from_element(n, 1.0 / (n as f64).sqrt())
    } else {
        start_vector(n)
    };
    let mut prev_change: Option<f64> = None;
    let mut ratio: f64 = 0.0;
    let mut converged = None;
    for it in 1..=cfg.max_iterations {
        let w = &shifted * &v;
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return Err(FpcError::Numerical("power iteration collapsed to zero".into()));
        }
        let next = w / w_norm;
        let change = (&next - &v).norm();
        if let Some(p) = prev_change.filter(|p| *p >= 1e-6) {
            ratio = ratio.max(change / p);
        }
        prev_change = Some(change);
        v = next;
        if change <= cfg.tolerance {
            converged = Some(it);
            break;
        }
    }
    let Some(iterations) = converged else {
        return Err(FpcError::NonConvergence {
            iterations: cfg.max_iterations,
            residual: prev_change.unwrap_or(f64::INFINITY),
            last_iterate: v.iter().copied().collect(),
        });
    };
    let lambda = v.dot(&(&at * &v));
    let gap = if a == &a.transpose() {
        symmetric_gap(a, &v, lambda, radius_bound, cfg)?
    } else {
        spectral_separation(a, lambda)
    };
    Ok((v.iter().copied().collect(), lambda, gap, iterations, ratio))
}

/// `lambda_1 - lambda_2` for a symmetric matrix, by power iteration on the
/// Hotelling deflation of `M = A + rI`, `r` a bound on the spectral radius.
/// `M` is positive semidefinite, so the top eigenvalue of the deflated matrix
/// is `lambda_2 + r`.
fn symmetric_gap(a: &DMatrix<f64>, v: &DVector<f64>, lambda: f64, radius: f64, cfg: &SolveConfig) -> Result<f64> {
    let n = a.nrows();
    if n == 1 {
        return Ok(f64::INFINITY);
    }
    let shifted = a + DMatrix::identity(n, n) * radius;
    let top = lambda + radius;
    let deflated = &shifted - v * v.transpose() * top;
    let project = |w: DVector<f64>| {
        let w = &w - v * v.dot(&w);
        let norm = w.norm();
        (w, norm)
    };
    let (mut u, norm) = project(start_vector(n));
    if norm == 0.0 {
        return Ok(top);
    }
    u /= norm;
    let mut mu = u.dot(&(&deflated * &u));
    for _ in 0..cfg.max_iterations {
        let (w, norm) = project(&deflated * &u);
        if norm == 0.0 {
            // u spans an eigenvector with eigenvalue 0
            mu = 0.0;
            break;
        }
        u = w / norm;
        let next = u.dot(&(&deflated * &u));
        let done = (next - mu).abs() <= 1e-14 * (1.0 + top.abs());
        mu = next;
        if done {
            break;
        }
    }
    Ok(top - mu.max(0.0))
}

/// Distance from `lambda` to the rest of the spectrum of a general matrix,
/// from its Schur eigenvalues.
fn spectral_separation(a: &DMatrix<f64>, lambda: f64) -> f64 {
    let eigs = a.clone().complex_eigenvalues();
    let mut dists: Vec<f64> = eigs
        .iter()
        .map(|z| ((z.re - lambda).powi(2) + z.im.powi(2)).sqrt())
        .collect();
    dists.sort_by(f64::total_cmp);
    dists.get(1).copied().unwrap_or(f64::INFINITY)
}

fn indexed_eigenpair(g: &Graph, k: usize) -> Result<Eigenpair> {
    let n = g.n();
    if !g.is_symmetric() {
        return param("indexed eigenpairs require a symmetric graph");
    }
    if n > 2000 {
        return Err(FpcError::SizeLimit {
            what: "full symmetric eigendecomposition",
            n,
            limit: 2000,
            hint: None,
        });
    }
    if k >= n {
        return param(format!("eigen index {k} out of range for n = {n}"));
    }
    let eig = g.weights().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let idx = order[k];
    let lambda = eig.eigenvalues[idx];
    let gap = order
        .iter()
        .filter(|&&j| j != idx)
        .map(|&j| (eig.eigenvalues[j] - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    let x = eig.eigenvectors.column(idx).iter().copied().collect();
    Ok((x, lambda, gap, 0, 0.0))
}

/// Principal angle between `span(x)` and `span(y)`, in `[0, pi/2]`.
///
/// Evaluated as `2 atan2(|u - w|, |u + w|)` on unit vectors with `u.w >= 0`,
/// which equals `acos(|<x, y>| / (|x| |y|))` and stays accurate for nearly
/// parallel inputs where `acos` loses half its digits.
pub fn grassmann_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return param("vectors have different lengths");
    }
    let (nx, ny) = (vector_norm(x, NormP::Two), vector_norm(y, NormP::Two));
    if nx == 0.0 || ny == 0.0 {
        return param("grassmann distance needs nonzero vectors");
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (u, w) = (a / nx, sign * b / ny);
        minus += (u - w) * (u - w);
        plus += (u + w) * (u + w);
    }
    let angle = 2.0 * minus.sqrt().atan2(plus.sqrt());
    Ok(angle.clamp(0.0, std::f64::consts::FRAC_PI_2))
}

/// Samples random relabelings and features and checks
/// `P f(A, x) = f(P A P^T, P x)` to within [`EQUIVARIANCE_TOLERANCE`] in the
/// max norm.
pub fn check_equivariance(map: &FixedPointMap, g: &Graph, trials: usize, seed: u64) -> Result<bool> {
    if trials == 0 {
        return param("check_equivariance needs at least one trial");
    }
    let n = g.n();
    let base = map.bind(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let p = Permutation::random(n, &mut rng);
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let lhs = p.permute_vector(&base.apply(&x));
        let relabelled = map.bind(&permute(g, &p)?)?;
        let rhs = relabelled.apply(&p.permute_vector(&x));
        if vector_norm(&difference(&lhs, &rhs), NormP::Inf) > EQUIVARIANCE_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}
