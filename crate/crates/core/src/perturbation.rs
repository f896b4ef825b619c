//! Lipschitz constants for the contraction argument and checked instances of
//! the centrality perturbation bounds.
//!
//! Every bound has the form `L1 Lg / (1 - L0) * distance(A, B)`. The feasible
//! feature set is a ball of radius `R` in the family's native norm, intersected
//! with the positive cone when the output map divides by the entry sum. When
//! a fixed point falls outside the recorded ball, `R` is enlarged to contain it
//! and the constants depending on `R` are recomputed; the certificate notes
//! say so.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{normalize, pagerank_kernel, BoundMap, FixedPointMap, Normalizer};
use crate::error::{param, FpcError, Result};
use crate::graph::{Graph, Permutation};
use crate::graphon::{
    graphon_block_distance, graphon_cut_distance_blocks, graphon_katz, graphon_op_norm, graphon_pagerank,
    graphon_pagerank_operator, StepFunction, StepGraphon,
};
use crate::norms::{matrix_norm, min_permuted_distance, operator_norm, vector_norm, NormKind, NormP, PermMode};
use crate::transport::{permutation_cost, wasserstein, TransportConvention};

/// `holds` means `observed <= bound + HOLDS_TOLERANCE`.
pub const HOLDS_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of a normalized centrality's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsMethod {
    Analytic,
    /// Sampled ratios: lower estimates of the suprema.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzConstants {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "Lg")]
    pub lg: f64,
    #[serde(rename = "R")]
    pub feasible_radius: f64,
    pub norm_p: NormP,
    pub method: ConstantsMethod,
    /// Output normalization folded into `g`, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<Normalizer>,
}

impl LipschitzConstants {
    /// `L1 Lg / (1 - L0)`.
    pub fn factor(&self) -> f64 {
        self.l1 * self.lg / (1.0 - self.l0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Theorem1,
    Prop6,
    Prop7,
    Theorem2,
    Prop9,
    Prop10,
}

impl std::str::FromStr for BoundKind {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" => Ok(BoundKind::Theorem1),
            "prop6" => Ok(BoundKind::Prop6),
            "prop7" => Ok(BoundKind::Prop7),
            "theorem2" => Ok(BoundKind::Theorem2),
            "prop9" => Ok(BoundKind::Prop9),
            "prop10" => Ok(BoundKind::Prop10),
            other => param(format!("unknown bound '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub family: String,
    pub bound: f64,
    pub observed: f64,
    pub holds: bool,
    pub slack: f64,
    /// False when an ingredient is an estimate rather than an exact value.
    pub certified: bool,
    /// Norm of the centrality difference.
    pub norm: NormP,
    /// Constants actually used, after any enlargement of `R`.
    pub constants: LipschitzConstants,
    /// Graph-side distance entering the bound.
    pub distance: f64,
    pub distance_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<TransportConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Permutation>,
    /// Native norms of the two fixed-point features.
    pub feature_norms: [f64; 2],
    pub notes: Vec<String>,
    pub inputs_digest: String,
}

fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(FpcError::Unsupported(msg.into()))
}

fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(FpcError::Precondition(msg.into()))
}

fn digest(value: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(value).expect("certificate inputs serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn diff_norm(a: &[f64], b: &[f64], p: NormP) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    vector_norm(&d, p)
}

/// Solves `x = M x + b` directly.
fn linear_fixed_point(bound: &BoundMap) -> Result<Vec<f64>> {
    let n = bound.offset.len();
    (DMatrix::identity(n, n) - &bound.matrix)
        .lu()
        .solve(&bound.offset)
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| FpcError::Numerical("fixed-point system is singular".into()))
}

fn fixed_point(g: &Graph, map: &FixedPointMap) -> Result<Vec<f64>> {
    if let FixedPointMap::Eigen = map {
        return unsupported(
            "eigencentrality has contraction modulus 1; compare eigenvectors with the Grassmann distance instead",
        );
    }
    linear_fixed_point(&map.bind(g)?)
}

/// The matrix whose perturbation drives `f(A, x) - f(B, x)`. For PageRank this
/// is the effective kernel `A^T D^-1`, not `A`.
fn sensitivity_matrix(g: &Graph, map: &FixedPointMap) -> DMatrix<f64> {
    match map {
        FixedPointMap::Pagerank { .. } => pagerank_kernel(g),
        _ => g.weights().clone(),
    }
}

fn distance_kind(map: &FixedPointMap, p: NormP) -> String {
    match map {
        FixedPointMap::Pagerank { .. } => format!("op{} of A^T D^-1", p.as_str()),
        _ => format!("op{}", p.as_str()),
    }
}

/// Smallest entry sum of a feasible feature, or an error when the sum can
/// approach zero.
fn finite_min_mass(map: &FixedPointMap, graphs: &[&Graph]) -> Result<f64> {
    match map {
        FixedPointMap::Katz { .. } => {
            if graphs.iter().all(|g| g.is_nonnegative()) {
                // x = sum_k (alpha A^T)^k 1 >= 1 entrywise
                Ok(graphs[0].n() as f64)
            } else {
                precondition("sum normalization of katz needs non-negative weights")
            }
        }
        // x >= (1 - alpha)/n entrywise
        FixedPointMap::Pagerank { alpha } => Ok(1.0 - alpha),
        _ => unsupported("sum normalization constants cover katz and pagerank"),
    }
}

/// Lipschitz constant of `g` on the feasible set.
///
/// For `x -> x / sum(x)` with sums at least `s`:
/// `||x/sx - v/sv|| <= ||x - v||/s + (||v||/sv) |sx - sv|/s`, where
/// `||v||/sv <= 1` for non-negative `v` and `|sx - sv| <= c_p ||x - v||`
/// with `c_1 = 1`, `c_2 = sqrt(n)`, `c_inf = n`. Softmax has a Jacobian
/// `diag(s) - s s^T` of norm at most 1 in the 1- and 2-norms.
fn finite_lg(map: &FixedPointMap, graphs: &[&Graph], normalizer: Option<Normalizer>, p: NormP) -> Result<f64> {
    match normalizer {
        None => Ok(1.0),
        Some(Normalizer::Exp) | Some(Normalizer::ExpNeg) => Ok(1.0),
        Some(Normalizer::Identity) | Some(Normalizer::Abs) => {
            let s = finite_min_mass(map, graphs)?;
            let n = graphs[0].n() as f64;
            let c = match p {
                NormP::One => 1.0,
                NormP::Two => n.sqrt(),
                NormP::Inf => n,
            };
            Ok((1.0 + c) / s)
        }
    }
}

/// Analytic constants for katz and pagerank with `g` the identity.
pub fn constants_analytic(g: &Graph, map: &FixedPointMap) -> Result<LipschitzConstants> {
    constants_analytic_with(g, map, None)
}

/// Analytic constants with an output normalization folded into `g`.
///
/// Katz: 2-norm, `L0 = alpha ||A||_2`, `R = ||1||_2 / (1 - L0) + 1`,
/// `L1 = alpha R`. PageRank: 1-norm, `L0 = alpha ||A^T D^-1||_1`,
/// `R = (1 - alpha) / (1 - L0) + 1`, `L1 = alpha R` against the effective
/// kernel distance.
pub fn constants_analytic_with(
    g: &Graph,
    map: &FixedPointMap,
    normalizer: Option<Normalizer>,
) -> Result<LipschitzConstants> {
    map.validate(g)?;
    let n = g.n() as f64;
    let (p, alpha, l0, base) = match map {
        FixedPointMap::Katz { alpha } => (
            NormP::Two,
            *alpha,
            alpha * operator_norm(g.weights(), NormP::Two)?,
            n.sqrt(),
        ),
        FixedPointMap::Pagerank { alpha } => (
            NormP::One,
            *alpha,
            alpha * operator_norm(&pagerank_kernel(g), NormP::One)?,
            1.0 - alpha,
        ),
        FixedPointMap::Eigen => {
            return unsupported("eigencentrality has L0 = 1, so the contraction bound does not apply")
        }
        FixedPointMap::Affine { .. } => return unsupported("analytic constants cover katz and pagerank"),
    };
    let r = base / (1.0 - l0) + 1.0;
    Ok(LipschitzConstants {
        l0,
        l1: alpha * r,
        lg: finite_lg(map, &[g], normalizer, p)?,
        feasible_radius: r,
        norm_p: p,
        method: ConstantsMethod::Analytic,
        normalizer,
    })
}

pub fn constants_empirical(g: &Graph, map: &FixedPointMap, samples: usize, seed: u64) -> Result<LipschitzConstants> {
    constants_empirical_with(g, map, None, samples, seed)
}

/// Sampled estimates of the constants: maxima of the defining ratios over
/// seeded points of the feasible set.
pub fn constants_empirical_with(
    g: &Graph,
    map: &FixedPointMap,
    normalizer: Option<Normalizer>,
    samples: usize,
    seed: u64,
) -> Result<LipschitzConstants> {
    if samples < 2 {
        return param("empirical constants need at least 2 samples");
    }
    let bound = match map {
        FixedPointMap::Eigen => {
            return unsupported("eigencentrality has L0 = 1, so the contraction bound does not apply")
        }
        _ => map.bind(g)?,
    };
    let n = g.n();
    let p = map.native_norm();
    let xa = linear_fixed_point(&bound)?;
    let (radius, floor, sensitivity) = match map {
        FixedPointMap::Affine { .. } => (vector_norm(&xa, p) + 1.0, None, 0.0),
        _ => {
            let a = constants_analytic(g, map)?;
            let alpha = map.alpha().expect("katz and pagerank carry alpha");
            let floor = match map {
                FixedPointMap::Katz { .. } if g.is_nonnegative() => Some(1.0),
                FixedPointMap::Pagerank { alpha } => Some((1.0 - alpha) / n as f64),
                _ => None,
            };
            (a.feasible_radius, floor, alpha)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match floor {
            Some(f) => {
                let base = vec![f; n];
                let room = (radius - vector_norm(&base, p)).max(0.0);
                let dir: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let len = vector_norm(&dir, p).max(f64::MIN_POSITIVE);
                let t = rng.gen::<f64>() * room;
                base.iter().zip(&dir).map(|(b, d)| b + t * d / len).collect()
            }
            None => {
                let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let len = vector_norm(&dir, p).max(f64::MIN_POSITIVE);
                let t = rng.gen::<f64>() * radius;
                dir.iter().map(|d| t * d / len).collect()
            }
        }
    };

    let (mut l0, mut l1, mut lg): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = sample(&mut rng);
        let dx = diff_norm(&x, &xa, p);
        if dx > 0.0 {
            l0 = l0.max(diff_norm(&bound.apply(&x), &xa, p) / dx);
        }

        let e = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let en = operator_norm(&e, p)?;
        if en > 0.0 {
            let ex = (e / en) * DVector::from_column_slice(&x) * sensitivity;
            l1 = l1.max(vector_norm(ex.as_slice(), p));
        }

        if let Some(norm) = normalizer {
            let v = sample(&mut rng);
            let dv = diff_norm(&x, &v, p);
            if let (Ok(gx), Ok(gv)) = (normalize(&x, norm), normalize(&v, norm)) {
                if dv > 0.0 {
                    lg = lg.max(diff_norm(&gx, &gv, p) / dv);
                }
            }
        }
    }
    Ok(LipschitzConstants {
        l0,
        l1,
        lg: if normalizer.is_some() { lg } else { 1.0 },
        feasible_radius: radius,
        norm_p: p,
        method: ConstantsMethod::Empirical,
        normalizer,
    })
}

/// Enlarges `R` to contain both fixed points and recomputes the constants
/// that depend on it. Empirical constants are left as sampled.
fn contain_features(
    consts: &LipschitzConstants,
    alpha: Option<f64>,
    norms: [f64; 2],
    notes: &mut Vec<String>,
    lg_of_radius: impl Fn(f64) -> f64,
) -> LipschitzConstants {
    let mut c = consts.clone();
    let needed = norms[0].max(norms[1]);
    if needed > c.feasible_radius {
        notes.push(format!(
            "feasible radius enlarged from {} to {} to contain both fixed points",
            c.feasible_radius, needed
        ));
        if c.method == ConstantsMethod::Analytic {
            c.feasible_radius = needed;
            if let Some(alpha) = alpha {
                c.l1 = alpha * needed;
            }
            c.lg = lg_of_radius(needed);
        } else {
            notes.push("empirical constants were sampled inside the original radius".into());
        }
    }
    c
}

fn output(x: &[f64], normalizer: Option<Normalizer>) -> Result<Vec<f64>> {
    match normalizer {
        Some(n) => Ok(normalize(x, n)?.into_inner()),
        None => Ok(x.to_vec()),
    }
}

fn check_mass(rho: &[f64], which: &str) -> Result<()> {
    let total: f64 = rho.iter().sum();
    if rho.iter().any(|v| *v < 0.0) || (total - 1.0).abs() > MASS_TOLERANCE {
        return precondition(format!(
            "centrality of {which} is not a probability vector (mass {total}); supply a normalizer"
        ));
    }
    Ok(())
}

struct FinitePair {
    consts: LipschitzConstants,
    rho_a: Vec<f64>,
    rho_b: Vec<f64>,
    norms: [f64; 2],
    notes: Vec<String>,
}

fn finite_pair(a: &Graph, b: &Graph, map: &FixedPointMap, consts: &LipschitzConstants) -> Result<FinitePair> {
    if a.n() != b.n() {
        return param(format!("graphs have {} and {} nodes", a.n(), b.n()));
    }
    if consts.l0 >= 1.0 {
        return precondition(format!("L0 = {} is not a contraction modulus", consts.l0));
    }
    if consts.norm_p != map.native_norm() {
        return param(format!(
            "constants use the {}-norm but {} runs in the {}-norm",
            consts.norm_p.as_str(),
            map.name(),
            map.native_norm().as_str()
        ));
    }
    if consts.normalizer.is_some() {
        // the second graph must also stay in the normalizer's domain
        finite_lg(map, &[a, b], consts.normalizer, consts.norm_p)?;
    }
    let xa = fixed_point(a, map)?;
    let xb = fixed_point(b, map)?;
    let p = consts.norm_p;
    let norms = [vector_norm(&xa, p), vector_norm(&xb, p)];
    let mut notes = Vec::new();
    let c = contain_features(consts, map.alpha(), norms, &mut notes, |_| consts.lg);
    if let FixedPointMap::Pagerank { .. } = map {
        notes.push("graph distance measured between the effective kernels A^T D^-1".into());
    }
    Ok(FinitePair {
        rho_a: output(&xa, c.normalizer)?,
        rho_b: output(&xb, c.normalizer)?,
        consts: c,
        norms,
        notes,
    })
}

#[derive(Serialize)]
struct FiniteInputs<'a> {
    kind: BoundKind,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    map: &'a FixedPointMap,
    constants: &'a LipschitzConstants,
    perm_mode: Option<PermMode>,
    convention: Option<TransportConvention>,
}

#[allow(clippy::too_many_arguments)]
fn certificate(
    kind: BoundKind,
    family: &str,
    consts: LipschitzConstants,
    rhs: f64,
    distance: f64,
    distance_kind: String,
    observed: f64,
    certified: bool,
    convention: Option<TransportConvention>,
    permutation: Option<Permutation>,
    norms: [f64; 2],
    notes: Vec<String>,
    inputs_digest: String,
) -> BoundCertificate {
    let bound = consts.factor() * rhs;
    let certified = certified && consts.method == ConstantsMethod::Analytic;
    BoundCertificate {
        kind,
        family: family.to_string(),
        bound,
        observed,
        holds: observed <= bound + HOLDS_TOLERANCE,
        slack: bound - observed,
        certified,
        norm: consts.norm_p,
        constants: consts,
        distance,
        distance_kind,
        convention,
        permutation,
        feature_norms: norms,
        notes,
        inputs_digest,
    }
}

/// `||rho_A - rho_B|| <= L1 Lg / (1 - L0) ||A - B||_op`.
pub fn theorem1_certificate(
    a: &Graph,
    b: &Graph,
    map: &FixedPointMap,
    consts: &LipschitzConstants,
) -> Result<BoundCertificate> {
    let pair = finite_pair(a, b, map, consts)?;
    let p = pair.consts.norm_p;
    let distance = operator_norm(&(sensitivity_matrix(a, map) - sensitivity_matrix(b, map)), p)?;
    let inputs = FiniteInputs {
        kind: BoundKind::Theorem1,
        a: a.to_rows(),
        b: b.to_rows(),
        map,
        constants: consts,
        perm_mode: None,
        convention: None,
    };
    Ok(certificate(
        BoundKind::Theorem1,
        map.name(),
        pair.consts,
        distance,
        distance,
        distance_kind(map, p),
        diff_norm(&pair.rho_a, &pair.rho_b, p),
        true,
        None,
        None,
        pair.norms,
        pair.notes,
        digest(&inputs),
    ))
}

/// `W_p(rho_A, rho_B) <= L1 Lg / (1 - L0) min_pi ||A^pi - B||_op,p`.
///
/// Only the permutation-cost convention reproduces the quantity the bound is
/// proved for; the other conventions are reported as observed but never
/// certified.
pub fn prop6_certificate(
    a: &Graph,
    b: &Graph,
    map: &FixedPointMap,
    consts: &LipschitzConstants,
    perm_mode: PermMode,
    convention: TransportConvention,
) -> Result<BoundCertificate> {
    let pair = finite_pair(a, b, map, consts)?;
    check_mass(&pair.rho_a, "A")?;
    check_mass(&pair.rho_b, "B")?;
    let p = pair.consts.norm_p;
    let observed = wasserstein(&pair.rho_a, &pair.rho_b, p, convention)?.value;
    let ka = Graph::from_matrix(sensitivity_matrix(a, map))?;
    let kb = Graph::from_matrix(sensitivity_matrix(b, map))?;
    let d = min_permuted_distance(&ka, &kb, NormKind::operator(p), perm_mode)?;
    let mut notes = pair.notes;
    if !d.certified {
        notes.push("permutation search is heuristic; the distance is an upper bound".into());
    }
    if convention != TransportConvention::PermutationCost {
        notes.push(format!(
            "observed W_p uses the {convention:?} ground metric, not the quantity the bound is proved for"
        ));
    }
    let inputs = FiniteInputs {
        kind: BoundKind::Prop6,
        a: a.to_rows(),
        b: b.to_rows(),
        map,
        constants: consts,
        perm_mode: Some(perm_mode),
        convention: Some(convention),
    };
    Ok(certificate(
        BoundKind::Prop6,
        map.name(),
        pair.consts,
        d.value,
        d.value,
        distance_kind(map, p),
        observed,
        d.certified && convention == TransportConvention::PermutationCost,
        Some(convention),
        Some(d.permutation),
        pair.norms,
        notes,
        digest(&inputs),
    ))
}

/// `W_2(rho_A, rho_B) <= L1 Lg / (1 - L0) sqrt(8 delta_cut(A, B))` for
/// symmetric `A, B` with entries in `[-1, 1]`, with the unscaled cut norm.
pub fn prop7_certificate(
    a: &Graph,
    b: &Graph,
    map: &FixedPointMap,
    consts: &LipschitzConstants,
    perm_mode: PermMode,
) -> Result<BoundCertificate> {
    if consts.norm_p != NormP::Two {
        return precondition("the cut-norm bound needs constants in the 2-norm");
    }
    if !a.is_symmetric() || !b.is_symmetric() {
        return precondition("the cut-norm bound needs symmetric matrices");
    }
    if a.max_abs() > 1.0 || b.max_abs() > 1.0 {
        return precondition("the cut-norm bound needs entries in [-1, 1]");
    }
    let pair = finite_pair(a, b, map, consts)?;
    check_mass(&pair.rho_a, "A")?;
    check_mass(&pair.rho_b, "B")?;
    let convention = TransportConvention::PermutationCost;
    let observed = wasserstein(&pair.rho_a, &pair.rho_b, NormP::Two, convention)?.value;
    let d = min_permuted_distance(a, b, NormKind::Cut, perm_mode)?;
    let mut notes = pair.notes;
    let mut exact = d.certified;
    if !d.certified {
        notes.push("permutation search is heuristic; the cut distance is an upper bound".into());
    }
    let spread = (d.permutation.permute_matrix(a.weights()) - b.weights()).amax();
    if spread > 1.0 {
        notes.push(format!(
            "A^pi - B has an entry of size {spread} > 1, outside the range where the operator norm is bounded by sqrt(8 cut)"
        ));
        exact = false;
    }
    let inputs = FiniteInputs {
        kind: BoundKind::Prop7,
        a: a.to_rows(),
        b: b.to_rows(),
        map,
        constants: consts,
        perm_mode: Some(perm_mode),
        convention: Some(convention),
    };
    Ok(certificate(
        BoundKind::Prop7,
        map.name(),
        pair.consts,
        (8.0 * d.value).sqrt(),
        d.value,
        "cut".into(),
        observed,
        exact,
        Some(convention),
        Some(d.permutation),
        pair.norms,
        notes,
        digest(&inputs),
    ))
}

/// Analytic constants for a graphon family in `L^p([0, 1])`.
///
/// Katz: `L^2`, `L0 = alpha ||W||_op`, `R = 1 / (1 - L0) + 1`. PageRank: `L^1`,
/// `L0 = alpha ||W / D||_op,1`, `R = (1 - alpha) / (1 - L0) + 1`. In both
/// cases `L1 = alpha R` and `g` is the identity.
pub fn graphon_constants(w: &StepGraphon, map: &FixedPointMap) -> Result<LipschitzConstants> {
    let (p, alpha, l0, base) = match map {
        FixedPointMap::Katz { alpha } => (NormP::Two, *alpha, alpha * graphon_op_norm(w)?, 1.0),
        FixedPointMap::Pagerank { alpha } => {
            if !w.in_w0() {
                return param("graphon pagerank needs values in [0, 1]");
            }
            let m = graphon_pagerank_operator(w);
            (NormP::One, *alpha, alpha * operator_norm(&m, NormP::One)?, 1.0 - alpha)
        }
        _ => return unsupported("graphon constants cover katz and pagerank"),
    };
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if l0 >= 1.0 {
        return param(format!("alpha * operator norm = {l0} is not below 1"));
    }
    let r = base / (1.0 - l0) + 1.0;
    Ok(LipschitzConstants {
        l0,
        l1: alpha * r,
        lg: 1.0,
        feasible_radius: r,
        norm_p: p,
        method: ConstantsMethod::Analytic,
        normalizer: None,
    })
}

fn graphon_fixed_point(w: &StepGraphon, map: &FixedPointMap) -> Result<StepFunction> {
    match map {
        FixedPointMap::Katz { alpha } => graphon_katz(w, *alpha),
        FixedPointMap::Pagerank { alpha } => graphon_pagerank(w, *alpha),
        _ => unsupported("graphon certificates cover katz and pagerank"),
    }
}

fn graphon_sensitivity(w: &StepGraphon, map: &FixedPointMap) -> DMatrix<f64> {
    match map {
        FixedPointMap::Pagerank { .. } => graphon_pagerank_operator(w),
        _ => w.operator_matrix(),
    }
}

struct GraphonPair {
    consts: LipschitzConstants,
    rho_a: StepFunction,
    rho_b: StepFunction,
    norms: [f64; 2],
    notes: Vec<String>,
}

/// Solves both graphons and, when `normalized`, divides by the integral so
/// that both centralities are densities.
///
/// Katz features satisfy `x >= 1` on non-negative graphons, so with
/// `s = int x >= 1` and `|int (x - v)| <= ||x - v||_2`,
/// `||x/sx - v/sv||_2 <= (1 + R) ||x - v||_2`. PageRank features satisfy
/// `x >= 1 - alpha`, giving `Lg = 2 / (1 - alpha)` in `L^1`.
fn graphon_pair(a: &StepGraphon, b: &StepGraphon, map: &FixedPointMap, normalized: bool) -> Result<GraphonPair> {
    if a.k() != b.k() {
        return param(format!("graphons have {} and {} blocks", a.k(), b.k()));
    }
    let consts = graphon_constants(a, map)?;
    let xa = graphon_fixed_point(a, map)?;
    let xb = graphon_fixed_point(b, map)?;
    let p = consts.norm_p;
    let norms = [xa.lp_norm(p), xb.lp_norm(p)];
    let mass_ok = |x: &StepFunction| (x.integral() - 1.0).abs() <= MASS_TOLERANCE;
    let rescale = normalized && !(mass_ok(&xa) && mass_ok(&xb));
    let lg_of_radius = |r: f64| -> Result<f64> {
        if !rescale {
            return Ok(1.0);
        }
        match map {
            FixedPointMap::Katz { .. } => {
                if a.values().iter().chain(b.values().iter()).any(|v| *v < 0.0) {
                    return precondition("normalizing graphon katz needs non-negative values");
                }
                Ok(1.0 + r)
            }
            FixedPointMap::Pagerank { alpha } => Ok(2.0 / (1.0 - alpha)),
            _ => unsupported("graphon certificates cover katz and pagerank"),
        }
    };
    let mut consts = consts;
    consts.lg = lg_of_radius(consts.feasible_radius)?;
    let mut notes = Vec::new();
    let lg_after = lg_of_radius(norms[0].max(norms[1]).max(consts.feasible_radius))?;
    let consts = contain_features(&consts, map.alpha(), norms, &mut notes, |_| lg_after);
    if let FixedPointMap::Pagerank { .. } = map {
        notes.push("graphon distance measured between the effective kernels W / D".into());
    }
    let (rho_a, rho_b) = if rescale {
        notes.push("centralities divided by their integrals".into());
        let scale = |x: StepFunction| {
            let s = x.integral();
            StepFunction::new(x.values().iter().map(|v| v / s).collect())
        };
        (scale(xa)?, scale(xb)?)
    } else {
        (xa, xb)
    };
    Ok(GraphonPair {
        consts,
        rho_a,
        rho_b,
        norms,
        notes,
    })
}

#[derive(Serialize)]
struct GraphonInputs<'a> {
    kind: BoundKind,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    map: &'a FixedPointMap,
    perm_mode: Option<PermMode>,
}

/// `||rho_A - rho_B||_p <= L1 Lg / (1 - L0) ||W_A - W_B||_op` in `L^p([0, 1])`.
pub fn theorem2_certificate(a: &StepGraphon, b: &StepGraphon, map: &FixedPointMap) -> Result<BoundCertificate> {
    let pair = graphon_pair(a, b, map, false)?;
    let p = pair.consts.norm_p;
    let distance = operator_norm(&(graphon_sensitivity(a, map) - graphon_sensitivity(b, map)), p)?;
    let observed = pair.rho_a.sub(&pair.rho_b)?.lp_norm(p);
    let inputs = GraphonInputs {
        kind: BoundKind::Theorem2,
        a: rows(a.values()),
        b: rows(b.values()),
        map,
        perm_mode: None,
    };
    Ok(certificate(
        BoundKind::Theorem2,
        map.name(),
        pair.consts,
        distance,
        distance,
        distance_kind(map, p),
        observed,
        true,
        None,
        None,
        pair.norms,
        pair.notes,
        digest(&inputs),
    ))
}

/// `min` over block relabelings of `||rho_A^pi - rho_B||_{L^p}`.
fn block_permutation_cost(a: &StepFunction, b: &StepFunction, p: NormP) -> Result<f64> {
    let k = a.k() as f64;
    let (v, _) = permutation_cost(a.values(), b.values(), p)?;
    Ok(match p {
        NormP::One => v / k,
        NormP::Two => v / k.sqrt(),
        NormP::Inf => v,
    })
}

const BLOCK_NOTE: &str =
    "minimum taken over block relabelings only, an upper bound on the infimum over measure-preserving maps";

/// Graphon analogue of the permuted operator-norm bound, over block
/// relabelings.
pub fn prop9_certificate(
    a: &StepGraphon,
    b: &StepGraphon,
    map: &FixedPointMap,
    perm_mode: PermMode,
) -> Result<BoundCertificate> {
    let pair = graphon_pair(a, b, map, true)?;
    let p = pair.consts.norm_p;
    let observed = block_permutation_cost(&pair.rho_a, &pair.rho_b, p)?;
    let (distance, permutation, exact) = match map {
        FixedPointMap::Pagerank { .. } => {
            let ka = Graph::from_matrix(graphon_pagerank_operator(a))?;
            let kb = Graph::from_matrix(graphon_pagerank_operator(b))?;
            let d = min_permuted_distance(&ka, &kb, NormKind::operator(p), perm_mode)?;
            (d.value, d.permutation, d.certified)
        }
        _ => {
            let d = graphon_block_distance(a, b, NormKind::operator(p), perm_mode)?;
            (d.value, d.permutation, d.exact_over_blocks)
        }
    };
    let mut notes = pair.notes;
    notes.push(BLOCK_NOTE.into());
    if !exact {
        notes.push("block search is heuristic".into());
    }
    let inputs = GraphonInputs {
        kind: BoundKind::Prop9,
        a: rows(a.values()),
        b: rows(b.values()),
        map,
        perm_mode: Some(perm_mode),
    };
    Ok(certificate(
        BoundKind::Prop9,
        map.name(),
        pair.consts,
        distance,
        distance,
        distance_kind(map, p),
        observed,
        false,
        Some(TransportConvention::PermutationCost),
        Some(permutation),
        pair.norms,
        notes,
        digest(&inputs),
    ))
}

/// Graphon cut-distance bound for `W_A, W_B` with values in `[-1, 1]`.
pub fn prop10_certificate(
    a: &StepGraphon,
    b: &StepGraphon,
    map: &FixedPointMap,
    perm_mode: PermMode,
) -> Result<BoundCertificate> {
    if !a.in_wc(1.0) || !b.in_wc(1.0) {
        return precondition("the cut-norm bound needs graphon values in [-1, 1]");
    }
    let pair = graphon_pair(a, b, map, true)?;
    if pair.consts.norm_p != NormP::Two {
        return precondition("the cut-norm bound needs constants in L^2");
    }
    let observed = block_permutation_cost(&pair.rho_a, &pair.rho_b, NormP::Two)?;
    let d = graphon_cut_distance_blocks(a, b, perm_mode)?;
    let mut notes = pair.notes;
    notes.push(BLOCK_NOTE.into());
    if !d.exact_over_blocks {
        notes.push("block search is heuristic".into());
    }
    let spread = (d.permutation.permute_matrix(a.values()) - b.values()).amax();
    if spread > 1.0 {
        notes.push(format!(
            "W_A^pi - W_B takes the value {spread}, outside [-1, 1] where the operator norm is bounded by sqrt(8 cut)"
        ));
    }
    let inputs = GraphonInputs {
        kind: BoundKind::Prop10,
        a: rows(a.values()),
        b: rows(b.values()),
        map,
        perm_mode: Some(perm_mode),
    };
    Ok(certificate(
        BoundKind::Prop10,
        map.name(),
        pair.consts,
        (8.0 * d.value).sqrt(),
        d.value,
        "cut".into(),
        observed,
        false,
        Some(TransportConvention::PermutationCost),
        Some(d.permutation),
        pair.norms,
        notes,
        digest(&inputs),
    ))
}

/// Both graphon transport bounds for one pair.
pub fn prop9_prop10_certificates(
    a: &StepGraphon,
    b: &StepGraphon,
    map: &FixedPointMap,
    perm_mode: PermMode,
) -> Result<(BoundCertificate, BoundCertificate)> {
    Ok((
        prop9_certificate(a, b, map, perm_mode)?,
        prop10_certificate(a, b, map, perm_mode)?,
    ))
}

/// Operator-norm distance between two graphs under the chosen norm, exposed
/// for reports.
pub fn graph_distance(a: &Graph, b: &Graph, kind: NormKind) -> Result<f64> {
    if a.n() != b.n() {
        return param(format!("graphs have {} and {} nodes", a.n(), b.n()));
    }
    matrix_norm(&(a.weights() - b.weights()), kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, generate, permute, GraphGeneratorSpec};
    use crate::graphon::lift;
    use approx::assert_abs_diff_eq;

    fn katz(alpha: f64) -> FixedPointMap {
        FixedPointMap::Katz { alpha }
    }

    fn pagerank(alpha: f64) -> FixedPointMap {
        FixedPointMap::Pagerank { alpha }
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, symmetric: bool) -> Graph {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && (!symmetric || i < j) && rng.gen_bool(0.5) {
                    let w = rng.gen_range(0.1..1.0);
                    m[(i, j)] = w;
                    if symmetric {
                        m[(j, i)] = w;
                    }
                }
            }
        }
        Graph::from_matrix(m).unwrap()
    }

    fn binary_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Graph {
        generate(&GraphGeneratorSpec::erdos_renyi(n, 0.5, rng.gen())).unwrap()
    }

    /// `B = A + E` with `E` scaled to the requested operator norm, clipped to
    /// non-negative weights.
    fn perturb(rng: &mut ChaCha8Rng, a: &Graph, size: f64, symmetric: bool) -> Graph {
        let n = a.n();
        let mut e = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        if symmetric {
            e = (&e + e.transpose()) * 0.5;
        }
        let norm = operator_norm(&e, NormP::Two).unwrap().max(1e-12);
        let b = (a.weights() + e * (size / norm)).map(|v: f64| v.max(0.0));
        Graph::from_matrix(b).unwrap()
    }

    #[test]
    fn analytic_examples() {
        let k2 = complete(2);
        let c = constants_analytic(&k2, &katz(0.5)).unwrap();
        assert_abs_diff_eq!(c.l0, 0.5, epsilon = 1e-12);
        assert_eq!(c.lg, 1.0);
        assert_eq!(c.norm_p, NormP::Two);
        assert_abs_diff_eq!(c.feasible_radius, 2f64.sqrt() / 0.5 + 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.l1, 0.5 * c.feasible_radius, epsilon = 1e-12);

        let zero = constants_analytic(&Graph::zeros(3).unwrap(), &katz(0.7)).unwrap();
        assert_eq!(zero.l0, 0.0);

        let tri = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let pr = constants_analytic(&tri, &pagerank(0.85)).unwrap();
        assert_abs_diff_eq!(pr.l0, 0.85, epsilon = 1e-15);
        assert_eq!(pr.norm_p, NormP::One);

        let dangling = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!(constants_analytic(&dangling, &pagerank(0.85)).unwrap().l0 <= 0.85);

        assert!(matches!(
            constants_analytic(&k2, &FixedPointMap::Eigen),
            Err(FpcError::Unsupported(_))
        ));
    }

    #[test]
    fn normalizer_constants() {
        let g = cycle(5);
        let c = constants_analytic_with(&g, &katz(0.3), Some(Normalizer::Identity)).unwrap();
        assert_abs_diff_eq!(c.lg, (1.0 + 5f64.sqrt()) / 5.0, epsilon = 1e-15);
        let p = constants_analytic_with(&g, &pagerank(0.8), Some(Normalizer::Identity)).unwrap();
        assert_abs_diff_eq!(p.lg, 2.0 / 0.2, epsilon = 1e-12);
        let signed = Graph::from_rows(&[vec![0.0, -0.5], vec![-0.5, 0.0]]).unwrap();
        assert!(matches!(
            constants_analytic_with(&signed, &katz(0.5), Some(Normalizer::Identity)),
            Err(FpcError::Precondition(_))
        ));
        assert_eq!(
            constants_analytic_with(&signed, &katz(0.5), Some(Normalizer::Exp))
                .unwrap()
                .lg,
            1.0
        );
    }

    #[test]
    fn empirical_never_exceeds_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..100 {
            let n = rng.gen_range(2..9);
            let g = random_graph(&mut rng, n, seed % 2 == 0);
            for (map, normalizer) in [
                (
                    katz(0.9 / operator_norm(g.weights(), NormP::Two).unwrap().max(1.0)),
                    None,
                ),
                (pagerank(0.85), None),
                (
                    katz(0.2 / operator_norm(g.weights(), NormP::Two).unwrap().max(1.0)),
                    Some(Normalizer::Identity),
                ),
                (pagerank(0.5), Some(Normalizer::Identity)),
            ] {
                let an = constants_analytic_with(&g, &map, normalizer).unwrap();
                let em = constants_empirical_with(&g, &map, normalizer, 20, seed).unwrap();
                assert!(em.l0 <= an.l0 + 1e-9, "L0 {} > {}", em.l0, an.l0);
                assert!(em.l1 <= an.l1 + 1e-9, "L1 {} > {}", em.l1, an.l1);
                assert!(em.lg <= an.lg + 1e-9, "Lg {} > {}", em.lg, an.lg);
                assert_eq!(em.method, ConstantsMethod::Empirical);
            }
        }
    }

    #[test]
    fn empirical_affine_contraction() {
        let n = 4;
        let matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.3 } else { 0.0 }).collect())
            .collect();
        let map = FixedPointMap::Affine {
            matrix,
            offset: vec![1.0, 2.0, 0.5, 0.0],
        };
        let g = Graph::zeros(n).unwrap();
        let c = constants_empirical(&g, &map, 50, 7).unwrap();
        assert_abs_diff_eq!(c.l0, 0.3, epsilon = 1e-12);
        assert_eq!(c.l1, 0.0);
        assert_eq!(c.lg, 1.0);
        assert!(constants_empirical(&g, &map, 1, 7).is_err());
    }

    #[test]
    fn theorem1_examples() {
        let map = katz(0.25);
        let a = cycle(6);
        let c = constants_analytic(&a, &map).unwrap();
        let same = theorem1_certificate(&a, &a, &map, &c).unwrap();
        assert_eq!((same.observed, same.bound, same.slack), (0.0, 0.0, 0.0));
        assert!(same.holds && same.certified);

        let mut w = a.weights().clone();
        w[(0, 1)] = 0.9;
        w[(1, 0)] = 0.9;
        let b = Graph::from_matrix(w).unwrap();
        let cert = theorem1_certificate(&a, &b, &map, &c).unwrap();
        assert!(cert.holds && cert.observed > 0.0, "{cert:?}");
        assert_eq!(cert.inputs_digest.len(), 64);
    }

    #[test]
    fn theorem1_random_pairs_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..100 {
            let n = rng.gen_range(3..12);
            let a = random_graph(&mut rng, n, i % 2 == 0);
            let size = rng.gen_range(0.0..0.5);
            let b = perturb(&mut rng, &a, size, i % 2 == 0);
            let norm = operator_norm(a.weights(), NormP::Two).unwrap();
            for map in [
                katz(rng.gen_range(0.05..0.95) / norm.max(1.0)),
                pagerank(rng.gen_range(0.1..0.9)),
            ] {
                let c = constants_analytic(&a, &map).unwrap();
                match theorem1_certificate(&a, &b, &map, &c) {
                    Ok(cert) => assert!(cert.holds, "{cert:?}"),
                    // B may leave the Katz domain after a perturbation
                    Err(FpcError::Parameter(_)) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn theorem1_refuses_non_contraction() {
        let a = cycle(4);
        let mut c = constants_analytic(&a, &katz(0.25)).unwrap();
        c.l0 = 1.0;
        assert!(matches!(
            theorem1_certificate(&a, &a, &katz(0.25), &c),
            Err(FpcError::Precondition(_))
        ));
        assert!(theorem1_certificate(&a, &cycle(5), &katz(0.25), &c).is_err());
    }

    #[test]
    fn bound_is_monotone_in_perturbation_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_graph(&mut rng, 6, true);
        let e = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(0.0..1.0));
        for map in [katz(0.1), pagerank(0.85)] {
            let c = constants_analytic(&a, &map).unwrap();
            let mut last = (-1.0, -1.0);
            for step in 0..10 {
                let t = step as f64 * 0.05;
                let b = Graph::from_matrix(a.weights() + &e * t).unwrap();
                let cert = theorem1_certificate(&a, &b, &map, &c).unwrap();
                assert!(cert.holds);
                if cert.distance >= last.0 {
                    assert!(cert.bound >= last.1 - 1e-15);
                }
                last = (cert.distance, cert.bound);
            }
        }
    }

    #[test]
    fn digests_are_reproducible() {
        let map = katz(0.2);
        let a = cycle(5);
        let b = complete(5);
        let c = constants_analytic(&a, &map).unwrap();
        let one = serde_json::to_string(&theorem1_certificate(&a, &b, &map, &c).unwrap()).unwrap();
        let two = serde_json::to_string(&theorem1_certificate(&a, &b, &map, &c).unwrap()).unwrap();
        assert_eq!(one, two);
        let other = theorem1_certificate(&b, &a, &map, &c).unwrap();
        assert!(!one.contains(&other.inputs_digest));
    }

    #[test]
    fn certificate_json_fields() {
        let a = cycle(4);
        let c = constants_analytic(&a, &katz(0.2)).unwrap();
        let cert = theorem1_certificate(&a, &a, &katz(0.2), &c).unwrap();
        let v: serde_json::Value = serde_json::to_value(&cert).unwrap();
        for key in [
            "bound",
            "observed",
            "holds",
            "slack",
            "certified",
            "norm",
            "inputs_digest",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["L0", "L1", "Lg", "R", "method"] {
            assert!(v["constants"].get(key).is_some(), "{key}");
        }
        assert_eq!(v["norm"], "2");
        assert_eq!(v["constants"]["method"], "analytic");
    }

    #[test]
    fn prop6_examples() {
        let map = katz(0.2);
        let a = cycle(5);
        let c = constants_analytic_with(&a, &map, Some(Normalizer::Identity)).unwrap();
        let conv = TransportConvention::PermutationCost;
        let same = prop6_certificate(&a, &a, &map, &c, PermMode::Exact, conv).unwrap();
        assert!(same.holds && same.bound == 0.0 && same.observed == 0.0);

        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (3, 4, 0.5)]).unwrap();
        let p = Permutation::new(vec![3, 0, 4, 1, 2]).unwrap();
        let gp = permute(&g, &p).unwrap();
        let c = constants_analytic_with(&g, &map, Some(Normalizer::Identity)).unwrap();
        let cert = prop6_certificate(&g, &gp, &map, &c, PermMode::Exact, conv).unwrap();
        assert_abs_diff_eq!(cert.bound, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.observed, 0.0, epsilon = 1e-15);
        assert!(cert.holds && cert.certified);

        let unnormalized = constants_analytic(&g, &map).unwrap();
        assert!(matches!(
            prop6_certificate(&g, &gp, &map, &unnormalized, PermMode::Exact, conv),
            Err(FpcError::Precondition(_))
        ));
    }

    #[test]
    fn prop6_random_pairs_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a = random_graph(&mut rng, 5, false);
            let b = random_graph(&mut rng, 5, false);
            for map in [katz(0.1), pagerank(0.85)] {
                let c = constants_analytic_with(&a, &map, Some(Normalizer::Identity)).unwrap();
                let cert =
                    prop6_certificate(&a, &b, &map, &c, PermMode::Exact, TransportConvention::PermutationCost).unwrap();
                assert!(cert.holds && cert.certified, "{cert:?}");
                let greedy =
                    prop6_certificate(&a, &b, &map, &c, PermMode::Greedy, TransportConvention::PermutationCost)
                        .unwrap();
                assert!(!greedy.certified && greedy.bound >= cert.bound - 1e-12);
                let grid =
                    prop6_certificate(&a, &b, &map, &c, PermMode::Exact, TransportConvention::GridEmbedding).unwrap();
                assert!(!grid.certified);
            }
        }
    }

    #[test]
    fn prop7_examples() {
        let map = katz(0.2);
        let k4 = complete(4);
        let c = constants_analytic_with(&k4, &map, Some(Normalizer::Identity)).unwrap();
        let same = prop7_certificate(&k4, &k4, &map, &c, PermMode::Exact).unwrap();
        assert!(same.holds && same.bound == 0.0);

        let mut w = k4.weights().clone();
        w[(0, 1)] = 0.0;
        w[(1, 0)] = 0.0;
        let minus = Graph::from_matrix(w).unwrap();
        let cert = prop7_certificate(&k4, &minus, &map, &c, PermMode::Exact).unwrap();
        assert!(cert.holds && cert.certified, "{cert:?}");
        assert_abs_diff_eq!(cert.distance, 2.0, epsilon = 1e-12);

        let heavy = Graph::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let c2 = constants_analytic_with(&heavy, &katz(0.2), Some(Normalizer::Identity)).unwrap();
        assert!(matches!(
            prop7_certificate(&heavy, &heavy, &katz(0.2), &c2, PermMode::Exact),
            Err(FpcError::Precondition(_))
        ));
        let pr = constants_analytic(&k4, &pagerank(0.85)).unwrap();
        assert!(prop7_certificate(&k4, &minus, &pagerank(0.85), &pr, PermMode::Exact).is_err());
    }

    #[test]
    fn prop7_random_pairs_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.gen_range(3..8);
            let a = binary_symmetric(&mut rng, n);
            let b = binary_symmetric(&mut rng, n);
            let alpha = 0.5 / operator_norm(a.weights(), NormP::Two).unwrap().max(1.0);
            let c = constants_analytic_with(&a, &katz(alpha), Some(Normalizer::Identity)).unwrap();
            match prop7_certificate(&a, &b, &katz(alpha), &c, PermMode::Exact) {
                Ok(cert) => assert!(cert.holds && cert.certified, "{cert:?}"),
                Err(FpcError::Parameter(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn theorem2_examples() {
        let a = StepGraphon::constant(1, 0.5).unwrap();
        let same = theorem2_certificate(&a, &a, &katz(0.5)).unwrap();
        assert!(same.holds && same.bound == 0.0);
        let b = StepGraphon::constant(1, 0.45).unwrap();
        let cert = theorem2_certificate(&a, &b, &katz(0.5)).unwrap();
        // rho = 1 / (1 - alpha c): 4/3 against 1/(1 - 0.225)
        assert_abs_diff_eq!(cert.observed, 4.0 / 3.0 - 1.0 / 0.775, epsilon = 1e-12);
        assert!(cert.holds);
        assert!(theorem2_certificate(&a, &StepGraphon::constant(2, 0.5).unwrap(), &katz(0.5)).is_err());
    }

    #[test]
    fn theorem2_on_lifts_tracks_finite_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = rng.gen_range(3..9);
            let a = binary_symmetric(&mut rng, n);
            let b = binary_symmetric(&mut rng, n);
            let alpha = 0.5;
            let graphon =
                theorem2_certificate(&lift(&a, None).unwrap(), &lift(&b, None).unwrap(), &katz(alpha)).unwrap();
            let map = katz(alpha / n as f64);
            let finite = theorem1_certificate(&a, &b, &map, &constants_analytic(&a, &map).unwrap()).unwrap();
            let scale = (n as f64).sqrt();
            assert_abs_diff_eq!(graphon.constants.l0, finite.constants.l0, epsilon = 1e-12);
            assert_abs_diff_eq!(graphon.observed, finite.observed / scale, epsilon = 1e-10);
            assert_abs_diff_eq!(graphon.distance, finite.distance / n as f64, epsilon = 1e-10);
            // the graphon ball keeps a margin of 1 where the lifted one has 1/sqrt(n)
            assert!(graphon.bound >= finite.bound / scale - 1e-12);
            assert!(graphon.bound <= finite.bound + 1e-12);
            assert!(graphon.holds && finite.holds);
        }
    }

    #[test]
    fn graphon_transport_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let random = |rng: &mut ChaCha8Rng| {
            let mut v = DMatrix::zeros(5, 5);
            for i in 0..5 {
                for j in i..5 {
                    let x = rng.gen_range(0.05..1.0);
                    v[(i, j)] = x;
                    v[(j, i)] = x;
                }
            }
            StepGraphon::new(v, Some(1.0)).unwrap()
        };
        for _ in 0..10 {
            let a = random(&mut rng);
            let b = random(&mut rng);
            for map in [katz(0.5), pagerank(0.85)] {
                let p9 = prop9_certificate(&a, &b, &map, PermMode::Exact).unwrap();
                assert!(p9.holds && !p9.certified, "{p9:?}");
            }
            let (p9, p10) = prop9_prop10_certificates(&a, &b, &katz(0.5), PermMode::Exact).unwrap();
            assert!(p9.holds && p10.holds);
            assert!(prop10_certificate(&a, &b, &pagerank(0.85), PermMode::Exact).is_err());

            let same = prop9_certificate(&a, &a, &katz(0.5), PermMode::Exact).unwrap();
            assert!(same.holds && same.bound == 0.0 && same.observed == 0.0);
            let perm = Permutation::new(vec![4, 2, 0, 1, 3]).unwrap();
            let relabeled = a.relabel(&perm).unwrap();
            for cert in [
                prop9_certificate(&a, &relabeled, &katz(0.5), PermMode::Exact).unwrap(),
                prop10_certificate(&a, &relabeled, &katz(0.5), PermMode::Exact).unwrap(),
            ] {
                assert_abs_diff_eq!(cert.bound, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(cert.observed, 0.0, epsilon = 1e-12);
            }
        }
    }
}
