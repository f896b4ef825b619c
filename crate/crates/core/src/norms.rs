//! Vector and matrix norms, the exact cut norm, and relabeling-minimised
//! distances between graphs.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, FpcError, Result};
use crate::graph::{degree_vector, Graph, Permutation};

/// Largest matrix for which the cut norm is computed by subset enumeration.
pub const MAX_EXACT_CUT_N: usize = 22;
/// Largest graph for which distances are minimised over all `n!` relabelings.
pub const MAX_EXACT_PERMUTATION_N: usize = 8;

pub const POWER_ITERATION_TOLERANCE: f64 = 1e-10;
pub const POWER_ITERATION_MAX_STEPS: usize = 10_000;
const POLISH_STEPS: usize = 100;

/// The vector `p` in an `l_p` norm, restricted to the three cases with a
/// closed-form induced matrix norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormP {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl NormP {
    pub fn as_str(self) -> &'static str {
        match self {
            NormP::One => "1",
            NormP::Two => "2",
            NormP::Inf => "inf",
        }
    }
}

impl std::str::FromStr for NormP {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "p1" => Ok(NormP::One),
            "2" | "p2" => Ok(NormP::Two),
            "inf" | "pinf" => Ok(NormP::Inf),
            other => param(format!("unknown norm '{other}', expected 1, 2 or inf")),
        }
    }
}

/// A matrix norm: one of the induced operator norms, or the cut norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    P1,
    P2,
    Pinf,
    Cut,
}

impl NormKind {
    pub fn operator(p: NormP) -> Self {
        match p {
            NormP::One => NormKind::P1,
            NormP::Two => NormKind::P2,
            NormP::Inf => NormKind::Pinf,
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(NormKind::Cut),
            other => other.parse::<NormP>().map(NormKind::operator),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermMode {
    Exact,
    Greedy,
}

impl std::str::FromStr for PermMode {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PermMode::Exact),
            "greedy" => Ok(PermMode::Greedy),
            other => param(format!("unknown permutation mode '{other}'")),
        }
    }
}

pub fn vector_norm(v: &[f64], p: NormP) -> f64 {
    match p {
        NormP::One => v.iter().map(|x| x.abs()).sum(),
        NormP::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormP::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Induced matrix norm. `p = 1` is the largest column absolute sum, `p = inf`
/// the largest row absolute sum, and `p = 2` the largest singular value,
/// found by power iteration on `A^T A`.
pub fn operator_norm(m: &DMatrix<f64>, p: NormP) -> Result<f64> {
    match p {
        NormP::One => Ok(m
            .column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)),
        NormP::Inf => Ok(m
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)),
        NormP::Two => spectral_norm(m),
    }
}

/// Deterministic, generic start vector for power iterations.
pub(crate) fn start_vector(n: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_c0de);
    let v = DVector::from_fn(n, |_, _| 1.0 + rng.gen::<f64>());
    let norm = v.norm();
    v / norm
}

fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let mut v = start_vector(m.ncols());
    let mut sigma = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..POWER_ITERATION_MAX_STEPS {
        let w = m * &v;
        let next_sigma = w.norm();
        let u = m.tr_mul(&w);
        let u_norm = u.norm();
        if u_norm == 0.0 {
            // Start vector fell into the null space; nudge it along a basis
            // direction that is not annihilated.
            let col = m
                .column_iter()
                .position(|c| c.iter().any(|&x| x != 0.0))
                .expect("matrix is nonzero");
            v[col] += 1.0;
            v /= v.norm();
            continue;
        }
        change = (next_sigma - sigma).abs();
        sigma = next_sigma;
        v = u / u_norm;
        if change <= POWER_ITERATION_TOLERANCE * sigma {
            return Ok(polish(m, v, sigma));
        }
    }
    Err(FpcError::NonConvergence {
        iterations: POWER_ITERATION_MAX_STEPS,
        residual: change / sigma.max(f64::MIN_POSITIVE),
        last_iterate: v.iter().copied().collect(),
    })
}

/// A few extra steps past the stopping rule. The Rayleigh estimate is a lower
/// bound that keeps increasing, so this only tightens it; on well separated
/// spectra it reaches machine precision.
fn polish(m: &DMatrix<f64>, mut v: DVector<f64>, mut sigma: f64) -> f64 {
    for _ in 0..POLISH_STEPS {
        let w = m * &v;
        let next = w.norm();
        let u = m.tr_mul(&w);
        let u_norm = u.norm();
        if u_norm == 0.0 || next <= sigma {
            return sigma.max(next);
        }
        sigma = next;
        v = u / u_norm;
    }
    sigma
}

/// A maximising rectangle for the cut norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutNormWitness {
    pub value: f64,
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
}

impl CutNormWitness {
    fn from_masks(m: &DMatrix<f64>, s_mask: u64, t_mask: u64) -> Self {
        let s = mask_to_indices(s_mask, m.nrows());
        let t = mask_to_indices(t_mask, m.ncols());
        CutNormWitness {
            value: rectangle_sum(m, &s, &t).abs(),
            s,
            t,
        }
    }
}

fn mask_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// `sum_{i in s, j in t} m_ij`.
pub fn rectangle_sum(m: &DMatrix<f64>, s: &[usize], t: &[usize]) -> f64 {
    s.iter().map(|&i| t.iter().map(|&j| m[(i, j)]).sum::<f64>()).sum()
}

fn tie_tolerance(m: &DMatrix<f64>) -> f64 {
    1e-12 * (1.0 + m.iter().map(|x| x.abs()).sum::<f64>())
}

/// Best column set for a fixed row set given its column sums: the columns
/// with positive sums, or those with negative sums, whichever side is larger.
/// Returns `(value, t_mask)`; ties go to the smaller mask.
fn best_columns(col_sums: &[f64], zero: f64) -> (f64, u64) {
    let (mut pos, mut neg) = (0.0, 0.0);
    let (mut pos_mask, mut neg_mask) = (0u64, 0u64);
    for (j, &c) in col_sums.iter().enumerate() {
        if c > zero {
            pos += c;
            pos_mask |= 1 << j;
        } else if c < -zero {
            neg -= c;
            neg_mask |= 1 << j;
        }
    }
    if pos > neg + zero || ((neg - pos).abs() <= zero && pos_mask <= neg_mask) {
        (pos, pos_mask)
    } else {
        (neg, neg_mask)
    }
}

/// Exact cut norm `max_{S,T} |sum_{i in S, j in T} a_ij|` (no `1/n^2` scaling).
///
/// Enumerates every row subset `S` in Gray-code order with incrementally
/// updated column sums; for fixed `S` the optimal `T` collects the columns
/// whose sums share the sign of the better side. Ties are broken toward the
/// smallest row mask, then the smallest column mask, where bit `i` of a mask
/// stands for node `i`.
pub fn cut_norm_exact(m: &DMatrix<f64>) -> Result<CutNormWitness> {
    let (rows, cols) = m.shape();
    if rows > MAX_EXACT_CUT_N || cols > 63 {
        return Err(FpcError::SizeLimit {
            what: "exact cut norm",
            n: rows,
            limit: MAX_EXACT_CUT_N,
            hint: Some("use cut_norm_heuristic for a certified lower bound".into()),
        });
    }
    let tol = tie_tolerance(m);
    let mut col_sums = vec![0.0; cols];
    let (mut best, mut best_s, mut best_t) = (0.0, 0u64, 0u64);
    let mut s_mask = 0u64;
    for k in 1u64..(1u64 << rows) {
        let bit = k.trailing_zeros() as usize;
        s_mask ^= 1 << bit;
        let sign = if s_mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
        for (j, c) in col_sums.iter_mut().enumerate() {
            *c += sign * m[(bit, j)];
        }
        let (value, t_mask) = best_columns(&col_sums, tol);
        if value > best + tol || (value - best).abs() <= tol && (s_mask, t_mask) < (best_s, best_t) {
            best = value;
            best_s = s_mask;
            best_t = t_mask;
        }
    }
    Ok(CutNormWitness::from_masks(m, best_s, best_t))
}

/// Cut-norm value only; used inside permutation searches.
fn cut_norm_value(m: &DMatrix<f64>) -> Result<f64> {
    cut_norm_exact(m).map(|w| w.value)
}

/// Alternating-maximisation lower bound on the cut norm.
///
/// Each restart draws a random nonempty row set, then alternates between the
/// optimal column set for the current rows and the optimal row set for the
/// current columns until the value stops increasing. Both signs are tried.
/// Every returned witness is a feasible rectangle, so the value never exceeds
/// the exact cut norm.
pub fn cut_norm_heuristic(m: &DMatrix<f64>, restarts: usize, seed: u64) -> Result<CutNormWitness> {
    if restarts == 0 {
        return param("cut_norm_heuristic needs at least one restart");
    }
    let (rows, cols) = m.shape();
    let tol = tie_tolerance(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = CutNormWitness {
        value: 0.0,
        s: Vec::new(),
        t: Vec::new(),
    };
    for _ in 0..restarts {
        let mut start: Vec<bool> = (0..rows).map(|_| rng.gen_bool(0.5)).collect();
        if !start.iter().any(|&b| b) {
            start[rng.gen_range(0..rows)] = true;
        }
        for sign in [1.0, -1.0] {
            let mut s_set = start.clone();
            let mut current = f64::NEG_INFINITY;
            let mut t_set;
            loop {
                let col_sums: Vec<f64> = (0..cols)
                    .map(|j| sign * (0..rows).filter(|&i| s_set[i]).map(|i| m[(i, j)]).sum::<f64>())
                    .collect();
                t_set = col_sums.iter().map(|&c| c > tol).collect::<Vec<_>>();
                let row_sums: Vec<f64> = (0..rows)
                    .map(|i| sign * (0..cols).filter(|&j| t_set[j]).map(|j| m[(i, j)]).sum::<f64>())
                    .collect();
                let next_s: Vec<bool> = row_sums.iter().map(|&r| r > tol).collect();
                let value: f64 = row_sums.iter().filter(|&&r| r > tol).sum();
                if value <= current + tol {
                    break;
                }
                current = value;
                s_set = next_s;
            }
            let s: Vec<usize> = (0..rows).filter(|&i| s_set[i]).collect();
            let t: Vec<usize> = (0..cols).filter(|&j| t_set[j]).collect();
            let value = rectangle_sum(m, &s, &t).abs();
            if value > best.value + tol {
                best = CutNormWitness { value, s, t };
            }
        }
    }
    Ok(best)
}

/// Any of the four matrix norms.
pub fn matrix_norm(m: &DMatrix<f64>, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::P1 => operator_norm(m, NormP::One),
        NormKind::P2 => operator_norm(m, NormP::Two),
        NormKind::Pinf => operator_norm(m, NormP::Inf),
        NormKind::Cut => cut_norm_value(m),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutedDistance {
    pub value: f64,
    pub permutation: Permutation,
    /// True when `value` is the exact minimum over all relabelings; false when
    /// it is the distance for one heuristic relabeling (an upper bound).
    pub certified: bool,
}

/// `min_pi || P_pi A P_pi^T - B ||` under the chosen norm.
///
/// Exact mode enumerates all relabelings in lexicographic order and keeps the
/// first minimiser. Greedy mode matches nodes by sorted degree (ties by index)
/// and reports that single relabeling's distance, an upper bound.
pub fn min_permuted_distance(a: &Graph, b: &Graph, norm: NormKind, mode: PermMode) -> Result<PermutedDistance> {
    let n = a.n();
    if b.n() != n {
        return param(format!("graphs have {} and {} nodes", n, b.n()));
    }
    let distance = |p: &Permutation| matrix_norm(&(p.permute_matrix(a.weights()) - b.weights()), norm);
    match mode {
        PermMode::Exact => {
            if n > MAX_EXACT_PERMUTATION_N {
                return Err(FpcError::SizeLimit {
                    what: "exact permutation search",
                    n,
                    limit: MAX_EXACT_PERMUTATION_N,
                    hint: Some("use greedy mode for an upper bound".into()),
                });
            }
            let mut best: Option<(f64, Permutation)> = None;
            for mapping in (0..n).permutations(n) {
                let p = Permutation::new(mapping)?;
                let d = distance(&p)?;
                let better = match &best {
                    None => true,
                    Some((v, _)) => d < v - 1e-12 * (1.0 + v.abs()),
                };
                if better {
                    best = Some((d, p));
                }
            }
            let (value, permutation) = best.expect("at least one permutation");
            Ok(PermutedDistance {
                value,
                permutation,
                certified: true,
            })
        }
        PermMode::Greedy => {
            let permutation = degree_matching(a, b);
            Ok(PermutedDistance {
                value: distance(&permutation)?,
                permutation,
                certified: false,
            })
        }
    }
}

/// Maps the k-th node of `a` in (degree, index) order to the k-th node of `b`.
pub fn degree_matching(a: &Graph, b: &Graph) -> Permutation {
    let order = |g: &Graph| {
        let d = degree_vector(g);
        let mut idx: Vec<usize> = (0..g.n()).collect();
        idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
        idx
    };
    let (oa, ob) = (order(a), order(b));
    let mut mapping = vec![0; a.n()];
    for (&i, &j) in oa.iter().zip(&ob) {
        mapping[i] = j;
    }
    Permutation::new(mapping).expect("matching of two orderings is a bijection")
}
