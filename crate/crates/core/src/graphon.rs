//! Step-function graphons on uniform partitions of `[0, 1]`.
//!
//! A step graphon with `k` blocks acts on step functions with the same blocks
//! as the matrix `values / k`. Every integral below is exact for that reason.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::centrality::{eigencentrality, EigenTarget, SIMPLICITY_GAP};
use crate::error::{param, FpcError, Result};
use crate::graph::{Graph, Permutation, WEIGHT_TOLERANCE};
use crate::norms::{cut_norm_exact, min_permuted_distance, operator_norm, CutNormWitness, NormKind, NormP, PermMode};

/// Agreement required between the direct and the iterative PageRank solve.
pub const SOLVER_AGREEMENT: f64 = 1e-8;

/// Piecewise-constant function on `k` uniform blocks of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StepFunction {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for StepFunction {
    type Error = FpcError;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        StepFunction::new(values)
    }
}

impl From<StepFunction> for Vec<f64> {
    fn from(f: StepFunction) -> Self {
        f.values
    }
}

impl StepFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return param("a step function needs at least one block");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("step function values must be finite");
        }
        Ok(StepFunction { values })
    }

    pub fn constant(k: usize, value: f64) -> Result<Self> {
        StepFunction::new(vec![value; k])
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.k() as f64
    }

    /// `L^p([0, 1])` norm.
    pub fn lp_norm(&self, p: NormP) -> f64 {
        let k = self.k() as f64;
        match p {
            NormP::One => self.values.iter().map(|v| v.abs()).sum::<f64>() / k,
            NormP::Two => (self.values.iter().map(|v| v * v).sum::<f64>() / k).sqrt(),
            NormP::Inf => self.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// The same function on `m` times as many blocks.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return param("refinement factor must be positive");
        }
        StepFunction::new(self.values.iter().flat_map(|&v| std::iter::repeat_n(v, m)).collect())
    }

    pub fn relabel(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.k() {
            return param("permutation size does not match the number of blocks");
        }
        StepFunction::new(p.permute_vector(&self.values))
    }

    pub fn sub(&self, other: &StepFunction) -> Result<Self> {
        let (a, b) = common_refinement_fn(self, other)?;
        StepFunction::new(a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StepGraphonJson {
    k: usize,
    c: f64,
    values: Vec<Vec<f64>>,
}

/// Symmetric kernel constant on the blocks `[i/k, (i+1)/k) x [j/k, (j+1)/k)`
/// with `|values| <= c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepGraphonJson", into = "StepGraphonJson")]
pub struct StepGraphon {
    c: f64,
    values: DMatrix<f64>,
}

impl TryFrom<StepGraphonJson> for StepGraphon {
    type Error = FpcError;
    fn try_from(raw: StepGraphonJson) -> Result<Self> {
        if raw.values.len() != raw.k || raw.values.iter().any(|r| r.len() != raw.k) {
            return param(format!("graphon values must be a {0}x{0} matrix", raw.k));
        }
        let values = DMatrix::from_fn(raw.k, raw.k, |i, j| raw.values[i][j]);
        StepGraphon::new(values, Some(raw.c))
    }
}

impl From<StepGraphon> for StepGraphonJson {
    fn from(w: StepGraphon) -> Self {
        StepGraphonJson {
            k: w.k(),
            c: w.c,
            values: w.values.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

impl StepGraphon {
    /// `c` defaults to the largest absolute value.
    pub fn new(values: DMatrix<f64>, c: Option<f64>) -> Result<Self> {
        let k = values.nrows();
        if k == 0 || values.ncols() != k {
            return param("graphon values must be a nonempty square matrix");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("graphon values must be finite");
        }
        for i in 0..k {
            for j in i + 1..k {
                if (values[(i, j)] - values[(j, i)]).abs() > WEIGHT_TOLERANCE {
                    return param(format!("graphon is not symmetric at block ({i}, {j})"));
                }
            }
        }
        let max = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let c = c.unwrap_or(max);
        if !c.is_finite() || c < 0.0 {
            return param("graphon bound c must be finite and non-negative");
        }
        if max > c + WEIGHT_TOLERANCE {
            return param(format!("graphon value {max} exceeds the declared bound c = {c}"));
        }
        Ok(StepGraphon { c, values })
    }

    pub fn constant(k: usize, value: f64) -> Result<Self> {
        StepGraphon::new(DMatrix::from_element(k, k, value), None)
    }

    pub fn k(&self) -> usize {
        self.values.nrows()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Values in `[0, 1]`.
    pub fn in_w0(&self) -> bool {
        self.values.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    /// Values in `[-c, c]`.
    pub fn in_wc(&self, c: f64) -> bool {
        self.values.iter().all(|v| v.abs() <= c)
    }

    /// The kernel as an operator on step functions over its own blocks.
    pub fn operator_matrix(&self) -> DMatrix<f64> {
        &self.values / self.k() as f64
    }

    /// `D(y) = int W(x, y) dx`.
    pub fn degree(&self) -> StepFunction {
        let k = self.k() as f64;
        let d = self.values.column_iter().map(|c| c.sum() / k).collect();
        StepFunction::new(d).expect("finite values give finite degrees")
    }

    pub fn refine(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return param("refinement factor must be positive");
        }
        let k = self.k() * m;
        let values = DMatrix::from_fn(k, k, |i, j| self.values[(i / m, j / m)]);
        StepGraphon::new(values, Some(self.c))
    }

    /// Measure-preserving relabeling of the blocks.
    pub fn relabel(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.k() {
            return param("permutation size does not match the number of blocks");
        }
        StepGraphon::new(p.permute_matrix(&self.values), Some(self.c))
    }

    pub fn sub(&self, other: &StepGraphon) -> Result<DMatrix<f64>> {
        let (a, b) = common_refinement(self, other)?;
        Ok(&a.values - &b.values)
    }
}

fn refinement_factors(ka: usize, kb: usize) -> Result<(usize, usize)> {
    if kb.is_multiple_of(ka) {
        Ok((kb / ka, 1))
    } else if ka.is_multiple_of(kb) {
        Ok((1, ka / kb))
    } else {
        param(format!("partitions with {ka} and {kb} blocks are not commensurate"))
    }
}

fn common_refinement(a: &StepGraphon, b: &StepGraphon) -> Result<(StepGraphon, StepGraphon)> {
    let (ma, mb) = refinement_factors(a.k(), b.k())?;
    Ok((a.refine(ma)?, b.refine(mb)?))
}

fn common_refinement_fn(a: &StepFunction, b: &StepFunction) -> Result<(StepFunction, StepFunction)> {
    let (ma, mb) = refinement_factors(a.k(), b.k())?;
    Ok((a.refine(ma)?, b.refine(mb)?))
}

/// Step graphon of a symmetric graph: node `i` becomes block `[i/n, (i+1)/n)`.
pub fn lift(g: &Graph, c: Option<f64>) -> Result<StepGraphon> {
    if !g.is_symmetric() {
        return param("only symmetric graphs lift to graphons");
    }
    StepGraphon::new(g.weights().clone(), c)
}

/// `(W v)(x) = int W(x, y) v(y) dy`. Partitions are refined to the finer
/// one when one block count divides the other.
pub fn apply(w: &StepGraphon, v: &StepFunction) -> Result<StepFunction> {
    let (mw, mv) = refinement_factors(w.k(), v.k())?;
    let (w, v) = (w.refine(mw)?, v.refine(mv)?);
    let out = w.operator_matrix() * DVector::from_column_slice(v.values());
    StepFunction::new(out.iter().copied().collect())
}

/// Operator matrix of the kernel `W(x, y) / D(y)` on blocks, zero where
/// `D(y) = 0`.
pub fn graphon_pagerank_operator(w: &StepGraphon) -> DMatrix<f64> {
    let d = w.degree();
    let mut m = w.operator_matrix();
    for (j, &dj) in d.values().iter().enumerate() {
        let scale = if dj != 0.0 { 1.0 / dj } else { 0.0 };
        m.column_mut(j).scale_mut(scale);
    }
    m
}

/// Graphon PageRank: `rho = alpha (W / D) rho + (1 - alpha)`.
///
/// Solved directly and by iteration; the two must agree within
/// [`SOLVER_AGREEMENT`].
pub fn graphon_pagerank(w: &StepGraphon, alpha: f64) -> Result<StepFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("pagerank alpha must lie in (0, 1), got {alpha}"));
    }
    if !w.in_w0() {
        return param("graphon pagerank needs values in [0, 1]");
    }
    let k = w.k();
    let m = graphon_pagerank_operator(w) * alpha;
    let rhs = DVector::from_element(k, 1.0 - alpha);
    let direct = (DMatrix::identity(k, k) - &m)
        .lu()
        .solve(&rhs)
        .ok_or_else(|| FpcError::Numerical("singular pagerank system".into()))?;

    // contraction in L^1 with modulus at most alpha
    let mut rho = rhs.clone();
    let mut converged = false;
    for _ in 0..1_000_000 {
        let next = &m * &rho + &rhs;
        let step = (&next - &rho).abs().sum() / k as f64;
        rho = next;
        if step <= 1e-14 * (1.0 - alpha) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(FpcError::NonConvergence {
            iterations: 1_000_000,
            residual: f64::NAN,
            last_iterate: rho.iter().copied().collect(),
        });
    }
    let disagreement = (&rho - &direct).amax();
    if disagreement > SOLVER_AGREEMENT {
        return Err(FpcError::Numerical(format!(
            "direct and iterative pagerank differ by {disagreement:e}"
        )));
    }
    StepFunction::new(direct.iter().copied().collect())
}

/// Graphon Katz-Bonacich centrality: `(I - alpha W) rho = 1`, requiring
/// `alpha ||W||_op < 1` (the operator norm is the spectral radius of a
/// symmetric kernel).
pub fn graphon_katz(w: &StepGraphon, alpha: f64) -> Result<StepFunction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("katz alpha must lie in (0, 1), got {alpha}"));
    }
    let radius = graphon_op_norm(w)?;
    if alpha * radius >= 1.0 {
        return param(format!(
            "katz needs alpha * lambda_1 < 1, got {alpha} * {radius} = {}",
            alpha * radius
        ));
    }
    let k = w.k();
    let system = DMatrix::identity(k, k) - w.operator_matrix() * alpha;
    let rho = system
        .lu()
        .solve(&DVector::from_element(k, 1.0))
        .ok_or_else(|| FpcError::Numerical("singular katz system".into()))?;
    StepFunction::new(rho.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphonEigen {
    /// Unit `L^2` norm, non-negative integral.
    pub rho: StepFunction,
    pub lambda: f64,
    /// Distance from `lambda` to the rest of the spectrum, including the
    /// eigenvalue 0 that every step kernel has on `L^2([0, 1])`.
    pub gap: f64,
}

pub fn graphon_eigencentrality(w: &StepGraphon) -> Result<GraphonEigen> {
    let op = Graph::from_matrix(w.operator_matrix())?;
    let eig = eigencentrality(&op, EigenTarget::Largest, None)?;
    let gap = eig.gap.min(eig.lambda.abs());
    if gap < SIMPLICITY_GAP {
        return Err(FpcError::SimplicityViolation {
            gap,
            threshold: SIMPLICITY_GAP,
        });
    }
    let scale = (w.k() as f64).sqrt();
    Ok(GraphonEigen {
        rho: StepFunction::new(eig.rho.iter().map(|v| v * scale).collect())?,
        lambda: eig.lambda,
        gap,
    })
}

/// `sup_{S,T} |int_{S x T} W|`, attained on unions of blocks.
pub fn graphon_cut_norm(w: &StepGraphon) -> Result<f64> {
    Ok(graphon_cut_witness(w)?.value)
}

/// Cut norm with witness block sets; the value is already scaled by `1/k^2`.
pub fn graphon_cut_witness(w: &StepGraphon) -> Result<CutNormWitness> {
    let mut witness = cut_norm_exact(w.values())?;
    witness.value /= (w.k() * w.k()) as f64;
    Ok(witness)
}

/// `L^2` operator norm.
pub fn graphon_op_norm(w: &StepGraphon) -> Result<f64> {
    graphon_op_norm_p(w, NormP::Two)
}

/// `L^p` operator norm, `||values||_p / k`. A step kernel factors through the
/// conditional expectation onto its blocks, so the supremum is attained on
/// step functions.
pub fn graphon_op_norm_p(w: &StepGraphon, p: NormP) -> Result<f64> {
    Ok(operator_norm(w.values(), p)? / w.k() as f64)
}

/// Graphon norm of a block-valued kernel difference.
pub fn graphon_matrix_norm(values: &DMatrix<f64>, kind: NormKind) -> Result<f64> {
    let k = values.nrows() as f64;
    Ok(match kind {
        NormKind::Cut => cut_norm_exact(values)?.value / (k * k),
        NormKind::P1 => operator_norm(values, NormP::One)? / k,
        NormKind::P2 => operator_norm(values, NormP::Two)? / k,
        NormKind::Pinf => operator_norm(values, NormP::Inf)? / k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDistance {
    pub value: f64,
    pub permutation: Permutation,
    /// The minimum is over block relabelings only, a subset of all
    /// measure-preserving bijections, so `value` bounds the infimum from above.
    pub certified_upper: bool,
    /// True when every block relabeling was searched.
    pub exact_over_blocks: bool,
}

/// `min ||W^pi - U||` over block relabelings `pi`.
pub fn graphon_block_distance(
    a: &StepGraphon,
    b: &StepGraphon,
    kind: NormKind,
    mode: PermMode,
) -> Result<BlockDistance> {
    if a.k() != b.k() {
        return param(format!("graphons have {} and {} blocks", a.k(), b.k()));
    }
    let ga = Graph::from_matrix(a.values().clone())?;
    let gb = Graph::from_matrix(b.values().clone())?;
    let d = min_permuted_distance(&ga, &gb, kind, mode)?;
    let k = a.k() as f64;
    let scale = if kind == NormKind::Cut { k * k } else { k };
    Ok(BlockDistance {
        value: d.value / scale,
        permutation: d.permutation,
        certified_upper: true,
        exact_over_blocks: d.certified,
    })
}

/// Upper bound on the cut distance by block relabelings.
pub fn graphon_cut_distance_blocks(a: &StepGraphon, b: &StepGraphon, mode: PermMode) -> Result<BlockDistance> {
    graphon_block_distance(a, b, NormKind::Cut, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{katz_closed_form, pagerank_closed_form};
    use crate::graph::{complete, cycle, generate, GraphGeneratorSpec};
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graphon(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> StepGraphon {
        let mut v = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let x = rng.gen_range(lo..=hi);
                v[(i, j)] = x;
                v[(j, i)] = x;
            }
        }
        StepGraphon::new(v, Some(hi.abs().max(lo.abs()))).unwrap()
    }

    fn assert_constant(f: &StepFunction, value: f64, eps: f64) {
        for v in f.values() {
            assert_abs_diff_eq!(*v, value, epsilon = eps);
        }
    }

    #[test]
    fn lift_examples() {
        let w = lift(&complete(2), None).unwrap();
        assert_eq!(w.k(), 2);
        assert_eq!(w.values(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let z = lift(&Graph::zeros(3).unwrap(), None).unwrap();
        assert!(z.values().iter().all(|v| *v == 0.0));
        let directed = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert!(lift(&directed, None).is_err());
        assert!(lift(&complete(3), Some(0.5)).is_err());
    }

    #[test]
    fn op_norm_of_lifted_cycle() {
        let w = lift(&cycle(4), None).unwrap();
        assert_abs_diff_eq!(graphon_op_norm(&w).unwrap(), 0.5, epsilon = 1e-10);
        // refining the grid leaves the operator unchanged
        for m in [2, 3, 5] {
            let fine = w.refine(m).unwrap();
            assert_abs_diff_eq!(graphon_op_norm(&fine).unwrap(), 0.5, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            graphon_op_norm(&lift(&complete(2), None).unwrap()).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            graphon_op_norm(&StepGraphon::constant(1, 0.3).unwrap()).unwrap(),
            0.3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn json_shape() {
        let w = lift(&complete(2), None).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"k":2,"c":1.0,"values":[[0.0,1.0],[1.0,0.0]]}"#);
        let back: StepGraphon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<StepGraphon>(r#"{"k":2,"c":1,"values":[[0,1],[0,0]]}"#).is_err());
        assert!(serde_json::from_str::<StepGraphon>(r#"{"k":1,"c":0.5,"values":[[0.7]]}"#).is_err());
        assert!(serde_json::from_str::<StepGraphon>(r#"{"k":3,"c":1,"values":[[0]]}"#).is_err());
    }

    #[test]
    fn apply_examples() {
        let half = StepGraphon::constant(1, 0.5).unwrap();
        let one = StepFunction::constant(1, 1.0).unwrap();
        assert_constant(&apply(&half, &one).unwrap(), 0.5, 1e-15);
        let zero = StepGraphon::constant(3, 0.0).unwrap();
        let v = StepFunction::new(vec![1.0, -2.0, 3.0]).unwrap();
        assert_constant(&apply(&zero, &v).unwrap(), 0.0, 0.0);
        let k2 = lift(&complete(2), None).unwrap();
        let out = apply(&k2, &StepFunction::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(out.values(), &[0.0, 0.5]);
    }

    #[test]
    fn apply_refines_commensurate_partitions() {
        let k2 = lift(&complete(2), None).unwrap();
        let v = StepFunction::new(vec![1.0, 3.0, 0.0, 0.0]).unwrap();
        let out = apply(&k2, &v).unwrap();
        // block mass of v on [0, 1/2) is 1, so the right half sees 1
        assert_eq!(out.values(), &[0.0, 0.0, 1.0, 1.0]);
        let coarse = StepFunction::constant(1, 1.0).unwrap();
        assert_eq!(apply(&k2, &coarse).unwrap().values(), &[0.5, 0.5]);
        assert!(apply(&k2, &StepFunction::constant(3, 1.0).unwrap()).is_err());
    }

    #[test]
    fn pagerank_examples() {
        let half = StepGraphon::constant(1, 0.5).unwrap();
        assert_constant(&graphon_pagerank(&half, 0.85).unwrap(), 1.0, 1e-12);
        let blocks = StepGraphon::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]), None).unwrap();
        assert_constant(&graphon_pagerank(&blocks, 0.5).unwrap(), 1.0, 1e-12);
        assert!(graphon_pagerank(&half, 1.0).is_err());
        let out_of_range = StepGraphon::constant(2, -0.5).unwrap();
        assert!(graphon_pagerank(&out_of_range, 0.5).is_err());
    }

    #[test]
    fn pagerank_is_a_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let k = rng.gen_range(1..10);
            let w = random_graphon(&mut rng, k, 0.01, 1.0);
            let rho = graphon_pagerank(&w, rng.gen_range(0.05..0.95)).unwrap();
            assert_abs_diff_eq!(rho.integral(), 1.0, epsilon = 1e-10);
            assert!(rho.values().iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn pagerank_of_lift_matches_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 20 {
            let n = rng.gen_range(2..12);
            let g = generate(&GraphGeneratorSpec::erdos_renyi(n, 0.5, rng.gen())).unwrap();
            if crate::graph::degree_vector(&g).contains(&0.0) {
                continue;
            }
            let graphon = graphon_pagerank(&lift(&g, None).unwrap(), 0.85).unwrap();
            let finite = pagerank_closed_form(&g, 0.85).unwrap();
            for (a, b) in graphon.values().iter().zip(finite.iter()) {
                assert_abs_diff_eq!(*a, n as f64 * b, epsilon = 1e-8);
            }
            checked += 1;
        }
    }

    #[test]
    fn katz_examples() {
        assert_constant(
            &graphon_katz(&StepGraphon::constant(4, 0.0).unwrap(), 0.9).unwrap(),
            1.0,
            0.0,
        );
        assert_constant(
            &graphon_katz(&StepGraphon::constant(1, 0.5).unwrap(), 0.5).unwrap(),
            4.0 / 3.0,
            1e-14,
        );
        assert!(graphon_katz(&StepGraphon::constant(2, 1.0).unwrap(), 0.999_999_999_999).is_ok());
        let big = StepGraphon::new(DMatrix::from_element(2, 2, 3.0), None).unwrap();
        assert!(graphon_katz(&big, 0.5).is_err());
    }

    #[test]
    fn katz_of_lift_is_finite_katz_with_scaled_alpha() {
        for g in [cycle(5), complete(4), crate::graph::petersen()] {
            let n = g.n() as f64;
            let alpha = 0.6;
            let graphon = graphon_katz(&lift(&g, None).unwrap(), alpha).unwrap();
            let finite = katz_closed_form(&g, alpha / n).unwrap();
            for (a, b) in graphon.values().iter().zip(finite.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eigen_examples() {
        for p in [0.2, 0.7, 1.0] {
            let e = graphon_eigencentrality(&StepGraphon::constant(3, p).unwrap()).unwrap();
            assert_abs_diff_eq!(e.lambda, p, epsilon = 1e-10);
            assert_constant(&e.rho, 1.0, 1e-8);
        }
        let c4 = graphon_eigencentrality(&lift(&cycle(4), None).unwrap()).unwrap();
        assert_abs_diff_eq!(c4.lambda, 0.5, epsilon = 1e-10);
        assert_constant(&c4.rho, 1.0, 1e-8);
        assert_abs_diff_eq!(c4.rho.lp_norm(NormP::Two), 1.0, epsilon = 1e-12);

        let diag = StepGraphon::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 0.3]), None).unwrap();
        let e = graphon_eigencentrality(&diag).unwrap();
        assert_abs_diff_eq!(e.lambda, 0.45, epsilon = 1e-10);
        assert_abs_diff_eq!(e.rho.values()[0], 2f64.sqrt(), epsilon = 1e-8);
        assert_abs_diff_eq!(e.rho.values()[1], 0.0, epsilon = 1e-8);

        let tied = StepGraphon::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]), None).unwrap();
        assert!(matches!(
            graphon_eigencentrality(&tied),
            Err(FpcError::SimplicityViolation { .. })
        ));
        assert!(graphon_eigencentrality(&StepGraphon::constant(2, 0.0).unwrap()).is_err());
    }

    #[test]
    fn cut_norm_examples() {
        assert_abs_diff_eq!(
            graphon_cut_norm(&StepGraphon::constant(3, 1.0).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(graphon_cut_norm(&StepGraphon::constant(3, 0.0).unwrap()).unwrap(), 0.0);
        let big = StepGraphon::constant(23, 0.0).unwrap();
        assert!(matches!(graphon_cut_norm(&big), Err(FpcError::SizeLimit { .. })));
    }

    #[test]
    fn cut_norm_dominates_fine_grid_rectangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(2..8);
            let g = generate(&GraphGeneratorSpec::erdos_renyi(n, 0.5, rng.gen())).unwrap();
            let w = lift(&g, None).unwrap();
            let exact = graphon_cut_norm(&w).unwrap();
            assert_abs_diff_eq!(
                exact,
                cut_norm_exact(g.weights()).unwrap().value / (n * n) as f64,
                epsilon = 1e-15
            );
            let m = 3;
            let fine = w.refine(m).unwrap();
            let cells = n * m;
            let area = (cells * cells) as f64;
            let mut best: f64 = 0.0;
            for _ in 0..200 {
                let s: Vec<usize> = (0..cells).filter(|_| rng.gen_bool(0.5)).collect();
                let t: Vec<usize> = (0..cells).filter(|_| rng.gen_bool(0.5)).collect();
                let v = crate::norms::rectangle_sum(fine.values(), &s, &t).abs() / area;
                assert!(v <= exact + 1e-12);
                best = best.max(v);
            }
            // the block witness, spread over the fine grid, attains the value
            let wit = graphon_cut_witness(&w).unwrap();
            let spread = |b: &[usize]| b.iter().flat_map(|&i| (i * m)..(i * m + m)).collect::<Vec<_>>();
            let attained = crate::norms::rectangle_sum(fine.values(), &spread(&wit.s), &spread(&wit.t)).abs() / area;
            assert_abs_diff_eq!(attained, exact, epsilon = 1e-12);
            assert!(best <= attained + 1e-12);
        }
    }

    #[test]
    fn op_norm_bounded_by_cut_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let k = rng.gen_range(1..8);
            let w = random_graphon(&mut rng, k, -1.0, 1.0);
            let op = graphon_op_norm(&w).unwrap();
            let cut = graphon_cut_norm(&w).unwrap();
            assert!(op <= (8.0 * cut).sqrt() + 1e-9, "{op} vs {cut}");
        }
    }

    #[test]
    fn block_cut_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_graphon(&mut rng, 5, 0.0, 1.0);
        let d = graphon_cut_distance_blocks(&a, &a, PermMode::Exact).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(d.certified_upper && d.exact_over_blocks);
        let p = Permutation::new(vec![2, 4, 0, 1, 3]).unwrap();
        let relabeled = a.relabel(&p).unwrap();
        assert_abs_diff_eq!(
            graphon_cut_distance_blocks(&a, &relabeled, PermMode::Exact)
                .unwrap()
                .value,
            0.0,
            epsilon = 1e-15
        );

        let b = random_graphon(&mut rng, 5, 0.0, 1.0);
        let got = graphon_cut_distance_blocks(&a, &b, PermMode::Exact).unwrap().value;
        let brute = (0..5)
            .permutations(5)
            .map(|m| {
                let p = Permutation::new(m).unwrap();
                let diff = p.permute_matrix(a.values()) - b.values();
                cut_norm_exact(&diff).unwrap().value / 25.0
            })
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(got, brute, epsilon = 1e-12);
        let greedy = graphon_cut_distance_blocks(&a, &b, PermMode::Greedy).unwrap();
        assert!(greedy.value >= got - 1e-12 && !greedy.exact_over_blocks);
        assert!(graphon_cut_distance_blocks(&a, &StepGraphon::constant(4, 0.0).unwrap(), PermMode::Exact).is_err());
    }

    #[test]
    fn centralities_follow_block_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let k = rng.gen_range(2..7);
            let w = random_graphon(&mut rng, k, 0.05, 1.0);
            let p = Permutation::random(k, &mut rng);
            let wp = w.relabel(&p).unwrap();
            let pr = graphon_pagerank(&w, 0.85).unwrap().relabel(&p).unwrap();
            let prp = graphon_pagerank(&wp, 0.85).unwrap();
            let kz = graphon_katz(&w, 0.5).unwrap().relabel(&p).unwrap();
            let kzp = graphon_katz(&wp, 0.5).unwrap();
            let ev = graphon_eigencentrality(&w).unwrap().rho.relabel(&p).unwrap();
            let evp = graphon_eigencentrality(&wp).unwrap().rho;
            for (x, y) in [(pr, prp), (kz, kzp), (ev, evp)] {
                assert!(x.sub(&y).unwrap().lp_norm(NormP::Inf) < 1e-8);
            }
        }
    }

    #[test]
    fn step_function_norms() {
        let f = StepFunction::new(vec![1.0, -3.0]).unwrap();
        assert_eq!(f.lp_norm(NormP::One), 2.0);
        assert_abs_diff_eq!(f.lp_norm(NormP::Two), 5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(f.lp_norm(NormP::Inf), 3.0);
        assert_eq!(f.refine(2).unwrap().lp_norm(NormP::Two), f.lp_norm(NormP::Two));
        assert_eq!(f.integral(), -1.0);
    }
}
