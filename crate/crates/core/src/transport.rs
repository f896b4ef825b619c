//! Discrete Wasserstein distances between node distributions.
//!
//! A node pmf has no intrinsic geometry, so every distance here names its
//! ground metric explicitly through [`TransportConvention`].

use itertools::Itertools;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{param, FpcError, Result};
use crate::graph::Permutation;
use crate::norms::{vector_norm, NormP};

pub const PMF_TOLERANCE: f64 = 1e-9;
pub const MAX_PLAN_N: usize = 64;
pub const MAX_ORACLE_N: usize = 16;
/// Above this size the permutation surrogate switches from enumeration to
/// sorted matching.
pub const MAX_ENUMERATED_PERMUTATION_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportConvention {
    /// Node `i` sits at `i/n` on the unit interval.
    GridEmbedding,
    /// `d(i, j) = 1` for `i != j`.
    DiscreteMetric,
    /// `min_pi ||src^pi - dst||_p`. A relabeling is not a coupling of two
    /// different pmfs, so this is a surrogate quantity, not a true `W_p`.
    PermutationCost,
}

impl std::str::FromStr for TransportConvention {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid_embedding" | "grid-embedding" | "grid" => Ok(TransportConvention::GridEmbedding),
            "discrete_metric" | "discrete-metric" | "discrete" => Ok(TransportConvention::DiscreteMetric),
            "permutation_cost" | "permutation-cost" | "permutation" => Ok(TransportConvention::PermutationCost),
            other => param(format!("unknown transport convention '{other}'")),
        }
    }
}

/// A coupling of two pmfs and its cost `sum gamma_ij d(i, j)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub gamma: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.gamma.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let n = self.gamma.first().map_or(0, Vec::len);
        (0..n).map(|j| self.gamma.iter().map(|r| r[j]).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wasserstein {
    pub value: f64,
    pub plan: Option<TransportPlan>,
    /// Minimising relabeling, for the permutation surrogate.
    pub permutation: Option<Permutation>,
}

fn check_pmf(v: &[f64], name: &str) -> Result<()> {
    if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return param(format!("{name} has entry {x}; a pmf needs finite non-negative entries"));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return param(format!("{name} sums to {total}, not 1"));
    }
    Ok(())
}

fn order(p: NormP) -> Result<f64> {
    match p {
        NormP::One => Ok(1.0),
        NormP::Two => Ok(2.0),
        NormP::Inf => param("wasserstein order must be 1 or 2"),
    }
}

/// `W_p(src, dst)` under the given ground-metric convention.
pub fn wasserstein(src: &[f64], dst: &[f64], p: NormP, conv: TransportConvention) -> Result<Wasserstein> {
    let exponent = order(p)?;
    if src.len() != dst.len() || src.is_empty() {
        return param("pmfs must be nonempty and of equal length");
    }
    check_pmf(src, "source")?;
    check_pmf(dst, "target")?;
    let n = src.len();
    if conv != TransportConvention::PermutationCost && n > MAX_PLAN_N {
        return Err(FpcError::SizeLimit {
            what: "transport plan",
            n,
            limit: MAX_PLAN_N,
            hint: None,
        });
    }
    match conv {
        TransportConvention::GridEmbedding => {
            let plan = quantile_coupling(src, dst, |i, j| (i.abs_diff(j) as f64 / n as f64).powf(exponent));
            Ok(Wasserstein {
                value: plan.cost.powf(1.0 / exponent),
                plan: Some(plan),
                permutation: None,
            })
        }
        TransportConvention::DiscreteMetric => {
            let tv = 0.5 * src.iter().zip(dst).map(|(a, b)| (a - b).abs()).sum::<f64>();
            Ok(Wasserstein {
                value: tv.powf(1.0 / exponent),
                plan: Some(overlap_coupling(src, dst)),
                permutation: None,
            })
        }
        TransportConvention::PermutationCost => {
            let (value, permutation) = permutation_cost(src, dst, p)?;
            Ok(Wasserstein {
                value,
                plan: None,
                permutation: Some(permutation),
            })
        }
    }
}

/// Monotone (north-west corner) coupling along the node order, optimal for
/// any convex cost of `|i - j|` on the line.
fn quantile_coupling(src: &[f64], dst: &[f64], cost: impl Fn(usize, usize) -> f64) -> TransportPlan {
    let n = src.len();
    let mut gamma = vec![vec![0.0; n]; n];
    let (mut i, mut j) = (0, 0);
    let (mut a, mut b) = (src[0], dst[0]);
    while i < n && j < n {
        let m = a.min(b);
        gamma[i][j] += m;
        a -= m;
        b -= m;
        if a <= b {
            i += 1;
            if i < n {
                a = src[i];
            }
        } else {
            j += 1;
            if j < n {
                b = dst[j];
            }
        }
    }
    let total = gamma
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, g)| (i, j, *g)))
        .map(|(i, j, g)| g * cost(i, j))
        .sum();
    TransportPlan { gamma, cost: total }
}

/// Keeps `min(src_i, dst_i)` in place and spreads the excess of each source
/// over the deficits in proportion. Optimal for the discrete metric.
fn overlap_coupling(src: &[f64], dst: &[f64]) -> TransportPlan {
    let n = src.len();
    let mut gamma = vec![vec![0.0; n]; n];
    let excess: Vec<f64> = src.iter().zip(dst).map(|(a, b)| (a - b).max(0.0)).collect();
    let deficit: Vec<f64> = src.iter().zip(dst).map(|(a, b)| (b - a).max(0.0)).collect();
    let moved: f64 = deficit.iter().sum();
    for i in 0..n {
        gamma[i][i] = src[i].min(dst[i]);
        if moved > 0.0 {
            for j in 0..n {
                gamma[i][j] += excess[i] * deficit[j] / moved;
            }
        }
    }
    let cost = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| gamma[i][j])
        .sum();
    TransportPlan { gamma, cost }
}

/// `min_pi ||src^pi - dst||_p` and a minimiser.
///
/// Small inputs are enumerated. Larger ones use the sorted matching (k-th
/// smallest of `src` onto the k-th smallest of `dst`), which attains the
/// minimum for every `p >= 1` because the cost is a convex function of the
/// difference.
pub fn permutation_cost(src: &[f64], dst: &[f64], p: NormP) -> Result<(f64, Permutation)> {
    if src.len() != dst.len() {
        return param("vectors must have equal length");
    }
    let n = src.len();
    let eval = |perm: &Permutation| {
        let moved = perm.permute_vector(src);
        let diff: Vec<f64> = moved.iter().zip(dst).map(|(a, b)| a - b).collect();
        vector_norm(&diff, p)
    };
    if n <= MAX_ENUMERATED_PERMUTATION_N {
        let mut best: Option<(f64, Permutation)> = None;
        for m in (0..n).permutations(n) {
            let perm = Permutation::new(m)?;
            let v = eval(&perm);
            if best.as_ref().is_none_or(|(b, _)| v < b - 1e-15) {
                best = Some((v, perm));
            }
        }
        Ok(best.expect("n >= 0 has a permutation"))
    } else {
        let perm = sorted_matching(src, dst);
        Ok((eval(&perm), perm))
    }
}

pub fn sorted_matching(src: &[f64], dst: &[f64]) -> Permutation {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]).then(i.cmp(&j)));
        idx
    };
    let (rs, rd) = (rank(src), rank(dst));
    let mut mapping = vec![0; src.len()];
    for (&i, &j) in rs.iter().zip(&rd) {
        mapping[i] = j;
    }
    Permutation::new(mapping).expect("matching of two orderings is a bijection")
}

/// Exact optimal transport by linear programming, independent of the closed
/// forms above. Returns the optimal cost `sum gamma_ij c_ij` and a plan.
pub fn transport_lp_oracle(src: &[f64], dst: &[f64], cost: &DMatrix<f64>) -> Result<(f64, TransportPlan)> {
    let n = src.len();
    if n > MAX_ORACLE_N {
        return Err(FpcError::SizeLimit {
            what: "transport LP oracle",
            n,
            limit: MAX_ORACLE_N,
            hint: None,
        });
    }
    if dst.len() != n || cost.shape() != (n, n) {
        return param("transport oracle dimensions do not match");
    }
    if cost.iter().any(|c| *c < 0.0 || !c.is_finite()) {
        return param("transport costs must be finite and non-negative");
    }
    check_pmf(src, "source")?;
    check_pmf(dst, "target")?;

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<_>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| problem.add_var(cost[(i, j)], (0.0, f64::INFINITY)))
                .collect()
        })
        .collect();
    for (i, row) in vars.iter().enumerate() {
        let expr: Vec<_> = row.iter().map(|&v| (v, 1.0)).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, src[i]);
    }
    // one column constraint is implied by the others; dropping it keeps the
    // system feasible when the two totals differ in the last bits
    for j in 0..n.saturating_sub(1) {
        let expr: Vec<_> = vars.iter().map(|row| (row[j], 1.0)).collect();
        problem.add_constraint(expr.as_slice(), ComparisonOp::Eq, dst[j]);
    }
    let solution = problem
        .solve()
        .map_err(|e| FpcError::Numerical(format!("transport LP failed: {e}")))?;
    let gamma: Vec<Vec<f64>> = vars
        .iter()
        .map(|row| row.iter().map(|&v| solution[v].max(0.0)).collect())
        .collect();
    let value = solution.objective();
    Ok((value, TransportPlan { gamma, cost: value }))
}

/// Ground-cost matrix `d(i, j)^p` for a true-metric convention.
pub fn ground_cost(n: usize, p: NormP, conv: TransportConvention) -> Result<DMatrix<f64>> {
    let exponent = order(p)?;
    match conv {
        TransportConvention::GridEmbedding => Ok(DMatrix::from_fn(n, n, |i, j| {
            (i.abs_diff(j) as f64 / n as f64).powf(exponent)
        })),
        TransportConvention::DiscreteMetric => Ok(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })),
        TransportConvention::PermutationCost => param("the permutation surrogate has no ground metric"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    fn check_marginals(plan: &TransportPlan, src: &[f64], dst: &[f64]) {
        for (a, b) in plan.row_sums().iter().zip(src) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        for (a, b) in plan.column_sums().iter().zip(dst) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        assert!(plan.gamma.iter().flatten().all(|g| *g >= 0.0));
    }

    const CONVENTIONS: [TransportConvention; 3] = [
        TransportConvention::GridEmbedding,
        TransportConvention::DiscreteMetric,
        TransportConvention::PermutationCost,
    ];

    #[test]
    fn identical_inputs_have_zero_distance() {
        let v = [0.2, 0.5, 0.3];
        for conv in CONVENTIONS {
            for p in [NormP::One, NormP::Two] {
                assert_abs_diff_eq!(wasserstein(&v, &v, p, conv).unwrap().value, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn point_masses_on_the_grid() {
        for n in 2..7 {
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            a[0] = 1.0;
            b[n - 1] = 1.0;
            let w = wasserstein(&a, &b, NormP::One, TransportConvention::GridEmbedding).unwrap();
            assert_abs_diff_eq!(w.value, (n - 1) as f64 / n as f64, epsilon = 1e-15);
            check_marginals(w.plan.as_ref().unwrap(), &a, &b);
        }
    }

    #[test]
    fn closed_forms_match_lp_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.gen_range(1..=8);
            let a = random_pmf(&mut rng, n);
            let b = random_pmf(&mut rng, n);
            for p in [NormP::One, NormP::Two] {
                for conv in [TransportConvention::GridEmbedding, TransportConvention::DiscreteMetric] {
                    let w = wasserstein(&a, &b, p, conv).unwrap();
                    let plan = w.plan.as_ref().unwrap();
                    check_marginals(plan, &a, &b);
                    let (oracle, oracle_plan) = transport_lp_oracle(&a, &b, &ground_cost(n, p, conv).unwrap()).unwrap();
                    check_marginals(&oracle_plan, &a, &b);
                    let exponent = if p == NormP::One { 1.0 } else { 2.0 };
                    assert_abs_diff_eq!(w.value.powf(exponent), oracle, epsilon = 1e-9);
                    assert_abs_diff_eq!(plan.cost, oracle, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let zero_diag = DMatrix::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs() * 2.5);
        let v = [0.1, 0.6, 0.3];
        assert_abs_diff_eq!(transport_lp_oracle(&v, &v, &zero_diag).unwrap().0, 0.0, epsilon = 1e-12);
        let unit = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(
            transport_lp_oracle(&[1.0, 0.0], &[0.0, 1.0], &unit).unwrap().0,
            1.0,
            epsilon = 1e-12
        );
        let big = vec![1.0 / 17.0; 17];
        assert!(matches!(
            transport_lp_oracle(&big, &big, &DMatrix::zeros(17, 17)),
            Err(FpcError::SizeLimit { .. })
        ));
    }

    #[test]
    fn rejects_non_pmfs() {
        let conv = TransportConvention::GridEmbedding;
        assert!(wasserstein(&[0.5, 0.6], &[0.5, 0.5], NormP::One, conv).is_err());
        assert!(wasserstein(&[1.5, -0.5], &[0.5, 0.5], NormP::One, conv).is_err());
        assert!(wasserstein(&[1.0], &[0.5, 0.5], NormP::One, conv).is_err());
        assert!(wasserstein(&[1.0], &[1.0], NormP::Inf, conv).is_err());
    }

    #[test]
    fn symmetric_and_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = rng.gen_range(2..10);
            let (a, b, c) = (
                random_pmf(&mut rng, n),
                random_pmf(&mut rng, n),
                random_pmf(&mut rng, n),
            );
            for conv in [TransportConvention::GridEmbedding, TransportConvention::DiscreteMetric] {
                for p in [NormP::One, NormP::Two] {
                    let ab = wasserstein(&a, &b, p, conv).unwrap().value;
                    let ba = wasserstein(&b, &a, p, conv).unwrap().value;
                    assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
                }
            }
            let w = |x: &[f64], y: &[f64]| {
                wasserstein(x, y, NormP::One, TransportConvention::GridEmbedding)
                    .unwrap()
                    .value
            };
            assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-9);
        }
    }

    #[test]
    fn sorted_matching_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.gen_range(1..=7);
            let a = random_pmf(&mut rng, n);
            let b = random_pmf(&mut rng, n);
            for p in [NormP::One, NormP::Two, NormP::Inf] {
                let (brute, _) = permutation_cost(&a, &b, p).unwrap();
                let perm = sorted_matching(&a, &b);
                let d: Vec<f64> = perm.permute_vector(&a).iter().zip(&b).map(|(x, y)| x - y).collect();
                assert_abs_diff_eq!(vector_norm(&d, p), brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn permutation_surrogate_of_relabelled_pmf_is_zero() {
        let a = [0.1, 0.2, 0.3, 0.4];
        let p = Permutation::new(vec![3, 1, 0, 2]).unwrap();
        let b = p.permute_vector(&a);
        let w = wasserstein(&a, &b, NormP::Two, TransportConvention::PermutationCost).unwrap();
        assert_eq!(w.value, 0.0);
        assert!(w.plan.is_none());
        assert_eq!(w.permutation.unwrap(), p);
    }
}
