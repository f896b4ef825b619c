//! Dense weighted graphs, node relabelings and automorphism search.
//!
//! Orientation convention: `a_ij` is the weight of the link from node `i` to
//! node `j`. Centralities are written in terms of `A^T`, so node `i`
//! collects contributions from its in-neighbours `j` through `a_ji`, and the
//! degree `d_j = sum_i a_ji` is the out-degree (row sum) of node `j`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, FpcError, Result};

/// Tolerance used when comparing weighted (non 0/1) matrices.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Largest graph for which automorphisms are enumerated exhaustively.
pub const MAX_AUTOMORPHISM_N: usize = 9;

/// A graph on the node set `0..n`, stored as a dense weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
    symmetric: bool,
}

impl Graph {
    pub fn from_matrix(weights: DMatrix<f64>) -> Result<Self> {
        if weights.nrows() != weights.ncols() {
            return param(format!(
                "weight matrix must be square, got {}x{}",
                weights.nrows(),
                weights.ncols()
            ));
        }
        if weights.nrows() == 0 {
            return param("graph must have at least one node");
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite()) {
            return param(format!("non-finite weight {bad}"));
        }
        let symmetric = is_symmetric_matrix(&weights);
        Ok(Graph { weights, symmetric })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return param(format!("row {i} has {} entries, expected {n}", r.len()));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::zeros(n, n))
    }

    /// Builds a graph from `(i, j, w)` triples. Later duplicates overwrite
    /// earlier ones.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return param(format!("edge ({i}, {j}) out of range for n = {n}"));
            }
            m[(i, j)] = w;
        }
        Self::from_matrix(m)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> DMatrix<f64> {
        self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when every weight is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Largest absolute weight.
    pub fn max_abs(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Rows as nested vectors, the layout used by the JSON matrix format.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| self.weights.row(i).iter().copied().collect())
            .collect()
    }
}

fn is_symmetric_matrix(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (i + 1..n).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= WEIGHT_TOLERANCE))
}

/// A bijection on `0..n`; `mapping[i]` is the image of node `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return param(format!("{mapping:?} is not a permutation of 0..{n}"));
            }
            seen[m] = true;
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
        }
    }

    /// The cyclic shift `i -> i + 1 mod n`.
    pub fn rotation(n: usize) -> Self {
        Permutation {
            mapping: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return param(format!("transposition ({a} {b}) out of range for n = {n}"));
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(a, b);
        Ok(Permutation { mapping })
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            inv[m] = i;
        }
        Permutation { mapping: inv }
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(self.len(), other.len(), "composing permutations of different sizes");
        Permutation {
            mapping: other.mapping.iter().map(|&j| self.mapping[j]).collect(),
        }
    }

    /// Relabels a node-indexed vector: `out[p(i)] = v[i]`, i.e. `P v`.
    pub fn permute_vector(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len(), "vector length does not match permutation");
        let mut out = vec![0.0; v.len()];
        for (i, &m) in self.mapping.iter().enumerate() {
            out[m] = v[i];
        }
        out
    }

    /// `P M P^T` for a square matrix.
    pub fn permute_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.len();
        assert_eq!(m.nrows(), n);
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.mapping[i], self.mapping[j])] = m[(i, j)];
            }
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = FpcError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

/// Relabels the nodes of `g`: entry `(p(i), p(j))` of the result is entry
/// `(i, j)` of `g`.
pub fn permute(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.len() != g.n() {
        return param(format!(
            "permutation of size {} applied to graph with {} nodes",
            p.len(),
            g.n()
        ));
    }
    Ok(Graph {
        weights: p.permute_matrix(&g.weights),
        symmetric: g.symmetric,
    })
}

pub fn is_automorphism(g: &Graph, p: &Permutation) -> Result<bool> {
    let permuted = permute(g, p)?;
    Ok(matrices_match(g, permuted.weights()))
}

fn matrices_match(g: &Graph, other: &DMatrix<f64>) -> bool {
    if g.is_binary() {
        g.weights() == other
    } else {
        g.weights()
            .iter()
            .zip(other.iter())
            .all(|(a, b)| (a - b).abs() <= WEIGHT_TOLERANCE)
    }
}

/// All automorphisms of `g`, in lexicographic order of their mappings.
///
/// Backtracking assigns images node by node and prunes as soon as an assigned
/// pair breaks an edge weight, so the search visits far fewer than `n!`
/// candidates on structured graphs. Every survivor is re-checked with
/// [`is_automorphism`].
pub fn enumerate_automorphisms(g: &Graph) -> Result<Vec<Permutation>> {
    let n = g.n();
    if n > MAX_AUTOMORPHISM_N {
        return Err(FpcError::SizeLimit {
            what: "automorphism enumeration",
            n,
            limit: MAX_AUTOMORPHISM_N,
            hint: None,
        });
    }
    let exact = g.is_binary();
    let same = |a: f64, b: f64| {
        if exact {
            a == b
        } else {
            (a - b).abs() <= WEIGHT_TOLERANCE
        }
    };

    let mut found = Vec::new();
    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(
        g: &Graph,
        depth: usize,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
        same: &dyn Fn(f64, f64) -> bool,
        found: &mut Vec<Permutation>,
    ) {
        let n = g.n();
        if depth == n {
            found.push(Permutation {
                mapping: mapping.clone(),
            });
            return;
        }
        for img in 0..n {
            if used[img] {
                continue;
            }
            let consistent = same(g.weight(depth, depth), g.weight(img, img))
                && (0..depth).all(|k| {
                    same(g.weight(k, depth), g.weight(mapping[k], img))
                        && same(g.weight(depth, k), g.weight(img, mapping[k]))
                });
            if !consistent {
                continue;
            }
            mapping[depth] = img;
            used[img] = true;
            extend(g, depth + 1, mapping, used, same, found);
            used[img] = false;
        }
        mapping[depth] = usize::MAX;
    }

    extend(g, 0, &mut mapping, &mut used, &same, &mut found);
    debug_assert!(found.iter().all(|p| is_automorphism(g, p).unwrap_or(false)));
    Ok(found)
}

/// Row sums: entry `j` is `sum_i a_ji`, the out-degree of node `j`.
pub fn degree_vector(g: &Graph) -> Vec<f64> {
    g.weights().row_iter().map(|r| r.sum()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Cycle,
    Complete,
    Star,
    Path,
    ErdosRenyi,
}

/// Parameters for one of the deterministic fixture generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphGeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GraphGeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Self {
        GraphGeneratorSpec {
            kind,
            n,
            edge_prob: None,
            seed: None,
        }
    }

    pub fn erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Self {
        GraphGeneratorSpec {
            kind: GeneratorKind::ErdosRenyi,
            n,
            edge_prob: Some(edge_prob),
            seed: Some(seed),
        }
    }
}

/// Builds the named fixture. All kinds produce symmetric 0/1 matrices with a
/// zero diagonal; `star` uses node 0 as the centre.
pub fn generate(spec: &GraphGeneratorSpec) -> Result<Graph> {
    let n = spec.n;
    if n == 0 {
        return param("generator requires n >= 1");
    }
    let is_er = spec.kind == GeneratorKind::ErdosRenyi;
    if is_er != spec.edge_prob.is_some() || is_er != spec.seed.is_some() {
        return param("edge_prob and seed are required for erdos_renyi and only for it");
    }
    let mut m = DMatrix::zeros(n, n);
    let mut link = |i: usize, j: usize| {
        if i != j {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
    };
    match spec.kind {
        GeneratorKind::Cycle => {
            for i in 0..n {
                link(i, (i + 1) % n);
            }
        }
        GeneratorKind::Complete => {
            for i in 0..n {
                for j in i + 1..n {
                    link(i, j);
                }
            }
        }
        GeneratorKind::Star => {
            for j in 1..n {
                link(0, j);
            }
        }
        GeneratorKind::Path => {
            for i in 1..n {
                link(i - 1, i);
            }
        }
        GeneratorKind::ErdosRenyi => {
            let p = spec.edge_prob.unwrap_or_default();
            if !(0.0..=1.0).contains(&p) {
                return param(format!("edge_prob {p} outside [0, 1]"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or_default());
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < p {
                        link(i, j);
                    }
                }
            }
        }
    }
    Graph::from_matrix(m)
}

pub fn cycle(n: usize) -> Graph {
    generate(&GraphGeneratorSpec::new(GeneratorKind::Cycle, n)).expect("n >= 1")
}

pub fn complete(n: usize) -> Graph {
    generate(&GraphGeneratorSpec::new(GeneratorKind::Complete, n)).expect("n >= 1")
}

pub fn star(n: usize) -> Graph {
    generate(&GraphGeneratorSpec::new(GeneratorKind::Star, n)).expect("n >= 1")
}

pub fn path(n: usize) -> Graph {
    generate(&GraphGeneratorSpec::new(GeneratorKind::Path, n)).expect("n >= 1")
}

/// The Petersen graph: outer 5-cycle on 0..5, inner pentagram on 5..10.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        let (a, b) = (i, (i + 1) % 5);
        let (c, d) = (5 + i, 5 + (i + 2) % 5);
        edges.extend([(a, b, 1.0), (b, a, 1.0), (c, d, 1.0), (d, c, 1.0)]);
        edges.extend([(i, 5 + i, 1.0), (5 + i, i, 1.0)]);
    }
    Graph::from_edges(10, &edges).expect("valid edges")
}

/// The triangular prism `C_3 x K_2`.
pub fn prism() -> Graph {
    let mut edges = Vec::new();
    for i in 0..3 {
        let j = (i + 1) % 3;
        for (a, b) in [(i, j), (3 + i, 3 + j), (i, 3 + i)] {
            edges.push((a, b, 1.0));
            edges.push((b, a, 1.0));
        }
    }
    Graph::from_edges(6, &edges).expect("valid edges")
}

/// The 3-cube `Q_3`: nodes are 3-bit labels, adjacent when they differ in one bit.
pub fn cube() -> Graph {
    let mut edges = Vec::new();
    for i in 0..8usize {
        for bit in 0..3 {
            edges.push((i, i ^ (1 << bit), 1.0));
        }
    }
    Graph::from_edges(8, &edges).expect("valid edges")
}
