//! Fixed-point centralities for finite graphs and step-function graphons.
//!
//! A fixed-point centrality is `rho = g(x)` where the feature `x` solves
//! `x = f(A, x)` for a relabeling-equivariant map `f`. Eigenvector, Katz-Bonacich
//! and PageRank centralities are the canonical examples. Besides solving for
//! these, the crate computes the quantities that control how much a centrality
//! can move when the graph is perturbed (contraction moduli, operator and cut
//! norms, Wasserstein distances) and packages them as checkable certificates.

pub mod centrality;
pub mod error;
pub mod graph;
pub mod graphon;
pub mod io;
pub mod norms;
pub mod perturbation;
pub mod transport;

pub use error::{FpcError, Result};
