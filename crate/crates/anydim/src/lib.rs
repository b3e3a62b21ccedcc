//! Convergent finite-dimensional lower bounds for any-dimensional
//! polynomial optimization problems.
//!
//! Many polynomial minimization problems come in families indexed by a
//! dimension `n` — inequalities between symmetric functions holding in any
//! number of variables, graph-density inequalities holding for graphs of
//! every size, mean-field games as limits of `n`-player games. The optimal
//! values `u_n` of such a family typically decrease towards a limit
//! `u_∞ = inf_n u_n`, and bounding one `u_n` from below says nothing about
//! the limit.
//!
//! This crate constructs, for four concrete settings, a *dual cost* `q`:
//! a fixed low-dimensional polynomial whose symmetrizations `q_n` satisfy
//! `ℓ_n = inf q_n ≤ u_∞` with `ℓ_n` increasing in `n` and converging to
//! `u_∞` at an explicit rate. The construction rests on de Finetti-type
//! sampling maps between dimensions; the crate verifies the underlying
//! identities by exact enumeration in rational arithmetic.
//!
//! The four settings and their pipelines:
//!
//! * **Means** ([`symfunc::MeanPoly`]) — costs in power means over
//!   `ℝ^{d×n}`, dualized to monomial means (mean-field games).
//! * **Symmetric functions** ([`symfunc::SymPoly`]) — costs in products of
//!   power sums over `ℝ^n`, dualized through the triangular basis-change
//!   matrix of [`symfunc::definetti_sym_matrix`].
//! * **Graph densities** ([`graphalg::GraphPoly`]) — costs in homomorphism
//!   densities `t(H;·)`, dualized by swapping `t` for its injective
//!   analogue `t_inj`.
//! * **Graph numbers** — costs in homomorphism numbers `hom(H;·)`,
//!   dualized through the graph refinement poset and
//!   [`graphalg::definetti_graph_matrix`].
//!
//! [`optimize`] provides the two minimizers used to evaluate the bounds
//! (exact exhaustive search over simple graphs, and seeded multi-start
//! projected gradient descent), and [`definetti`] provides the sampling
//! maps, exact expectations, and total-variation / Wasserstein distance
//! diagnostics behind the convergence rates.

pub mod combinat;
pub mod definetti;
pub mod graphalg;
pub mod optimize;
pub mod scalar;
pub mod symfunc;

use thiserror::Error;

/// Errors shared across the crate's modules.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension too small for atom: need at least {need}, got {got}")]
    DimensionTooSmall { need: usize, got: usize },
    #[error("basis incomplete below degree: k = {k} < degree bound {degree}")]
    BasisIncomplete { k: usize, degree: usize },
    #[error("target dimension below degree: n = {n} < degree {degree}")]
    TargetBelowDegree { n: usize, degree: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("canonicalization size limit: {vertices} vertices exceeds {limit}")]
    CanonSizeLimit { vertices: usize, limit: usize },
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("atom set not refinement-closed: missing {0}")]
    NotRefinementClosed(String),
    #[error("bound requires k | n (k = {k}, n = {n})")]
    DivisibilityRequired { k: usize, n: usize },
    #[error("exact enumeration budget exceeded: {maps} maps > {budget}")]
    BudgetExceeded { maps: u128, budget: u128 },
    #[error("no projection for a discrete domain")]
    NoProjection,
    #[error("mixed basis families: {0}")]
    MixedBasis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

// The book chapters double as doctests so their snippets stay honest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Intro, "../../../book/src/intro.md");
    chapter!(Partitions, "../../../book/src/partitions.md");
    chapter!(SymmetricFunctions, "../../../book/src/symmetric-functions.md");
    chapter!(Graphs, "../../../book/src/graphs.md");
    chapter!(Definetti, "../../../book/src/definetti.md");
    chapter!(Optimization, "../../../book/src/optimization.md");
    chapter!(Cli, "../../../book/src/cli.md");
}
