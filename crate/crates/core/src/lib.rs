//! Tree tensor network states built from dense states by sequential SVDs,
//! truncated to prescribed bond dimensions, and checked against error and
//! bond-dimension bounds expressed through Schmidt spectra and Rényi
//! entanglement entropies.
//!
//! The pieces, bottom up:
//!
//! - [`tree`]: rooted trees with canonical labels and branch sets.
//! - [`state`]: dense states, Schmidt decompositions, truncation errors.
//! - [`network`]: the TTNS itself, exact decomposition and contraction.
//! - [`truncation`]: projector and lazy truncation with error accounting.
//! - [`entropy`]: Rényi entropies, extremal distributions and entropy bounds.
//! - [`targets`]: named states and small spin-model ground states.
//! - [`io`]: state, tree and TTNS file formats.

pub mod entropy;
pub mod io;
pub mod linalg;
pub mod network;
pub mod state;
pub mod targets;
pub mod tensor;
pub mod tree;
pub mod truncation;

pub use num_complex::Complex64 as C64;

pub use entropy::{BoundEvaluation, BoundKind, EdgeDistribution, Side};
pub use network::{Ttns, TtnsTensor};
pub use state::{DenseState, SchmidtSpectrum};
pub use tree::{Relabeling, TreeError, TreeGraph};
pub use truncation::{Budget, TruncationPlan, TruncationResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("bipartition part is empty")]
    EmptyPart,
    #[error("bipartition part covers every site")]
    FullPart,
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("inconsistent TTNS shape: {0}")]
    ShapeInconsistent(String),
    #[error("TTNS carries no Schmidt spectra")]
    SpectraUnavailable,
    #[error("truncation plan does not fit the tree: {0}")]
    PlanShapeMismatch(String),
    #[error("tree is not a linear chain")]
    NotLinearTree,
    #[error("not a probability distribution: {0}")]
    BadDistribution(String),
    #[error("Rényi parameter must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("Rényi parameter {alpha} outside {range}")]
    AlphaOutOfRange { alpha: f64, range: &'static str },
    #[error("error budget {0} outside (0, 1)")]
    BadEps(f64),
    #[error("argument out of range: {0}")]
    BadRange(String),
    #[error("infeasible distribution: {0}")]
    Infeasible(String),
    #[error("no grid point satisfies the validity range")]
    NoValidAlpha,
    #[error("{sites} sites exceed the dense eigensolver limit of {max}")]
    TooLarge { sites: usize, max: usize },
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
