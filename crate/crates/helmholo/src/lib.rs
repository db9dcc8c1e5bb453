//! Numerical toolkit for wavenumber-explicit parametric holomorphy of the
//! 1-d Helmholtz solution operator.
//!
//! The model problem is the truncated Helmholtz equation on `(0, 2)`,
//!
//! ```text
//! k^{-2} u'' + n(x, y) u = -f,   u(0) = 0,   (k^{-1} d/dx - i) u |_{x=2} = 0,
//! ```
//!
//! with a piecewise coefficient `n(x, y) = n0(x) + sum_j y_j psi_j(x)` that
//! depends affinely on complex parameters `y`.  The crate
//!
//! * discretizes the problem with P1 finite elements on wavenumber-adapted
//!   meshes ([`mesh`]),
//! * measures solution-operator norms in the weighted norms `L2`, `H1_k`,
//!   `H2_k` across sweeps in `k` ([`opnorm`]),
//! * computes guaranteed polydisc radii of parametric holomorphy from
//!   Neumann-series perturbation bounds and verifies the factor-2 resolvent
//!   bound and Cauchy-integral analyticity ([`holomorphy`]),
//! * locates the actual poles of `y -> A^{-1}(k, y)` both from the
//!   transcendental resonance equation and from a matrix-pencil eigenvalue
//!   computation ([`poles`]), and
//! * evaluates the 2-d Dirichlet-to-Neumann Hankel-ratio symbol and its sign
//!   properties ([`dtn`]).
//!
//! See the `examples/` directory for one runnable program per capability;
//! the `helmholo` binary exposes the same experiments as subcommands.

pub mod cli;
pub mod coeffs;
pub mod dtn;
pub mod holomorphy;
pub mod linalg;
pub mod mesh;
pub mod opnorm;
pub mod poles;
pub mod suite;

pub use coeffs::{AffineFamily, ParamPoint, Piece, PiecewiseCoefficient};
pub use mesh::{DiscreteOperator, Mesh, PerturbationMatrix, Solution};
pub use opnorm::{NormKind, OperatorNormEstimate, SweepTable};

use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("singular or near-singular system (condition estimate {cond:.3e}): at or near pole")]
    NearPole { cond: f64 },
    #[error("exactly singular system")]
    Singular,
    #[error("iteration did not converge after {iters} iterations (last value {last:.6e}, rel change {rel_change:.3e})")]
    NoConvergence {
        iters: usize,
        last: f64,
        rel_change: f64,
    },
    #[error("Neumann series diverging: increment grew over {0} consecutive terms (parameter likely outside guaranteed region)")]
    NeumannDivergence(usize),
    #[error("Newton iteration failed: {0}")]
    Newton(String),
    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),
    #[error("{0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
