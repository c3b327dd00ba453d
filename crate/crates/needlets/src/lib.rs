//! Needlet frames on the circle `S¹` and sphere `S²`, with nonparametric
//! regression by adaptive global hard thresholding of resolution levels.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`window`]: compactly supported weight functions `b` whose squares
//!   telescope to a partition of unity across dyadic-type scales.
//! - [`special`]: Gegenbauer polynomials and the projector kernels that
//!   needlets are built from.
//! - [`frame`]: cubature grids, needlet evaluation, and exact
//!   analysis/synthesis of known functions (tight frame).
//! - [`estimator`]: empirical needlet coefficients from scattered
//!   regression data, U-statistics `Θ̂_j(p)` over observation subsets, and
//!   keep-or-kill level selection against the threshold `B^{dj} n^{-p/2}`.
//! - [`besov`]: test functions, Besov sequence norms, and `L^p` loss
//!   evaluation.
//! - [`sim`]: a seeded Monte Carlo experiment harness with CSV/JSON report
//!   emission.
//!
//! Data-parallel inner loops (coefficient computation, grid evaluation,
//! Monte Carlo replicates) run on rayon when the `parallel` feature is
//! enabled (default) and fall back to sequential loops otherwise. Results
//! are identical either way: parallel maps preserve order and reductions
//! are performed in a fixed order.

pub mod besov;
pub mod error;
pub mod estimator;
pub mod frame;
pub(crate) mod par;
pub mod quadrature;
pub mod sim;
pub mod special;
pub mod window;

pub use error::{Error, Result};
pub use frame::{CoefficientKind, CoefficientSet, FrameBuilder, NeedletFrame, Point};
pub use window::{WindowFunction, WindowVariant};
