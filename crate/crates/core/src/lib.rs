//! Numerical laboratory for uncertainty relations of entangled identical
//! particles.
//!
//! Two independent engines produce [`MomentTable`]s:
//!
//! * [`gaussian`] holds exact first and second moments of N-mode Gaussian
//!   states in the `(q_1..q_N, p_1..p_N)` ordering;
//! * [`grid`] samples N-particle (N ≤ 3) wavefunctions on a uniform grid and
//!   computes moments by quadrature (positions) and FFT (momenta).
//!
//! [`inequalities`] evaluates every relation of the collective-observable
//! uncertainty family against a moment table, and [`searcher`] minimizes
//! uncertainty products over parameterized state families.

pub mod constants;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod inequalities;
pub mod moments;
pub mod report;
pub mod searcher;

pub use constants::Constants;
pub use error::{Error, Result};
pub use gaussian::GaussianState;
pub use grid::{GridSpec, GridState, Symmetry};
pub use inequalities::SuiteConfig;
pub use moments::{collective_dispersions, MomentTable};
pub use report::{Engine, InequalityReport, RelationName, RelationOutcome};
pub use searcher::{minimize, sweep, Family, Objective, SearchProblem, SearchResult};
