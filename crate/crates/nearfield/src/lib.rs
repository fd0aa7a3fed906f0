//! Gridless super-resolution channel estimation for extremely large antenna
//! arrays.
//!
//! In the radiating near field of a large uniform linear array, each
//! propagation path contributes a complex tone (set by its angle) modulated
//! by a chirp (set by its range curvature). This crate estimates sparse
//! multipath channels from compressed constant-modulus pilot observations by
//!
//! 1. compressing the admissible chirps into a low-dimensional subspace
//!    ([`subspace`]),
//! 2. lifting the unknowns into a low-rank matrix and denoising it with a
//!    regularized atomic-norm semidefinite program solved by a first-order
//!    splitting method ([`lifting`], [`solver`]),
//! 3. reading gridless angles, gains and closed-form coarse ranges off the
//!    solution ([`recovery`]), and
//! 4. refining angles and ranges under the exact spherical model with an
//!    Armijo-backtracked alternating gradient descent ([`refine`]).
//!
//! The [`harness`] module adds seeded Monte-Carlo sweeps, metrics and file
//! output behind the `nfest` command-line tool; the `examples/` directory has
//! one runnable example per capability.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lifting;
pub mod linalg;
pub mod measure;
pub mod metrics;
pub mod recovery;
pub mod refine;
pub mod seeds;
pub mod solver;
pub mod subspace;

pub use channel::{steering_approx, steering_exact, synth_channel, PathParams, SteeringModel};
pub use error::{Error, Result};
pub use geometry::ArrayGeometry;
pub use lifting::{apply_p, apply_py, apply_py_adjoint, lift_ground_truth};
pub use measure::{gen_combiners, measure, MeasurementRecord, MeasurementSetup};
pub use metrics::{match_paths, nmse, rmse_metrics};
pub use recovery::{coarse_range, ls_gain_vectors, omega_to_theta, vandermonde_decompose, StageOneEstimate};
pub use refine::{projection_cost, refine, RefineOptions, RefineState};
pub use solver::{dual_atomic_norm, solve, tau_rule, LiftedSolution, SolverConfig};
pub use subspace::{min_grid_points, phi_max, subspace_error, DcrSubspace};
