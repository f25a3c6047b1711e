//! Riemannian gradient descent for geodesically convex problems on two
//! Hadamard-type manifolds: the positive orthant with the metric
//! `G(x) = diag(x₁⁻², …, xₙ⁻²)` and the cone of symmetric positive definite
//! matrices with the affine-invariant metric `⟨U, V⟩_X = tr(V X⁻¹ U X⁻¹)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`orthant`] and [`spd`] hold the concrete geometry (metric, exponential
//!   map, distance, gradient conversion, hessian action) plus the symmetric
//!   eigendecomposition kernel every matrix function goes through.
//! - [`geometry`] wraps both behind the [`Point`] / [`Tangent`] / [`ManifoldKind`]
//!   types the rest of the crate is written against.
//! - [`objectives`] provides the benchmark functions together with their
//!   Euclidean and Riemannian gradients, Lipschitz bounds and known minimizers.
//! - [`solver`] runs gradient descent with a Lipschitz, adaptive or Armijo
//!   stepsize, plus a feasibility-preserving Euclidean baseline.
//! - [`analysis`] computes the constants of the convergence theory and checks
//!   descent, boundedness and iteration-complexity inequalities on recorded
//!   trajectories; it also builds performance profiles.
//!
//! ```
//! use riemgrad::objectives::{com_orthant, ComOrthantData};
//! use riemgrad::orthant::OrthantPoint;
//! use riemgrad::solver::{solve, SolverConfig, Status, StepsizeStrategy};
//! use riemgrad::{Objective, Point};
//!
//! let data = ComOrthantData::new(vec![
//!     OrthantPoint::from_slice(&[1.0, 2.0]).unwrap(),
//!     OrthantPoint::from_slice(&[4.0, 8.0]).unwrap(),
//! ])
//! .unwrap();
//! let objective = com_orthant(data).unwrap();
//! let x0 = Point::Orthant(OrthantPoint::from_slice(&[10.0, 0.1]).unwrap());
//! let report = solve(
//!     &objective,
//!     &x0,
//!     &StepsizeStrategy::Armijo { beta: 0.5 },
//!     &SolverConfig::default(),
//! )
//! .unwrap();
//! assert_eq!(report.status, Status::Converged);
//! let x = report.final_point.as_orthant().unwrap();
//! assert!((x.coords()[0] - 2.0).abs() < 1e-5);
//! ```

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod matrix_io;
pub mod objectives;
pub mod orthant;
pub mod solver;
pub mod spd;

pub use error::{Error, Result};
pub use geometry::{ManifoldKind, Point, Tangent};
pub use objectives::Objective;
