//! Radial graphs of prescribed curvature over domains in the unit sphere.
//!
//! A surface given as a radial graph `X(x) = ρ(x)·x` over a domain `Ω ⊂ S²`
//! has principal curvatures `κ = (κ₁, κ₂)` with respect to its inward unit
//! normal. This crate computes graphs whose normalized curvature
//! `f(κ) = (S_r(κ)/binom(n,r))^{1/r}` equals a prescribed positive field,
//! with the boundary radius pinned by Dirichlet data, by a damped Newton
//! method driven through a two-stage parameter continuation that starts from
//! a strict subsolution.
//!
//! The crate is organized along the layers of that computation:
//!
//! * [`symfun`] — elementary symmetric functions, the Gårding cone `Γ_r`,
//!   the normalized curvature function and its derivatives;
//! * [`chart`] — gnomonic-chart grids over star-shaped spherical domains and
//!   covariant derivatives in an orthonormal frame;
//! * [`graph`] — pointwise geometry of a radial graph (metric, square roots,
//!   second fundamental form, principal curvatures, mesh embedding);
//! * [`operator`] — the nonlinear curvature operator in logarithmic form,
//!   its linearization and the two homotopy right-hand-side families;
//! * [`continuation`] — the damped Newton solver with admissibility-preserving
//!   line search and the adaptive two-stage continuation schedule;
//! * [`exact_sphere`] — the off-center constant-curvature sphere family used
//!   as a benchmark oracle;
//! * [`sampling`] — deterministic samplers for the property-test layer.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature and enable `libm` for embedded or kernel-side use.
//!
//! ```
//! use radgraph::chart::{ChartGrid, DomainSpec};
//! use radgraph::continuation::{run_two_stage, SolverOptions, TwoStageProblem};
//! use radgraph::symfun::CurvatureSpec;
//!
//! // scalar curvature R = 1 over the cap of geodesic radius pi/3, boundary
//! // pinned to the unit sphere, continuation from the unit-sphere subsolution
//! let grid = ChartGrid::build(DomainSpec::cap(std::f64::consts::FRAC_PI_3)?, 9, 16)?;
//! let problem = TwoStageProblem {
//!     grid: &grid,
//!     spec: CurvatureSpec::new(2, 2)?,
//!     psi_tilde: vec![(1.0f64 / 2.0).sqrt(); grid.node_count()],
//!     v_bc: vec![0.0; grid.n_theta()],
//!     v_under: vec![0.0; grid.node_count()],
//! };
//! let out = run_two_stage(&problem, &SolverOptions::default())?;
//! assert!(out.report.converged);
//! // the graph sits strictly inside the unit sphere away from the boundary
//! assert!(out.state.v[0] > 0.0);
//! # Ok::<(), radgraph::Error>(())
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
// negated comparisons are deliberate: `!(x > 0.0)` rejects NaN, `x <= 0.0`
// would let it through
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("radgraph requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod band;
pub mod chart;
pub mod continuation;
pub mod error;
pub mod exact_sphere;
pub mod graph;
pub mod linalg;
pub mod math;
pub mod operator;
pub mod sampling;
pub mod symfun;

pub use error::Error;
pub use symfun::{CurvatureSpec, EigenTuple, SymMatrix};
