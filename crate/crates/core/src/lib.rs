//! Optimization of weakly convex functions on Riemannian manifolds through
//! pullbacks along the exponential map ("trivializations"), together with the
//! curvature-dependent bounds on the exponential map that make the step size
//! choice sound, and numerical oracles that certify those bounds.
//!
//! Module map:
//!
//! * [`trig`]: generalized trigonometric functions `sn_κ`, `ct_κ`, `π_κ`.
//! * [`bounds`]: first and second order bounds on `exp`, weak-convexity constants.
//! * [`manifolds`]: Euclidean space, spheres, hyperbolic space, `SO(n)`, Grassmannians.
//! * [`verify`]: Jacobi-field integration and finite-difference certification of the bounds.
//! * [`optimize`]: the dynamic trivialization optimizer.
//! * [`problems`]: benchmark objectives with known optima.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod optimize;
pub mod problems;
pub mod trig;
pub mod verify;

pub use bounds::{BoundCertificate, CurvatureProfile, WeakConvexityReport};
pub use error::{Error, Result};
pub use manifolds::{Manifold, ManifoldSpec, Point, Tangent};
pub use optimize::{Objective, OptimizerConfig, StoppingRule, TrivializationState};
pub use problems::{ProblemInstance, ProblemKind};
pub use verify::{CheckReport, GeodesicSpec};
