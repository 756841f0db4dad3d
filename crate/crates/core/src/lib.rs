//! Sub-Lorentzian geometry of the Heisenberg group and Lorentzian optimal
//! transport on top of it.
//!
//! The crate is organised bottom-up:
//!
//! - [`group`]: group law, inverses, frame/coordinate covectors.
//! - [`geodesics`]: closed-form Hamiltonian flow, exponential and logarithm maps.
//! - [`causality`]: causal cones, the time separation `τ`, Minkowski comparison.
//! - [`transport`]: discrete causal Kantorovich problem, duals, verification.
//! - [`brenier`]: `c_p`-concave potentials, Brenier maps, interpolation,
//!   Monge–Ampère residuals.
//! - [`minkowski`]: planar comparison solver, lifts, right translations.
//! - [`io`]: measure files, plan/trajectory CSV, generators, histograms.
//! - [`verify`]: seeded property suites used by the command-line `verify`.

pub mod brenier;
pub mod causality;
pub mod geodesics;
pub mod group;
pub mod io;
pub mod minkowski;
mod special;
pub mod transport;
pub mod verify;

pub use causality::{classify, tau, CausalRelation, GeometryError, PlanarPoint};
pub use geodesics::{energy, exp_map, flow, log_map};
pub use transport::{cost_matrix, lorentz_wasserstein, solve_kantorovich, CostMatrix, CostParams, DiscreteMeasure, DualPotentials, TransportError, TransportPlan};
pub use group::{CoordCovector, FrameCovector, GroupPoint};

