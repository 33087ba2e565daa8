//! Spectral data of first-order symmetric systems
//!
//! ```text
//! J y' - B(t) y = λ Δ(t) y + Δ(t) f(t),   t ∈ [a, b]
//! ```
//!
//! on `𝐇 = H ⊕ Ĥ ⊕ H`. The crate integrates fundamental solutions, builds the
//! decomposing boundary triplet at a regular right endpoint, evaluates the Weyl
//! function `M(λ)`, characteristic matrices `Ω_τ(λ)` for Nevanlinna boundary
//! parameters `τ`, and applies generalized resolvents `R_τ(λ)` by several
//! independent routes so that they can be checked against each other.
//!
//! Module map:
//!
//! - [`system`]: space decomposition, structure matrix `J`, coefficient maps.
//! - [`ode`]: adaptive Dormand–Prince integration of `Y₀(·, λ)`, variation of
//!   parameters, residual monitors.
//! - [`weighted`]: quadrature mesh and the semi-definite space `L²_Δ`.
//! - [`triplet`]: boundary map at `b`, defining solutions `v₀`, `u`, Weyl data.
//! - [`parameter`]: boundary parameters `τ` and their interface form `(C_a, C_b)`.
//! - [`charmat`]: characteristic matrices by four routes, and their identities.
//! - [`resolvent`]: generalized resolvents by three routes, eigenvalue scans.

pub mod builtins;
pub mod charmat;
mod error;
pub mod linalg;
pub mod ode;
pub mod parameter;
pub mod resolvent;
pub mod system;
mod tolerances;
pub mod triplet;
pub mod weighted;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use ode::{Engine, FundamentalSolution, SolutionMatrix};
pub use parameter::{BoundaryParameter, InterfaceDims, InterfacePair, Pair};
pub use system::{CoefficientMap, SpaceDecomposition, SymmetricSystem};
pub use tolerances::Tolerances;
pub use weighted::{QuadratureMesh, WeightedFunction};
