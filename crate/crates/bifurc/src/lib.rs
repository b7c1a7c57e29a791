//! Exact bifurcation curves λ(α) for the quasilinear two-point problem
//! [D(u)u']' + λ g(u) = 0 on (0,1), u(0) = u(1) = 0, computed by the
//! time-map method.
//!
//! For each admissible amplitude α the positive symmetric solution with
//! max u = α exists for exactly one λ, recovered from a singular integral
//! of D against the potential difference G(α) − G(u). The crate provides:
//!
//! - [`model`]: the four problem families (oscillating diffusion,
//!   oscillating reaction, both, pure power), their coefficient functions,
//!   cancellation-free potential differences, and admissibility checks;
//! - [`quadrature`]: tanh-sinh and adaptive Gauss–Kronrod kernels plus an
//!   oscillatory splitter tuned for inverse-square-root endpoint
//!   singularities;
//! - [`timemap`]: λ(α) evaluation, curve sweeps, solution profiles, CSV;
//! - [`asymptotics`]: closed-form large-α and small-α approximations and
//!   residual envelope fitting;
//! - [`oracle`]: an independent shooting integrator used to cross-validate
//!   every (α, λ) pair;
//! - [`phase`]: stationary-phase building blocks (endpoint oscillatory
//!   integrals, decay-rate scans, decomposition diagnostics).

pub mod asymptotics;
pub mod model;
pub mod oracle;
pub mod phase;
pub mod quadrature;
pub mod timemap;

mod fit;
mod special;
