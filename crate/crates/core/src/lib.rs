//! Pauli-Villars regularized one-loop QED vacuum in a classical magnetic
//! field at zero and positive temperature.
//!
//! Natural units throughout: `ħ = c = k_B = e = 1`. Masses, momenta,
//! temperatures and field strengths are plain dimensionless numbers; a field
//! strength `a = |B|` has the dimension of a squared mass and the inverse
//! temperature `β = 1/T` that of an inverse mass. To restore units, measure
//! masses in units of `m₀c²`, lengths in units of `ħ/(m₀c)` and fields in
//! units of `m₀²c²/(eħ)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`scheme`]: mass/coefficient schemes and the averaged cutoff Λ,
//! * [`quadrature`]: the adaptive integration engine,
//! * [`special`]: kernels, θ₂, Bessel `K₀,K₁,K₂`, alternating sums,
//! * [`response`]: the dielectric response `M⁰`, `Mᵀ` and the `G` functions,
//! * [`lagrangian`]: Euler-Heisenberg energy densities,
//! * [`fields`]: sampled fields and the local-density energy,
//! * [`oracle`]: slow independent evaluators used for cross-checks,
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod error;
pub mod fields;
pub mod lagrangian;
pub mod oracle;
pub mod quadrature;
pub mod response;
pub mod scheme;
pub mod special;

pub use error::{Error, Result};
pub use quadrature::{HalfLineMap, IntegralResult, QuadratureConfig};
pub use scheme::PauliVillarsScheme;
pub use special::SeriesPolicy;

/// Crate version, recorded in CSV headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
