//! qdlab: a numerical laboratory for integrable rational quadratic
//! differentials on the sphere and their push-forwards under cosine maps.
//!
//! The crate is organized around:
//!
//! - [`qd`]: exact symbolic differentials `q(z) dz^2` with affine transport;
//! - [`region`]: round plane regions masses are integrated over;
//! - [`quadrature`]: adaptive L1 masses with integrable singularities,
//!   plus annulus moduli;
//! - [`pushforward`]: the cosine direct image, its mass, efficiency ratios,
//!   and low-degree polynomial push-forwards;
//! - [`families`]: the two candidate efficient families and sweep drivers;
//! - [`limit`]: thick/thin limit-model machinery, concentration annuli, and
//!   the mass-condition certifier;
//! - [`orbits`]: postsingular orbit portraits and the counting table.
//!
//! Quadrature cell evaluation is data-parallel (rayon) behind the `parallel`
//! feature, with a sequential fallback; both produce bit-identical results
//! because the reduction always runs in a fixed order.

pub mod error;
pub mod families;
pub mod io;
pub mod limit;
pub mod orbits;
mod par;
pub mod poly;
pub mod pushforward;
pub mod qd;
pub mod quadrature;
pub mod region;

pub use error::{Error, Result};
pub use qd::{detect_cos_symmetric_pairs, AffineMap, DivisorPoint, RationalQD, SymmetricPair};
pub use quadrature::{
    annulus_log_mass, annulus_modulus, mass_fraction_profile, mass_on_region, plane_mass,
    MassResult, QuadratureConfig, Strategy,
};
pub use region::Region;
