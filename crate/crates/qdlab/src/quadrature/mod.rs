//! L1 masses of rational quadratic differentials over plane regions.
//!
//! Simple poles and the point at infinity carry integrable singularities;
//! the integrator splits the plane into polar caps around poles, log-polar
//! shells bridging separated scales, quadtree hubs at each cluster scale,
//! and an inversion chart for the exterior. See [`decompose`] for the
//! partition and [`engine`] for the adaptive loop.

mod decompose;
mod engine;
mod gauss;

pub(crate) use decompose::{build_patches, MassProblem, ProblemDomain};
pub(crate) use engine::integrate;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qd::RationalQD;
use crate::region::Region;

/// Domain partition strategy.
///
/// `Multiscale` is the shipped default. `QuadtreeChart` integrates the
/// bounded part with a single quadtree plus the inversion chart; it shares
/// the adaptive core but none of the feature-aligned decomposition, so the
/// two serve as independent cross-checks of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Multiscale,
    QuadtreeChart,
}

/// Tolerances and limits for adaptive mass integration.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative error target for each mass.
    pub rel_tol: f64,
    /// Absolute floor below which masses are considered zero.
    pub abs_floor: f64,
    /// Maximum cell subdivision depth.
    pub max_depth: u32,
    /// Pole-cap radius as a fraction of half the nearest-neighbor pole
    /// distance, capped at 0.5.
    pub pole_disk_factor: f64,
    /// Tensor Gauss-Legendre order per cell.
    pub gauss_order: usize,
    pub strategy: Strategy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            abs_floor: 1e-12,
            max_depth: 24,
            pole_disk_factor: 0.5,
            gauss_order: 8,
            strategy: Strategy::Multiscale,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("rel_tol must be positive".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidInput("max_depth must be at least 1".into()));
        }
        if !(self.pole_disk_factor > 0.0 && self.pole_disk_factor <= 1.0) {
            return Err(Error::InvalidInput("pole_disk_factor must be in (0, 1]".into()));
        }
        if self.gauss_order < 2 {
            return Err(Error::InvalidInput("gauss_order must be at least 2".into()));
        }
        Ok(())
    }
}

/// An integrated mass with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassResult {
    pub value: f64,
    pub error_estimate: f64,
    pub cells_evaluated: usize,
}

/// Integrates `|q|` over the region.
pub fn mass_on_region(
    q: &RationalQD,
    region: &Region,
    cfg: &QuadratureConfig,
) -> Result<MassResult> {
    cfg.validate()?;
    for p in q.poles() {
        if p.multiplicity >= 2 && region.contains_closed(p.location) {
            return Err(Error::NonIntegrable(format!(
                "pole of multiplicity {} at {} lies in the region",
                p.multiplicity, p.location
            )));
        }
    }
    if !region.is_bounded() && q.degree_at_infinity() < -1 {
        return Err(Error::NonIntegrable(format!(
            "order {} at infinity on an unbounded region",
            q.degree_at_infinity()
        )));
    }

    let density = move |z: Complex64| q.abs_density(z);
    let chart = move |w: Complex64| q.abs_density_chart(w);
    let problem = MassProblem {
        density: &density,
        chart_density: Some(&chart),
        singularities: q.pole_locations(),
        soft_features: q.zero_locations(),
        domain: ProblemDomain::Sphere,
        region: Some(region),
    };
    let patches = build_patches(&problem, cfg);
    integrate(&patches, cfg)
}

/// Mass of `|q|` over the whole plane.
pub fn plane_mass(q: &RationalQD, cfg: &QuadratureConfig) -> Result<MassResult> {
    mass_on_region(q, &Region::Plane, cfg)
}

/// Closed-form mass of `dz^2/z^2` over the round annulus `A(r, R)`:
/// `2 pi ln(R/r)`.
pub fn annulus_log_mass(r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r)?;
    Ok(std::f64::consts::TAU * (big_r / r).ln())
}

/// Conformal modulus of the round annulus `A(r, R)`: `ln(R/r) / (2 pi)`.
pub fn annulus_modulus(r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r)?;
    Ok((big_r / r).ln() / std::f64::consts::TAU)
}

/// Modulus from log-radii, for families whose radii underflow `f64`.
pub fn annulus_modulus_from_logs(log_r: f64, log_big_r: f64) -> Result<f64> {
    if !(log_r < log_big_r) {
        return Err(Error::BadRadii { r: log_r, big_r: log_big_r });
    }
    Ok((log_big_r - log_r) / std::f64::consts::TAU)
}

fn check_radii(r: f64, big_r: f64) -> Result<()> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::BadRadii { r, big_r });
    }
    Ok(())
}

/// Cumulative mass fractions `||q||_{D_r(center)} / ||q||_plane` over a
/// strictly increasing list of radii. Computed from per-annulus increments,
/// so the output is nondecreasing by construction.
pub fn mass_fraction_profile(
    q: &RationalQD,
    center: Complex64,
    radii: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    for (i, &r) in radii.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        if i > 0 && !(r > radii[i - 1]) {
            return Err(Error::InvalidInput("radii must be strictly increasing".into()));
        }
    }
    let total = plane_mass(q, cfg)?;
    if total.value <= cfg.abs_floor {
        return Err(Error::ZeroMass);
    }
    let mut fractions = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut lo = 0.0;
    for &r in radii {
        let region = if lo == 0.0 {
            Region::disk(center, r)?
        } else {
            Region::annulus(center, lo, r)?
        };
        acc += mass_on_region(q, &region, cfg)?.value;
        fractions.push(acc / total.value);
        lo = r;
    }
    Ok(fractions)
}
