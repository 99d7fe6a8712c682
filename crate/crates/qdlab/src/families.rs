//! The two candidate efficient quadratic-differential families and the
//! efficiency sweep driver.
//!
//! The cos-symmetric family places simple poles at `±a`, `±b`, `1` under a
//! quadratic numerator, so that infinity carries a simple pole and the four
//! symmetric poles cluster at the cosine critical point `0`. The polygon
//! family realizes six poles and two zeros with a cluster whose separating
//! annuli have moduli `n`, `n(n-2)`, `n`.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::par;
use crate::poly::Poly;
use crate::pushforward::{
    cos_pushforward_mass_hinted, DecayBounds, TruncationPolicy,
};
use crate::qd::{DivisorPoint, RationalQD, IDENTITY_TOL};
use crate::quadrature::{mass_on_region, plane_mass, QuadratureConfig};
use crate::region::Region;

/// Parameters of the cos-symmetric candidate family
/// `p(z) / ((z^2-a^2)(z^2-b^2)(z-1)) dz^2`.
#[derive(Debug, Clone)]
pub struct CosSymmetricParams {
    /// Inner symmetric pole scale (`0 < a < b`).
    pub a: f64,
    /// Outer symmetric pole scale.
    pub b: f64,
    /// Quadratic numerator, ascending coefficients (degree exactly 2).
    pub p_coeffs: [Complex64; 3],
    /// Plane mass the member is normalized to.
    pub target_mass: f64,
}

impl Default for CosSymmetricParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            b: 1.5,
            p_coeffs: [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
            target_mass: 4.0,
        }
    }
}

impl CosSymmetricParams {
    /// Member at index `n` of the shrinking schedule `a = 2^-n`, `b = 3a`.
    pub fn geometric(n: u32) -> Self {
        let a = 0.5f64.powi(n as i32);
        Self { a, b: 3.0 * a, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < self.b) {
            return Err(Error::InvalidInput("need 0 < a < b".into()));
        }
        if (self.b - 1.0).abs() <= IDENTITY_TOL || (self.a - 1.0).abs() <= IDENTITY_TOL {
            return Err(Error::PoleCollision("symmetric pole scale hits the pole at 1".into()));
        }
        if self.p_coeffs[2].norm() == 0.0 {
            return Err(Error::InvalidInput("numerator must have degree exactly 2".into()));
        }
        if !(self.target_mass > 0.0) {
            return Err(Error::InvalidInput("target mass must be positive".into()));
        }
        Ok(())
    }
}

/// Builds a normalized member of the cos-symmetric family.
pub fn cos_symmetric_build(
    params: &CosSymmetricParams,
    cfg: &QuadratureConfig,
) -> Result<RationalQD> {
    params.validate()?;
    let CosSymmetricParams { a, b, p_coeffs, target_mass } = params.clone();
    if (a - b).abs() <= IDENTITY_TOL {
        return Err(Error::PoleCollision(format!("a = b = {a}")));
    }
    let poles = [a, -a, b, -b, 1.0]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect::<Vec<_>>();
    let numerator = Poly::new(p_coeffs.to_vec())?;
    for p in &poles {
        if numerator.eval(*p).norm() <= IDENTITY_TOL {
            return Err(Error::PoleCollision(format!("numerator vanishes at pole {p}")));
        }
    }
    let zeros = numerator.solve(Complex64::new(0.0, 0.0))?;
    let tol = (IDENTITY_TOL).min(a / 10.0);
    let raw = RationalQD::with_identity_tol(
        p_coeffs[2],
        zeros.into_iter().map(DivisorPoint::simple).collect(),
        poles.into_iter().map(DivisorPoint::simple).collect(),
        tol,
    )
    .map_err(|e| match e {
        Error::CommonFactor(s) | Error::InvalidInput(s) => Error::PoleCollision(s),
        other => other,
    })?;
    normalize_mass(&raw, target_mass, cfg)
}

/// Parameters of the polygon family with radii `R1 = e^{-2 pi n^2}`,
/// `R2 = e^{-2 pi n(n-1)}`, `R3 = e^{-2 pi n}`.
#[derive(Debug, Clone)]
pub struct PolygonFamilyParams {
    pub n: u32,
    pub cluster_center: Complex64,
    pub target_mass: f64,
}

impl PolygonFamilyParams {
    pub fn new(n: u32) -> Self {
        Self { n, cluster_center: Complex64::new(1.0, 0.0), target_mass: 4.0 }
    }

    /// `(R1, R2, R3)`; underflows to zero for large `n` — see
    /// [`PolygonFamilyParams::log_radii`].
    pub fn radii(&self) -> (f64, f64, f64) {
        let (l1, l2, l3) = self.log_radii();
        (l1.exp(), l2.exp(), l3.exp())
    }

    /// Natural logs of the radii, exact for any `n`.
    pub fn log_radii(&self) -> (f64, f64, f64) {
        let n = self.n as f64;
        (-TAU * n * n, -TAU * n * (n - 1.0), -TAU * n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput("polygon family needs n >= 2".into()));
        }
        Ok(())
    }
}

/// Builds the polygon-family member: six simple poles counting infinity
/// (at 0, at the cluster center, and three more on the cluster scales) and
/// two zeros on the cluster's inner separating circle.
///
/// The cluster is realized on rays through the center with spacings `R1`,
/// `±R2`; only the separating-annulus moduli are normative. For `n >= 3`
/// the spacing `R1` falls below the f64 resolution at the cluster center,
/// so members can only be built at `n = 2`; radii and moduli remain
/// available at any `n` through [`PolygonFamilyParams::log_radii`].
pub fn polygon_family_build(
    params: &PolygonFamilyParams,
    cfg: &QuadratureConfig,
) -> Result<RationalQD> {
    params.validate()?;
    let (r1, r2, r3) = params.radii();
    let c = params.cluster_center;
    let eps = f64::EPSILON * c.norm().max(1.0);
    if r1 <= 4.0 * eps {
        return Err(Error::InvalidInput(format!(
            "cluster spacing R1 = {r1:.3e} is below f64 resolution at the center; \
             use log_radii for modulus bookkeeping"
        )));
    }
    let poles = vec![
        Complex64::new(0.0, 0.0),
        c,
        c + Complex64::new(r1, 0.0),
        c + Complex64::new(r2, 0.0),
        c - Complex64::new(r2, 0.0),
    ];
    let zeros = vec![c + Complex64::new(0.0, r3), c - Complex64::new(0.0, r3)];
    let tol = (r1 / 10.0).min(IDENTITY_TOL);
    let raw = RationalQD::with_identity_tol(
        Complex64::new(1.0, 0.0),
        zeros.into_iter().map(DivisorPoint::simple).collect(),
        poles.into_iter().map(DivisorPoint::simple).collect(),
        tol,
    )?;
    normalize_mass(&raw, params.target_mass, cfg)
}

/// Rescales the leading coefficient so the plane mass hits the target.
pub fn normalize_mass(
    q: &RationalQD,
    target: f64,
    cfg: &QuadratureConfig,
) -> Result<RationalQD> {
    let mass = plane_mass(q, cfg)?;
    if mass.value <= cfg.abs_floor {
        return Err(Error::ZeroMass);
    }
    q.scaled(Complex64::new(target / mass.value, 0.0))
}

/// One family member handed to the sweep: the differential plus the disk its
/// concentration fraction is measured on.
#[derive(Debug, Clone)]
pub struct SweepMember {
    pub qd: RationalQD,
    pub concentration_center: Complex64,
    pub concentration_radius: f64,
}

/// One sweep row. Failures are recorded and do not stop the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: u32,
    pub outcome: Result<SweepValues>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepValues {
    pub mass: f64,
    pub pushforward_mass: f64,
    pub ratio: f64,
    pub concentration_fraction: f64,
    pub error_estimate: f64,
}

/// Runs the efficiency sweep over `indices`, one row per index, in index
/// order regardless of completion order.
pub fn efficiency_sweep<F>(
    family: F,
    indices: std::ops::RangeInclusive<u32>,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Vec<SweepRow>
where
    F: Fn(u32) -> Result<SweepMember> + Sync + Send,
{
    let idx: Vec<u32> = indices.collect();
    par::map(&idx, |&index| SweepRow {
        index,
        outcome: sweep_row(&family, index, cfg, policy),
    })
}

fn sweep_row<F>(
    family: &F,
    index: u32,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<SweepValues>
where
    F: Fn(u32) -> Result<SweepMember>,
{
    let member = family(index)?;
    let q = &member.qd;
    if !q.is_sphere_integrable() {
        return Err(Error::NonIntegrable(format!("sweep member {index}")));
    }
    let mass = plane_mass(q, cfg)?;
    if mass.value <= cfg.abs_floor {
        return Err(Error::ZeroMass);
    }
    let push = cos_pushforward_mass_hinted(q, cfg, policy, Some(mass.value))?;
    let disk = Region::disk(member.concentration_center, member.concentration_radius)?;
    let inside = mass_on_region(q, &disk, cfg)?;
    Ok(SweepValues {
        mass: mass.value,
        pushforward_mass: push.value,
        ratio: push.value / mass.value,
        concentration_fraction: inside.value / mass.value,
        error_estimate: (push.error_estimate + mass.error_estimate * push.value / mass.value)
            / mass.value,
    })
}

/// Member constructor for the shrinking schedule `a = 2^-n`, `b = 3a`;
/// concentration measured on `disk(0, 10a)`.
pub fn shrinking_member(n: u32, cfg: &QuadratureConfig) -> Result<SweepMember> {
    let params = CosSymmetricParams::geometric(n);
    let radius = 10.0 * params.a;
    let qd = cos_symmetric_build(&params, cfg)?;
    Ok(SweepMember {
        qd,
        concentration_center: Complex64::new(0.0, 0.0),
        concentration_radius: radius,
    })
}

/// Control member: the scale is pinned at `a = 0.5` for every index, with
/// the concentration disk shrinking on the same schedule as the shrinking
/// family for comparability.
pub fn control_member(n: u32, cfg: &QuadratureConfig) -> Result<SweepMember> {
    let params = CosSymmetricParams::default();
    let radius = 10.0 * 0.5f64.powi(n as i32);
    let qd = cos_symmetric_build(&params, cfg)?;
    Ok(SweepMember {
        qd,
        concentration_center: Complex64::new(0.0, 0.0),
        concentration_radius: radius,
    })
}

/// CSV header for sweep output.
pub const SWEEP_CSV_HEADER: &str =
    "index,mass,pushforward_mass,ratio,concentration_fraction,error_estimate";

impl SweepRow {
    /// CSV line matching [`SWEEP_CSV_HEADER`]; failed rows carry NaNs.
    pub fn to_csv(&self) -> String {
        match &self.outcome {
            Ok(v) => format!(
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                self.index, v.mass, v.pushforward_mass, v.ratio, v.concentration_fraction,
                v.error_estimate
            ),
            Err(_) => format!("{},nan,nan,nan,nan,nan", self.index),
        }
    }
}

/// Decay-bound sanity data for a built member, used by diagnostics.
pub fn member_decay(q: &RationalQD) -> Result<DecayBounds> {
    DecayBounds::for_qd(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect_cos_symmetric_pairs;
    use crate::pushforward::efficiency_ratio;
    use crate::quadrature::annulus_modulus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn cos_symmetric_member_is_normalized_and_integrable() {
        let q = cos_symmetric_build(&CosSymmetricParams::default(), &cfg()).unwrap();
        assert!(q.is_sphere_integrable());
        assert_eq!(q.degree_at_infinity(), -1);
        let mass = plane_mass(&q, &cfg()).unwrap();
        assert!(
            (mass.value - 4.0).abs() <= 2.0 * cfg().rel_tol * 4.0,
            "mass {}",
            mass.value
        );
    }

    #[test]
    fn cos_symmetric_member_has_two_symmetric_pairs() {
        let q = cos_symmetric_build(&CosSymmetricParams::default(), &cfg()).unwrap();
        let pairs = detect_cos_symmetric_pairs(&q.pole_locations(), 1e-9);
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.k == 0));
    }

    #[test]
    fn cos_symmetric_divisor_symmetry() {
        // The pole multiset {±a, ±b} is symmetric under z -> -z; only the
        // poles at 1 and infinity break it.
        let q = cos_symmetric_build(&CosSymmetricParams::default(), &cfg()).unwrap();
        let poles = q.pole_locations();
        for p in &poles {
            if (p - c(1.0, 0.0)).norm() < 1e-9 {
                continue;
            }
            assert!(
                poles.iter().any(|other| (other + p).norm() < 1e-9),
                "pole {p} lacks a mirror"
            );
        }
    }

    #[test]
    fn pole_collisions_rejected() {
        let bad = CosSymmetricParams { a: 0.7, b: 0.7, ..Default::default() };
        assert!(matches!(
            cos_symmetric_build(&bad, &cfg()),
            Err(Error::PoleCollision(_)) | Err(Error::InvalidInput(_))
        ));
        // Numerator root colliding with a pole.
        let bad = CosSymmetricParams {
            p_coeffs: [c(-0.25, 0.0), c(0.0, 0.0), c(1.0, 0.0)], // zeros at ±1/2 = ±a
            ..Default::default()
        };
        assert!(matches!(cos_symmetric_build(&bad, &cfg()), Err(Error::PoleCollision(_))));
    }

    #[test]
    fn normalization_is_idempotent() {
        let q = cos_symmetric_build(&CosSymmetricParams::default(), &cfg()).unwrap();
        let again = normalize_mass(&q, 4.0, &cfg()).unwrap();
        let factor = (again.leading() / q.leading()).norm();
        assert!((factor - 1.0).abs() <= cfg().rel_tol, "factor {factor}");
    }

    #[test]
    fn polygon_member_counts_and_moduli() {
        let params = PolygonFamilyParams::new(2);
        let q = polygon_family_build(&params, &cfg()).unwrap();
        // 6 poles and 2 zeros counting infinity (simple pole at infinity).
        assert_eq!(q.poles().len(), 5);
        assert_eq!(q.zeros().len(), 2);
        assert_eq!(q.degree_at_infinity(), -1);
        assert!(q.is_sphere_integrable());

        let (_, _, r3) = params.radii();
        assert!((annulus_modulus(r3, 1.0).unwrap() - 2.0).abs() < 1e-9);
        let p3 = PolygonFamilyParams::new(3);
        let (_, r2, r3) = p3.radii();
        assert!((annulus_modulus(r2, r3).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn polygon_member_rejects_unrepresentable_spacing() {
        assert!(matches!(
            polygon_family_build(&PolygonFamilyParams::new(3), &cfg()),
            Err(Error::InvalidInput(_))
        ));
        // Log-space radii still work at any n.
        let p = PolygonFamilyParams::new(7);
        let (l1, l2, _) = p.log_radii();
        let m = crate::quadrature::annulus_modulus_from_logs(l1, l2).unwrap();
        assert!((m - 7.0).abs() < 1e-9);
    }

    #[test]
    fn single_index_sweep_matches_efficiency_ratio() {
        let cfg = cfg();
        let policy = TruncationPolicy::default();
        let rows = efficiency_sweep(|n| shrinking_member(n, &cfg), 1..=1, &cfg, &policy);
        assert_eq!(rows.len(), 1);
        let vals = rows[0].outcome.as_ref().unwrap();
        let q = shrinking_member(1, &cfg).unwrap().qd;
        let direct = efficiency_ratio(&q, &cfg, &policy).unwrap();
        assert!(
            (vals.ratio - direct).abs() <= 1e-12,
            "sweep {} vs direct {direct}",
            vals.ratio
        );
    }

    #[test]
    fn sweep_records_row_level_errors() {
        let cfg = cfg();
        let policy = TruncationPolicy::default();
        let rows = efficiency_sweep(
            |n| {
                if n == 2 {
                    Err(Error::ZeroMass)
                } else {
                    shrinking_member(n, &cfg)
                }
            },
            1..=3,
            &cfg,
            &policy,
        );
        assert_eq!(rows.len(), 3);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        assert!(rows[2].outcome.is_ok());
        assert!(rows[1].to_csv().contains("nan"));
    }
}
