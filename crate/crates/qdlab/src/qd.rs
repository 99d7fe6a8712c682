//! Rational quadratic differentials on the sphere and their affine transport.
//!
//! A differential is stored exactly: a leading coefficient together with the
//! finite zero and pole divisors. The local density is
//!
//! ```text
//! q(z) = leading * prod (z - z_i)^{m_i} / prod (z - p_j)^{n_j}
//! ```
//!
//! and the behaviour at infinity is read off from the divisor degrees in the
//! `w = 1/z` chart, where densities transform by `w^{-4}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for treating two constructed points as equal.
pub const IDENTITY_TOL: f64 = 1e-12;

/// A point of a divisor together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub location: Complex64,
    pub multiplicity: u32,
}

impl DivisorPoint {
    pub fn new(location: Complex64, multiplicity: u32) -> Self {
        Self { location, multiplicity }
    }

    pub fn simple(location: Complex64) -> Self {
        Self::new(location, 1)
    }
}

/// A rational quadratic differential `q(z) dz^2` on the Riemann sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalQD {
    leading: Complex64,
    zeros: Vec<DivisorPoint>,
    poles: Vec<DivisorPoint>,
}

impl RationalQD {
    /// Builds a differential, checking that the divisors are disjoint within
    /// the default identity tolerance and that the leading coefficient is
    /// nonzero.
    pub fn new(
        leading: Complex64,
        zeros: Vec<DivisorPoint>,
        poles: Vec<DivisorPoint>,
    ) -> Result<Self> {
        Self::with_identity_tol(leading, zeros, poles, IDENTITY_TOL)
    }

    /// Like [`RationalQD::new`] with an explicit identity tolerance. Families
    /// built at extreme scales (separations below `1e-12`) pass a smaller
    /// tolerance so legitimately distinct poles are not flagged as common
    /// factors.
    pub fn with_identity_tol(
        leading: Complex64,
        zeros: Vec<DivisorPoint>,
        poles: Vec<DivisorPoint>,
        tol: f64,
    ) -> Result<Self> {
        if leading.norm() == 0.0 || !leading.is_finite() {
            return Err(Error::ZeroLeading);
        }
        for d in zeros.iter().chain(poles.iter()) {
            if d.multiplicity == 0 {
                return Err(Error::InvalidInput("zero multiplicity in divisor".into()));
            }
            if !d.location.is_finite() {
                return Err(Error::InvalidInput("non-finite divisor location".into()));
            }
        }
        for z in &zeros {
            for p in &poles {
                if (z.location - p.location).norm() <= tol {
                    return Err(Error::CommonFactor(format!("{}", z.location)));
                }
            }
        }
        for (i, a) in zeros.iter().enumerate() {
            for b in &zeros[i + 1..] {
                if (a.location - b.location).norm() <= tol {
                    return Err(Error::InvalidInput(format!(
                        "repeated zero at {}; merge multiplicities instead",
                        a.location
                    )));
                }
            }
        }
        for (i, a) in poles.iter().enumerate() {
            for b in &poles[i + 1..] {
                if (a.location - b.location).norm() <= tol {
                    return Err(Error::InvalidInput(format!(
                        "repeated pole at {}; merge multiplicities instead",
                        a.location
                    )));
                }
            }
        }
        Ok(Self { leading, zeros, poles })
    }

    /// The differential `dz^2 / z^2`.
    pub fn log_differential() -> Self {
        Self {
            leading: Complex64::new(1.0, 0.0),
            zeros: vec![],
            poles: vec![DivisorPoint::new(Complex64::new(0.0, 0.0), 2)],
        }
    }

    pub fn leading(&self) -> Complex64 {
        self.leading
    }

    pub fn zeros(&self) -> &[DivisorPoint] {
        &self.zeros
    }

    pub fn poles(&self) -> &[DivisorPoint] {
        &self.poles
    }

    pub fn pole_locations(&self) -> Vec<Complex64> {
        self.poles.iter().map(|d| d.location).collect()
    }

    pub fn zero_locations(&self) -> Vec<Complex64> {
        self.zeros.iter().map(|d| d.location).collect()
    }

    /// Total zero multiplicity (degree of the numerator).
    pub fn zero_degree(&self) -> i64 {
        self.zeros.iter().map(|d| d.multiplicity as i64).sum()
    }

    /// Total pole multiplicity (degree of the denominator).
    pub fn pole_degree(&self) -> i64 {
        self.poles.iter().map(|d| d.multiplicity as i64).sum()
    }

    /// Rescales the leading coefficient.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        if c.norm() == 0.0 {
            return Err(Error::ZeroLeading);
        }
        Ok(Self { leading: self.leading * c, ..self.clone() })
    }

    /// Order of the differential at infinity in the `w = 1/z` chart:
    /// `-(deg num - deg den) - 4`. A value of `-1` means a simple pole at
    /// infinity; values `>= 0` mean the differential is regular or vanishes
    /// there.
    pub fn degree_at_infinity(&self) -> i64 {
        -(self.zero_degree() - self.pole_degree()) - 4
    }

    /// A differential is integrable over the whole sphere exactly when every
    /// finite pole is simple and the order at infinity is at least `-1`.
    pub fn is_sphere_integrable(&self) -> bool {
        self.poles.iter().all(|d| d.multiplicity == 1) && self.degree_at_infinity() >= -1
    }

    /// Evaluates the local density `q(z)`.
    pub fn eval_density(&self, z: Complex64) -> Result<Complex64> {
        self.eval_density_tol(z, IDENTITY_TOL)
    }

    pub fn eval_density_tol(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        for p in &self.poles {
            if (z - p.location).norm() <= tol {
                return Err(Error::EvalAtPole(format!("{z}")));
            }
        }
        Ok(self.eval_density_unchecked(z))
    }

    /// Density evaluation without the pole guard: returns non-finite values
    /// at poles. Quadrature nodes never land on patch centers, so this is the
    /// hot path for integration.
    pub fn eval_density_unchecked(&self, z: Complex64) -> Complex64 {
        let mut num = self.leading;
        for d in &self.zeros {
            let f = z - d.location;
            num *= if d.multiplicity == 1 { f } else { f.powu(d.multiplicity) };
        }
        let mut den = Complex64::new(1.0, 0.0);
        for d in &self.poles {
            let f = z - d.location;
            den *= if d.multiplicity == 1 { f } else { f.powu(d.multiplicity) };
        }
        num / den
    }

    /// `|q(z)|`, non-finite at poles.
    pub fn abs_density(&self, z: Complex64) -> f64 {
        self.eval_density_unchecked(z).norm()
    }

    /// Density in the `w = 1/z` chart: `q(1/w) / w^4`.
    pub fn abs_density_chart(&self, w: Complex64) -> f64 {
        let r = w.norm();
        if r == 0.0 {
            // Order -1 at infinity gives an integrable simple-pole profile;
            // anything worse diverges and the caller must have excluded it.
            return f64::INFINITY;
        }
        self.abs_density(w.inv()) / (r * r * r * r)
    }

    /// Pullback along `M(z) = a z + b`:
    /// `(M^* q)(z) = a^2 q(a z + b)`, with divisors pulled back through
    /// `M^{-1}` and the leading coefficient multiplied by
    /// `a^(2 + deg num - deg den)` so that the density identity holds.
    pub fn affine_pullback(&self, m: &AffineMap) -> Self {
        let inv = m.inverse();
        let exponent = 2 + self.zero_degree() - self.pole_degree();
        let leading = self.leading * powi_c(m.a, exponent);
        let zeros = self
            .zeros
            .iter()
            .map(|d| DivisorPoint::new(inv.apply(d.location), d.multiplicity))
            .collect();
        let poles = self
            .poles
            .iter()
            .map(|d| DivisorPoint::new(inv.apply(d.location), d.multiplicity))
            .collect();
        Self { leading, zeros, poles }
    }

    /// Pushforward along `M`, i.e. pullback along `M^{-1}`. Divisors move
    /// forward through `M`.
    pub fn affine_pushforward(&self, m: &AffineMap) -> Self {
        self.affine_pullback(&m.inverse())
    }
}

fn powi_c(a: Complex64, e: i64) -> Complex64 {
    if e >= 0 {
        a.powu(e as u32)
    } else {
        a.powu((-e) as u32).inv()
    }
}

/// An invertible affine map `z -> a z + b` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: Complex64,
    pub b: Complex64,
}

impl AffineMap {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if a.norm() == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateAffine);
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    pub fn scaling(a: Complex64) -> Result<Self> {
        Self::new(a, Complex64::new(0.0, 0.0))
    }

    pub fn translation(b: Complex64) -> Self {
        Self { a: Complex64::new(1.0, 0.0), b }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a.inv(), b: -self.b / self.a }
    }

    /// `self` after `other`: `(self ∘ other)(z) = self(other(z))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { a: self.a * other.a, b: self.a * other.b + self.b }
    }
}

/// A pole pair `k*pi + z0`, `k*pi - z0` symmetric about the cosine critical
/// point `k*pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricPair {
    pub k: i64,
    /// Offset of the pair from `k*pi`, taken from the member that appears
    /// first in the input list.
    pub z0: Complex64,
    /// Indices into the input pole list.
    pub indices: (usize, usize),
}

/// Finds cos-symmetric pole pairs: `(p, p')` with `|p + p' - 2k*pi| < tol`
/// for some integer `k`. Pairing is greedy nearest-first; each pole joins at
/// most one pair and ties are broken by input order.
pub fn detect_cos_symmetric_pairs(poles: &[Complex64], tol: f64) -> Vec<SymmetricPair> {
    use std::f64::consts::PI;
    assert!(tol > 0.0, "tolerance must be positive");

    // Candidate pairs with their deviation from exact symmetry.
    let mut candidates: Vec<(f64, usize, usize, i64)> = Vec::new();
    for i in 0..poles.len() {
        for j in (i + 1)..poles.len() {
            let s = poles[i] + poles[j];
            let k = (s.re / (2.0 * PI)).round() as i64;
            let dev = (s - Complex64::new(2.0 * PI * k as f64, 0.0)).norm();
            if dev < tol {
                candidates.push((dev, i, j, k));
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    });

    let mut used = vec![false; poles.len()];
    let mut pairs = Vec::new();
    for (_, i, j, k) in candidates {
        if used[i] || used[j] {
            continue;
        }
        let z0 = poles[i] - Complex64::new(PI * k as f64, 0.0);
        if z0.norm() <= tol {
            // A single pole sitting at the critical point is not a pair.
            continue;
        }
        used[i] = true;
        used[j] = true;
        pairs.push(SymmetricPair { k, z0, indices: (i, j) });
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn density_of_log_differential() {
        let q = RationalQD::log_differential();
        let v = q.eval_density(c(2.0, 0.0)).unwrap();
        assert!(close(v, c(0.25, 0.0), 1e-15));
    }

    #[test]
    fn density_rational_by_hand() {
        // zeros {i, -i}, poles {1,-1,2,-2,3} simple, leading 1, z = 0.
        let q = RationalQD::new(
            c(1.0, 0.0),
            vec![DivisorPoint::simple(c(0.0, 1.0)), DivisorPoint::simple(c(0.0, -1.0))],
            [1.0, -1.0, 2.0, -2.0, 3.0]
                .iter()
                .map(|&x| DivisorPoint::simple(c(x, 0.0)))
                .collect(),
        )
        .unwrap();
        let v = q.eval_density(c(0.0, 0.0)).unwrap();
        assert!(close(v, c(-1.0 / 12.0, 0.0), 1e-15), "got {v}");
    }

    #[test]
    fn density_errors_at_pole() {
        let q = RationalQD::log_differential();
        assert!(matches!(q.eval_density(c(0.0, 0.0)), Err(Error::EvalAtPole(_))));
    }

    #[test]
    fn degree_at_infinity_cases() {
        let cube = RationalQD::new(
            c(1.0, 0.0),
            vec![],
            vec![DivisorPoint::new(c(0.0, 0.0), 3)],
        )
        .unwrap();
        assert_eq!(cube.degree_at_infinity(), -1);
        assert!(!cube.is_sphere_integrable()); // finite pole has multiplicity 3

        let square = RationalQD::log_differential();
        assert_eq!(square.degree_at_infinity(), -2);
        assert!(!square.is_sphere_integrable());

        // Numerator degree 2, denominator degree 5.
        let fam = RationalQD::new(
            c(1.0, 0.0),
            vec![DivisorPoint::simple(c(0.0, 1.0)), DivisorPoint::simple(c(0.0, -1.0))],
            [0.5, -0.5, 1.5, -1.5, 1.0]
                .iter()
                .map(|&x| DivisorPoint::simple(c(x, 0.0)))
                .collect(),
        )
        .unwrap();
        assert_eq!(fam.degree_at_infinity(), -1);
        assert!(fam.is_sphere_integrable());
    }

    #[test]
    fn pullback_identity_and_scale_invariance() {
        let q = RationalQD::log_differential();
        let id = AffineMap::identity();
        assert_eq!(q.affine_pullback(&id), q);

        // dz^2/z^2 is fixed by every z -> a z.
        let m = AffineMap::scaling(c(2.0, 0.0)).unwrap();
        let pulled = q.affine_pullback(&m);
        assert!(close(pulled.leading(), c(1.0, 0.0), 1e-15));
        assert!(close(pulled.poles()[0].location, c(0.0, 0.0), 1e-15));
    }

    #[test]
    fn pullback_translation() {
        let q = RationalQD::log_differential();
        let m = AffineMap::translation(c(1.0, 0.0));
        let pulled = q.affine_pullback(&m);
        // (M^*q)(z) = q(z+1): pole at -1.
        assert!(close(pulled.poles()[0].location, c(-1.0, 0.0), 1e-15));
        let z = c(0.3, 0.7);
        let lhs = pulled.eval_density(z).unwrap();
        let rhs = q.eval_density(m.apply(z)).unwrap();
        assert!(close(lhs, rhs, 1e-14));
    }

    #[test]
    fn pushforward_moves_pole_forward() {
        // q = dz^2/(z-1)^3 pushed by M(z) = z+1: density comparison at
        // random-ish points is the oracle; the pole lands at M(1) = 2,
        // while the pullback by the same map puts it at 0.
        let q = RationalQD::new(
            c(1.0, 0.0),
            vec![],
            vec![DivisorPoint::new(c(1.0, 0.0), 3)],
        )
        .unwrap();
        let m = AffineMap::translation(c(1.0, 0.0));
        let pushed = q.affine_pushforward(&m);
        assert!(close(pushed.poles()[0].location, c(2.0, 0.0), 1e-15));
        let pulled = q.affine_pullback(&m);
        assert!(close(pulled.poles()[0].location, c(0.0, 0.0), 1e-15));

        // (M_* q)(w) = a^{-2} q(M^{-1} w) pointwise.
        let pts = [
            c(0.13, 0.8), c(-1.4, 0.22), c(3.1, -0.5), c(0.0, 2.0), c(-0.7, -0.9),
            c(2.5, 1.5), c(4.0, 0.1), c(-3.0, 0.4), c(0.9, -2.2), c(1.3, 3.0),
        ];
        for w in pts {
            let lhs = pushed.eval_density(w).unwrap();
            let rhs = q.eval_density(m.inverse().apply(w)).unwrap();
            assert!(close(lhs, rhs, 1e-12 * (1.0 + rhs.norm())), "at {w}");
        }
    }

    #[test]
    fn pushforward_pullback_round_trip() {
        let q = RationalQD::new(
            c(0.3, 1.1),
            vec![DivisorPoint::simple(c(0.4, 0.2))],
            vec![
                DivisorPoint::simple(c(1.0, 0.0)),
                DivisorPoint::simple(c(-1.0, 0.5)),
                DivisorPoint::simple(c(0.0, -2.0)),
                DivisorPoint::simple(c(2.0, 2.0)),
            ],
        )
        .unwrap();
        let m = AffineMap::new(c(0.7, -0.4), c(1.3, 0.8)).unwrap();
        // pushforward then pullback by the same map restores q.
        let rt = q.affine_pushforward(&m).affine_pullback(&m);
        assert!(close(rt.leading(), q.leading(), 1e-13));
        for (a, b) in rt.poles().iter().zip(q.poles()) {
            assert!(close(a.location, b.location, 1e-13));
        }
    }

    #[test]
    fn symmetric_pairs_about_origin_and_pi() {
        let pairs = detect_cos_symmetric_pairs(&[c(0.3, 0.0), c(-0.3, 0.0)], 1e-9);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].k, 0);
        assert!(close(pairs[0].z0, c(0.3, 0.0), 1e-12));

        let pairs = detect_cos_symmetric_pairs(&[c(PI + 0.2, 0.0), c(PI - 0.2, 0.0)], 1e-9);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].k, 1);
        assert!(close(pairs[0].z0, c(0.2, 0.0), 1e-12));
    }

    #[test]
    fn symmetric_pairs_of_cos_symmetric_family() {
        // Poles {±a, ±b}: two pairs, both with k = 0.
        let pairs = detect_cos_symmetric_pairs(
            &[c(0.5, 0.0), c(-0.5, 0.0), c(1.5, 0.0), c(-1.5, 0.0)],
            1e-9,
        );
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.k == 0));
    }

    #[test]
    fn common_factor_rejected() {
        let err = RationalQD::new(
            c(1.0, 0.0),
            vec![DivisorPoint::simple(c(1.0, 0.0))],
            vec![DivisorPoint::simple(c(1.0, 0.0) + c(1e-13, 0.0))],
        );
        assert!(matches!(err, Err(Error::CommonFactor(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_complex(r: f64) -> impl Strategy<Value = Complex64> {
            (-r..r, -r..r).prop_map(|(re, im)| Complex64::new(re, im))
        }

        fn arb_affine() -> impl Strategy<Value = AffineMap> {
            (arb_complex(2.0), arb_complex(2.0))
                .prop_filter("a away from 0", |(a, _)| a.norm() > 0.1)
                .prop_map(|(a, b)| AffineMap::new(a, b).unwrap())
        }

        fn arb_qd() -> impl Strategy<Value = RationalQD> {
            (
                arb_complex(2.0).prop_filter("nonzero leading", |l| l.norm() > 0.05),
                proptest::collection::vec(arb_complex(3.0), 0..3),
                proptest::collection::vec(arb_complex(3.0), 3..6),
            )
                .prop_filter_map("divisors disjoint", |(l, zs, ps)| {
                    RationalQD::new(
                        l,
                        zs.into_iter().map(DivisorPoint::simple).collect(),
                        ps.into_iter().map(DivisorPoint::simple).collect(),
                    )
                    .ok()
                })
        }

        proptest! {
            #[test]
            fn pullback_functoriality(q in arb_qd(), m in arb_affine(), n in arb_affine()) {
                let lhs = q.affine_pullback(&m.compose(&n));
                let rhs = q.affine_pullback(&m).affine_pullback(&n);
                prop_assert!((lhs.leading() - rhs.leading()).norm()
                    <= 1e-9 * (1.0 + rhs.leading().norm()));
                for (a, b) in lhs.poles().iter().zip(rhs.poles()) {
                    prop_assert!((a.location - b.location).norm() <= 1e-9 * (1.0 + b.location.norm()));
                }
            }

            #[test]
            fn density_transport(q in arb_qd(), m in arb_affine(), z in arb_complex(4.0)) {
                let pulled = q.affine_pullback(&m);
                let at = m.apply(z);
                let near_pole = q.poles().iter().any(|p| (at - p.location).norm() < 1e-3)
                    || pulled.poles().iter().any(|p| (z - p.location).norm() < 1e-3);
                prop_assume!(!near_pole);
                let lhs = pulled.eval_density(z).unwrap();
                let rhs = m.a * m.a * q.eval_density(at).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()) * 1e3);
            }

            #[test]
            fn degree_at_infinity_invariant(q in arb_qd(), m in arb_affine()) {
                prop_assert_eq!(q.affine_pullback(&m).degree_at_infinity(), q.degree_at_infinity());
            }

            #[test]
            fn log_differential_fixed_by_scalings(a in arb_complex(3.0)) {
                prop_assume!(a.norm() > 0.1);
                let q = RationalQD::log_differential();
                let pulled = q.affine_pullback(&AffineMap::scaling(a).unwrap());
                prop_assert!((pulled.leading() - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
                prop_assert!(pulled.poles()[0].location.norm() <= 1e-12);
            }
        }
    }
}
