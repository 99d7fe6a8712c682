//! Cross-cutting quadrature and push-forward invariants on seeded inputs.

mod common;

use common::{c, random_qd, seeded};
use rand::Rng;

use qdlab::pushforward::{
    cos_pushforward_mass, cos_pushforward_mass_wplane, TruncationPolicy,
};
use qdlab::quadrature::{
    annulus_log_mass, mass_fraction_profile, mass_on_region, plane_mass, QuadratureConfig,
};
use qdlab::{AffineMap, RationalQD, Region};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn additivity_over_disjoint_annuli() {
    let cfg = cfg();
    let q = random_qd(&mut seeded(31));
    let a = Region::annulus(c(0.0, 0.0), 2.5, 3.5).unwrap();
    let b = Region::annulus(c(0.0, 0.0), 3.5, 5.0).unwrap();
    let whole = Region::annulus(c(0.0, 0.0), 2.5, 5.0).unwrap();
    let ma = mass_on_region(&q, &a, &cfg).unwrap();
    let mb = mass_on_region(&q, &b, &cfg).unwrap();
    let mw = mass_on_region(&q, &whole, &cfg).unwrap();
    let budget = ma.error_estimate + mb.error_estimate + mw.error_estimate
        + cfg.rel_tol * mw.value;
    assert!(
        ((ma.value + mb.value) - mw.value).abs() <= budget,
        "{} + {} vs {}",
        ma.value,
        mb.value,
        mw.value
    );
}

#[test]
fn monotonicity_under_inclusion() {
    let cfg = cfg();
    let q = random_qd(&mut seeded(32));
    let small = Region::disk(c(0.3, -0.2), 1.0).unwrap();
    let large = Region::disk(c(0.3, -0.2), 2.5).unwrap();
    let ms = mass_on_region(&q, &small, &cfg).unwrap();
    let ml = mass_on_region(&q, &large, &cfg).unwrap();
    assert!(
        ms.value <= ml.value + ms.error_estimate + ml.error_estimate,
        "{} > {}",
        ms.value,
        ml.value
    );
}

#[test]
fn chart_consistency_for_disk_complement() {
    // The mass over |z| > R computed by the engine equals the hand-built
    // inversion-chart integral of |q(1/w)| / |w|^4 over a polar grid.
    let cfg = cfg();
    let q = random_qd(&mut seeded(33));
    let r_cut = 4.0;
    let direct = mass_on_region(
        &q,
        &Region::complement(Region::disk(c(0.0, 0.0), r_cut).unwrap()),
        &cfg,
    )
    .unwrap();

    // Independent route: midpoint rule in (log rho, theta) chart
    // coordinates, feasible because the chart integrand is smooth out there.
    let (nr, nt) = (4000, 256);
    let t0 = (1e-9f64).ln();
    let t1 = (1.0 / r_cut).ln();
    let dt = (t1 - t0) / nr as f64;
    let dth = std::f64::consts::TAU / nt as f64;
    let mut total = 0.0;
    for i in 0..nr {
        let t: f64 = t0 + (i as f64 + 0.5) * dt;
        let rho = t.exp();
        for j in 0..nt {
            let w = num_complex::Complex64::from_polar(rho, (j as f64 + 0.5) * dth);
            total += q.abs_density(w.inv()) / rho.powi(4) * rho * rho * dt * dth;
        }
    }
    let rel = (direct.value - total).abs() / direct.value;
    assert!(rel <= 2.0 * cfg.rel_tol, "engine {} vs chart grid {total}, rel {rel:.3e}", direct.value);
}

#[test]
fn closed_form_agreement_on_random_annuli() {
    let cfg = cfg();
    let q = RationalQD::log_differential();
    let mut rng = seeded(34);
    for i in 0..20 {
        let r = rng.gen_range(0.2..5.0);
        let ratio = rng.gen_range(1.1..20.0);
        let region = Region::annulus(c(0.0, 0.0), r, r * ratio).unwrap();
        let got = mass_on_region(&q, &region, &cfg).unwrap();
        let want = annulus_log_mass(r, r * ratio).unwrap();
        assert!(
            (got.value - want).abs() <= cfg.rel_tol * want,
            "case {i}: r={r}, ratio={ratio}: {} vs {want}",
            got.value
        );
    }
}

#[test]
fn scale_equivariance_of_plane_mass() {
    let cfg = cfg();
    let mut rng = seeded(35);
    let q = random_qd(&mut rng);
    let base = plane_mass(&q, &cfg).unwrap();
    for _ in 0..4 {
        let a = num_complex::Complex64::from_polar(
            rng.gen_range(0.3..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let pulled = q.affine_pullback(&AffineMap::scaling(a).unwrap());
        let got = plane_mass(&pulled, &cfg).unwrap();
        let rel = (got.value - base.value).abs() / base.value;
        assert!(rel <= 2.0 * cfg.rel_tol, "a = {a}: rel {rel:.3e}");
    }
}

#[test]
fn strip_and_wplane_masses_agree_on_random_qd() {
    let cfg = cfg();
    let policy = TruncationPolicy::default();
    let q = random_qd(&mut seeded(36));
    let strip = cos_pushforward_mass(&q, &cfg, &policy).unwrap();
    let wplane = cos_pushforward_mass_wplane(&q, &cfg, &policy).unwrap();
    let rel = (strip.value - wplane.value).abs() / strip.value;
    assert!(rel <= 3.0 * cfg.rel_tol, "strip {} vs wplane {}", strip.value, wplane.value);
}

#[test]
fn fraction_profile_instability_guard() {
    // Profiles are cumulative sums of nonnegative increments, so they never
    // decrease even when individual masses carry quadrature noise.
    let cfg = cfg();
    let q = random_qd(&mut seeded(37));
    let radii: Vec<f64> = (1..=12).map(|i| 0.4 * 1.5f64.powi(i)).collect();
    let fractions = mass_fraction_profile(&q, c(0.0, 0.0), &radii, &cfg).unwrap();
    for w in fractions.windows(2) {
        assert!(w[1] >= w[0]);
    }
    assert!(fractions.last().unwrap() > &0.95);
    assert!(fractions.iter().all(|f| *f <= 1.0 + 2.0 * cfg.rel_tol));
}
