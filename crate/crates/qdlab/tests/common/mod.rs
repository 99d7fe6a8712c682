//! Shared helpers for integration suites: seeded random differentials and
//! affine maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdlab::qd::{AffineMap, DivisorPoint, RationalQD};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sphere-integrable differential with 4..=8 simple poles (and enough simple
/// zeros for a simple pole at infinity), all features separated by at least
/// 0.15 inside |z| <= 2.
pub fn random_qd(rng: &mut ChaCha8Rng) -> RationalQD {
    loop {
        let n_poles = rng.gen_range(4..=8);
        let n_zeros = n_poles - 3;
        let mut pts: Vec<Complex64> = Vec::new();
        let mut ok = true;
        for _ in 0..(n_poles + n_zeros) {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if pts.iter().any(|p| (p - z).norm() < 0.15) {
                ok = false;
                break;
            }
            pts.push(z);
        }
        if !ok {
            continue;
        }
        let poles = pts[..n_poles].iter().map(|&z| DivisorPoint::simple(z)).collect();
        let zeros = pts[n_poles..].iter().map(|&z| DivisorPoint::simple(z)).collect();
        if let Ok(q) = RationalQD::new(c(1.0, 0.0), zeros, poles) {
            return q;
        }
    }
}

pub fn random_affine(rng: &mut ChaCha8Rng) -> AffineMap {
    let modulus = rng.gen_range(0.3..3.0);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let a = Complex64::from_polar(modulus, angle);
    let b = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    AffineMap::new(a, b).expect("modulus bounded away from zero")
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
