use num_complex::Complex64;
use qdlab::qd::{DivisorPoint, RationalQD};
use qdlab::pushforward::{cos_pushforward_mass_hinted, cos_pushforward_mass_wplane, efficiency_report, TruncationPolicy};
use qdlab::quadrature::{plane_mass, QuadratureConfig};
use std::time::Instant;

fn c(re: f64, im: f64) -> Complex64 { Complex64::new(re, im) }

fn main() {
    let q = RationalQD::new(
        c(1.0, 0.0),
        vec![],
        vec![
            DivisorPoint::simple(c(0.2, 0.1)),
            DivisorPoint::simple(c(1.1, 0.0)),
            DivisorPoint::simple(c(-0.9, -0.3)),
        ],
    ).unwrap();
    let cfg = QuadratureConfig::default();
    let policy = TruncationPolicy::default();

    let t = Instant::now();
    let m = plane_mass(&q, &cfg).unwrap();
    println!("plane mass {} (err {:.2e}, cells {}) in {:?}", m.value, m.error_estimate, m.cells_evaluated, t.elapsed());

    let t = Instant::now();
    let p = cos_pushforward_mass_hinted(&q, &cfg, &policy, Some(m.value)).unwrap();
    println!("strip push {} (err {:.2e}, cells {}) in {:?}", p.value, p.error_estimate, p.cells_evaluated, t.elapsed());

    let t = Instant::now();
    let w = cos_pushforward_mass_wplane(&q, &cfg, &policy).unwrap();
    println!("wplane push {} (err {:.2e}, cells {}) in {:?}", w.value, w.error_estimate, w.cells_evaluated, t.elapsed());
    println!("ratio strip {} vs wplane {} -> rel diff {:.3e}", p.value/m.value, w.value/m.value, (p.value-w.value).abs()/p.value);

    let t = Instant::now();
    let rep = efficiency_report(&q, &cfg, &policy).unwrap();
    println!("efficiency report ratio {} +- {:.2e} in {:?}", rep.ratio, rep.ratio_error, t.elapsed());
}
