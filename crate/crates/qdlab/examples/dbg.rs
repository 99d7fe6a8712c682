use qdlab::families::{cos_symmetric_build, CosSymmetricParams};
use qdlab::pushforward::{cos_pushforward_mass, cos_pushforward_mass_wplane, TruncationPolicy};
use qdlab::quadrature::QuadratureConfig;
use std::time::Instant;

fn main() {
    let cfg = QuadratureConfig::default();
    let policy = TruncationPolicy::default();
    let q = cos_symmetric_build(&CosSymmetricParams::default(), &cfg).unwrap();
    let t = Instant::now();
    let a = cos_pushforward_mass(&q, &cfg, &policy).unwrap();
    println!("strip  {} err {:.2e} in {:?}", a.value, a.error_estimate, t.elapsed());
    let t = Instant::now();
    let b = cos_pushforward_mass_wplane(&q, &cfg, &policy).unwrap();
    println!("wplane {} err {:.2e} in {:?}", b.value, b.error_estimate, t.elapsed());
    println!("rel diff {:.3e} vs 3*rel_tol {:.3e}", (a.value-b.value).abs()/a.value, 3.0*cfg.rel_tol);
}
