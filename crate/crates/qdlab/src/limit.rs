//! Thick/thin limit-model machinery: scaling detection, limit-model
//! distances, the first-order rescalings of cosine at a base point,
//! inner-radius selection, concentration-annulus search, the mass-condition
//! certifier, and the modulus bound used by the contraction argument.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qd::{AffineMap, RationalQD};
use crate::quadrature::{
    annulus_modulus, build_patches, integrate, mass_on_region, MassProblem, ProblemDomain,
    QuadratureConfig,
};
use crate::region::Region;

/// Affine scaling `M(z) = a z + b` detected from a pole cluster; `b` is a
/// pole of the source differential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThickScaling {
    pub map: AffineMap,
}

/// The thin limit model `c dz^2/z^2` on a round annulus about `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinModel {
    pub center: Complex64,
    pub r: f64,
    pub big_r: f64,
    pub coefficient: Complex64,
}

impl ThinModel {
    pub fn new(center: Complex64, r: f64, big_r: f64, coefficient: Complex64) -> Result<Self> {
        if !(0.0 < r && r < big_r) {
            return Err(Error::BadRadii { r, big_r });
        }
        Ok(Self { center, r, big_r, coefficient })
    }

    pub fn modulus(&self) -> f64 {
        (self.big_r / self.r).ln() / std::f64::consts::TAU
    }

    pub fn annulus(&self) -> Region {
        Region::Annulus { center: self.center, r: self.r, big_r: self.big_r }
    }
}

/// A pole-free separating annulus with at least two poles inside its
/// bounded complementary disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationResult {
    pub center: Complex64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub modulus: f64,
    pub poles_inside: Vec<Complex64>,
}

/// Detects the thick-case scaling from the tightest 2-pole cluster: `b` is
/// the member of the closest pole pair nearest the all-pole centroid (ties
/// broken lexicographically by `(Re, Im)`), and `a` is the pair distance.
pub fn detect_thick_scaling(q: &RationalQD) -> Result<ThickScaling> {
    let mut poles = q.pole_locations();
    if poles.len() < 2 {
        return Err(Error::TooFewPoles);
    }
    poles.sort_by(|x, y| {
        x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
    });
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..poles.len() {
        for j in (i + 1)..poles.len() {
            let d = (poles[i] - poles[j]).norm();
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
    }
    let (dist, i, j) = best.unwrap();
    let (pi_, pj) = (poles[i], poles[j]);
    // Both members are equidistant from the cluster centroid (the pair
    // midpoint), so the lexicographic tie-break always decides; the sort
    // established i < j.
    let mid = (pi_ + pj) / 2.0;
    let b = if (pi_ - mid).norm() <= (pj - mid).norm() { pi_ } else { pj };
    Ok(ThickScaling { map: AffineMap::new(Complex64::new(dist, 0.0), b)? })
}

/// `|| M^* q_n - q_model ||` over the plane.
pub fn limit_model_distance(
    q_n: &RationalQD,
    m: &AffineMap,
    q_model: &RationalQD,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let pulled = q_n.affine_pullback(m);
    for q in [&pulled, q_model] {
        if !q.is_sphere_integrable() {
            return Err(Error::NonIntegrable(
                "limit-model distance needs sphere-integrable differentials".into(),
            ));
        }
    }
    let mut singular = pulled.pole_locations();
    singular.extend(q_model.pole_locations());
    let mut soft = pulled.zero_locations();
    soft.extend(q_model.zero_locations());
    let pulled = &pulled;
    let density = move |z: Complex64| {
        (pulled.eval_density_unchecked(z) - q_model.eval_density_unchecked(z)).norm()
    };
    let chart = |w: Complex64| {
        let r = w.norm();
        if r == 0.0 {
            return f64::INFINITY;
        }
        density(w.inv()) / (r * r * r * r)
    };
    let problem = MassProblem {
        density: &density,
        chart_density: Some(&chart),
        singularities: singular,
        soft_features: soft,
        domain: ProblemDomain::Sphere,
        region: None,
    };
    let patches = build_patches(&problem, cfg);
    Ok(integrate(&patches, cfg)?.value)
}

fn require_noncritical(b: Complex64) -> Result<Complex64> {
    let s = b.sin();
    if s.norm() <= 1e-9 {
        return Err(Error::DegenerateAtCritical(format!("{b}")));
    }
    Ok(s)
}

/// First-order model of `cos(a z + b)` at the base point:
/// `z -> -a sin(b) z + cos(b)`.
pub fn hat_scaling(a: Complex64, b: Complex64) -> Result<AffineMap> {
    if a.norm() == 0.0 {
        return Err(Error::DegenerateAffine);
    }
    let s = require_noncritical(b)?;
    AffineMap::new(-a * s, b.cos())
}

/// The rescaled cosine `S(z) = (cos(a z + b) - cos(b)) / (-a sin(b))`,
/// evaluated through the product form
/// `2 sin(b + a z / 2) sin(a z / 2) / (a sin b)`, which is stable as
/// `a -> 0`.
pub fn s_n_eval(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    if a.norm() == 0.0 {
        return Err(Error::DegenerateAffine);
    }
    let s = require_noncritical(b)?;
    let half = a * z / 2.0;
    Ok(2.0 * (b + half).sin() * half.sin() / (a * s))
}

/// Maximum of `|S(z) - z|` over a fixed boundary sample of `|z| = radius`.
pub fn s_n_sup_deviation(a: Complex64, b: Complex64, radius: f64) -> Result<f64> {
    let n = 256;
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = std::f64::consts::TAU * i as f64 / n as f64;
        let z = Complex64::from_polar(radius, t);
        worst = worst.max((s_n_eval(a, b, z)? - z).norm());
    }
    Ok(worst)
}

/// Image annulus of the thin model under the first-order cosine rescaling:
/// centered at `cos(b)` with radii scaled by `|sin(b)|`. The modulus is
/// preserved exactly.
pub fn thin_image_annulus(r: f64, r_star: f64, b: Complex64) -> Result<ThinModel> {
    if !(0.0 < r && r < r_star) {
        return Err(Error::BadRadii { r, big_r: r_star });
    }
    let s = require_noncritical(b)?.norm();
    ThinModel::new(b.cos(), s * r, s * r_star, Complex64::new(1.0, 0.0))
}

/// Smallest radius on a logarithmic grid (64 points per decade) capturing a
/// `1 - delta` share of the annulus mass.
pub fn choose_inner_radius(
    q: &RationalQD,
    model: &ThinModel,
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidInput("delta must lie in (0, 1]".into()));
    }
    let (r, big_r, center) = (model.r, model.big_r, model.center);
    let total = mass_on_region(q, &Region::annulus(center, r, big_r)?, cfg)?;
    if total.value <= cfg.abs_floor {
        return Err(Error::ZeroMass);
    }
    let decades = (big_r / r).log10();
    let steps = ((64.0 * decades).ceil() as usize).max(1);
    let ratio = (big_r / r).powf(1.0 / steps as f64);
    let mut acc = 0.0;
    let mut lo = r;
    for j in 1..=steps {
        let hi = if j == steps { big_r } else { r * ratio.powi(j as i32) };
        acc += mass_on_region(q, &Region::annulus(center, lo, hi)?, cfg)?.value;
        if acc / total.value >= 1.0 - delta {
            return Ok(hi);
        }
        lo = hi;
    }
    Ok(big_r)
}

/// Searches pole clusters for a separating annulus of modulus at least
/// `m_required`: inner radius 1.5x the cluster radius, outer radius out to
/// the nearest foreign pole or the chart boundary. Sound but not complete.
pub fn find_concentration_annulus(
    q: &RationalQD,
    m_required: f64,
) -> Result<Option<ConcentrationResult>> {
    if !(m_required > 0.0) {
        return Err(Error::InvalidInput("required modulus must be positive".into()));
    }
    let mut poles = q.pole_locations();
    if poles.len() < 2 {
        return Err(Error::TooFewPoles);
    }
    poles.sort_by(|x, y| {
        x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap())
    });
    let chart_radius = 2.0f64.max(2.0 * poles.iter().map(|p| p.norm()).fold(0.0, f64::max));

    // Single-linkage merge tree; every internal node is a candidate cluster.
    let mut clusters: Vec<Vec<usize>> = (0..poles.len()).map(|i| vec![i]).collect();
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let mut d = f64::INFINITY;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        d = d.min((poles[a] - poles[b]).norm());
                    }
                }
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.unwrap();
        let merged: Vec<usize> = clusters[i].iter().chain(clusters[j].iter()).copied().collect();
        candidates.push(merged.clone());
        clusters.remove(j);
        clusters[i] = merged;
    }

    // Tightest clusters first.
    let mut scored: Vec<(f64, Complex64, Vec<usize>)> = candidates
        .into_iter()
        .map(|members| {
            let g = members.iter().map(|&i| poles[i]).sum::<Complex64>() / members.len() as f64;
            let radius = members.iter().map(|&i| (poles[i] - g).norm()).fold(0.0f64, f64::max);
            (radius, g, members)
        })
        .collect();
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.re.partial_cmp(&b.1.re).unwrap())
            .then(a.1.im.partial_cmp(&b.1.im).unwrap())
    });

    for (radius, center, members) in scored {
        if radius == 0.0 {
            continue;
        }
        let inner = 1.5 * radius;
        let outer = poles
            .iter()
            .enumerate()
            .filter(|(i, _)| !members.contains(i))
            .map(|(_, p)| (p - center).norm())
            .fold(f64::INFINITY, f64::min);
        let outer = if outer.is_finite() { outer } else { chart_radius + center.norm() };
        if outer <= inner {
            continue;
        }
        let modulus = annulus_modulus(inner, outer)?;
        if modulus >= m_required {
            return Ok(Some(ConcentrationResult {
                center,
                inner_radius: inner,
                outer_radius: outer,
                modulus,
                poles_inside: members.iter().map(|&i| poles[i]).collect(),
            }));
        }
    }
    Ok(None)
}

/// Witness of a mass-condition failure: stage `s` of the composition maps
/// the disk over the critical point `k pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MassConditionWitness {
    pub stage: usize,
    pub k: i64,
}

/// Certified outcome of the mass-condition check.
#[derive(Debug, Clone)]
pub struct MassConditionCertificate {
    pub holds: bool,
    pub witness: Option<MassConditionWitness>,
    /// Smallest certified distance from any candidate `k pi` to any stage
    /// image boundary, minus the sampling margin.
    pub margin: f64,
    pub stages_checked: usize,
    pub boundary_samples: usize,
}

/// Checks that no iterated image of the disk under the partial compositions
/// `C_{lambda_s} o ... o C_{lambda_1}` covers a critical point `k pi`.
///
/// Stage images are certified by boundary sampling plus the argument
/// principle: the winding number of the sampled image curve about `k pi`
/// counts preimages in the disk. A derivative bound (`|d/dz lambda cos z| <=
/// |lambda| cosh(Im)`) converts the sample spacing into a reliable margin; if
/// a candidate falls inside the margin the sampling is refined 4x, and
/// certification gives up with `Inconclusive` rather than guessing.
pub fn mass_condition_check(
    center: Complex64,
    radius: f64,
    lambdas: &[Complex64],
    k_window: Option<i64>,
) -> Result<MassConditionCertificate> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("disk radius must be positive".into()));
    }
    for l in lambdas {
        if l.norm() == 0.0 {
            return Err(Error::InvalidInput("lambdas must be nonzero".into()));
        }
    }

    let mut margin_global = f64::INFINITY;

    // Stage 0 is the disk itself; exact.
    let k_lo = ((center.re - radius) / PI).floor() as i64 - 1;
    let k_hi = ((center.re + radius) / PI).ceil() as i64 + 1;
    for k in k_lo..=k_hi {
        if let Some(w) = k_window {
            if k.abs() > w {
                continue;
            }
        }
        let d = (Complex64::new(PI * k as f64, 0.0) - center).norm() - radius;
        if d <= 0.0 {
            return Ok(MassConditionCertificate {
                holds: false,
                witness: Some(MassConditionWitness { stage: 0, k }),
                margin: -d,
                stages_checked: 1,
                boundary_samples: 0,
            });
        }
        margin_global = margin_global.min(d);
    }

    let mut samples = 1024usize;
    let max_samples = 1024 * 64;
    'resample: loop {
        let mut boundary: Vec<Complex64> = (0..samples)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / samples as f64;
                center + Complex64::from_polar(radius, t)
            })
            .collect();
        // Lipschitz bound for d/dtheta of the composed boundary curve.
        let mut lipschitz = radius;
        let mut im_bound = center.im.abs() + radius;
        let mut margin_stages = f64::INFINITY;

        for (s, lambda) in lambdas.iter().enumerate() {
            let stage = s + 1;
            lipschitz *= lambda.norm() * im_bound.cosh();
            for z in boundary.iter_mut() {
                *z = lambda * z.cos();
            }
            // |lambda cos z| <= |lambda| cosh(Im z) bounds the whole image.
            im_bound = lambda.norm() * im_bound.cosh();

            let delta = lipschitz * std::f64::consts::TAU / samples as f64;
            let re_lo = boundary.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - delta;
            let re_hi = boundary.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) + delta;
            let im_lo = boundary.iter().map(|z| z.im).fold(f64::INFINITY, f64::min) - delta;
            let im_hi = boundary.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max) + delta;
            if im_lo > 0.0 || im_hi < 0.0 {
                // The image cannot reach the real axis, so no k pi inside;
                // certified by the margin to the axis.
                margin_stages = margin_stages.min(im_lo.max(-im_hi));
                continue;
            }
            let k_lo = (re_lo / PI).floor() as i64;
            let k_hi = (re_hi / PI).ceil() as i64;
            for k in k_lo..=k_hi {
                if let Some(w) = k_window {
                    if k.abs() > w {
                        // Told not to look this far; cannot certify.
                        return Err(Error::Inconclusive(format!(
                            "candidate k = {k} beyond the supplied window at stage {stage}"
                        )));
                    }
                }
                let x = Complex64::new(PI * k as f64, 0.0);
                if x.re < re_lo || x.re > re_hi {
                    continue;
                }
                let nearest =
                    boundary.iter().map(|z| (z - x).norm()).fold(f64::INFINITY, f64::min);
                if nearest <= delta {
                    if samples < max_samples {
                        samples *= 4;
                        continue 'resample;
                    }
                    return Err(Error::Inconclusive(format!(
                        "k pi = {x} within sampling margin {delta:.3e} of the stage-{stage} \
                         image boundary"
                    )));
                }
                let winding = winding_number(&boundary, x);
                if winding != 0 {
                    return Ok(MassConditionCertificate {
                        holds: false,
                        witness: Some(MassConditionWitness { stage, k }),
                        margin: nearest - delta,
                        stages_checked: stage + 1,
                        boundary_samples: samples,
                    });
                }
                margin_stages = margin_stages.min(nearest - delta);
            }
        }

        return Ok(MassConditionCertificate {
            holds: true,
            witness: None,
            margin: margin_global.min(margin_stages),
            stages_checked: lambdas.len() + 1,
            boundary_samples: samples,
        });
    }
}

fn winding_number(curve: &[Complex64], about: Complex64) -> i64 {
    let mut total = 0.0;
    for i in 0..curve.len() {
        let a = curve[i] - about;
        let b = curve[(i + 1) % curve.len()] - about;
        total += (b / a).arg();
    }
    (total / std::f64::consts::TAU).round() as i64
}

/// The modulus threshold `pi / ln(3 + 2 sqrt(2)) * k * e^{k d0}` used when
/// extracting annuli from an efficiency bound with `k` iterates and
/// Teichmueller step size `d0`.
pub fn modulus_bound(k: u32, d0: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if !(d0 >= 0.0) {
        return Err(Error::InvalidInput("d0 must be nonnegative".into()));
    }
    let base = PI / (3.0 + 2.0 * 2.0f64.sqrt()).ln();
    Ok(base * k as f64 * (k as f64 * d0).exp())
}
