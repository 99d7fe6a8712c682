//! Direct images of quadratic differentials under cosine and low-degree
//! polynomials.
//!
//! For `w = cos z` the direct image of `q(z) dz^2` is
//!
//! ```text
//! cos_* q (w) = (1 / (1 - w^2)) * sum_k [ q(2 pi k + acos w) + q(2 pi k - acos w) ]
//! ```
//!
//! with the principal arccos branch (cuts along `(-inf, -1]` and `[1, inf)`).
//! Masses are computed two ways: the primary fundamental-strip change of
//! variables, which removes the `1/(1-w^2)` factor and makes cancellation in
//! the preimage sum explicit, and a secondary direct integration over the
//! w-plane; the two cross-validate each other.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::qd::{RationalQD, IDENTITY_TOL};
use crate::quadrature::{
    build_patches, integrate, MassProblem, MassResult, ProblemDomain, QuadratureConfig,
};
use crate::region::{Rect, Region};

/// The holomorphic cosine map `z -> lambda cos z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineMap {
    lambda: Complex64,
}

impl CosineMap {
    pub fn new(lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidInput("lambda must be nonzero".into()));
        }
        Ok(Self { lambda })
    }

    pub fn standard() -> Self {
        Self { lambda: Complex64::new(1.0, 0.0) }
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.lambda * z.cos()
    }

    /// `C_lambda = (z -> lambda z) o cos`, and affine push-forwards preserve
    /// L1 mass exactly, so the push-forward mass under any `C_lambda` equals
    /// the mass under plain cosine.
    pub fn pushforward_mass(
        &self,
        q: &RationalQD,
        cfg: &QuadratureConfig,
        policy: &TruncationPolicy,
    ) -> Result<MassResult> {
        cos_pushforward_mass(q, cfg, policy)
    }

    /// Density of `(C_lambda)_* q` at `w`: `(1/lambda^2) (cos_* q)(w / lambda)`.
    pub fn pushforward_density(
        &self,
        q: &RationalQD,
        w: Complex64,
        policy: &TruncationPolicy,
    ) -> Result<PushforwardDensity> {
        let inner = cos_pushforward_density(q, w / self.lambda, policy)?;
        let scale = (self.lambda * self.lambda).inv();
        Ok(PushforwardDensity {
            value: inner.value * scale,
            tail_bound: inner.tail_bound * scale.norm(),
            k_used: inner.k_used,
        })
    }
}

/// Truncation controls for the preimage sums.
#[derive(Debug, Clone)]
pub struct TruncationPolicy {
    /// Cap on the preimage index `|k|`; the effective cutoff is chosen
    /// adaptively from the decay bounds, up to this cap.
    pub k_max: usize,
    /// Height of the fundamental strip used for push-forward masses. Raised
    /// automatically when pole preimages sit higher.
    pub strip_y: f64,
    /// Absolute tolerance for truncation tails.
    pub tail_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { k_max: 64, strip_y: 20.0, tail_tol: 1e-6 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(Error::InvalidInput("k_max must be at least 1".into()));
        }
        if !(self.strip_y > 0.0) {
            return Err(Error::InvalidInput("strip_y must be positive".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::InvalidInput("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Preimages of a point under cosine within the truncation window.
#[derive(Debug, Clone)]
pub struct Preimages {
    pub points: Vec<Complex64>,
    /// Set at the critical values `w = ±1`, where the two preimage signs
    /// coincide and each point is reported once.
    pub degenerate: bool,
}

/// The preimage set `{ ±acos(w) + 2 pi k : |k| <= K }`.
pub fn cos_preimages(w: Complex64, k_window: usize) -> Preimages {
    let zeta = w.acos();
    let degenerate = zeta.norm() <= IDENTITY_TOL || (zeta - Complex64::new(PI, 0.0)).norm() <= IDENTITY_TOL;
    let mut points = Vec::new();
    for k in -(k_window as i64)..=(k_window as i64) {
        let shift = Complex64::new(TAU * k as f64, 0.0);
        points.push(shift + zeta);
        if !degenerate {
            points.push(shift - zeta);
        } else if zeta.norm() > IDENTITY_TOL {
            // zeta = pi: -pi + 2 pi k duplicates pi + 2 pi (k-1); keep the
            // one new point per period.
            if k == -(k_window as i64) {
                points.insert(0, shift - zeta);
            }
        }
    }
    points.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Preimages { points, degenerate }
}

/// Analytic decay data for a sphere-integrable differential: radius beyond
/// which the Laurent tail dominates, a cubic bound for `|q|`, and a quartic
/// bound for the even part (the odd part cancels exactly in the symmetrized
/// preimage sum).
#[derive(Debug, Clone, Copy)]
pub struct DecayBounds {
    pub r_q: f64,
    /// `|q(z)| <= c3 / |z|^3` for `|z| >= r_q`.
    pub c3: f64,
    /// `|q(z) + q(-z)| / 2 <= c4 / |z|^4` for `|z| >= r_q`.
    pub c4: f64,
}

impl DecayBounds {
    /// Bounds from the maximum on the circle `|z| = r_q` (exterior maximum
    /// principle), estimated by dense sampling with a safety factor.
    pub fn for_qd(q: &RationalQD) -> Result<Self> {
        if !q.is_sphere_integrable() {
            return Err(Error::NonIntegrable(
                "decay bounds require a sphere-integrable differential".into(),
            ));
        }
        let feat = q
            .pole_locations()
            .iter()
            .chain(q.zero_locations().iter())
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let r_q = (2.0f64).max(2.0 * feat);
        let samples = 512;
        let mut m3 = 0.0f64;
        let mut m4 = 0.0f64;
        for i in 0..samples {
            let t = TAU * i as f64 / samples as f64;
            let z = Complex64::from_polar(r_q, t);
            let a = q.eval_density_unchecked(z);
            let b = q.eval_density_unchecked(-z);
            m3 = m3.max(a.norm());
            m4 = m4.max(0.5 * (a + b).norm());
        }
        let safety = 1.5;
        Ok(Self {
            r_q,
            c3: safety * m3 * r_q.powi(3),
            c4: safety * m4 * r_q.powi(4),
        })
    }

    /// Bound on the `|k| > k` tail of the symmetrized preimage sum at a point
    /// with `|z| <= rho`.
    pub fn sym_tail(&self, k: usize, rho: f64) -> f64 {
        let x = TAU * k as f64 - rho;
        if x < self.r_q.max(1.0) {
            return f64::INFINITY;
        }
        // Even-part pairing gives quartic decay; the plain cubic bound is
        // kept as a fallback for safety.
        let quartic = 2.0 * self.c4 / (3.0 * PI) / (x * x * x);
        let cubic = self.c3 / PI / (x * x);
        quartic.min(cubic)
    }

    /// Smallest cutoff meeting `tol` at `rho`, up to `k_max`.
    pub fn choose_k(&self, rho: f64, tol: f64, k_max: usize) -> Result<usize> {
        let k = self.k_for(rho, tol, k_max);
        if self.sym_tail(k, rho) <= tol {
            Ok(k)
        } else {
            Err(Error::TailTooLarge { bound: self.sym_tail(k_max, rho), tol, k: k_max })
        }
    }

    /// Closed-form cutoff for `tol` at `rho`, clamped to `[1, cap]`.
    pub fn k_for(&self, rho: f64, tol: f64, cap: usize) -> usize {
        // Invert the quartic and cubic tails and take the better of the two.
        let x_quartic = (2.0 * self.c4 / (3.0 * PI * tol)).cbrt();
        let x_cubic = (self.c3 / (PI * tol)).sqrt();
        let x = x_quartic.min(x_cubic).max(self.r_q.max(1.0));
        let k = ((x + rho) / TAU).ceil() as usize + 1;
        k.clamp(1, cap)
    }
}

/// A push-forward density value with its truncation-tail bound.
#[derive(Debug, Clone, Copy)]
pub struct PushforwardDensity {
    pub value: Complex64,
    pub tail_bound: f64,
    pub k_used: usize,
}

/// Symmetrized preimage sum `sum_{|k| <= K} q(z + 2 pi k) + q(-z + 2 pi k)`
/// in fixed order.
fn strip_sum(q: &RationalQD, z: Complex64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -(k as i64)..=(k as i64) {
        let shift = Complex64::new(TAU * j as f64, 0.0);
        acc += q.eval_density_unchecked(shift + z) + q.eval_density_unchecked(shift - z);
    }
    acc
}

fn check_critical_value(w: Complex64) -> Result<()> {
    if (w - Complex64::new(1.0, 0.0)).norm() <= IDENTITY_TOL
        || (w + Complex64::new(1.0, 0.0)).norm() <= IDENTITY_TOL
    {
        return Err(Error::CriticalValue(format!("{w}")));
    }
    Ok(())
}

fn check_pole_image(q: &RationalQD, zeta: Complex64, k_eff: usize) -> Result<()> {
    for p in q.poles() {
        for base in [zeta, -zeta] {
            let k = ((p.location - base).re / TAU).round();
            if k.abs() as usize <= k_eff
                && (base + Complex64::new(TAU * k, 0.0) - p.location).norm() <= IDENTITY_TOL
            {
                return Err(Error::PoleImage(format!("{}", p.location)));
            }
        }
    }
    Ok(())
}

/// Density of `cos_* q` at `w`, truncation chosen adaptively under the
/// policy.
pub fn cos_pushforward_density(
    q: &RationalQD,
    w: Complex64,
    policy: &TruncationPolicy,
) -> Result<PushforwardDensity> {
    policy.validate()?;
    check_critical_value(w)?;
    if !q.is_sphere_integrable() {
        return Err(Error::NonIntegrable("push-forward needs a sphere-integrable q".into()));
    }
    let bounds = DecayBounds::for_qd(q)?;
    let zeta = w.acos();
    let k_eff = bounds.choose_k(zeta.norm(), policy.tail_tol, policy.k_max)?;
    check_pole_image(q, zeta, k_eff)?;
    let denom = Complex64::new(1.0, 0.0) - w * w;
    let sum = strip_sum(q, zeta, k_eff);
    Ok(PushforwardDensity {
        value: sum / denom,
        tail_bound: bounds.sym_tail(k_eff, zeta.norm()) / denom.norm(),
        k_used: k_eff,
    })
}

/// Density of `cos_* q` at `w` with a fixed truncation window, for
/// matched-truncation comparisons.
pub fn cos_pushforward_density_with_k(
    q: &RationalQD,
    w: Complex64,
    k: usize,
) -> Result<Complex64> {
    check_critical_value(w)?;
    let zeta = w.acos();
    check_pole_image(q, zeta, k)?;
    let denom = Complex64::new(1.0, 0.0) - w * w;
    Ok(strip_sum(q, zeta, k) / denom)
}

/// Folds a point into the fundamental half-strip `0 <= Re <= pi` using
/// `cos(z) = cos(±z + 2 pi k)`.
pub fn fold_to_strip(p: Complex64) -> Complex64 {
    let k = (p.re / TAU).round();
    let mut s = p - Complex64::new(TAU * k, 0.0);
    if s.re < 0.0 {
        s = -s;
    }
    s
}

/// Strip geometry shared by the push-forward mass integrals.
struct StripSetup {
    rect: Rect,
    folds: Vec<Complex64>,
    y_eff: f64,
}

fn strip_setup(q: &RationalQD, policy: &TruncationPolicy) -> StripSetup {
    let folds: Vec<Complex64> = q.pole_locations().iter().map(|&p| fold_to_strip(p)).collect();
    let max_im = folds.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    let y_eff = policy.strip_y.max(max_im + 12.0);
    StripSetup { rect: Rect::new(0.0, PI, -y_eff, y_eff), folds, y_eff }
}

/// Integrated bound on the `|k| > K` truncation error over the strip.
fn strip_k_tail(bounds: &DecayBounds, k: usize, y_eff: f64) -> f64 {
    let n = 64;
    let mut acc = 0.0;
    for i in 0..=n {
        let y = y_eff * i as f64 / n as f64;
        let rho = (PI * PI + y * y).sqrt();
        let t = bounds.sym_tail(k, rho);
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += weight * t;
    }
    // Both strip halves, Re width pi.
    2.0 * PI * acc * (y_eff / n as f64)
}

/// Empirical bound on the mass above `|Im z| = y`, using the measured edge
/// maximum and the exponential decay of the symmetrized sum in `Im z`.
fn strip_y_tail(integrand: &impl Fn(Complex64) -> f64, y_eff: f64) -> f64 {
    let n = 64;
    let mut m = 0.0f64;
    for i in 0..=n {
        let x = PI * i as f64 / n as f64;
        m = m.max(integrand(Complex64::new(x, y_eff)));
        m = m.max(integrand(Complex64::new(x, -y_eff)));
    }
    1.5 * TAU * m
}

/// `||cos_* q||` over the plane by the fundamental-strip change of
/// variables: every preimage of `w = cos z` shares `sin^2 = 1 - w^2`, so
///
/// ```text
/// ||cos_* q|| = int_{0 <= Re z <= pi} | sum_k q(z + 2 pi k) + q(-z + 2 pi k) | dA
/// ```
pub fn cos_pushforward_mass(
    q: &RationalQD,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<MassResult> {
    cos_pushforward_mass_hinted(q, cfg, policy, None)
}

/// Strip-method mass with a known scale for the result, which relaxes the
/// truncation budget from the absolute `tail_tol` to a fraction of the
/// relative quadrature target.
pub fn cos_pushforward_mass_hinted(
    q: &RationalQD,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
    mass_scale: Option<f64>,
) -> Result<MassResult> {
    cfg.validate()?;
    policy.validate()?;
    if !q.is_sphere_integrable() {
        return Err(Error::NonIntegrable("push-forward needs a sphere-integrable q".into()));
    }
    let bounds = DecayBounds::for_qd(q)?;
    let setup = strip_setup(q, policy);
    let rho_max = (PI * PI + setup.y_eff * setup.y_eff).sqrt();
    let tail_budget = match mass_scale {
        Some(s) => policy.tail_tol.max(0.25 * cfg.rel_tol * s.abs()),
        None => policy.tail_tol,
    };

    // Smallest cutoff whose integrated tail stays under the budget; fall
    // back to the cap and let the bound land in the error estimate.
    let mut k_eff = policy.k_max;
    for k in 1..=policy.k_max {
        if TAU * k as f64 - rho_max < bounds.r_q.max(1.0) {
            continue;
        }
        if strip_k_tail(&bounds, k, setup.y_eff) <= tail_budget {
            k_eff = k;
            break;
        }
    }
    let k_tail = strip_k_tail(&bounds, k_eff, setup.y_eff);

    let integrand = move |z: Complex64| strip_sum(q, z, k_eff).norm();
    let problem = MassProblem {
        density: &integrand,
        chart_density: None,
        singularities: setup.folds.clone(),
        soft_features: vec![],
        domain: ProblemDomain::Box(setup.rect),
        region: None,
    };
    let patches = build_patches(&problem, cfg);
    let mut result = integrate(&patches, cfg)?;
    let y_tail = strip_y_tail(&integrand, setup.y_eff);
    result.error_estimate += k_tail + y_tail;

    // Truncation is only fatal when it visibly degrades the result even
    // against the looser of the selection budget and the relative target.
    let acceptable = tail_budget.max(0.5 * cfg.rel_tol * result.value.max(1.0));
    if k_tail > acceptable {
        return Err(Error::TailTooLarge { bound: k_tail, tol: acceptable, k: k_eff });
    }
    Ok(result)
}

/// Secondary algorithm: integrates `|cos_* q|` directly over the w-plane,
/// with polar refinement at the critical values `±1`, at images of poles,
/// and through the inversion chart at infinity.
pub fn cos_pushforward_mass_wplane(
    q: &RationalQD,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<MassResult> {
    cfg.validate()?;
    policy.validate()?;
    if !q.is_sphere_integrable() {
        return Err(Error::NonIntegrable("push-forward needs a sphere-integrable q".into()));
    }
    let bounds = DecayBounds::for_qd(q)?;
    let k_cap = policy.k_max.max(64);
    let tol = policy.tail_tol;

    let density = move |w: Complex64| {
        let denom = (Complex64::new(1.0, 0.0) - w * w).norm();
        if denom == 0.0 {
            return f64::INFINITY;
        }
        let zeta = w.acos();
        let k_eff = bounds.k_for(zeta.norm(), tol, k_cap);
        strip_sum(q, zeta, k_eff).norm() / denom
    };
    let chart = move |v: Complex64| {
        let r = v.norm();
        if r == 0.0 {
            return f64::INFINITY;
        }
        density(v.inv()) / (r * r * r * r)
    };

    // Singular points: critical values and images of poles (cos-symmetric
    // pole pairs share an image; deduplicate).
    let mut singular = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    for p in q.pole_locations() {
        let w = p.cos();
        if singular.iter().all(|s| (s - w).norm() > 1e-9) {
            singular.push(w);
        }
    }

    let problem = MassProblem {
        density: &density,
        chart_density: Some(&chart),
        singularities: singular,
        soft_features: vec![],
        domain: ProblemDomain::Sphere,
        region: None,
    };
    let patches = build_patches(&problem, cfg);
    integrate(&patches, cfg)
}

/// Mass of the push-forward of `q` restricted to a bounded region: the strip
/// integrand keeps only preimages lying in the region. The preimage window
/// is exact (terms outside the region's bounding disk vanish), so there is
/// no truncation tail.
pub fn restricted_cos_pushforward_mass(
    q: &RationalQD,
    region: &Region,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<MassResult> {
    cfg.validate()?;
    policy.validate()?;
    let (b_center, b_radius) = region
        .bounding_disk()
        .ok_or_else(|| Error::InvalidInput("restricted push-forward needs a bounded region".into()))?;
    for p in q.poles() {
        if p.multiplicity >= 2 && region.contains_closed(p.location) {
            return Err(Error::NonIntegrable(format!(
                "pole of multiplicity {} at {} lies in the region",
                p.multiplicity, p.location
            )));
        }
    }

    let reach = b_center.norm() + b_radius;
    let y_eff = (b_center.im.abs() + b_radius + 0.5).min(policy.strip_y.max(reach + 0.5));
    let rect = Rect::new(0.0, PI, -y_eff, y_eff);
    let rho_max = (PI * PI + y_eff * y_eff).sqrt();
    let k_eff = ((reach + rho_max) / TAU).ceil() as usize + 1;

    let folds: Vec<Complex64> = q
        .pole_locations()
        .iter()
        .filter(|p| region.contains_closed(**p))
        .map(|&p| fold_to_strip(p))
        .collect();

    let integrand = move |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -(k_eff as i64)..=(k_eff as i64) {
            let shift = Complex64::new(TAU * j as f64, 0.0);
            for zz in [shift + z, shift - z] {
                if region.contains(zz) {
                    acc += q.eval_density_unchecked(zz);
                }
            }
        }
        acc.norm()
    };
    let problem = MassProblem {
        density: &integrand,
        chart_density: None,
        singularities: folds,
        soft_features: vec![],
        domain: ProblemDomain::Box(rect),
        region: None,
    };
    let patches = build_patches(&problem, cfg);
    integrate(&patches, cfg)
}

/// `||cos_* q|| / ||q||`, both over the plane.
pub fn efficiency_ratio(
    q: &RationalQD,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<f64> {
    Ok(efficiency_report(q, cfg, policy)?.ratio)
}

/// Efficiency ratio together with its ingredients and a combined relative
/// error estimate.
#[derive(Debug, Clone, Copy)]
pub struct EfficiencyReport {
    pub mass: MassResult,
    pub pushforward_mass: MassResult,
    pub ratio: f64,
    pub ratio_error: f64,
}

pub fn efficiency_report(
    q: &RationalQD,
    cfg: &QuadratureConfig,
    policy: &TruncationPolicy,
) -> Result<EfficiencyReport> {
    let mass = crate::quadrature::plane_mass(q, cfg)?;
    if mass.value <= cfg.abs_floor {
        return Err(Error::ZeroMass);
    }
    // The push-forward never exceeds the source mass, so the source mass is
    // a sound scale hint for the truncation budget.
    let push = cos_pushforward_mass_hinted(q, cfg, policy, Some(mass.value))?;
    let ratio = push.value / mass.value;
    let ratio_error =
        (push.error_estimate + ratio * mass.error_estimate) / mass.value;
    Ok(EfficiencyReport { mass, pushforward_mass: push, ratio, ratio_error })
}

/// Direct image under a polynomial of degree 1..=3:
/// `(Q_* q)(w) = sum_{Q(z) = w} q(z) / Q'(z)^2`.
pub fn poly_pushforward_density(
    poly: &Poly,
    q: &RationalQD,
    w: Complex64,
) -> Result<Complex64> {
    poly_pushforward_with(poly, w, |z| q.eval_density(z))
}

/// Generic direct image: the source density need not be rational (it may be
/// a cosine push-forward itself).
pub fn poly_pushforward_with<F>(poly: &Poly, w: Complex64, density: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let roots = poly.solve(w)?;
    let scale: f64 = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            if (a - b).norm() <= 1e-8 * scale {
                return Err(Error::CriticalValue(format!("{w}")));
            }
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for r in roots {
        let dq = poly.derivative_at(r);
        if dq.norm() <= 1e-12 * scale {
            return Err(Error::CriticalValue(format!("{w}")));
        }
        let val = density(r).map_err(|e| match e {
            Error::EvalAtPole(s) => Error::PoleImage(s),
            other => other,
        })?;
        acc += val / (dq * dq);
    }
    Ok(acc)
}

/// Push-forward under the quadratic cosine model `g(z) = 1 - z^2/2`:
/// `(g_* q)(w) = (q(s) + q(-s)) / (2 - 2w)` with `s = sqrt(2 - 2w)`.
pub fn quadratic_model_pushforward(q: &RationalQD, w: Complex64) -> Result<Complex64> {
    let denom = Complex64::new(2.0, 0.0) - 2.0 * w;
    if denom.norm() <= IDENTITY_TOL {
        return Err(Error::CriticalValue(format!("{w}")));
    }
    let s = denom.sqrt();
    let a = q.eval_density(s).map_err(|e| match e {
        Error::EvalAtPole(m) => Error::PoleImage(m),
        other => other,
    })?;
    let b = q.eval_density(-s).map_err(|e| match e {
        Error::EvalAtPole(m) => Error::PoleImage(m),
        other => other,
    })?;
    Ok((a + b) / denom)
}

/// Pointwise residual of the multiple-angle identity
/// `cos(a z) = Q_a(cos z)` for `a` in `{2, 3}`.
pub fn semiconjugacy_pointwise(a: u32, z: Complex64) -> Result<f64> {
    let poly = match a {
        2 => Poly::chebyshev2(),
        3 => Poly::chebyshev3(),
        _ => return Err(Error::InvalidInput("semiconjugacy degree must be 2 or 3".into())),
    };
    let lhs = (Complex64::new(a as f64, 0.0) * z).cos();
    let rhs = poly.eval(z.cos());
    Ok((lhs - rhs).norm())
}

/// Maximum scaled residual `|cos(az) - Q_a(cos z)| / max(1, e^{a |Im z|})`
/// over the samples.
pub fn semiconjugacy_residual(a: u32, samples: &[Complex64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in samples {
        let raw = semiconjugacy_pointwise(a, z)?;
        let scale = (a as f64 * z.im.abs()).exp().max(1.0);
        worst = worst.max(raw / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qd::DivisorPoint;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// dz^2 / (z (z-1) (z+1)): an odd density, so its cosine push-forward
    /// cancels identically.
    fn odd_three_pole() -> RationalQD {
        RationalQD::new(
            c(1.0, 0.0),
            vec![],
            vec![
                DivisorPoint::simple(c(0.0, 0.0)),
                DivisorPoint::simple(c(1.0, 0.0)),
                DivisorPoint::simple(c(-1.0, 0.0)),
            ],
        )
        .unwrap()
    }

    /// An asymmetric sphere-integrable testbed.
    fn three_pole() -> RationalQD {
        RationalQD::new(
            c(1.0, 0.0),
            vec![],
            vec![
                DivisorPoint::simple(c(0.2, 0.1)),
                DivisorPoint::simple(c(1.1, 0.0)),
                DivisorPoint::simple(c(-0.9, -0.3)),
            ],
        )
        .unwrap()
    }

    /// Density 1/z^3 as a divisor (pole of multiplicity 3 at 0). Only used
    /// where sphere integrability is not required.
    fn cube_pole() -> RationalQD {
        RationalQD::new(c(1.0, 0.0), vec![], vec![DivisorPoint::new(c(0.0, 0.0), 3)]).unwrap()
    }

    #[test]
    fn preimages_at_critical_value() {
        let pre = cos_preimages(c(1.0, 0.0), 1);
        assert!(pre.degenerate);
        let expect = [-TAU, 0.0, TAU];
        assert_eq!(pre.points.len(), 3);
        for (p, e) in pre.points.iter().zip(expect) {
            assert!((p - c(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn preimages_of_zero() {
        let pre = cos_preimages(c(0.0, 0.0), 0);
        assert!(!pre.degenerate);
        assert_eq!(pre.points.len(), 2);
        assert!((pre.points[0] - c(-PI / 2.0, 0.0)).norm() < 1e-12);
        assert!((pre.points[1] - c(PI / 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn preimages_round_trip() {
        let z0 = c(1.0, 1.0);
        let pre = cos_preimages(z0.cos(), 1);
        assert!(pre.points.iter().any(|p| (p - z0).norm() < 1e-12));
    }

    #[test]
    fn odd_density_cancels_at_zero() {
        // q = 1/z^3 has odd density: the ± pair at k = 0 cancels exactly.
        let q = cube_pole();
        let zeta = c(0.0, 0.0).acos();
        let sum = strip_sum(&q, zeta, 0);
        assert!(sum.norm() < 1e-14, "got {sum}");
    }

    #[test]
    fn density_matches_direct_preimage_sum() {
        // Independent oracle: sum q/sin^2 over the explicitly enumerated
        // preimages of w = 0.5 with K = 2 (10 points).
        let q = cube_pole();
        let w = c(0.5, 0.0);
        let direct: Complex64 = cos_preimages(w, 2)
            .points
            .iter()
            .map(|&z| q.eval_density_unchecked(z) / (z.sin() * z.sin()))
            .sum();
        let got = cos_pushforward_density_with_k(&q, w, 2).unwrap();
        assert!((got - direct).norm() < 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn density_rejects_critical_values() {
        let q = three_pole();
        assert!(matches!(
            cos_pushforward_density(&q, c(1.0, 0.0), &TruncationPolicy::default()),
            Err(Error::CriticalValue(_))
        ));
    }

    #[test]
    fn density_rejects_pole_images() {
        let q = three_pole();
        // w = cos(1.1): the preimage z = 1.1 is a pole of q.
        let w = c(1.1, 0.0).cos();
        assert!(matches!(
            cos_pushforward_density(&q, w, &TruncationPolicy::default()),
            Err(Error::PoleImage(_))
        ));
    }

    #[test]
    fn odd_density_pushforward_vanishes() {
        // Pairing k with -k sends z to -z, so an odd density cancels
        // completely in the preimage sum.
        let q = odd_three_pole();
        let cfg = QuadratureConfig::default();
        let policy = TruncationPolicy::default();
        let push = cos_pushforward_mass(&q, &cfg, &policy).unwrap();
        assert!(push.value <= 1e-9, "odd density should cancel, got {}", push.value);
    }

    #[test]
    fn strip_sum_matches_cotangent_closed_form() {
        // For simple poles with cubic decay, q = sum_j r_j/(z - p_j) and
        //   sum_k q(z + 2 pi k) = sum_j (r_j / 2) cot((z - p_j)/2),
        // giving an independent closed form for the symmetrized sum.
        let q = three_pole();
        let poles = q.pole_locations();
        let residue = |p: Complex64| {
            let mut den = Complex64::new(1.0, 0.0);
            for &other in &poles {
                if (other - p).norm() > 1e-12 {
                    den *= p - other;
                }
            }
            q.leading() / den
        };
        let closed = |z: Complex64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &p in &poles {
                let r = residue(p);
                acc += r / 2.0 * ((z - p) / 2.0).tan().inv();
                acc -= r / 2.0 * ((z + p) / 2.0).tan().inv();
            }
            acc
        };
        for z in [c(0.3, 0.4), c(2.0, -1.2), c(1.4, 3.0), c(0.01, 0.02)] {
            let truncated = strip_sum(&q, z, 4000);
            let exact = closed(z);
            assert!(
                (truncated - exact).norm() <= 1e-8 * exact.norm().max(1e-3),
                "at {z}: {truncated} vs {exact}"
            );
        }
    }

    #[test]
    fn pushforward_mass_never_increases() {
        let q = three_pole();
        let cfg = QuadratureConfig::default();
        let policy = TruncationPolicy::default();
        let mass = crate::quadrature::plane_mass(&q, &cfg).unwrap();
        let push = cos_pushforward_mass(&q, &cfg, &policy).unwrap();
        assert!(
            push.value <= mass.value + mass.error_estimate + push.error_estimate,
            "push {} vs mass {}",
            push.value,
            mass.value
        );
        // Strict loss is expected for rational differentials.
        assert!(push.value < mass.value);
    }

    #[test]
    fn pushforward_mass_scales_homogeneously() {
        let q = three_pole();
        let scaled = q.scaled(c(0.0, -2.5)).unwrap();
        let cfg = QuadratureConfig::default();
        let policy = TruncationPolicy::default();
        let a = cos_pushforward_mass(&q, &cfg, &policy).unwrap();
        let b = cos_pushforward_mass(&scaled, &cfg, &policy).unwrap();
        assert!(
            (b.value - 2.5 * a.value).abs() <= 2.0 * cfg.rel_tol * b.value.max(1.0),
            "scaled {} vs 2.5x {}",
            b.value,
            2.5 * a.value
        );
    }

    #[test]
    fn efficiency_ratio_is_scale_invariant() {
        let q = three_pole();
        let cfg = QuadratureConfig::default();
        let policy = TruncationPolicy::default();
        let r1 = efficiency_ratio(&q, &cfg, &policy).unwrap();
        let r2 = efficiency_ratio(&q.scaled(c(0.3, 0.1)).unwrap(), &cfg, &policy).unwrap();
        assert!(r1 > 0.0 && r1 < 1.0);
        assert!((r1 - r2).abs() <= 2.0 * cfg.rel_tol * r1.max(1.0));
    }

    #[test]
    fn restricted_mass_of_empty_region_is_zero() {
        let q = RationalQD::log_differential();
        let cfg = QuadratureConfig::default();
        let policy = TruncationPolicy::default();
        // Intersection of disjoint annuli is empty.
        let region = Region::intersection(
            Region::annulus(c(0.0, 0.0), 1.0, 2.0).unwrap(),
            Region::annulus(c(0.0, 0.0), 3.0, 4.0).unwrap(),
        );
        let got = restricted_cos_pushforward_mass(&q, &region, &cfg, &policy).unwrap();
        assert!(got.value <= 1e-10);
    }

    #[test]
    fn poly_pushforward_identity_returns_density() {
        let q = three_pole();
        let w = c(0.4, 0.3);
        let got = poly_pushforward_density(&Poly::identity(), &q, w).unwrap();
        let want = q.eval_density(w).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn poly_pushforward_closed_form_for_chebyshev2() {
        // Q = 2z^2-1, q = dz^2/z^2: both preimages contribute 1/(16 z^4),
        // and z^4 = ((w+1)/2)^2, so the sum is 1/(2 (w+1)^2).
        let q = RationalQD::log_differential();
        for w in [c(0.3, 0.2), c(-0.2, 1.0), c(2.0, -0.7)] {
            let got = poly_pushforward_density(&Poly::chebyshev2(), &q, w).unwrap();
            let want = (2.0 * (w + 1.0) * (w + 1.0)).inv();
            assert!((got - want).norm() < 1e-10 * want.norm(), "at {w}");
        }
        assert!(matches!(
            poly_pushforward_density(&Poly::chebyshev2(), &q, c(-1.0, 0.0)),
            Err(Error::CriticalValue(_))
        ));
    }

    #[test]
    fn quadratic_model_matches_poly_path() {
        let q = RationalQD::log_differential();
        // Even density: both terms agree, total 2/(2-2w)^2.
        for w in [c(0.3, 0.0), c(-1.5, 0.8), c(0.0, -2.0)] {
            let got = quadratic_model_pushforward(&q, w).unwrap();
            let denom = c(2.0, 0.0) - 2.0 * w;
            let want = 2.0 / (denom * denom);
            assert!((got - want).norm() < 1e-12 * want.norm(), "at {w}");
            let via_poly = poly_pushforward_density(&Poly::cosine_model(), &q, w).unwrap();
            assert!((got - via_poly).norm() < 1e-12 * got.norm());
        }
        assert!(matches!(
            quadratic_model_pushforward(&q, c(1.0, 0.0)),
            Err(Error::CriticalValue(_))
        ));
    }

    #[test]
    fn semiconjugacy_identities_hold() {
        let mut samples = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                samples.push(c(-10.0 + 20.0 * i as f64 / 39.0, -10.0 + 20.0 * j as f64 / 39.0));
            }
        }
        assert!(semiconjugacy_residual(2, &samples).unwrap() <= 1e-10);
        assert!(semiconjugacy_residual(3, &samples).unwrap() <= 1e-10);
        // Wrong identity fails loudly.
        let mismatch: f64 = samples
            .iter()
            .map(|&z| {
                let lhs = (2.0 * z).cos();
                let rhs = Poly::chebyshev3().eval(z.cos());
                (lhs - rhs).norm() / (2.0 * z.im.abs()).exp().max(1.0)
            })
            .fold(0.0, f64::max);
        assert!(mismatch > 1e-2);
    }

    #[test]
    fn lambda_conjugation_density() {
        let q = three_pole();
        let policy = TruncationPolicy::default();
        let lam = c(0.7, 0.4);
        let map = CosineMap::new(lam).unwrap();
        let w = c(0.9, 0.6);
        let got = map.pushforward_density(&q, w, &policy).unwrap();
        let base = cos_pushforward_density(&q, w / lam, &policy).unwrap();
        let want = base.value / (lam * lam);
        assert!((got.value - want).norm() < 1e-12 * want.norm());
    }
}
