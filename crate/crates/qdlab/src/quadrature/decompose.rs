//! Partition of the integration domain into feature-aligned patches.
//!
//! Singular points (simple poles, pushforward singularities) are organized
//! into a nesting of "territories": each tight cluster owns a disk, split
//! into a quadtree hub at the cluster's own scale, log-polar shells bridging
//! scale gaps, and linear polar caps around individual singular points. This
//! keeps every patch scale-homogeneous, so families with separations many
//! orders of magnitude apart still integrate within the depth budget.
//!
//! The alternative `QuadtreeChart` strategy skips the nesting and throws a
//! single quadtree at the bounded part plus the inversion chart: slower near
//! singularities but structurally independent, which makes it a useful
//! cross-check.

use num_complex::Complex64;

use crate::region::{Rect, Region};

use super::engine::{FilterSet, Geometry, Patch};
use super::{QuadratureConfig, Strategy};

/// Where the problem lives.
pub(crate) enum ProblemDomain {
    /// Whole plane plus the `w = 1/z` chart beyond `r_out`.
    Sphere,
    /// A fixed box (fundamental strip computations); no chart.
    Box(Rect),
}

/// Inputs for one mass integration.
pub(crate) struct MassProblem<'a> {
    /// `|density|` in plane coordinates.
    pub density: &'a (dyn Fn(Complex64) -> f64 + Sync),
    /// `|density(1/w)| / |w|^4`; required for `ProblemDomain::Sphere`.
    pub chart_density: Option<&'a (dyn Fn(Complex64) -> f64 + Sync)>,
    /// Integrable singular points needing polar treatment.
    pub singularities: Vec<Complex64>,
    /// Non-singular features (zeros) that only influence the chart radius.
    pub soft_features: Vec<Complex64>,
    pub domain: ProblemDomain,
    pub region: Option<&'a Region>,
}

const TAU: f64 = std::f64::consts::TAU;

/// Skip shells thinner than this radius ratio.
const MIN_SHELL_RATIO: f64 = 1.05;

struct Builder<'a> {
    problem: &'a MassProblem<'a>,
    cfg: &'a QuadratureConfig,
    patches: Vec<Patch<'a>>,
    clip_box: Option<Rect>,
}

/// Merges singular points closer than the resolvable scale; a pair of
/// simple poles at that distance acts as one singular center for any
/// attainable tolerance.
fn dedupe(points: &[Complex64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(points.len());
    for &p in points {
        if out.iter().all(|q| (q - p).norm() > 1e-13 * (1.0 + p.norm())) {
            out.push(p);
        }
    }
    out
}

pub(crate) fn build_patches<'a>(
    problem: &'a MassProblem<'a>,
    cfg: &'a QuadratureConfig,
) -> Vec<Patch<'a>> {
    let mut b = Builder {
        problem,
        cfg,
        patches: Vec::new(),
        clip_box: match problem.domain {
            ProblemDomain::Box(rect) => Some(rect),
            ProblemDomain::Sphere => None,
        },
    };
    match problem.domain {
        ProblemDomain::Sphere => b.build_sphere(),
        ProblemDomain::Box(rect) => b.build_box(rect),
    }
    b.patches
}

impl<'a> Builder<'a> {
    fn filters(&self, center_for_profile: Option<Complex64>) -> FilterSet<'a> {
        let mut f = FilterSet::plain(self.problem.region);
        f.clip_box = self.clip_box;
        if let (Some(c), Some(region)) = (center_for_profile, self.problem.region) {
            f.region_profile = region.radial_profile(c, 1e-12);
        }
        f
    }

    fn region_outer_radius(&self) -> Option<f64> {
        self.problem
            .region
            .and_then(|r| r.bounding_disk())
            .map(|(c, r)| c.norm() + r)
    }

    fn build_sphere(&mut self) {
        let feat_max = self
            .problem
            .singularities
            .iter()
            .chain(self.problem.soft_features.iter())
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let mut r_out = (2.0f64).max(3.0 * feat_max);
        let bounded = self.region_outer_radius();
        if let Some(rr) = bounded {
            r_out = r_out.max(1.5 * rr);
        }

        match self.cfg.strategy {
            Strategy::Multiscale => {
                let members = dedupe(&self.problem.singularities);
                if members.is_empty() {
                    self.push_quadtree(
                        Rect::new(-r_out, r_out, -r_out, r_out),
                        Some((Complex64::new(0.0, 0.0), r_out)),
                        &[],
                    );
                } else {
                    self.territory(&members, Complex64::new(0.0, 0.0), r_out);
                }
            }
            Strategy::QuadtreeChart => {
                self.push_quadtree(
                    Rect::new(-r_out, r_out, -r_out, r_out),
                    Some((Complex64::new(0.0, 0.0), r_out)),
                    &[],
                );
            }
        }

        // Exterior |z| > r_out through the inversion chart, unless the region
        // is bounded and already inside.
        if bounded.is_none() {
            let chart = self
                .problem
                .chart_density
                .expect("sphere-domain problems need a chart density");
            let origin = Complex64::new(0.0, 0.0);
            let profile = self.problem.region.and_then(|r| r.radial_profile(origin, 1e-12));
            // Clip the chart radius |w| <= 1/r_out against the inverted
            // region cross-section |w| in [1/b, 1/a].
            let segments: Vec<(f64, f64)> = match &profile {
                Some(iv) => {
                    let mut segs: Vec<(f64, f64)> = iv
                        .iter()
                        .filter_map(|&(a, b)| {
                            let lo = if b.is_finite() { 1.0 / b } else { 0.0 };
                            let hi = if a > 0.0 { (1.0 / a).min(1.0 / r_out) } else { 1.0 / r_out };
                            (hi > lo).then_some((lo, hi))
                        })
                        .collect();
                    segs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                    segs
                }
                None => vec![(0.0, 1.0 / r_out)],
            };
            for (lo, hi) in segments {
                let mut filters = FilterSet::plain(self.problem.region);
                filters.region_in_chart = true;
                filters.region_profile = profile.clone();
                self.patches.push(Patch {
                    geometry: Geometry::Polar { center: origin },
                    domain: Rect::new(lo, hi, 0.0, TAU),
                    density: chart,
                    filters,
                    init: (2, 4),
                });
            }
        }
    }

    fn build_box(&mut self, rect: Rect) {
        let members: Vec<Complex64> = dedupe(&self.problem.singularities)
            .into_iter()
            .filter(|z| {
                z.re >= rect.x0 - 0.5
                    && z.re <= rect.x1 + 0.5
                    && z.im >= rect.y0 - 0.5
                    && z.im <= rect.y1 + 0.5
            })
            .collect();
        if members.is_empty() || matches!(self.cfg.strategy, Strategy::QuadtreeChart) {
            self.push_box_grid(rect, &[]);
            return;
        }
        let diag = (rect.width().powi(2) + rect.height().powi(2)).sqrt();
        if members.len() == 1 {
            let alloc = (0.25 * rect.width().min(rect.height())).min(0.5);
            self.singleton(members[0], alloc);
            self.push_box_grid(rect, &[(members[0], alloc)]);
            return;
        }
        let g = centroid(&members);
        let spread = members.iter().map(|z| (z - g).norm()).fold(0.0f64, f64::max);
        if 2.5 * spread <= 0.35 * diag {
            // One compact cluster: give it a disk and exclude it from the
            // box quadtree.
            let alloc = 2.5 * spread;
            self.territory(&members, g, alloc);
            self.push_box_grid(rect, &[(g, alloc)]);
        } else {
            // Features spread across the box: carve a disk per unit.
            let units = split_units(&members);
            let geoms = unit_allocations(&members, &units);
            self.push_box_grid(rect, &geoms);
            for (u, (gu, au)) in units.iter().zip(&geoms) {
                self.territory(&members_of(&members, u), *gu, *au);
            }
        }
    }

    /// Quadtree over a square box with optional circular clip and exclusions.
    fn push_quadtree(
        &mut self,
        rect: Rect,
        include: Option<(Complex64, f64)>,
        exclude: &[(Complex64, f64)],
    ) {
        let mut filters = self.filters(include.map(|(c, _)| c));
        filters.include_disk = include;
        filters.exclude_disks = exclude.to_vec();
        self.patches.push(Patch {
            geometry: Geometry::Cartesian,
            domain: rect,
            density: self.problem.density,
            filters,
            init: (4, 4),
        });
    }

    /// Grid-initialized quadtree over a possibly elongated box.
    fn push_box_grid(&mut self, rect: Rect, exclude: &[(Complex64, f64)]) {
        let aspect = rect.height() / rect.width();
        let (nx, ny) = if aspect >= 1.0 {
            (2usize, (2.0 * aspect).round().max(2.0) as usize)
        } else {
            ((2.0 / aspect).round().max(2.0) as usize, 2usize)
        };
        let mut filters = self.filters(None);
        filters.exclude_disks = exclude.to_vec();
        self.patches.push(Patch {
            geometry: Geometry::Cartesian,
            domain: rect,
            density: self.problem.density,
            filters,
            init: (nx.min(64), ny.min(64)),
        });
    }

    /// Emits radial patches covering `r0 <= |z - center| <= r1`, clipped to
    /// the region's radial cross-section about `center` when one exists, so
    /// round region boundaries align with patch boundaries instead of being
    /// chased by the refinement loop.
    fn push_radial(&mut self, center: Complex64, r0: f64, r1: f64) {
        if !(r1 > r0) {
            return;
        }
        let segments: Vec<(f64, f64)> = match self
            .problem
            .region
            .and_then(|r| r.radial_profile(center, 1e-12))
        {
            Some(profile) => profile
                .iter()
                .filter_map(|&(a, b)| {
                    let lo = a.max(r0);
                    let hi = b.min(r1);
                    (hi > lo).then_some((lo, hi))
                })
                .collect(),
            None => vec![(r0, r1)],
        };
        for (lo, hi) in segments {
            if lo == 0.0 || hi / lo <= 8.0 {
                // Linear polar: handles the singular cap and thin bands.
                self.patches.push(Patch {
                    geometry: Geometry::Polar { center },
                    domain: Rect::new(lo, hi, 0.0, TAU),
                    density: self.problem.density,
                    filters: self.filters(Some(center)),
                    init: (2, 4),
                });
            } else {
                let span = (hi / lo).ln();
                self.patches.push(Patch {
                    geometry: Geometry::LogPolar { center },
                    domain: Rect::new(lo.ln(), hi.ln(), 0.0, TAU),
                    density: self.problem.density,
                    filters: self.filters(Some(center)),
                    init: (((span / 1.5).ceil() as usize).clamp(1, 64), 4),
                });
            }
        }
    }

    /// Shell bridging two scales about `center`.
    fn push_shell(&mut self, center: Complex64, r_in: f64, r_out: f64) {
        if r_out / r_in <= MIN_SHELL_RATIO {
            return;
        }
        self.push_radial(center, r_in, r_out);
    }

    /// Patches covering `disk(center, alloc)` for the given members.
    /// Invariant: all members lie within `alloc / 2.5` of `center`.
    fn territory(&mut self, members: &[Complex64], center: Complex64, alloc: f64) {
        if members.len() == 1 {
            let p = members[0];
            let off = (p - center).norm();
            if off <= 1e-9 * alloc {
                self.singleton(p, alloc);
            } else {
                // Lone singularity off the territory center: carve its own
                // cap out of a hub about the center.
                let sub = 0.4 * (alloc - off);
                let r_hub = (1.25 * (off + sub)).min(alloc);
                self.push_shell(center, r_hub, alloc);
                let hub_rect = Rect::new(
                    center.re - r_hub,
                    center.re + r_hub,
                    center.im - r_hub,
                    center.im + r_hub,
                );
                self.push_quadtree(hub_rect, Some((center, r_hub)), &[(p, sub)]);
                self.singleton(p, sub);
            }
            return;
        }

        let g = centroid(members);
        let spread = members.iter().map(|z| (z - g).norm()).fold(0.0f64, f64::max);
        if spread == 0.0 {
            // Coincident members (already deduplicated upstream; guard).
            self.territory(&members[..1], center, alloc);
            return;
        }
        let off = (g - center).norm();
        if 2.5 * spread <= 0.35 * alloc {
            // The whole cluster is small relative to its territory: bridge
            // the scale gap with one shell, then split inside.
            let sub_alloc = 2.5 * spread;
            let r_hub = (1.25 * (off + sub_alloc)).min(alloc);
            self.push_shell(center, r_hub, alloc);
            let hub_rect = Rect::new(
                center.re - r_hub,
                center.re + r_hub,
                center.im - r_hub,
                center.im + r_hub,
            );
            self.push_quadtree(hub_rect, Some((center, r_hub)), &[(g, sub_alloc)]);
            self.territory(members, g, sub_alloc);
            return;
        }

        let units = split_units(members);
        let unit_geoms = unit_allocations(members, &units);

        let r_hub = unit_geoms
            .iter()
            .map(|(gu, au)| (gu - center).norm() + au)
            .fold(0.0f64, f64::max)
            * 1.25;
        let r_hub = r_hub.min(alloc);

        self.push_shell(center, r_hub, alloc);
        let hub_rect = Rect::new(
            center.re - r_hub,
            center.re + r_hub,
            center.im - r_hub,
            center.im + r_hub,
        );
        self.push_quadtree(hub_rect, Some((center, r_hub)), &unit_geoms);

        for (u, (gu, au)) in units.iter().zip(&unit_geoms) {
            let sub = members_of(members, u);
            self.territory(&sub, *gu, *au);
        }
    }

    /// Polar cap plus a log shell around a single singular point.
    fn singleton(&mut self, p: Complex64, alloc: f64) {
        let nearest = self
            .problem
            .singularities
            .iter()
            .filter(|q| (*q - p).norm() > 0.0)
            .map(|q| (q - p).norm())
            .fold(f64::INFINITY, f64::min);
        let cap = if nearest.is_finite() {
            (self.cfg.pole_disk_factor * 0.5 * nearest).min(0.5)
        } else {
            0.5
        };
        let cap = cap.min(alloc);
        self.push_radial(p, 0.0, cap);
        self.push_shell(p, cap, alloc);
    }
}

/// Disk allocation per unit: short of halfway to the nearest foreign member,
/// which keeps unit disks pairwise disjoint.
fn unit_allocations(members: &[Complex64], units: &[Vec<usize>]) -> Vec<(Complex64, f64)> {
    units
        .iter()
        .map(|u| {
            let g = centroid(&members_of(members, u));
            let d_foreign = members
                .iter()
                .enumerate()
                .filter(|(i, _)| !u.contains(i))
                .map(|(_, m)| (m - g).norm())
                .fold(f64::INFINITY, f64::min);
            (g, 0.4 * d_foreign)
        })
        .collect()
}

fn centroid(pts: &[Complex64]) -> Complex64 {
    pts.iter().sum::<Complex64>() / pts.len() as f64
}

fn members_of(members: &[Complex64], unit: &[usize]) -> Vec<Complex64> {
    unit.iter().map(|&i| members[i]).collect()
}

/// Splits members into well-separated units: connected components at half the
/// top single-linkage merge distance. Components whose spread is comparable
/// to their separation are dissolved into singletons so that unit disks stay
/// disjoint.
fn split_units(members: &[Complex64]) -> Vec<Vec<usize>> {
    let n = members.len();
    debug_assert!(n >= 2);

    // Top merge distance = largest edge of the Euclidean MST (Prim).
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (members[j] - members[0]).norm();
    }
    let mut top = 0.0f64;
    for _ in 1..n {
        let (next, d) = best
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_tree[*i])
            .map(|(i, &d)| (i, d))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            .unwrap();
        top = top.max(d);
        in_tree[next] = true;
        for j in 0..n {
            if !in_tree[j] {
                best[j] = best[j].min((members[j] - members[next]).norm());
            }
        }
    }
    let tau = 0.5 * top;

    // Components at linkage tau (union-find).
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (members[i] - members[j]).norm() <= tau {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => comps[k].push(i),
            None => {
                roots.push(r);
                comps.push(vec![i]);
            }
        }
    }

    // Dissolution: a multi-member component survives as a unit only when it
    // is tight relative to its distance from everything else.
    let mut units: Vec<Vec<usize>> = Vec::new();
    for comp in comps {
        if comp.len() == 1 {
            units.push(comp);
            continue;
        }
        let pts = members_of(members, &comp);
        let g = centroid(&pts);
        let spread = pts.iter().map(|z| (z - g).norm()).fold(0.0f64, f64::max);
        let d_foreign = members
            .iter()
            .enumerate()
            .filter(|(i, _)| !comp.contains(i))
            .map(|(_, m)| (m - g).norm())
            .fold(f64::INFINITY, f64::min);
        if spread <= 0.16 * d_foreign {
            units.push(comp);
        } else {
            units.extend(comp.into_iter().map(|i| vec![i]));
        }
    }
    // Deterministic ordering for reproducible patch enumeration.
    units.sort_by(|a, b| a[0].cmp(&b[0]));
    units
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn split_pairs_symmetrically() {
        let members = [c(0.0, 0.0), c(1.0, 0.0)];
        let units = split_units(&members);
        assert_eq!(units, vec![vec![0], vec![1]]);
    }

    #[test]
    fn split_keeps_tight_cluster_whole() {
        // A pair at scale 1e-6 next to a far point: the pair is one unit.
        let members = [c(0.0, 0.0), c(1e-6, 0.0), c(1.0, 0.0)];
        let units = split_units(&members);
        assert_eq!(units.len(), 2);
        assert!(units.contains(&vec![0, 1]));
    }

    #[test]
    fn split_dissolves_uniform_chain() {
        let members = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let units = split_units(&members);
        assert_eq!(units.len(), 4);
    }
}
