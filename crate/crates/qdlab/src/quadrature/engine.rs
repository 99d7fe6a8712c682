//! Adaptive two-level tensor-Gauss integration over a set of patches.
//!
//! Each patch is a rectangle in its own parameter space (Cartesian, polar, or
//! log-polar about a center) with the Jacobian folded into the cell
//! evaluation. Cells whose coarse and refined estimates disagree are split.
//! Cell values never depend on the evaluation schedule; the final reduction
//! runs serially over cells sorted in a fixed spatial order with compensated
//! summation, so parallel runs reproduce the sequential result bit for bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::region::{classify_radial, Class, Rect, Region};

use super::gauss;
use super::{MassResult, QuadratureConfig};

/// Hard cap on live cells, independent of `max_depth`.
const MAX_CELLS: usize = 1 << 21;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Geometry {
    /// `z = u + i v`.
    Cartesian,
    /// `z = center + u e^{iv}`, Jacobian `u`.
    Polar { center: Complex64 },
    /// `z = center + e^u e^{iv}`, Jacobian `e^{2u}`.
    LogPolar { center: Complex64 },
}

impl Geometry {
    fn to_plane(&self, u: f64, v: f64) -> (Complex64, f64) {
        match self {
            Geometry::Cartesian => (Complex64::new(u, v), 1.0),
            Geometry::Polar { center } => {
                (center + Complex64::from_polar(u, v), u)
            }
            Geometry::LogPolar { center } => {
                let r = u.exp();
                (center + Complex64::from_polar(r, v), r * r)
            }
        }
    }

    /// Radial span of a parameter cell, when the geometry is radial.
    fn radial_span(&self, rect: &Rect) -> Option<(f64, f64)> {
        match self {
            Geometry::Cartesian => None,
            Geometry::Polar { .. } => Some((rect.x0.max(0.0), rect.x1)),
            Geometry::LogPolar { .. } => Some((rect.x0.exp(), rect.x1.exp())),
        }
    }

    fn center(&self) -> Option<Complex64> {
        match self {
            Geometry::Cartesian => None,
            Geometry::Polar { center } | Geometry::LogPolar { center } => Some(*center),
        }
    }

    /// Axis-aligned box in the plane containing the image of a parameter
    /// cell. Exact for sectors; identity for Cartesian cells.
    fn plane_bbox(&self, rect: &Rect) -> Rect {
        match self {
            Geometry::Cartesian => *rect,
            Geometry::Polar { center } | Geometry::LogPolar { center } => {
                let (r0, r1) = self.radial_span(rect).unwrap();
                sector_bbox(*center, r0, r1, rect.y0, rect.y1)
            }
        }
    }
}

fn sector_bbox(center: Complex64, r0: f64, r1: f64, t0: f64, t1: f64) -> Rect {
    let (cmin, cmax) = trig_range(t0, t1, f64::cos, 0.0);
    let (smin, smax) = trig_range(t0, t1, f64::sin, std::f64::consts::FRAC_PI_2);
    let xs = [r0 * cmin, r0 * cmax, r1 * cmin, r1 * cmax];
    let ys = [r0 * smin, r0 * smax, r1 * smin, r1 * smax];
    Rect::new(
        center.re + xs.iter().cloned().fold(f64::INFINITY, f64::min),
        center.re + xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        center.im + ys.iter().cloned().fold(f64::INFINITY, f64::min),
        center.im + ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Range of cos (phase 0) or sin (phase pi/2) over an angle interval.
fn trig_range(t0: f64, t1: f64, f: fn(f64) -> f64, phase: f64) -> (f64, f64) {
    use std::f64::consts::{PI, TAU};
    if t1 - t0 >= TAU {
        return (-1.0, 1.0);
    }
    let mut lo = f(t0).min(f(t1));
    let mut hi = f(t0).max(f(t1));
    // Maxima of the shifted cosine at phase + 2k pi, minima at phase + (2k+1) pi.
    let first_max = phase + TAU * ((t0 - phase) / TAU).ceil();
    if first_max <= t1 {
        hi = 1.0;
    }
    let first_min = phase + PI + TAU * ((t0 - phase - PI) / TAU).ceil();
    if first_min <= t1 {
        lo = -1.0;
    }
    (lo, hi)
}

/// Pointwise and per-cell membership filtering applied to a patch.
pub(crate) struct FilterSet<'a> {
    pub region: Option<&'a Region>,
    /// Rotation-invariant radial cross-section of `region` about the patch
    /// center, when one exists (computed at patch construction).
    pub region_profile: Option<Vec<(f64, f64)>>,
    /// Keep only `|z - c| <= r`.
    pub include_disk: Option<(Complex64, f64)>,
    /// Drop `|z - c| < r` for each entry.
    pub exclude_disks: Vec<(Complex64, f64)>,
    /// Keep only points inside this plane box.
    pub clip_box: Option<Rect>,
    /// Evaluate region membership at `1/z` instead of `z` (infinity chart).
    pub region_in_chart: bool,
}

impl<'a> FilterSet<'a> {
    pub fn plain(region: Option<&'a Region>) -> Self {
        FilterSet {
            region,
            region_profile: None,
            include_disk: None,
            exclude_disks: Vec::new(),
            clip_box: None,
            region_in_chart: false,
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        if let Some((c, r)) = self.include_disk {
            if (z - c).norm() > r {
                return false;
            }
        }
        for &(c, r) in &self.exclude_disks {
            if (z - c).norm() < r {
                return false;
            }
        }
        if let Some(b) = &self.clip_box {
            if z.re < b.x0 || z.re > b.x1 || z.im < b.y0 || z.im > b.y1 {
                return false;
            }
        }
        if let Some(region) = self.region {
            let at = if self.region_in_chart {
                if z.norm() == 0.0 {
                    return false;
                }
                z.inv()
            } else {
                z
            };
            if !region.contains(at) {
                return false;
            }
        }
        true
    }

    fn classify(&self, geom: &Geometry, rect: &Rect) -> Class {
        let mut class = Class::Inside;
        let bbox = geom.plane_bbox(rect);
        let span = geom.radial_span(rect);
        let center = geom.center();

        let mut merge = |c: Class| match c {
            Class::Outside => Some(Class::Outside),
            Class::Straddle => {
                class = Class::Straddle;
                None
            }
            Class::Inside => None,
        };

        if let Some((c, r)) = self.include_disk {
            let cls = if let (Some((r0, r1)), Some(pc)) = (span, center) {
                if (pc - c).norm() <= 1e-14 * (1.0 + r) {
                    classify_radial((r0, r1), &[(0.0, r)])
                } else {
                    bbox_vs_disk(&bbox, c, r)
                }
            } else {
                bbox_vs_disk(&bbox, c, r)
            };
            if let Some(out) = merge(cls) {
                return out;
            }
        }
        for &(c, r) in &self.exclude_disks {
            let inside_disk = if let (Some((r0, r1)), Some(pc)) = (span, center) {
                if (pc - c).norm() <= 1e-14 * (1.0 + r) {
                    classify_radial((r0, r1), &[(0.0, r)])
                } else {
                    bbox_vs_disk(&bbox, c, r)
                }
            } else {
                bbox_vs_disk(&bbox, c, r)
            };
            // The filter keeps what is OUTSIDE the disk.
            let cls = match inside_disk {
                Class::Inside => Class::Outside,
                Class::Outside => Class::Inside,
                Class::Straddle => Class::Straddle,
            };
            if let Some(out) = merge(cls) {
                return out;
            }
        }
        if let Some(b) = &self.clip_box {
            let cls = if bbox.x0 >= b.x0 && bbox.x1 <= b.x1 && bbox.y0 >= b.y0 && bbox.y1 <= b.y1 {
                Class::Inside
            } else if bbox.x1 < b.x0 || bbox.x0 > b.x1 || bbox.y1 < b.y0 || bbox.y0 > b.y1 {
                Class::Outside
            } else {
                Class::Straddle
            };
            if let Some(out) = merge(cls) {
                return out;
            }
        }
        if let Some(region) = self.region {
            let cls = if let (Some(profile), Some((r0, r1))) = (&self.region_profile, span) {
                let s = if self.region_in_chart {
                    // |w| in [r0, r1] corresponds to |z| in [1/r1, 1/r0].
                    (if r1 == 0.0 { f64::INFINITY } else { 1.0 / r1 },
                     if r0 == 0.0 { f64::INFINITY } else { 1.0 / r0 })
                } else {
                    (r0, r1)
                };
                classify_radial(s, profile)
            } else if self.region_in_chart {
                // No profile in the chart: fall back to pointwise tests.
                Class::Straddle
            } else {
                region.classify_box(&bbox)
            };
            if let Some(out) = merge(cls) {
                return out;
            }
        }
        class
    }
}

fn bbox_vs_disk(bbox: &Rect, c: Complex64, r: f64) -> Class {
    let dmin = bbox.dist_to(c);
    let dmax = bbox.max_dist_to(c);
    if dmax <= r {
        Class::Inside
    } else if dmin >= r {
        Class::Outside
    } else {
        Class::Straddle
    }
}

/// A parameter-space rectangle with an integrand.
pub(crate) struct Patch<'a> {
    pub geometry: Geometry,
    pub domain: Rect,
    pub density: &'a (dyn Fn(Complex64) -> f64 + Sync),
    pub filters: FilterSet<'a>,
    /// Initial subdivision of the domain.
    pub init: (usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct CellId {
    patch: u32,
    root: u32,
    depth: u8,
    path: u64,
}

impl CellId {
    fn sort_key(&self) -> (u32, u32, u64, u8) {
        // Pad the path so that cell order is a depth-first traversal.
        let padded = self.path << (2 * (28 - self.depth as u64));
        (self.patch, self.root, padded, self.depth)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    id: CellId,
    rect: Rect,
    value: f64,
    err: f64,
    must_split: bool,
}

fn tensor_gauss(
    patch: &Patch<'_>,
    rect: &Rect,
    order: usize,
    filtered: bool,
) -> f64 {
    let rule = gauss::rule(order);
    let hx = 0.5 * rect.width();
    let hy = 0.5 * rect.height();
    let (cx, cy) = rect.center();
    let mut sum = 0.0;
    for (i, &xi) in rule.nodes.iter().enumerate() {
        let u = cx + hx * xi;
        let wx = rule.weights[i];
        for (j, &yj) in rule.nodes.iter().enumerate() {
            let v = cy + hy * yj;
            let (z, jac) = patch.geometry.to_plane(u, v);
            if filtered && !patch.filters.contains(z) {
                continue;
            }
            let f = (patch.density)(z) * jac;
            sum += wx * rule.weights[j] * f;
        }
    }
    sum * hx * hy
}

fn eval_cell(patch: &Patch<'_>, id: CellId, rect: Rect, order: usize) -> Cell {
    let class = patch.filters.classify(&patch.geometry, &rect);
    if class == Class::Outside {
        return Cell { id, rect, value: 0.0, err: 0.0, must_split: false };
    }
    let filtered = class == Class::Straddle;
    let coarse = tensor_gauss(patch, &rect, order, filtered);
    let mut fine = 0.0;
    for child in split_rect(&rect) {
        fine += tensor_gauss(patch, &child, order, filtered);
    }
    if !coarse.is_finite() || !fine.is_finite() {
        return Cell { id, rect, value: 0.0, err: 0.0, must_split: true };
    }
    Cell { id, rect, value: fine, err: (fine - coarse).abs(), must_split: false }
}

fn split_rect(rect: &Rect) -> [Rect; 4] {
    let (cx, cy) = rect.center();
    [
        Rect::new(rect.x0, cx, rect.y0, cy),
        Rect::new(cx, rect.x1, rect.y0, cy),
        Rect::new(rect.x0, cx, cy, rect.y1),
        Rect::new(cx, rect.x1, cy, rect.y1),
    ]
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Runs the adaptive loop over all patches and returns the total.
pub(crate) fn integrate(patches: &[Patch<'_>], cfg: &QuadratureConfig) -> Result<MassResult> {
    let order = cfg.gauss_order.max(2);
    let mut cells_evaluated: usize = 0;

    // Initial cells: a fixed grid per patch.
    let mut seeds: Vec<(usize, CellId, Rect)> = Vec::new();
    for (pi, patch) in patches.iter().enumerate() {
        let (nx, ny) = patch.init;
        let (nx, ny) = (nx.max(1), ny.max(1));
        for iy in 0..ny {
            for ix in 0..nx {
                let root = (iy * nx + ix) as u32;
                let rect = Rect::new(
                    patch.domain.x0 + patch.domain.width() * ix as f64 / nx as f64,
                    patch.domain.x0 + patch.domain.width() * (ix + 1) as f64 / nx as f64,
                    patch.domain.y0 + patch.domain.height() * iy as f64 / ny as f64,
                    patch.domain.y0 + patch.domain.height() * (iy + 1) as f64 / ny as f64,
                );
                let id = CellId { patch: pi as u32, root, depth: 0, path: 0 };
                seeds.push((pi, id, rect));
            }
        }
    }

    let mut leaves: Vec<Cell> = par::map(&seeds, |&(pi, id, rect)| {
        eval_cell(&patches[pi], id, rect, order)
    });
    cells_evaluated += leaves.len();

    loop {
        leaves.sort_by(|a, b| a.id.sort_key().cmp(&b.id.sort_key()));
        let total = compensated_sum(leaves.iter().map(|c| c.value));
        let err_total = compensated_sum(leaves.iter().map(|c| c.err));
        let any_forced = leaves.iter().any(|c| c.must_split);
        let target = cfg.abs_floor.max(cfg.rel_tol * total.abs());

        if err_total <= target && !any_forced {
            return Ok(MassResult {
                value: total.max(0.0),
                error_estimate: err_total,
                cells_evaluated,
            });
        }

        let threshold = target / (2.0 * leaves.len() as f64);
        let mut retained: Vec<Cell> = Vec::with_capacity(leaves.len());
        let mut work: Vec<(usize, CellId, Rect)> = Vec::new();
        for cell in leaves.drain(..) {
            let wants_split = cell.must_split || cell.err > threshold;
            if wants_split && (cell.id.depth as u32) < cfg.max_depth {
                for (k, child) in split_rect(&cell.rect).into_iter().enumerate() {
                    let id = CellId {
                        patch: cell.id.patch,
                        root: cell.id.root,
                        depth: cell.id.depth + 1,
                        path: (cell.id.path << 2) | k as u64,
                    };
                    work.push((cell.id.patch as usize, id, child));
                }
            } else {
                if cell.must_split {
                    // Unresolvable singular sample at maximum depth.
                    return Err(Error::NoConvergence(format!(
                        "singular cell at depth {} cannot be refined",
                        cell.id.depth
                    )));
                }
                retained.push(cell);
            }
        }
        if work.is_empty() {
            return Err(Error::NoConvergence(format!(
                "error {err_total:.3e} above target {target:.3e} with all cells at max depth"
            )));
        }
        if retained.len() + work.len() > MAX_CELLS {
            return Err(Error::NoConvergence("cell budget exhausted".into()));
        }
        let new_cells: Vec<Cell> = par::map(&work, |&(pi, id, rect)| {
            eval_cell(&patches[pi], id, rect, order)
        });
        cells_evaluated += new_cells.len();
        leaves = retained;
        leaves.extend(new_cells);
    }
}
