//! Measurable plane regions that masses are integrated over.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A region of the plane built from round pieces.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, r: f64, big_r: f64 },
    Plane,
    Complement(Box<Region>),
    Intersection(Box<Region>, Box<Region>),
    /// `0 <= Re z <= pi`, `|Im z| <= y`.
    HalfStrip { y: f64 },
}

/// Conservative classification of an axis-aligned box against a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Inside,
    Outside,
    Straddle,
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    /// Minimum distance from the rectangle to a point (0 if inside).
    pub fn dist_to(&self, p: Complex64) -> f64 {
        let dx = (self.x0 - p.re).max(0.0).max(p.re - self.x1);
        let dy = (self.y0 - p.im).max(0.0).max(p.im - self.y1);
        (dx * dx + dy * dy).sqrt()
    }

    /// Maximum distance from the rectangle to a point.
    pub fn max_dist_to(&self, p: Complex64) -> f64 {
        let dx = (p.re - self.x0).abs().max((p.re - self.x1).abs());
        let dy = (p.im - self.y0).abs().max((p.im - self.y1).abs());
        (dx * dx + dy * dy).sqrt()
    }
}

impl Region {
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("disk radius must be positive".into()));
        }
        Ok(Region::Disk { center, radius })
    }

    pub fn annulus(center: Complex64, r: f64, big_r: f64) -> Result<Self> {
        if !(0.0 <= r && r < big_r) {
            return Err(Error::BadRadii { r, big_r });
        }
        Ok(Region::Annulus { center, r, big_r })
    }

    pub fn half_strip(y: f64) -> Result<Self> {
        if !(y > 0.0) {
            return Err(Error::InvalidInput("strip height must be positive".into()));
        }
        Ok(Region::HalfStrip { y })
    }

    pub fn complement(inner: Region) -> Self {
        Region::Complement(Box::new(inner))
    }

    pub fn intersection(a: Region, b: Region) -> Self {
        Region::Intersection(Box::new(a), Box::new(b))
    }

    /// Closed membership: boundaries belong to the region.
    pub fn contains_closed(&self, z: Complex64) -> bool {
        match self {
            Region::Disk { center, radius } => (z - center).norm() <= *radius,
            Region::Annulus { center, r, big_r } => {
                let d = (z - center).norm();
                *r <= d && d <= *big_r
            }
            Region::Plane => true,
            Region::Complement(inner) => !inner.contains_open(z),
            Region::Intersection(a, b) => a.contains_closed(z) && b.contains_closed(z),
            Region::HalfStrip { y } => {
                0.0 <= z.re && z.re <= PI && z.im.abs() <= *y
            }
        }
    }

    /// Open membership: strict interior only.
    pub fn contains_open(&self, z: Complex64) -> bool {
        match self {
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::Annulus { center, r, big_r } => {
                let d = (z - center).norm();
                *r < d && d < *big_r
            }
            Region::Plane => true,
            Region::Complement(inner) => !inner.contains_closed(z),
            Region::Intersection(a, b) => a.contains_open(z) && b.contains_open(z),
            Region::HalfStrip { y } => 0.0 < z.re && z.re < PI && z.im.abs() < *y,
        }
    }

    /// Membership used by quadrature indicators (closed; the boundary has
    /// measure zero).
    pub fn contains(&self, z: Complex64) -> bool {
        self.contains_closed(z)
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Region::Disk { .. } | Region::Annulus { .. } | Region::HalfStrip { .. } => true,
            Region::Plane => false,
            Region::Complement(_) => false,
            Region::Intersection(a, b) => a.is_bounded() || b.is_bounded(),
        }
    }

    /// An enclosing disk for bounded regions (conservative).
    pub fn bounding_disk(&self) -> Option<(Complex64, f64)> {
        match self {
            Region::Disk { center, radius } => Some((*center, *radius)),
            Region::Annulus { center, big_r, .. } => Some((*center, *big_r)),
            Region::Plane | Region::Complement(_) => None,
            Region::Intersection(a, b) => match (a.bounding_disk(), b.bounding_disk()) {
                (Some(x), Some(y)) => Some(if x.1 <= y.1 { x } else { y }),
                (Some(x), None) => Some(x),
                (None, Some(y)) => Some(y),
                (None, None) => None,
            },
            Region::HalfStrip { y } => Some((
                Complex64::new(PI / 2.0, 0.0),
                (PI * PI / 4.0 + y * y).sqrt(),
            )),
        }
    }

    /// Classifies an axis-aligned box against the region.
    pub fn classify_box(&self, rect: &Rect) -> Class {
        match self {
            Region::Disk { center, radius } => {
                classify_box_vs_circle(rect, *center, *radius)
            }
            Region::Annulus { center, r, big_r } => {
                let dmin = rect.dist_to(*center);
                let dmax = rect.max_dist_to(*center);
                if dmin >= *r && dmax <= *big_r {
                    Class::Inside
                } else if dmax <= *r || dmin >= *big_r {
                    Class::Outside
                } else {
                    Class::Straddle
                }
            }
            Region::Plane => Class::Inside,
            Region::Complement(inner) => match inner.classify_box(rect) {
                Class::Inside => Class::Outside,
                Class::Outside => Class::Inside,
                Class::Straddle => Class::Straddle,
            },
            Region::Intersection(a, b) => match (a.classify_box(rect), b.classify_box(rect)) {
                (Class::Outside, _) | (_, Class::Outside) => Class::Outside,
                (Class::Inside, Class::Inside) => Class::Inside,
                _ => Class::Straddle,
            },
            Region::HalfStrip { y } => {
                if rect.x0 >= 0.0 && rect.x1 <= PI && rect.y0 >= -*y && rect.y1 <= *y {
                    Class::Inside
                } else if rect.x1 < 0.0 || rect.x0 > PI || rect.y1 < -*y || rect.y0 > *y {
                    Class::Outside
                } else {
                    Class::Straddle
                }
            }
        }
    }

    /// Radial cross-section of the region around `center`: the set
    /// `{ t >= 0 : center + t e^{i theta} in region for all theta }`, as a
    /// union of intervals, when the region is rotation invariant about that
    /// center. Lets polar cells be classified exactly by their radial span.
    pub fn radial_profile(&self, center: Complex64, tol: f64) -> Option<Vec<(f64, f64)>> {
        match self {
            Region::Disk { center: c, radius } => {
                ((c - center).norm() <= tol).then(|| vec![(0.0, *radius)])
            }
            Region::Annulus { center: c, r, big_r } => {
                ((c - center).norm() <= tol).then(|| vec![(*r, *big_r)])
            }
            Region::Plane => Some(vec![(0.0, f64::INFINITY)]),
            Region::Complement(inner) => {
                let inner_iv = inner.radial_profile(center, tol)?;
                Some(complement_intervals(&inner_iv))
            }
            Region::Intersection(a, b) => {
                let ia = a.radial_profile(center, tol)?;
                let ib = b.radial_profile(center, tol)?;
                Some(intersect_intervals(&ia, &ib))
            }
            Region::HalfStrip { .. } => None,
        }
    }
}

fn classify_box_vs_circle(rect: &Rect, center: Complex64, radius: f64) -> Class {
    let dmin = rect.dist_to(center);
    let dmax = rect.max_dist_to(center);
    if dmax <= radius {
        Class::Inside
    } else if dmin >= radius {
        Class::Outside
    } else {
        Class::Straddle
    }
}

fn complement_intervals(iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = 0.0_f64;
    for &(a, b) in iv {
        if a > lo {
            out.push((lo, a));
        }
        lo = lo.max(b);
    }
    if lo.is_finite() {
        out.push((lo, f64::INFINITY));
    }
    out
}

fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

/// Classifies a radial interval `[r0, r1]` against a union of intervals.
pub fn classify_radial(span: (f64, f64), profile: &[(f64, f64)]) -> Class {
    let (r0, r1) = span;
    for &(a, b) in profile {
        if a <= r0 && r1 <= b {
            return Class::Inside;
        }
    }
    let overlaps = profile.iter().any(|&(a, b)| r0 < b && a < r1);
    if overlaps {
        Class::Straddle
    } else {
        Class::Outside
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annulus_requires_ordered_radii() {
        assert!(Region::annulus(c(0.0, 0.0), 2.0, 2.0).is_err());
        assert!(Region::annulus(c(0.0, 0.0), 1.0, 3.0).is_ok());
    }

    #[test]
    fn closed_vs_open_membership() {
        let a = Region::annulus(c(0.0, 0.0), 1.0, 3.0).unwrap();
        assert!(a.contains_closed(c(1.0, 0.0)));
        assert!(!a.contains_open(c(1.0, 0.0)));
        assert!(a.contains_open(c(2.0, 0.0)));

        // The closure of a complement includes the shared boundary.
        let comp = Region::complement(Region::disk(c(0.0, 0.0), 1.0).unwrap());
        assert!(comp.contains_closed(c(1.0, 0.0)));
        assert!(!comp.contains_open(c(1.0, 0.0)));
        assert!(!comp.contains_closed(c(0.5, 0.0)));
    }

    #[test]
    fn box_classification() {
        let a = Region::annulus(c(0.0, 0.0), 1.0, 3.0).unwrap();
        assert_eq!(a.classify_box(&Rect::new(1.2, 1.6, 0.1, 0.4)), Class::Inside);
        assert_eq!(a.classify_box(&Rect::new(-0.2, 0.2, -0.2, 0.2)), Class::Outside);
        assert_eq!(a.classify_box(&Rect::new(0.8, 1.2, -0.1, 0.1)), Class::Straddle);
    }

    #[test]
    fn radial_profiles_compose() {
        let center = c(0.0, 0.0);
        let a = Region::annulus(center, 1.0, 3.0).unwrap();
        let p = a.radial_profile(center, 1e-12).unwrap();
        assert_eq!(p, vec![(1.0, 3.0)]);

        let comp = Region::complement(Region::disk(center, 2.0).unwrap());
        let p = comp.radial_profile(center, 1e-12).unwrap();
        assert_eq!(classify_radial((2.5, 3.0), &p), Class::Inside);
        assert_eq!(classify_radial((0.5, 1.0), &p), Class::Outside);
        assert_eq!(classify_radial((1.5, 2.5), &p), Class::Straddle);

        let inter = Region::intersection(
            Region::annulus(center, 1.0, 5.0).unwrap(),
            Region::complement(Region::disk(center, 2.0).unwrap()),
        );
        let p = inter.radial_profile(center, 1e-12).unwrap();
        assert_eq!(classify_radial((2.1, 4.9), &p), Class::Inside);
        assert_eq!(classify_radial((1.1, 1.9), &p), Class::Outside);

        // Off-center pieces have no rotation-invariant profile.
        let off = Region::disk(c(1.0, 0.0), 1.0).unwrap();
        assert!(off.radial_profile(center, 1e-12).is_none());
    }

    #[test]
    fn half_strip_membership() {
        let s = Region::half_strip(2.0).unwrap();
        assert!(s.contains(c(1.0, 1.5)));
        assert!(!s.contains(c(-0.1, 0.0)));
        assert!(!s.contains(c(1.0, 2.5)));
        assert!(s.is_bounded());
    }
}
