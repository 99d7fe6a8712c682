//! Static SVG diagnostics: a log-density heatmap on a fixed grid with the
//! zero/pole divisors overlaid.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use qdlab::{RationalQD, Region};

const GRID: usize = 160;
const SIZE: f64 = 640.0;

pub fn write_density_svg(path: &Path, q: &RationalQD, region: &Region) -> std::io::Result<()> {
    // Frame: region bounding disk if available, otherwise the divisor box.
    let (center, half) = match region.bounding_disk() {
        Some((c, r)) => (c, 1.2 * r),
        None => {
            let features: Vec<Complex64> = q
                .pole_locations()
                .into_iter()
                .chain(q.zero_locations())
                .collect();
            let reach = features.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
            (Complex64::new(0.0, 0.0), 1.5 * reach)
        }
    };
    let x0 = center.re - half;
    let y0 = center.im - half;
    let step = 2.0 * half / GRID as f64;
    let px = SIZE / GRID as f64;

    // Sample log10|q| at cell centers inside the region.
    let mut values = vec![f64::NAN; GRID * GRID];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for iy in 0..GRID {
        for ix in 0..GRID {
            let z = Complex64::new(
                x0 + (ix as f64 + 0.5) * step,
                y0 + (iy as f64 + 0.5) * step,
            );
            if !region.contains(z) {
                continue;
            }
            let v = q.abs_density(z);
            if v.is_finite() && v > 0.0 {
                let l = v.log10();
                values[iy * GRID + ix] = l;
                lo = lo.min(l);
                hi = hi.max(l);
            }
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    // Clamp the dynamic range so poles do not wash everything out.
    let hi = hi.min(lo + 12.0);

    let mut f = std::fs::File::create(path)?;
    writeln!(
        f,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(f, r##"<rect width="{SIZE}" height="{SIZE}" fill="#101018"/>"##)?;
    for iy in 0..GRID {
        for ix in 0..GRID {
            let v = values[iy * GRID + ix];
            if v.is_nan() {
                continue;
            }
            let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            let r = (255.0 * t) as u8;
            let g = (64.0 + 128.0 * t) as u8;
            let b = (255.0 * (1.0 - t)) as u8;
            // SVG y axis points down; flip so Im increases upward.
            let sy = SIZE - (iy as f64 + 1.0) * px;
            writeln!(
                f,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                ix as f64 * px,
                sy,
                px + 0.5,
                px + 0.5
            )?;
        }
    }
    let to_px = |z: Complex64| -> (f64, f64) {
        (
            (z.re - x0) / (2.0 * half) * SIZE,
            SIZE - (z.im - y0) / (2.0 * half) * SIZE,
        )
    };
    for p in q.pole_locations() {
        let (cx, cy) = to_px(p);
        writeln!(
            f,
            r#"<path d="M {} {} l 8 8 m -8 0 l 8 -8" stroke="white" stroke-width="2" fill="none"/>"#,
            cx - 4.0,
            cy - 4.0
        )?;
    }
    for z in q.zero_locations() {
        let (cx, cy) = to_px(z);
        writeln!(
            f,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" stroke="white" stroke-width="2" fill="none"/>"#
        )?;
    }
    writeln!(f, "</svg>")
}
