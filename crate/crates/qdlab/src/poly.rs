//! Complex polynomials of degree at most three, with closed-form roots
//! polished by Newton steps.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polynomial with coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients; trailing zeros are
    /// trimmed. Degree must be between 1 and 3 for root solving.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn identity() -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)] }
    }

    /// `2 w^2 - 1`, the degree-2 cosine semiconjugacy polynomial.
    pub fn chebyshev2() -> Self {
        Self {
            coeffs: vec![
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(2.0, 0.0),
            ],
        }
    }

    /// `4 w^3 - 3 w`, the degree-3 cosine semiconjugacy polynomial.
    pub fn chebyshev3() -> Self {
        Self {
            coeffs: vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(-3.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(4.0, 0.0),
            ],
        }
    }

    /// `1 - z^2/2`, the quadratic model of cosine at the origin.
    pub fn cosine_model() -> Self {
        Self {
            coeffs: vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * k as f64;
        }
        acc
    }

    /// All solutions of `P(z) = w`, with multiplicity, for degree 1..=3.
    pub fn solve(&self, w: Complex64) -> Result<Vec<Complex64>> {
        let mut shifted = self.coeffs.clone();
        shifted[0] -= w;
        let mut roots = match self.degree() {
            1 => vec![-shifted[0] / shifted[1]],
            2 => solve_quadratic(shifted[2], shifted[1], shifted[0]),
            3 => solve_cubic(shifted[3], shifted[2], shifted[1], shifted[0]),
            d => {
                return Err(Error::InvalidInput(format!(
                    "root solving supports degree 1..=3, got {d}"
                )))
            }
        };
        // Newton polish against the original polynomial.
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let f = self.eval(*r) - w;
                let df = self.derivative_at(*r);
                if df.norm() < 1e-300 {
                    break;
                }
                *r -= f / df;
            }
        }
        Ok(roots)
    }
}

fn solve_quadratic(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * a * c;
    let mut s = disc.sqrt();
    // Pick the sign that avoids cancellation in -b - s.
    if (b.conj() * s).re < 0.0 {
        s = -s;
    }
    let big = -(b + s) / 2.0;
    if big.norm() == 0.0 {
        // b = 0 and disc = 0: double root at 0 (after normalization).
        return vec![-b / (2.0 * a), -b / (2.0 * a)];
    }
    vec![big / a, c / big]
}

fn solve_cubic(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Vec<Complex64> {
    // Monic: z^3 + p z^2 + q z + r, then depress with z = t - p/3.
    let p = b / a;
    let q = c / a;
    let r = d / a;
    let shift = p / 3.0;
    let aa = q - p * p / 3.0;
    let bb = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;

    let half_b = bb / 2.0;
    let disc = half_b * half_b + (aa / 3.0).powu(3);
    let mut s = disc.sqrt();
    if (half_b.conj() * s).re < 0.0 {
        s = -s;
    }
    let u = (-half_b - s).cbrt();
    let omega = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut roots = Vec::with_capacity(3);
    if u.norm() < 1e-150 {
        // aa ~ 0 and bb ~ 0: triple root of the depressed cubic.
        let t = (-bb).cbrt();
        for j in 0..3 {
            roots.push(t * omega.powu(j) - shift);
        }
    } else {
        let v = -aa / (3.0 * u);
        for j in 0..3 {
            let w1 = omega.powu(j);
            roots.push(u * w1 + v / w1 - shift);
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        let p = Poly::chebyshev2(); // 2w^2 - 1
        let roots = p.solve(c(0.0, 0.0)).unwrap();
        for r in &roots {
            assert!((p.eval(*r)).norm() < 1e-12);
        }
        assert!((roots[0] + roots[1]).norm() < 1e-12);
    }

    #[test]
    fn cubic_roots_reconstruct() {
        let p = Poly::new(vec![c(1.0, -2.0), c(0.3, 0.4), c(-1.0, 0.2), c(0.5, 0.7)]).unwrap();
        let w = c(0.2, -0.9);
        let roots = p.solve(w).unwrap();
        assert_eq!(roots.len(), 3);
        for r in &roots {
            assert!((p.eval(*r) - w).norm() < 1e-9, "residual {}", (p.eval(*r) - w).norm());
        }
    }

    #[test]
    fn chebyshev_roots_are_cosines() {
        // 4v^3 - 3v = cos(theta) has solutions v = cos((theta + 2 pi j)/3).
        let p = Poly::chebyshev3();
        let theta = 0.77f64;
        let w = c(theta.cos(), 0.0);
        let mut roots = p.solve(w).unwrap();
        roots.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        let mut expect: Vec<f64> =
            (0..3).map(|j| ((theta + std::f64::consts::TAU * j as f64) / 3.0).cos()).collect();
        expect.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (r, e) in roots.iter().zip(expect) {
            assert!((r.re - e).abs() < 1e-10 && r.im.abs() < 1e-10);
        }
    }

    #[test]
    fn triple_root_cubic() {
        // (z - 1)^3 = z^3 - 3z^2 + 3z - 1
        let p = Poly::new(vec![c(-1.0, 0.0), c(3.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).unwrap();
        let roots = p.solve(c(0.0, 0.0)).unwrap();
        for r in roots {
            assert!((r - c(1.0, 0.0)).norm() < 1e-5);
        }
    }
}
