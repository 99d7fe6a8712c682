//! Orbit portraits of postsingularly finite cosine maps.
//!
//! Both critical values share one forward orbit (the map is even), so a
//! portrait is just the preperiod and period of that merged orbit. The
//! postsingular set consists of the strictly precyclic tail from the first
//! critical value, the cycle, the mirror critical value, and infinity.

use crate::error::{Error, Result};

/// Preperiod/period data of the merged critical orbit. The preperiod is
/// measured from the critical point, so the step critical point -> first
/// critical value is counted; strict preperiodicity forces it to be at
/// least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitPortrait {
    pub preperiod: u32,
    pub period: u32,
}

impl OrbitPortrait {
    /// `|P_f| = preperiod + period + 1`.
    pub fn postsingular_size(&self) -> u32 {
        self.preperiod + self.period + 1
    }

    /// Lists the postsingular set symbolically: the orbit points
    /// `x_1, ..., x_{preperiod-1}`, the cycle points, the mirror critical
    /// value `y_1`, and `infinity`.
    pub fn enumerate_postsingular(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..self.preperiod {
            out.push(format!("x{i}"));
        }
        for j in 0..self.period {
            out.push(format!("c{j}"));
        }
        out.push("y1".to_string());
        out.push("inf".to_string());
        out
    }
}

/// Validates a portrait: strictly preperiodic critical values need
/// preperiod at least 2, and the cycle needs period at least 1.
pub fn validate_portrait(preperiod: u32, period: u32) -> Result<OrbitPortrait> {
    if preperiod < 2 {
        return Err(Error::NotStrictlyPreperiodic(preperiod));
    }
    if period < 1 {
        return Err(Error::BadPeriod(period));
    }
    Ok(OrbitPortrait { preperiod, period })
}

/// Dimension of the Teichmueller space modeled on the portrait:
/// `|P_f| - 3`.
pub fn teich_dimension(portrait: &OrbitPortrait) -> Result<u32> {
    let size = portrait.postsingular_size();
    if size <= 3 {
        return Err(Error::TooSmall(size));
    }
    Ok(size - 3)
}

/// Number of critical values inside the concentration disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalValuesInside {
    Zero,
    One,
    Two,
}

impl CriticalValuesInside {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::InvalidInput("at most two critical values exist".into())),
        }
    }
}

/// Outcome of the counting table for cos-symmetric poles concentrated in a
/// disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// The configuration forces more points of the postsingular set to merge
    /// than a postsingularly finite cosine map allows.
    Infeasible { reason: String },
    /// Below every unconditional threshold; deciding would need the
    /// stabilization hypothesis on the Teichmueller orbit, which is not
    /// modeled here.
    Indeterminate,
}

/// Decision table for a disk holding `sym_poles_in_disk` cos-symmetric poles
/// with the given number of critical values inside:
///
/// - six or more symmetric poles are always infeasible;
/// - four or more are infeasible when at most one critical value lies
///   inside.
pub fn counting_feasibility(
    sym_poles_in_disk: u32,
    crit_values_inside: CriticalValuesInside,
) -> Result<Feasibility> {
    if sym_poles_in_disk % 2 != 0 {
        return Err(Error::OddCount(sym_poles_in_disk));
    }
    if sym_poles_in_disk >= 6 {
        return Ok(Feasibility::Infeasible {
            reason: "at least six cos-symmetric poles map four non-critical-value \
                     postsingular points onto two"
                .into(),
        });
    }
    if sym_poles_in_disk >= 4 {
        match crit_values_inside {
            CriticalValuesInside::Zero => {
                return Ok(Feasibility::Infeasible {
                    reason: "four non-critical-value postsingular points map onto two".into(),
                })
            }
            CriticalValuesInside::One => {
                return Ok(Feasibility::Infeasible {
                    reason: "three non-critical-value postsingular points map onto two".into(),
                })
            }
            CriticalValuesInside::Two => {}
        }
    }
    Ok(Feasibility::Indeterminate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portrait_formulas() {
        let p = validate_portrait(2, 1).unwrap();
        assert_eq!(p.postsingular_size(), 4);
        assert_eq!(teich_dimension(&p).unwrap(), 1);

        let p = validate_portrait(3, 2).unwrap();
        assert_eq!(p.postsingular_size(), 6);

        let p = validate_portrait(2, 2).unwrap();
        assert_eq!(teich_dimension(&p).unwrap(), 2);
    }

    #[test]
    fn rejects_periodic_critical_values() {
        assert!(matches!(validate_portrait(1, 1), Err(Error::NotStrictlyPreperiodic(1))));
        assert!(matches!(validate_portrait(0, 3), Err(Error::NotStrictlyPreperiodic(0))));
        assert!(matches!(validate_portrait(2, 0), Err(Error::BadPeriod(0))));
    }

    #[test]
    fn dimension_guard() {
        // Not constructible through validate_portrait; the guard still
        // protects raw values.
        let p = OrbitPortrait { preperiod: 1, period: 1 };
        assert!(matches!(teich_dimension(&p), Err(Error::TooSmall(3))));
    }

    #[test]
    fn size_matches_enumeration() {
        for preperiod in 2..=10 {
            for period in 1..=10 {
                let p = validate_portrait(preperiod, period).unwrap();
                assert_eq!(
                    p.postsingular_size() as usize,
                    p.enumerate_postsingular().len(),
                    "preperiod {preperiod}, period {period}"
                );
                assert!(teich_dimension(&p).unwrap() >= 1);
            }
        }
    }

    #[test]
    fn counting_table() {
        use CriticalValuesInside::*;
        assert!(matches!(
            counting_feasibility(6, Two).unwrap(),
            Feasibility::Infeasible { .. }
        ));
        assert!(matches!(
            counting_feasibility(4, Zero).unwrap(),
            Feasibility::Infeasible { .. }
        ));
        assert!(matches!(
            counting_feasibility(4, One).unwrap(),
            Feasibility::Infeasible { .. }
        ));
        assert!(matches!(counting_feasibility(4, Two).unwrap(), Feasibility::Indeterminate));
        assert!(matches!(counting_feasibility(2, Two).unwrap(), Feasibility::Indeterminate));
        assert!(matches!(counting_feasibility(0, Zero).unwrap(), Feasibility::Indeterminate));
        assert!(matches!(counting_feasibility(3, Zero), Err(Error::OddCount(3))));
    }

    #[test]
    fn counting_table_is_monotone() {
        use CriticalValuesInside::*;
        // Raising the symmetric pole count never flips infeasible back to
        // indeterminate.
        for cv in [Zero, One, Two] {
            let mut seen_infeasible = false;
            for sym in (0..=10).step_by(2) {
                match counting_feasibility(sym, cv).unwrap() {
                    Feasibility::Infeasible { .. } => seen_infeasible = true,
                    Feasibility::Indeterminate => {
                        assert!(!seen_infeasible, "flip at sym={sym}");
                    }
                }
            }
        }
    }
}
