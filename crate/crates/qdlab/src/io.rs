//! JSON interchange formats.
//!
//! Differentials: `{"leading":[re,im],"zeros":[{"z":[re,im],"mult":m},...],
//! "poles":[...]}`. Regions: tagged by `"type"`, e.g.
//! `{"type":"annulus","center":[0,0],"r":1.0,"R":3.0}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qd::{DivisorPoint, RationalQD};
use crate::region::Region;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorJson {
    pub z: [f64; 2],
    pub mult: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalQdJson {
    pub leading: [f64; 2],
    #[serde(default)]
    pub zeros: Vec<DivisorJson>,
    #[serde(default)]
    pub poles: Vec<DivisorJson>,
}

fn c(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl RationalQdJson {
    pub fn to_qd(&self) -> Result<RationalQD> {
        RationalQD::new(
            c(self.leading),
            self.zeros.iter().map(|d| DivisorPoint::new(c(d.z), d.mult)).collect(),
            self.poles.iter().map(|d| DivisorPoint::new(c(d.z), d.mult)).collect(),
        )
    }

    pub fn from_qd(q: &RationalQD) -> Self {
        Self {
            leading: pair(q.leading()),
            zeros: q
                .zeros()
                .iter()
                .map(|d| DivisorJson { z: pair(d.location), mult: d.multiplicity })
                .collect(),
            poles: q
                .poles()
                .iter()
                .map(|d| DivisorJson { z: pair(d.location), mult: d.multiplicity })
                .collect(),
        }
    }
}

pub fn qd_from_json(text: &str) -> Result<RationalQD> {
    let parsed: RationalQdJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("qd json: {e}")))?;
    parsed.to_qd()
}

pub fn qd_to_json(q: &RationalQD) -> String {
    serde_json::to_string(&RationalQdJson::from_qd(q)).expect("qd serialization cannot fail")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RegionJson {
    Disk {
        center: [f64; 2],
        r: f64,
    },
    Annulus {
        center: [f64; 2],
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    Plane,
    Complement {
        of: Box<RegionJson>,
    },
    Intersection {
        a: Box<RegionJson>,
        b: Box<RegionJson>,
    },
    Halfstrip {
        y: f64,
    },
}

impl RegionJson {
    pub fn to_region(&self) -> Result<Region> {
        Ok(match self {
            RegionJson::Disk { center, r } => Region::disk(c(*center), *r)?,
            RegionJson::Annulus { center, r, big_r } => Region::annulus(c(*center), *r, *big_r)?,
            RegionJson::Plane => Region::Plane,
            RegionJson::Complement { of } => Region::complement(of.to_region()?),
            RegionJson::Intersection { a, b } => {
                Region::intersection(a.to_region()?, b.to_region()?)
            }
            RegionJson::Halfstrip { y } => Region::half_strip(*y)?,
        })
    }

    pub fn from_region(region: &Region) -> Self {
        match region {
            Region::Disk { center, radius } => {
                RegionJson::Disk { center: pair(*center), r: *radius }
            }
            Region::Annulus { center, r, big_r } => {
                RegionJson::Annulus { center: pair(*center), r: *r, big_r: *big_r }
            }
            Region::Plane => RegionJson::Plane,
            Region::Complement(inner) => {
                RegionJson::Complement { of: Box::new(Self::from_region(inner)) }
            }
            Region::Intersection(a, b) => RegionJson::Intersection {
                a: Box::new(Self::from_region(a)),
                b: Box::new(Self::from_region(b)),
            },
            Region::HalfStrip { y } => RegionJson::Halfstrip { y: *y },
        }
    }
}

pub fn region_from_json(text: &str) -> Result<Region> {
    let parsed: RegionJson =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("region json: {e}")))?;
    parsed.to_region()
}

pub fn region_to_json(region: &Region) -> String {
    serde_json::to_string(&RegionJson::from_region(region)).expect("region serialization")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qd_round_trip() {
        let text = r#"{"leading":[1.0,0.0],
                       "zeros":[{"z":[0.0,1.0],"mult":1},{"z":[0.0,-1.0],"mult":1}],
                       "poles":[{"z":[0.5,0.0],"mult":1},{"z":[-0.5,0.0],"mult":1},
                                {"z":[1.5,0.0],"mult":1},{"z":[-1.5,0.0],"mult":1},
                                {"z":[1.0,0.0],"mult":1}]}"#;
        let q = qd_from_json(text).unwrap();
        assert_eq!(q.poles().len(), 5);
        let again = qd_from_json(&qd_to_json(&q)).unwrap();
        assert_eq!(q, again);
    }

    #[test]
    fn qd_rejects_invalid() {
        assert!(qd_from_json(r#"{"leading":[0.0,0.0],"zeros":[],"poles":[]}"#).is_err());
        assert!(qd_from_json("not json").is_err());
    }

    #[test]
    fn region_schema_matches_interface() {
        let r = region_from_json(r#"{"type":"annulus","center":[0,0],"r":1.0,"R":3.0}"#).unwrap();
        assert_eq!(
            r,
            Region::Annulus { center: Complex64::new(0.0, 0.0), r: 1.0, big_r: 3.0 }
        );
        let r = region_from_json(
            r#"{"type":"complement","of":{"type":"disk","center":[1,0],"r":2.0}}"#,
        )
        .unwrap();
        assert!(matches!(r, Region::Complement(_)));
        let r = region_from_json(
            r#"{"type":"intersection","a":{"type":"plane"},"b":{"type":"halfstrip","y":5.0}}"#,
        )
        .unwrap();
        assert!(matches!(r, Region::Intersection(_, _)));
    }

    #[test]
    fn region_round_trip() {
        let region = Region::intersection(
            Region::annulus(Complex64::new(0.0, 0.0), 1.0, 5.0).unwrap(),
            Region::complement(Region::disk(Complex64::new(1.0, 0.0), 2.0).unwrap()),
        );
        let again = region_from_json(&region_to_json(&region)).unwrap();
        assert_eq!(region, again);
    }
}
