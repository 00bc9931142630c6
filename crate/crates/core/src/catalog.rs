//! Box catalog and the six axis-aligned orientations.
//!
//! An orientation is named by the world axes that carry the longest, middle
//! and shortest box side, in that order: `yxz` puts the longest side along y.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed catalog: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid box {id}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("unknown orientation `{0}`")]
    UnknownOrientation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Primary,
    Golf,
    Hbox,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxType {
    pub id: String,
    /// Extents in mm, sorted descending.
    #[serde(rename = "dims_mm", with = "rational::serde_rational_vec")]
    pub dims: Vec<Rational>,
    pub max_count: u32,
    pub phase: Phase,
}

impl BoxType {
    /// Sorts `dims` descending and checks positivity.
    pub fn new(id: &str, dims: [Rational; 3], max_count: u32, phase: Phase) -> Result<Self, CatalogError> {
        let mut b = BoxType { id: id.to_string(), dims: dims.to_vec(), max_count, phase };
        b.normalize()?;
        Ok(b)
    }

    fn normalize(&mut self) -> Result<(), CatalogError> {
        let invalid = |reason: &str| CatalogError::Invalid { id: self.id.clone(), reason: reason.to_string() };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if self.dims.len() != 3 {
            return Err(invalid("dims_mm must have three entries"));
        }
        if self.dims.iter().any(|d| *d <= rational::int(0)) {
            return Err(invalid("dims must be positive"));
        }
        if self.max_count == 0 {
            return Err(invalid("max_count must be positive"));
        }
        self.dims.sort_by(|a, b| b.cmp(a));
        Ok(())
    }

    pub fn volume(&self) -> Rational {
        &self.dims[0] * &self.dims[1] * &self.dims[2]
    }

    /// Extents along world x, y, z.
    pub fn oriented_extents(&self, o: Orientation) -> [Rational; 3] {
        let mut ext = [rational::int(0), rational::int(0), rational::int(0)];
        for (rank, &axis) in o.axes().iter().enumerate() {
            ext[axis] = self.dims[rank].clone();
        }
        ext
    }

    /// Orientations with pairwise distinct extent triples, in canonical order.
    pub fn distinct_orientations(&self) -> Vec<Orientation> {
        let mut seen: Vec<[Rational; 3]> = Vec::new();
        let mut out = Vec::new();
        for o in Orientation::ALL {
            let e = self.oriented_extents(o);
            if !seen.contains(&e) {
                seen.push(e);
                out.push(o);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Zyx,
    Zxy,
    Yzx,
    Xzy,
    Yxz,
    Xyz,
}

impl Orientation {
    pub const ALL: [Orientation; 6] =
        [Orientation::Zyx, Orientation::Zxy, Orientation::Yzx, Orientation::Xzy, Orientation::Yxz, Orientation::Xyz];

    /// World axis carrying the longest, middle and shortest side.
    pub fn axes(self) -> [usize; 3] {
        match self {
            Orientation::Zyx => [2, 1, 0],
            Orientation::Zxy => [2, 0, 1],
            Orientation::Yzx => [1, 2, 0],
            Orientation::Xzy => [0, 2, 1],
            Orientation::Yxz => [1, 0, 2],
            Orientation::Xyz => [0, 1, 2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Zyx => "zyx",
            Orientation::Zxy => "zxy",
            Orientation::Yzx => "yzx",
            Orientation::Xzy => "xzy",
            Orientation::Yxz => "yxz",
            Orientation::Xyz => "xyz",
        }
    }

    pub fn index(self) -> usize {
        Orientation::ALL.iter().position(|&o| o == self).unwrap()
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Orientation {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Orientation::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| CatalogError::UnknownOrientation(s.to_string()))
    }
}

impl Serialize for Orientation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Orientation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The full A–H table.
pub fn builtin_catalog() -> Vec<BoxType> {
    let table: [(&str, [i64; 3], u32, Phase); 8] = [
        ("A", [229, 483, 610], 4, Phase::Primary),
        ("B", [165, 330, 457], 4, Phase::Primary),
        ("C", [229, 406, 660], 2, Phase::Primary),
        ("D", [216, 457, 533], 2, Phase::Primary),
        ("E", [203, 229, 381], 2, Phase::Primary),
        ("F", [178, 356, 533], 2, Phase::Primary),
        ("G", [1143, 204, 204], 2, Phase::Golf),
        ("H", [152, 114, 325], 20, Phase::Hbox),
    ];
    table
        .iter()
        .map(|(id, d, max, phase)| {
            BoxType::new(id, [rational::int(d[0]), rational::int(d[1]), rational::int(d[2])], *max, *phase)
                .expect("builtin table is valid")
        })
        .collect()
}

/// Boxes used by a default run: the primary phase only.
pub fn default_run_catalog() -> Vec<BoxType> {
    builtin_catalog().into_iter().filter(|b| b.phase == Phase::Primary).collect()
}

pub fn parse_catalog(json: &str) -> Result<Vec<BoxType>, CatalogError> {
    let mut boxes: Vec<BoxType> = serde_json::from_str(json)?;
    for b in &mut boxes {
        b.normalize()?;
    }
    let mut ids: Vec<&str> = boxes.iter().map(|b| b.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(CatalogError::Invalid { id: w[0].to_string(), reason: "duplicate id".into() });
    }
    Ok(boxes)
}

pub fn load_catalog(path: &Path) -> Result<Vec<BoxType>, CatalogError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
    parse_catalog(&text)
}
