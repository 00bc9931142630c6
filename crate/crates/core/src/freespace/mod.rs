//! Feasible regions of box centers: a convex hull minus convex obstacles.
//!
//! An obstacle is stored clipped to the hull together with its *separating*
//! facets: the obstacle's own halfspaces whose boundary touches the clipped
//! polytope. Halfspaces that contain the clipped polytope strictly are
//! dropped, and hull-only clipping planes are never added. A center is
//! forbidden when it strictly satisfies all separating facets of some
//! obstacle.

mod report;
mod sample;
mod trunk;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{BoxType, Orientation};
use crate::geometry::{
    axis_extents, convex_hull, intersect_halfspaces, minkowski_sum_points, polytopes_touch, Clip, ConvexPolytope,
    Halfspace, Point3,
};
use crate::rational::{self, Rational};

pub use report::{format_volume_dm3, region_report, region_report_csv, region_report_text, RegionRow};
pub use sample::{
    monte_carlo_volume, soundness_check, RegionClassifier, SoundnessReport, VolumeEstimate, DEFAULT_MC_SAMPLES,
    DEFAULT_MC_SEED,
};
pub use trunk::{parse_ascii_stl, write_ascii_stl, LoadedTrunk, TrunkFormat, TrunkModel};

/// Per-axis relaxation applied to tight-fit hulls that erode to a flat set.
pub fn fatten_epsilon() -> Rational {
    rational::ratio(1, 1024)
}

#[derive(Debug, Error)]
pub enum FreespaceError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed trunk: {0}")]
    MalformedTrunk(String),
    #[error("degenerate trunk: {0}")]
    DegenerateTrunk(String),
    #[error("malformed region file: {0}")]
    MalformedRegion(String),
}

/// A forbidden set of centers, clipped to its region's hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obstacle {
    pub id: usize,
    polytope: ConvexPolytope,
    facets: Vec<Halfspace>,
}

impl Obstacle {
    /// Obstacle from a polytope inside the hull. Its halfspaces that contain
    /// the whole hull are implied and dropped, so their boundary points are
    /// forbidden as well.
    pub fn from_clipped(id: usize, polytope: ConvexPolytope, hull: &ConvexPolytope) -> Self {
        let facets = polytope
            .halfspaces()
            .iter()
            .filter(|h| hull.vertices().iter().any(|v| !h.contains(v)))
            .cloned()
            .collect();
        Obstacle { id, polytope, facets }
    }

    /// Clips `{ x : halfspaces }` to the hull; `None` unless the result is solid.
    /// Halfspaces whose plane touches the clipped polytope become the facets.
    pub fn clip(id: usize, halfspaces: &[Halfspace], hull: &ConvexPolytope) -> Option<Self> {
        let polytope = intersect_halfspaces(halfspaces, hull).solid()?;
        let mut facets: Vec<Halfspace> = halfspaces
            .iter()
            .filter(|h| polytope.vertices().iter().any(|v| h.on_boundary(v)))
            .cloned()
            .collect();
        facets.sort();
        facets.dedup();
        Some(Obstacle { id, polytope, facets })
    }

    pub fn polytope(&self) -> &ConvexPolytope {
        &self.polytope
    }

    /// Separating facets, sorted canonically.
    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    /// True when the obstacle fills the whole hull.
    pub fn covers_hull(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains_strictly(&self, p: &Point3) -> bool {
        self.facets.iter().all(|h| h.contains_strictly(p))
    }

    pub fn volume(&self) -> Rational {
        self.polytope.volume()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleRegion {
    pub box_id: String,
    pub orientation: Orientation,
    /// Oriented box extents along x, y, z.
    pub extents: [Rational; 3],
    /// Extents used for erosion; smaller than `extents` on fattened axes.
    pub fit_extents: [Rational; 3],
    pub fattened: bool,
    pub hull: ConvexPolytope,
    pub obstacles: Vec<Obstacle>,
    pub volume: Option<VolumeEstimate>,
}

impl FeasibleRegion {
    pub fn facet_count(&self) -> usize {
        self.hull.halfspaces().len() + self.obstacles.iter().map(|o| o.facets().len()).sum::<usize>()
    }

    /// Exact membership: in the hull and strictly inside no obstacle.
    pub fn is_free(&self, c: &Point3) -> bool {
        self.hull.contains(c) && !self.obstacles.iter().any(|o| o.contains_strictly(c))
    }

    pub fn key(&self) -> String {
        format!("{}_{}", self.box_id, self.orientation)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RegionFile::from(self)).expect("region serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FreespaceError> {
        let file: RegionFile =
            serde_json::from_str(text).map_err(|e| FreespaceError::MalformedRegion(e.to_string()))?;
        file.try_into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// The box does not fit into the trunk's convex hull.
    HullEmpty,
    /// A single obstacle covers the whole hull.
    Covered,
    /// The coverage probe found no free sample.
    NoFreeSamples,
}

#[derive(Clone, Debug)]
pub enum RegionOutcome {
    Region(Box<FeasibleRegion>),
    Empty(EmptyReason),
}

impl RegionOutcome {
    pub fn region(self) -> Option<FeasibleRegion> {
        match self {
            RegionOutcome::Region(r) => Some(*r),
            RegionOutcome::Empty(_) => None,
        }
    }
}

/// Origin-centered box with the given full extents; symmetric under negation.
pub fn inverted_box(extents: &[Rational; 3]) -> ConvexPolytope {
    ConvexPolytope::centered_box(extents).expect("box extents are positive")
}

fn eroded_halfspaces(outer: &ConvexPolytope, b: &ConvexPolytope) -> Vec<Halfspace> {
    outer
        .halfspaces()
        .iter()
        .map(|h| Halfspace {
            normal: h.normal.clone(),
            offset: &h.offset - b.support(&h.normal).expect("facet normals are nonzero"),
        })
        .collect()
}

/// `{ c : c + b ⊆ outer }` for an origin-centered `b`; `None` when empty or flat.
pub fn erode_hull(outer: &ConvexPolytope, b: &ConvexPolytope) -> Option<ConvexPolytope> {
    intersect_halfspaces(&eroded_halfspaces(outer, b), outer).solid()
}

/// Erosion that relaxes flat results by shrinking the box on its deficient axes.
fn erode_with_fattening(outer: &ConvexPolytope, extents: &[Rational; 3]) -> Option<(ConvexPolytope, [Rational; 3])> {
    let hs = eroded_halfspaces(outer, &inverted_box(extents));
    match intersect_halfspaces(&hs, outer) {
        Clip::Solid(p) => return Some((p, extents.clone())),
        Clip::Empty => return None,
        Clip::Flat => {}
    }
    let ranges = axis_extents(&hs, outer)?;
    let eps2 = fatten_epsilon() * rational::int(2);
    let shrink = |axes: &[usize]| {
        let mut e = extents.clone();
        for &k in axes {
            e[k] = &e[k] - &eps2;
        }
        e
    };
    let deficient: Vec<usize> = (0..3).filter(|&k| ranges[k].0 == ranges[k].1).collect();
    let mut attempts = Vec::new();
    if !deficient.is_empty() && deficient.len() < 3 {
        attempts.push(shrink(&deficient));
    }
    attempts.push(shrink(&[0, 1, 2]));
    for fit in attempts {
        if fit.iter().any(|e| *e <= rational::int(0)) {
            continue;
        }
        if let Some(p) = erode_hull(outer, &inverted_box(&fit)) {
            return Some((p, fit));
        }
    }
    None
}

impl TrunkModel {
    /// Convex outer bound: the shell, or the hull of all mesh vertices.
    pub fn outer_polytope(&self) -> Result<ConvexPolytope, FreespaceError> {
        match self {
            TrunkModel::ConvexDecomposed { shell, .. } => Ok(shell.clone()),
            TrunkModel::Mesh { triangles, .. } => {
                let pts: Vec<Point3> = triangles.iter().flat_map(|t| t.vertices()).cloned().collect();
                convex_hull(&pts).map_err(|e| FreespaceError::DegenerateTrunk(e.to_string()))
            }
        }
    }

    /// Convex pieces whose Minkowski sums with the box become obstacles.
    fn obstacle_sources(&self) -> Vec<Vec<Point3>> {
        match self {
            TrunkModel::ConvexDecomposed { cavities, .. } => cavities.iter().map(|c| c.vertices().to_vec()).collect(),
            TrunkModel::Mesh { triangles, .. } => {
                triangles.iter().map(|t| vec![t.a.clone(), t.b.clone(), t.c.clone()]).collect()
            }
        }
    }
}

fn bbox_overlap(a: &(Point3, Point3), b: &(Point3, Point3)) -> bool {
    (0..3).all(|k| a.0[k] <= b.1[k] && b.0[k] <= a.1[k])
}

/// Hull and clipped obstacles for one box orientation. No volume estimate yet.
pub fn compute_feasible_region(
    trunk: &TrunkModel,
    outer: &ConvexPolytope,
    box_type: &BoxType,
    orientation: Orientation,
) -> RegionOutcome {
    let extents = box_type.oriented_extents(orientation);
    let Some((hull, fit_extents)) = erode_with_fattening(outer, &extents) else {
        return RegionOutcome::Empty(EmptyReason::HullEmpty);
    };
    let fattened = fit_extents != extents;
    let corners = inverted_box(&extents).vertices().to_vec();
    let hull_box = hull.bounds();
    let mut obstacles = Vec::new();
    for source in trunk.obstacle_sources() {
        let sum = match minkowski_sum_points(&source, &corners) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if !bbox_overlap(&sum.bounds(), &hull_box) {
            continue;
        }
        if let Some(o) = Obstacle::clip(obstacles.len(), sum.halfspaces(), &hull) {
            if o.covers_hull() {
                return RegionOutcome::Empty(EmptyReason::Covered);
            }
            obstacles.push(o);
        }
    }
    RegionOutcome::Region(Box::new(FeasibleRegion {
        box_id: box_type.id.clone(),
        orientation,
        extents,
        fit_extents,
        fattened,
        hull,
        obstacles,
        volume: None,
    }))
}

/// One task per (box, distinct orientation), run on the rayon pool.
pub fn compute_all_regions(
    trunk: &TrunkModel,
    catalog: &[BoxType],
    orientations: Option<&[Orientation]>,
) -> Result<Vec<(String, Orientation, RegionOutcome)>, FreespaceError> {
    let outer = trunk.outer_polytope()?;
    let tasks: Vec<(&BoxType, Orientation)> = catalog
        .iter()
        .flat_map(|b| {
            b.distinct_orientations()
                .into_iter()
                .filter(|o| orientations.is_none_or(|f| f.contains(o)))
                .map(move |o| (b, o))
        })
        .collect();
    Ok(tasks
        .par_iter()
        .map(|(b, o)| (b.id.clone(), *o, compute_feasible_region(trunk, &outer, b, *o)))
        .collect())
}

/// Re-verifies that no discarded source obstacle reaches into the hull interior.
pub fn discarded_obstacles_are_outside(trunk: &TrunkModel, region: &FeasibleRegion) -> bool {
    let corners = inverted_box(&region.extents).vertices().to_vec();
    let kept: Vec<&ConvexPolytope> = region.obstacles.iter().map(|o| o.polytope()).collect();
    trunk.obstacle_sources().iter().all(|src| {
        let Ok(sum) = minkowski_sum_points(src, &corners) else { return true };
        if !polytopes_touch(&sum, &region.hull) {
            return true;
        }
        match intersect_halfspaces(sum.halfspaces(), &region.hull) {
            Clip::Solid(p) => kept.contains(&&p),
            _ => true,
        }
    })
}

#[derive(Serialize, Deserialize)]
struct ObstacleFile {
    id: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Point3>,
}

#[derive(Serialize, Deserialize)]
struct RegionFile {
    #[serde(rename = "box")]
    box_id: String,
    orientation: Orientation,
    #[serde(with = "rational::serde_rational_vec")]
    extents: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    fit_extents: Vec<Rational>,
    fattened: bool,
    hull: ConvexPolytope,
    obstacles: Vec<ObstacleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volume_mm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    volume_stderr_mm3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    free_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl From<&FeasibleRegion> for RegionFile {
    fn from(r: &FeasibleRegion) -> Self {
        RegionFile {
            box_id: r.box_id.clone(),
            orientation: r.orientation,
            extents: r.extents.to_vec(),
            fit_extents: r.fit_extents.to_vec(),
            fattened: r.fattened,
            hull: r.hull.clone(),
            obstacles: r
                .obstacles
                .iter()
                .map(|o| ObstacleFile { id: o.id, halfspaces: o.facets.clone(), vertices: o.polytope.vertices().to_vec() })
                .collect(),
            volume_mm3: r.volume.as_ref().map(|v| v.volume_mm3),
            volume_stderr_mm3: r.volume.as_ref().map(|v| v.stderr_mm3),
            samples: r.volume.as_ref().map(|v| v.samples),
            free_samples: r.volume.as_ref().map(|v| v.free),
            seed: r.volume.as_ref().map(|v| v.seed),
        }
    }
}

impl TryFrom<RegionFile> for FeasibleRegion {
    type Error = FreespaceError;

    fn try_from(f: RegionFile) -> Result<Self, FreespaceError> {
        let bad = |m: String| FreespaceError::MalformedRegion(m);
        f.hull.validate().map_err(|e| bad(format!("hull: {e}")))?;
        let three = |v: Vec<Rational>, what: &str| -> Result<[Rational; 3], FreespaceError> {
            v.try_into().map_err(|_| bad(format!("{what} needs three entries")))
        };
        let mut obstacles = Vec::with_capacity(f.obstacles.len());
        for o in f.obstacles {
            let rebuilt = Obstacle::clip(o.id, &o.halfspaces, &f.hull)
                .ok_or_else(|| bad(format!("obstacle {} is not solid inside the hull", o.id)))?;
            let mut stored = o.vertices.clone();
            stored.sort();
            let mut facets = o.halfspaces.clone();
            facets.sort();
            if rebuilt.polytope.vertices() != stored.as_slice() || rebuilt.facets != facets {
                return Err(bad(format!("obstacle {} halfspaces and vertices disagree", o.id)));
            }
            obstacles.push(rebuilt);
        }
        let volume = match (f.volume_mm3, f.volume_stderr_mm3, f.samples, f.free_samples, f.seed) {
            (Some(volume_mm3), Some(stderr_mm3), Some(samples), Some(free), Some(seed)) => {
                Some(VolumeEstimate { volume_mm3, stderr_mm3, samples, free, seed })
            }
            _ => None,
        };
        Ok(FeasibleRegion {
            box_id: f.box_id,
            orientation: f.orientation,
            extents: three(f.extents, "extents")?,
            fit_extents: three(f.fit_extents, "fit_extents")?,
            fattened: f.fattened,
            hull: f.hull,
            obstacles,
            volume,
        })
    }
}

#[cfg(test)]
mod tests;
