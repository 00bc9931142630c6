use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::hull;
use super::{GeometryError, Halfspace, Point3};
use crate::rational::{self, Rational};
use crate::simplex::{self, SimplexOutcome};

const EXACT_ITER_LIMIT: usize = 100_000;

/// Bounded, full-dimensional convex polytope carrying both descriptions.
///
/// `halfspaces` is irredundant and canonical; `vertices` are exactly the
/// extreme points. Both lists are sorted, so equal sets compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPolytope")]
pub struct ConvexPolytope {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Point3>,
}

#[derive(Deserialize)]
struct RawPolytope {
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Point3>,
}

impl TryFrom<RawPolytope> for ConvexPolytope {
    type Error = GeometryError;

    fn try_from(raw: RawPolytope) -> Result<Self, GeometryError> {
        let p = ConvexPolytope::from_parts(raw.halfspaces, raw.vertices);
        p.validate()?;
        Ok(p)
    }
}

/// Result of intersecting halfspaces inside a bounding polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clip {
    Empty,
    /// Nonempty but with no interior (a face, edge or point).
    Flat,
    Solid(ConvexPolytope),
}

impl Clip {
    pub fn solid(self) -> Option<ConvexPolytope> {
        match self {
            Clip::Solid(p) => Some(p),
            _ => None,
        }
    }
}

impl ConvexPolytope {
    pub(crate) fn from_parts(mut halfspaces: Vec<Halfspace>, mut vertices: Vec<Point3>) -> Self {
        halfspaces.sort();
        halfspaces.dedup();
        vertices.sort();
        vertices.dedup();
        ConvexPolytope { halfspaces, vertices }
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn axis_box(lo: &Point3, hi: &Point3) -> Result<Self, GeometryError> {
        if (0..3).any(|k| lo[k] >= hi[k]) {
            return Err(GeometryError::DegenerateInput(format!("empty box {lo:?}..{hi:?}")));
        }
        let mut halfspaces = Vec::with_capacity(6);
        for k in 0..3 {
            let mut n = [Rational::zero(), Rational::zero(), Rational::zero()];
            n[k] = Rational::one();
            halfspaces.push(Halfspace::new(Point3::from_array(n.clone()), hi[k].clone()).unwrap());
            n[k] = -Rational::one();
            halfspaces.push(Halfspace::new(Point3::from_array(n), -&lo[k]).unwrap());
        }
        let mut vertices = Vec::with_capacity(8);
        for mask in 0..8 {
            let pick = |k: usize| if mask & (1 << k) != 0 { hi[k].clone() } else { lo[k].clone() };
            vertices.push(Point3::new(pick(0), pick(1), pick(2)));
        }
        Ok(Self::from_parts(halfspaces, vertices))
    }

    /// Box of the given full extents centered at the origin.
    pub fn centered_box(extents: &[Rational; 3]) -> Result<Self, GeometryError> {
        let two = rational::int(2);
        let hi = Point3::new(&extents[0] / &two, &extents[1] / &two, &extents[2] / &two);
        Self::axis_box(&-&hi, &hi)
    }

    pub fn bounds(&self) -> (Point3, Point3) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices[1..] {
            for (k, c) in v.coords().into_iter().enumerate() {
                let (l, h) = match k {
                    0 => (&mut lo.x, &mut hi.x),
                    1 => (&mut lo.y, &mut hi.y),
                    _ => (&mut lo.z, &mut hi.z),
                };
                if c < l {
                    *l = c.clone();
                }
                if c > h {
                    *h = c.clone();
                }
            }
        }
        (lo, hi)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.halfspaces.iter().all(|h| h.contains(p))
    }

    pub fn contains_in_interior(&self, p: &Point3) -> bool {
        self.halfspaces.iter().all(|h| h.contains_strictly(p))
    }

    pub fn translated(&self, t: &Point3) -> ConvexPolytope {
        ConvexPolytope {
            halfspaces: self.halfspaces.iter().map(|h| h.translated(t)).collect(),
            vertices: self.vertices.iter().map(|v| v + t).collect(),
        }
    }

    /// Vertices incident to facet `i`, ordered counterclockwise seen from outside.
    pub fn facet_vertices(&self, i: usize) -> Vec<Point3> {
        let h = &self.halfspaces[i];
        let mut pts: Vec<Point3> = self.vertices.iter().filter(|v| h.on_boundary(v)).cloned().collect();
        let n = &h.normal;
        let drop_axis = (0..3)
            .max_by(|&a, &b| n[a].abs().cmp(&n[b].abs()))
            .unwrap();
        let (u, v) = match drop_axis {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let pivot_idx = (0..pts.len())
            .min_by(|&a, &b| (&pts[a][u], &pts[a][v]).cmp(&(&pts[b][u], &pts[b][v])))
            .unwrap();
        pts.swap(0, pivot_idx);
        let pivot = pts[0].clone();
        pts[1..].sort_by(|a, b| {
            let au = &a[u] - &pivot[u];
            let av = &a[v] - &pivot[v];
            let bu = &b[u] - &pivot[u];
            let bv = &b[v] - &pivot[v];
            let cross = au * bv - av * bu;
            if cross.is_positive() {
                Ordering::Less
            } else if cross.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        });
        // (u, v, dropped) is a right-handed cycle, so the 2D order is counterclockwise
        // about +e_dropped; reverse when the facet normal points the other way
        if n[drop_axis].is_negative() {
            pts[1..].reverse();
        }
        pts
    }

    /// Twice the vector area of facet `i`, pointing along its outward normal.
    fn facet_area_vector2(&self, i: usize) -> Point3 {
        let pts = self.facet_vertices(i);
        let mut acc = Point3::zero();
        for w in 1..pts.len().saturating_sub(1) {
            acc = &acc + &(&pts[w] - &pts[0]).cross(&(&pts[w + 1] - &pts[0]));
        }
        acc
    }

    /// Exact squared area of facet `i`.
    pub fn facet_area_squared(&self, i: usize) -> Rational {
        self.facet_area_vector2(i).norm_squared() / rational::int(4)
    }

    /// Exact volume by the divergence theorem over fan-triangulated facets.
    pub fn volume(&self) -> Rational {
        let origin = &self.vertices[0];
        let mut six_v = Rational::zero();
        for i in 0..self.halfspaces.len() {
            let pts: Vec<Point3> = self.facet_vertices(i).iter().map(|p| p - origin).collect();
            for w in 1..pts.len().saturating_sub(1) {
                six_v += pts[0].dot(&pts[w].cross(&pts[w + 1]));
            }
        }
        six_v / rational::int(6)
    }

    pub fn support(&self, direction: &Point3) -> Result<Rational, GeometryError> {
        if direction.is_zero() {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(self.vertices.iter().map(|v| direction.dot(v)).max().expect("polytope has vertices"))
    }

    /// Checks the representation invariants; used by tests and loaders.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidPolytope(m));
        if self.vertices.len() < 4 || self.halfspaces.len() < 4 {
            return bad("fewer than 4 vertices or facets".into());
        }
        for v in &self.vertices {
            if !self.contains(v) {
                return bad(format!("vertex {v:?} violates a facet"));
            }
            let incident = self.halfspaces.iter().filter(|h| h.on_boundary(v)).count();
            if incident < 3 {
                return bad(format!("vertex {v:?} lies on {incident} facets"));
            }
        }
        for (i, h) in self.halfspaces.iter().enumerate() {
            let on: Vec<&Point3> = self.vertices.iter().filter(|v| h.on_boundary(v)).collect();
            if on.len() < 3 || self.facet_area_vector2(i).is_zero() {
                return bad(format!("facet {i} is not supported by a polygon"));
            }
        }
        Ok(())
    }
}

/// Smallest convex polytope containing `points`.
pub fn convex_hull(points: &[Point3]) -> Result<ConvexPolytope, GeometryError> {
    let out = hull::hull(points)?;
    let vertices = out.vertices.iter().map(|&i| points[i].clone()).collect();
    Ok(ConvexPolytope::from_parts(out.halfspaces, vertices))
}

/// `{ a + b : a in p, b in q }` as the hull of pairwise vertex sums.
pub fn minkowski_sum_convex(p: &ConvexPolytope, q: &ConvexPolytope) -> Result<ConvexPolytope, GeometryError> {
    minkowski_sum_points(p.vertices(), q.vertices())
}

/// Minkowski sum of the convex hulls of two point sets.
pub fn minkowski_sum_points(p: &[Point3], q: &[Point3]) -> Result<ConvexPolytope, GeometryError> {
    let sums: Vec<Point3> = p.iter().flat_map(|a| q.iter().map(move |b| a + b)).collect();
    convex_hull(&sums)
}

fn axis_lower_bounds(p: &ConvexPolytope) -> Vec<Option<Rational>> {
    let (lo, _) = p.bounds();
    vec![Some(lo.x), Some(lo.y), Some(lo.z)]
}

/// All points of `bounding` satisfying every halfspace.
pub fn intersect_halfspaces(halfspaces: &[Halfspace], bounding: &ConvexPolytope) -> Clip {
    let mut all: Vec<Halfspace> = halfspaces.iter().chain(bounding.halfspaces()).cloned().collect();
    all.sort();
    all.dedup();

    // maximize t with n·x + |n|_1 t <= d, 0 <= t <= 1: t > 0 iff the interior is nonempty
    let mut rows = Vec::with_capacity(all.len() + 1);
    let mut rhs = Vec::with_capacity(all.len() + 1);
    for h in &all {
        rows.push(vec![h.normal.x.clone(), h.normal.y.clone(), h.normal.z.clone(), h.normal_l1()]);
        rhs.push(h.offset.clone());
    }
    rows.push(vec![Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()]);
    rhs.push(Rational::one());
    let mut lower = axis_lower_bounds(bounding);
    lower.push(Some(Rational::zero()));
    let objective = vec![Rational::zero(), Rational::zero(), Rational::zero(), Rational::one()];
    let (center, t) = match simplex::solve_bounded(&rows, &rhs, &lower, &objective, EXACT_ITER_LIMIT) {
        SimplexOutcome::Optimal { point, objective } => {
            (Point3::new(point[0].clone(), point[1].clone(), point[2].clone()), objective)
        }
        SimplexOutcome::Infeasible => return Clip::Empty,
        other => unreachable!("exact interior-point LP is bounded and finite: {other:?}"),
    };
    if t.is_zero() {
        return Clip::Flat;
    }

    // polar dual about the interior point: facets of the dual hull are primal vertices
    let dual: Vec<Point3> = all
        .iter()
        .map(|h| {
            let r = &h.offset - h.normal.dot(&center);
            h.normal.scale(&(Rational::one() / r))
        })
        .collect();
    let out = hull::hull(&dual).expect("dual of a bounded polytope with interior is full-dimensional");
    let vertices: Vec<Point3> = out
        .halfspaces
        .iter()
        .map(|plane| &center + &plane.normal.scale(&(Rational::one() / &plane.offset)))
        .collect();
    let facets: Vec<Halfspace> = out.vertices.iter().map(|&i| all[i].clone()).collect();
    Clip::Solid(ConvexPolytope::from_parts(facets, vertices))
}

/// Whether the closed polytopes share at least one point.
pub fn polytopes_touch(p: &ConvexPolytope, q: &ConvexPolytope) -> bool {
    let (plo, phi) = p.bounds();
    let (qlo, qhi) = q.bounds();
    if (0..3).any(|k| phi[k] < qlo[k] || qhi[k] < plo[k]) {
        return false;
    }
    if p.vertices().iter().any(|v| q.contains(v)) || q.vertices().iter().any(|v| p.contains(v)) {
        return true;
    }
    let hs: Vec<&Halfspace> = p.halfspaces().iter().chain(q.halfspaces()).collect();
    let rows: Vec<Vec<Rational>> = hs
        .iter()
        .map(|h| vec![h.normal.x.clone(), h.normal.y.clone(), h.normal.z.clone()])
        .collect();
    let rhs: Vec<Rational> = hs.iter().map(|h| h.offset.clone()).collect();
    let lower: Vec<Option<Rational>> = (0..3)
        .map(|k| Some(std::cmp::max(&plo[k], &qlo[k]).clone()))
        .collect();
    let zero = vec![Rational::zero(); 3];
    matches!(
        simplex::solve_bounded(&rows, &rhs, &lower, &zero, EXACT_ITER_LIMIT),
        SimplexOutcome::Optimal { .. }
    )
}

/// Exact maximum of `objective·x` over the halfspace system inside `bounding`.
pub fn maximize_over(
    halfspaces: &[Halfspace],
    bounding: &ConvexPolytope,
    objective: &Point3,
) -> Option<(Rational, Point3)> {
    let hs: Vec<&Halfspace> = halfspaces.iter().chain(bounding.halfspaces()).collect();
    let rows: Vec<Vec<Rational>> = hs
        .iter()
        .map(|h| vec![h.normal.x.clone(), h.normal.y.clone(), h.normal.z.clone()])
        .collect();
    let rhs: Vec<Rational> = hs.iter().map(|h| h.offset.clone()).collect();
    let obj = vec![objective.x.clone(), objective.y.clone(), objective.z.clone()];
    match simplex::solve_bounded(&rows, &rhs, &axis_lower_bounds(bounding), &obj, EXACT_ITER_LIMIT) {
        SimplexOutcome::Optimal { point, objective } => {
            Some((objective, Point3::new(point[0].clone(), point[1].clone(), point[2].clone())))
        }
        _ => None,
    }
}

/// Exact per-axis extent `[min, max]` of a closed halfspace system inside
/// `bounding`; `None` when the system is empty.
pub fn axis_extents(halfspaces: &[Halfspace], bounding: &ConvexPolytope) -> Option<[(Rational, Rational); 3]> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut dir = [Rational::zero(), Rational::zero(), Rational::zero()];
        dir[k] = Rational::one();
        let (max, _) = maximize_over(halfspaces, bounding, &Point3::from_array(dir.clone()))?;
        dir[k] = -Rational::one();
        let (neg_min, _) = maximize_over(halfspaces, bounding, &Point3::from_array(dir))?;
        out.push((-neg_min, max));
    }
    out.try_into().ok()
}
