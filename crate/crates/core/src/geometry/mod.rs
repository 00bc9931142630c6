//! Exact convex geometry: points, halfspaces, hulls, Minkowski sums and
//! volume integration. Every predicate here is decided in rational
//! arithmetic; nothing rounds.

mod halfspace;
mod hull;
mod point;
mod polytope;


use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use halfspace::Halfspace;
pub use point::{Point3, Vector3};
pub use polytope::{
    axis_extents, convex_hull, intersect_halfspaces, maximize_over, minkowski_sum_convex,
    minkowski_sum_points, polytopes_touch, Clip, ConvexPolytope,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("support direction must be nonzero")]
    ZeroDirection,
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle3 {
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
}

impl Triangle3 {
    pub fn new(a: Point3, b: Point3, c: Point3) -> Self {
        Triangle3 { a, b, c }
    }

    pub fn is_degenerate(&self) -> bool {
        (&self.b - &self.a).cross(&(&self.c - &self.a)).is_zero()
    }

    pub fn vertices(&self) -> [&Point3; 3] {
        [&self.a, &self.b, &self.c]
    }
}
