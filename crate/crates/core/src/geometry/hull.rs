//! Incremental 3D convex hull over integer-scaled coordinates.
//!
//! Rational inputs are multiplied by the common denominator of all
//! coordinates. Orientation tests run in `i128` when every scaled
//! coordinate is below 2^39 (the determinant then stays below 2^126) and in
//! `BigInt` otherwise; both paths are exact.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::{GeometryError, Halfspace, Point3};
use crate::rational::{self, Rational};

trait HullInt: Clone + Eq + Ord + Hash + Signed + Integer {}
impl HullInt for i128 {}
impl HullInt for BigInt {}

/// Irredundant facet planes and the indices of the extreme input points.
pub(crate) struct HullOutput {
    pub halfspaces: Vec<Halfspace>,
    pub vertices: Vec<usize>,
}

pub(crate) fn hull(points: &[Point3]) -> Result<HullOutput, GeometryError> {
    if points.len() < 4 {
        return Err(GeometryError::DegenerateInput(format!(
            "{} points cannot span a solid",
            points.len()
        )));
    }
    let scale = rational::common_denominator(points.iter().flat_map(|p| p.coords()));
    let scale_r = Rational::from_integer(scale.clone());
    let scaled: Vec<[BigInt; 3]> = points
        .iter()
        .map(|p| {
            let c = p.coords();
            [
                (c[0] * &scale_r).to_integer(),
                (c[1] * &scale_r).to_integer(),
                (c[2] * &scale_r).to_integer(),
            ]
        })
        .collect();
    let limit = BigInt::from(1u64 << 39);
    let small = scaled.iter().all(|p| p.iter().all(|c| c.abs() < limit));
    let (planes, vertices) = if small {
        let pts: Vec<[i128; 3]> = scaled
            .iter()
            .map(|p| [p[0].to_i128().unwrap(), p[1].to_i128().unwrap(), p[2].to_i128().unwrap()])
            .collect();
        let (planes, vertices) = hull_int(&pts)?;
        let planes = planes
            .into_iter()
            .map(|(n, d)| (n.map(BigInt::from), BigInt::from(d)))
            .collect::<Vec<_>>();
        (planes, vertices)
    } else {
        hull_int(&scaled)?
    };
    let mut halfspaces: Vec<Halfspace> = planes
        .into_iter()
        .map(|(n, d)| {
            let normal = Point3::new(
                Rational::from_integer(n[0].clone()),
                Rational::from_integer(n[1].clone()),
                Rational::from_integer(n[2].clone()),
            );
            Halfspace::new(normal, Rational::new(d, scale.clone())).expect("hull facet normal is nonzero")
        })
        .collect();
    halfspaces.sort();
    Ok(HullOutput { halfspaces, vertices })
}

fn sub<T: HullInt>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone(), a[2].clone() - b[2].clone()]
}

fn cross<T: HullInt>(u: &[T; 3], v: &[T; 3]) -> [T; 3] {
    [
        u[1].clone() * v[2].clone() - u[2].clone() * v[1].clone(),
        u[2].clone() * v[0].clone() - u[0].clone() * v[2].clone(),
        u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone(),
    ]
}

fn dot<T: HullInt>(u: &[T; 3], v: &[T; 3]) -> T {
    u[0].clone() * v[0].clone() + u[1].clone() * v[1].clone() + u[2].clone() * v[2].clone()
}

/// Sign of `((b-a) x (c-a)) · (p-a)`; positive when `p` sees face `(a,b,c)`.
fn orient<T: HullInt>(a: &[T; 3], b: &[T; 3], c: &[T; 3], p: &[T; 3]) -> i8 {
    let n = cross(&sub(b, a), &sub(c, a));
    let v = dot(&n, &sub(p, a));
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

type Plane<T> = ([T; 3], T);

fn hull_int<T: HullInt>(pts: &[[T; 3]]) -> Result<(Vec<Plane<T>>, Vec<usize>), GeometryError> {
    let degenerate = |what: &str| GeometryError::DegenerateInput(what.to_string());
    let i0 = 0;
    let i1 = (1..pts.len())
        .find(|&i| pts[i] != pts[i0])
        .ok_or_else(|| degenerate("all points coincide"))?;
    let i2 = (1..pts.len())
        .find(|&i| {
            let n = cross(&sub(&pts[i1], &pts[i0]), &sub(&pts[i], &pts[i0]));
            n.iter().any(|c| !c.is_zero())
        })
        .ok_or_else(|| degenerate("points are collinear"))?;
    let i3 = (1..pts.len())
        .find(|&i| orient(&pts[i0], &pts[i1], &pts[i2], &pts[i]) != 0)
        .ok_or_else(|| degenerate("points are coplanar"))?;

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let mut alive: Vec<bool> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |f: [usize; 3], faces: &mut Vec<[usize; 3]>, alive: &mut Vec<bool>, edges: &mut HashMap<(usize, usize), usize>| {
        let id = faces.len();
        faces.push(f);
        alive.push(true);
        edges.insert((f[0], f[1]), id);
        edges.insert((f[1], f[2]), id);
        edges.insert((f[2], f[0]), id);
    };
    let tet = [i0, i1, i2, i3];
    for skip in 0..4 {
        let mut f: Vec<usize> = tet.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
        if orient(&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[tet[skip]]) > 0 {
            f.swap(1, 2);
        }
        add_face([f[0], f[1], f[2]], &mut faces, &mut alive, &mut edges);
    }

    let mut visible = Vec::new();
    for p in 0..pts.len() {
        if tet.contains(&p) {
            continue;
        }
        visible.clear();
        visible.resize(faces.len(), false);
        let mut any = false;
        for (fi, f) in faces.iter().enumerate() {
            if alive[fi] && orient(&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[p]) > 0 {
                visible[fi] = true;
                any = true;
            }
        }
        if !any {
            continue;
        }
        let mut horizon = Vec::new();
        for fi in 0..faces.len() {
            if !visible[fi] {
                continue;
            }
            let f = faces[fi];
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                let twin = edges[&(v, u)];
                if !visible[twin] {
                    horizon.push((u, v));
                }
            }
        }
        for fi in 0..faces.len() {
            if visible[fi] {
                alive[fi] = false;
                let f = faces[fi];
                for k in 0..3 {
                    let key = (f[k], f[(k + 1) % 3]);
                    if edges.get(&key) == Some(&fi) {
                        edges.remove(&key);
                    }
                }
            }
        }
        for (u, v) in horizon {
            add_face([u, v, p], &mut faces, &mut alive, &mut edges);
        }
    }

    let mut plane_set: HashSet<Plane<T>> = HashSet::new();
    let mut planes: Vec<Plane<T>> = Vec::new();
    let mut candidates: Vec<usize> = Vec::new();
    for (fi, f) in faces.iter().enumerate() {
        if !alive[fi] {
            continue;
        }
        let n = cross(&sub(&pts[f[1]], &pts[f[0]]), &sub(&pts[f[2]], &pts[f[0]]));
        let g = n.iter().fold(T::zero(), |g, c| g.gcd(c));
        let n = [n[0].clone() / g.clone(), n[1].clone() / g.clone(), n[2].clone() / g.clone()];
        let d = dot(&n, &pts[f[0]]);
        if plane_set.insert((n.clone(), d.clone())) {
            planes.push((n, d));
        }
        candidates.extend_from_slice(f);
    }
    candidates.sort_unstable();
    candidates.dedup();
    let mut seen: HashSet<&[T; 3]> = HashSet::new();
    let vertices = candidates
        .into_iter()
        .filter(|&i| seen.insert(&pts[i]))
        .filter(|&i| planes.iter().filter(|(n, d)| dot(n, &pts[i]) == *d).count() >= 3)
        .collect();
    Ok((planes, vertices))
}
