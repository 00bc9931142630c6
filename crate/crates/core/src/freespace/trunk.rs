//! Trunk models, their file formats, and exact point-in-trunk tests.

use std::path::Path;

use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FreespaceError;
use crate::geometry::{convex_hull, intersect_halfspaces, Clip, ConvexPolytope, Halfspace, Point3, Triangle3};
use crate::rational::{self, Rational};

/// Half-width of the box used to bound halfspace-only shells.
const SHELL_BOUND: i64 = 1_000_000_000;

#[derive(Clone, Debug)]
pub enum TrunkModel {
    Mesh { triangles: Vec<Triangle3>, seed: Point3 },
    ConvexDecomposed { shell: ConvexPolytope, cavities: Vec<ConvexPolytope> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrunkFormat {
    Stl,
    MeshJson,
    ConvexJson,
}

impl TrunkFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stl" => Some(TrunkFormat::Stl),
            "mesh-json" | "mesh" => Some(TrunkFormat::MeshJson),
            "convex-json" | "convex" => Some(TrunkFormat::ConvexJson),
            _ => None,
        }
    }

    /// Guess from the file extension and, for JSON, the top-level keys.
    pub fn detect(path: &Path, text: &str) -> Option<Self> {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(e) if e == "stl" => Some(TrunkFormat::Stl),
            Some(e) if e == "json" => {
                let v: serde_json::Value = serde_json::from_str(text).ok()?;
                if v.get("shell").is_some() {
                    Some(TrunkFormat::ConvexJson)
                } else if v.get("triangles").is_some() {
                    Some(TrunkFormat::MeshJson)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// A loaded trunk plus the number of degenerate triangles dropped on ingestion.
#[derive(Clone, Debug)]
pub struct LoadedTrunk {
    pub model: TrunkModel,
    pub dropped_triangles: usize,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    triangles: Vec<[Point3; 3]>,
    seed: Option<Point3>,
}

#[derive(Serialize, Deserialize)]
struct ShellFile {
    halfspaces: Vec<RawHalfspace>,
}

#[derive(Serialize, Deserialize)]
struct RawHalfspace {
    n: Point3,
    #[serde(with = "rational::serde_rational")]
    d: Rational,
}

#[derive(Serialize, Deserialize)]
struct CavityFile {
    vertices: Vec<Point3>,
}

#[derive(Serialize, Deserialize)]
struct ConvexFile {
    shell: ShellFile,
    #[serde(default)]
    cavities: Vec<CavityFile>,
}

fn malformed(msg: impl Into<String>) -> FreespaceError {
    FreespaceError::MalformedTrunk(msg.into())
}

impl TrunkModel {
    /// Mesh trunk from raw triangles; degenerate triangles are dropped and counted.
    pub fn mesh(triangles: Vec<Triangle3>, seed: Point3) -> Result<LoadedTrunk, FreespaceError> {
        let total = triangles.len();
        let triangles: Vec<Triangle3> = triangles.into_iter().filter(|t| !t.is_degenerate()).collect();
        let dropped = total - triangles.len();
        if triangles.len() < 4 {
            return Err(malformed(format!("mesh has {} usable triangles, need at least 4", triangles.len())));
        }
        let model = TrunkModel::Mesh { triangles, seed };
        model.validate()?;
        Ok(LoadedTrunk { model, dropped_triangles: dropped })
    }

    pub fn convex(shell: ConvexPolytope, cavities: Vec<ConvexPolytope>) -> Result<LoadedTrunk, FreespaceError> {
        let model = TrunkModel::ConvexDecomposed { shell, cavities };
        model.validate()?;
        Ok(LoadedTrunk { model, dropped_triangles: 0 })
    }

    fn validate(&self) -> Result<(), FreespaceError> {
        match self {
            TrunkModel::Mesh { triangles, seed } => {
                if triangles.iter().any(|t| point_on_triangle_exact(seed, t)) {
                    return Err(malformed("seed point lies on the trunk surface"));
                }
                let pts: Vec<Point3> = triangles.iter().flat_map(|t| t.vertices()).cloned().collect();
                let hull = convex_hull(&pts).map_err(|e| FreespaceError::DegenerateTrunk(e.to_string()))?;
                if !hull.contains_in_interior(seed) {
                    return Err(malformed("seed point is not inside the mesh hull"));
                }
                Ok(())
            }
            TrunkModel::ConvexDecomposed { shell, cavities } => {
                for (i, c) in cavities.iter().enumerate() {
                    if !c.vertices().iter().all(|v| shell.contains(v)) {
                        return Err(malformed(format!("cavity {i} is not inside the shell")));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn load(path: &Path, format: Option<TrunkFormat>, seed: Option<Point3>) -> Result<LoadedTrunk, FreespaceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| FreespaceError::Io { path: path.display().to_string(), source })?;
        let format = format
            .or_else(|| TrunkFormat::detect(path, &text))
            .ok_or_else(|| malformed(format!("cannot tell the format of {}", path.display())))?;
        Self::parse(&text, format, seed)
    }

    /// `seed` overrides any seed stored in the file.
    pub fn parse(text: &str, format: TrunkFormat, seed: Option<Point3>) -> Result<LoadedTrunk, FreespaceError> {
        match format {
            TrunkFormat::Stl => {
                let triangles = parse_ascii_stl(text)?;
                let seed = seed.ok_or_else(|| malformed("STL trunks need a seed point"))?;
                Self::mesh(triangles, seed)
            }
            TrunkFormat::MeshJson => {
                let file: MeshFile = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
                let seed = seed.or(file.seed).ok_or_else(|| malformed("mesh trunk has no seed point"))?;
                let triangles = file.triangles.into_iter().map(|[a, b, c]| Triangle3::new(a, b, c)).collect();
                Self::mesh(triangles, seed)
            }
            TrunkFormat::ConvexJson => {
                let file: ConvexFile = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
                let mut hs = Vec::new();
                for h in file.shell.halfspaces {
                    hs.push(Halfspace::new(h.n, h.d).ok_or_else(|| malformed("shell halfspace has a zero normal"))?);
                }
                let shell = bounded_shell(&hs)?;
                let mut cavities = Vec::new();
                for (i, c) in file.cavities.into_iter().enumerate() {
                    let poly = convex_hull(&c.vertices)
                        .map_err(|e| malformed(format!("cavity {i}: {e}")))?;
                    cavities.push(poly);
                }
                Self::convex(shell, cavities)
            }
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            TrunkModel::Mesh { triangles, seed } => serde_json::to_string_pretty(&MeshFile {
                triangles: triangles.iter().map(|t| [t.a.clone(), t.b.clone(), t.c.clone()]).collect(),
                seed: Some(seed.clone()),
            }),
            TrunkModel::ConvexDecomposed { shell, cavities } => serde_json::to_string_pretty(&ConvexFile {
                shell: ShellFile {
                    halfspaces: shell
                        .halfspaces()
                        .iter()
                        .map(|h| RawHalfspace { n: h.normal.clone(), d: h.offset.clone() })
                        .collect(),
                },
                cavities: cavities.iter().map(|c| CavityFile { vertices: c.vertices().to_vec() }).collect(),
            }),
        }
        .expect("trunk serializes")
    }

    /// Exact membership of a point in the closed trunk.
    pub fn contains(&self, p: &Point3) -> bool {
        match self {
            TrunkModel::ConvexDecomposed { shell, cavities } => {
                shell.contains(p) && !cavities.iter().any(|c| c.contains_in_interior(p))
            }
            TrunkModel::Mesh { .. } => {
                let mut rng = rand::SeedableRng::seed_from_u64(0x7275_6e6b);
                MeshInside::new(self).expect("mesh trunk").contains(&Query::Exact(p.clone()), &mut rng)
            }
        }
    }
}

fn bounded_shell(hs: &[Halfspace]) -> Result<ConvexPolytope, FreespaceError> {
    let b = rational::int(SHELL_BOUND);
    let big = ConvexPolytope::axis_box(&Point3::new(-&b, -&b, -&b), &Point3::new(b.clone(), b.clone(), b.clone()))
        .expect("nonempty box");
    match intersect_halfspaces(hs, &big) {
        Clip::Solid(p) => {
            if p.vertices().iter().any(|v| v.coords().iter().any(|c| c.abs() == b)) {
                Err(malformed("shell halfspaces do not bound a region"))
            } else {
                Ok(p)
            }
        }
        Clip::Flat => Err(FreespaceError::DegenerateTrunk("shell has no interior".into())),
        Clip::Empty => Err(FreespaceError::DegenerateTrunk("shell halfspaces are infeasible".into())),
    }
}

/// Minimal ASCII STL reader: collects `vertex x y z` triples in order.
pub fn parse_ascii_stl(text: &str) -> Result<Vec<Triangle3>, FreespaceError> {
    let mut verts = Vec::new();
    let mut saw_solid = false;
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("solid") => saw_solid = true,
            Some("vertex") => {
                let coords: Vec<Rational> = tok
                    .map(rational::parse)
                    .collect::<Option<Vec<_>>>()
                    .filter(|c| c.len() == 3)
                    .ok_or_else(|| malformed(format!("line {}: bad vertex", lineno + 1)))?;
                verts.push(Point3::new(coords[0].clone(), coords[1].clone(), coords[2].clone()));
            }
            _ => {}
        }
    }
    if !saw_solid {
        return Err(malformed("not an ASCII STL file"));
    }
    if verts.len() % 3 != 0 {
        return Err(malformed("vertex count is not a multiple of three"));
    }
    Ok(verts.chunks(3).map(|c| Triangle3::new(c[0].clone(), c[1].clone(), c[2].clone())).collect())
}

pub fn write_ascii_stl(triangles: &[Triangle3]) -> String {
    let mut out = String::from("solid trunk\n");
    for t in triangles {
        out.push_str("  facet normal 0 0 0\n    outer loop\n");
        for v in t.vertices() {
            let c = v.coords();
            out.push_str(&format!(
                "      vertex {} {} {}\n",
                decimal_or_ratio(c[0]),
                decimal_or_ratio(c[1]),
                decimal_or_ratio(c[2])
            ));
        }
        out.push_str("    endloop\n  endfacet\n");
    }
    out.push_str("endsolid trunk\n");
    out
}

fn decimal_or_ratio(r: &Rational) -> String {
    // STL readers expect decimals; dyadic values print exactly through f64
    let f = rational::to_f64(r);
    if rational::from_f64(f).as_ref() == Some(r) {
        format!("{f}")
    } else {
        rational::format(r)
    }
}

fn point_on_triangle_exact(p: &Point3, t: &Triangle3) -> bool {
    let pts = [t.a.clone(), t.b.clone(), t.c.clone()];
    orient3(&pts[0], &pts[1], &pts[2], p) == 0 && in_coplanar_triangle(&pts, p)
}

/// A segment endpoint: `Float` when every coordinate is an `f64` value.
#[derive(Clone, Debug)]
pub(crate) enum Query {
    Float([f64; 3]),
    Exact(Point3),
}

impl Query {
    fn exact(&self) -> Point3 {
        match self {
            Query::Exact(p) => p.clone(),
            Query::Float(f) => Point3::from_f64(*f).expect("finite sample"),
        }
    }
}

/// Sign of `((b-a) x (c-a)) · (d-a)`.
trait Orient: Clone {
    fn orient3(a: &Self, b: &Self, c: &Self, d: &Self) -> i8;
    /// Orientation of the projection that drops `axis`.
    fn orient2(a: &Self, b: &Self, c: &Self, axis: usize) -> i8;
}

fn sign_f(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_r(v: &Rational) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

const DROP: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

impl Orient for [f64; 3] {
    fn orient3(a: &Self, b: &Self, c: &Self, d: &Self) -> i8 {
        let p = |v: &[f64; 3]| robust::Coord3D { x: v[0], y: v[1], z: v[2] };
        // robust's orient3d is positive when d lies below the plane of a, b, c
        -sign_f(robust::orient3d(p(a), p(b), p(c), p(d)))
    }

    fn orient2(a: &Self, b: &Self, c: &Self, axis: usize) -> i8 {
        let (u, v) = DROP[axis];
        let p = |w: &[f64; 3]| robust::Coord { x: w[u], y: w[v] };
        sign_f(robust::orient2d(p(a), p(b), p(c)))
    }
}

impl Orient for Point3 {
    fn orient3(a: &Self, b: &Self, c: &Self, d: &Self) -> i8 {
        orient3(a, b, c, d)
    }

    fn orient2(a: &Self, b: &Self, c: &Self, axis: usize) -> i8 {
        let (u, v) = DROP[axis];
        sign_r(&((&b[u] - &a[u]) * (&c[v] - &a[v]) - (&b[v] - &a[v]) * (&c[u] - &a[u])))
    }
}

fn orient3(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> i8 {
    sign_r(&(b - a).cross(&(c - a)).dot(&(d - a)))
}

/// Closed point-in-triangle test for a point in the triangle's plane.
fn in_coplanar_triangle<P: Orient>(t: &[P; 3], q: &P) -> bool {
    let axis = (0..3).find(|&k| P::orient2(&t[0], &t[1], &t[2], k) != 0).expect("triangle is not degenerate");
    let s = [
        P::orient2(&t[0], &t[1], q, axis),
        P::orient2(&t[1], &t[2], q, axis),
        P::orient2(&t[2], &t[0], q, axis),
    ];
    !(s.contains(&1) && s.contains(&-1))
}

enum Crossing {
    OnSurface,
    Count(usize),
    Degenerate,
}

fn crossings<P: Orient>(tris: &[[P; 3]], s: &P, q: &P) -> Crossing {
    let mut count = 0;
    let mut degenerate = false;
    for t in tris {
        let oq = P::orient3(&t[0], &t[1], &t[2], q);
        if oq == 0 && in_coplanar_triangle(t, q) {
            return Crossing::OnSurface;
        }
        let os = P::orient3(&t[0], &t[1], &t[2], s);
        if os == 0 && oq == 0 {
            degenerate = true;
            continue;
        }
        if os == oq || os == 0 || oq == 0 {
            // a segment ending on the plane outside the triangle does not cross it;
            // one ending inside it was caught above (q) or is excluded by validation (s)
            continue;
        }
        let e = [
            P::orient3(s, q, &t[0], &t[1]),
            P::orient3(s, q, &t[1], &t[2]),
            P::orient3(s, q, &t[2], &t[0]),
        ];
        if e.iter().all(|&v| v == 1) || e.iter().all(|&v| v == -1) {
            count += 1;
        } else if !(e.contains(&1) && e.contains(&-1)) {
            degenerate = true;
        }
    }
    if degenerate {
        Crossing::Degenerate
    } else {
        Crossing::Count(count)
    }
}

/// Ray-parity inside test for mesh trunks, anchored at the seed.
pub(crate) struct MeshInside {
    exact: Vec<[Point3; 3]>,
    float: Option<Vec<[[f64; 3]; 3]>>,
    seed: Point3,
    seed_f: Option<[f64; 3]>,
    lo: [f64; 3],
    hi: [f64; 3],
}

fn as_exact_f64(p: &Point3) -> Option<[f64; 3]> {
    let f = p.to_f64();
    (Point3::from_f64(f).as_ref() == Some(p)).then_some(f)
}

impl MeshInside {
    pub(crate) fn new(model: &TrunkModel) -> Option<Self> {
        let TrunkModel::Mesh { triangles, seed } = model else { return None };
        let exact: Vec<[Point3; 3]> = triangles.iter().map(|t| [t.a.clone(), t.b.clone(), t.c.clone()]).collect();
        let float = exact
            .iter()
            .map(|t| Some([as_exact_f64(&t[0])?, as_exact_f64(&t[1])?, as_exact_f64(&t[2])?]))
            .collect::<Option<Vec<_>>>();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for t in &exact {
            for v in t {
                let f = v.to_f64();
                for k in 0..3 {
                    lo[k] = lo[k].min(f[k]);
                    hi[k] = hi[k].max(f[k]);
                }
            }
        }
        Some(MeshInside { seed_f: as_exact_f64(seed), seed: seed.clone(), exact, float, lo, hi })
    }

    fn crossings_between(&self, a: &Query, b: &Query, a_is_seed: bool) -> Crossing {
        let fa = if a_is_seed { self.seed_f.map(Query::Float) } else { Some(a.clone()) };
        if let (Some(tris), Some(Query::Float(fa)), Query::Float(fb)) = (&self.float, fa, b) {
            return crossings(tris, &fa, fb);
        }
        let ea = if a_is_seed { self.seed.clone() } else { a.exact() };
        crossings(&self.exact, &ea, &b.exact())
    }

    /// Closed membership: points on the surface count as inside.
    pub(crate) fn contains(&self, q: &Query, rng: &mut ChaCha8Rng) -> bool {
        let seed = Query::Exact(self.seed.clone());
        match self.crossings_between(&seed, q, true) {
            Crossing::OnSurface => return true,
            Crossing::Count(n) => return n % 2 == 0,
            Crossing::Degenerate => {}
        }
        // detour through a random point; both legs must be generic
        loop {
            let m = Query::Float([
                rng.gen_range(self.lo[0]..=self.hi[0]).round(),
                rng.gen_range(self.lo[1]..=self.hi[1]).round() + 0.5,
                rng.gen_range(self.lo[2]..=self.hi[2]).round() + 0.25,
            ]);
            let first = match self.crossings_between(&seed, &m, true) {
                Crossing::Count(n) => n,
                _ => continue,
            };
            match self.crossings_between(&m, q, false) {
                Crossing::OnSurface => return true,
                Crossing::Count(n) => return (first + n) % 2 == 0,
                Crossing::Degenerate => continue,
            }
        }
    }
}
