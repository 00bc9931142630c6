//! Monte Carlo volume estimates and the trunk soundness sampler.
//!
//! Samples are `f64` points. Membership is decided with a floating-point
//! filter and falls back to exact arithmetic near boundaries, so every
//! classification is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trunk::{MeshInside, Query};
use super::{FeasibleRegion, TrunkModel};
use crate::geometry::{ConvexPolytope, Halfspace, Point3};
use crate::rational::{self, Rational};

pub const DEFAULT_MC_SAMPLES: u64 = 200_000;
pub const DEFAULT_MC_SEED: u64 = 20_070_101;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub volume_mm3: f64,
    pub stderr_mm3: f64,
    pub samples: u64,
    pub free: u64,
    pub seed: u64,
}

struct Filtered {
    n: [f64; 3],
    n_abs: [f64; 3],
    d: f64,
    exact: Halfspace,
}

impl Filtered {
    fn new(h: &Halfspace) -> Self {
        let n = h.normal.to_f64();
        Filtered { n, n_abs: n.map(f64::abs), d: rational::to_f64(&h.offset), exact: h.clone() }
    }

    /// Sign of `n·p - d`, exact.
    fn side(&self, p: &[f64; 3], exact: &mut Option<Point3>) -> std::cmp::Ordering {
        let v = self.n[0] * p[0] + self.n[1] * p[1] + self.n[2] * p[2] - self.d;
        let mag = self.n_abs[0] * p[0].abs() + self.n_abs[1] * p[1].abs() + self.n_abs[2] * p[2].abs() + self.d.abs();
        if v.abs() > mag * 1e-12 {
            return v.partial_cmp(&0.0).unwrap();
        }
        let q = exact.get_or_insert_with(|| Point3::from_f64(*p).expect("finite sample"));
        self.exact.normal.dot(q).cmp(&self.exact.offset)
    }
}

struct FilteredObstacle {
    lo: [f64; 3],
    hi: [f64; 3],
    facets: Vec<Filtered>,
}

/// Exact free-space membership for `f64` points of one region.
pub struct RegionClassifier {
    hull: Vec<Filtered>,
    obstacles: Vec<FilteredObstacle>,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

fn f64_bounds(p: &ConvexPolytope) -> ([f64; 3], [f64; 3]) {
    let (lo, hi) = p.bounds();
    (lo.to_f64(), hi.to_f64())
}

impl RegionClassifier {
    pub fn new(region: &FeasibleRegion) -> Self {
        let (lo, hi) = f64_bounds(&region.hull);
        let obstacles = region
            .obstacles
            .iter()
            .map(|o| {
                let (mut olo, mut ohi) = f64_bounds(o.polytope());
                // widen so rounding of the exact bounds never excludes an inside point
                for k in 0..3 {
                    let pad = 1e-9 * (1.0 + olo[k].abs().max(ohi[k].abs()));
                    olo[k] -= pad;
                    ohi[k] += pad;
                }
                FilteredObstacle { lo: olo, hi: ohi, facets: o.facets().iter().map(Filtered::new).collect() }
            })
            .collect();
        RegionClassifier { hull: region.hull.halfspaces().iter().map(Filtered::new).collect(), obstacles, lo, hi }
    }

    pub fn in_hull(&self, p: &[f64; 3]) -> bool {
        let mut exact = None;
        self.hull.iter().all(|h| h.side(p, &mut exact) != std::cmp::Ordering::Greater)
    }

    pub fn in_obstacle(&self, p: &[f64; 3]) -> bool {
        let mut exact = None;
        self.obstacles.iter().any(|o| {
            (0..3).all(|k| o.lo[k] <= p[k] && p[k] <= o.hi[k])
                && o.facets.iter().all(|h| h.side(p, &mut exact) == std::cmp::Ordering::Less)
        })
    }

    pub fn is_free(&self, p: &[f64; 3]) -> bool {
        self.in_hull(p) && !self.in_obstacle(p)
    }

    fn bbox_volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Uniform point in the hull's bounding box.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = if self.hi[k] > self.lo[k] { rng.gen_range(self.lo[k]..self.hi[k]) } else { self.lo[k] };
        }
        p
    }
}

/// Hit-or-miss estimate over the hull's bounding box.
pub fn monte_carlo_volume(region: &FeasibleRegion, samples: u64, seed: u64) -> VolumeEstimate {
    let classifier = RegionClassifier::new(region);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free = (0..samples).filter(|_| classifier.is_free(&classifier.sample(&mut rng))).count() as u64;
    let box_volume = classifier.bbox_volume();
    let frac = if samples == 0 { 0.0 } else { free as f64 / samples as f64 };
    let stderr = if samples == 0 { 0.0 } else { box_volume * (frac * (1.0 - frac) / samples as f64).sqrt() };
    VolumeEstimate { volume_mm3: box_volume * frac, stderr_mm3: stderr, samples, free, seed }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub samples: u64,
    pub feasible: u64,
    /// Feasible centers with at least one box corner outside the trunk.
    pub violations: u64,
}

/// `a + b` when the `f64` sum is exact.
fn exact_add(a: f64, b: f64) -> Option<f64> {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (err == 0.0).then_some(s)
}

/// Samples centers, keeps the free ones and checks all eight corners of the
/// eroded box against the trunk.
pub fn soundness_check(region: &FeasibleRegion, trunk: &TrunkModel, samples: u64, seed: u64) -> SoundnessReport {
    let classifier = RegionClassifier::new(region);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detour_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let half: Vec<Rational> = region.fit_extents.iter().map(|e| e / rational::int(2)).collect();
    let half_f: Option<Vec<f64>> = half
        .iter()
        .map(|h| {
            let f = rational::to_f64(h);
            (rational::from_f64(f).as_ref() == Some(h)).then_some(f)
        })
        .collect();
    let mesh = MeshInside::new(trunk);
    let mut report = SoundnessReport { samples, ..Default::default() };
    for _ in 0..samples {
        // on a dyadic grid the corner sums stay exact in f64
        let c = classifier.sample(&mut rng).map(|v| (v * 1024.0).round() / 1024.0);
        if !classifier.is_free(&c) {
            continue;
        }
        report.feasible += 1;
        let mut bad = false;
        for mask in 0..8 {
            let sign = |k: usize| if mask & (1 << k) != 0 { 1.0 } else { -1.0 };
            let float_corner = half_f.as_ref().and_then(|h| {
                Some([exact_add(c[0], sign(0) * h[0])?, exact_add(c[1], sign(1) * h[1])?, exact_add(c[2], sign(2) * h[2])?])
            });
            let query = match float_corner {
                Some(f) => Query::Float(f),
                None => {
                    let center = Point3::from_f64(c).expect("finite sample");
                    let offset = Point3::new(
                        &half[0] * rational::int(sign(0) as i64),
                        &half[1] * rational::int(sign(1) as i64),
                        &half[2] * rational::int(sign(2) as i64),
                    );
                    Query::Exact(&center + &offset)
                }
            };
            let inside = match (&mesh, trunk) {
                (Some(m), _) => m.contains(&query, &mut detour_rng),
                (None, _) => {
                    let p = match &query {
                        Query::Float(f) => Point3::from_f64(*f).expect("finite corner"),
                        Query::Exact(p) => p.clone(),
                    };
                    trunk.contains(&p)
                }
            };
            if !inside {
                bad = true;
                break;
            }
        }
        if bad {
            report.violations += 1;
        }
    }
    report
}
