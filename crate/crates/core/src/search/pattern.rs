//! Partial patterns, intersection detection and branching.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::freespace::FeasibleRegion;
use crate::lp::{AxisOrder, BoxBoxConstraint, BoxObstacleConstraint};
use crate::rational::{self, Rational};

/// Placed boxes (as region indices) plus the separating constraints chosen so far.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PartialPattern {
    pub placements: Vec<usize>,
    pub bb: Vec<BoxBoxConstraint>,
    pub bo: Vec<BoxObstacleConstraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Intersection {
    BoxBox { i: usize, j: usize, overlap: f64 },
    BoxObstacle { i: usize, obstacle: usize, depth: f64 },
}

impl PartialPattern {
    pub fn root(region: usize) -> Self {
        PartialPattern { placements: vec![region], ..Default::default() }
    }

    pub fn has_bb(&self, i: usize, j: usize) -> bool {
        self.bb.iter().any(|c| (c.i == i && c.j == j) || (c.i == j && c.j == i))
    }

    pub fn has_bo(&self, i: usize, obstacle: usize) -> bool {
        self.bo.iter().any(|c| c.i == i && c.obstacle == obstacle)
    }

    pub fn with_box(&self, region: usize) -> Self {
        let mut p = self.clone();
        p.placements.push(region);
        p
    }

    /// Key that is equal for patterns differing only by a relabeling of boxes
    /// placed from the same region. `None` when too many relabelings exist.
    pub fn canonical_key(&self) -> Option<Vec<u64>> {
        let n = self.placements.len();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &r) in self.placements.iter().enumerate() {
            groups.entry(r).or_default().push(i);
        }
        let count: usize = groups.values().map(|g| (1..=g.len()).product::<usize>()).product();
        if count > 5040 {
            return None;
        }
        let mut best: Option<Vec<u64>> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        let group_list: Vec<Vec<usize>> = groups.into_values().collect();
        permute_groups(&group_list, 0, &mut perm, &mut |perm| {
            let key = self.key_under(perm);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        });
        best
    }

    fn key_under(&self, perm: &[usize]) -> Vec<u64> {
        let mut bb: Vec<(usize, usize, usize, u8)> = self
            .bb
            .iter()
            .map(|c| {
                let (a, b) = (perm[c.i], perm[c.j]);
                let first_is_i = c.order == AxisOrder::IBeforeJ;
                // store as (low, high, axis, low comes first)
                if a < b {
                    (a, b, c.axis, first_is_i as u8)
                } else {
                    (b, a, c.axis, !first_is_i as u8)
                }
            })
            .collect();
        bb.sort_unstable();
        let mut bo: Vec<(usize, usize, usize)> = self.bo.iter().map(|c| (perm[c.i], c.obstacle, c.facet)).collect();
        bo.sort_unstable();
        let mut key: Vec<u64> = self.placements.iter().map(|&r| r as u64).collect();
        key.push(u64::MAX);
        for (a, b, axis, o) in bb {
            key.extend([a as u64, b as u64, axis as u64, o as u64]);
        }
        key.push(u64::MAX);
        for (i, o, f) in bo {
            key.extend([i as u64, o as u64, f as u64]);
        }
        key
    }
}

fn permute_groups(groups: &[Vec<usize>], g: usize, perm: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        visit(perm);
        return;
    }
    let members = &groups[g];
    let mut targets = members.clone();
    heap_permutations(&mut targets, members.len(), &mut |t| {
        for (src, dst) in members.iter().zip(t) {
            perm[*src] = *dst;
        }
        permute_groups(groups, g + 1, perm, visit);
    });
}

fn heap_permutations(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k <= 1 {
        visit(items);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(items, k - 1, visit);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    heap_permutations(items, k - 1, visit);
}

/// Float copies of every obstacle's separating facets, unit-normalized.
pub(crate) struct RegionCache {
    pub obstacles: Vec<Vec<CachedObstacle>>,
    pub extents: Vec<[f64; 3]>,
}

pub(crate) struct CachedObstacle {
    pub id: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub facets: Vec<([f64; 3], f64)>,
}

impl RegionCache {
    pub fn new(regions: &[FeasibleRegion]) -> Self {
        let obstacles = regions
            .iter()
            .map(|r| {
                r.obstacles
                    .iter()
                    .map(|o| {
                        let (lo, hi) = o.polytope().bounds();
                        CachedObstacle {
                            id: o.id,
                            lo: lo.to_f64().map(|v| v - 1e-6),
                            hi: hi.to_f64().map(|v| v + 1e-6),
                            facets: o.facets().iter().map(|h| h.to_f64_unit()).collect(),
                        }
                    })
                    .collect()
            })
            .collect();
        let extents = regions.iter().map(|r| r.extents.clone().map(|e| rational::to_f64(&e))).collect();
        RegionCache { obstacles, extents }
    }
}

fn sort_records(out: &mut [Intersection]) {
    out.sort_by(|a, b| match (a, b) {
        (Intersection::BoxBox { i, j, overlap }, Intersection::BoxBox { i: i2, j: j2, overlap: o2 }) => {
            o2.total_cmp(overlap).then((i, j).cmp(&(i2, j2)))
        }
        (Intersection::BoxObstacle { i, obstacle, depth }, Intersection::BoxObstacle { i: i2, obstacle: o2, depth: d2 }) => {
            d2.total_cmp(depth).then((i, obstacle).cmp(&(i2, o2)))
        }
        (Intersection::BoxBox { .. }, _) => std::cmp::Ordering::Less,
        _ => std::cmp::Ordering::Greater,
    });
}

/// Intersections deeper than `tol` among pairs without a constraint, box–box
/// records first, each kind sorted by decreasing measure.
pub(crate) fn detect_cached(
    centers: &[[f64; 3]],
    pattern: &PartialPattern,
    cache: &RegionCache,
    tol: f64,
) -> Vec<Intersection> {
    let mut out = Vec::new();
    let n = centers.len();
    for i in 0..n {
        for j in i + 1..n {
            if pattern.has_bb(i, j) {
                continue;
            }
            let (ei, ej) = (&cache.extents[pattern.placements[i]], &cache.extents[pattern.placements[j]]);
            let mut overlap = 1.0;
            for k in 0..3 {
                let o = (ei[k] + ej[k]) / 2.0 - (centers[i][k] - centers[j][k]).abs();
                if o <= tol {
                    overlap = 0.0;
                    break;
                }
                overlap *= o.min(ei[k]).min(ej[k]);
            }
            if overlap > 0.0 {
                out.push(Intersection::BoxBox { i, j, overlap });
            }
        }
    }
    for (i, c) in centers.iter().enumerate() {
        for o in &cache.obstacles[pattern.placements[i]] {
            if pattern.has_bo(i, o.id) || (0..3).any(|k| c[k] < o.lo[k] || c[k] > o.hi[k]) {
                continue;
            }
            let depth = o
                .facets
                .iter()
                .map(|(n, d)| d - (n[0] * c[0] + n[1] * c[1] + n[2] * c[2]))
                .fold(f64::INFINITY, f64::min);
            if depth > tol {
                out.push(Intersection::BoxObstacle { i, obstacle: o.id, depth });
            }
        }
    }
    sort_records(&mut out);
    out
}

/// Float detection; `tol = 0` applies the strict interior rule.
pub fn detect_intersections(
    centers: &[[f64; 3]],
    pattern: &PartialPattern,
    regions: &[FeasibleRegion],
    tol: f64,
) -> Vec<Intersection> {
    detect_cached(centers, pattern, &RegionCache::new(regions), tol)
}

/// Exact outcome for rational centers.
pub(crate) enum Certificate {
    Valid,
    /// Some center lies outside its hull.
    OutsideHull,
    Intersections(Vec<Intersection>),
}

/// Exact check of a full assignment over all pairs, constrained or not.
pub(crate) fn certify(centers: &[[Rational; 3]], pattern: &PartialPattern, regions: &[FeasibleRegion]) -> Certificate {
    let pts: Vec<crate::geometry::Point3> = centers
        .iter()
        .map(|c| crate::geometry::Point3::new(c[0].clone(), c[1].clone(), c[2].clone()))
        .collect();
    for (i, p) in pts.iter().enumerate() {
        if !regions[pattern.placements[i]].hull.contains(p) {
            return Certificate::OutsideHull;
        }
    }
    let mut out = Vec::new();
    let two = rational::int(2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (ei, ej) = (&regions[pattern.placements[i]].extents, &regions[pattern.placements[j]].extents);
            let mut overlap = 1.0;
            for k in 0..3 {
                let o = (&ei[k] + &ej[k]) / &two - (&pts[i][k] - &pts[j][k]).abs();
                if !o.is_positive() {
                    overlap = 0.0;
                    break;
                }
                overlap *= rational::to_f64(&o).max(f64::MIN_POSITIVE);
            }
            if overlap > 0.0 {
                out.push(Intersection::BoxBox { i, j, overlap });
            }
        }
    }
    for (i, p) in pts.iter().enumerate() {
        for o in &regions[pattern.placements[i]].obstacles {
            if o.contains_strictly(p) {
                let depth = o
                    .facets()
                    .iter()
                    .map(|h| {
                        let (n, d) = h.to_f64_unit();
                        let c = p.to_f64();
                        d - (n[0] * c[0] + n[1] * c[1] + n[2] * c[2])
                    })
                    .fold(f64::INFINITY, f64::min)
                    .max(f64::MIN_POSITIVE);
                out.push(Intersection::BoxObstacle { i, obstacle: o.id, depth });
            }
        }
    }
    if out.is_empty() {
        Certificate::Valid
    } else {
        sort_records(&mut out);
        Certificate::Intersections(out)
    }
}

/// Children for the first (largest) record: six axis orders for a box pair,
/// or one child per separating facet of the obstacle.
pub fn branch(pattern: &PartialPattern, intersections: &[Intersection], regions: &[FeasibleRegion]) -> Vec<PartialPattern> {
    match intersections.first() {
        None => Vec::new(),
        Some(Intersection::BoxBox { i, j, .. }) => {
            let mut out = Vec::with_capacity(6);
            for axis in 0..3 {
                for order in [AxisOrder::IBeforeJ, AxisOrder::JBeforeI] {
                    let mut child = pattern.clone();
                    child.bb.push(BoxBoxConstraint { i: *i, j: *j, axis, order });
                    out.push(child);
                }
            }
            out
        }
        Some(Intersection::BoxObstacle { i, obstacle, .. }) => {
            let region = &regions[pattern.placements[*i]];
            let o = region.obstacles.iter().find(|o| o.id == *obstacle).expect("obstacle of the box's region");
            (0..o.facets().len())
                .map(|facet| {
                    let mut child = pattern.clone();
                    child.bo.push(BoxObstacleConstraint { i: *i, obstacle: *obstacle, facet });
                    child
                })
                .collect()
        }
    }
}
