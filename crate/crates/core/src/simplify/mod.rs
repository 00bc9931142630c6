//! Obstacle simplification that only ever shrinks the free set.
//!
//! Merging replaces two touching obstacles by the convex hull of both when
//! the hull adds little volume over the bookkept union. Dropping removes an
//! obstacle facet when the enlarged obstacle reaches at most a given
//! distance past it.

mod report;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::freespace::{FeasibleRegion, Obstacle};
use crate::geometry::{convex_hull, intersect_halfspaces, maximize_over, polytopes_touch, ConvexPolytope, Halfspace};
use crate::rational::{self, Rational};

pub use report::{
    drop_sweep_text, merge_sweep_csv, merge_sweep_text, simplification_report, simplification_report_csv,
    simplification_report_text, DropSweep, MergeSweep, SimplificationReport,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeParams {
    /// Allowed relative growth X in percent of the bookkept base volume.
    #[serde(with = "rational::serde_rational")]
    pub rel_bound: Rational,
    /// Allowed absolute growth Y in mm³.
    #[serde(with = "rational::serde_rational")]
    pub abs_bound: Rational,
    pub rng_seed: u64,
}

impl MergeParams {
    /// Exact parameters from `f64` inputs; `None` for negative or non-finite values.
    pub fn new(rel_bound_pct: f64, abs_bound_mm3: f64, rng_seed: u64) -> Option<Self> {
        let rel_bound = rational::from_f64(rel_bound_pct).filter(|v| *v >= rational::int(0))?;
        let abs_bound = rational::from_f64(abs_bound_mm3).filter(|v| *v >= rational::int(0))?;
        Some(MergeParams { rel_bound, abs_bound, rng_seed })
    }

    /// Growth is acceptable when within Y or within X% of the base.
    pub fn accepts(&self, growth: &Rational, base: &Rational) -> bool {
        *growth <= self.abs_bound || growth * rational::int(100) <= &self.rel_bound * base
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergedObstacle {
    pub obstacle: Obstacle,
    /// Bookkept volume of the union of the members.
    pub base_volume: Rational,
    pub member_ids: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeLogEntry {
    pub region: String,
    pub merged: [usize; 2],
    pub new_id: usize,
    pub members: Vec<usize>,
    #[serde(with = "rational::serde_rational")]
    pub base_volume: Rational,
    #[serde(with = "rational::serde_rational")]
    pub hull_volume: Rational,
    #[serde(with = "rational::serde_rational")]
    pub growth: Rational,
    /// The pairwise union estimate fell below a member's base and was raised to it.
    pub base_clamped: bool,
    pub facets_before: usize,
    pub facets_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropDecision {
    Dropped,
    Rejected,
    /// Dropping would leave the obstacle without facets, forbidding the whole hull.
    LastFacet,
    LpFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropLogEntry {
    pub region: String,
    pub obstacle: usize,
    pub facet: Halfspace,
    /// Largest distance of the enlarged obstacle past the facet, in mm.
    pub growth_mm: Option<f64>,
    pub decision: DropDecision,
}

/// Hull of the two obstacles' vertices, or `None` if it is not solid.
fn merged_hull(a: &Obstacle, b: &Obstacle) -> Option<ConvexPolytope> {
    let pts: Vec<_> = a.polytope().vertices().iter().chain(b.polytope().vertices()).cloned().collect();
    convex_hull(&pts).ok()
}

fn overlap_volume(a: &Obstacle, b: &Obstacle, hull: &ConvexPolytope) -> Rational {
    let hs: Vec<Halfspace> = a.polytope().halfspaces().iter().chain(b.polytope().halfspaces()).cloned().collect();
    intersect_halfspaces(&hs, hull).solid().map_or_else(|| rational::int(0), |p| p.volume())
}

/// Repeated sweeps over touching pairs in seeded random order until no pair
/// qualifies. A merge must also lower the pair's facet count.
pub fn merge_obstacles(region: &FeasibleRegion, params: &MergeParams) -> (FeasibleRegion, Vec<MergeLogEntry>) {
    let hull = &region.hull;
    let mut items: Vec<Option<MergedObstacle>> = region
        .obstacles
        .iter()
        .map(|o| {
            Some(MergedObstacle { obstacle: o.clone(), base_volume: o.volume(), member_ids: BTreeSet::from([o.id]) })
        })
        .collect();
    let mut next_id = region.obstacles.iter().map(|o| o.id + 1).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut log = Vec::new();
    // pairs already rejected stay rejected while both members are unchanged
    let mut rejected: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        let alive: Vec<usize> = (0..items.len()).filter(|&i| items[i].is_some()).collect();
        let mut pairs = Vec::new();
        for (n, &i) in alive.iter().enumerate() {
            for &j in &alive[n + 1..] {
                let (a, b) = (items[i].as_ref().unwrap(), items[j].as_ref().unwrap());
                if rejected.contains(&(a.obstacle.id, b.obstacle.id)) {
                    continue;
                }
                if polytopes_touch(a.obstacle.polytope(), b.obstacle.polytope()) {
                    pairs.push((i, j));
                } else {
                    rejected.insert((a.obstacle.id, b.obstacle.id));
                }
            }
        }
        pairs.shuffle(&mut rng);
        let mut merged_any = false;
        let mut changed = vec![false; items.len()];
        for (i, j) in pairs {
            if changed[i] || changed[j] {
                continue;
            }
            let (Some(a), Some(b)) = (&items[i], &items[j]) else { continue };
            let key = (a.obstacle.id, b.obstacle.id);
            let Some(h) = merged_hull(&a.obstacle, &b.obstacle) else {
                rejected.insert(key);
                continue;
            };
            let candidate = Obstacle::from_clipped(next_id, h, hull);
            let facets_before = a.obstacle.facets().len() + b.obstacle.facets().len();
            if candidate.facets().len() >= facets_before || candidate.covers_hull() {
                rejected.insert(key);
                continue;
            }
            let raw_base = &a.base_volume + &b.base_volume - overlap_volume(&a.obstacle, &b.obstacle, hull);
            let floor = std::cmp::max(&a.base_volume, &b.base_volume).clone();
            let base_clamped = raw_base < floor;
            let base = if base_clamped { floor } else { raw_base };
            let hull_volume = candidate.volume();
            let growth = &hull_volume - &base;
            if !params.accepts(&growth, &base) {
                rejected.insert(key);
                continue;
            }
            let members: BTreeSet<usize> = a.member_ids.union(&b.member_ids).copied().collect();
            log.push(MergeLogEntry {
                region: region.key(),
                merged: [a.obstacle.id, b.obstacle.id],
                new_id: next_id,
                members: members.iter().copied().collect(),
                base_volume: base.clone(),
                hull_volume,
                growth,
                base_clamped,
                facets_before,
                facets_after: candidate.facets().len(),
            });
            items[i] = Some(MergedObstacle { obstacle: candidate, base_volume: base, member_ids: members });
            items[j] = None;
            changed[i] = true;
            changed[j] = true;
            next_id += 1;
            merged_any = true;
        }
        if !merged_any {
            break;
        }
    }
    let mut out = region.clone();
    out.obstacles = items.into_iter().flatten().map(|m| m.obstacle).collect();
    out.volume = None;
    (out, log)
}

/// Exact growth test `(max - d) / |n| <= bound` for facet `f` over `system ∩ hull`.
/// `Err` when the system is empty.
fn growth_within(
    f: &Halfspace,
    system: &[Halfspace],
    hull: &ConvexPolytope,
    bound: &Rational,
) -> Result<(bool, f64), ()> {
    let (max, _) = maximize_over(system, hull, &f.normal).ok_or(())?;
    let excess = max - &f.offset;
    let norm2 = f.normal.norm_squared();
    let growth = rational::to_f64(&excess) / rational::to_f64(&norm2).sqrt();
    if excess <= rational::int(0) {
        return Ok((true, growth.max(0.0)));
    }
    Ok((&excess * &excess <= bound * bound * norm2, growth))
}

/// Largest distance past `f` reached by `facets ∩ hull`, in mm.
pub fn facet_growth(f: &Halfspace, facets: &[Halfspace], hull: &ConvexPolytope) -> Option<f64> {
    growth_within(f, facets, hull, &rational::int(0)).ok().map(|(_, g)| g.max(0.0))
}

fn facet_area(o: &Obstacle, f: &Halfspace) -> Rational {
    match o.polytope().halfspaces().binary_search(f) {
        Ok(i) => o.polytope().facet_area_squared(i),
        Err(_) => rational::int(0),
    }
}

/// Drops obstacle facets whose removal grows the obstacle by at most
/// `max_growth_mm` past every facet dropped so far. Candidates go by
/// ascending facet area, obstacles by id.
pub fn drop_facets(region: &FeasibleRegion, max_growth_mm: f64) -> (FeasibleRegion, Vec<DropLogEntry>) {
    let bound = rational::from_f64(max_growth_mm.max(0.0)).unwrap_or_else(|| rational::int(0));
    let hull = &region.hull;
    let mut log = Vec::new();
    let mut obstacles = Vec::with_capacity(region.obstacles.len());
    let mut order: Vec<&Obstacle> = region.obstacles.iter().collect();
    order.sort_by_key(|o| o.id);
    for original in order {
        let mut current = original.clone();
        let mut dropped: Vec<Halfspace> = Vec::new();
        'restart: loop {
            let mut candidates: Vec<(Rational, Halfspace)> =
                current.facets().iter().map(|f| (facet_area(&current, f), f.clone())).collect();
            candidates.sort();
            for (_, f) in candidates {
                let remaining: Vec<Halfspace> = current.facets().iter().filter(|h| **h != f).cloned().collect();
                let entry = |growth_mm, decision| DropLogEntry {
                    region: region.key(),
                    obstacle: current.id,
                    facet: f.clone(),
                    growth_mm,
                    decision,
                };
                if remaining.is_empty() {
                    log.push(entry(None, DropDecision::LastFacet));
                    continue;
                }
                let own = growth_within(&f, &remaining, hull, &bound);
                let Ok((ok, growth)) = own else {
                    log.push(entry(None, DropDecision::LpFailure));
                    continue;
                };
                let earlier_ok = ok
                    && dropped.iter().all(|g| matches!(growth_within(g, &remaining, hull, &bound), Ok((true, _))));
                if !earlier_ok {
                    log.push(entry(Some(growth), DropDecision::Rejected));
                    continue;
                }
                let Some(next) = Obstacle::clip(current.id, &remaining, hull) else {
                    log.push(entry(Some(growth), DropDecision::LpFailure));
                    continue;
                };
                if next.covers_hull() {
                    log.push(entry(Some(growth), DropDecision::LastFacet));
                    continue;
                }
                log.push(entry(Some(growth), DropDecision::Dropped));
                dropped.push(f);
                current = next;
                continue 'restart;
            }
            break;
        }
        obstacles.push(current);
    }
    let mut out = region.clone();
    out.obstacles = obstacles;
    out.volume = None;
    (out, log)
}

/// JSON lines, one record per entry.
pub fn log_to_json_lines<T: Serialize>(entries: &[T]) -> String {
    entries.iter().map(|e| serde_json::to_string(e).expect("log entry serializes") + "\n").collect()
}
