//! Depth-first pattern enumeration with LP feasibility, separating-constraint
//! branching and a volume bound.

mod export;
mod pattern;

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{BoxType, Orientation};
use crate::freespace::FeasibleRegion;
use crate::geometry::Point3;
use crate::lp::{self, ExactOutcome, LpOutcome};
use crate::rational::{self, Rational};

pub use export::{packing_to_obj, write_obj};
pub use pattern::{branch, detect_intersections, Intersection, PartialPattern};
use pattern::{certify, detect_cached, Certificate, RegionCache};

/// Float intersections shallower than this are left to exact certification.
pub const DETECTION_TOL_MM: f64 = 1e-6;
/// Patterns remembered per root subtree for duplicate detection.
const SEEN_CAP: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("region {0} has no box type {1} in the catalog")]
    UnknownBox(String, String),
    #[error("no non-empty region to search")]
    NoRegions,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeOrder {
    #[default]
    DepthFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Seconds; `None` runs to exhaustion.
    pub time_limit: Option<f64>,
    pub order: NodeOrder,
    pub prune_enabled: bool,
    pub root_parallelism: usize,
    /// Stop after this many explored nodes.
    pub max_nodes: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { time_limit: None, order: NodeOrder::DepthFirst, prune_enabled: true, root_parallelism: 1, max_nodes: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    #[serde(rename = "box")]
    pub box_id: String,
    pub orientation: Orientation,
    pub center_mm: [f64; 3],
    /// Exact certified center.
    #[serde(with = "rational::serde_rational_vec")]
    pub center: Vec<Rational>,
    #[serde(with = "rational::serde_rational_vec")]
    pub extents: Vec<Rational>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_explored: u64,
    pub lp_calls: u64,
    pub exact_lp_calls: u64,
    pub numerical_failures: u64,
    pub pruned: u64,
    pub duplicates: u64,
    pub packings_certified: u64,
    pub box_box_branches: u64,
    pub box_obstacle_branches: u64,
    /// Branch nodes whose child count differed from 6 (box–box) or the facet count (box–obstacle).
    pub arity_violations: u64,
}

impl SearchStats {
    fn add(&mut self, o: &SearchStats) {
        self.nodes_explored += o.nodes_explored;
        self.lp_calls += o.lp_calls;
        self.exact_lp_calls += o.exact_lp_calls;
        self.numerical_failures += o.numerical_failures;
        self.pruned += o.pruned;
        self.duplicates += o.duplicates;
        self.packings_certified += o.packings_certified;
        self.box_box_branches += o.box_box_branches;
        self.box_obstacle_branches += o.box_obstacle_branches;
        self.arity_violations += o.arity_violations;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub seconds: f64,
    pub volume_dm3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub placements: Vec<Placement>,
    pub volume_dm3: f64,
    /// The time limit was reached; the search is incomplete.
    pub timed_out: bool,
    /// The node limit was reached; the search is incomplete.
    #[serde(default)]
    pub node_limit_hit: bool,
    pub wall_time_s: f64,
    pub stats: SearchStats,
    /// Best-so-far volume over wall time.
    pub trace: Vec<TracePoint>,
}

impl PackingResult {
    pub fn empty() -> Self {
        PackingResult {
            placements: Vec::new(),
            volume_dm3: 0.0,
            timed_out: false,
            node_limit_hit: false,
            wall_time_s: 0.0,
            stats: SearchStats::default(),
            trace: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("packing serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Exact placed volume in mm³.
    pub fn volume_mm3(&self) -> Rational {
        self.placements.iter().map(|p| p.extents.iter().product::<Rational>()).sum()
    }
}

/// Placed volume plus, for every box type, its remaining count times its volume.
pub fn upper_bound(placed: &[&BoxType], catalog: &[BoxType]) -> Rational {
    let placed_volume: Rational = placed.iter().map(|b| b.volume()).sum();
    let remaining: Rational = catalog
        .iter()
        .map(|t| {
            let used = placed.iter().filter(|b| b.id == t.id).count() as i64;
            t.volume() * rational::int((t.max_count as i64 - used).max(0))
        })
        .sum();
    placed_volume + remaining
}

/// Independent exact check of a packing against its regions: centers in
/// hulls, outside every obstacle interior, pairwise separated on some axis,
/// and counts within the catalog limits.
pub fn validate_packing(result: &PackingResult, regions: &[FeasibleRegion], catalog: &[BoxType]) -> Result<(), String> {
    let mut pts = Vec::new();
    for (n, p) in result.placements.iter().enumerate() {
        let region = regions
            .iter()
            .find(|r| r.box_id == p.box_id && r.orientation == p.orientation)
            .ok_or_else(|| format!("placement {n}: no region {}_{}", p.box_id, p.orientation))?;
        if p.extents.as_slice() != region.extents.as_slice() || p.center.len() != 3 {
            return Err(format!("placement {n}: extents do not match region"));
        }
        let c = Point3::new(p.center[0].clone(), p.center[1].clone(), p.center[2].clone());
        if !region.hull.contains(&c) {
            return Err(format!("placement {n}: center outside hull"));
        }
        if let Some(o) = region.obstacles.iter().find(|o| o.contains_strictly(&c)) {
            return Err(format!("placement {n}: center inside obstacle {}", o.id));
        }
        pts.push((c, &p.extents));
    }
    let two = rational::int(2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let separated = (0..3).any(|k| {
                rational::abs(&(&pts[i].0[k] - &pts[j].0[k])) >= (&pts[i].1[k] + &pts[j].1[k]) / &two
            });
            if !separated {
                return Err(format!("placements {i} and {j} overlap"));
            }
        }
    }
    for t in catalog {
        let used = result.placements.iter().filter(|p| p.box_id == t.id).count();
        if used > t.max_count as usize {
            return Err(format!("{} boxes of type {} exceed the limit {}", used, t.id, t.max_count));
        }
    }
    if result.placements.iter().any(|p| !catalog.iter().any(|t| t.id == p.box_id)) {
        return Err("placement of a box type missing from the catalog".into());
    }
    Ok(())
}

struct Best {
    volume: Rational,
    placements: Vec<Placement>,
    trace: Vec<TracePoint>,
}

struct Shared<'a> {
    regions: &'a [FeasibleRegion],
    cache: RegionCache,
    /// Catalog index of each region's box type.
    type_of: Vec<usize>,
    catalog: &'a [BoxType],
    /// Regions in canonical order.
    order: Vec<usize>,
    /// Position of each region in `order`.
    rank: Vec<usize>,
    volume_of: Vec<Rational>,
    config: &'a SearchConfig,
    start: Instant,
    deadline: Option<Instant>,
    nodes: AtomicU64,
    stop: AtomicBool,
    timed_out: AtomicBool,
    node_limit_hit: AtomicBool,
    best: Mutex<Best>,
}

struct Worker<'a, 'b> {
    shared: &'b Shared<'a>,
    stats: SearchStats,
    seen: HashSet<Vec<u64>>,
}

impl Shared<'_> {
    fn best_volume(&self) -> Rational {
        self.best.lock().expect("best lock").volume.clone()
    }

    /// Bound using only box types that can still follow the last placement.
    fn bound(&self, p: &PartialPattern) -> Rational {
        let placed: Rational = p.placements.iter().map(|&r| self.volume_of[r].clone()).sum();
        let last_rank = p.placements.last().map_or(0, |&r| self.rank[r]);
        let mut allowed = vec![false; self.catalog.len()];
        for &r in &self.order[last_rank..] {
            allowed[self.type_of[r]] = true;
        }
        let remaining: Rational = self
            .catalog
            .iter()
            .enumerate()
            .filter(|(t, _)| allowed[*t])
            .map(|(t, bt)| {
                let used = p.placements.iter().filter(|&&r| self.type_of[r] == t).count() as i64;
                bt.volume() * rational::int((bt.max_count as i64 - used).max(0))
            })
            .sum();
        placed + remaining
    }

    fn record(&self, p: &PartialPattern, centers: &[[Rational; 3]]) {
        let volume: Rational = p.placements.iter().map(|&r| self.volume_of[r].clone()).sum();
        let mut best = self.best.lock().expect("best lock");
        if volume <= best.volume {
            return;
        }
        best.placements = p
            .placements
            .iter()
            .zip(centers)
            .map(|(&r, c)| {
                let region = &self.regions[r];
                Placement {
                    box_id: region.box_id.clone(),
                    orientation: region.orientation,
                    center_mm: [rational::to_f64(&c[0]), rational::to_f64(&c[1]), rational::to_f64(&c[2])],
                    center: c.to_vec(),
                    extents: region.extents.to_vec(),
                }
            })
            .collect();
        let volume_dm3 = rational::to_f64(&volume) / 1e6;
        best.volume = volume;
        best.trace.push(TracePoint { seconds: self.start.elapsed().as_secs_f64(), volume_dm3 });
    }

    fn should_stop(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return true;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out.store(true, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
            return true;
        }
        if self.config.max_nodes.is_some_and(|m| self.nodes.load(Ordering::Relaxed) >= m) {
            self.node_limit_hit.store(true, Ordering::Relaxed);
            self.stop.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }
}

impl Worker<'_, '_> {
    fn explore(&mut self, p: PartialPattern) {
        let s = self.shared;
        if s.should_stop() {
            return;
        }
        if s.config.prune_enabled && s.bound(&p) <= s.best_volume() {
            self.stats.pruned += 1;
            return;
        }
        if let Some(key) = p.canonical_key() {
            if self.seen.len() >= SEEN_CAP {
                self.seen.clear();
            }
            if !self.seen.insert(key) {
                self.stats.duplicates += 1;
                return;
            }
        }
        s.nodes.fetch_add(1, Ordering::Relaxed);
        self.stats.nodes_explored += 1;

        let program = lp::build_lp(&p.placements, s.regions, &p.bb, &p.bo).expect("pattern references are valid");
        self.stats.lp_calls += 1;
        let float_centers = match lp::solve(&program) {
            LpOutcome::Infeasible => return,
            LpOutcome::Feasible { centers, .. } => Some(centers),
            LpOutcome::NumericalFailure => {
                self.stats.numerical_failures += 1;
                None
            }
        };
        if let Some(centers) = &float_centers {
            let found = detect_cached(centers, &p, &s.cache, DETECTION_TOL_MM);
            if !found.is_empty() {
                self.branch_on(&p, &found);
                return;
            }
            let exact: Option<Vec<[Rational; 3]>> = centers
                .iter()
                .map(|c| Some([rational::from_f64(c[0])?, rational::from_f64(c[1])?, rational::from_f64(c[2])?]))
                .collect();
            if let Some(exact) = exact {
                if let Certificate::Valid = certify(&exact, &p, s.regions) {
                    self.accept(&p, &exact);
                    return;
                }
            }
        }
        // the float answer is missing or not exactly valid; settle it in rational arithmetic
        self.stats.exact_lp_calls += 1;
        match program.solve_exact() {
            ExactOutcome::Infeasible => {}
            ExactOutcome::Feasible { centers, .. } => match certify(&centers, &p, s.regions) {
                Certificate::Valid => self.accept(&p, &centers),
                Certificate::Intersections(found) => self.branch_on(&p, &found),
                Certificate::OutsideHull => unreachable!("exact LP solution satisfies the hull rows"),
            },
        }
    }

    fn branch_on(&mut self, p: &PartialPattern, found: &[Intersection]) {
        let children = branch(p, found, self.shared.regions);
        match &found[0] {
            Intersection::BoxBox { .. } => {
                self.stats.box_box_branches += 1;
                if children.len() != 6 {
                    self.stats.arity_violations += 1;
                }
            }
            Intersection::BoxObstacle { i, obstacle, .. } => {
                self.stats.box_obstacle_branches += 1;
                let region = &self.shared.regions[p.placements[*i]];
                let facets = region.obstacles.iter().find(|o| o.id == *obstacle).map_or(0, |o| o.facets().len());
                if children.len() != facets {
                    self.stats.arity_violations += 1;
                }
            }
        }
        for child in children {
            self.explore(child);
        }
    }

    fn accept(&mut self, p: &PartialPattern, centers: &[[Rational; 3]]) {
        let s = self.shared;
        self.stats.packings_certified += 1;
        s.record(p, centers);
        let last_rank = p.placements.last().map_or(0, |&r| s.rank[r]);
        for &r in &s.order[last_rank..] {
            let t = s.type_of[r];
            let used = p.placements.iter().filter(|&&q| s.type_of[q] == t).count();
            if used < s.catalog[t].max_count as usize {
                self.explore(p.with_box(r));
            }
        }
    }
}

/// Searches all roots to exhaustion or until the time or node limit.
pub fn enumerate(regions: &[FeasibleRegion], catalog: &[BoxType], config: &SearchConfig) -> Result<PackingResult, SearchError> {
    if regions.is_empty() {
        return Err(SearchError::NoRegions);
    }
    if config.time_limit.is_some_and(|t| !(t > 0.0)) {
        return Err(SearchError::InvalidConfig("time_limit must be positive".into()));
    }
    if config.root_parallelism == 0 {
        return Err(SearchError::InvalidConfig("root_parallelism must be at least 1".into()));
    }
    let type_of: Vec<usize> = regions
        .iter()
        .map(|r| {
            catalog
                .iter()
                .position(|t| t.id == r.box_id)
                .ok_or_else(|| SearchError::UnknownBox(r.key(), r.box_id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let volume_of: Vec<Rational> = regions.iter().map(|r| r.extents.iter().product()).collect();
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by(|&a, &b| {
        volume_of[b]
            .cmp(&volume_of[a])
            .then_with(|| regions[a].box_id.cmp(&regions[b].box_id))
            .then_with(|| regions[a].orientation.index().cmp(&regions[b].orientation.index()))
    });
    let mut rank = vec![0; regions.len()];
    for (k, &r) in order.iter().enumerate() {
        rank[r] = k;
    }
    let start = Instant::now();
    let shared = Shared {
        regions,
        cache: RegionCache::new(regions),
        type_of,
        catalog,
        order,
        rank,
        volume_of,
        config,
        start,
        deadline: config.time_limit.map(|t| start + Duration::from_secs_f64(t)),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        timed_out: AtomicBool::new(false),
        node_limit_hit: AtomicBool::new(false),
        best: Mutex::new(Best { volume: rational::int(0), placements: Vec::new(), trace: Vec::new() }),
    };
    let roots: Vec<usize> = shared
        .order
        .iter()
        .copied()
        .filter(|&r| catalog[shared.type_of[r]].max_count > 0)
        .collect();
    let run_root = |r: usize| {
        let mut w = Worker { shared: &shared, stats: SearchStats::default(), seen: HashSet::new() };
        w.explore(PartialPattern::root(r));
        w.stats
    };
    let per_root: Vec<SearchStats> = if config.root_parallelism == 1 {
        roots.iter().map(|&r| run_root(r)).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.root_parallelism)
            .build()
            .map_err(|e| SearchError::InvalidConfig(e.to_string()))?;
        pool.install(|| roots.par_iter().map(|&r| run_root(r)).collect())
    };
    let mut stats = SearchStats::default();
    for s in &per_root {
        stats.add(s);
    }
    let best = shared.best.into_inner().expect("best lock");
    Ok(PackingResult {
        volume_dm3: rational::to_f64(&best.volume) / 1e6,
        placements: best.placements,
        timed_out: shared.timed_out.load(Ordering::Relaxed),
        node_limit_hit: shared.node_limit_hit.load(Ordering::Relaxed),
        wall_time_s: start.elapsed().as_secs_f64(),
        stats,
        trace: best.trace,
    })
}
