//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Extra arguments filter criteria by substring.
//! `UPDATE_GOLDEN=1` rewrites the golden report files instead of comparing.

use std::collections::BTreeSet;
use std::panic;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trunkpack::catalog::{builtin_catalog, BoxType, Orientation, Phase};
use trunkpack::freespace::{
    compute_all_regions, compute_feasible_region, fatten_epsilon, region_report_csv, region_report_text,
    soundness_check, EmptyReason, FeasibleRegion, RegionClassifier, RegionOutcome, RegionRow, TrunkModel,
};
use trunkpack::geometry::{convex_hull, minkowski_sum_convex, ConvexPolytope, Point3, Triangle3};
use trunkpack::lp::{AxisOrder, BoxBoxConstraint, BoxObstacleConstraint};
use trunkpack::rational::{self, Rational};
use trunkpack::search::{
    branch, detect_intersections, enumerate, validate_packing, Intersection, PartialPattern, SearchConfig,
    DETECTION_TOL_MM,
};
use trunkpack::simplex::{solve_bounded, SimplexOutcome};
use trunkpack::simplify::{
    drop_facets, drop_sweep_text, merge_obstacles, merge_sweep_csv, merge_sweep_text, simplification_report_csv,
    simplification_report_text, DropDecision, DropLogEntry, DropSweep, MergeLogEntry, MergeParams, MergeSweep,
    SimplificationReport,
};

const C1_MAX_SECONDS: f64 = 60.0;
const C1_PAIRS: usize = 100;
const C1_DIRECTIONS: usize = 100;
const C2_TRUNKS: usize = 50;
const C2_MAX_SECONDS: f64 = 60.0;
const C3_FEASIBLE_SAMPLES: u64 = 100_000;
const C3_TRIANGLES: usize = 50;
const C3_MAX_SECONDS: f64 = 300.0;
const C4_REL_PCT: f64 = 80.0;
const C4_ABS_MM3: f64 = 100_000.0;
const C4_DROP_MM: f64 = 10.0;
const C4_SAMPLES: u64 = 100_000;
const C4_MAX_SECONDS: f64 = 300.0;
/// Slack for the floating-point LP re-solve of a drop, in mm.
const C5_LP_TOL_MM: f64 = 1e-6;
const C6_EXPECTED_DM3: f64 = 134.9;
const C6_TOL_DM3: f64 = 0.05;
const C6_MAX_SECONDS: f64 = 60.0;
const C7_GRID_MM: i64 = 10;
const C7_MAX_SECONDS: f64 = 1800.0;
const C9_MIN_NODES: u64 = 10_000;
const C9_BRANCH_CALLS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn int(v: i64) -> Rational {
    rational::int(v)
}

fn pt(x: i64, y: i64, z: i64) -> Point3 {
    Point3::from_ints(x, y, z)
}

fn axis_box(lo: [i64; 3], hi: [i64; 3]) -> ConvexPolytope {
    ConvexPolytope::axis_box(&pt(lo[0], lo[1], lo[2]), &pt(hi[0], hi[1], hi[2])).expect("solid box")
}

fn single_type(dims: [i64; 3], max_count: u32) -> Vec<BoxType> {
    vec![BoxType::new("T", dims.map(int), max_count, Phase::Primary).expect("valid box")]
}

fn regions(trunk: &TrunkModel, catalog: &[BoxType]) -> Vec<FeasibleRegion> {
    compute_all_regions(trunk, catalog, None)
        .expect("trunk is bounded")
        .into_iter()
        .filter_map(|(_, _, o)| o.region())
        .collect()
}

// ---------------------------------------------------------------- 1

fn c1_geometry() -> Outcome {
    let start = Instant::now();
    let corners: Vec<Point3> =
        (0..8).map(|m| pt((m & 1 != 0) as i64, (m & 2 != 0) as i64, (m & 4 != 0) as i64)).collect();
    let cube = convex_hull(&corners).expect("cube").volume();
    let simplex = convex_hull(&[pt(0, 0, 0), pt(1, 0, 0), pt(0, 1, 0), pt(0, 0, 1)]).expect("simplex").volume();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cloud = |rng: &mut ChaCha8Rng| -> Vec<Point3> {
        loop {
            let n = rng.gen_range(4..10);
            let pts: Vec<Point3> =
                (0..n).map(|_| pt(rng.gen_range(-40..=40), rng.gen_range(-40..=40), rng.gen_range(-40..=40))).collect();
            if convex_hull(&pts).is_ok() {
                return pts;
            }
        }
    };
    // support of a point set, straight from the definition
    let support = |pts: &[Point3], d: &Point3| pts.iter().map(|p| p.dot(d)).max().expect("non-empty");
    let mut violations = 0;
    let mut checks = 0;
    for _ in 0..C1_PAIRS {
        let (a, b) = (cloud(&mut rng), cloud(&mut rng));
        let sum = minkowski_sum_convex(&convex_hull(&a).unwrap(), &convex_hull(&b).unwrap()).expect("sum is solid");
        for _ in 0..C1_DIRECTIONS {
            let d = loop {
                let d = pt(rng.gen_range(-9..=9), rng.gen_range(-9..=9), rng.gen_range(-9..=9));
                if !d.is_zero() {
                    break d;
                }
            };
            checks += 1;
            let expected = support(&a, &d) + support(&b, &d);
            if sum.support(&d).ok() != Some(expected.clone()) || support(sum.vertices(), &d) != expected {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        cube == int(1) && simplex == rational::ratio(1, 6) && violations == 0 && secs < C1_MAX_SECONDS,
        format!(
            "cube {}, simplex {}, support violations {violations}/{checks}, {secs:.1}s",
            rational::format(&cube),
            rational::format(&simplex)
        ),
    )
}

// ---------------------------------------------------------------- 2

fn c2_erosion() -> Outcome {
    let start = Instant::now();
    let catalog = builtin_catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eps2 = fatten_epsilon() * int(2);
    let (mut regions_checked, mut empties, mut fattened, mut failures) = (0, 0, 0, Vec::new());
    for t in 0..C2_TRUNKS {
        let b = &catalog[rng.gen_range(0..catalog.len())];
        // some axes take a box dimension exactly to exercise tight fits
        let c: [i64; 3] = std::array::from_fn(|_| {
            if rng.gen_bool(0.25) {
                rational::to_f64(&b.dims[rng.gen_range(0..3)]) as i64
            } else {
                rng.gen_range(100..1300)
            }
        });
        let trunk = TrunkModel::convex(axis_box([0, 0, 0], c), vec![]).unwrap().model;
        let outer = trunk.outer_polytope().unwrap();
        for o in b.distinct_orientations() {
            let e = b.oriented_extents(o);
            let too_big = (0..3).any(|k| e[k] > int(c[k]));
            match compute_feasible_region(&trunk, &outer, b, o) {
                RegionOutcome::Empty(EmptyReason::HullEmpty) if too_big => empties += 1,
                RegionOutcome::Region(r) if !too_big => {
                    regions_checked += 1;
                    fattened += r.fattened as usize;
                    let (lo, hi) = r.hull.bounds();
                    for k in 0..3 {
                        let tight = e[k] == int(c[k]);
                        let fit = if tight { &e[k] - &eps2 } else { e[k].clone() };
                        let width = int(c[k]) - &fit;
                        if &hi[k] - &lo[k] != width || lo[k] != &fit / int(2) || r.fit_extents[k] != fit {
                            failures.push(format!("trunk {t} box {} {o} axis {k}", b.id));
                        }
                    }
                    if r.hull.halfspaces().len() != 6 || !r.obstacles.is_empty() {
                        failures.push(format!("trunk {t} box {} {o}: not a plain box", b.id));
                    }
                }
                _ => failures.push(format!("trunk {t} box {} {o}: wrong emptiness", b.id)),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < C2_MAX_SECONDS,
        format!(
            "{C2_TRUNKS} trunks, {regions_checked} exact hulls ({fattened} tight), {empties} empty, {} mismatches{}, {secs:.1}s",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------- 3

/// 1000 mm cube with a 150 x 150 x 300 pocket open at the top.
const POCKET_LO: [i64; 3] = [425, 425, 700];
const POCKET_HI: [i64; 3] = [575, 575, 1000];

/// Outward-facing quads of the notched cube; the first `fan` of them are
/// split into four triangles around their center, the rest into two.
fn notched_cube(fan: usize) -> Vec<Triangle3> {
    let (a, b) = (POCKET_LO, POCKET_HI);
    let p = |x: i64, y: i64, z: i64| pt(x, y, z);
    let s = 1000;
    let quads: Vec<[Point3; 4]> = vec![
        // pocket walls and floor
        [p(a[0], a[1], a[2]), p(a[0], b[1], a[2]), p(a[0], b[1], s), p(a[0], a[1], s)],
        [p(b[0], a[1], a[2]), p(b[0], a[1], s), p(b[0], b[1], s), p(b[0], b[1], a[2])],
        [p(a[0], a[1], a[2]), p(a[0], a[1], s), p(b[0], a[1], s), p(b[0], a[1], a[2])],
        [p(a[0], b[1], a[2]), p(b[0], b[1], a[2]), p(b[0], b[1], s), p(a[0], b[1], s)],
        [p(a[0], a[1], a[2]), p(b[0], a[1], a[2]), p(b[0], b[1], a[2]), p(a[0], b[1], a[2])],
        // outer faces except the top
        [p(0, 0, 0), p(0, s, 0), p(s, s, 0), p(s, 0, 0)],
        [p(0, 0, 0), p(s, 0, 0), p(s, 0, s), p(0, 0, s)],
        [p(0, s, 0), p(0, s, s), p(s, s, s), p(s, s, 0)],
        [p(0, 0, 0), p(0, 0, s), p(0, s, s), p(0, s, 0)],
        [p(s, 0, 0), p(s, s, 0), p(s, s, s), p(s, 0, s)],
        // top face around the pocket opening
        [p(0, 0, s), p(s, 0, s), p(b[0], a[1], s), p(a[0], a[1], s)],
        [p(s, 0, s), p(s, s, s), p(b[0], b[1], s), p(b[0], a[1], s)],
        [p(s, s, s), p(0, s, s), p(a[0], b[1], s), p(b[0], b[1], s)],
        [p(0, s, s), p(0, 0, s), p(a[0], a[1], s), p(a[0], b[1], s)],
    ];
    let mut tris = Vec::new();
    for (n, q) in quads.iter().enumerate() {
        if n < fan {
            let sum = &(&(&q[0] + &q[1]) + &q[2]) + &q[3];
            let c = sum.scale(&rational::ratio(1, 4));
            for k in 0..4 {
                tris.push(Triangle3::new(q[k].clone(), q[(k + 1) % 4].clone(), c.clone()));
            }
        } else {
            tris.push(Triangle3::new(q[0].clone(), q[1].clone(), q[2].clone()));
            tris.push(Triangle3::new(q[0].clone(), q[2].clone(), q[3].clone()));
        }
    }
    tris
}

fn notched_trunk() -> TrunkModel {
    let tris = notched_cube(11);
    assert_eq!(tris.len(), C3_TRIANGLES);
    TrunkModel::mesh(tris, pt(100, 100, 100)).expect("valid mesh").model
}

fn box_e() -> Vec<BoxType> {
    builtin_catalog().into_iter().filter(|b| b.id == "E").collect()
}

/// Closed membership in the notched cube.
fn in_notched(p: &[Rational; 3]) -> bool {
    let inside_cube = p.iter().all(|v| *v >= int(0) && *v <= int(1000));
    // the pocket is open at the top, so its top face belongs to the void
    let in_pocket = (0..2).all(|k| p[k] > int(POCKET_LO[k]) && p[k] < int(POCKET_HI[k])) && p[2] > int(POCKET_LO[2]);
    inside_cube && !in_pocket
}

/// Box interior misses the open pocket and the box lies in the cube.
fn box_in_notched(c: &[Rational; 3], e: &[Rational; 3]) -> bool {
    let half: Vec<Rational> = e.iter().map(|v| v / int(2)).collect();
    let lo: Vec<Rational> = (0..3).map(|k| &c[k] - &half[k]).collect();
    let hi: Vec<Rational> = (0..3).map(|k| &c[k] + &half[k]).collect();
    let in_cube = (0..3).all(|k| lo[k] >= int(0) && hi[k] <= int(1000));
    let hits_pocket = (0..3).all(|k| lo[k] < int(POCKET_HI[k]) && hi[k] > int(POCKET_LO[k]));
    in_cube && !hits_pocket
}

fn c3_soundness() -> Outcome {
    let start = Instant::now();
    let trunk = notched_trunk();
    let regs = regions(&trunk, &box_e());
    if regs.is_empty() {
        return outcome(false, "no feasible region");
    }
    let per_region = C3_FEASIBLE_SAMPLES.div_ceil(regs.len() as u64);
    let (mut feasible, mut corner_violations, mut box_violations, mut parity_violations) = (0u64, 0u64, 0u64, 0u64);
    let mut parity_feasible = 0;
    for (n, r) in regs.iter().enumerate() {
        let classifier = RegionClassifier::new(r);
        let mut rng = ChaCha8Rng::seed_from_u64(30 + n as u64);
        let mut found = 0;
        while found < per_region {
            let c = classifier.sample(&mut rng);
            if !classifier.is_free(&c) {
                continue;
            }
            found += 1;
            let c: [Rational; 3] = c.map(|v| rational::from_f64(v).expect("finite"));
            let bad_corner = (0..8).any(|m: usize| {
                let corner: [Rational; 3] = std::array::from_fn(|k| {
                    let h = &r.extents[k] / int(2);
                    if m & (1 << k) != 0 { &c[k] + h } else { &c[k] - h }
                });
                !in_notched(&corner)
            });
            corner_violations += bad_corner as u64;
            box_violations += !box_in_notched(&c, &r.extents) as u64;
        }
        feasible += found;
        // the library's own ray-parity sampler on an independent stream
        let mut samples = per_region;
        loop {
            let rep = soundness_check(r, &trunk, samples, 300 + n as u64);
            if rep.feasible >= per_region || samples > 64 * per_region {
                parity_feasible += rep.feasible;
                parity_violations += rep.violations;
                break;
            }
            samples *= 2;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        corner_violations == 0
            && box_violations == 0
            && parity_violations == 0
            && feasible >= C3_FEASIBLE_SAMPLES
            && parity_feasible >= C3_FEASIBLE_SAMPLES
            && secs < C3_MAX_SECONDS,
        format!(
            "{C3_TRIANGLES} triangles, {} regions; {feasible} feasible centers: {corner_violations} corner and \
             {box_violations} box violations; parity sampler {parity_violations}/{parity_feasible}; {secs:.1}s",
            regs.len()
        ),
    )
}

// ---------------------------------------------------------------- 4, 5

struct Simplified {
    before: Vec<FeasibleRegion>,
    after: Vec<FeasibleRegion>,
    merges: Vec<Vec<MergeLogEntry>>,
    drops: Vec<Vec<DropLogEntry>>,
    params: MergeParams,
    seconds: f64,
}

/// The notched cube for box E plus two L-shaped convex trunks.
fn simplification_inputs() -> Vec<FeasibleRegion> {
    let mut out = regions(&notched_trunk(), &box_e());
    let l = TrunkModel::convex(axis_box([0, 0, 0], [800, 600, 700]), vec![axis_box([400, 0, 350], [800, 600, 700])])
        .unwrap()
        .model;
    out.extend(regions(&l, &single_type([300, 250, 200], 4)));
    let step = TrunkModel::convex(
        axis_box([0, 0, 0], [900, 500, 600]),
        vec![axis_box([300, 0, 400], [900, 500, 600]), axis_box([600, 0, 200], [900, 500, 400])],
    )
    .unwrap()
    .model;
    out.extend(regions(&step, &single_type([250, 200, 150], 4)));
    out.extend(regions(&chamfered_trunk(), &single_type([300, 250, 200], 4)));
    out
}

/// Shell with a cavity whose lower inner edge is beveled by 6 mm.
fn chamfered_trunk() -> TrunkModel {
    let mut v = Vec::new();
    for y in [0, 600] {
        v.extend([pt(406, y, 350), pt(400, y, 356), pt(800, y, 350), pt(400, y, 700), pt(800, y, 700)]);
    }
    let cavity = convex_hull(&v).expect("solid cavity");
    TrunkModel::convex(axis_box([0, 0, 0], [800, 600, 700]), vec![cavity]).unwrap().model
}

fn simplified() -> &'static Simplified {
    static CELL: OnceLock<Simplified> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let params = MergeParams::new(C4_REL_PCT, C4_ABS_MM3, 4).unwrap();
        let before = simplification_inputs();
        let (mut after, mut merges, mut drops) = (Vec::new(), Vec::new(), Vec::new());
        for r in &before {
            let (m, mlog) = merge_obstacles(r, &params);
            let (d, dlog) = drop_facets(&m, C4_DROP_MM);
            after.push(d);
            merges.push(mlog);
            drops.push(dlog);
        }
        Simplified { before, after, merges, drops, params, seconds: start.elapsed().as_secs_f64() }
    })
}

fn c4_contractive() -> Outcome {
    let start = Instant::now();
    let s = simplified();
    let (mut widened, mut checked, mut not_shrunk) = (0u64, 0u64, 0usize);
    let (mut merges, mut drops) = (0, 0);
    for (n, (b, a)) in s.before.iter().zip(&s.after).enumerate() {
        let m = s.merges[n].len();
        let d = s.drops[n].iter().filter(|e| e.decision == DropDecision::Dropped).count();
        merges += m;
        drops += d;
        if m + d > 0 && a.facet_count() >= b.facet_count() {
            not_shrunk += 1;
        }
        let (cb, ca) = (RegionClassifier::new(b), RegionClassifier::new(a));
        let mut rng = ChaCha8Rng::seed_from_u64(40 + n as u64);
        for _ in 0..C4_SAMPLES {
            let p = cb.sample(&mut rng);
            checked += 1;
            if ca.is_free(&p) && !cb.is_free(&p) {
                let exact = Point3::from_f64(p).unwrap();
                widened += (a.is_free(&exact) && !b.is_free(&exact)) as u64 + 1;
            }
        }
    }
    let facets_before: usize = s.before.iter().map(|r| r.facet_count()).sum();
    let facets_after: usize = s.after.iter().map(|r| r.facet_count()).sum();
    let secs = s.seconds + start.elapsed().as_secs_f64();
    outcome(
        widened == 0 && not_shrunk == 0 && merges > 0 && drops > 0 && secs < C4_MAX_SECONDS,
        format!(
            "X={C4_REL_PCT}% Y={C4_ABS_MM3} mm3 drop {C4_DROP_MM} mm on {} regions: {merges} merges, {drops} drops, \
             facets {facets_before} -> {facets_after}; {widened} widened of {checked} samples; \
             {not_shrunk} regions logged without shrinking; {secs:.1}s",
            s.before.len()
        ),
    )
}

/// `max n·x` over `rows·x <= rhs` with free variables, by the floating simplex.
fn lp_max(rows: &[(Point3, Rational)], n: &Point3) -> Option<f64> {
    let a: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.to_f64().to_vec()).collect();
    let b: Vec<f64> = rows.iter().map(|(_, d)| rational::to_f64(d)).collect();
    match solve_bounded(&a, &b, &[None, None, None], &n.to_f64(), 10_000) {
        SimplexOutcome::Optimal { objective, .. } => Some(objective),
        _ => None,
    }
}

fn c5_bounds() -> Outcome {
    let s = simplified();
    let (x, y) = (&s.params.rel_bound, &s.params.abs_bound);
    let bound = C4_DROP_MM;
    let (mut merge_checked, mut merge_bad, mut drop_checked, mut drop_bad) = (0, 0, 0, 0);
    for (n, after) in s.after.iter().enumerate() {
        for e in &s.merges[n] {
            merge_checked += 1;
            let rule = e.growth <= *y || &e.growth * int(100) <= x * &e.base_volume;
            let consistent = e.growth == &e.hull_volume - &e.base_volume && e.facets_after < e.facets_before;
            merge_bad += !(rule && consistent) as usize;
        }
        for e in s.drops[n].iter().filter(|e| e.decision == DropDecision::Dropped) {
            drop_checked += 1;
            let Some(o) = after.obstacles.iter().find(|o| o.id == e.obstacle) else {
                drop_bad += 1;
                continue;
            };
            let rows: Vec<(Point3, Rational)> = o
                .facets()
                .iter()
                .chain(after.hull.halfspaces())
                .map(|h| (h.normal.clone(), h.offset.clone()))
                .collect();
            let norm = rational::to_f64(&e.facet.normal.norm_squared()).sqrt();
            let ok = match lp_max(&rows, &e.facet.normal) {
                Some(max) => {
                    let growth = (max - rational::to_f64(&e.facet.offset)) / norm;
                    growth <= bound + C5_LP_TOL_MM && e.growth_mm.is_some_and(|g| g <= bound)
                }
                None => false,
            };
            drop_bad += !ok as usize;
        }
    }
    outcome(
        merge_bad == 0 && drop_bad == 0 && merge_checked > 0 && drop_checked > 0,
        format!(
            "{merge_checked} merge entries ({merge_bad} violations), {drop_checked} drops re-solved ({drop_bad} violations)"
        ),
    )
}

// ---------------------------------------------------------------- 6

fn c6_exact_fit() -> Outcome {
    let start = Instant::now();
    let trunk = TrunkModel::convex(axis_box([0, 0, 0], [458, 483, 610]), vec![]).unwrap().model;
    let catalog: Vec<BoxType> = builtin_catalog().into_iter().filter(|b| b.id == "A").collect();
    let regs = regions(&trunk, &catalog);
    let result = match enumerate(&regs, &catalog, &SearchConfig::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let valid = validate_packing(&result, &regs, &catalog);
    let secs = start.elapsed().as_secs_f64();
    let dm3 = rational::to_f64(&result.volume_mm3()) / 1e6;
    outcome(
        result.placements.len() == 2
            && (dm3 - C6_EXPECTED_DM3).abs() <= C6_TOL_DM3
            && format!("{dm3:.1}") == "134.9"
            && valid.is_ok()
            && !result.timed_out
            && secs < C6_MAX_SECONDS,
        format!("{} boxes, {dm3:.1} dm3, {secs:.1}s", result.placements.len()),
    )
}

// ---------------------------------------------------------------- 7, 8

/// L-shaped trunk: a box from the origin minus one axis-aligned cavity.
struct LInstance {
    shell: [i64; 3],
    cavity: ([i64; 3], [i64; 3]),
    dims: [i64; 3],
}

const L_INSTANCES: [LInstance; 5] = [
    LInstance { shell: [400, 200, 300], cavity: ([200, 0, 150], [400, 200, 300]), dims: [200, 200, 150] },
    LInstance { shell: [600, 200, 300], cavity: ([300, 0, 100], [600, 200, 300]), dims: [300, 200, 100] },
    LInstance { shell: [300, 400, 350], cavity: ([0, 200, 200], [300, 400, 350]), dims: [300, 200, 200] },
    LInstance { shell: [500, 200, 300], cavity: ([250, 0, 150], [500, 200, 300]), dims: [250, 200, 150] },
    LInstance { shell: [450, 200, 200], cavity: ([300, 0, 100], [450, 200, 200]), dims: [300, 150, 100] },
];

impl LInstance {
    fn trunk(&self) -> TrunkModel {
        TrunkModel::convex(axis_box([0, 0, 0], self.shell), vec![axis_box(self.cavity.0, self.cavity.1)])
            .unwrap()
            .model
    }
}

/// Most boxes placed axis-aligned at 10 mm grid positions. Positions are
/// limited to normal coordinates: a lower stop of the container plus a sum
/// of box extents. Pushing every box of a packing towards lower
/// coordinates until it rests on such a stop shows no packing is lost.
fn grid_oracle(inst: &LInstance) -> usize {
    let mut orients: Vec<[i64; 3]> = Vec::new();
    for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let e = p.map(|k| inst.dims[k]);
        if !orients.contains(&e) {
            orients.push(e);
        }
    }
    let coords = |k: usize| -> Vec<i64> {
        let mut reach = BTreeSet::from([0, inst.cavity.1[k]]);
        loop {
            let next: BTreeSet<i64> = reach
                .iter()
                .flat_map(|&c| inst.dims.iter().map(move |d| c + d))
                .filter(|&c| c < inst.shell[k])
                .collect();
            let before = reach.len();
            reach.extend(next);
            if reach.len() == before {
                break;
            }
        }
        reach.into_iter().filter(|c| c % C7_GRID_MM == 0).collect()
    };
    let axes = [coords(0), coords(1), coords(2)];
    let mut placed: Vec<([i64; 3], [i64; 3])> = Vec::new();
    for e in &orients {
        for &x in &axes[0] {
            for &y in &axes[1] {
                for &z in &axes[2] {
                    let lo = [x, y, z];
                    let hi = [x + e[0], y + e[1], z + e[2]];
                    let inside = (0..3).all(|k| hi[k] <= inst.shell[k]);
                    let hits_cavity = (0..3).all(|k| lo[k] < inst.cavity.1[k] && hi[k] > inst.cavity.0[k]);
                    if inside && !hits_cavity {
                        placed.push((lo, hi));
                    }
                }
            }
        }
    }
    let n = placed.len();
    let disjoint = |a: &([i64; 3], [i64; 3]), b: &([i64; 3], [i64; 3])| (0..3).any(|k| a.1[k] <= b.0[k] || b.1[k] <= a.0[k]);
    let compatible: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| disjoint(&placed[i], &placed[j])).collect()).collect();
    let box_volume = inst.dims.iter().product::<i64>();
    let trunk_volume = inst.shell.iter().product::<i64>() - (0..3).map(|k| inst.cavity.1[k] - inst.cavity.0[k]).product::<i64>();
    let cap = (trunk_volume / box_volume) as usize;
    fn grow(cands: &[usize], chosen: usize, compatible: &[Vec<bool>], best: &mut usize, cap: usize) {
        *best = (*best).max(chosen);
        if *best == cap || chosen + cands.len() <= *best {
            return;
        }
        for (n, &i) in cands.iter().enumerate() {
            if chosen + cands.len() - n <= *best {
                return;
            }
            let rest: Vec<usize> = cands[n + 1..].iter().copied().filter(|&j| compatible[i][j]).collect();
            grow(&rest, chosen + 1, compatible, best, cap);
        }
    }
    let mut best = 0;
    grow(&(0..n).collect::<Vec<_>>(), 0, &compatible, &mut best, cap);
    best
}

struct LResult {
    oracle: usize,
    found: [usize; 2],
    volumes: [Rational; 2],
    nodes: [u64; 2],
    valid: bool,
}

fn l_results() -> &'static (Vec<LResult>, f64) {
    static CELL: OnceLock<(Vec<LResult>, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let results = L_INSTANCES
            .iter()
            .map(|inst| {
                let oracle = grid_oracle(inst);
                let catalog = single_type(inst.dims, oracle as u32 + 1);
                let regs = regions(&inst.trunk(), &catalog);
                let runs: Vec<_> = [true, false]
                    .iter()
                    .map(|&prune| {
                        let config = SearchConfig { prune_enabled: prune, ..Default::default() };
                        enumerate(&regs, &catalog, &config).expect("search runs")
                    })
                    .collect();
                LResult {
                    oracle,
                    found: [runs[0].placements.len(), runs[1].placements.len()],
                    volumes: [runs[0].volume_mm3(), runs[1].volume_mm3()],
                    nodes: [runs[0].stats.nodes_explored, runs[1].stats.nodes_explored],
                    valid: runs.iter().all(|r| validate_packing(r, &regs, &catalog).is_ok() && !r.timed_out),
                }
            })
            .collect();
        (results, start.elapsed().as_secs_f64())
    })
}

fn c7_oracle() -> Outcome {
    let (results, secs) = l_results();
    let counts: Vec<String> = results.iter().map(|r| format!("{}/{}", r.found[0], r.oracle)).collect();
    let pass = results.iter().all(|r| r.found[0] == r.oracle && r.valid && (2..=4).contains(&r.oracle))
        && *secs < C7_MAX_SECONDS;
    outcome(pass, format!("search/oracle counts {} on {C7_GRID_MM} mm grid, {secs:.1}s", counts.join(" ")))
}

/// Two box types in an L-shaped trunk, where the volume bound does cut.
fn mixed_instances() -> Vec<(TrunkModel, Vec<BoxType>)> {
    let two = |a: [i64; 3], b: [i64; 3]| {
        vec![
            BoxType::new("P", a.map(int), 3, Phase::Primary).unwrap(),
            BoxType::new("Q", b.map(int), 3, Phase::Primary).unwrap(),
        ]
    };
    vec![
        (L_INSTANCES[0].trunk(), two([200, 200, 150], [200, 150, 100])),
        (L_INSTANCES[1].trunk(), two([300, 200, 100], [200, 150, 100])),
    ]
}

fn c8_pruning() -> Outcome {
    let (results, _) = l_results();
    let mut same = results.iter().filter(|r| r.volumes[0] == r.volumes[1] && r.found[0] == r.found[1]).count();
    let mut nodes: Vec<String> = results.iter().map(|r| format!("{}/{}", r.nodes[0], r.nodes[1])).collect();
    let mixed = mixed_instances();
    let mut cut = 0;
    for (trunk, catalog) in &mixed {
        let regs = regions(trunk, catalog);
        let run = |prune| {
            enumerate(&regs, catalog, &SearchConfig { prune_enabled: prune, ..Default::default() }).expect("search runs")
        };
        let (on, off) = (run(true), run(false));
        same += (on.volume_mm3() == off.volume_mm3()) as usize;
        cut += (on.stats.nodes_explored < off.stats.nodes_explored) as usize;
        nodes.push(format!("{}/{}", on.stats.nodes_explored, off.stats.nodes_explored));
    }
    let total = results.len() + mixed.len();
    outcome(
        same == total && cut > 0,
        format!(
            "{same}/{total} instances agree ({} single-type, {} mixed); nodes with/without pruning {}",
            results.len(),
            mixed.len(),
            nodes.join(" ")
        ),
    )
}

// ---------------------------------------------------------------- 9

fn c9_arity() -> Outcome {
    let inst = LInstance { shell: [500, 400, 300], cavity: ([250, 0, 150], [500, 400, 300]), dims: [250, 200, 150] };
    let catalog = single_type(inst.dims, 5);
    let regs = regions(&inst.trunk(), &catalog);
    let config = SearchConfig { prune_enabled: false, ..Default::default() };
    let result = enumerate(&regs, &catalog, &config).expect("search runs");
    let st = &result.stats;

    // independent replay of the branching rule on random patterns
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut calls, mut bad, mut bb_calls) = (0, 0, 0);
    let mut attempts = 0;
    while calls < C9_BRANCH_CALLS && attempts < 50 * C9_BRANCH_CALLS {
        attempts += 1;
        let k = rng.gen_range(1..=4);
        let mut p = PartialPattern::root(rng.gen_range(0..regs.len()));
        for _ in 1..k {
            p = p.with_box(rng.gen_range(0..regs.len()));
        }
        let centers: Vec<[f64; 3]> = p
            .placements
            .iter()
            .map(|&r| {
                let (lo, hi) = regs[r].hull.bounds();
                let (lo, hi) = (lo.to_f64(), hi.to_f64());
                std::array::from_fn(|a| if hi[a] > lo[a] { rng.gen_range(lo[a]..=hi[a]) } else { lo[a] })
            })
            .collect();
        let found = detect_intersections(&centers, &p, &regs, DETECTION_TOL_MM);
        if found.is_empty() {
            continue;
        }
        calls += 1;
        let children = branch(&p, &found, &regs);
        let any_bb = found.iter().any(|f| matches!(f, Intersection::BoxBox { .. }));
        let ok = match &found[0] {
            Intersection::BoxBox { i, j, .. } => {
                bb_calls += 1;
                let mut expected: BTreeSet<BoxBoxConstraint> = BTreeSet::new();
                for axis in 0..3 {
                    for order in [AxisOrder::IBeforeJ, AxisOrder::JBeforeI] {
                        expected.insert(BoxBoxConstraint { i: *i, j: *j, axis, order });
                    }
                }
                let added: BTreeSet<BoxBoxConstraint> = children
                    .iter()
                    .filter(|c| c.bb.len() == p.bb.len() + 1 && c.bo == p.bo && c.placements == p.placements)
                    .filter_map(|c| c.bb.iter().find(|x| !p.bb.contains(x)).copied())
                    .collect();
                children.len() == 6 && added == expected
            }
            Intersection::BoxObstacle { i, obstacle, .. } => {
                let facets = regs[p.placements[*i]].obstacles.iter().find(|o| o.id == *obstacle).map_or(0, |o| o.facets().len());
                let expected: BTreeSet<BoxObstacleConstraint> =
                    (0..facets).map(|facet| BoxObstacleConstraint { i: *i, obstacle: *obstacle, facet }).collect();
                let added: BTreeSet<BoxObstacleConstraint> = children
                    .iter()
                    .filter(|c| c.bo.len() == p.bo.len() + 1 && c.bb == p.bb && c.placements == p.placements)
                    .filter_map(|c| c.bo.iter().find(|x| !p.bo.contains(x)).copied())
                    .collect();
                !any_bb && children.len() == facets && added == expected
            }
        };
        bad += !ok as usize;
    }
    let branched = st.box_box_branches + st.box_obstacle_branches;
    outcome(
        st.nodes_explored >= C9_MIN_NODES && st.arity_violations == 0 && branched > 0 && bad == 0 && calls >= C9_BRANCH_CALLS,
        format!(
            "search: {} nodes, {} box-box and {} box-obstacle branchings, {} arity violations; \
             replay: {calls} branchings ({bb_calls} box-box), {bad} wrong",
            st.nodes_explored, st.box_box_branches, st.box_obstacle_branches, st.arity_violations
        ),
    )
}

// ---------------------------------------------------------------- 10

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn orient(s: &str) -> Orientation {
    s.parse().expect("orientation name")
}

/// Feasible-area rows of boxes A and B from the published medium-trunk table.
fn golden_region_rows() -> Vec<RegionRow> {
    let data = [
        ("A", "yxz", 21.7, 11_400),
        ("A", "xyz", 17.3, 11_800),
        ("B", "zyx", 2.5, 4_500),
        ("B", "zxy", 1.3, 3_200),
        ("B", "yzx", 40.1, 12_000),
        ("B", "xzy", 30.0, 10_900),
        ("B", "yxz", 74.2, 23_300),
        ("B", "xyz", 67.0, 24_000),
    ];
    data.iter()
        .map(|&(b, o, v, f)| RegionRow {
            box_id: b.into(),
            orientation: orient(o),
            volume_dm3: v,
            stderr_dm3: 0.0,
            facets: f,
            samples: 200_000,
            seed: 20_070_101,
        })
        .collect()
}

/// Volume percentages of the two A rows of the published merge sweep.
fn golden_merge_sweep() -> MergeSweep {
    MergeSweep {
        abs_bounds: vec![1000.0, 10000.0, 100000.0],
        rel_bounds: vec![5.0, 10.0, 20.0, 50.0, 80.0],
        rows: vec![
            (
                "A".into(),
                orient("yxz"),
                vec![99.5, 98.8, 97.9, 94.4, 85.1, 98.8, 98.3, 97.5, 94.1, 86.0, 93.8, 93.8, 93.8, 91.6, 84.0],
            ),
            (
                "A".into(),
                orient("xyz"),
                vec![99.7, 99.1, 97.9, 92.5, 86.6, 98.8, 98.4, 97.6, 92.8, 86.5, 91.9, 91.9, 91.9, 89.6, 84.6],
            ),
        ],
    }
}

fn golden_drop_sweep() -> DropSweep {
    DropSweep {
        growths: vec![0.0, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
        facet_pct: vec![100.0, 58.0, 51.0, 41.0, 33.0, 27.0, 21.0, 18.0],
    }
}

fn golden_simplification() -> Vec<SimplificationReport> {
    let row = |b: &str, o: &str, fb: usize, fa: usize, ob: usize, oa: usize, v: f64| SimplificationReport {
        box_id: b.into(),
        orientation: orient(o),
        volume_pct: v,
        facet_pct: 100.0 * fa as f64 / fb as f64,
        facets_before: fb,
        facets_after: fa,
        obstacles_before: ob,
        obstacles_after: oa,
        samples: 200_000,
        seed: 20_070_101,
    };
    vec![row("A", "yxz", 11_400, 2_633, 1_900, 410, 98.3), row("D", "zxy", 700, 231, 120, 35, 97.6)]
}

fn c10_reports() -> Outcome {
    let rows = golden_region_rows();
    let outputs = [
        ("region_report.txt", region_report_text(&rows)),
        ("region_report.csv", region_report_csv(&rows)),
        ("merge_sweep.txt", merge_sweep_text(&golden_merge_sweep())),
        ("merge_sweep.csv", merge_sweep_csv(&golden_merge_sweep())),
        ("drop_sweep.txt", drop_sweep_text(&golden_drop_sweep())),
        ("simplification_report.txt", simplification_report_text(&golden_simplification())),
        ("simplification_report.csv", simplification_report_csv(&golden_simplification())),
    ];
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut mismatched = Vec::new();
    for (name, text) in &outputs {
        let path = golden_dir().join(name);
        if update {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, text).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            mismatched.push(*name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "{} golden files{}{}",
            outputs.len(),
            if update { " rewritten" } else { "" },
            if mismatched.is_empty() { String::new() } else { format!(", mismatched: {}", mismatched.join(", ")) }
        ),
    )
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 geometry oracles", c1_geometry),
        ("2 erosion exactness", c2_erosion),
        ("3 free-space soundness", c3_soundness),
        ("4 simplification contractiveness", c4_contractive),
        ("5 simplification bound compliance", c5_bounds),
        ("6 exact-fit packing", c6_exact_fit),
        ("7 grid oracle equivalence", c7_oracle),
        ("8 pruning safety", c8_pruning),
        ("9 branch arity", c9_arity),
        ("10 report fidelity", c10_reports),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !result.pass as usize;
        println!(
            "{} criterion {name}: {} [{:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
