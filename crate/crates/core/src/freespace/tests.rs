use proptest::prelude::*;

use super::*;
use crate::catalog::{builtin_catalog, Phase};
use crate::geometry::Triangle3;
use crate::rational::{int, ratio};

fn p(x: i64, y: i64, z: i64) -> Point3 {
    Point3::from_ints(x, y, z)
}

fn boxed(lo: Point3, hi: Point3) -> ConvexPolytope {
    ConvexPolytope::axis_box(&lo, &hi).unwrap()
}

fn box_a() -> BoxType {
    builtin_catalog().into_iter().find(|b| b.id == "A").unwrap()
}

fn cuboid_trunk(x: i64, y: i64, z: i64) -> TrunkModel {
    TrunkModel::convex(boxed(p(0, 0, 0), p(x, y, z)), vec![]).unwrap().model
}

pub(crate) fn cube_triangles(size: i64) -> Vec<Triangle3> {
    let q = |x: i64, y: i64, z: i64| p(x * size, y * size, z * size);
    let quads = [
        [q(0, 0, 0), q(0, 1, 0), q(1, 1, 0), q(1, 0, 0)],
        [q(0, 0, 1), q(1, 0, 1), q(1, 1, 1), q(0, 1, 1)],
        [q(0, 0, 0), q(1, 0, 0), q(1, 0, 1), q(0, 0, 1)],
        [q(0, 1, 0), q(0, 1, 1), q(1, 1, 1), q(1, 1, 0)],
        [q(0, 0, 0), q(0, 0, 1), q(0, 1, 1), q(0, 1, 0)],
        [q(1, 0, 0), q(1, 1, 0), q(1, 1, 1), q(1, 0, 1)],
    ];
    quads
        .iter()
        .flat_map(|v| {
            [
                Triangle3::new(v[0].clone(), v[1].clone(), v[2].clone()),
                Triangle3::new(v[0].clone(), v[2].clone(), v[3].clone()),
            ]
        })
        .collect()
}

#[test]
fn inverted_box_examples() {
    let a = box_a();
    let b = inverted_box(&a.oriented_extents(Orientation::Xyz));
    let hi = Point3::new(int(305), ratio(483, 2), ratio(229, 2));
    assert_eq!(b, boxed(-&hi, hi));
    let negated: Vec<Point3> = b.vertices().iter().map(|v| -v).collect();
    assert_eq!(convex_hull(&negated).unwrap(), b);
    assert_eq!(b.volume(), a.volume());
}

#[test]
fn erode_examples() {
    let outer = boxed(p(0, 0, 0), p(1000, 600, 500));
    let b = inverted_box(&[int(610), int(483), int(229)]);
    let eroded = erode_hull(&outer, &b).unwrap();
    let expected = boxed(
        Point3::new(int(305), ratio(483, 2), ratio(229, 2)),
        Point3::new(int(695), ratio(717, 2), ratio(771, 2)),
    );
    assert_eq!(eroded, expected);

    let unit = boxed(p(0, 0, 0), p(1, 1, 1));
    let tiny = inverted_box(&[ratio(1, 1_000_000), ratio(1, 1_000_000), ratio(1, 1_000_000)]);
    let shrunk = erode_hull(&unit, &tiny).unwrap();
    assert!(shrunk.volume() < int(1) && shrunk.volume() > ratio(99, 100));
    assert!(erode_hull(&unit, &inverted_box(&[int(2), int(2), int(2)])).is_none());
}

#[test]
fn erosion_of_a_slanted_hull_shifts_by_support() {
    let outer = convex_hull(&[p(0, 0, 0), p(100, 0, 0), p(0, 100, 0), p(0, 0, 100)]).unwrap();
    let b = inverted_box(&[int(2), int(4), int(6)]);
    let eroded = erode_hull(&outer, &b).unwrap();
    // oracle: every eroded vertex plus every box corner stays in the outer set
    for v in eroded.vertices() {
        for c in b.vertices() {
            assert!(outer.contains(&(v + c)));
        }
    }
    // the slanted facet moves inward by support(b, (1,1,1)) = 1 + 2 + 3
    let slanted = eroded.halfspaces().iter().find(|h| h.normal == p(1, 1, 1)).unwrap();
    assert_eq!(slanted.offset, int(94));
}

#[test]
fn tight_fit_is_fattened() {
    let trunk = cuboid_trunk(458, 483, 610);
    let outer = trunk.outer_polytope().unwrap();
    let a = box_a();
    let region = compute_feasible_region(&trunk, &outer, &a, Orientation::Zyx).region().unwrap();
    assert!(region.fattened);
    assert!(region.obstacles.is_empty());
    let eps = fatten_epsilon();
    let (lo, hi) = region.hull.bounds();
    assert_eq!((lo.x.clone(), hi.x.clone()), (ratio(229, 2), ratio(687, 2)));
    assert_eq!((lo.y.clone(), hi.y.clone()), (ratio(483, 2) - &eps, ratio(483, 2) + &eps));
    assert_eq!((lo.z.clone(), hi.z.clone()), (int(305) - &eps, int(305) + &eps));
    assert_eq!(region.fit_extents[0], int(229));
    for o in Orientation::ALL.into_iter().filter(|&o| o != Orientation::Zyx) {
        assert!(compute_feasible_region(&trunk, &outer, &a, o).region().is_none(), "{o}");
    }
}

#[test]
fn mesh_cube_hull_matches_erosion_formula() {
    let trunk = TrunkModel::mesh(cube_triangles(1000), p(500, 500, 500)).unwrap().model;
    let outer = trunk.outer_polytope().unwrap();
    let a = box_a();
    for o in Orientation::ALL {
        let region = compute_feasible_region(&trunk, &outer, &a, o).region().unwrap();
        let e = a.oriented_extents(o);
        let expected = (int(1000) - &e[0]) * (int(1000) - &e[1]) * (int(1000) - &e[2]);
        assert_eq!(region.hull.volume(), expected);
        assert!(region.obstacles.is_empty(), "{o}");
        assert!(!region.fattened);
        assert!(discarded_obstacles_are_outside(&trunk, &region));
    }
}

#[test]
fn oversized_box_is_empty_everywhere() {
    let trunk = cuboid_trunk(100, 100, 100);
    let outer = trunk.outer_polytope().unwrap();
    for o in Orientation::ALL {
        assert!(matches!(
            compute_feasible_region(&trunk, &outer, &box_a(), o),
            RegionOutcome::Empty(EmptyReason::HullEmpty)
        ));
    }
}

fn l_trunk() -> TrunkModel {
    let shell = boxed(p(0, 0, 0), p(2000, 500, 700));
    let cavity = boxed(p(1000, 0, 400), p(2000, 500, 700));
    TrunkModel::convex(shell, vec![cavity]).unwrap().model
}

#[test]
fn cavity_obstacles_are_clipped_and_sound() {
    let trunk = l_trunk();
    let e = builtin_catalog().into_iter().find(|b| b.id == "E").unwrap();
    let regions: Vec<FeasibleRegion> = compute_all_regions(&trunk, &[e], None)
        .unwrap()
        .into_iter()
        .filter_map(|(_, _, r)| r.region())
        .collect();
    assert_eq!(regions.len(), 6);
    for r in &regions {
        assert_eq!(r.obstacles.len(), 1);
        assert!(discarded_obstacles_are_outside(&trunk, r));
        let rep = soundness_check(r, &trunk, 20_000, 3);
        assert!(rep.feasible > 1000, "{rep:?}");
        assert_eq!(rep.violations, 0);
    }
}

#[test]
fn covered_hull_is_empty() {
    let shell = boxed(p(0, 0, 0), p(1000, 1000, 1000));
    let cavity = boxed(p(200, 200, 200), p(800, 800, 800));
    let trunk = TrunkModel::convex(shell.clone(), vec![cavity]).unwrap().model;
    let small = BoxType::new("S", [int(700), int(700), int(700)], 1, Phase::Primary).unwrap();
    assert!(matches!(
        compute_feasible_region(&trunk, &shell, &small, Orientation::Xyz),
        RegionOutcome::Empty(EmptyReason::Covered)
    ));
}

fn manual_region(hull: ConvexPolytope, obstacles: Vec<ConvexPolytope>) -> FeasibleRegion {
    let obstacles = obstacles
        .iter()
        .enumerate()
        .filter_map(|(i, o)| Obstacle::clip(i, o.halfspaces(), &hull))
        .collect();
    FeasibleRegion {
        box_id: "T".into(),
        orientation: Orientation::Xyz,
        extents: [int(1), int(1), int(1)],
        fit_extents: [int(1), int(1), int(1)],
        fattened: false,
        hull,
        obstacles,
        volume: None,
    }
}

#[test]
fn monte_carlo_matches_closed_forms() {
    let simplex = convex_hull(&[p(0, 0, 0), p(10, 0, 0), p(0, 10, 0), p(0, 0, 10)]).unwrap();
    let r = manual_region(simplex.clone(), vec![]);
    let est = monte_carlo_volume(&r, 200_000, 7);
    let exact = rational::to_f64(&simplex.volume());
    assert!((est.volume_mm3 - exact).abs() <= 3.0 * est.stderr_mm3, "{est:?} vs {exact}");

    let r = manual_region(boxed(p(0, 0, 0), p(10, 10, 10)), vec![boxed(p(0, 0, 0), p(10, 10, 5))]);
    // faces on the hull boundary stay: their planes are free
    assert_eq!(r.obstacles[0].facets().len(), 6);
    assert_eq!(r.facet_count(), 12);
    let est = monte_carlo_volume(&r, 200_000, 7);
    assert!((est.volume_mm3 - 500.0).abs() <= 3.0 * est.stderr_mm3, "{est:?}");
    assert!(region_report(&[]).is_empty());
}

#[test]
fn boundary_points_classify_exactly() {
    let r = manual_region(boxed(p(0, 0, 0), p(10, 10, 10)), vec![boxed(p(0, 0, 0), p(10, 10, 5))]);
    let c = RegionClassifier::new(&r);
    assert!(c.is_free(&[3.0, 3.0, 5.0]));
    assert!(!c.is_free(&[3.0, 3.0, 4.999_999_999_999]));
    assert!(c.is_free(&[10.0, 10.0, 10.0]));
    assert!(!c.is_free(&[10.0, 10.0, 10.000_000_000_001]));
    assert!(c.is_free(&[0.0, 3.0, 2.0]));
    assert!(!c.is_free(&[1e-9, 3.0, 2.0]));
    for q in [[3.0, 3.0, 5.0], [3.0, 3.0, 4.9], [0.0, 0.0, 7.0]] {
        assert_eq!(c.is_free(&q), r.is_free(&Point3::from_f64(q).unwrap()));
    }
}

#[test]
fn region_json_round_trip() {
    let trunk = l_trunk();
    let outer = trunk.outer_polytope().unwrap();
    let e = builtin_catalog().into_iter().find(|b| b.id == "E").unwrap();
    let mut r = compute_feasible_region(&trunk, &outer, &e, Orientation::Xyz).region().unwrap();
    r.volume = Some(monte_carlo_volume(&r, 1000, 1));
    let text = r.to_json();
    let back = FeasibleRegion::from_json(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), text);
    let tampered = text.replacen("\"vertices\"", "\"vertices_\"", 1);
    assert!(FeasibleRegion::from_json(&tampered).is_err());
}

#[test]
fn region_report_layout() {
    let rows = vec![
        RegionRow {
            box_id: "A".into(),
            orientation: Orientation::Yxz,
            volume_dm3: 21.73,
            stderr_dm3: 0.01,
            facets: 11_400,
            samples: 10,
            seed: 1,
        },
        RegionRow {
            box_id: "A".into(),
            orientation: Orientation::Xyz,
            volume_dm3: 17.26,
            stderr_dm3: 0.01,
            facets: 11_800,
            samples: 10,
            seed: 1,
        },
        RegionRow {
            box_id: "B".into(),
            orientation: Orientation::Zyx,
            volume_dm3: 2.5,
            stderr_dm3: 0.01,
            facets: 4_460,
            samples: 10,
            seed: 1,
        },
    ];
    let text = region_report_text(&rows);
    let expected = "\
box            | A             | B
orientation    |    yxz    xyz |    zyx
volume [dm3]   |   21.7   17.3 |    2.5
facets [10^3]  |   11.4   11.8 |    4.5
samples 10 seed 1
";
    assert_eq!(text, expected);
    let csv = region_report_csv(&rows);
    assert!(csv.starts_with("box,orientation,volume_dm3,stderr_dm3,facets,samples,seed\nA,yxz,21.73,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cuboid_erosion_is_exact(
        dims in prop::array::uniform3(100i64..1500),
        box_idx in 0usize..8,
        o in 0usize..6,
    ) {
        let trunk = cuboid_trunk(dims[0], dims[1], dims[2]);
        let outer = trunk.outer_polytope().unwrap();
        let b = &builtin_catalog()[box_idx];
        let o = Orientation::ALL[o];
        let e = b.oriented_extents(o);
        let fits = (0..3).all(|k| e[k] <= int(dims[k]));
        match compute_feasible_region(&trunk, &outer, b, o) {
            RegionOutcome::Region(r) => {
                prop_assert!(fits);
                let (lo, hi) = r.hull.bounds();
                for k in 0..3 {
                    let half = &r.fit_extents[k] / int(2);
                    prop_assert_eq!(&lo[k], &half);
                    prop_assert_eq!(&hi[k], &(int(dims[k]) - &half));
                }
                prop_assert_eq!(r.fattened, (0..3).any(|k| e[k] == int(dims[k])));
            }
            RegionOutcome::Empty(_) => prop_assert!(!fits),
        }
    }
}
