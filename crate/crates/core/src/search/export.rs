use std::fmt::Write as _;
use std::path::Path;

use super::PackingResult;
use crate::rational;

/// Wavefront OBJ with one named object of 12 triangles per placed box.
pub fn packing_to_obj(result: &PackingResult) -> String {
    let mut out = String::from("# packed boxes, millimeters\n");
    for (n, p) in result.placements.iter().enumerate() {
        let half: Vec<f64> = p.extents.iter().map(|e| rational::to_f64(e) / 2.0).collect();
        let _ = writeln!(out, "o box{n}_{}_{}", p.box_id, p.orientation);
        for mask in 0..8 {
            let v: Vec<f64> = (0..3)
                .map(|k| p.center_mm[k] + if mask & (1 << k) != 0 { half[k] } else { -half[k] })
                .collect();
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        let base = 8 * n + 1;
        // corner index bits: x = 1, y = 2, z = 4
        const QUADS: [[usize; 4]; 6] =
            [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
        for q in QUADS {
            let _ = writeln!(out, "f {} {} {}", base + q[0], base + q[1], base + q[2]);
            let _ = writeln!(out, "f {} {} {}", base + q[0], base + q[2], base + q[3]);
        }
    }
    out
}

pub fn write_obj(result: &PackingResult, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, packing_to_obj(result))
}
