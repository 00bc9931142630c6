use serde::Serialize;

use super::FeasibleRegion;
use crate::catalog::Orientation;

/// One column of the feasible-area table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    #[serde(rename = "box")]
    pub box_id: String,
    pub orientation: Orientation,
    pub volume_dm3: f64,
    pub stderr_dm3: f64,
    pub facets: usize,
    pub samples: u64,
    pub seed: u64,
}

pub fn format_volume_dm3(mm3: f64) -> String {
    format!("{:.1}", mm3 / 1e6)
}

/// Rows for regions that carry a volume estimate with at least one free sample.
pub fn region_report(regions: &[FeasibleRegion]) -> Vec<RegionRow> {
    regions
        .iter()
        .filter_map(|r| {
            let v = r.volume.as_ref()?;
            (v.free > 0).then(|| RegionRow {
                box_id: r.box_id.clone(),
                orientation: r.orientation,
                volume_dm3: v.volume_mm3 / 1e6,
                stderr_dm3: v.stderr_mm3 / 1e6,
                facets: r.facet_count(),
                samples: v.samples,
                seed: v.seed,
            })
        })
        .collect()
}

const LABEL_WIDTH: usize = 14;
const CELL_WIDTH: usize = 7;

/// Boxes as column groups; orientation, volume and facet rows beneath.
pub fn region_report_text(rows: &[RegionRow]) -> String {
    let mut groups: Vec<(&str, Vec<&RegionRow>)> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|(id, _)| *id == r.box_id) {
            Some((_, members)) => members.push(r),
            None => groups.push((&r.box_id, vec![r])),
        }
    }
    let line = |label: &str, cell: &dyn Fn(&RegionRow) -> String| {
        let mut s = format!("{label:<LABEL_WIDTH$}");
        for (_, members) in &groups {
            s.push_str(" |");
            for r in members {
                s.push_str(&format!("{:>CELL_WIDTH$}", cell(r)));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = format!("{:<LABEL_WIDTH$}", "box");
    for (id, members) in &groups {
        out.push_str(&format!(" | {:<w$}", id, w = members.len() * CELL_WIDTH - 1));
    }
    out = out.trim_end().to_string() + "\n";
    out.push_str(&line("orientation", &|r| r.orientation.to_string()));
    out.push_str(&line("volume [dm3]", &|r| format!("{:.1}", r.volume_dm3)));
    out.push_str(&line("facets [10^3]", &|r| format!("{:.1}", r.facets as f64 / 1000.0)));
    if let Some(first) = rows.first() {
        out.push_str(&format!("samples {} seed {}\n", first.samples, first.seed));
    }
    out
}

pub fn region_report_csv(rows: &[RegionRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
}
