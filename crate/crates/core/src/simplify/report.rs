use serde::Serialize;

use crate::catalog::Orientation;
use crate::freespace::{monte_carlo_volume, FeasibleRegion};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplificationReport {
    #[serde(rename = "box")]
    pub box_id: String,
    pub orientation: Orientation,
    pub volume_pct: f64,
    pub facet_pct: f64,
    pub facets_before: usize,
    pub facets_after: usize,
    pub obstacles_before: usize,
    pub obstacles_after: usize,
    pub samples: u64,
    pub seed: u64,
}

/// Volume and facet ratios in percent. Both volumes use the same samples
/// over the unchanged hull, so the volume ratio is a ratio of free counts.
pub fn simplification_report(
    before: &FeasibleRegion,
    after: &FeasibleRegion,
    samples: u64,
    seed: u64,
) -> SimplificationReport {
    let vb = monte_carlo_volume(before, samples, seed);
    let va = monte_carlo_volume(after, samples, seed);
    let volume_pct = if vb.free == 0 { 100.0 } else { 100.0 * va.free as f64 / vb.free as f64 };
    let (fb, fa) = (before.facet_count(), after.facet_count());
    SimplificationReport {
        box_id: before.box_id.clone(),
        orientation: before.orientation,
        volume_pct,
        facet_pct: 100.0 * fa as f64 / fb as f64,
        facets_before: fb,
        facets_after: fa,
        obstacles_before: before.obstacles.len(),
        obstacles_after: after.obstacles.len(),
        samples,
        seed,
    }
}

/// One table of a merge-parameter sweep: rows are regions, cells run over
/// the absolute bounds and, within each, the relative bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeSweep {
    pub abs_bounds: Vec<f64>,
    pub rel_bounds: Vec<f64>,
    pub rows: Vec<(String, Orientation, Vec<f64>)>,
}

const CELL: usize = 6;

fn trim(s: String) -> String {
    s.lines().map(|l| l.trim_end().to_string() + "\n").collect()
}

pub fn merge_sweep_text(sweep: &MergeSweep) -> String {
    let group_width = sweep.rel_bounds.len() * CELL;
    let mut out = format!("{:<12}", "");
    for y in &sweep.abs_bounds {
        let label = format!("{y} mm3");
        out.push_str(&format!(" |{label:^group_width$}"));
    }
    out.push('\n');
    out.push_str(&format!("{:<12}", "box orient."));
    for _ in &sweep.abs_bounds {
        out.push_str(" |");
        for x in &sweep.rel_bounds {
            out.push_str(&format!("{:>CELL$}", format!("{x}%")));
        }
    }
    out.push('\n');
    let cells = sweep.abs_bounds.len() * sweep.rel_bounds.len();
    let line = |label: String, values: &[f64]| {
        let mut s = format!("{label:<12}");
        for g in values.chunks(sweep.rel_bounds.len().max(1)) {
            s.push_str(" |");
            for v in g {
                s.push_str(&format!("{v:>CELL$.1}"));
            }
        }
        s + "\n"
    };
    for (id, o, values) in &sweep.rows {
        out.push_str(&line(format!("{id}   {o}"), values));
    }
    if !sweep.rows.is_empty() {
        let avg: Vec<f64> = (0..cells)
            .map(|c| sweep.rows.iter().map(|r| r.2[c]).sum::<f64>() / sweep.rows.len() as f64)
            .collect();
        out.push_str(&line("average".into(), &avg));
    }
    trim(out)
}

pub fn merge_sweep_csv(sweep: &MergeSweep) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(rename = "box")]
        box_id: &'a str,
        orientation: Orientation,
        abs_bound_mm3: f64,
        rel_bound_pct: f64,
        value_pct: String,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for (id, o, values) in &sweep.rows {
        for (a, y) in sweep.abs_bounds.iter().enumerate() {
            for (r, x) in sweep.rel_bounds.iter().enumerate() {
                let v = values[a * sweep.rel_bounds.len() + r];
                w.serialize(Row { box_id: id, orientation: *o, abs_bound_mm3: *y, rel_bound_pct: *x, value_pct: format!("{v:.1}") })
                    .expect("csv row");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
}

/// Obstacle facets left after dropping, per allowed growth.
#[derive(Clone, Debug, PartialEq)]
pub struct DropSweep {
    pub growths: Vec<f64>,
    pub facet_pct: Vec<f64>,
}

pub fn drop_sweep_text(sweep: &DropSweep) -> String {
    let mut top = format!("{:<20}", "allowed growth [mm]");
    let mut bottom = format!("{:<20}", "obstacle facets");
    for (g, pct) in sweep.growths.iter().zip(&sweep.facet_pct) {
        top.push_str(&format!(" |{:>5}", g.to_string()));
        bottom.push_str(&format!(" |{:>5}", format!("{:.0}%", pct)));
    }
    trim(top + "\n" + &bottom + "\n")
}

/// Per-region table of one simplification run: facet counts and both ratios.
pub fn simplification_report_text(reports: &[SimplificationReport]) -> String {
    let mut out = format!(
        "{:<12} |{:>9}{:>9}{:>9} |{:>9}{:>9}\n",
        "box orient.", "facets", "after", "facets%", "obst.", "volume%"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<12} |{:>9}{:>9}{:>9.1} |{:>9}{:>9.1}\n",
            format!("{}   {}", r.box_id, r.orientation),
            r.facets_before,
            r.facets_after,
            r.facet_pct,
            r.obstacles_after,
            r.volume_pct
        ));
    }
    if !reports.is_empty() {
        let n = reports.len() as f64;
        let facet = reports.iter().map(|r| r.facet_pct).sum::<f64>() / n;
        let volume = reports.iter().map(|r| r.volume_pct).sum::<f64>() / n;
        out.push_str(&format!("{:<12} |{:>9}{:>9}{:>9.1} |{:>9}{:>9.1}\n", "average", "", "", facet, "", volume));
    }
    trim(out)
}

pub fn simplification_report_csv(reports: &[SimplificationReport]) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(rename = "box")]
        box_id: &'a str,
        orientation: Orientation,
        volume_pct: String,
        facet_pct: String,
        facets_before: usize,
        facets_after: usize,
        obstacles_before: usize,
        obstacles_after: usize,
        samples: u64,
        seed: u64,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(Row {
            box_id: &r.box_id,
            orientation: r.orientation,
            volume_pct: format!("{:.1}", r.volume_pct),
            facet_pct: format!("{:.1}", r.facet_pct),
            facets_before: r.facets_before,
            facets_after: r.facets_after,
            obstacles_before: r.obstacles_before,
            obstacles_after: r.obstacles_after,
            samples: r.samples,
            seed: r.seed,
        })
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8")
}
