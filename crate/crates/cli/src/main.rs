use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use trunkpack::catalog::Orientation;
use trunkpack::freespace::{format_volume_dm3, TrunkFormat, DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED};
use trunkpack::geometry::Point3;
use trunkpack::pipeline::{
    run, RunConfig, RunSummary, StageRange, StageStatus, DEFAULT_DROP_GROWTH_MM, DEFAULT_MERGE_ABS_MM3,
    DEFAULT_MERGE_REL_PCT, DEFAULT_RNG_SEED,
};
use trunkpack::rational;
use trunkpack::simplify::MergeParams;

/// Packs cuboid boxes into a polyhedral trunk.
///
/// Exit codes: 0 success, 1 other failure, 2 bad arguments, 3 unreadable
/// input, 4 malformed trunk, 5 every feasible region empty, 6 time limit
/// reached with no packing (an empty result is still written).
#[derive(Debug, Parser)]
#[command(name = "trunkpack", version)]
struct Args {
    /// Trunk model: ASCII STL, mesh JSON or convex JSON.
    #[arg(long)]
    trunk: Option<PathBuf>,
    /// stl, mesh-json or convex-json; detected from the file when omitted.
    #[arg(long, value_parser = parse_format)]
    trunk_format: Option<TrunkFormat>,
    /// Point inside a mesh trunk as x,y,z in mm.
    #[arg(long, value_parser = parse_point)]
    seed_point: Option<Point3>,
    /// Box catalog JSON; the built-in boxes A-F otherwise.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Comma-separated box ids to use from the catalog.
    #[arg(long, value_delimiter = ',')]
    boxes: Option<Vec<String>>,
    /// Comma-separated orientations such as xyz,zyx.
    #[arg(long, value_delimiter = ',', value_parser = parse_orientation)]
    orientations: Option<Vec<Orientation>>,
    /// Relative merge bound in percent.
    #[arg(long, default_value_t = DEFAULT_MERGE_REL_PCT)]
    merge_rel: f64,
    /// Absolute merge bound in mm³.
    #[arg(long, default_value_t = DEFAULT_MERGE_ABS_MM3)]
    merge_abs: f64,
    /// Allowed obstacle growth when dropping a facet, in mm.
    #[arg(long, default_value_t = DEFAULT_DROP_GROWTH_MM)]
    drop_growth: f64,
    /// Search time limit in seconds; runs to exhaustion when omitted.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Stop the search after this many nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Disable volume-bound pruning.
    #[arg(long)]
    no_prune: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// all, one stage, a range like simplify-enumerate, or a comma list.
    /// Stages: feasible, describe, simplify, enumerate.
    #[arg(long, default_value = "all", value_parser = parse_stages)]
    stages: StageRange,
    /// Also write the packing as Wavefront OBJ.
    #[arg(long)]
    export_obj: bool,
    /// Seed for the merge order.
    #[arg(long, default_value_t = DEFAULT_RNG_SEED)]
    rng_seed: u64,
    /// Monte Carlo samples per region for volume estimates.
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    mc_samples: u64,
    #[arg(long, default_value_t = DEFAULT_MC_SEED)]
    mc_seed: u64,
    /// Recompute selected stages even if cached outputs are current.
    #[arg(long)]
    force: bool,
}

fn parse_format(s: &str) -> Result<TrunkFormat, String> {
    TrunkFormat::parse(s).ok_or_else(|| format!("unknown trunk format `{s}`"))
}

fn parse_point(s: &str) -> Result<Point3, String> {
    let parts: Vec<_> = s.split(',').map(|p| rational::parse(p.trim())).collect();
    match parts.as_slice() {
        [Some(x), Some(y), Some(z)] => Ok(Point3::new(x.clone(), y.clone(), z.clone())),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

fn parse_orientation(s: &str) -> Result<Orientation, String> {
    s.parse().map_err(|e: trunkpack::catalog::CatalogError| e.to_string())
}

fn parse_stages(s: &str) -> Result<StageRange, String> {
    s.parse()
}

fn config(args: Args) -> Result<RunConfig, String> {
    let merge = MergeParams::new(args.merge_rel, args.merge_abs, args.rng_seed)
        .ok_or("merge bounds must be finite and non-negative")?;
    if !(args.drop_growth >= 0.0 && args.drop_growth.is_finite()) {
        return Err("drop growth must be finite and non-negative".into());
    }
    let mut cfg = RunConfig::new(args.trunk, args.out);
    cfg.trunk_format = args.trunk_format;
    cfg.seed_point = args.seed_point;
    cfg.catalog = args.catalog;
    cfg.boxes = args.boxes;
    cfg.orientations = args.orientations;
    cfg.merge = merge;
    cfg.drop_growth_mm = args.drop_growth;
    cfg.search.time_limit = args.time_limit;
    cfg.search.max_nodes = args.max_nodes;
    cfg.search.prune_enabled = !args.no_prune;
    cfg.workers = args.workers;
    cfg.stages = args.stages;
    cfg.export_obj = args.export_obj;
    cfg.mc_samples = args.mc_samples;
    cfg.mc_seed = args.mc_seed;
    cfg.force = args.force;
    Ok(cfg)
}

fn print_summary(s: &RunSummary) {
    for (stage, status) in &s.stages {
        let status = match status {
            StageStatus::Ran => "ran",
            StageStatus::Cached => "cached",
            StageStatus::Skipped => "skipped",
        };
        eprintln!("{stage:<10} {status}");
    }
    if s.dropped_triangles > 0 {
        eprintln!("dropped {} degenerate triangles", s.dropped_triangles);
    }
    for e in &s.empty {
        eprintln!("empty region {} {}: {:?}", e.box_id, e.orientation, e.reason);
    }
    if s.soundness_violations > 0 {
        eprintln!("warning: {} sampled centers place a box corner outside the trunk", s.soundness_violations);
    }
    if s.merges + s.drops > 0 {
        eprintln!("simplification: {} merges, {} facets dropped", s.merges, s.drops);
    }
    if let Some(p) = &s.packing {
        let counts = p.placements.iter().fold(Vec::<(String, usize)>::new(), |mut acc, pl| {
            match acc.iter_mut().find(|(id, _)| *id == pl.box_id) {
                Some((_, n)) => *n += 1,
                None => acc.push((pl.box_id.clone(), 1)),
            }
            acc
        });
        let counts: Vec<String> = counts.iter().map(|(id, n)| format!("{n}x{id}")).collect();
        println!(
            "packed {} boxes ({}), {} dm3{}",
            p.placements.len(),
            counts.join(" "),
            format_volume_dm3(rational::to_f64(&p.volume_mm3())),
            if p.timed_out { ", time limit reached" } else { "" }
        );
        eprintln!("{} nodes in {:.1} s", p.stats.nodes_explored, p.wall_time_s);
    }
}

fn main() -> ExitCode {
    let cfg = match config(Args::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(summary) => {
            print_summary(&summary);
            ExitCode::SUCCESS
        }
        Err((e, summary)) => {
            print_summary(&summary);
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
