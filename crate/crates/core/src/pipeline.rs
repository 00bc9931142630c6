//! The four-stage run: feasible regions, convex description with volume
//! estimates, simplification and enumeration. Every stage reads and writes
//! plain files under the output directory, so stages can be run separately
//! and a stage whose inputs and parameters are unchanged is skipped.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{default_run_catalog, load_catalog, BoxType, CatalogError, Orientation};
use crate::freespace::{
    compute_all_regions, monte_carlo_volume, region_report, region_report_csv, region_report_text, soundness_check,
    EmptyReason, FeasibleRegion, FreespaceError, RegionOutcome, SoundnessReport, TrunkFormat, TrunkModel,
    DEFAULT_MC_SAMPLES, DEFAULT_MC_SEED,
};
use crate::geometry::Point3;
use crate::search::{enumerate, validate_packing, write_obj, PackingResult, SearchConfig, SearchError};
use crate::simplify::{
    drop_facets, log_to_json_lines, merge_obstacles, simplification_report, simplification_report_csv,
    simplification_report_text, MergeParams, SimplificationReport,
};

pub const DEFAULT_MERGE_REL_PCT: f64 = 10.0;
pub const DEFAULT_MERGE_ABS_MM3: f64 = 10_000.0;
pub const DEFAULT_DROP_GROWTH_MM: f64 = 1.0;
pub const DEFAULT_RNG_SEED: u64 = 1;
/// Free samples checked per region by the soundness post-check.
const SOUNDNESS_SAMPLES: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Feasible,
    Describe,
    Simplify,
    Enumerate,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Feasible, Stage::Describe, Stage::Simplify, Stage::Enumerate];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Feasible => "feasible",
            Stage::Describe => "describe",
            Stage::Simplify => "simplify",
            Stage::Enumerate => "enumerate",
        }
    }

    /// Directory holding this stage's region files, if it writes any.
    fn region_dir(self) -> Option<&'static str> {
        match self {
            Stage::Feasible => Some("regions"),
            Stage::Describe => Some("described"),
            Stage::Simplify => Some("simplified"),
            Stage::Enumerate => None,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// A contiguous, non-empty run of stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageRange {
    pub first: Stage,
    pub last: Stage,
}

impl StageRange {
    pub fn all() -> Self {
        StageRange { first: Stage::Feasible, last: Stage::Enumerate }
    }

    pub fn contains(&self, s: Stage) -> bool {
        self.first <= s && s <= self.last
    }
}

impl FromStr for StageRange {
    type Err = String;

    /// `all`, a single stage, `first-last`, or a comma list of adjacent stages.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "all" {
            return Ok(StageRange::all());
        }
        let (first, last) = if let Some((a, b)) = s.split_once('-') {
            (a.trim().parse()?, b.trim().parse()?)
        } else {
            let mut list: Vec<Stage> = s.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>()?;
            list.sort();
            list.dedup();
            let (first, last) = (list[0], *list.last().expect("split yields one item"));
            if list.len() != last as usize - first as usize + 1 {
                return Err(format!("stages `{s}` are not contiguous"));
            }
            (first, last)
        };
        if first > last {
            return Err(format!("stage range `{s}` runs backwards"));
        }
        Ok(StageRange { first, last })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub trunk: Option<PathBuf>,
    pub trunk_format: Option<TrunkFormat>,
    pub seed_point: Option<Point3>,
    /// `None` uses the built-in primary boxes.
    pub catalog: Option<PathBuf>,
    /// Restricts the catalog to these box ids.
    pub boxes: Option<Vec<String>>,
    pub orientations: Option<Vec<Orientation>>,
    pub merge: MergeParams,
    pub drop_growth_mm: f64,
    pub search: SearchConfig,
    pub workers: usize,
    pub out: PathBuf,
    pub stages: StageRange,
    pub export_obj: bool,
    pub mc_samples: u64,
    pub mc_seed: u64,
    /// Recompute selected stages even when their cached outputs are current.
    pub force: bool,
}

impl RunConfig {
    pub fn new(trunk: Option<PathBuf>, out: PathBuf) -> Self {
        RunConfig {
            trunk,
            trunk_format: None,
            seed_point: None,
            catalog: None,
            boxes: None,
            orientations: None,
            merge: MergeParams::new(DEFAULT_MERGE_REL_PCT, DEFAULT_MERGE_ABS_MM3, DEFAULT_RNG_SEED)
                .expect("default merge bounds are valid"),
            drop_growth_mm: DEFAULT_DROP_GROWTH_MM,
            search: SearchConfig::default(),
            workers: 1,
            out,
            stages: StageRange::all(),
            export_obj: false,
            mc_samples: DEFAULT_MC_SAMPLES,
            mc_seed: DEFAULT_MC_SEED,
            force: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Unreadable(String),
    #[error("malformed trunk: {0}")]
    MalformedTrunk(String),
    #[error("every box orientation has an empty feasible region")]
    AllEmpty,
    #[error("time limit reached before any packing was found")]
    TimeoutNoPacking,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Unreadable(_) => 3,
            PipelineError::MalformedTrunk(_) => 4,
            PipelineError::AllEmpty => 5,
            PipelineError::TimeoutNoPacking => 6,
            PipelineError::Config(_) => 2,
            PipelineError::Other(_) => 1,
        }
    }
}

impl From<FreespaceError> for PipelineError {
    fn from(e: FreespaceError) -> Self {
        match e {
            FreespaceError::Io { .. } => PipelineError::Unreadable(e.to_string()),
            FreespaceError::MalformedRegion(_) => PipelineError::Unreadable(e.to_string()),
            other => PipelineError::MalformedTrunk(other.to_string()),
        }
    }
}

impl From<CatalogError> for PipelineError {
    fn from(e: CatalogError) -> Self {
        PipelineError::Unreadable(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Other(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyEntry {
    #[serde(rename = "box")]
    pub box_id: String,
    pub orientation: Orientation,
    pub reason: EmptyReason,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionSoundness {
    pub region: String,
    #[serde(flatten)]
    pub report: SoundnessReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    Cached,
    Skipped,
}

/// What a run did, for the caller to print.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub stages: Vec<(Stage, StageStatus)>,
    pub regions: usize,
    pub empty: Vec<EmptyEntry>,
    pub dropped_triangles: usize,
    pub soundness_violations: u64,
    pub merges: usize,
    pub drops: usize,
    pub packing: Option<PackingResult>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn stamp_path(out: &Path, stage: Stage) -> PathBuf {
    out.join("stamps").join(format!("{}.sha256", stage.name()))
}

/// Lists `dir/*.json` sorted by file name.
fn json_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| PipelineError::Unreadable(format!("missing stage input {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn read_regions(dir: &Path) -> Result<Vec<FeasibleRegion>, PipelineError> {
    json_files(dir)?
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| PipelineError::Unreadable(format!("{}: {e}", p.display())))?;
            FeasibleRegion::from_json(&text)
                .map_err(|e| PipelineError::Unreadable(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Replaces `dir` by one file per region.
fn write_regions(dir: &Path, regions: &[FeasibleRegion]) -> Result<(), PipelineError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for r in regions {
        write(&dir.join(format!("{}.json", r.key())), r.to_json())?;
    }
    Ok(())
}

struct Run<'a> {
    cfg: &'a RunConfig,
    catalog: Vec<BoxType>,
    summary: RunSummary,
}

impl Run<'_> {
    fn path(&self, rel: &str) -> PathBuf {
        self.cfg.out.join(rel)
    }

    fn wanted(&self, r: &FeasibleRegion) -> bool {
        self.catalog.iter().any(|b| b.id == r.box_id)
            && self.cfg.orientations.as_ref().is_none_or(|os| os.contains(&r.orientation))
    }

    /// Fingerprint of a stage: its parameters plus the bytes of its inputs.
    fn fingerprint(&self, stage: Stage, params: &str, inputs: &[PathBuf]) -> Result<String, PipelineError> {
        let mut h = Sha256::new();
        h.update(stage.name());
        h.update([0]);
        h.update(params);
        for p in inputs {
            h.update([0]);
            h.update(p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
            h.update([0]);
            h.update(fs::read(p).map_err(|e| PipelineError::Unreadable(format!("{}: {e}", p.display())))?);
        }
        Ok(hex(&h.finalize()))
    }

    fn is_current(&self, stage: Stage, fp: &str, outputs: &[PathBuf]) -> bool {
        !self.cfg.force
            && fs::read_to_string(stamp_path(&self.cfg.out, stage)).is_ok_and(|s| s.trim() == fp)
            && outputs.iter().all(|p| p.exists())
    }

    fn stamp(&self, stage: Stage, fp: &str) -> Result<(), PipelineError> {
        write(&stamp_path(&self.cfg.out, stage), format!("{fp}\n"))
    }

    fn clear_stamp(&self, stage: Stage) {
        let _ = fs::remove_file(stamp_path(&self.cfg.out, stage));
    }

    fn inputs_of(&self, stage: Stage) -> Result<Vec<PathBuf>, PipelineError> {
        let prev = Stage::ALL[stage as usize - 1];
        json_files(&self.path(prev.region_dir().expect("earlier stages write regions")))
    }

    fn feasible(&mut self) -> Result<(), PipelineError> {
        let trunk_path = self
            .cfg
            .trunk
            .clone()
            .ok_or_else(|| PipelineError::Config("the feasible stage needs --trunk".into()))?;
        let mut inputs = vec![trunk_path.clone()];
        inputs.extend(self.cfg.catalog.clone());
        let params = format!(
            "{:?}|{:?}|{:?}|{:?}|{:?}",
            self.cfg.trunk_format,
            self.cfg.seed_point,
            self.cfg.boxes,
            self.cfg.orientations,
            self.catalog.iter().map(|b| (&b.id, &b.dims, b.max_count)).collect::<Vec<_>>()
        );
        let fp = match self.fingerprint(Stage::Feasible, &params, &inputs) {
            Err(PipelineError::Unreadable(m)) => return Err(PipelineError::Unreadable(format!("cannot read input: {m}"))),
            other => other?,
        };
        let outputs = [self.path("regions"), self.path("empty_regions.json"), self.path("trunk.json")];
        if self.is_current(Stage::Feasible, &fp, &outputs) {
            self.summary.stages.push((Stage::Feasible, StageStatus::Cached));
            self.summary.empty = read_empty(&self.path("empty_regions.json"))?;
            return Ok(());
        }
        self.clear_stamp(Stage::Feasible);
        let loaded = TrunkModel::load(&trunk_path, self.cfg.trunk_format, self.cfg.seed_point.clone())?;
        self.summary.dropped_triangles = loaded.dropped_triangles;
        let outcomes = compute_all_regions(&loaded.model, &self.catalog, self.cfg.orientations.as_deref())?;
        let mut regions = Vec::new();
        let mut empty = Vec::new();
        for (box_id, orientation, outcome) in outcomes {
            match outcome {
                RegionOutcome::Region(r) => regions.push(*r),
                RegionOutcome::Empty(reason) => empty.push(EmptyEntry { box_id, orientation, reason }),
            }
        }
        write_regions(&self.path("regions"), &regions)?;
        write(&self.path("empty_regions.json"), serde_json::to_string_pretty(&empty).expect("serializes"))?;
        write(&self.path("trunk.json"), loaded.model.to_json())?;
        self.summary.empty = empty;
        self.stamp(Stage::Feasible, &fp)?;
        self.summary.stages.push((Stage::Feasible, StageStatus::Ran));
        if regions.is_empty() {
            return Err(PipelineError::AllEmpty);
        }
        Ok(())
    }

    fn describe(&mut self) -> Result<(), PipelineError> {
        let inputs = self.inputs_of(Stage::Describe)?;
        let params = format!("{}|{}", self.cfg.mc_samples, self.cfg.mc_seed);
        let fp = self.fingerprint(Stage::Describe, &params, &inputs)?;
        let outputs = [self.path("described"), self.path("region_report.txt"), self.path("region_report.csv")];
        if self.is_current(Stage::Describe, &fp, &outputs) {
            self.summary.stages.push((Stage::Describe, StageStatus::Cached));
            return Ok(());
        }
        self.clear_stamp(Stage::Describe);
        let regions = read_regions(&self.path("regions"))?;
        // the trunk copy written by the feasible stage, for the soundness post-check
        let trunk = fs::read_to_string(self.path("trunk.json"))
            .ok()
            .and_then(|t| TrunkModel::parse(&t, guess_format(&t), None).ok())
            .map(|l| l.model);
        let (samples, seed) = (self.cfg.mc_samples, self.cfg.mc_seed);
        let described: Vec<(FeasibleRegion, Option<SoundnessReport>)> = regions
            .into_par_iter()
            .map(|mut r| {
                r.volume = Some(monte_carlo_volume(&r, samples, seed));
                let sound = trunk.as_ref().map(|t| soundness_check(&r, t, SOUNDNESS_SAMPLES.min(samples), seed ^ 1));
                (r, sound)
            })
            .collect();
        let mut kept = Vec::new();
        let mut soundness = Vec::new();
        let mut empty = Vec::new();
        for (r, sound) in described {
            if let Some(s) = sound {
                self.summary.soundness_violations += s.violations;
                soundness.push(RegionSoundness { region: r.key(), report: s });
            }
            if r.volume.as_ref().is_some_and(|v| v.free == 0) {
                empty.push(EmptyEntry { box_id: r.box_id.clone(), orientation: r.orientation, reason: EmptyReason::NoFreeSamples });
            } else {
                kept.push(r);
            }
        }
        let rows = region_report(&kept);
        write_regions(&self.path("described"), &kept)?;
        write(&self.path("region_report.txt"), region_report_text(&rows))?;
        write(&self.path("region_report.csv"), region_report_csv(&rows))?;
        write(&self.path("soundness.json"), serde_json::to_string_pretty(&soundness).expect("serializes"))?;
        write(&self.path("described_empty.json"), serde_json::to_string_pretty(&empty).expect("serializes"))?;
        self.summary.empty.extend(empty);
        self.stamp(Stage::Describe, &fp)?;
        self.summary.stages.push((Stage::Describe, StageStatus::Ran));
        if kept.is_empty() {
            return Err(PipelineError::AllEmpty);
        }
        Ok(())
    }

    fn simplify(&mut self) -> Result<(), PipelineError> {
        let inputs = self.inputs_of(Stage::Simplify)?;
        let params = format!(
            "{}|{}|{}|{}|{}|{}",
            self.cfg.merge.rel_bound,
            self.cfg.merge.abs_bound,
            self.cfg.merge.rng_seed,
            self.cfg.drop_growth_mm,
            self.cfg.mc_samples,
            self.cfg.mc_seed
        );
        let fp = self.fingerprint(Stage::Simplify, &params, &inputs)?;
        let outputs = [
            self.path("simplified"),
            self.path("logs/merge.jsonl"),
            self.path("logs/drop.jsonl"),
            self.path("simplification_report.txt"),
            self.path("simplification_report.csv"),
        ];
        if self.is_current(Stage::Simplify, &fp, &outputs) {
            self.summary.stages.push((Stage::Simplify, StageStatus::Cached));
            return Ok(());
        }
        self.clear_stamp(Stage::Simplify);
        let regions = read_regions(&self.path("described"))?;
        let (merge, growth) = (&self.cfg.merge, self.cfg.drop_growth_mm);
        let (samples, seed) = (self.cfg.mc_samples, self.cfg.mc_seed);
        let results: Vec<_> = regions
            .par_iter()
            .map(|r| {
                let (merged, merge_log) = merge_obstacles(r, merge);
                let (dropped, drop_log) = drop_facets(&merged, growth);
                let report = simplification_report(r, &dropped, samples, seed);
                (dropped, merge_log, drop_log, report)
            })
            .collect();
        let mut simplified = Vec::new();
        let mut merges = String::new();
        let mut drops = String::new();
        let mut reports: Vec<SimplificationReport> = Vec::new();
        for (r, m, d, rep) in results {
            self.summary.merges += m.len();
            self.summary.drops += d.iter().filter(|e| e.decision == crate::simplify::DropDecision::Dropped).count();
            merges.push_str(&log_to_json_lines(&m));
            drops.push_str(&log_to_json_lines(&d));
            simplified.push(r);
            reports.push(rep);
        }
        write_regions(&self.path("simplified"), &simplified)?;
        write(&self.path("logs/merge.jsonl"), merges)?;
        write(&self.path("logs/drop.jsonl"), drops)?;
        write(&self.path("simplification_report.txt"), simplification_report_text(&reports))?;
        write(&self.path("simplification_report.csv"), simplification_report_csv(&reports))?;
        self.stamp(Stage::Simplify, &fp)?;
        self.summary.stages.push((Stage::Simplify, StageStatus::Ran));
        Ok(())
    }

    fn enumerate(&mut self) -> Result<(), PipelineError> {
        let inputs = self.inputs_of(Stage::Enumerate)?;
        let search = SearchConfig { root_parallelism: self.cfg.workers, ..self.cfg.search.clone() };
        let params = format!(
            "{:?}|{}|{:?}|{:?}|{:?}",
            self.cfg.orientations,
            search.prune_enabled,
            search.max_nodes,
            search.time_limit,
            self.catalog.iter().map(|b| (&b.id, &b.dims, b.max_count)).collect::<Vec<_>>()
        );
        let fp = self.fingerprint(Stage::Enumerate, &params, &inputs)?;
        let mut outputs = vec![self.path("packing.json")];
        if self.cfg.export_obj {
            outputs.push(self.path("packing.obj"));
        }
        if self.is_current(Stage::Enumerate, &fp, &outputs) {
            let text = fs::read_to_string(self.path("packing.json")).map_err(|e| io_err(&self.path("packing.json"), e))?;
            let result = PackingResult::from_json(&text).map_err(|e| PipelineError::Unreadable(e.to_string()))?;
            self.summary.packing = Some(result);
            self.summary.stages.push((Stage::Enumerate, StageStatus::Cached));
            return Ok(());
        }
        self.clear_stamp(Stage::Enumerate);
        let regions: Vec<FeasibleRegion> =
            read_regions(&self.path("simplified"))?.into_iter().filter(|r| self.wanted(r)).collect();
        self.summary.regions = regions.len();
        let result = match enumerate(&regions, &self.catalog, &search) {
            Ok(r) => r,
            Err(SearchError::NoRegions) => {
                write(&self.path("packing.json"), PackingResult::empty().to_json())?;
                return Err(PipelineError::AllEmpty);
            }
            Err(SearchError::InvalidConfig(m)) => return Err(PipelineError::Config(m)),
            Err(e) => return Err(PipelineError::Other(e.to_string())),
        };
        validate_packing(&result, &regions, &self.catalog)
            .map_err(|e| PipelineError::Other(format!("packing failed validation: {e}")))?;
        write(&self.path("packing.json"), result.to_json())?;
        if self.cfg.export_obj {
            let p = self.path("packing.obj");
            write_obj(&result, &p).map_err(|e| io_err(&p, e))?;
        }
        self.summary.stages.push((Stage::Enumerate, StageStatus::Ran));
        let timed_out_empty = result.timed_out && result.placements.is_empty();
        // an incomplete search is not a reusable answer
        if !result.timed_out && !result.node_limit_hit {
            self.stamp(Stage::Enumerate, &fp)?;
        }
        self.summary.packing = Some(result);
        if timed_out_empty {
            return Err(PipelineError::TimeoutNoPacking);
        }
        Ok(())
    }
}

fn read_empty(path: &Path) -> Result<Vec<EmptyEntry>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::Unreadable(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Unreadable(format!("{}: {e}", path.display())))
}

fn guess_format(text: &str) -> TrunkFormat {
    if text.contains("\"shell\"") {
        TrunkFormat::ConvexJson
    } else {
        TrunkFormat::MeshJson
    }
}

fn load_run_catalog(cfg: &RunConfig) -> Result<Vec<BoxType>, PipelineError> {
    let mut catalog = match &cfg.catalog {
        Some(p) => load_catalog(p)?,
        None => default_run_catalog(),
    };
    if let Some(ids) = &cfg.boxes {
        if let Some(missing) = ids.iter().find(|id| !catalog.iter().any(|b| &b.id == *id)) {
            return Err(PipelineError::Config(format!("box `{missing}` is not in the catalog")));
        }
        catalog.retain(|b| ids.contains(&b.id));
    }
    Ok(catalog)
}

/// Runs the selected stages. On error the summary of the stages completed
/// so far is returned alongside.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, (PipelineError, RunSummary)> {
    let empty_summary = RunSummary {
        stages: Vec::new(),
        regions: 0,
        empty: Vec::new(),
        dropped_triangles: 0,
        soundness_violations: 0,
        merges: 0,
        drops: 0,
        packing: None,
    };
    if cfg.workers == 0 {
        return Err((PipelineError::Config("worker count must be at least 1".into()), empty_summary));
    }
    let catalog = match load_run_catalog(cfg) {
        Ok(c) => c,
        Err(e) => return Err((e, empty_summary)),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => return Err((PipelineError::Other(e.to_string()), empty_summary)),
    };
    let mut state = Run { cfg, catalog, summary: empty_summary };
    let outcome = pool.install(|| {
        for stage in Stage::ALL {
            if !cfg.stages.contains(stage) {
                state.summary.stages.push((stage, StageStatus::Skipped));
                continue;
            }
            match stage {
                Stage::Feasible => state.feasible()?,
                Stage::Describe => state.describe()?,
                Stage::Simplify => state.simplify()?,
                Stage::Enumerate => state.enumerate()?,
            }
        }
        Ok(())
    });
    match outcome {
        Ok(()) => Ok(state.summary),
        Err(e) => Err((e, state.summary)),
    }
}
