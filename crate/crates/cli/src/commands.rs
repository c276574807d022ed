use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::Args;
use log::{info, warn};
use pedsim::filterpipe::{
    keyword_filter, read_tag_config, tag_behavior, tag_distribution, write_filter_report, TagConfig, TagDistribution,
    TagSet,
};
use pedsim::io::{
    from_json, read_clip, read_log, read_motion, read_scenario_spec, read_skeleton_map, read_trajectory, to_canonical_json,
    write_clip, write_log, write_skeleton_map, write_motion, write_scenario_spec, write_trajectory, ScenarioLog, ScenarioSpec,
};
use pedsim::metrics::{read_report, report, reports_to_csv, write_report, MetricsReport};
use pedsim::retarget::{default_skeleton_map, retarget_clip};
use pedsim::scenario::{builtin_planner, run, ClipLibrary, Planner, StdioPlanner, DEFAULT_TICK};
use pedsim::synth::{kind_of, synthetic_corpus, synthetic_scenarios, SynthKind};
use pedsim::trajectory::{
    class_stats, classify, reconstruct_global, resample, BehaviorClass, ClassThresholds, GlobalTrajectory, TrajectoryStats,
    STATS_SAMPLES,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::FileConfig;
use crate::error::CliError;
use crate::fsutil::{ensure_dir, read_file, read_inputs, write_file, InputFile};
use crate::manifest::{sha256_hex, Manifest};
use crate::plot;

fn parse_all<T: Send>(
    inputs: &[InputFile],
    parse: impl Fn(&[u8]) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    inputs.par_iter().map(|f| parse(&f.bytes).map_err(|e| e.in_file(&f.path))).collect()
}

fn require_inputs(inputs: &[InputFile], root: &Path) -> Result<(), CliError> {
    if inputs.is_empty() {
        return Err(CliError::Validation(format!("{}: no input files", root.display())));
    }
    Ok(())
}

fn record_inputs(manifest: &mut Manifest, inputs: &[InputFile]) {
    for f in inputs {
        manifest.input(f.path.display().to_string(), &f.bytes);
    }
}

struct Outputs<'a> {
    root: &'a Path,
    manifest: Manifest,
}

impl<'a> Outputs<'a> {
    fn new(root: &'a Path, manifest: Manifest) -> Result<Self, CliError> {
        ensure_dir(root)?;
        Ok(Outputs { root, manifest })
    }

    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_file(&self.root.join(rel), bytes)?;
        self.manifest.output(rel, bytes);
        Ok(())
    }

    fn finish(self, stage: &str) -> Result<(), CliError> {
        self.manifest.write(self.root, stage)
    }
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory; receives `motions/` and `scenarios/`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub motions: usize,
    #[arg(long, default_value_t = 10)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let corpus = synthetic_corpus(a.motions, a.seed);
    let keep: BTreeSet<String> =
        keyword_filter(&corpus, &TagConfig::default().keywords)?.accepted.into_iter().map(|m| m.id).collect();
    let ids_of = |kinds: &[SynthKind]| -> Vec<String> {
        corpus
            .iter()
            .filter(|m| keep.contains(&m.id) && kind_of(m).is_some_and(|k| kinds.contains(&k)))
            .map(|m| m.id.clone())
            .collect()
    };
    let moving = ids_of(&[SynthKind::Walk, SynthKind::Run]);
    let idle = ids_of(&[SynthKind::Stand]);
    let scenarios = synthetic_scenarios(a.scenarios, a.seed, &moving, &idle);
    let mut out = Outputs::new(&a.out, Manifest::new(&json!({"motions": a.motions, "scenarios": a.scenarios, "seed": a.seed})))?;
    for m in &corpus {
        out.put(&format!("motions/{}.json", m.id), &write_motion(m)?)?;
    }
    for s in &scenarios {
        out.put(&format!("scenarios/{}.json", s.id), &write_scenario_spec(s)?)?;
    }
    info!("synth: {} motions, {} scenarios", corpus.len(), scenarios.len());
    out.finish("synth")
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// Motion file or directory of `*.json` motions.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated acceptance keywords; overrides the config file.
    #[arg(long, value_delimiter = ',')]
    pub keywords: Option<Vec<String>>,
    /// JSON tag config (`keywords` and per-tag stem lists).
    #[arg(long)]
    pub tags_config: Option<PathBuf>,
}

pub fn filter(a: &FilterArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let mut tags = match &a.tags_config {
        Some(p) => read_tag_config(&read_file(p)?).map_err(|e| CliError::from(e).in_file(p))?,
        None => TagConfig::default(),
    };
    if let Some(t) = &cfg.tags {
        if a.tags_config.is_none() {
            tags.tags = t.clone();
        }
    }
    if let Some(k) = a.keywords.clone().or_else(|| if a.tags_config.is_none() { cfg.keywords.clone() } else { None }) {
        tags.keywords = k;
    }
    tags.validate()?;
    let inputs = read_inputs(&a.input, ".json")?;
    require_inputs(&inputs, &a.input)?;
    let corpus = parse_all(&inputs, |b| Ok(read_motion(b)?))?;
    let outcome = keyword_filter(&corpus, &tags.keywords)?;
    let tagged: BTreeMap<String, TagSet> =
        outcome.accepted.iter().map(|m| (m.id.clone(), tag_behavior(&m.annotation, &tags))).collect();
    let mut manifest = Manifest::new(&tags);
    record_inputs(&mut manifest, &inputs);
    let mut out = Outputs::new(&a.out, manifest)?;
    for m in &outcome.accepted {
        out.put(&format!("accepted/{}.json", m.id), &write_motion(m)?)?;
    }
    out.put("filter_report.ndjson", &write_filter_report(&outcome.report))?;
    out.put("tags.json", &to_canonical_json(&tagged))?;
    info!("filter: accepted {} of {}", outcome.accepted.len(), corpus.len());
    out.finish("filter")
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Resample to this rate before integrating.
    #[arg(long)]
    pub resample_hz: Option<f64>,
}

pub fn reconstruct(a: &ReconstructArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let hz = a.resample_hz.or(cfg.resample_hz);
    let inputs = read_inputs(&a.input, ".json")?;
    require_inputs(&inputs, &a.input)?;
    let trajs: Vec<GlobalTrajectory> = parse_all(&inputs, |b| {
        let seq = read_motion(b)?;
        let seq = match hz {
            Some(hz) => resample(&seq, hz)?,
            None => seq,
        };
        Ok(reconstruct_global(&seq, Default::default())?)
    })?;
    let mut manifest = Manifest::new(&json!({ "resample_hz": hz }));
    record_inputs(&mut manifest, &inputs);
    let mut out = Outputs::new(&a.out, manifest)?;
    for t in &trajs {
        out.put(&format!("{}.trajectory.json", t.id), &write_trajectory(t)?)?;
    }
    info!("reconstruct: {} trajectories", trajs.len());
    out.finish("reconstruct")
}

#[derive(Args, Debug)]
pub struct RetargetArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Skeleton map JSON; the built-in reference rig when absent.
    #[arg(long)]
    pub skeleton_map: Option<PathBuf>,
}

pub fn retarget(a: &RetargetArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let map_path = a.skeleton_map.as_ref().or(cfg.skeleton_map.as_ref());
    let mut manifest;
    let map = match map_path {
        Some(p) => {
            let bytes = read_file(p)?;
            let map = read_skeleton_map(&bytes).map_err(|e| CliError::from(e).in_file(p))?;
            manifest = Manifest::new(&json!({ "skeleton_map": sha256_hex(&write_skeleton_map(&map)?) }));
            manifest.input(p.display().to_string(), &bytes);
            map
        }
        None => {
            let map = default_skeleton_map();
            manifest = Manifest::new(&json!({ "skeleton_map": sha256_hex(&write_skeleton_map(&map)?) }));
            map
        }
    };
    let inputs = read_inputs(&a.input, ".json")?;
    require_inputs(&inputs, &a.input)?;
    let clips = parse_all(&inputs, |b| Ok(retarget_clip(&read_motion(b)?, &map)?))?;
    record_inputs(&mut manifest, &inputs);
    let mut out = Outputs::new(&a.out, manifest)?;
    let mut flagged = 0;
    for c in &clips {
        flagged += c.gimbal_flags.iter().filter(|f| **f).count();
        out.put(&format!("{}.clip.json", c.id), &write_clip(c)?)?;
    }
    if flagged > 0 {
        warn!("retarget: {flagged} frames flagged near gimbal lock");
    }
    info!("retarget: {} clips", clips.len());
    out.finish("retarget")
}

/// Output of `stats`, input of `plot`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsDocument {
    pub thresholds: ClassThresholds,
    pub classes: BTreeMap<String, BehaviorClass>,
    pub trajectories: TrajectoryStats,
    pub tags: Option<TagDistribution>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Trajectory file or directory of `*.trajectory.json`.
    #[arg(long)]
    pub trajectories: PathBuf,
    /// `tags.json` from `filter`; adds the tag distribution per class.
    #[arg(long)]
    pub tags: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub attempt_min: Option<f64>,
    #[arg(long)]
    pub cross_min: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn stats(a: &StatsArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let d = ClassThresholds::default();
    let th = ClassThresholds::new(
        a.attempt_min.or(cfg.attempt_min).unwrap_or(d.attempt_min),
        a.cross_min.or(cfg.cross_min).unwrap_or(d.cross_min),
    )?;
    let samples = a.samples.or(cfg.stats_samples).unwrap_or(STATS_SAMPLES);
    if samples < 2 {
        return Err(CliError::Validation(format!("samples must be at least 2, got {samples}")));
    }
    let inputs = read_inputs(&a.trajectories, ".trajectory.json")?;
    require_inputs(&inputs, &a.trajectories)?;
    let trajs = parse_all(&inputs, |b| Ok(read_trajectory(b)?))?;
    let mut manifest = Manifest::new(&json!({ "thresholds": th, "samples": samples }));
    record_inputs(&mut manifest, &inputs);
    let items: Vec<(GlobalTrajectory, BehaviorClass)> = trajs.into_iter().map(|t| {
        let c = classify(&t, &th);
        (t, c)
    }).collect();
    let classes: BTreeMap<String, BehaviorClass> = items.iter().map(|(t, c)| (t.id.clone(), *c)).collect();
    let tags = match &a.tags {
        Some(p) => {
            let bytes = read_file(p)?;
            manifest.input(p.display().to_string(), &bytes);
            let sets: BTreeMap<String, TagSet> = from_json(&bytes).map_err(|e| CliError::from(e).in_file(p))?;
            let rows: Vec<(TagSet, Option<BehaviorClass>)> =
                sets.into_iter().map(|(id, s)| (s, classes.get(&id).copied())).collect();
            Some(tag_distribution(&rows))
        }
        None => None,
    };
    let trajectories = class_stats(&items, samples);
    for w in &trajectories.warnings {
        warn!("stats: {w}");
    }
    let doc = StatsDocument { thresholds: th, classes, trajectories, tags };
    let mut out = Outputs::new(&a.out, manifest)?;
    out.put("stats.json", &to_canonical_json(&doc))?;
    out.finish("stats")
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario spec file or directory of `*.json` specs.
    #[arg(long)]
    pub scenarios: PathBuf,
    /// Directory of `*.clip.json` clips, keyed by clip id.
    #[arg(long)]
    pub clips: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// RNG seed applied to every scenario.
    #[arg(long)]
    pub seed: u64,
    /// Built-in planner: constant_speed, reactive_brake or reactive_brake_blind.
    #[arg(long, conflicts_with = "planner_cmd")]
    pub planner: Option<String>,
    /// External planner program speaking the NDJSON stdio protocol.
    #[arg(long)]
    pub planner_cmd: Option<String>,
    /// Name recorded for the external planner.
    #[arg(long, default_value = "external", requires = "planner_cmd")]
    pub planner_name: String,
    /// Fixed step in seconds.
    #[arg(long)]
    pub tick: Option<f64>,
    /// Run scenarios concurrently, each with its own planner instance.
    #[arg(long)]
    pub parallel_runs: bool,
}

enum PlannerChoice {
    Builtin(String),
    External { name: String, program: String, args: Vec<String> },
}

impl PlannerChoice {
    fn instantiate(&self, budget_ms: f64) -> Result<Box<dyn Planner>, CliError> {
        match self {
            PlannerChoice::Builtin(name) => {
                builtin_planner(name).ok_or_else(|| CliError::Validation(format!("unknown planner `{name}`")))
            }
            PlannerChoice::External { name, program, args } => Ok(Box::new(
                StdioPlanner::spawn(name, program, args, budget_ms).map_err(|e| CliError::Processing(e.to_string()))?,
            )),
        }
    }

    fn label(&self) -> String {
        match self {
            PlannerChoice::Builtin(n) => n.clone(),
            PlannerChoice::External { name, program, args } => format!("{name}={program} {}", args.join(" ")),
        }
    }
}

fn simulate_one(spec: &ScenarioSpec, clips: &ClipLibrary, choice: &PlannerChoice, tick: f64) -> Result<ScenarioLog, CliError> {
    let mut planner = choice.instantiate(spec.settings.tick_budget_ms)?;
    Ok(run(spec, clips, planner.as_mut(), tick)?)
}

pub fn simulate(a: &SimulateArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let tick = a.tick.or(cfg.tick).unwrap_or(DEFAULT_TICK);
    if !(tick.is_finite() && tick > 0.0) {
        return Err(CliError::Validation(format!("tick must be positive, got {tick}")));
    }
    let spec_files = read_inputs(&a.scenarios, ".json")?;
    require_inputs(&spec_files, &a.scenarios)?;
    let clip_files = read_inputs(&a.clips, ".clip.json")?;
    let mut specs = parse_all(&spec_files, |b| Ok(read_scenario_spec(b)?))?;
    let clips: ClipLibrary = parse_all(&clip_files, |b| Ok(read_clip(b)?))?.into_iter().map(|c| (c.id.clone(), c)).collect();
    let external = a.planner_cmd.as_ref().map(|cmd| {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next().unwrap_or_default();
        PlannerChoice::External { name: a.planner_name.clone(), program, args: parts.collect() }
    });
    for s in &mut specs {
        s.seed = a.seed;
    }
    let named = |s: &ScenarioSpec| -> PlannerChoice {
        let name = a.planner.clone().or(cfg.planner.clone()).or(s.ego.planner.clone()).unwrap_or("constant_speed".into());
        PlannerChoice::Builtin(name)
    };
    let choices: Vec<PlannerChoice> = specs
        .iter()
        .map(|s| match &external {
            Some(PlannerChoice::External { name, program, args }) => {
                PlannerChoice::External { name: name.clone(), program: program.clone(), args: args.clone() }
            }
            _ => named(s),
        })
        .collect();
    for c in &choices {
        if let PlannerChoice::Builtin(n) = c {
            if builtin_planner(n).is_none() {
                return Err(CliError::Validation(format!("unknown planner `{n}`")));
            }
        }
    }
    let logs: Vec<ScenarioLog> = if a.parallel_runs {
        specs.par_iter().zip(&choices).map(|(s, c)| simulate_one(s, &clips, c, tick)).collect::<Result<_, _>>()?
    } else {
        specs.iter().zip(&choices).map(|(s, c)| simulate_one(s, &clips, c, tick)).collect::<Result<_, _>>()?
    };
    let planners: BTreeSet<String> = choices.iter().map(PlannerChoice::label).collect();
    let mut manifest = Manifest::new(&json!({ "seed": a.seed, "tick": tick, "planners": planners }));
    record_inputs(&mut manifest, &spec_files);
    record_inputs(&mut manifest, &clip_files);
    let mut out = Outputs::new(&a.out, manifest)?;
    for log in &logs {
        out.put(&format!("{}.log.ndjson", log.header.scenario_id), &write_log(log)?)?;
        info!(
            "simulate: {} {:?} collisions={} distance={:.1} m",
            log.header.scenario_id,
            log.summary.outcome,
            log.events_of(pedsim::io::EventKind::Collision).count(),
            log.summary.distance_m
        );
    }
    out.finish("simulate")
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Log file or directory of `*.log.ndjson`.
    #[arg(long)]
    pub logs: PathBuf,
    /// Scenario specs the logs were produced from.
    #[arg(long)]
    pub scenarios: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let log_files = read_inputs(&a.logs, ".log.ndjson")?;
    require_inputs(&log_files, &a.logs)?;
    let spec_files = read_inputs(&a.scenarios, ".json")?;
    let logs = parse_all(&log_files, |b| Ok(read_log(b)?))?;
    let wanted: BTreeSet<&str> = logs.iter().map(|l| l.header.scenario_id.as_str()).collect();
    let specs: Vec<ScenarioSpec> = parse_all(&spec_files, |b| Ok(read_scenario_spec(b)?))?
        .into_iter()
        .filter(|s| wanted.contains(s.id.as_str()))
        .collect();
    let r = report(&logs, &specs)?;
    let mut manifest = Manifest::new(&json!({}));
    record_inputs(&mut manifest, &log_files);
    record_inputs(&mut manifest, &spec_files);
    let mut out = Outputs::new(&a.out, manifest)?;
    out.put("report.json", &write_report(&r))?;
    out.put("report.csv", reports_to_csv(std::slice::from_ref(&r)).as_bytes())?;
    info!(
        "evaluate: {} collisions/km={:.3} fpbr={:.3} ade={}",
        r.model,
        r.collisions_per_km,
        r.fpbr,
        r.ade.map_or("-".into(), |v| format!("{v:.3}"))
    );
    out.finish("evaluate")
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// `stats.json` or `report.json`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

enum PlotInput {
    Stats(Box<StatsDocument>),
    Report(Box<MetricsReport>),
}

fn read_plot_input(bytes: &[u8]) -> Result<PlotInput, CliError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| CliError::Validation(format!("invalid JSON: {e}")))?;
    let has = |k: &str| value.get(k).is_some();
    if has("thresholds") {
        Ok(PlotInput::Stats(Box::new(from_json(bytes)?)))
    } else if has("model") {
        Ok(PlotInput::Report(Box::new(read_report(bytes)?)))
    } else {
        Err(CliError::Validation("expected a stats or report document".into()))
    }
}

pub fn plot(a: &PlotArgs) -> Result<(), CliError> {
    let bytes = read_file(&a.input)?;
    let input = read_plot_input(&bytes).map_err(|e| e.in_file(&a.input))?;
    let mut manifest = Manifest::new(&json!({}));
    manifest.input(a.input.display().to_string(), &bytes);
    let mut out = Outputs::new(&a.out, manifest)?;
    match input {
        PlotInput::Stats(doc) => {
            let tags = doc.tags.clone().unwrap_or_else(|| tag_distribution(&[]));
            out.put("tag_distribution.svg", plot::tag_distribution_svg(&tags).as_bytes())?;
            out.put("class_curves.svg", plot::class_curves_svg(&doc.trajectories).as_bytes())?;
        }
        PlotInput::Report(r) => out.put("report.svg", plot::report_svg(&r).as_bytes())?,
    }
    out.finish("plot")
}
