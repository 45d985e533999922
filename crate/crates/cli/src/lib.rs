//! Command implementations behind the `hapticnav` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use hapticnav::experiment::{
    ingest_table, read_percent_table, read_trial_log, responder_registry, run_cohort,
    write_trial_log, SimulatedResponder, TrialRecord, DEFAULT_PARTICIPANTS, DEFAULT_REPS,
    DEFAULT_TRIALS_PER_ROW,
};
use hapticnav::geometry::{load_scene, HitTarget, Scene};
use hapticnav::haptics::{patterns_for, Group, Motor, MotorMask};
use hapticnav::pipeline::{quadrant, write_run_log, Pipeline, TickOutput};
use hapticnav::render::{renderer_registry, PosedFrame, RenderInput};
use hapticnav::stats::{
    accuracy_by_participant, accuracy_by_pattern, confusion_from_trials, mean_accuracy,
    one_way_anova, posthoc_registry, report, ConfusionMatrix, StatsError,
};
use hapticnav::tof::{coverage_check, fuse, sense, SensorId, REFERENCE_HEIGHT_M};

use config::{load_config, RunConfig};

/// How a command finished; maps to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The inputs were fine but the data are degenerate for a statistic.
    Degenerate,
    /// A checked claim does not hold.
    ClaimFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::ClaimFailed => 1,
            Outcome::Degenerate => 2,
        }
    }
}

fn write_file(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run_config(config: Option<&Path>) -> Result<RunConfig> {
    match config {
        Some(p) => load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn scene_for(cfg: &RunConfig, scene: Option<&Path>) -> Result<Scene> {
    match scene.or(cfg.scene.as_deref()) {
        Some(p) => Ok(load_scene(p).with_context(|| format!("scene {}", p.display()))?),
        None => Ok(Scene::empty()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scene file (TOML); overrides the config's scene.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ticks: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Obstacles whose readings fed a triggered quadrant at this tick.
fn triggering_obstacles(out: &TickOutput, threshold_mm: f64) -> Vec<usize> {
    let grid = &out.filtered;
    let mut hits = Vec::new();
    for m in Motor::ALL {
        if !out.report.is_triggered(m) {
            continue;
        }
        let (rows, cols) = quadrant(m, grid.rows(), grid.cols());
        for r in rows {
            for c in cols.clone() {
                let z = grid.cells.get(r, c);
                if z.valid && z.mm <= threshold_mm {
                    if let HitTarget::Obstacle(i) = *out.targets.get(r, c) {
                        hits.push(i);
                    }
                }
            }
        }
    }
    hits
}

fn timeline(masks: &[(u64, MotorMask)]) -> Vec<(u64, u64, MotorMask)> {
    let mut spans: Vec<(u64, u64, MotorMask)> = Vec::new();
    for &(t, m) in masks {
        match spans.last_mut() {
            Some(last) if last.2 == m && last.1 + 1 == t => last.1 = t,
            _ => spans.push((t, t, m)),
        }
    }
    spans
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Outcome> {
    let mut cfg = run_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.ticks {
        if t == 0 {
            bail!("--ticks must be >= 1");
        }
        cfg.ticks = t;
    }
    let scene = scene_for(&cfg, args.scene.as_deref())?;
    let noise = cfg.noise.with_seed(cfg.seed);
    let mut pipeline = Pipeline::new(cfg.rig, noise, cfg.detection.clone())?;
    let hold_mm = cfg.detection.danger_threshold_mm + cfg.detection.hysteresis_mm;

    let mut first: BTreeMap<usize, (u64, MotorMask, hapticnav::Vec3)> = BTreeMap::new();
    let mut masks = Vec::with_capacity(cfg.ticks as usize);
    for t in 0..cfg.ticks {
        let (pos, heading) = cfg.trajectory.pose_at(t);
        let out = pipeline.tick_at(&scene, t, pos, heading)?;
        for i in triggering_obstacles(&out, hold_mm) {
            first.entry(i).or_insert((t, out.report.mask, pos));
        }
        masks.push((t, out.report.mask));
    }

    let mut log = Vec::new();
    write_run_log(&mut log, pipeline.log())?;
    write_file(&args.out, "run_log.csv", &log)?;

    let mut summary = String::new();
    writeln!(
        summary,
        "ticks {}, seed {}, {} obstacles",
        cfg.ticks,
        cfg.seed,
        scene.obstacles().len()
    )?;
    writeln!(summary, "first trigger:")?;
    for (i, o) in scene.obstacles().iter().enumerate() {
        match first.get(&i) {
            Some((t, m, p)) => writeln!(
                summary,
                "  {}: tick {t}, motors {}, wearer at ({:.3}, {:.3}, {:.3})",
                o.id,
                m.log_name(),
                p.x,
                p.y,
                p.z
            )?,
            None => writeln!(summary, "  {}: never", o.id)?,
        }
    }
    writeln!(summary, "mask timeline:")?;
    for (a, b, m) in timeline(&masks) {
        writeln!(summary, "  {a}-{b}: {}", m.log_name())?;
    }
    write_file(&args.out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Renderer name: heatmap, heatmap-ascii or pointcloud.
    #[arg(long, default_value = "heatmap")]
    pub mode: String,
    /// Frame document (JSON) written by an earlier render.
    #[arg(long, conflicts_with_all = ["scene", "config"])]
    pub frame: Option<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tick to sense at; selects the wearer pose on the trajectory.
    #[arg(long, default_value_t = 0)]
    pub tick: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Senses both sensors at `tick` and fuses them.
pub fn sense_scene(cfg: &RunConfig, scene: &Scene, tick: u64) -> Result<RenderInput> {
    let (pos, heading) = cfg.trajectory.pose_at(tick);
    let rig = cfg.rig.placed(pos, heading);
    let noise = cfg.noise.with_seed(cfg.seed);
    let upper = sense(scene, &rig.upper, SensorId::Upper, tick, &noise)?;
    let lower = sense(scene, &rig.lower, SensorId::Lower, tick, &noise)?;
    let combined = fuse(&upper, &lower, &rig)?;
    Ok(RenderInput {
        frames: vec![
            PosedFrame {
                pose: rig.upper,
                frame: upper,
            },
            PosedFrame {
                pose: rig.lower,
                frame: lower,
            },
        ],
        combined: Some(combined),
    })
}

pub fn cmd_render(args: &RenderArgs) -> Result<Outcome> {
    let renderer = renderer_registry().resolve(&args.mode)?;
    let input = match &args.frame {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("frame document {}", p.display()))?
        }
        None => {
            let mut cfg = run_config(args.config.as_deref())?;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            let scene = scene_for(&cfg, args.scene.as_deref())?;
            let input = sense_scene(&cfg, &scene, args.tick)?;
            write_file(
                &args.out,
                "frame.json",
                serde_json::to_string_pretty(&input)? + "\n",
            )?;
            input
        }
    };
    let bytes = renderer.render(&input)?;
    let path = write_file(
        &args.out,
        &format!("{}.{}", renderer.name(), renderer.extension()),
        bytes,
    )?;
    println!("wrote {}", path.display());
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub group: Group,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `identity`, `uniform`, or a percentage confusion table CSV.
    #[arg(long, default_value = "identity")]
    pub responder: String,
    #[arg(long, default_value_t = DEFAULT_PARTICIPANTS)]
    pub participants: usize,
    /// Trials per row when converting a table's percentages to counts.
    #[arg(long, default_value_t = DEFAULT_TRIALS_PER_ROW)]
    pub trials_per_row: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Builds a responder from a registered name or a table CSV path.
pub fn build_responder(
    source: &str,
    group: Group,
    trials_per_row: u64,
    seed: u64,
) -> Result<SimulatedResponder> {
    let patterns = patterns_for(group);
    if let Some(factory) = responder_registry().get(source) {
        return Ok(factory.build(&patterns, seed)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        bail!(
            "responder `{source}` is neither one of [{}] nor an existing table file",
            responder_registry().names().join(", ")
        );
    }
    let file = fs::File::open(path).with_context(|| format!("opening {source}"))?;
    let table = read_percent_table(file).with_context(|| format!("table {source}"))?;
    let cm = ingest_table(&table, trials_per_row)?;
    let responder = SimulatedResponder::from_confusion(&cm, seed)?;
    if let Some(missing) = patterns
        .patterns
        .iter()
        .find(|m| responder.row(**m).is_none())
    {
        bail!(
            "table {source} has no row for group {group} pattern {}",
            missing.log_name()
        );
    }
    Ok(responder)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<Outcome> {
    if args.participants == 0 {
        bail!("--participants must be >= 1");
    }
    let responder = build_responder(&args.responder, args.group, args.trials_per_row, args.seed)?;
    let cohort = run_cohort(
        args.group,
        args.reps,
        args.participants,
        args.seed,
        &responder,
    )?;
    for session in &cohort {
        let mut buf = Vec::new();
        write_trial_log(&mut buf, session)?;
        write_file(
            &args.out,
            &format!("{}.csv", session[0].participant_id),
            buf,
        )?;
    }
    let all: Vec<TrialRecord> = cohort.concat();
    let mut buf = Vec::new();
    write_trial_log(&mut buf, &all)?;
    write_file(&args.out, "trials.csv", buf)?;
    let correct = all.iter().filter(|r| r.is_correct()).count();
    println!(
        "group {}: {} participants, {} trials, accuracy {:.1}%",
        args.group,
        args.participants,
        all.len(),
        100.0 * correct as f64 / all.len() as f64
    );
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Trial log CSVs, or a single percentage confusion table CSV.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS_PER_ROW)]
    pub trials_per_row: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn is_trial_log(path: &Path) -> Result<bool> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut first = String::new();
    std::io::BufReader::new(file).read_line(&mut first)?;
    if first.trim().is_empty() {
        bail!("{} is empty", path.display());
    }
    Ok(first
        .trim_start_matches('\u{feff}')
        .starts_with("participant_id,"))
}

fn write_confusion_and_accuracy(cm: &ConfusionMatrix, out: &Path, text: &mut String) -> Result<()> {
    write_file(out, "confusion.csv", report::confusion_csv(cm))?;
    write_file(out, "accuracy.csv", report::accuracy_csv(cm)?)?;
    writeln!(text, "confusion matrix (% of row):")?;
    text.push_str(&report::confusion_text(cm));
    writeln!(text)?;
    writeln!(text, "per-pattern accuracy:")?;
    text.push_str(&report::accuracy_text(cm)?);
    Ok(())
}

/// Writes one analysis section; returns whether it hit a degenerate signal.
fn anova_section(
    name: &str,
    groups: &[Vec<f64>],
    out: &Path,
    file: &str,
    text: &mut String,
) -> Result<bool> {
    writeln!(text, "\none-way ANOVA, {name}:")?;
    match one_way_anova(groups) {
        Ok(a) => {
            write_file(out, file, report::anova_csv(&a))?;
            text.push_str(&report::anova_text(&a));
            Ok(false)
        }
        Err(e) if e.is_degenerate() => {
            writeln!(text, "{e}")?;
            Ok(true)
        }
        Err(
            e @ (StatsError::TooFewGroups(_)
            | StatsError::NotEnoughSamples { .. }
            | StatsError::EmptyGroup(_)),
        ) => {
            writeln!(text, "not computed: {e}")?;
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_stats(args: &StatsArgs) -> Result<Outcome> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must be in (0, 1)");
    }
    let mut text = String::new();
    let trial_logs = args
        .inputs
        .iter()
        .map(|p| is_trial_log(p))
        .collect::<Result<Vec<_>>>()?;
    if !trial_logs.iter().all(|&t| t) {
        if args.inputs.len() != 1 {
            bail!("a confusion table must be the only input");
        }
        let p = &args.inputs[0];
        let table = read_percent_table(fs::File::open(p)?)
            .with_context(|| format!("table {}", p.display()))?;
        let cm = ingest_table(&table, args.trials_per_row)?;
        writeln!(
            text,
            "source: confusion table, {} trials per row",
            args.trials_per_row
        )?;
        write_confusion_and_accuracy(&cm, &args.out, &mut text)?;
        writeln!(
            text,
            "\nANOVA and post-hoc tests need trial logs; a table has no per-participant samples."
        )?;
        write_file(&args.out, "report.txt", &text)?;
        print!("{text}");
        return Ok(Outcome::Success);
    }

    let mut records = Vec::new();
    for p in &args.inputs {
        let f = fs::File::open(p)?;
        records.extend(read_trial_log(f).with_context(|| format!("trial log {}", p.display()))?);
    }
    let group = records
        .first()
        .ok_or_else(|| anyhow!("no trials in the input"))?
        .group;
    if records.iter().any(|r| r.group != group) {
        bail!("trial logs mix groups");
    }
    let labels = patterns_for(group).patterns;
    let cm = confusion_from_trials(&records, &labels)?;
    let participants: std::collections::BTreeSet<&str> =
        records.iter().map(|r| r.participant_id.as_str()).collect();
    writeln!(
        text,
        "source: {} trials, group {group}, {} participants",
        records.len(),
        participants.len()
    )?;
    write_confusion_and_accuracy(&cm, &args.out, &mut text)?;

    let by_pattern = accuracy_by_pattern(&records, &labels)?;
    let by_participant = accuracy_by_participant(&records, &labels)?;
    let mut degenerate = anova_section(
        "patterns as groups",
        &by_pattern,
        &args.out,
        "anova_patterns.csv",
        &mut text,
    )?;
    degenerate |= anova_section(
        "participants as groups",
        &by_participant,
        &args.out,
        "anova_participants.csv",
        &mut text,
    )?;

    let names = cm.labels.clone();
    let registry = posthoc_registry();
    for name in registry.names() {
        let test = registry.resolve(&name)?;
        writeln!(text, "\npost-hoc {name} (alpha {}):", args.alpha)?;
        match test.compare(&by_pattern, args.alpha) {
            Ok(results) => {
                write_file(
                    &args.out,
                    &format!("{name}.csv"),
                    report::pairwise_csv(&name, &results, &names),
                )?;
                let sig = results.iter().filter(|r| r.significant).count();
                writeln!(text, "{sig} of {} pairs significant", results.len())?;
                if results.iter().any(|r| r.degenerate) {
                    writeln!(text, "degenerate: some pairs have zero variance")?;
                    degenerate = true;
                }
            }
            Err(e) if e.is_degenerate() => {
                writeln!(text, "{e}")?;
                degenerate = true;
            }
            Err(e) => writeln!(text, "not computed: {e}")?,
        }
    }
    writeln!(text, "\nmean accuracy: {:.1}%", 100.0 * mean_accuracy(&cm)?)?;
    write_file(&args.out, "report.txt", &text)?;
    print!("{text}");
    Ok(if degenerate {
        Outcome::Degenerate
    } else {
        Outcome::Success
    })
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    /// Run configuration; only its rig is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = REFERENCE_HEIGHT_M)]
    pub height: f64,
    /// Distance of the vertical test plane from the wearer, meters.
    #[arg(long, default_value_t = 0.5)]
    pub distance: f64,
}

pub fn cmd_coverage(args: &CoverageArgs) -> Result<Outcome> {
    if !(args.height > 0.0) || !(args.distance > 0.0) {
        bail!("--height and --distance must be positive");
    }
    let cfg = run_config(args.config.as_deref())?;
    let r = coverage_check(&cfg.rig, args.height, args.distance);
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!(
        "rig span {:.1} deg, tilt between sensors {:.1} deg",
        cfg.rig.combined_span_deg(),
        cfg.rig.tilt_between_deg()
    );
    println!(
        "plane at {:.3} m, user height {:.2} m",
        r.distance, args.height
    );
    println!(
        "lowest_hit_z {:.3} m, knee target {:.3} m: {}",
        r.lowest_hit_z,
        r.knee_target_z,
        verdict(r.covers_knee())
    );
    println!(
        "highest_hit_z {:.3} m, head target {:.3} m: {}",
        r.highest_hit_z,
        r.head_target_z,
        verdict(r.covers_head())
    );
    println!("coverage {}", verdict(r.passes()));
    Ok(if r.passes() {
        Outcome::Success
    } else {
        Outcome::ClaimFailed
    })
}
