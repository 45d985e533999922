//! The 10 Hz processing loop: sense both sensors, fuse, filter, classify.

mod alarm;
mod classify;
mod filter;
mod run_log;

use crate::geometry::{HitTarget, Scene, Vec3};
use crate::tof::{
    fuse, fuse_targets, sense_with_targets, CombinedGrid, DualRig, Grid, NoiseModel, SensorId,
    TofError,
};

pub use alarm::{AlarmMode, AlarmState, BUZZER_BAND_HZ};
pub use classify::{classify, quadrant, DetectionConfig, ObstacleReport};
pub use filter::{filter_registry, median, FilterState, Latest, Median, WindowReducer};
pub use run_log::{read_run_log, write_run_log, RUN_LOG_HEADER};

/// Simulated seconds per tick.
pub const TICK_SECONDS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("grid is {got:?}, filter expects {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ticks must increase by one: expected {expected}, got {got}")]
    TickOrder { expected: u64, got: u64 },
    #[error(transparent)]
    Sensor(#[from] TofError),
    #[error("run log line {line}: {message}")]
    Log { line: usize, message: String },
}

/// Everything one tick produced.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub report: ObstacleReport,
    pub raw: CombinedGrid,
    pub filtered: CombinedGrid,
    /// What the nearest reading of each fused cell hit.
    pub targets: Grid<HitTarget>,
}

/// Stateful tick loop. State is threaded explicitly from tick to tick and the
/// reports are appended to an in-memory run log.
#[derive(Debug)]
pub struct Pipeline {
    rig: DualRig,
    noise: NoiseModel,
    cfg: DetectionConfig,
    filter: FilterState,
    prev: Option<ObstacleReport>,
    next_tick: Option<u64>,
    log: Vec<ObstacleReport>,
}

impl Pipeline {
    /// Builds a pipeline, looking the temporal filter up by name.
    pub fn new(
        rig: DualRig,
        noise: NoiseModel,
        cfg: DetectionConfig,
    ) -> Result<Self, PipelineError> {
        rig.validate()?;
        noise.validate()?;
        cfg.validate()?;
        let reducer = filter_registry()
            .resolve(&cfg.filter)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let filter = FilterState::new(cfg.window_len, reducer)?;
        Ok(Self {
            rig,
            noise,
            cfg,
            filter,
            prev: None,
            next_tick: None,
            log: Vec::new(),
        })
    }

    pub fn rig(&self) -> &DualRig {
        &self.rig
    }

    pub fn config(&self) -> &DetectionConfig {
        &self.cfg
    }

    /// Runs one tick with the wearer at the origin facing +x.
    pub fn tick(&mut self, scene: &Scene, t: u64) -> Result<TickOutput, PipelineError> {
        self.tick_at(scene, t, Vec3::ZERO, 0.0)
    }

    /// Runs one tick with the wearer at `position` facing `heading_deg`.
    pub fn tick_at(
        &mut self,
        scene: &Scene,
        t: u64,
        position: Vec3,
        heading_deg: f64,
    ) -> Result<TickOutput, PipelineError> {
        if let Some(expected) = self.next_tick {
            if t != expected {
                return Err(PipelineError::TickOrder { expected, got: t });
            }
        }
        let placed = self.rig.placed(position, heading_deg);
        let (up, up_t) = sense_with_targets(scene, &placed.upper, SensorId::Upper, t, &self.noise)?;
        let (low, low_t) =
            sense_with_targets(scene, &placed.lower, SensorId::Lower, t, &self.noise)?;
        let raw = fuse(&up, &low, &placed)?;
        let targets = fuse_targets((&up, &up_t), (&low, &low_t), &placed)?;
        let filtered = self.filter.step(&raw)?;
        let report = classify(&filtered, &self.cfg, self.prev.as_ref());
        self.prev = Some(report.clone());
        self.next_tick = Some(t + 1);
        self.log.push(report.clone());
        Ok(TickOutput {
            report,
            raw,
            filtered,
            targets,
        })
    }

    pub fn log(&self) -> &[ObstacleReport] {
        &self.log
    }

    pub fn into_log(self) -> Vec<ObstacleReport> {
        self.log
    }
}
