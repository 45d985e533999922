//! Quadrant classification and motor-mask generation.
//!
//! The fused grid is cut in half both ways. Columns in the left half are the
//! wearer's left; rows in the top half are the upper field. Each quadrant
//! drives one motor: upper-left `L2`, lower-left `L1`, upper-right `R2`,
//! lower-right `R1`.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::haptics::{Motor, MotorMask};
use crate::tof::CombinedGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    pub danger_threshold_mm: f64,
    pub hysteresis_mm: f64,
    pub window_len: usize,
    /// Cells below the threshold needed to trigger a quadrant.
    pub min_zone_count: usize,
    /// Name of the temporal filter, see [`super::filter_registry`].
    pub filter: String,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            danger_threshold_mm: 1000.0,
            hysteresis_mm: 100.0,
            window_len: 5,
            min_zone_count: 2,
            filter: "median".into(),
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.danger_threshold_mm > 0.0) {
            return Err(PipelineError::Config(
                "danger_threshold_mm must be > 0".into(),
            ));
        }
        if !(self.hysteresis_mm >= 0.0) {
            return Err(PipelineError::Config("hysteresis_mm must be >= 0".into()));
        }
        if self.window_len == 0 {
            return Err(PipelineError::Config("window_len must be >= 1".into()));
        }
        if self.min_zone_count == 0 {
            return Err(PipelineError::Config("min_zone_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-tick detection outcome; arrays are indexed in motor order L1, L2, R1, R2.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleReport {
    pub tick: u64,
    pub quadrant_min_mm: [f64; 4],
    pub triggered: [bool; 4],
    pub mask: MotorMask,
}

impl ObstacleReport {
    pub fn min_for(&self, motor: Motor) -> f64 {
        self.quadrant_min_mm[motor as usize]
    }

    pub fn is_triggered(&self, motor: Motor) -> bool {
        self.triggered[motor as usize]
    }
}

/// Row and column ranges of a motor's quadrant.
pub fn quadrant(
    motor: Motor,
    rows: usize,
    cols: usize,
) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let (top, bottom) = (0..rows / 2, rows / 2..rows);
    let (left, right) = (0..cols / 2, cols / 2..cols);
    match motor {
        Motor::L1 => (bottom, left),
        Motor::L2 => (top, left),
        Motor::R1 => (bottom, right),
        Motor::R2 => (top, right),
    }
}

pub fn classify(
    grid: &CombinedGrid,
    cfg: &DetectionConfig,
    prev: Option<&ObstacleReport>,
) -> ObstacleReport {
    let mut quadrant_min_mm = [grid.sentinel_mm; 4];
    let mut triggered = [false; 4];
    let mut mask = MotorMask::EMPTY;
    for motor in Motor::ALL {
        let i = motor as usize;
        let (rows, cols) = quadrant(motor, grid.rows(), grid.cols());
        let mut below = 0usize;
        for r in rows {
            for c in cols.clone() {
                let z = grid.cells.get(r, c);
                if !z.valid {
                    continue;
                }
                quadrant_min_mm[i] = quadrant_min_mm[i].min(z.mm);
                if z.mm < cfg.danger_threshold_mm {
                    below += 1;
                }
            }
        }
        let held = prev.is_some_and(|p| p.triggered[i])
            && quadrant_min_mm[i] <= cfg.danger_threshold_mm + cfg.hysteresis_mm;
        triggered[i] = below >= cfg.min_zone_count || held;
        if triggered[i] {
            mask = mask.with(motor);
        }
    }
    ObstacleReport {
        tick: grid.tick,
        quadrant_min_mm,
        triggered,
        mask,
    }
}
