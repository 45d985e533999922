//! Dropped-device alarm latch.

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlarmMode {
    Armed,
    Triggered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlarmState {
    pub mode: AlarmMode,
    pub clip_closed: bool,
    pub buzzer_freq_hz: f64,
}

pub const BUZZER_BAND_HZ: std::ops::RangeInclusive<f64> = 3000.0..=4000.0;

impl AlarmState {
    pub fn armed(buzzer_freq_hz: f64) -> Result<Self, PipelineError> {
        if !BUZZER_BAND_HZ.contains(&buzzer_freq_hz) {
            return Err(PipelineError::Config(format!(
                "buzzer frequency {buzzer_freq_hz} Hz outside 3-4 kHz"
            )));
        }
        Ok(Self {
            mode: AlarmMode::Armed,
            clip_closed: false,
            buzzer_freq_hz,
        })
    }

    /// Whether the buzzer is sounding.
    pub fn buzzing(&self) -> bool {
        self.mode == AlarmMode::Triggered
    }

    /// Advances on a clip reading. A closed clip triggers; once triggered the
    /// alarm latches until [`AlarmState::reset`].
    pub fn step(self, clip_closed: bool) -> Self {
        let mode = match (self.mode, clip_closed) {
            (AlarmMode::Armed, true) => AlarmMode::Triggered,
            (mode, _) => mode,
        };
        Self {
            mode,
            clip_closed,
            ..self
        }
    }

    pub fn reset(self) -> Self {
        Self {
            mode: AlarmMode::Armed,
            ..self
        }
    }
}

impl Default for AlarmState {
    fn default() -> Self {
        Self::armed(3500.0).expect("in band")
    }
}
