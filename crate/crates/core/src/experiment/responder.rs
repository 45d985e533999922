//! Simulated participants.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::ExperimentError;
use crate::haptics::{MotorMask, PatternSet};
use crate::registry::Registry;
use crate::rng;
use crate::stats::ConfusionMatrix;

const ROW_TOLERANCE: f64 = 1e-9;

/// Answers each vibration by sampling a per-pattern categorical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedResponder {
    rows: BTreeMap<MotorMask, Vec<(MotorMask, f64)>>,
    seed: u64,
}

impl SimulatedResponder {
    /// `rows` must each sum to 1 within 1e-9.
    pub fn new(
        rows: BTreeMap<MotorMask, Vec<(MotorMask, f64)>>,
        seed: u64,
    ) -> Result<Self, ExperimentError> {
        for (pattern, row) in &rows {
            if row.is_empty() || row.iter().any(|(_, p)| !(*p >= 0.0)) {
                return Err(ExperimentError::BadRow(pattern.log_name()));
            }
            let sum: f64 = row.iter().map(|(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(ExperimentError::RowNotNormalized {
                    pattern: pattern.log_name(),
                    sum,
                });
            }
        }
        Ok(Self { rows, seed })
    }

    /// Builds rows from non-negative weights, normalizing each row.
    pub fn from_weights(
        rows: BTreeMap<MotorMask, Vec<(MotorMask, f64)>>,
        seed: u64,
    ) -> Result<Self, ExperimentError> {
        let mut normalized = BTreeMap::new();
        for (pattern, row) in rows {
            let sum: f64 = row.iter().map(|(_, w)| w).sum();
            if !(sum > 0.0) || row.iter().any(|(_, w)| !(*w >= 0.0)) {
                return Err(ExperimentError::BadRow(pattern.log_name()));
            }
            let row = row.into_iter().map(|(m, w)| (m, w / sum)).collect();
            normalized.insert(pattern, row);
        }
        Self::new(normalized, seed)
    }

    /// Uses the rows of a confusion matrix as response weights.
    pub fn from_confusion(cm: &ConfusionMatrix, seed: u64) -> Result<Self, ExperimentError> {
        let masks = cm
            .labels
            .iter()
            .map(|l| crate::haptics::parse(l))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = masks
            .iter()
            .zip(&cm.counts)
            .map(|(&t, counts)| {
                let row = masks
                    .iter()
                    .zip(counts)
                    .map(|(&p, &c)| (p, c as f64))
                    .collect();
                (t, row)
            })
            .collect();
        Self::from_weights(rows, seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            rows: self.rows.clone(),
            seed,
        }
    }

    pub fn row(&self, pattern: MotorMask) -> Option<&[(MotorMask, f64)]> {
        self.rows.get(&pattern).map(Vec::as_slice)
    }

    /// Perceived pattern and response time for trial `index`.
    pub fn respond(
        &self,
        true_mask: MotorMask,
        index: u64,
    ) -> Result<(MotorMask, u32), ExperimentError> {
        let row = self
            .rows
            .get(&true_mask)
            .ok_or_else(|| ExperimentError::MissingRow(true_mask.log_name()))?;
        let mut rng = rng::stream(self.seed, &[index]);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = row.last().expect("rows are non-empty").0;
        for &(mask, p) in row {
            acc += p;
            if u < acc {
                pick = mask;
                break;
            }
        }
        let response_ms = rng.random_range(600..=3000);
        Ok((pick, response_ms))
    }
}

/// Builds a responder for a pattern set.
pub trait ResponderFactory: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(
        &self,
        patterns: &PatternSet,
        seed: u64,
    ) -> Result<SimulatedResponder, ExperimentError>;
}

/// Always perceives the true pattern.
pub struct IdentityResponder;

impl ResponderFactory for IdentityResponder {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn build(
        &self,
        patterns: &PatternSet,
        seed: u64,
    ) -> Result<SimulatedResponder, ExperimentError> {
        let rows = patterns
            .patterns
            .iter()
            .map(|&m| (m, vec![(m, 1.0)]))
            .collect();
        SimulatedResponder::new(rows, seed)
    }
}

/// Guesses uniformly among the group's patterns.
pub struct UniformResponder;

impl ResponderFactory for UniformResponder {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn build(
        &self,
        patterns: &PatternSet,
        seed: u64,
    ) -> Result<SimulatedResponder, ExperimentError> {
        let row: Vec<_> = patterns.patterns.iter().map(|&m| (m, 1.0)).collect();
        let rows = patterns
            .patterns
            .iter()
            .map(|&m| (m, row.clone()))
            .collect();
        SimulatedResponder::from_weights(rows, seed)
    }
}

pub fn responder_registry() -> Registry<dyn ResponderFactory> {
    let mut reg: Registry<dyn ResponderFactory> = Registry::new("responder");
    for f in [
        Arc::new(IdentityResponder) as Arc<dyn ResponderFactory>,
        Arc::new(UniformResponder),
    ] {
        reg.register(f.name(), f);
    }
    reg
}
