//! Evaluation statistics: confusion matrices, one-way ANOVA and post-hoc
//! pairwise comparisons.

mod anova;
mod posthoc;
mod ptukey;
pub mod quadrature;
pub mod report;
pub mod special;

use std::collections::{BTreeMap, BTreeSet};

use crate::experiment::TrialRecord;
use crate::haptics::MotorMask;

pub use anova::{one_way_anova, AnovaResult};
pub use posthoc::{
    bonferroni_pairwise, posthoc_registry, tukey_hsd, Bonferroni, PairwiseResult, PairwiseTest,
    TukeyHsd,
};
pub use ptukey::{ptukey, qtukey};
pub use special::{f_cdf, f_sf};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("pattern {0} is not among the matrix labels")]
    UnknownLabel(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("matrix is not square: {labels} labels, row {row} has {len} cells")]
    NotSquare {
        labels: usize,
        row: usize,
        len: usize,
    },
    #[error("row {0} has no observations")]
    ZeroRowSum(String),
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("need at least {needed} observations, got {found}")]
    NotEnoughSamples { needed: usize, found: usize },
    #[error("degenerate: infinite F (no within-group variance)")]
    InfiniteF,
    #[error("degenerate: no variance in the data")]
    NoVariance,
    #[error("domain error: {0}")]
    Domain(String),
}

impl StatsError {
    /// Degenerate-data signals as opposed to malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, StatsError::InfiniteF | StatsError::NoVariance)
    }
}

/// Counts of perceived (columns) against true (rows) patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(StatsError::DuplicateLabel(dup.clone()));
        }
        if counts.len() != labels.len() {
            return Err(StatsError::NotSquare {
                labels: labels.len(),
                row: counts.len(),
                len: 0,
            });
        }
        if let Some((row, r)) = counts
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != labels.len())
        {
            return Err(StatsError::NotSquare {
                labels: labels.len(),
                row,
                len: r.len(),
            });
        }
        Ok(Self { labels, counts })
    }

    pub fn zeros(labels: Vec<String>) -> Result<Self, StatsError> {
        let k = labels.len();
        Self::new(labels, vec![vec![0; k]; k])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Row-normalized percentages; all-zero rows stay zero.
    pub fn row_percent(&self) -> Vec<Vec<f64>> {
        (0..self.labels.len())
            .map(|i| {
                let sum = self.row_sum(i);
                self.counts[i]
                    .iter()
                    .map(|&c| {
                        if sum == 0 {
                            0.0
                        } else {
                            100.0 * c as f64 / sum as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn confusion_from_trials(
    records: &[TrialRecord],
    labels: &[MotorMask],
) -> Result<ConfusionMatrix, StatsError> {
    let index: BTreeMap<MotorMask, usize> =
        labels.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut cm = ConfusionMatrix::zeros(labels.iter().map(|m| m.log_name()).collect())?;
    let find = |m: MotorMask| {
        index
            .get(&m)
            .copied()
            .ok_or_else(|| StatsError::UnknownLabel(m.log_name()))
    };
    for r in records {
        cm.counts[find(r.true_mask)?][find(r.perceived_mask)?] += 1;
    }
    Ok(cm)
}

/// Diagonal over row sum for every row.
pub fn per_pattern_accuracy(cm: &ConfusionMatrix) -> Result<Vec<f64>, StatsError> {
    (0..cm.labels.len())
        .map(|i| match cm.row_sum(i) {
            0 => Err(StatsError::ZeroRowSum(cm.labels[i].clone())),
            sum => Ok(cm.counts[i][i] as f64 / sum as f64),
        })
        .collect()
}

/// Unweighted mean of the per-pattern accuracies.
pub fn mean_accuracy(cm: &ConfusionMatrix) -> Result<f64, StatsError> {
    let acc = per_pattern_accuracy(cm)?;
    if acc.is_empty() {
        return Err(StatsError::Domain("empty confusion matrix".into()));
    }
    Ok(acc.iter().sum::<f64>() / acc.len() as f64)
}

/// Accuracy cells grouped by pattern: one group per label, one sample per
/// participant (fraction of that participant's trials of the pattern that
/// were answered correctly). Participants are in id order.
pub fn accuracy_by_pattern(
    records: &[TrialRecord],
    labels: &[MotorMask],
) -> Result<Vec<Vec<f64>>, StatsError> {
    let cells = accuracy_cells(records, labels)?;
    Ok((0..labels.len())
        .map(|j| cells.values().filter_map(|row| row[j]).collect())
        .collect())
}

/// Accuracy cells grouped by participant: one group per participant, one
/// sample per pattern the participant was shown.
pub fn accuracy_by_participant(
    records: &[TrialRecord],
    labels: &[MotorMask],
) -> Result<Vec<Vec<f64>>, StatsError> {
    let cells = accuracy_cells(records, labels)?;
    Ok(cells
        .into_values()
        .map(|row| row.into_iter().flatten().collect())
        .collect())
}

fn accuracy_cells(
    records: &[TrialRecord],
    labels: &[MotorMask],
) -> Result<BTreeMap<String, Vec<Option<f64>>>, StatsError> {
    let index: BTreeMap<MotorMask, usize> =
        labels.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut tallies: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    for r in records {
        let j = *index
            .get(&r.true_mask)
            .ok_or_else(|| StatsError::UnknownLabel(r.true_mask.log_name()))?;
        if !index.contains_key(&r.perceived_mask) {
            return Err(StatsError::UnknownLabel(r.perceived_mask.log_name()));
        }
        let row = tallies
            .entry(r.participant_id.clone())
            .or_insert_with(|| vec![(0, 0); labels.len()]);
        row[j].1 += 1;
        if r.is_correct() {
            row[j].0 += 1;
        }
    }
    Ok(tallies
        .into_iter()
        .map(|(id, row)| {
            let acc = row
                .into_iter()
                .map(|(hit, n)| (n > 0).then(|| hit as f64 / n as f64))
                .collect();
            (id, acc)
        })
        .collect())
}
