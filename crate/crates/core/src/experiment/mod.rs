//! Perception-experiment protocol: randomized schedules, simulated
//! participants and the CSV formats for trial logs and published tables.

mod responder;
mod table;
mod trial_log;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::haptics::{patterns_for, CodecError, Group, MotorMask};
use crate::rng;

pub use responder::{
    responder_registry, IdentityResponder, ResponderFactory, SimulatedResponder, UniformResponder,
};
pub use table::{ingest_table, read_percent_table, PercentTable, DEFAULT_TRIALS_PER_ROW};
pub use trial_log::{read_trial_log, write_trial_log, TRIAL_LOG_HEADER};

/// Repetitions of every pattern per participant.
pub const DEFAULT_REPS: usize = 5;
/// Participants per group.
pub const DEFAULT_PARTICIPANTS: usize = 11;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("responder has no row for pattern {0}")]
    MissingRow(String),
    #[error("responder row for {pattern} sums to {sum}, expected 1")]
    RowNotNormalized { pattern: String, sum: f64 },
    #[error("responder row for {0} is empty or negative")]
    BadRow(String),
    #[error("reps must be >= 1")]
    NoReps,
    #[error("table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("trial log line {line}: {message}")]
    TrialLog { line: usize, message: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub group: Group,
    pub seed: u64,
    pub reps: usize,
    pub trials: Vec<MotorMask>,
}

/// `reps` copies of every group pattern in a seeded uniform shuffle.
pub fn make_schedule(group: Group, reps: usize, seed: u64) -> Result<Schedule, ExperimentError> {
    if reps == 0 {
        return Err(ExperimentError::NoReps);
    }
    let patterns = patterns_for(group).patterns;
    let mut trials: Vec<MotorMask> = patterns
        .iter()
        .flat_map(|&p| std::iter::repeat_n(p, reps))
        .collect();
    trials.shuffle(&mut rng::stream(seed, &[0x5C4E_D01E]));
    Ok(Schedule {
        group,
        seed,
        reps,
        trials,
    })
}

/// One answered vibration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant_id: String,
    #[serde(with = "group_serde")]
    pub group: Group,
    pub index: usize,
    #[serde(rename = "true")]
    pub true_mask: MotorMask,
    #[serde(rename = "perceived")]
    pub perceived_mask: MotorMask,
    pub response_ms: u32,
}

impl TrialRecord {
    pub fn is_correct(&self) -> bool {
        self.true_mask == self.perceived_mask
    }
}

mod group_serde {
    use super::Group;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &Group, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(g.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Group, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Plays `schedule` to a simulated participant.
pub fn run_session(
    schedule: &Schedule,
    responder: &SimulatedResponder,
    participant_id: &str,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    schedule
        .trials
        .iter()
        .enumerate()
        .map(|(index, &true_mask)| {
            let (perceived_mask, response_ms) = responder.respond(true_mask, index as u64)?;
            Ok(TrialRecord {
                participant_id: participant_id.to_string(),
                group: schedule.group,
                index,
                true_mask,
                perceived_mask,
                response_ms,
            })
        })
        .collect()
}

/// Participant ids `P01`, `P02`, ...
pub fn participant_id(i: usize) -> String {
    format!("P{:02}", i + 1)
}

/// Runs `participants` sessions, each with its own schedule and responder
/// stream derived from `seed`.
pub fn run_cohort(
    group: Group,
    reps: usize,
    participants: usize,
    seed: u64,
    responder: &SimulatedResponder,
) -> Result<Vec<Vec<TrialRecord>>, ExperimentError> {
    (0..participants)
        .map(|p| {
            let schedule = make_schedule(group, reps, rng::derive_key(seed, &[1, p as u64]))?;
            let person = responder.with_seed(rng::derive_key(seed, &[2, p as u64]));
            run_session(&schedule, &person, &participant_id(p))
        })
        .collect()
}
