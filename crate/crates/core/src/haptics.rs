//! Vibrotactile pattern codec.
//!
//! Four motors: `L1` bottom-left, `L2` upper-left, `R1` bottom-right and
//! `R2` upper-right. A pattern is the set of motors vibrating together and is
//! written as its motors in the fixed order L1, L2, R1, R2 joined by `+`
//! (`"L1+R2"`). Parsing accepts any order, so `"R1+L2"` and `"L2+R1"` are the
//! same pattern.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Vibration length in 0.1 s ticks.
pub const DEFAULT_VIBRATION_TICKS: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("empty pattern has no name")]
    EmptyMask,
    #[error("empty pattern string")]
    EmptyName,
    #[error("unknown motor label `{0}`")]
    UnknownLabel(String),
    #[error("motor `{0}` listed twice")]
    DuplicateLabel(String),
    #[error("unknown participant group `{0}`")]
    UnknownGroup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Motor {
    L1,
    L2,
    R1,
    R2,
}

impl Motor {
    pub const ALL: [Motor; 4] = [Motor::L1, Motor::L2, Motor::R1, Motor::R2];

    pub fn label(self) -> &'static str {
        match self {
            Motor::L1 => "L1",
            Motor::L2 => "L2",
            Motor::R1 => "R1",
            Motor::R2 => "R2",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl FromStr for Motor {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Motor::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| CodecError::UnknownLabel(s.to_string()))
    }
}

/// Set of simultaneously active motors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MotorMask(u8);

impl MotorMask {
    pub const EMPTY: MotorMask = MotorMask(0);
    pub const ALL: MotorMask = MotorMask(0b1111);

    pub fn from_bits(bits: u8) -> MotorMask {
        MotorMask(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_motors(motors: impl IntoIterator<Item = Motor>) -> MotorMask {
        motors.into_iter().fold(MotorMask::EMPTY, MotorMask::with)
    }

    pub fn with(self, m: Motor) -> MotorMask {
        MotorMask(self.0 | m.bit())
    }

    pub fn contains(self, m: Motor) -> bool {
        self.0 & m.bit() != 0
    }

    pub fn union(self, other: MotorMask) -> MotorMask {
        MotorMask(self.0 | other.0)
    }

    pub fn is_subset(self, other: MotorMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn motors(self) -> impl Iterator<Item = Motor> {
        Motor::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Canonical `+`-joined name. Fails on the empty mask.
    pub fn name(self) -> Result<String, CodecError> {
        if self.is_empty() {
            return Err(CodecError::EmptyMask);
        }
        Ok(self
            .motors()
            .map(Motor::label)
            .collect::<Vec<_>>()
            .join("+"))
    }

    /// Name for logs, where the empty mask is written as `none`.
    pub fn log_name(self) -> String {
        self.name().unwrap_or_else(|_| NO_MOTORS.to_string())
    }

    pub fn parse_log_name(s: &str) -> Result<MotorMask, CodecError> {
        if s == NO_MOTORS {
            Ok(MotorMask::EMPTY)
        } else {
            parse(s)
        }
    }
}

/// Log spelling of the empty mask.
pub const NO_MOTORS: &str = "none";

impl fmt::Display for MotorMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.log_name())
    }
}

/// Inverse of [`MotorMask::name`]; order-insensitive, rejects duplicates.
pub fn parse(name: &str) -> Result<MotorMask, CodecError> {
    let name = name.trim();
    if name.is_empty() {
        return Err(CodecError::EmptyName);
    }
    let mut mask = MotorMask::EMPTY;
    for label in name.split('+') {
        let motor: Motor = label.trim().parse()?;
        if mask.contains(motor) {
            return Err(CodecError::DuplicateLabel(motor.label().to_string()));
        }
        mask = mask.with(motor);
    }
    Ok(mask)
}

impl FromStr for MotorMask {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for MotorMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.log_name())
    }
}

impl<'de> Deserialize<'de> for MotorMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        MotorMask::parse_log_name(&s).map_err(serde::de::Error::custom)
    }
}

/// Participant group of the perception experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    /// Every non-empty pattern (15).
    A,
    /// Single- and double-motor patterns (10).
    B,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }
}

impl FromStr for Group {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Group::A),
            "B" | "b" => Ok(Group::B),
            other => Err(CodecError::UnknownGroup(other.to_string())),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    pub group: Group,
    pub patterns: Vec<MotorMask>,
}

impl PatternSet {
    pub fn names(&self) -> Vec<String> {
        self.patterns.iter().map(|m| m.log_name()).collect()
    }
}

/// Patterns of a group, ordered by motor count and then canonical name.
pub fn patterns_for(group: Group) -> PatternSet {
    let max_motors = match group {
        Group::A => 4,
        Group::B => 2,
    };
    let mut patterns: Vec<MotorMask> = (1..16u8)
        .map(MotorMask::from_bits)
        .filter(|m| m.len() <= max_motors)
        .collect();
    patterns.sort_by_cached_key(|m| (m.len(), m.log_name()));
    PatternSet { group, patterns }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VibrationEvent {
    pub mask: MotorMask,
    pub start_tick: u64,
    pub duration_ticks: u32,
}

impl VibrationEvent {
    pub fn end_tick(&self) -> u64 {
        self.start_tick + u64::from(self.duration_ticks)
    }

    pub fn is_active(&self, tick: u64) -> bool {
        (self.start_tick..self.end_tick()).contains(&tick)
    }
}

/// Lays patterns out back to back with `gap_ticks` of silence between them.
pub fn vibration_timeline(
    masks: &[MotorMask],
    duration_ticks: u32,
    gap_ticks: u32,
) -> Vec<VibrationEvent> {
    assert!(duration_ticks > 0, "vibrations need a positive duration");
    let stride = u64::from(duration_ticks) + u64::from(gap_ticks);
    masks
        .iter()
        .enumerate()
        .map(|(i, &mask)| VibrationEvent {
            mask,
            start_tick: i as u64 * stride,
            duration_ticks,
        })
        .collect()
}

/// Motors driven at `tick` by a timeline.
pub fn active_at(events: &[VibrationEvent], tick: u64) -> MotorMask {
    events
        .iter()
        .filter(|e| e.is_active(tick))
        .fold(MotorMask::EMPTY, |acc, e| acc.union(e.mask))
}
