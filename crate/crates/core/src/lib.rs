//! Simulation and evaluation toolkit for a wearable obstacle-avoidance aid.
//!
//! Two tilted 8×8 multizone time-of-flight sensors are simulated by ray casting
//! against box scenes. Their frames are fused into one vertical grid,
//! median-filtered over time and split into four quadrants that drive four
//! vibration motors. The crate also covers the vibrotactile pattern codec,
//! the randomized perception-experiment protocol, and the statistics used to
//! evaluate it (confusion matrices, one-way ANOVA, Tukey HSD, Bonferroni).
//!
//! Conventions used everywhere:
//!
//! * world frame: x forward from the wearer, y to the wearer's left, z up;
//! * scene geometry is in meters, sensor readings and logs in millimeters;
//! * angles are in degrees at API boundaries.

// negated comparisons reject NaN together with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod geometry;
pub mod haptics;
pub mod pipeline;
pub mod registry;
pub mod render;
pub mod rng;
pub mod stats;
pub mod tof;

pub use geometry::{Obstacle, Ray, Scene, Vec3};
pub use haptics::{Motor, MotorMask};
pub use registry::Registry;
