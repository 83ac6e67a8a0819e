//! Ground-reaction-force regression from human pose keypoints.
//!
//! The crate covers the full pipeline: a small reverse-mode autodiff engine,
//! the trial data model, multi-view triangulation, the gated-MSE loss and
//! peak-oriented metrics, a spatial-temporal transformer, training and
//! evaluation protocols, physics baselines, and a synthetic motion generator
//! used as physics-grounded test data. The `grf` binary wires these into a
//! config-driven command-line workflow.

pub mod config;
pub mod data;
pub mod metrics;
pub mod model;
pub mod plot;
pub mod synth;
pub mod tensor;
pub mod train;
pub mod triangulation;
