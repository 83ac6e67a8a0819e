//! Trial ingestion, rate alignment, normalization, windowing, augmentation.
//!
//! A trial arrives as JSON with forces in newtons at the plate rate and 2D
//! keypoints in pixels at the video rate. The pipeline brings everything to a
//! common clock and unit system (50 Hz, N/kg, keypoints in [-1, 1]) before
//! windows are cut for the model.

mod pipeline;
mod trial;
mod windows;

#[cfg(test)]
mod tests;

pub use pipeline::{
    align_trial, denormalize_forces, normalize_forces, normalize_keypoints_2d, resample_forces,
};
pub use trial::{
    load_trial, save_trial, CameraParameters, ForceSequence, ForceUnit, Movement, MovementClass,
    PoseSequence, Side, Subject, Trial,
};
pub use windows::{
    flip_augment, make_windows, InputSource, SampleMeta, WindowedSample, COCO_JOINT_NAMES,
    COCO_LR_PAIRS, LEFT_ANKLE, RIGHT_ANKLE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("schema error in {field}: {message}")]
    Schema { field: String, message: String },
    #[error("force resampling: {0} fps is not an integer multiple of {1} fps")]
    NonIntegerRate(f64, f64),
    #[error("unit mismatch: sequence tagged {found:?}, operation expects {expected:?}")]
    UnitMismatch { expected: ForceUnit, found: ForceUnit },
    #[error("keypoints already normalized; refusing to normalize twice")]
    AlreadyNormalized,
    #[error("image dimensions must be positive, got {0} x {1}")]
    BadImageSize(f64, f64),
    #[error("trial not aligned: poses at {pose_fps} fps with {pose_frames} frames vs forces at {force_fps} fps with {force_frames} frames")]
    NotAligned {
        pose_fps: f64,
        pose_frames: usize,
        force_fps: f64,
        force_frames: usize,
    },
    #[error("forces must be in N/kg for windowing, found {0:?}")]
    WrongUnitsForWindows(ForceUnit),
    #[error("unknown camera id {0}")]
    UnknownCamera(String),
    #[error("window construction needs {expected}-channel poses, found {found}")]
    WrongChannels { expected: usize, found: usize },
}

fn schema_err(field: &str, message: impl Into<String>) -> DataError {
    DataError::Schema {
        field: field.to_string(),
        message: message.into(),
    }
}
