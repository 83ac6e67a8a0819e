//! Sliding-window dataset construction and horizontal-flip augmentation.

use super::trial::{ForceUnit, Movement, Trial};
use super::DataError;

/// COCO-17 joint names in standard order.
pub const COCO_JOINT_NAMES: [&str; 17] = [
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
];

/// Left/right joint index pairs in the COCO-17 layout.
pub const COCO_LR_PAIRS: [(usize, usize); 8] = [
    (1, 2),
    (3, 4),
    (5, 6),
    (7, 8),
    (9, 10),
    (11, 12),
    (13, 14),
    (15, 16),
];

pub const LEFT_ANKLE: usize = 15;
pub const RIGHT_ANKLE: usize = 16;

/// Where window inputs come from: one camera's 2D detections, or the
/// (triangulated or mocap) 3D poses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Camera(String),
    Pose3d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub trial_id: String,
    /// Camera id, or `"3d"` when the input is the 3D pose sequence.
    pub camera: String,
    pub center_frame: usize,
    pub movement: Movement,
}

/// One training/evaluation sample: `f` consecutive pose frames and the force
/// (plus optionally the 3D pose) at the window's center frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSample {
    /// Flattened `f x (J*C)` input, frame-major.
    pub input: Vec<f64>,
    pub f: usize,
    pub joints: usize,
    pub channels: usize,
    /// N/kg at the center frame.
    pub force_target: [f64; 6],
    /// `J x 3` meters at the center frame, when 3D targets exist.
    pub pose3d_target: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

/// Cut stride-1 windows over every frame of an aligned trial. Boundary
/// windows replicate the edge frame so each of the `n` frames gets exactly
/// one window centered on it (window `i` covers frames `i - ⌊f/2⌋ ..`,
/// clamped into range).
pub fn make_windows(
    trial: &Trial,
    f: usize,
    source: &InputSource,
) -> Result<Vec<WindowedSample>, DataError> {
    if trial.forces.units != ForceUnit::NewtonsPerKg {
        return Err(DataError::WrongUnitsForWindows(trial.forces.units));
    }
    let seq = match source {
        InputSource::Camera(id) => trial
            .poses_2d
            .get(id)
            .ok_or_else(|| DataError::UnknownCamera(id.clone()))?,
        InputSource::Pose3d => trial.poses_3d.as_ref().ok_or_else(|| {
            DataError::Schema {
                field: "poses_3d".to_string(),
                message: "trial has no 3D poses to window over".to_string(),
            }
        })?,
    };
    let n = seq.frames.len().min(trial.forces.frames.len());
    if seq.frames.len() != trial.forces.frames.len() || (seq.fps - trial.forces.fps).abs() > 1e-9 {
        return Err(DataError::NotAligned {
            pose_fps: seq.fps,
            pose_frames: seq.frames.len(),
            force_fps: trial.forces.fps,
            force_frames: trial.forces.frames.len(),
        });
    }
    let camera_label = match source {
        InputSource::Camera(id) => id.clone(),
        InputSource::Pose3d => "3d".to_string(),
    };
    let half = f / 2;
    let width = seq.joints * seq.channels;
    let mut out = Vec::with_capacity(n);
    for center in 0..n {
        let mut input = Vec::with_capacity(f * width);
        for offset in 0..f {
            let idx = (center + offset).saturating_sub(half).min(n - 1);
            input.extend_from_slice(&seq.frames[idx]);
        }
        out.push(WindowedSample {
            input,
            f,
            joints: seq.joints,
            channels: seq.channels,
            force_target: trial.forces.frames[center],
            pose3d_target: trial
                .poses_3d
                .as_ref()
                .map(|p3| p3.frames[center].clone()),
            meta: SampleMeta {
                trial_id: trial.id.clone(),
                camera: camera_label.clone(),
                center_frame: center,
                movement: trial.movement.clone(),
            },
        });
    }
    Ok(out)
}

/// Mirror a sample across the sagittal plane: negate x coordinates, swap
/// left/right joints, swap the two force plates, negate lateral shear (Fx),
/// and flip any left/right tag on the movement label. An involution.
pub fn flip_augment(s: &WindowedSample) -> Result<WindowedSample, DataError> {
    if s.joints != COCO_JOINT_NAMES.len() {
        return Err(DataError::Schema {
            field: "window.joints".to_string(),
            message: format!(
                "flip needs the {}-joint COCO layout, got {} joints",
                COCO_JOINT_NAMES.len(),
                s.joints
            ),
        });
    }
    let width = s.joints * s.channels;
    let mut input = s.input.clone();
    for frame in input.chunks_mut(width) {
        flip_pose_frame(frame, s.channels);
    }
    let pose3d_target = s.pose3d_target.as_ref().map(|p| {
        let mut p = p.clone();
        flip_pose_frame(&mut p, 3);
        p
    });
    let t = &s.force_target;
    let force_target = [-t[3], t[4], t[5], -t[0], t[1], t[2]];
    let mut meta = s.meta.clone();
    meta.movement = s.meta.movement.flipped();
    Ok(WindowedSample {
        input,
        f: s.f,
        joints: s.joints,
        channels: s.channels,
        force_target,
        pose3d_target,
        meta,
    })
}

fn flip_pose_frame(frame: &mut [f64], channels: usize) {
    // Negate x (channel 0 of every joint) …
    for joint in frame.chunks_mut(channels) {
        joint[0] = -joint[0];
    }
    // … then exchange each left/right pair.
    for &(l, r) in &COCO_LR_PAIRS {
        for c in 0..channels {
            frame.swap(l * channels + c, r * channels + c);
        }
    }
}
