//! Trial domain types, validation, and JSON (de)serialization.
//!
//! The wire format stores forces in newtons at the native plate rate and 2D
//! keypoints as `[x, y, confidence]` pixel triples. Validation happens once at
//! load; everything downstream can trust the invariants.

use super::{schema_err, DataError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const COCO_JOINT_COUNT: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub id: String,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraParameters {
    pub id: String,
    /// Row-major 3x3 intrinsic matrix; upper-triangular, positive focal lengths.
    pub k: [[f64; 3]; 3],
    /// Row-major 3x3 rotation, orthonormal within 1e-6.
    pub r: [[f64; 3]; 3],
    /// Translation in meters; camera coords = R * world + t.
    pub t: [f64; 3],
}

impl CameraParameters {
    pub fn validate(&self) -> Result<(), DataError> {
        let field = format!("cameras[{}]", self.id);
        for i in 0..3 {
            for j in 0..3 {
                // R^T R should be the identity.
                let mut dot = 0.0;
                for row in 0..3 {
                    dot += self.r[row][i] * self.r[row][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-6 {
                    return Err(schema_err(
                        &format!("{field}.R"),
                        format!("not orthonormal: (RᵀR)[{i}][{j}] = {dot}"),
                    ));
                }
            }
        }
        if self.k[0][0] <= 0.0 || self.k[1][1] <= 0.0 {
            return Err(schema_err(
                &format!("{field}.K"),
                "focal entries must be positive",
            ));
        }
        if self.k[1][0] != 0.0 || self.k[2][0] != 0.0 || self.k[2][1] != 0.0 {
            return Err(schema_err(
                &format!("{field}.K"),
                "must be upper-triangular",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// The five named movement classes plus an open escape hatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MovementClass {
    Cmj,
    SquatJump,
    Squat,
    Sls,
    Slj,
    Other(String),
}

/// Movement label; single-leg movements carry a left/right side tag
/// (serialized as e.g. `"SLS:left"`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Movement {
    pub class: MovementClass,
    pub side: Option<Side>,
}

impl Movement {
    pub fn parse(s: &str) -> Movement {
        let (name, side) = match s.split_once(':') {
            Some((n, "left")) => (n, Some(Side::Left)),
            Some((n, "right")) => (n, Some(Side::Right)),
            _ => (s, None),
        };
        let class = match name {
            "CMJ" => MovementClass::Cmj,
            "SquatJump" => MovementClass::SquatJump,
            "Squat" => MovementClass::Squat,
            "SLS" => MovementClass::Sls,
            "SLJ" => MovementClass::Slj,
            other => MovementClass::Other(other.to_string()),
        };
        Movement { class, side }
    }

    /// Class label without the side tag; the zero-shot protocol groups by this.
    pub fn class_label(&self) -> &str {
        match &self.class {
            MovementClass::Cmj => "CMJ",
            MovementClass::SquatJump => "SquatJump",
            MovementClass::Squat => "Squat",
            MovementClass::Sls => "SLS",
            MovementClass::Slj => "SLJ",
            MovementClass::Other(s) => s,
        }
    }

    pub fn label(&self) -> String {
        match self.side {
            Some(Side::Left) => format!("{}:left", self.class_label()),
            Some(Side::Right) => format!("{}:right", self.class_label()),
            None => self.class_label().to_string(),
        }
    }

    pub fn flipped(&self) -> Movement {
        Movement {
            class: self.class.clone(),
            side: self.side.map(Side::flipped),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceUnit {
    Newtons,
    NewtonsPerKg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceSequence {
    /// One 6-vector per frame: [Fx1, Fy1, Fz1, Fx2, Fy2, Fz2].
    pub frames: Vec<[f64; 6]>,
    pub units: ForceUnit,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    /// One flat `[J * C]` row per frame, joint-major.
    pub frames: Vec<Vec<f64>>,
    /// Per-joint detector confidence, present for 2D detections.
    pub confidences: Option<Vec<Vec<f64>>>,
    pub joints: usize,
    /// 2 for pixel keypoints, 3 for metric poses.
    pub channels: usize,
    pub fps: f64,
    /// Set once pixel coordinates have been mapped to [-1, 1].
    pub normalized: bool,
}

impl PoseSequence {
    pub fn joint(&self, frame: usize, joint: usize) -> &[f64] {
        let c = self.channels;
        &self.frames[frame][joint * c..(joint + 1) * c]
    }

    pub fn validate(&self, field: &str) -> Result<(), DataError> {
        if self.fps <= 0.0 {
            return Err(schema_err(field, "fps must be positive"));
        }
        if self.channels != 2 && self.channels != 3 {
            return Err(schema_err(field, "channels must be 2 or 3"));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.len() != self.joints * self.channels {
                return Err(schema_err(
                    &format!("{field}[{i}]"),
                    format!(
                        "expected {} values, got {}",
                        self.joints * self.channels,
                        f.len()
                    ),
                ));
            }
        }
        if let Some(conf) = &self.confidences {
            if conf.len() != self.frames.len() || conf.iter().any(|c| c.len() != self.joints) {
                return Err(schema_err(field, "confidence shape mismatch"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: String,
    pub subject: Subject,
    pub movement: Movement,
    pub cameras: Vec<CameraParameters>,
    /// Camera id → `[width, height]` in pixels.
    pub image_size: BTreeMap<String, [f64; 2]>,
    pub poses_2d: BTreeMap<String, PoseSequence>,
    pub poses_3d: Option<PoseSequence>,
    pub forces: ForceSequence,
    pub fps_video: f64,
    pub fps_force: f64,
}

impl Trial {
    pub fn camera(&self, id: &str) -> Option<&CameraParameters> {
        self.cameras.iter().find(|c| c.id == id)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.subject.mass_kg <= 0.0 {
            return Err(schema_err("subject.mass_kg", "mass must be positive"));
        }
        if self.fps_video <= 0.0 || self.fps_force <= 0.0 {
            return Err(schema_err("fps_video/fps_force", "must be positive"));
        }
        for cam in &self.cameras {
            cam.validate()?;
        }
        for id in self.poses_2d.keys() {
            if self.camera(id).is_none() {
                return Err(schema_err(
                    &format!("poses_2d.{id}"),
                    "no camera with this id",
                ));
            }
        }
        for (id, seq) in &self.poses_2d {
            seq.validate(&format!("poses_2d.{id}"))?;
            if seq.channels != 2 {
                return Err(schema_err(
                    &format!("poses_2d.{id}"),
                    "expected 2 channels",
                ));
            }
        }
        if let Some(p3) = &self.poses_3d {
            p3.validate("poses_3d")?;
            if p3.channels != 3 {
                return Err(schema_err("poses_3d", "expected 3 channels"));
            }
        }
        Ok(())
    }
}

// ── wire format ──────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct WireSubject {
    id: String,
    mass_kg: f64,
}

#[derive(Serialize, Deserialize)]
struct WireCamera {
    id: String,
    #[serde(rename = "K")]
    k: [[f64; 3]; 3],
    #[serde(rename = "R")]
    r: [[f64; 3]; 3],
    t: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct WireTrial {
    subject: WireSubject,
    movement: String,
    fps_video: f64,
    fps_force: f64,
    cameras: Vec<WireCamera>,
    image_size: BTreeMap<String, [f64; 2]>,
    poses_2d: BTreeMap<String, Vec<Vec<[f64; 3]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    poses_3d: Option<Vec<Vec<[f64; 3]>>>,
    // Kept as free-length rows so a wrong channel count fails validation with
    // a named field instead of a bare deserializer error.
    #[serde(rename = "forces_N")]
    forces_n: Vec<Vec<f64>>,
}

/// Load and fully validate one trial. The trial id is the file stem.
pub fn load_trial(path: &Path) -> Result<Trial, DataError> {
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let wire: WireTrial = serde_json::from_str(&text).map_err(|source| DataError::Json {
        path: path.display().to_string(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trial".to_string());
    trial_from_wire(id, wire)
}

fn trial_from_wire(id: String, wire: WireTrial) -> Result<Trial, DataError> {
    let mut poses_2d = BTreeMap::new();
    for (cam_id, frames) in wire.poses_2d {
        let mut seq_frames = Vec::with_capacity(frames.len());
        let mut confs = Vec::with_capacity(frames.len());
        for (i, frame) in frames.iter().enumerate() {
            if frame.len() != COCO_JOINT_COUNT {
                return Err(schema_err(
                    &format!("poses_2d.{cam_id}[{i}]"),
                    format!("expected {COCO_JOINT_COUNT} joints, got {}", frame.len()),
                ));
            }
            let mut flat = Vec::with_capacity(COCO_JOINT_COUNT * 2);
            let mut conf = Vec::with_capacity(COCO_JOINT_COUNT);
            for j in frame {
                flat.push(j[0]);
                flat.push(j[1]);
                conf.push(j[2]);
            }
            seq_frames.push(flat);
            confs.push(conf);
        }
        poses_2d.insert(
            cam_id,
            PoseSequence {
                frames: seq_frames,
                confidences: Some(confs),
                joints: COCO_JOINT_COUNT,
                channels: 2,
                fps: wire.fps_video,
                normalized: false,
            },
        );
    }
    let poses_3d = match wire.poses_3d {
        None => None,
        Some(frames) => {
            for (i, frame) in frames.iter().enumerate() {
                if frame.len() != COCO_JOINT_COUNT {
                    return Err(schema_err(
                        &format!("poses_3d[{i}]"),
                        format!("expected {COCO_JOINT_COUNT} joints, got {}", frame.len()),
                    ));
                }
            }
            Some(PoseSequence {
                frames: frames
                    .iter()
                    .map(|f| f.iter().flat_map(|j| j.iter().copied()).collect())
                    .collect(),
                confidences: None,
                joints: COCO_JOINT_COUNT,
                channels: 3,
                fps: wire.fps_video,
                normalized: false,
            })
        }
    };
    let mut force_frames = Vec::with_capacity(wire.forces_n.len());
    for (i, row) in wire.forces_n.iter().enumerate() {
        if row.len() != 6 {
            return Err(schema_err(
                "forces",
                format!("expected 6 channels, got {} at frame {i}", row.len()),
            ));
        }
        force_frames.push([row[0], row[1], row[2], row[3], row[4], row[5]]);
    }
    let trial = Trial {
        id,
        subject: Subject {
            id: wire.subject.id,
            mass_kg: wire.subject.mass_kg,
        },
        movement: Movement::parse(&wire.movement),
        cameras: wire
            .cameras
            .into_iter()
            .map(|c| CameraParameters {
                id: c.id,
                k: c.k,
                r: c.r,
                t: c.t,
            })
            .collect(),
        image_size: wire.image_size,
        poses_2d,
        poses_3d,
        forces: ForceSequence {
            frames: force_frames,
            units: ForceUnit::Newtons,
            fps: wire.fps_force,
        },
        fps_video: wire.fps_video,
        fps_force: wire.fps_force,
    };
    trial.validate()?;
    Ok(trial)
}

/// Write a trial back to the wire format. Only native-unit trials can be
/// saved: forces must be in newtons at the recorded force rate so the file
/// stays interchangeable.
pub fn save_trial(trial: &Trial, path: &Path) -> Result<(), DataError> {
    if trial.forces.units != ForceUnit::Newtons {
        return Err(DataError::UnitMismatch {
            expected: ForceUnit::Newtons,
            found: trial.forces.units,
        });
    }
    let poses_2d: BTreeMap<String, Vec<Vec<[f64; 3]>>> = trial
        .poses_2d
        .iter()
        .map(|(cam_id, seq)| {
            let frames: Vec<Vec<[f64; 3]>> = seq
                .frames
                .iter()
                .enumerate()
                .map(|(fi, frame)| {
                    (0..seq.joints)
                        .map(|j| {
                            let conf = seq
                                .confidences
                                .as_ref()
                                .map(|c| c[fi][j])
                                .unwrap_or(1.0);
                            [frame[j * 2], frame[j * 2 + 1], conf]
                        })
                        .collect()
                })
                .collect();
            (cam_id.clone(), frames)
        })
        .collect();
    let poses_3d = trial.poses_3d.as_ref().map(|seq| {
        seq.frames
            .iter()
            .map(|frame| {
                (0..seq.joints)
                    .map(|j| [frame[j * 3], frame[j * 3 + 1], frame[j * 3 + 2]])
                    .collect()
            })
            .collect()
    });
    let wire = WireTrial {
        subject: WireSubject {
            id: trial.subject.id.clone(),
            mass_kg: trial.subject.mass_kg,
        },
        movement: trial.movement.label(),
        fps_video: trial.fps_video,
        fps_force: trial.fps_force,
        cameras: trial
            .cameras
            .iter()
            .map(|c| WireCamera {
                id: c.id.clone(),
                k: c.k,
                r: c.r,
                t: c.t,
            })
            .collect(),
        image_size: trial.image_size.clone(),
        poses_2d,
        poses_3d,
        forces_n: trial.forces.frames.iter().map(|f| f.to_vec()).collect(),
    };
    let text = serde_json::to_string_pretty(&wire).expect("wire trial serializes");
    std::fs::write(path, text).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}
