//! Rate alignment and unit normalization.

use super::trial::{ForceSequence, ForceUnit, PoseSequence, Trial};
use super::DataError;

/// Block-mean decimation to `target_fps`. Each output frame is the mean of
/// `fps / target_fps` consecutive input frames; a partial tail is dropped.
/// Averaging (rather than nearest-sample picking) low-passes impact spikes
/// the same way a slower sensor would see them.
pub fn resample_forces(f: &ForceSequence, target_fps: f64) -> Result<ForceSequence, DataError> {
    let ratio = f.fps / target_fps;
    if ratio < 1.0 || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(DataError::NonIntegerRate(f.fps, target_fps));
    }
    let block = ratio.round() as usize;
    let n_out = f.frames.len() / block;
    let mut frames = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let mut acc = [0.0; 6];
        for j in 0..block {
            let src = &f.frames[i * block + j];
            for (a, v) in acc.iter_mut().zip(src) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= block as f64;
        }
        frames.push(acc);
    }
    Ok(ForceSequence {
        frames,
        units: f.units,
        fps: target_fps,
    })
}

/// Newtons → newtons-per-kilogram.
pub fn normalize_forces(f: &ForceSequence, mass_kg: f64) -> Result<ForceSequence, DataError> {
    if f.units != ForceUnit::Newtons {
        return Err(DataError::UnitMismatch {
            expected: ForceUnit::Newtons,
            found: f.units,
        });
    }
    Ok(scale_forces(f, 1.0 / mass_kg, ForceUnit::NewtonsPerKg))
}

/// Newtons-per-kilogram → newtons. The mass here is whatever the protocol
/// dictates: the subject's own mass for ground truth, the training-set mean
/// for model predictions.
pub fn denormalize_forces(f: &ForceSequence, mass_kg: f64) -> Result<ForceSequence, DataError> {
    if f.units != ForceUnit::NewtonsPerKg {
        return Err(DataError::UnitMismatch {
            expected: ForceUnit::NewtonsPerKg,
            found: f.units,
        });
    }
    Ok(scale_forces(f, mass_kg, ForceUnit::Newtons))
}

fn scale_forces(f: &ForceSequence, factor: f64, units: ForceUnit) -> ForceSequence {
    ForceSequence {
        frames: f
            .frames
            .iter()
            .map(|fr| {
                let mut out = [0.0; 6];
                for (o, v) in out.iter_mut().zip(fr) {
                    *o = v * factor;
                }
                out
            })
            .collect(),
        units,
        fps: f.fps,
    }
}

/// Map pixel keypoints to [-1, 1]: `x ↦ 2x/width - 1`, `y ↦ 2y/height - 1`.
/// Not idempotent, so a `normalized` flag guards against double application.
/// Confidences ride along unchanged; the model input drops them later.
pub fn normalize_keypoints_2d(
    p: &PoseSequence,
    width: f64,
    height: f64,
) -> Result<PoseSequence, DataError> {
    if p.normalized {
        return Err(DataError::AlreadyNormalized);
    }
    if p.channels != 2 {
        return Err(DataError::WrongChannels {
            expected: 2,
            found: p.channels,
        });
    }
    if width <= 0.0 || height <= 0.0 {
        return Err(DataError::BadImageSize(width, height));
    }
    let frames = p
        .frames
        .iter()
        .map(|f| {
            f.chunks(2)
                .flat_map(|xy| [2.0 * xy[0] / width - 1.0, 2.0 * xy[1] / height - 1.0])
                .collect()
        })
        .collect();
    Ok(PoseSequence {
        frames,
        confidences: p.confidences.clone(),
        joints: p.joints,
        channels: 2,
        fps: p.fps,
        normalized: true,
    })
}

/// Bring a freshly loaded trial onto the model's clock and units: forces
/// block-mean resampled to the video rate and divided by subject mass, all
/// sequences truncated to a common frame count.
pub fn align_trial(trial: &Trial) -> Result<Trial, DataError> {
    let resampled = resample_forces(&trial.forces, trial.fps_video)?;
    let forces = normalize_forces(&resampled, trial.subject.mass_kg)?;

    let mut n = forces.frames.len();
    for seq in trial.poses_2d.values() {
        n = n.min(seq.frames.len());
    }
    if let Some(p3) = &trial.poses_3d {
        n = n.min(p3.frames.len());
    }

    let truncate_pose = |seq: &PoseSequence| PoseSequence {
        frames: seq.frames[..n].to_vec(),
        confidences: seq.confidences.as_ref().map(|c| c[..n].to_vec()),
        ..seq.clone()
    };
    let mut out = trial.clone();
    out.poses_2d = trial
        .poses_2d
        .iter()
        .map(|(id, seq)| (id.clone(), truncate_pose(seq)))
        .collect();
    out.poses_3d = trial.poses_3d.as_ref().map(truncate_pose);
    out.forces = ForceSequence {
        frames: forces.frames[..n].to_vec(),
        units: forces.units,
        fps: forces.fps,
    };
    Ok(out)
}
