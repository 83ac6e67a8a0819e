//! Sequence-level evaluation: run a trained model over held-out trials and
//! aggregate newton-scale errors camera → video → overall.

use super::{prepare_trial, TrainError, WindowSource};
use crate::data::{denormalize_forces, InputSource, Trial, WindowedSample};
use crate::metrics::{mean_k_peaks, net_vertical, sequence_rmse, MetricError};
use crate::model::{forward, Checkpoint, ModelParameters};
use crate::tensor::Tape;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Scores for one predicted force sequence against ground truth, in newtons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceScores {
    #[serde(rename = "rmse_N")]
    pub rmse_n: f64,
    /// Mean k-peaks error keyed by k ("1", "3", "5"). Empty when the ground
    /// truth has no local extrema to match (e.g. quiet standing).
    #[serde(rename = "kpeaks_N")]
    pub kpeaks_n: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoReport {
    #[serde(rename = "rmse_N")]
    pub rmse_n: f64,
    #[serde(rename = "kpeaks_N")]
    pub kpeaks_n: BTreeMap<String, f64>,
    /// Per input stream: camera id, or "3d" for pose-sequence input.
    pub cameras: BTreeMap<String, SequenceScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(rename = "rmse_N")]
    pub rmse_n: f64,
    #[serde(rename = "kpeaks_N")]
    pub kpeaks_n: BTreeMap<String, f64>,
    pub videos: BTreeMap<String, VideoReport>,
}

/// Score one prediction against ground truth. k-peaks are computed on the
/// net vertical channel; a ground-truth signal with no local extrema yields
/// an empty k-peaks map rather than an error.
pub fn score_sequence(
    pred_n: &[[f64; 6]],
    gt_n: &[[f64; 6]],
    ks: &[usize],
    min_peak_distance: usize,
) -> Result<SequenceScores, TrainError> {
    let rmse_n = sequence_rmse(pred_n, gt_n)?;
    let pred_net = net_vertical(pred_n);
    let gt_net = net_vertical(gt_n);
    let mut kpeaks_n = BTreeMap::new();
    for &k in ks {
        match mean_k_peaks(&pred_net, &gt_net, k, min_peak_distance) {
            Ok(v) => {
                kpeaks_n.insert(k.to_string(), v);
            }
            Err(MetricError::NoGroundTruthPeaks) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(SequenceScores { rmse_n, kpeaks_n })
}

/// Predict a per-frame force sequence in newtons for a window stream.
/// Windows are independent, so chunks run in parallel; results keep window
/// order and are bitwise reproducible.
pub fn predict_sequence_n(
    model: &ModelParameters,
    windows: &[WindowedSample],
    scale_to_newtons: f64,
) -> Result<Vec<[f64; 6]>, TrainError> {
    let chunks: Vec<Result<Vec<[f64; 6]>, TrainError>> = windows
        .par_chunks(64)
        .map(|chunk| {
            let mut tape = Tape::new();
            let bound = model.bind_frozen(&mut tape);
            let mut out = Vec::with_capacity(chunk.len());
            for s in chunk {
                let x = tape.constant(super::window_tensor(s)?);
                let y = forward(&mut tape, &bound, x)?;
                let data = tape.value(y.force).data();
                let mut row = [0.0; 6];
                for (r, v) in row.iter_mut().zip(data) {
                    *r = v * scale_to_newtons;
                }
                out.push(row);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(windows.len());
    for c in chunks {
        all.extend(c?);
    }
    Ok(all)
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Average per-k peak errors across a set of score maps, keeping only ks
/// present somewhere.
fn aggregate_kpeaks<'a>(
    maps: impl Iterator<Item = &'a BTreeMap<String, f64>> + Clone,
) -> BTreeMap<String, f64> {
    let mut keys: Vec<String> = Vec::new();
    for m in maps.clone() {
        for k in m.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let mut out = BTreeMap::new();
    for k in keys {
        if let Some(mean) = mean_of(maps.clone().filter_map(|m| m.get(&k)).copied()) {
            out.insert(k, mean);
        }
    }
    out
}

/// Evaluate a checkpoint over trials: per (video, input stream) RMSE and
/// k-peak errors in newtons, averaged over streams within a video, then over
/// videos. Predictions are denormalized with the checkpoint's training-mean
/// mass; ground truth uses each subject's true mass.
pub fn evaluate(
    ckpt: &Checkpoint,
    trials: &[&Trial],
    source: WindowSource,
    ks: &[usize],
    min_peak_distance: usize,
) -> Result<EvalReport, TrainError> {
    if trials.is_empty() {
        return Err(TrainError::NoSamples);
    }
    let f = ckpt.model.config.frames;
    let mut videos = BTreeMap::new();
    for trial in trials {
        let prepared = prepare_trial(trial)?;
        let gt_n: Vec<[f64; 6]> =
            denormalize_forces(&prepared.forces, trial.subject.mass_kg)?.frames;
        let streams: Vec<InputSource> = match source {
            WindowSource::AllCameras => prepared
                .poses_2d
                .keys()
                .map(|id| InputSource::Camera(id.clone()))
                .collect(),
            WindowSource::Pose3d => vec![InputSource::Pose3d],
        };
        let mut cameras = BTreeMap::new();
        for stream in streams {
            let windows = crate::data::make_windows(&prepared, f, &stream)?;
            let pred_n =
                predict_sequence_n(&ckpt.model, &windows, ckpt.train_mean_mass_kg)?;
            let scores = score_sequence(&pred_n, &gt_n, ks, min_peak_distance)?;
            let label = match &stream {
                InputSource::Camera(id) => id.clone(),
                InputSource::Pose3d => "3d".to_string(),
            };
            cameras.insert(label, scores);
        }
        let rmse_n = mean_of(cameras.values().map(|s| s.rmse_n))
            .expect("every trial has at least one stream");
        let kpeaks_n = aggregate_kpeaks(cameras.values().map(|s| &s.kpeaks_n));
        videos.insert(
            trial.id.clone(),
            VideoReport {
                rmse_n,
                kpeaks_n,
                cameras,
            },
        );
    }
    let rmse_n =
        mean_of(videos.values().map(|v| v.rmse_n)).expect("at least one trial was scored");
    let kpeaks_n = aggregate_kpeaks(videos.values().map(|v| &v.kpeaks_n));
    Ok(EvalReport {
        rmse_n,
        kpeaks_n,
        videos,
    })
}

/// Net vertical force curves for one trial: the ground truth in newtons and
/// one prediction per input stream, keyed like the report's `cameras` maps.
/// These are the series the curve CSVs and plots are built from.
pub fn video_curves(
    ckpt: &Checkpoint,
    trial: &Trial,
    source: WindowSource,
) -> Result<(Vec<f64>, BTreeMap<String, Vec<f64>>), TrainError> {
    let prepared = prepare_trial(trial)?;
    let gt_n: Vec<[f64; 6]> = denormalize_forces(&prepared.forces, trial.subject.mass_kg)?.frames;
    let gt_net = net_vertical(&gt_n);
    let streams: Vec<InputSource> = match source {
        WindowSource::AllCameras => prepared
            .poses_2d
            .keys()
            .map(|id| InputSource::Camera(id.clone()))
            .collect(),
        WindowSource::Pose3d => vec![InputSource::Pose3d],
    };
    let mut preds = BTreeMap::new();
    for stream in streams {
        let windows = crate::data::make_windows(&prepared, ckpt.model.config.frames, &stream)?;
        let pred_n = predict_sequence_n(&ckpt.model, &windows, ckpt.train_mean_mass_kg)?;
        let label = match &stream {
            InputSource::Camera(id) => id.clone(),
            InputSource::Pose3d => "3d".to_string(),
        };
        preds.insert(label, net_vertical(&pred_n));
    }
    Ok((gt_net, preds))
}

/// Evaluate only the trials of one movement class (zero-shot transfer to a
/// class absent from training).
pub fn zero_shot(
    ckpt: &Checkpoint,
    trials: &[&Trial],
    movement_class: &str,
    source: WindowSource,
    ks: &[usize],
    min_peak_distance: usize,
) -> Result<EvalReport, TrainError> {
    let selected: Vec<&Trial> = trials
        .iter()
        .copied()
        .filter(|t| t.movement.class_label() == movement_class)
        .collect();
    if selected.is_empty() {
        return Err(TrainError::UnknownHoldOutKey {
            key: movement_class.to_string(),
        });
    }
    evaluate(ckpt, &selected, source, ks, min_peak_distance)
}
