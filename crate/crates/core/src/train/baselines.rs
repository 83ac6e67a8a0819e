//! Non-learned reference predictors.
//!
//! The newtonian baseline differentiates a center-of-mass proxy (hip
//! midpoint of the 3D pose) twice and applies F = m(a + g). The exemplar
//! baseline averages time-normalized training force curves per movement
//! class and replays them scaled by the subject's mass.

use super::TrainError;
use crate::data::{align_trial, resample_forces, Trial};
use std::collections::BTreeMap;

const GRAVITY: f64 = 9.81;
const LEFT_HIP: usize = 11;
const RIGHT_HIP: usize = 12;

/// Samples per time-normalized exemplar curve.
pub const EXEMPLAR_SAMPLES: usize = 100;

/// Centered moving average with shrinking windows at the edges.
fn smooth(xs: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 || xs.is_empty() {
        return xs.to_vec();
    }
    let half = window / 2;
    let n = xs.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            xs[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Second derivative by central differences; the first and last frames hold
/// their neighbor's value.
fn second_derivative(xs: &[f64], fps: f64) -> Vec<f64> {
    let n = xs.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut a = vec![0.0; n];
    for i in 1..n - 1 {
        a[i] = (xs[i + 1] - 2.0 * xs[i] + xs[i - 1]) * fps * fps;
    }
    a[0] = a[1];
    a[n - 1] = a[n - 2];
    a
}

/// Predict plate forces (newtons, video rate) from the 3D pose sequence by
/// rigid-body mechanics on the hip-midpoint trajectory. The total force is
/// split equally over the two plates; no contact model is applied, so flight
/// emerges as near-zero force because the trajectory is ballistic there.
pub fn newton_sequence(trial: &Trial, smooth_window: usize) -> Result<Vec<[f64; 6]>, TrainError> {
    let poses = trial
        .poses_3d
        .as_ref()
        .ok_or_else(|| TrainError::MissingPoseTargets {
            trial: trial.id.clone(),
        })?;
    let n = poses.frames.len();
    let mut com = vec![[0.0f64; 3]; n];
    for (i, frame) in poses.frames.iter().enumerate() {
        for c in 0..3 {
            com[i][c] =
                0.5 * (frame[LEFT_HIP * 3 + c] + frame[RIGHT_HIP * 3 + c]);
        }
    }
    let mass = trial.subject.mass_kg;
    let mut accel = vec![[0.0f64; 3]; n];
    for c in 0..3 {
        let coord: Vec<f64> = com.iter().map(|p| p[c]).collect();
        let smoothed = smooth(&coord, smooth_window);
        for (i, a) in second_derivative(&smoothed, poses.fps).into_iter().enumerate() {
            accel[i][c] = a;
        }
    }
    Ok(accel
        .into_iter()
        .map(|a| {
            let fx = mass * a[0];
            let fy = mass * (a[1] + GRAVITY);
            let fz = mass * a[2];
            [fx / 2.0, fy / 2.0, fz / 2.0, fx / 2.0, fy / 2.0, fz / 2.0]
        })
        .collect())
}

/// Mean force curve per movement class, time-normalized to
/// `EXEMPLAR_SAMPLES` points, stored in N/kg.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarBaseline {
    curves: BTreeMap<String, Vec<[f64; 6]>>,
}

/// Linear interpolation of a force sequence at a fractional frame position.
fn sample_at(frames: &[[f64; 6]], pos: f64) -> [f64; 6] {
    let last = frames.len() - 1;
    let lo = (pos.floor() as usize).min(last);
    let hi = (lo + 1).min(last);
    let w = pos - lo as f64;
    let mut out = [0.0; 6];
    for c in 0..6 {
        out[c] = frames[lo][c] + w * (frames[hi][c] - frames[lo][c]);
    }
    out
}

fn resample_curve(frames: &[[f64; 6]], n_out: usize) -> Vec<[f64; 6]> {
    let span = (frames.len() - 1) as f64;
    (0..n_out)
        .map(|i| {
            let u = if n_out > 1 {
                i as f64 / (n_out - 1) as f64
            } else {
                0.0
            };
            sample_at(frames, u * span)
        })
        .collect()
}

impl ExemplarBaseline {
    /// Average the mass-normalized, time-normalized force curves of the
    /// training trials per movement class.
    pub fn build(trials: &[&Trial]) -> Result<ExemplarBaseline, TrainError> {
        let mut sums: BTreeMap<String, (Vec<[f64; 6]>, usize)> = BTreeMap::new();
        for trial in trials {
            let aligned = align_trial(trial)?; // N/kg at video rate
            if aligned.forces.frames.len() < 2 {
                continue;
            }
            let curve = resample_curve(&aligned.forces.frames, EXEMPLAR_SAMPLES);
            let class = trial.movement.class_label().to_string();
            let entry = sums
                .entry(class)
                .or_insert_with(|| (vec![[0.0; 6]; EXEMPLAR_SAMPLES], 0));
            for (acc, row) in entry.0.iter_mut().zip(&curve) {
                for c in 0..6 {
                    acc[c] += row[c];
                }
            }
            entry.1 += 1;
        }
        if sums.is_empty() {
            return Err(TrainError::NoSamples);
        }
        let curves = sums
            .into_iter()
            .map(|(class, (mut acc, count))| {
                for row in &mut acc {
                    for c in row.iter_mut() {
                        *c /= count as f64;
                    }
                }
                (class, acc)
            })
            .collect();
        Ok(ExemplarBaseline { curves })
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.curves.keys().map(|s| s.as_str())
    }

    /// Replay the class exemplar stretched to the trial's aligned length and
    /// scaled by the subject's mass (newtons, video rate).
    pub fn predict(&self, trial: &Trial) -> Result<Vec<[f64; 6]>, TrainError> {
        let class = trial.movement.class_label();
        let curve = self
            .curves
            .get(class)
            .ok_or_else(|| TrainError::UnknownHoldOutKey {
                key: format!("no exemplar for movement class {class:?}"),
            })?;
        let n = resample_forces(&trial.forces, trial.fps_video)?.frames.len();
        let mass = trial.subject.mass_kg;
        Ok(resample_curve(curve, n)
            .into_iter()
            .map(|row| {
                let mut out = [0.0; 6];
                for c in 0..6 {
                    out[c] = row[c] * mass;
                }
                out
            })
            .collect())
    }
}
