//! Losses and evaluation metrics.
//!
//! Training losses (gated MSE, MPJPE, the multi-task sum) are built on the
//! autodiff tape so gradients flow; evaluation metrics (sequence RMSE, the
//! two-level aggregation, mean k-peaks) are plain functions over reported
//! newtons.

use crate::tensor::{Tape, Tensor, TensorError, Var};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("shape mismatch: prediction {pred:?} vs ground truth {gt:?}")]
    ShapeMismatch { pred: Vec<usize>, gt: Vec<usize> },
    #[error("empty sequence passed to {0}")]
    Empty(&'static str),
    #[error("invalid gate schedule: {0}")]
    BadSchedule(String),
    #[error("ground-truth signal has no detectable peaks; k-peaks is undefined")]
    NoGroundTruthPeaks,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

// ── gated MSE ────────────────────────────────────────────────────────────

/// The threshold ladder is [0, 1, 5, 10, 15, 20, …] N/kg: after the 0 and
/// 1 entries it climbs in steps of 5.
pub fn default_deltas(terms: usize) -> Vec<f64> {
    (0..terms)
        .map(|t| match t {
            0 => 0.0,
            1 => 1.0,
            t => 5.0 * (t - 1) as f64,
        })
        .collect()
}

/// Ascending gate thresholds in N/kg. Every term carries weight `1/T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSchedule {
    deltas: Vec<f64>,
}

impl GateSchedule {
    pub fn new(deltas: Vec<f64>) -> Result<Self, MetricError> {
        if deltas.is_empty() {
            return Err(MetricError::BadSchedule("need at least one term".into()));
        }
        if deltas[0] != 0.0 {
            return Err(MetricError::BadSchedule(format!(
                "first threshold must be 0, got {}",
                deltas[0]
            )));
        }
        if deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricError::BadSchedule(
                "thresholds must be strictly ascending".into(),
            ));
        }
        Ok(GateSchedule { deltas })
    }

    /// First `terms` entries of the standard ladder.
    pub fn from_terms(terms: usize) -> Result<Self, MetricError> {
        GateSchedule::new(default_deltas(terms))
    }

    pub fn terms(&self) -> usize {
        self.deltas.len()
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.deltas.len() as f64
    }
}

/// Which elements a threshold keeps. The standard gate keeps elements whose
/// ground-truth magnitude clears the threshold, so higher-impact terms see
/// only high-force frames and the T=1 case is exactly plain MSE. The
/// literal-below variant keeps `|gt| < δ` instead — the other reading of the
/// set-builder — and is exposed for side-by-side study only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatePredicate {
    GroundTruthAtOrAbove,
    LiteralBelow,
}

impl GatePredicate {
    fn keeps(self, gt_value: f64, delta: f64) -> bool {
        match self {
            GatePredicate::GroundTruthAtOrAbove => gt_value.abs() >= delta,
            GatePredicate::LiteralBelow => gt_value.abs() < delta,
        }
    }
}

/// Differentiable gated MSE over a prediction tensor and a same-shape
/// ground-truth tensor (N/kg). Per term: mask by the gate on ground truth,
/// mean the squared error over surviving elements, weight by `1/T`, sum.
/// A term whose gate keeps nothing contributes 0. The gate reads only ground
/// truth, so it is constant through backprop.
pub fn gated_mse(
    tape: &mut Tape,
    pred: Var,
    gt: &Tensor,
    schedule: &GateSchedule,
) -> Result<Var, MetricError> {
    gated_mse_with_predicate(tape, pred, gt, schedule, GatePredicate::GroundTruthAtOrAbove)
}

pub fn gated_mse_with_predicate(
    tape: &mut Tape,
    pred: Var,
    gt: &Tensor,
    schedule: &GateSchedule,
    predicate: GatePredicate,
) -> Result<Var, MetricError> {
    if tape.value(pred).shape() != gt.shape() {
        return Err(MetricError::ShapeMismatch {
            pred: tape.value(pred).shape().to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let gt_var = tape.constant(gt.clone());
    let diff = tape.sub(pred, gt_var)?;
    let sq = tape.mul(diff, diff)?;
    let weight = schedule.weight();
    let mut loss: Option<Var> = None;
    for &delta in schedule.deltas() {
        let mask_data: Vec<f64> = gt
            .data()
            .iter()
            .map(|&v| if predicate.keeps(v, delta) { 1.0 } else { 0.0 })
            .collect();
        let count = mask_data.iter().sum::<f64>();
        if count == 0.0 {
            continue;
        }
        let mask = tape.constant(Tensor::new(gt.shape(), mask_data)?);
        let gated = tape.mul(sq, mask)?;
        let total = tape.sum_all(gated);
        let term = tape.scale(total, weight / count);
        loss = Some(match loss {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    Ok(match loss {
        Some(v) => v,
        // Every gate empty (possible only under the literal-below variant):
        // the loss is the empty sum.
        None => tape.constant(Tensor::scalar(0.0)),
    })
}

/// Plain MSE, the T=1 special case, shaped so the two share every operation
/// ordering and agree bit-for-bit.
pub fn mse(tape: &mut Tape, pred: Var, gt: &Tensor) -> Result<Var, MetricError> {
    if tape.value(pred).shape() != gt.shape() {
        return Err(MetricError::ShapeMismatch {
            pred: tape.value(pred).shape().to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let gt_var = tape.constant(gt.clone());
    let diff = tape.sub(pred, gt_var)?;
    let sq = tape.mul(diff, diff)?;
    let ones = tape.constant(Tensor::filled(gt.shape(), 1.0));
    let gated = tape.mul(sq, ones)?;
    let total = tape.sum_all(gated);
    Ok(tape.scale(total, 1.0 / gt.numel() as f64))
}

/// Value-domain gated MSE (no gradients), used by evaluation and tests.
/// Delegates to the tape implementation so both paths are one code path.
pub fn gated_mse_value(
    pred: &Tensor,
    gt: &Tensor,
    schedule: &GateSchedule,
    predicate: GatePredicate,
) -> Result<f64, MetricError> {
    let mut tape = Tape::new();
    let p = tape.constant(pred.clone());
    let loss = gated_mse_with_predicate(&mut tape, p, gt, schedule, predicate)?;
    Ok(tape.value(loss).item())
}

// ── pose error ───────────────────────────────────────────────────────────

/// Mean per-joint position error: mean over joints of the Euclidean distance
/// between predicted and ground-truth 3D joint positions. `pred` is `[J, 3]`.
pub fn mpjpe(tape: &mut Tape, pred: Var, gt: &Tensor) -> Result<Var, MetricError> {
    if tape.value(pred).shape() != gt.shape() {
        return Err(MetricError::ShapeMismatch {
            pred: tape.value(pred).shape().to_vec(),
            gt: gt.shape().to_vec(),
        });
    }
    let gt_var = tape.constant(gt.clone());
    let diff = tape.sub(pred, gt_var)?;
    let sq = tape.mul(diff, diff)?;
    let per_joint = tape.sum_axis(sq, 1)?;
    let dist = tape.sqrt(per_joint);
    Ok(tape.mean_all(dist))
}

/// `L_mt = L_f + alpha * L_p`.
pub fn multi_task_loss(
    tape: &mut Tape,
    l_force: Var,
    l_pose: Var,
    alpha: f64,
) -> Result<Var, MetricError> {
    let scaled = tape.scale(l_pose, alpha);
    Ok(tape.add(l_force, scaled)?)
}

// ── sequence-level evaluation ────────────────────────────────────────────

/// RMSE over a force sequence in newtons:
/// `sqrt(mean over frames of ||F_i - F̂_i||²)` with the squared L2 norm taken
/// over all 6 channels.
pub fn sequence_rmse(pred: &[[f64; 6]], gt: &[[f64; 6]]) -> Result<f64, MetricError> {
    if pred.is_empty() || gt.is_empty() {
        return Err(MetricError::Empty("sequence_rmse"));
    }
    if pred.len() != gt.len() {
        return Err(MetricError::ShapeMismatch {
            pred: vec![pred.len(), 6],
            gt: vec![gt.len(), 6],
        });
    }
    let mut acc = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        for c in 0..6 {
            let d = p[c] - g[c];
            acc += d * d;
        }
    }
    Ok((acc / pred.len() as f64).sqrt())
}

/// Two-level mean of per-(video, camera) RMSEs: average across cameras within
/// each video, then across videos. Camera counts may differ per video; each
/// video still contributes equally.
pub fn average_sequence_loss(
    rmse: &BTreeMap<String, BTreeMap<String, f64>>,
) -> Result<f64, MetricError> {
    if rmse.is_empty() || rmse.values().any(|cams| cams.is_empty()) {
        return Err(MetricError::Empty("average_sequence_loss"));
    }
    let mut total = 0.0;
    for cams in rmse.values() {
        let video_mean: f64 = cams.values().sum::<f64>() / cams.len() as f64;
        total += video_mean;
    }
    Ok(total / rmse.len() as f64)
}

// ── peak detection and the k-peaks metric ────────────────────────────────

/// Default separation between reported peaks: 10 frames = 0.2 s at 50 Hz.
pub const DEFAULT_MIN_PEAK_DISTANCE: usize = 10;

/// Detected signal extrema, ordered by descending absolute magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    /// `(frame index, signal value)` pairs.
    pub peaks: Vec<(usize, f64)>,
    /// The requested count; `peaks.len()` may be smaller.
    pub k: usize,
}

/// Find up to `k` local extrema (maxima and minima both count; magnitude is
/// absolute value). An extremum is strictly higher/lower than its differing
/// neighbors; a plateau counts once at its leftmost index; signal endpoints
/// never qualify. Candidates are ranked by |value| and kept greedily subject
/// to `min_distance` frames of separation.
pub fn detect_peaks(signal: &[f64], k: usize, min_distance: usize) -> PeakSet {
    let n = signal.len();
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && signal[end + 1] == signal[start] {
            end += 1;
        }
        // Run [start, end] of equal values; interior runs only.
        if start > 0 && end + 1 < n {
            let v = signal[start];
            let (left, right) = (signal[start - 1], signal[end + 1]);
            if (left < v && right < v) || (left > v && right > v) {
                candidates.push((start, v));
            }
        }
        start = end + 1;
    }
    // Descending |value|, ties to the earlier frame: a total, stable order.
    candidates.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("finite signal values")
            .then(a.0.cmp(&b.0))
    });
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    for (idx, v) in candidates {
        if peaks.len() == k {
            break;
        }
        if peaks
            .iter()
            .all(|&(kept, _)| kept.abs_diff(idx) >= min_distance)
        {
            peaks.push((idx, v));
        }
    }
    PeakSet { peaks, k }
}

/// Mean Euclidean distance over matched peak pairs, mixing temporal offset
/// (frames) and magnitude difference (newtons): `(1/k) Σ √(Δframes² + ΔN²)`.
///
/// Ground-truth peaks are matched in descending magnitude order, each taking
/// the nearest-in-time unused predicted peak. A ground-truth peak with no
/// predicted peak left is scored against the predicted signal's value at the
/// same frame (a pure magnitude miss).
pub fn mean_k_peaks(
    pred_signal: &[f64],
    gt_signal: &[f64],
    k: usize,
    min_distance: usize,
) -> Result<f64, MetricError> {
    if pred_signal.len() != gt_signal.len() {
        return Err(MetricError::ShapeMismatch {
            pred: vec![pred_signal.len()],
            gt: vec![gt_signal.len()],
        });
    }
    if gt_signal.is_empty() {
        return Err(MetricError::Empty("mean_k_peaks"));
    }
    let gt_peaks = detect_peaks(gt_signal, k, min_distance);
    if gt_peaks.peaks.is_empty() {
        return Err(MetricError::NoGroundTruthPeaks);
    }
    let pred_peaks = detect_peaks(pred_signal, k, min_distance);
    let mut used = vec![false; pred_peaks.peaks.len()];
    let mut total = 0.0;
    for &(gt_frame, gt_mag) in &gt_peaks.peaks {
        let nearest = pred_peaks
            .peaks
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by_key(|(_, &(pf, _))| (pf.abs_diff(gt_frame), pf));
        total += match nearest {
            Some((i, &(pf, pm))) => {
                used[i] = true;
                let df = pf.abs_diff(gt_frame) as f64;
                let dm = pm - gt_mag;
                (df * df + dm * dm).sqrt()
            }
            None => (pred_signal[gt_frame] - gt_mag).abs(),
        };
    }
    Ok(total / gt_peaks.peaks.len() as f64)
}

/// Net vertical ground-reaction force: the two plates' vertical channels
/// summed per frame. This is the default signal for peak metrics and plots.
pub fn net_vertical(frames: &[[f64; 6]]) -> Vec<f64> {
    frames.iter().map(|f| f[1] + f[4]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::check::finite_difference_check;

    #[test]
    fn standard_delta_ladder() {
        assert_eq!(default_deltas(6), vec![0.0, 1.0, 5.0, 10.0, 15.0, 20.0]);
        assert!(GateSchedule::new(vec![1.0, 2.0]).is_err()); // must start at 0
        assert!(GateSchedule::new(vec![0.0, 5.0, 5.0]).is_err()); // ascending
        assert!(GateSchedule::new(vec![]).is_err());
    }

    #[test]
    fn gated_mse_equals_plain_mse_at_one_term() {
        let pred = Tensor::new(&[1, 2], vec![0.0, 3.0]).unwrap();
        let gt = Tensor::new(&[1, 2], vec![1.0, 1.0]).unwrap();
        let schedule = GateSchedule::from_terms(1).unwrap();
        let mut tape = Tape::new();
        let p = tape.constant(pred.clone());
        let g1 = gated_mse(&mut tape, p, &gt, &schedule).unwrap();
        let m1 = mse(&mut tape, p, &gt).unwrap();
        // (1 + 4) / 2 = 2.5, and bit-identical between the two paths.
        assert_eq!(tape.value(g1).item(), 2.5);
        assert_eq!(
            tape.value(g1).item().to_bits(),
            tape.value(m1).item().to_bits()
        );
    }

    #[test]
    fn gated_mse_two_term_example() {
        // δ = [0, 1]; gt = [0.5, 6], pred = [0, 5].
        // Term 0 gates nothing out: MSE = (0.25 + 1) / 2 = 0.625.
        // Term 1 keeps only |6| ≥ 1: MSE = 1.
        // Loss = 0.5 · 0.625 + 0.5 · 1 = 0.8125, exactly.
        let pred = Tensor::new(&[1, 2], vec![0.0, 5.0]).unwrap();
        let gt = Tensor::new(&[1, 2], vec![0.5, 6.0]).unwrap();
        let schedule = GateSchedule::from_terms(2).unwrap();
        let v = gated_mse_value(&pred, &gt, &schedule, GatePredicate::GroundTruthAtOrAbove)
            .unwrap();
        assert_eq!(v, 0.8125);
    }

    #[test]
    fn gated_mse_zero_on_perfect_prediction_any_terms() {
        let gt = Tensor::new(&[2, 3], vec![0.5, 6.0, -12.0, 0.0, 3.0, 20.0]).unwrap();
        for t in 1..=5 {
            let schedule = GateSchedule::from_terms(t).unwrap();
            let v =
                gated_mse_value(&gt, &gt, &schedule, GatePredicate::GroundTruthAtOrAbove).unwrap();
            assert_eq!(v, 0.0, "T = {t}");
        }
    }

    #[test]
    fn gated_mse_skips_empty_gates() {
        // All |gt| < 5, so the δ=5 term keeps nothing and contributes 0.
        let pred = Tensor::new(&[1, 2], vec![1.0, 1.0]).unwrap();
        let gt = Tensor::new(&[1, 2], vec![2.0, 2.0]).unwrap();
        let schedule = GateSchedule::new(vec![0.0, 5.0]).unwrap();
        let v = gated_mse_value(&pred, &gt, &schedule, GatePredicate::GroundTruthAtOrAbove)
            .unwrap();
        // Only the δ=0 term: 0.5 · mean([1, 1]) = 0.5.
        assert_eq!(v, 0.5);
    }

    #[test]
    fn literal_below_variant_differs() {
        let pred = Tensor::new(&[1, 2], vec![0.0, 5.0]).unwrap();
        let gt = Tensor::new(&[1, 2], vec![0.5, 6.0]).unwrap();
        let schedule = GateSchedule::from_terms(2).unwrap();
        // δ=0 keeps nothing (no |gt| < 0); δ=1 keeps only the 0.5 element.
        let v = gated_mse_value(&pred, &gt, &schedule, GatePredicate::LiteralBelow).unwrap();
        assert_eq!(v, 0.5 * 0.25);
    }

    #[test]
    fn gated_mse_gradient_matches_finite_differences() {
        let pred = Tensor::new(&[2, 3], vec![0.3, 4.0, -9.0, 1.1, 0.2, 14.0]).unwrap();
        let gt = Tensor::new(&[2, 3], vec![0.5, 6.0, -12.0, 0.9, 0.0, 15.5]).unwrap();
        let schedule = GateSchedule::from_terms(3).unwrap();
        let err = finite_difference_check(
            |tape, vars| {
                gated_mse(tape, vars[0], &gt, &schedule).map_err(|_| {
                    crate::tensor::TensorError::NonFinite("gated_mse")
                })
            },
            &[pred],
            1e-5,
        )
        .unwrap();
        assert!(err < 1e-6, "worst relative error {err:e}");
    }

    #[test]
    fn mpjpe_hand_cases() {
        let mut tape = Tape::new();
        // Single joint offset by (3, 4, 0): distance 5.
        let pred = tape.constant(Tensor::new(&[1, 3], vec![3.0, 4.0, 0.0]).unwrap());
        let gt = Tensor::new(&[1, 3], vec![0.0, 0.0, 0.0]).unwrap();
        let l = mpjpe(&mut tape, pred, &gt).unwrap();
        assert_eq!(tape.value(l).item(), 5.0);
        // Two joints offset by (1,0,0) and (0,2,0): mean(1, 2) = 1.5.
        let pred2 = tape.constant(
            Tensor::new(&[2, 3], vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0]).unwrap(),
        );
        let gt2 = Tensor::zeros(&[2, 3]);
        let l2 = mpjpe(&mut tape, pred2, &gt2).unwrap();
        assert_eq!(tape.value(l2).item(), 1.5);
        // Identical poses → 0.
        let gt3 = Tensor::new(&[1, 3], vec![3.0, 4.0, 0.0]).unwrap();
        let l3 = mpjpe(&mut tape, pred, &gt3).unwrap();
        assert_eq!(tape.value(l3).item(), 0.0);
    }

    #[test]
    fn multi_task_combination() {
        let mut tape = Tape::new();
        let lf = tape.constant(Tensor::scalar(2.0));
        let lp = tape.constant(Tensor::scalar(3.0));
        let both = multi_task_loss(&mut tape, lf, lp, 1.0).unwrap();
        assert_eq!(tape.value(both).item(), 5.0);
        let force_only = multi_task_loss(&mut tape, lf, lp, 0.0).unwrap();
        assert_eq!(tape.value(force_only).item(), 2.0);
    }

    #[test]
    fn sequence_rmse_hand_cases() {
        let gt = vec![[0.0; 6]; 1];
        let mut pred = vec![[0.0; 6]; 1];
        pred[0][1] = 10.0;
        assert_eq!(sequence_rmse(&pred, &gt).unwrap(), 10.0);

        // Per-frame squared norms 9 and 16 → sqrt(12.5).
        let gt2 = vec![[0.0; 6]; 2];
        let pred2 = vec![
            [3.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 4.0, 0.0, 0.0, 0.0, 0.0],
        ];
        assert!((sequence_rmse(&pred2, &gt2).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(sequence_rmse(&gt2, &gt2).unwrap(), 0.0);
        assert!(sequence_rmse(&[], &[]).is_err());
    }

    #[test]
    fn two_level_aggregation() {
        let mut map = BTreeMap::new();
        map.insert(
            "videoA".to_string(),
            BTreeMap::from([("cam0".to_string(), 2.0), ("cam1".to_string(), 4.0)]),
        );
        map.insert(
            "videoB".to_string(),
            BTreeMap::from([("cam0".to_string(), 6.0)]),
        );
        // mean(mean(2,4), mean(6)) = mean(3, 6) = 4.5
        assert_eq!(average_sequence_loss(&map).unwrap(), 4.5);

        let single = BTreeMap::from([(
            "v".to_string(),
            BTreeMap::from([("c".to_string(), 7.25)]),
        )]);
        assert_eq!(average_sequence_loss(&single).unwrap(), 7.25);
        assert!(average_sequence_loss(&BTreeMap::new()).is_err());
    }

    #[test]
    fn detect_peaks_hand_cases() {
        let peaks = detect_peaks(&[0.0, 1.0, 0.0, 2.0, 0.0], 2, 1);
        assert_eq!(peaks.peaks, vec![(3, 2.0), (1, 1.0)]);

        // Constant and monotone signals have no interior extrema.
        assert!(detect_peaks(&[5.0; 20], 3, 1).peaks.is_empty());
        assert!(detect_peaks(&[0.0, 1.0, 2.0, 3.0], 3, 1).peaks.is_empty());

        // Minima count by magnitude: the dip to -3 outranks the bump to 2.
        let peaks = detect_peaks(&[0.0, 2.0, 0.0, -3.0, 0.0], 2, 1);
        assert_eq!(peaks.peaks, vec![(3, -3.0), (1, 2.0)]);

        // Plateau takes its leftmost index.
        let peaks = detect_peaks(&[0.0, 4.0, 4.0, 4.0, 0.0], 1, 1);
        assert_eq!(peaks.peaks, vec![(1, 4.0)]);

        // min_distance suppresses the close smaller peak.
        let sig = [0.0, 5.0, 4.0, 4.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0];
        let peaks = detect_peaks(&sig, 3, 5);
        assert_eq!(peaks.peaks, vec![(1, 5.0), (10, 3.0)]);
    }

    #[test]
    fn mean_k_peaks_hand_case() {
        // gt peak at frame 10 of 500 N; pred peak at frame 13 of 460 N.
        let mut gt = vec![0.0; 30];
        gt[10] = 500.0;
        let mut pred = vec![0.0; 30];
        pred[13] = 460.0;
        let v = mean_k_peaks(&pred, &gt, 1, 1).unwrap();
        assert!((v - 1609.0f64.sqrt()).abs() < 1e-9);

        assert_eq!(mean_k_peaks(&gt, &gt, 1, 1).unwrap(), 0.0);
        assert!(matches!(
            mean_k_peaks(&pred, &vec![1.0; 30], 1, 1),
            Err(MetricError::NoGroundTruthPeaks)
        ));
    }

    #[test]
    fn mean_k_peaks_unmatched_gt_peak_scores_magnitude_miss() {
        // Flat prediction has no peaks; each gt peak scores |gt - pred[frame]|.
        let mut gt = vec![0.0; 40];
        gt[10] = 100.0;
        gt[30] = 80.0;
        let pred = vec![2.0; 40];
        let v = mean_k_peaks(&pred, &gt, 3, 5).unwrap();
        assert!((v - (98.0 + 78.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_k_peaks_shift_and_offset_invariance() {
        // Shifting both signals in time and adding a shared constant leaves
        // the metric unchanged while peaks stay interior.
        let mut gt = vec![1.0; 60];
        let mut pred = vec![1.0; 60];
        gt[20] = 9.0;
        gt[40] = -6.0;
        pred[22] = 8.0;
        pred[41] = -5.0;
        let base = mean_k_peaks(&pred, &gt, 2, 3).unwrap();

        let shift = 7usize;
        let mut gt_s = vec![1.0; 60];
        let mut pred_s = vec![1.0; 60];
        gt_s[20 + shift] = 9.0;
        gt_s[40 + shift] = -6.0;
        pred_s[22 + shift] = 8.0;
        pred_s[41 + shift] = -5.0;
        assert_eq!(base, mean_k_peaks(&pred_s, &gt_s, 2, 3).unwrap());

        let gt_o: Vec<f64> = gt.iter().map(|v| v + 3.0).collect();
        let pred_o: Vec<f64> = pred.iter().map(|v| v + 3.0).collect();
        assert!((base - mean_k_peaks(&pred_o, &gt_o, 2, 3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn net_vertical_sums_plates() {
        let frames = vec![[1.0, 10.0, 2.0, 3.0, 20.0, 4.0]];
        assert_eq!(net_vertical(&frames), vec![30.0]);
    }
}
