//! Independent reference implementations used to cross-check the library.
//!
//! Everything here is written straight from the definitions — plain loops,
//! no calls into the crate under test — so a defect in the library cannot
//! hide inside its own oracle.
#![allow(dead_code)]

/// Plain mean squared error over all elements, accumulated in index order.
pub fn ref_mse(pred: &[f64], gt: &[f64]) -> f64 {
    assert_eq!(pred.len(), gt.len(), "oracle inputs must match");
    let mut sq = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        sq += (p - g) * (p - g);
    }
    sq / pred.len() as f64
}

/// Gated MSE by direct enumeration. Each threshold keeps the elements whose
/// ground-truth magnitude is at or above it, contributes the plain MSE over
/// the kept elements, and all terms are averaged with weight 1/T. A
/// threshold that keeps nothing contributes zero.
pub fn ref_gated_mse(pred: &[f64], gt: &[f64], deltas: &[f64]) -> f64 {
    assert_eq!(pred.len(), gt.len(), "oracle inputs must match");
    let weight = 1.0 / deltas.len() as f64;
    let mut total = 0.0;
    for &delta in deltas {
        let mut sq = 0.0;
        let mut count = 0usize;
        for (p, g) in pred.iter().zip(gt) {
            if g.abs() >= delta {
                sq += (p - g) * (p - g);
                count += 1;
            }
        }
        if count > 0 {
            total += weight * (sq / count as f64);
        }
    }
    total
}

/// Every interior local extremum of a signal: a run of equal values counts
/// once, at its leftmost index, when the distinct neighbors on both sides
/// are strictly below (maximum) or strictly above (minimum) the run's value.
/// Runs touching either end of the signal never qualify.
pub fn ref_extrema(signal: &[f64]) -> Vec<(usize, f64)> {
    let n = signal.len();
    let mut out = Vec::new();
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && signal[end] == signal[start] {
            end += 1;
        }
        if start > 0 && end < n {
            let v = signal[start];
            let left = signal[start - 1];
            let right = signal[end];
            if (v > left && v > right) || (v < left && v < right) {
                out.push((start, v));
            }
        }
        start = end;
    }
    out
}

/// Brute-force peak selection: rank all extrema by descending magnitude
/// (ties go to the earlier frame), then walk the ranking greedily, keeping a
/// candidate only when it sits at least `min_distance` frames from every
/// peak already kept, until `k` peaks are collected or candidates run out.
pub fn ref_detect_peaks(signal: &[f64], k: usize, min_distance: usize) -> Vec<(usize, f64)> {
    let mut ranked = ref_extrema(signal);
    ranked.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("finite signals only")
            .then(a.0.cmp(&b.0))
    });
    let mut kept: Vec<(usize, f64)> = Vec::new();
    for (frame, value) in ranked {
        if kept.len() == k {
            break;
        }
        if kept.iter().all(|&(f, _)| frame.abs_diff(f) >= min_distance) {
            kept.push((frame, value));
        }
    }
    kept
}

/// Mean per-joint position error between two flat `[J * 3]` buffers, meters.
pub fn ref_mpjpe(pred: &[f64], gt: &[f64]) -> f64 {
    assert_eq!(pred.len(), gt.len(), "oracle inputs must match");
    assert_eq!(pred.len() % 3, 0, "flat 3D joint buffers only");
    let joints = pred.len() / 3;
    let mut total = 0.0;
    for j in 0..joints {
        let dx = pred[3 * j] - gt[3 * j];
        let dy = pred[3 * j + 1] - gt[3 * j + 1];
        let dz = pred[3 * j + 2] - gt[3 * j + 2];
        total += (dx * dx + dy * dy + dz * dz).sqrt();
    }
    total / joints as f64
}

/// Euclidean distance between two 3D points.
pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
