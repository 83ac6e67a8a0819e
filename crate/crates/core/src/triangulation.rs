//! Multi-view triangulation: pinhole projection, direct linear transform,
//! and a RANSAC wrapper that tolerates corrupted views.
//!
//! Per-(frame, joint) solves are seeded independently from the caller's seed,
//! so results are bitwise reproducible regardless of thread count or
//! iteration order.

use crate::data::{CameraParameters, PoseSequence, Trial, COCO_JOINT_NAMES};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TriangulationError {
    #[error("need at least 2 views, got {got}")]
    InsufficientViews { got: usize },
    #[error("degenerate view geometry: triangulation system is rank-deficient")]
    DegenerateGeometry,
    #[error("point is behind camera {camera}")]
    BehindCamera { camera: String },
    #[error("no consensus among views at frame {frame}, joint {joint}")]
    NoConsensus { frame: usize, joint: usize },
    #[error("2D poses must be raw pixel coordinates, not normalized")]
    NormalizedInput,
    #[error("joint {joint} could not be triangulated in any frame")]
    JointFailed { joint: String },
}

/// Project a world point through a calibrated camera to pixel coordinates.
pub fn project(
    p: [f64; 3],
    cam: &CameraParameters,
) -> Result<[f64; 2], TriangulationError> {
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = cam.r[i][0] * p[0] + cam.r[i][1] * p[1] + cam.r[i][2] * p[2] + cam.t[i];
    }
    if c[2] <= 1e-12 {
        return Err(TriangulationError::BehindCamera {
            camera: cam.id.clone(),
        });
    }
    let u = (cam.k[0][0] * c[0] + cam.k[0][1] * c[1] + cam.k[0][2] * c[2]) / c[2];
    let v = (cam.k[1][1] * c[1] + cam.k[1][2] * c[2]) / c[2];
    Ok([u, v])
}

/// 3x4 projection matrix K·[R|t], row-major.
fn projection_matrix(cam: &CameraParameters) -> [[f64; 4]; 3] {
    let mut rt = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rt[i][j] = cam.r[i][j];
        }
        rt[i][3] = cam.t[i];
    }
    let mut p = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..4 {
            p[i][j] = (0..3).map(|k| cam.k[i][k] * rt[k][j]).sum();
        }
    }
    p
}

/// One pixel observation of the same world point.
#[derive(Debug, Clone)]
pub struct View<'a> {
    pub camera: &'a CameraParameters,
    pub pixel: [f64; 2],
}

/// Least-squares triangulation of one point from two or more views via the
/// direct linear transform (SVD null space of the stacked constraints).
pub fn triangulate_dlt(views: &[View<'_>]) -> Result<[f64; 3], TriangulationError> {
    if views.len() < 2 {
        return Err(TriangulationError::InsufficientViews { got: views.len() });
    }
    let mut rows = Vec::with_capacity(views.len() * 2 * 4);
    for view in views {
        let p = projection_matrix(view.camera);
        let [u, v] = view.pixel;
        for j in 0..4 {
            rows.push(u * p[2][j] - p[0][j]);
        }
        for j in 0..4 {
            rows.push(v * p[2][j] - p[1][j]);
        }
    }
    let a = DMatrix::from_row_slice(views.len() * 2, 4, &rows);
    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut min_idx = 0;
    for i in 1..sv.len() {
        if sv[i] < sv[min_idx] {
            min_idx = i;
        }
    }
    // Rank < 3 means a one-dimensional family of solutions.
    let max_sv = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    let third = {
        let mut sorted: Vec<f64> = sv.iter().copied().collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        sorted[2]
    };
    if max_sv <= 0.0 || third / max_sv < 1e-12 {
        return Err(TriangulationError::DegenerateGeometry);
    }
    let h = v_t.row(min_idx);
    let w = h[3];
    if w.abs() < 1e-12 * max_sv.max(1.0) {
        return Err(TriangulationError::DegenerateGeometry);
    }
    Ok([h[0] / w, h[1] / w, h[2] / w])
}

/// Result of a robust triangulation: the refit point, which input views were
/// in the consensus set, and their mean reprojection error.
#[derive(Debug, Clone)]
pub struct RobustPoint {
    pub point: [f64; 3],
    pub inliers: Vec<usize>,
    pub mean_reprojection_px: f64,
}

fn reprojection_error(point: [f64; 3], view: &View<'_>) -> Option<f64> {
    let [u, v] = project(point, view.camera).ok()?;
    Some(((u - view.pixel[0]).powi(2) + (v - view.pixel[1]).powi(2)).sqrt())
}

/// Map a linear index to the `idx`-th (i, j) pair with i < j < n,
/// lexicographic order.
fn pair_from_index(mut idx: usize, n: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range");
}

/// RANSAC over two-view minimal samples. When the iteration budget covers
/// every camera pair, all pairs are tried deterministically instead of
/// sampling. The best hypothesis (most inliers, then lowest mean error) is
/// refit on its full consensus set.
pub fn triangulate_ransac(
    views: &[View<'_>],
    iterations: usize,
    threshold_px: f64,
    seed: u64,
) -> Result<RobustPoint, TriangulationError> {
    let n = views.len();
    if n < 2 {
        return Err(TriangulationError::InsufficientViews { got: n });
    }
    let n_pairs = n * (n - 1) / 2;
    let exhaustive = iterations >= n_pairs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(usize, f64, Vec<usize>, [f64; 3])> = None;
    let budget = if exhaustive { n_pairs } else { iterations };
    for it in 0..budget {
        let pair_idx = if exhaustive {
            it
        } else {
            rng.gen_range(0..n_pairs)
        };
        let (i, j) = pair_from_index(pair_idx, n);
        let Ok(candidate) = triangulate_dlt(&[views[i].clone(), views[j].clone()]) else {
            continue;
        };
        let mut inliers = Vec::new();
        let mut err_sum = 0.0;
        for (k, view) in views.iter().enumerate() {
            if let Some(err) = reprojection_error(candidate, view) {
                if err <= threshold_px {
                    inliers.push(k);
                    err_sum += err;
                }
            }
        }
        if inliers.len() < 2 {
            continue;
        }
        let mean_err = err_sum / inliers.len() as f64;
        let better = match &best {
            None => true,
            Some((count, err, _, _)) => {
                inliers.len() > *count || (inliers.len() == *count && mean_err < *err)
            }
        };
        if better {
            best = Some((inliers.len(), mean_err, inliers, candidate));
        }
    }

    let (_, _, inliers, hypothesis) = best.ok_or(TriangulationError::NoConsensus {
        frame: 0,
        joint: 0,
    })?;
    let inlier_views: Vec<View<'_>> = inliers.iter().map(|&k| views[k].clone()).collect();
    let point = triangulate_dlt(&inlier_views).unwrap_or(hypothesis);
    let mut err_sum = 0.0;
    let mut counted = 0usize;
    for k in &inliers {
        if let Some(err) = reprojection_error(point, &views[*k]) {
            err_sum += err;
            counted += 1;
        }
    }
    let mean = if counted > 0 {
        err_sum / counted as f64
    } else {
        f64::INFINITY
    };
    Ok(RobustPoint {
        point,
        inliers,
        mean_reprojection_px: mean,
    })
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-(frame, joint) RNG stream.
fn point_seed(seed: u64, frame: usize, joint: usize) -> u64 {
    splitmix64(seed ^ splitmix64(((frame as u64) << 32) | joint as u64))
}

fn joint_name(j: usize) -> String {
    COCO_JOINT_NAMES
        .get(j)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("joint{j}"))
}

/// Triangulate every joint of every frame of a trial's 2D poses into a 3D
/// pose sequence. Views with confidence below `min_confidence` are excluded;
/// frames where a joint cannot be solved are filled by linear interpolation
/// between the nearest solved frames (held at the edges). A joint that fails
/// in every frame is an error naming it.
///
/// Output confidences are 1.0 for solved points and 0.0 for interpolated
/// ones.
pub fn triangulate_sequence(
    trial: &Trial,
    iterations: usize,
    threshold_px: f64,
    seed: u64,
    min_confidence: f64,
) -> Result<PoseSequence, TriangulationError> {
    if trial.cameras.len() < 2 {
        return Err(TriangulationError::InsufficientViews {
            got: trial.cameras.len(),
        });
    }
    let mut cams = Vec::new();
    for cam in &trial.cameras {
        let Some(seq) = trial.poses_2d.get(&cam.id) else {
            continue;
        };
        if seq.normalized {
            return Err(TriangulationError::NormalizedInput);
        }
        cams.push((cam, seq));
    }
    if cams.len() < 2 {
        return Err(TriangulationError::InsufficientViews { got: cams.len() });
    }
    let joints = cams[0].1.joints;
    let n_frames = cams
        .iter()
        .map(|(_, seq)| seq.frames.len())
        .min()
        .expect("at least two views");

    // Solve all (frame, joint) points; None marks a gap to interpolate.
    let solved: Vec<Vec<Option<[f64; 3]>>> = (0..n_frames)
        .into_par_iter()
        .map(|f| {
            (0..joints)
                .map(|j| {
                    let mut views = Vec::new();
                    for (cam, seq) in &cams {
                        let conf = seq
                            .confidences
                            .as_ref()
                            .map(|c| c[f][j])
                            .unwrap_or(1.0);
                        if conf < min_confidence {
                            continue;
                        }
                        let row = &seq.frames[f];
                        views.push(View {
                            camera: cam,
                            pixel: [row[j * 2], row[j * 2 + 1]],
                        });
                    }
                    triangulate_ransac(
                        &views,
                        iterations,
                        threshold_px,
                        point_seed(seed, f, j),
                    )
                    .ok()
                    .map(|r| r.point)
                })
                .collect()
        })
        .collect();

    // Per-joint gap fill.
    let mut frames = vec![vec![0.0; joints * 3]; n_frames];
    let mut confs = vec![vec![0.0; joints]; n_frames];
    for j in 0..joints {
        let valid: Vec<usize> = (0..n_frames).filter(|&f| solved[f][j].is_some()).collect();
        if valid.is_empty() {
            return Err(TriangulationError::JointFailed {
                joint: joint_name(j),
            });
        }
        for f in 0..n_frames {
            let p = match solved[f][j] {
                Some(p) => {
                    confs[f][j] = 1.0;
                    p
                }
                None => {
                    let next = valid.iter().find(|&&v| v > f);
                    let prev = valid.iter().rev().find(|&&v| v < f);
                    match (prev, next) {
                        (Some(&a), Some(&b)) => {
                            let w = (f - a) as f64 / (b - a) as f64;
                            let pa = solved[a][j].expect("valid index");
                            let pb = solved[b][j].expect("valid index");
                            [
                                pa[0] + w * (pb[0] - pa[0]),
                                pa[1] + w * (pb[1] - pa[1]),
                                pa[2] + w * (pb[2] - pa[2]),
                            ]
                        }
                        (Some(&a), None) => solved[a][j].expect("valid index"),
                        (None, Some(&b)) => solved[b][j].expect("valid index"),
                        (None, None) => unreachable!("valid is nonempty"),
                    }
                }
            };
            frames[f][j * 3..j * 3 + 3].copy_from_slice(&p);
        }
    }

    Ok(PoseSequence {
        frames,
        confidences: Some(confs),
        joints,
        channels: 3,
        fps: cams[0].1.fps,
        normalized: false,
    })
}
