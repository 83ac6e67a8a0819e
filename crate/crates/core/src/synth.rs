//! Physically consistent synthetic trials.
//!
//! A vertical center-of-mass trajectory is built from closed-form phase
//! profiles with continuous acceleration, a rigid 17-joint skeleton rides on
//! it, and forces are computed from the same analytic acceleration — so
//! `F = m(a + g)` holds to round-off, flight force is exactly zero, and every
//! pipeline stage downstream has ground truth to check against.

use crate::data::{
    CameraParameters, ForceSequence, ForceUnit, Movement, PoseSequence, Subject, Trial,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMovement {
    Jump,
    Squat,
    Standing,
}

impl SynthMovement {
    pub fn parse(s: &str) -> Option<SynthMovement> {
        match s.to_ascii_lowercase().as_str() {
            "jump" | "cmj" => Some(SynthMovement::Jump),
            "squat" => Some(SynthMovement::Squat),
            "standing" => Some(SynthMovement::Standing),
            _ => None,
        }
    }

    /// Movement label written into the trial (a jump with a countermovement
    /// crouch is a CMJ).
    pub fn label(self) -> &'static str {
        match self {
            SynthMovement::Jump => "CMJ",
            SynthMovement::Squat => "Squat",
            SynthMovement::Standing => "Standing",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub movement: SynthMovement,
    pub mass_kg: f64,
    pub duration_s: f64,
    pub fps_video: f64,
    pub fps_force: f64,
    pub n_cameras: usize,
    /// Std of Gaussian pixel noise added to 2D observations.
    pub noise_px: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            movement: SynthMovement::Jump,
            mass_kg: 80.0,
            duration_s: 2.0,
            fps_video: 50.0,
            fps_force: 600.0,
            n_cameras: 8,
            noise_px: 0.0,
            seed: 0,
        }
    }
}

/// Analytic state of the center of mass at one instant.
#[derive(Debug, Clone, Copy)]
pub struct ComState {
    pub y: f64,
    pub v: f64,
    pub a: f64,
    pub contact: bool,
}

/// Exact trajectory/contact record at the force rate, for oracle tests.
#[derive(Debug, Clone)]
pub struct SynthGroundTruth {
    pub com: Vec<ComState>,
    pub fps: f64,
}

// ── center-of-mass trajectories ──────────────────────────────────────────

const STAND_HEIGHT: f64 = 1.0;
const CROUCH_DEPTH: f64 = 0.18;
const SQUAT_DEPTH: f64 = 0.30;

/// Piecewise phase profile. Every phase stores its entry state and can
/// evaluate (y, v, a) at a local time offset with a continuous acceleration
/// across junctions, which keeps the force signal integrable with simple
/// quadrature in the tests.
enum Phase {
    Stand { y: f64 },
    /// a(τ) = -A sin(2πτ/T): starts and ends at rest, net drop `depth`.
    Crouch { y0: f64, amp: f64, omega: f64 },
    /// Quadratic acceleration pulse: a(0)=0 at the crouch bottom, a(T)=-g at
    /// takeoff so force fades to zero exactly at liftoff.
    Push { y0: f64, c1: f64, c2: f64 },
    Flight { y0: f64, v0: f64 },
    /// Quadratic pulse absorbing -v0: a(0)=-g at touchdown, a(T)=0.
    Land { y0: f64, v0: f64, c1: f64, c2: f64 },
    /// y = y0 - (depth/2)(1 - cos ωτ): smooth squat cycles.
    SquatCycle { y0: f64, depth: f64, omega: f64 },
}

impl Phase {
    fn eval(&self, tau: f64) -> ComState {
        match *self {
            Phase::Stand { y } => ComState {
                y,
                v: 0.0,
                a: 0.0,
                contact: true,
            },
            Phase::Crouch { y0, amp, omega } => {
                let (s, c) = ((omega * tau).sin(), (omega * tau).cos());
                ComState {
                    y: y0 - amp / omega * (tau - s / omega),
                    v: -amp / omega * (1.0 - c),
                    a: -amp * s,
                    contact: true,
                }
            }
            Phase::Push { y0, c1, c2 } => ComState {
                y: y0 + c1 * tau.powi(3) / 6.0 + c2 * tau.powi(4) / 12.0,
                v: c1 * tau * tau / 2.0 + c2 * tau.powi(3) / 3.0,
                a: c1 * tau + c2 * tau * tau,
                contact: true,
            },
            Phase::Flight { y0, v0 } => ComState {
                y: y0 + v0 * tau - 0.5 * GRAVITY * tau * tau,
                v: v0 - GRAVITY * tau,
                a: -GRAVITY,
                contact: false,
            },
            Phase::Land { y0, v0, c1, c2 } => ComState {
                y: y0 + v0 * tau - 0.5 * GRAVITY * tau * tau
                    + c1 * tau.powi(3) / 6.0
                    + c2 * tau.powi(4) / 12.0,
                v: v0 - GRAVITY * tau + c1 * tau * tau / 2.0 + c2 * tau.powi(3) / 3.0,
                a: -GRAVITY + c1 * tau + c2 * tau * tau,
                contact: true,
            },
            Phase::SquatCycle { y0, depth, omega } => {
                let (s, c) = ((omega * tau).sin(), (omega * tau).cos());
                ComState {
                    y: y0 - depth / 2.0 * (1.0 - c),
                    v: -depth / 2.0 * omega * s,
                    a: -depth / 2.0 * omega * omega * c,
                    contact: true,
                }
            }
        }
    }
}

/// Trajectory = ordered phases with their start times.
struct Trajectory {
    phases: Vec<(f64, f64, Phase)>, // (start, duration, profile)
}

impl Trajectory {
    fn eval(&self, t: f64) -> ComState {
        for (start, dur, phase) in &self.phases {
            if t < start + dur || (start + dur == self.end() && t <= start + dur) {
                return phase.eval((t - start).max(0.0));
            }
        }
        let (start, _, phase) = self.phases.last().expect("nonempty trajectory");
        phase.eval(t - start)
    }

    fn end(&self) -> f64 {
        let (s, d, _) = self.phases.last().expect("nonempty trajectory");
        s + d
    }
}

/// A jump: stand, countermovement crouch, push-off ending weightless,
/// ballistic flight, landing absorption, stand. Phase boundaries are chosen
/// on exact force-sample instants.
fn jump_trajectory(n_force: usize, fps_force: f64) -> Trajectory {
    let frac = |x: f64| ((n_force as f64 * x).round() as usize).max(1);
    let n_stand = frac(0.15);
    let n_crouch = frac(0.20);
    let n_push = frac(0.15);
    let n_flight = frac(0.25);
    let n_land = frac(0.10);
    let dt = 1.0 / fps_force;
    let (t_stand, t_crouch, t_push, t_flight, t_land) = (
        n_stand as f64 * dt,
        n_crouch as f64 * dt,
        n_push as f64 * dt,
        n_flight as f64 * dt,
        n_land as f64 * dt,
    );
    let v0 = GRAVITY * t_flight / 2.0;

    let mut phases = Vec::new();
    let mut t = 0.0;
    phases.push((t, t_stand, Phase::Stand { y: STAND_HEIGHT }));
    t += t_stand;

    let omega = 2.0 * std::f64::consts::PI / t_crouch;
    let amp = 2.0 * std::f64::consts::PI * CROUCH_DEPTH / (t_crouch * t_crouch);
    phases.push((t, t_crouch, Phase::Crouch { y0: STAND_HEIGHT, amp, omega }));
    t += t_crouch;
    let y_bottom = STAND_HEIGHT - CROUCH_DEPTH;

    // a(τ) = c1 τ + c2 τ² with a(T) = -g and ∫a = v0.
    let c2 = -6.0 * (v0 + GRAVITY * t_push / 2.0) / t_push.powi(3);
    let c1 = (-GRAVITY - c2 * t_push * t_push) / t_push;
    let push = Phase::Push { y0: y_bottom, c1, c2 };
    let takeoff = push.eval(t_push);
    phases.push((t, t_push, push));
    t += t_push;

    phases.push((t, t_flight, Phase::Flight { y0: takeoff.y, v0 }));
    t += t_flight;

    // Touchdown at the takeoff height with v = -v0; absorb to rest.
    let c2l = -6.0 * (v0 + GRAVITY * t_land / 2.0) / t_land.powi(3);
    let c1l = (GRAVITY - c2l * t_land * t_land) / t_land;
    let land = Phase::Land { y0: takeoff.y, v0: -v0, c1: c1l, c2: c2l };
    let rest = land.eval(t_land);
    phases.push((t, t_land, land));
    t += t_land;

    let n_used = n_stand + n_crouch + n_push + n_flight + n_land;
    let t_post = (n_force.saturating_sub(n_used) as f64) * dt + dt;
    phases.push((t, t_post, Phase::Stand { y: rest.y }));
    Trajectory { phases }
}

fn squat_trajectory(duration: f64) -> Trajectory {
    let cycles = (duration / 2.0).round().max(1.0);
    let omega = 2.0 * std::f64::consts::PI * cycles / duration;
    Trajectory {
        phases: vec![(
            0.0,
            duration + 1.0, // open-ended; evaluated only on [0, duration]
            Phase::SquatCycle {
                y0: STAND_HEIGHT,
                depth: SQUAT_DEPTH,
                omega,
            },
        )],
    }
}

fn standing_trajectory(duration: f64) -> Trajectory {
    Trajectory {
        phases: vec![(0.0, duration + 1.0, Phase::Stand { y: STAND_HEIGHT })],
    }
}

// ── skeleton ─────────────────────────────────────────────────────────────

/// COCO-17 joint offsets from the center of mass, meters: (lateral x with
/// left = +x, vertical y, depth z toward the subject's front).
const JOINT_OFFSETS: [[f64; 3]; 17] = [
    [0.00, 0.72, 0.06],  // nose
    [0.03, 0.75, 0.05],  // left_eye
    [-0.03, 0.75, 0.05], // right_eye
    [0.07, 0.73, 0.00],  // left_ear
    [-0.07, 0.73, 0.00], // right_ear
    [0.18, 0.55, 0.00],  // left_shoulder
    [-0.18, 0.55, 0.00], // right_shoulder
    [0.25, 0.30, 0.02],  // left_elbow
    [-0.25, 0.30, 0.02], // right_elbow
    [0.28, 0.05, 0.04],  // left_wrist
    [-0.28, 0.05, 0.04], // right_wrist
    [0.10, 0.00, 0.00],  // left_hip
    [-0.10, 0.00, 0.00], // right_hip
    [0.11, -0.45, 0.02], // left_knee
    [-0.11, -0.45, 0.02],// right_knee
    [0.12, -0.90, 0.00], // left_ankle
    [-0.12, -0.90, 0.00],// right_ankle
];

const ARM_JOINTS: [usize; 4] = [7, 8, 9, 10];
const ARM_SWING_M: f64 = 0.04;
const ARM_SWING_HZ: f64 = 0.8;

/// World-space joint positions at time `t` for a COM height `com_y`.
/// The skeleton is rigid apart from a symmetric arm swing in depth.
pub fn skeleton_at(com_y: f64, t: f64) -> Vec<[f64; 3]> {
    let swing = ARM_SWING_M * (2.0 * std::f64::consts::PI * ARM_SWING_HZ * t).sin();
    JOINT_OFFSETS
        .iter()
        .enumerate()
        .map(|(j, off)| {
            let dz = if ARM_JOINTS.contains(&j) { swing } else { 0.0 };
            [off[0], com_y + off[1], off[2] + dz]
        })
        .collect()
}

// ── cameras ──────────────────────────────────────────────────────────────

const RING_RADIUS: f64 = 3.5;
const RING_HEIGHT: f64 = 1.4;
const TARGET: [f64; 3] = [0.0, 1.0, 0.0];
const FOCAL: f64 = 1100.0;
const IMAGE_W: f64 = 1920.0;
const IMAGE_H: f64 = 1080.0;

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// A camera on the ring looking at the subject. The frame is (right, down,
/// forward); in a y-up world an upright camera makes this an improper
/// (det = -1) orthonormal basis, which projection and triangulation are
/// indifferent to.
pub fn ring_camera(index: usize, total: usize) -> CameraParameters {
    let angle = 2.0 * std::f64::consts::PI * index as f64 / total.max(1) as f64;
    let pos = [RING_RADIUS * angle.sin(), RING_HEIGHT, RING_RADIUS * angle.cos()];
    let forward = norm3(sub3(TARGET, pos));
    let right = norm3(cross3([0.0, 1.0, 0.0], forward));
    let down = cross3(right, forward);
    let r = [right, down, forward];
    let t = [
        -(r[0][0] * pos[0] + r[0][1] * pos[1] + r[0][2] * pos[2]),
        -(r[1][0] * pos[0] + r[1][1] * pos[1] + r[1][2] * pos[2]),
        -(r[2][0] * pos[0] + r[2][1] * pos[1] + r[2][2] * pos[2]),
    ];
    CameraParameters {
        id: format!("cam{index}"),
        k: [
            [FOCAL, 0.0, IMAGE_W / 2.0],
            [0.0, FOCAL, IMAGE_H / 2.0],
            [0.0, 0.0, 1.0],
        ],
        r,
        t,
    }
}

fn project_exact(p: [f64; 3], cam: &CameraParameters) -> [f64; 2] {
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = cam.r[i][0] * p[0] + cam.r[i][1] * p[1] + cam.r[i][2] * p[2] + cam.t[i];
    }
    let u = (cam.k[0][0] * c[0] + cam.k[0][1] * c[1] + cam.k[0][2] * c[2]) / c[2];
    let v = (cam.k[1][1] * c[1] + cam.k[1][2] * c[2]) / c[2];
    [u, v]
}

// ── generation ───────────────────────────────────────────────────────────

/// Generate a trial plus its exact ground-truth record.
pub fn generate_with_ground_truth(spec: &SynthSpec) -> (Trial, SynthGroundTruth) {
    let n_video = (spec.fps_video * spec.duration_s).round().max(1.0) as usize;
    let block = (spec.fps_force / spec.fps_video).round() as usize;
    let n_force = n_video * block;
    let duration = n_video as f64 / spec.fps_video;

    let traj = match spec.movement {
        SynthMovement::Jump => jump_trajectory(n_force, spec.fps_force),
        SynthMovement::Squat => squat_trajectory(duration),
        SynthMovement::Standing => standing_trajectory(duration),
    };

    // Forces at the plate rate, straight from the analytic acceleration.
    let mut com = Vec::with_capacity(n_force);
    let mut force_frames = Vec::with_capacity(n_force);
    for i in 0..n_force {
        let t = i as f64 / spec.fps_force;
        let s = traj.eval(t);
        let fy = if s.contact {
            spec.mass_kg * (s.a + GRAVITY)
        } else {
            0.0
        };
        force_frames.push([0.0, fy / 2.0, 0.0, 0.0, fy / 2.0, 0.0]);
        com.push(s);
    }

    // Exact 3D poses at the video rate.
    let mut frames3d = Vec::with_capacity(n_video);
    for i in 0..n_video {
        let t = i as f64 / spec.fps_video;
        let s = traj.eval(t);
        let joints = skeleton_at(s.y, t);
        frames3d.push(joints.iter().flat_map(|j| j.iter().copied()).collect::<Vec<f64>>());
    }

    // Projected 2D views with optional Gaussian pixel noise, deterministic in
    // (seed, camera order, frame order, joint order).
    let cameras: Vec<CameraParameters> =
        (0..spec.n_cameras).map(|i| ring_camera(i, spec.n_cameras)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut poses_2d = BTreeMap::new();
    let mut image_size = BTreeMap::new();
    for cam in &cameras {
        let mut frames = Vec::with_capacity(n_video);
        let mut confs = Vec::with_capacity(n_video);
        for frame in &frames3d {
            let mut row = Vec::with_capacity(17 * 2);
            for j in 0..17 {
                let p = [frame[j * 3], frame[j * 3 + 1], frame[j * 3 + 2]];
                let [mut u, mut v] = project_exact(p, cam);
                if spec.noise_px > 0.0 {
                    u += spec.noise_px * gaussian(&mut rng);
                    v += spec.noise_px * gaussian(&mut rng);
                }
                row.push(u);
                row.push(v);
            }
            frames.push(row);
            confs.push(vec![1.0; 17]);
        }
        poses_2d.insert(
            cam.id.clone(),
            PoseSequence {
                frames,
                confidences: Some(confs),
                joints: 17,
                channels: 2,
                fps: spec.fps_video,
                normalized: false,
            },
        );
        image_size.insert(cam.id.clone(), [IMAGE_W, IMAGE_H]);
    }

    let movement = Movement::parse(spec.movement.label());
    let trial = Trial {
        id: format!("synth-{}-{}", spec.movement.label(), spec.seed),
        subject: Subject {
            id: format!("subject-{}", spec.seed),
            mass_kg: spec.mass_kg,
        },
        movement,
        cameras,
        image_size,
        poses_2d,
        poses_3d: Some(PoseSequence {
            frames: frames3d,
            confidences: None,
            joints: 17,
            channels: 3,
            fps: spec.fps_video,
            normalized: false,
        }),
        forces: ForceSequence {
            frames: force_frames,
            units: ForceUnit::Newtons,
            fps: spec.fps_force,
        },
        fps_video: spec.fps_video,
        fps_force: spec.fps_force,
    };
    (
        trial,
        SynthGroundTruth {
            com,
            fps: spec.fps_force,
        },
    )
}

pub fn generate_trial(spec: &SynthSpec) -> Trial {
    generate_with_ground_truth(spec).0
}

/// Box-Muller standard normal; `u1` is pulled off (0, 1].
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Shift every 2D observation of one camera by a constant pixel offset
/// (applied to both coordinates). Other views are untouched.
pub fn corrupt_view(trial: &Trial, camera_id: &str, offset_px: f64) -> Result<Trial, String> {
    if !trial.poses_2d.contains_key(camera_id) {
        return Err(format!("unknown camera id {camera_id}"));
    }
    let mut out = trial.clone();
    let seq = out.poses_2d.get_mut(camera_id).expect("checked above");
    for frame in &mut seq.frames {
        for v in frame.iter_mut() {
            *v += offset_px;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{align_trial, load_trial, save_trial};

    #[test]
    fn standing_forces_are_static_weight() {
        let spec = SynthSpec {
            movement: SynthMovement::Standing,
            mass_kg: 88.37,
            duration_s: 1.0,
            ..SynthSpec::default()
        };
        let trial = generate_trial(&spec);
        for f in &trial.forces.frames {
            let net = f[1] + f[4];
            assert!((net - 88.37 * GRAVITY).abs() < 1e-9, "net vertical {net}");
            assert_eq!(f[1], f[4]); // equal plate split
            assert_eq!([f[0], f[2], f[3], f[5]], [0.0; 4]); // no shear
        }
    }

    #[test]
    fn flight_frames_have_exactly_zero_force() {
        let spec = SynthSpec::default(); // jump
        let (trial, truth) = generate_with_ground_truth(&spec);
        let n_flight = truth.com.iter().filter(|s| !s.contact).count();
        assert!(n_flight > 0, "jump must leave the ground");
        for (f, s) in trial.forces.frames.iter().zip(&truth.com) {
            if !s.contact {
                assert_eq!(*f, [0.0; 6]);
            }
        }
    }

    #[test]
    fn physics_closure_at_force_rate() {
        for movement in [SynthMovement::Jump, SynthMovement::Squat, SynthMovement::Standing] {
            let spec = SynthSpec {
                movement,
                ..SynthSpec::default()
            };
            let (trial, truth) = generate_with_ground_truth(&spec);
            for (f, s) in trial.forces.frames.iter().zip(&truth.com) {
                if s.contact {
                    let per_kg = (f[1] + f[4]) / spec.mass_kg;
                    let residual = (per_kg - GRAVITY - s.a).abs();
                    assert!(residual < 1e-6, "{movement:?}: residual {residual}");
                }
            }
        }
    }

    /// Trapezoid-integrate v from force samples, then Simpson-refine: the
    /// independent check that the emitted force really is m·(a + g) for the
    /// trajectory the poses ride on.
    #[test]
    fn double_integration_recovers_com() {
        for movement in [SynthMovement::Jump, SynthMovement::Squat] {
            let spec = SynthSpec {
                movement,
                ..SynthSpec::default()
            };
            let (trial, truth) = generate_with_ground_truth(&spec);
            let dt = 1.0 / spec.fps_force;
            let a: Vec<f64> = trial
                .forces
                .frames
                .iter()
                .map(|f| (f[1] + f[4]) / spec.mass_kg - GRAVITY)
                .collect();
            let n = a.len();
            let mut v = vec![0.0; n];
            for i in 1..n {
                v[i] = v[i - 1] + dt / 2.0 * (a[i - 1] + a[i]);
            }
            // Simpson refinement on even indices (exact for the piecewise-
            // quadratic acceleration away from phase junctions), then odd
            // indices by local trapezoid from the refined neighbor.
            for i in (2..n).step_by(2) {
                v[i] = v[i - 2] + dt / 3.0 * (a[i - 2] + 4.0 * a[i - 1] + a[i]);
            }
            for i in (1..n).step_by(2) {
                v[i] = v[i - 1] + dt / 2.0 * (a[i - 1] + a[i]);
            }
            let mut y = vec![truth.com[0].y; n];
            for i in 1..n {
                y[i] = y[i - 1] + dt / 2.0 * (v[i - 1] + v[i]);
            }
            let worst = y
                .iter()
                .zip(&truth.com)
                .map(|(yi, s)| (yi - s.y).abs())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-3, "{movement:?}: max COM drift {worst} m");
        }
    }

    #[test]
    fn generated_trials_load_and_align() {
        let dir = tempfile::tempdir().unwrap();
        for movement in [SynthMovement::Jump, SynthMovement::Squat, SynthMovement::Standing] {
            let spec = SynthSpec {
                movement,
                n_cameras: 3,
                noise_px: 1.5,
                seed: 7,
                ..SynthSpec::default()
            };
            let trial = generate_trial(&spec);
            let path = dir.path().join(format!("{}.json", trial.id));
            save_trial(&trial, &path).unwrap();
            let loaded = load_trial(&path).unwrap();
            assert_eq!(loaded.cameras.len(), 3);
            let aligned = align_trial(&loaded).unwrap();
            let n = aligned.forces.frames.len();
            assert_eq!(n, aligned.poses_2d["cam0"].frames.len());
            assert_eq!(n, aligned.poses_3d.as_ref().unwrap().frames.len());
            assert_eq!(n, 100);
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let spec = SynthSpec {
            noise_px: 2.0,
            seed: 42,
            ..SynthSpec::default()
        };
        let a = generate_trial(&spec);
        let b = generate_trial(&spec);
        assert_eq!(a, b);
        let c = generate_trial(&SynthSpec { seed: 43, ..spec });
        assert_ne!(a.poses_2d, c.poses_2d);
    }

    #[test]
    fn corrupt_view_touches_one_camera_only() {
        let trial = generate_trial(&SynthSpec::default());
        assert!(corrupt_view(&trial, "nope", 50.0).is_err());
        let bad = corrupt_view(&trial, "cam1", 50.0).unwrap();
        assert_eq!(bad.poses_2d["cam0"], trial.poses_2d["cam0"]);
        let orig = &trial.poses_2d["cam1"].frames[0];
        let corr = &bad.poses_2d["cam1"].frames[0];
        for (o, c) in orig.iter().zip(corr) {
            assert_eq!(*c, *o + 50.0);
        }
        // Offset 0 is the identity.
        let same = corrupt_view(&trial, "cam1", 0.0).unwrap();
        assert_eq!(same, trial);
    }

    #[test]
    fn ring_cameras_are_orthonormal_and_see_the_subject() {
        for i in 0..8 {
            let cam = ring_camera(i, 8);
            cam.validate().unwrap();
            // Joint projections land inside the image.
            for j in skeleton_at(STAND_HEIGHT, 0.0) {
                let [u, v] = project_exact(j, &cam);
                assert!((0.0..IMAGE_W).contains(&u), "cam{i}: u = {u}");
                assert!((0.0..IMAGE_H).contains(&v), "cam{i}: v = {v}");
            }
        }
    }
}
