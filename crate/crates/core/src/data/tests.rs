use super::trial::COCO_JOINT_COUNT;
use super::*;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn identity_camera(id: &str) -> CameraParameters {
    CameraParameters {
        id: id.to_string(),
        k: [[1000.0, 0.0, 960.0], [0.0, 1000.0, 540.0], [0.0, 0.0, 1.0]],
        r: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        t: [0.0, 0.0, 4.0],
    }
}

/// A trial with n aligned frames, already in N/kg at 50 Hz, and a symmetric
/// standing pose so flip fixed-point tests have something to bite on.
fn aligned_trial(n: usize) -> Trial {
    // Symmetric 2D pose: left/right partners mirror in x around 0, same y.
    let mut frame = vec![0.0; COCO_JOINT_COUNT * 2];
    frame[0] = 0.0; // nose x
    frame[1] = 0.5; // nose y
    for (k, &(l, r)) in COCO_LR_PAIRS.iter().enumerate() {
        let (x, y) = (0.1 * (k + 1) as f64, 0.05 * (k + 1) as f64);
        frame[l * 2] = x;
        frame[l * 2 + 1] = y;
        frame[r * 2] = -x;
        frame[r * 2 + 1] = y;
    }
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let mut f = frame.clone();
        f[1] += i as f64 * 1e-3; // small drift so frames are distinguishable
        frames.push(f);
    }
    let pose3d: Vec<Vec<f64>> = frames
        .iter()
        .map(|f| {
            f.chunks(2)
                .flat_map(|xy| [xy[0], xy[1], 0.3])
                .collect::<Vec<f64>>()
        })
        .collect();
    Trial {
        id: "t0".to_string(),
        subject: Subject {
            id: "s0".to_string(),
            mass_kg: 80.0,
        },
        movement: Movement::parse("Squat"),
        cameras: vec![identity_camera("cam0")],
        image_size: BTreeMap::from([("cam0".to_string(), [1920.0, 1080.0])]),
        poses_2d: BTreeMap::from([(
            "cam0".to_string(),
            PoseSequence {
                frames: frames.clone(),
                confidences: Some(vec![vec![1.0; COCO_JOINT_COUNT]; n]),
                joints: COCO_JOINT_COUNT,
                channels: 2,
                fps: 50.0,
                normalized: false,
            },
        )]),
        poses_3d: Some(PoseSequence {
            frames: pose3d,
            confidences: None,
            joints: COCO_JOINT_COUNT,
            channels: 3,
            fps: 50.0,
            normalized: false,
        }),
        forces: ForceSequence {
            frames: (0..n).map(|i| [0.1, 9.81, 0.2, -0.1, 9.81, -0.2].map(|v| v + i as f64 * 1e-4)).collect(),
            units: ForceUnit::NewtonsPerKg,
            fps: 50.0,
        },
        fps_video: 50.0,
        fps_force: 600.0,
    }
}

#[test]
fn minimal_trial_round_trips_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mini.json");
    let json = serde_json::json!({
        "subject": {"id": "s1", "mass_kg": 70.5},
        "movement": "CMJ",
        "fps_video": 50.0, "fps_force": 600.0,
        "cameras": [{"id": "cam0",
            "K": [[1000.0, 0.0, 960.0],[0.0, 1000.0, 540.0],[0.0, 0.0, 1.0]],
            "R": [[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],
            "t": [0.0, 0.0, 4.0]}],
        "image_size": {"cam0": [1920.0, 1080.0]},
        "poses_2d": {"cam0": (0..3).map(|f| (0..17).map(|j|
            [100.0 + j as f64, 200.0 + f as f64, 0.9]).collect::<Vec<_>>()).collect::<Vec<_>>()},
        "forces_N": (0..36).map(|i| [i as f64, 700.0, 0.0, 0.0, 690.0, 0.0]).collect::<Vec<_>>(),
    });
    std::fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();

    let trial = load_trial(&path).unwrap();
    assert_eq!(trial.id, "mini");
    assert_eq!(trial.subject.mass_kg, 70.5);
    assert_eq!(trial.forces.units, ForceUnit::Newtons);

    let path2 = dir.path().join("mini2.json");
    save_trial(&trial, &path2).unwrap();
    let mut again = load_trial(&path2).unwrap();
    again.id = trial.id.clone(); // ids come from file stems
    assert_eq!(trial, again);
}

#[test]
fn five_channel_forces_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let json = serde_json::json!({
        "subject": {"id": "s1", "mass_kg": 70.0},
        "movement": "Squat",
        "fps_video": 50.0, "fps_force": 600.0,
        "cameras": [], "image_size": {}, "poses_2d": {},
        "forces_N": [[1.0, 2.0, 3.0, 4.0, 5.0]],
    });
    std::fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
    let err = load_trial(&path).unwrap_err().to_string();
    assert!(err.contains("forces") && err.contains("6 channels"), "{err}");
}

#[test]
fn non_orthonormal_rotation_rejected() {
    let mut cam = identity_camera("c");
    cam.r[0][0] = 1.5;
    let err = cam.validate().unwrap_err().to_string();
    assert!(err.contains("orthonormal"), "{err}");
}

#[test]
fn resample_block_mean() {
    let f = ForceSequence {
        frames: (0..100).map(|i| [i as f64; 6]).collect(),
        units: ForceUnit::Newtons,
        fps: 600.0,
    };
    let out = resample_forces(&f, 50.0).unwrap();
    // 100 / 12 truncates to 8 output frames.
    assert_eq!(out.frames.len(), 8);
    // First block is [0..11] → mean 5.5 on every channel.
    assert_eq!(out.frames[0], [5.5; 6]);
    assert_eq!(out.fps, 50.0);

    let constant = ForceSequence {
        frames: vec![[3.25; 6]; 24],
        units: ForceUnit::Newtons,
        fps: 600.0,
    };
    let out = resample_forces(&constant, 50.0).unwrap();
    assert_eq!(out.frames, vec![[3.25; 6]; 2]);

    let bad = ForceSequence {
        frames: vec![[0.0; 6]; 10],
        units: ForceUnit::Newtons,
        fps: 610.0,
    };
    assert!(resample_forces(&bad, 50.0).is_err());
}

#[test]
fn force_normalization_and_inverse() {
    let f = ForceSequence {
        frames: vec![[882.0, 0.0, 0.0, 0.0, 0.0, 0.0]],
        units: ForceUnit::Newtons,
        fps: 50.0,
    };
    let n = normalize_forces(&f, 88.2).unwrap();
    assert!((n.frames[0][0] - 10.0).abs() < 1e-12);
    assert_eq!(n.units, ForceUnit::NewtonsPerKg);
    // Wrong-direction conversions are unit errors.
    assert!(normalize_forces(&n, 88.2).is_err());
    assert!(denormalize_forces(&f, 88.2).is_err());
}

proptest! {
    /// Round-tripping is bitwise for power-of-two masses and within 1 ulp
    /// in general.
    #[test]
    fn normalize_denormalize_inverse(v in -2000.0f64..2000.0, mass in 1u32..200) {
        let f = ForceSequence {
            frames: vec![[v; 6]],
            units: ForceUnit::Newtons,
            fps: 50.0,
        };
        let pow2 = 64.0;
        let round = denormalize_forces(&normalize_forces(&f, pow2).unwrap(), pow2).unwrap();
        prop_assert_eq!(round.frames[0][0].to_bits(), v.to_bits());

        let m = mass as f64 + 0.37;
        let round = denormalize_forces(&normalize_forces(&f, m).unwrap(), m).unwrap();
        let got = round.frames[0][0];
        let ulp = (got.to_bits() as i64 - v.to_bits() as i64).abs();
        prop_assert!(ulp <= 1, "off by {ulp} ulp: {got} vs {v}");
    }
}

#[test]
fn keypoint_normalization_maps_corners_and_center() {
    let seq = PoseSequence {
        frames: vec![{
            let mut f = vec![0.0; COCO_JOINT_COUNT * 2];
            f[0] = 960.0; // joint 0 at image center
            f[1] = 540.0;
            f[2] = 0.0; // joint 1 at origin corner
            f[3] = 0.0;
            f[4] = 1920.0; // joint 2 at far corner
            f[5] = 1080.0;
            f
        }],
        confidences: None,
        joints: COCO_JOINT_COUNT,
        channels: 2,
        fps: 50.0,
        normalized: false,
    };
    let out = normalize_keypoints_2d(&seq, 1920.0, 1080.0).unwrap();
    assert_eq!(&out.frames[0][0..6], &[0.0, 0.0, -1.0, -1.0, 1.0, 1.0]);
    assert!(out.normalized);
    // Applying twice is a guarded error, not silent corruption.
    assert!(matches!(
        normalize_keypoints_2d(&out, 1920.0, 1080.0),
        Err(DataError::AlreadyNormalized)
    ));
    assert!(normalize_keypoints_2d(&seq, 0.0, 1080.0).is_err());
}

#[test]
fn window_count_equals_frame_count_for_all_receptive_fields() {
    let trial = aligned_trial(100);
    for f in [9usize, 27, 43, 81] {
        let windows =
            make_windows(&trial, f, &InputSource::Camera("cam0".to_string())).unwrap();
        assert_eq!(windows.len(), 100, "f = {f}");
        for (i, w) in windows.iter().enumerate() {
            assert_eq!(w.meta.center_frame, i);
            assert_eq!(w.input.len(), f * COCO_JOINT_COUNT * 2);
            assert_eq!(w.force_target, trial.forces.frames[i]);
        }
    }
}

#[test]
fn boundary_windows_replicate_edges() {
    let trial = aligned_trial(100);
    let windows = make_windows(&trial, 9, &InputSource::Camera("cam0".to_string())).unwrap();
    let width = COCO_JOINT_COUNT * 2;
    let seq = &trial.poses_2d["cam0"];
    // First window: frame 0 four times, then frames 0..=4.
    let w0 = &windows[0];
    for slot in 0..5 {
        assert_eq!(&w0.input[slot * width..(slot + 1) * width], &seq.frames[0][..]);
    }
    for (slot, frame) in (5..9).zip(1..5) {
        assert_eq!(
            &w0.input[slot * width..(slot + 1) * width],
            &seq.frames[frame][..]
        );
    }
    // Last window: frames 95.. then edge-held at 99.
    let w_last = &windows[99];
    for (slot, frame) in (0..5).zip(95..100) {
        assert_eq!(
            &w_last.input[slot * width..(slot + 1) * width],
            &seq.frames[frame][..]
        );
    }
    for slot in 5..9 {
        assert_eq!(
            &w_last.input[slot * width..(slot + 1) * width],
            &seq.frames[99][..]
        );
    }
    // An f=81 window centers on index 40 of the window.
    let windows81 = make_windows(&trial, 81, &InputSource::Camera("cam0".to_string())).unwrap();
    let w = &windows81[50];
    assert_eq!(
        &w.input[40 * width..41 * width],
        &seq.frames[50][..],
        "center slot ⌊81/2⌋ = 40 must hold the center frame"
    );
}

#[test]
fn windows_from_3d_source() {
    let trial = aligned_trial(20);
    let windows = make_windows(&trial, 9, &InputSource::Pose3d).unwrap();
    assert_eq!(windows.len(), 20);
    assert_eq!(windows[0].channels, 3);
    assert_eq!(windows[0].meta.camera, "3d");
    // Unknown camera and wrong units are caught.
    assert!(matches!(
        make_windows(&trial, 9, &InputSource::Camera("nope".to_string())),
        Err(DataError::UnknownCamera(_))
    ));
    let mut unaligned = trial.clone();
    unaligned.forces.units = ForceUnit::Newtons;
    assert!(make_windows(&unaligned, 9, &InputSource::Pose3d).is_err());
}

#[test]
fn flip_is_an_involution() {
    let trial = aligned_trial(10);
    let mut windows = make_windows(&trial, 9, &InputSource::Camera("cam0".to_string())).unwrap();
    // Make the force target asymmetric so the plate swap is observable.
    windows[3].force_target = [1.5, 9.0, -0.5, -2.5, 10.0, 0.75];
    let s = &windows[3];
    let once = flip_augment(s).unwrap();
    assert_ne!(once.force_target, s.force_target);
    let twice = flip_augment(&once).unwrap();
    assert_eq!(&twice, s);

    // Plate channels swap and shear negates.
    assert_eq!(once.force_target, [2.5, 10.0, 0.75, -1.5, 9.0, -0.5]);
}

#[test]
fn flip_swaps_ankles_with_negated_x() {
    let trial = aligned_trial(10);
    let windows = make_windows(&trial, 9, &InputSource::Camera("cam0".to_string())).unwrap();
    let s = &windows[5];
    let flipped = flip_augment(s).unwrap();
    let width = COCO_JOINT_COUNT * 2;
    for slot in 0..s.f {
        let orig = &s.input[slot * width..(slot + 1) * width];
        let flip = &flipped.input[slot * width..(slot + 1) * width];
        assert_eq!(flip[LEFT_ANKLE * 2], -orig[RIGHT_ANKLE * 2]);
        assert_eq!(flip[LEFT_ANKLE * 2 + 1], orig[RIGHT_ANKLE * 2 + 1]);
        assert_eq!(flip[RIGHT_ANKLE * 2], -orig[LEFT_ANKLE * 2]);
    }
}

#[test]
fn symmetric_standing_pose_is_flip_fixed_point() {
    // Symmetric pose, equal plates, no shear: flipping changes nothing
    // except the sign convention on x, which the mirrored joints absorb.
    let trial = aligned_trial(5);
    let mut windows = make_windows(&trial, 3, &InputSource::Camera("cam0".to_string())).unwrap();
    windows[2].force_target = [0.0, 9.81, 0.1, 0.0, 9.81, 0.1];
    windows[2].pose3d_target = None;
    let s = &windows[2];
    let flipped = flip_augment(s).unwrap();
    assert_eq!(flipped.input, s.input);
    assert_eq!(flipped.force_target, s.force_target);
}

#[test]
fn movement_labels_parse_sides_and_flip() {
    let m = Movement::parse("SLS:left");
    assert_eq!(m.class, MovementClass::Sls);
    assert_eq!(m.side, Some(Side::Left));
    assert_eq!(m.flipped().label(), "SLS:right");
    assert_eq!(m.class_label(), "SLS");
    let other = Movement::parse("Standing");
    assert_eq!(other.class, MovementClass::Other("Standing".to_string()));
    assert_eq!(other.flipped(), other);
}

#[test]
fn align_trial_matches_pose_and_force_counts() {
    let mut trial = aligned_trial(20);
    // Rebuild as a raw trial: forces in N at 600 Hz, 246 frames (partial tail).
    trial.forces = ForceSequence {
        frames: vec![[80.0, 800.0, 8.0, -80.0, 784.8, -8.0]; 246],
        units: ForceUnit::Newtons,
        fps: 600.0,
    };
    let aligned = align_trial(&trial).unwrap();
    assert_eq!(aligned.forces.frames.len(), 20);
    assert_eq!(aligned.forces.units, ForceUnit::NewtonsPerKg);
    assert_eq!(aligned.poses_2d["cam0"].frames.len(), 20);
    assert_eq!(aligned.poses_3d.as_ref().unwrap().frames.len(), 20);
    // 800 N / 80 kg = 10 N/kg.
    assert!((aligned.forces.frames[0][1] - 10.0).abs() < 1e-12);
}
