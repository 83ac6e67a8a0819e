//! Command-line harness tying the pipeline together: synthetic data
//! generation, multi-view triangulation, training, evaluation, baselines,
//! hyperparameter sweeps and SVG plotting.
//!
//! Every command resolves one flat config (defaults ← config file ← CLI
//! flags), echoes it next to its outputs, and is bit-reproducible from that
//! echo under the same seed.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use grf_core::config::{RunConfig, SweepAxis};
use grf_core::data::{align_trial, denormalize_forces, load_trial, save_trial, Trial};
use grf_core::model::{load_checkpoint, save_checkpoint, Checkpoint};
use grf_core::plot::{parse_curve_csv, render_svg, write_curve_csv, PanelSpec};
use grf_core::synth::{generate_trial, SynthMovement};
use grf_core::train::baselines::{newton_sequence, ExemplarBaseline};
use grf_core::train::eval::{
    evaluate, score_sequence, video_curves, zero_shot, EvalReport, SequenceScores, VideoReport,
};
use grf_core::train::{
    audit_no_leakage, leave_one_out_folds, split_trials, train, SplitMode, Strategy, TrainOutcome,
    WindowSource,
};
use grf_core::triangulation::triangulate_sequence;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "grf",
    about = "Ground-reaction-force regression from pose keypoints",
    version
)]
struct Cli {
    /// Config file; defaults apply underneath, CLI flags override on top.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for synthesis, shuffling and initialization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel-safe stages (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Root directory for run outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on the number of trials generated or loaded.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic trials with physics-exact force ground truth.
    Synth {
        /// Directory the trial JSON files are written to.
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Restrict generation to one movement (cmj|squat|standing).
        #[arg(long)]
        movement: Option<String>,
        /// Gaussian pixel noise added to every 2D keypoint.
        #[arg(long)]
        noise_px: Option<f64>,
        /// Number of ring cameras per trial.
        #[arg(long)]
        cameras: Option<usize>,
        /// Trial duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Number of trials to generate (--trials overrides).
        #[arg(long)]
        count: Option<usize>,
        /// Keep the generator's exact 3D poses instead of leaving them to
        /// the triangulation step.
        #[arg(long)]
        exact_poses: bool,
    },
    /// Fill trials' 3D poses by robust multi-view triangulation.
    Triangulate {
        /// Directory of input trial JSON files.
        #[arg(long)]
        input: PathBuf,
        /// Directory the augmented trials are written to.
        #[arg(long)]
        output: PathBuf,
        /// Re-triangulate trials that already carry 3D poses.
        #[arg(long)]
        overwrite: bool,
        /// RANSAC iteration budget per point.
        #[arg(long)]
        iterations: Option<usize>,
        /// RANSAC inlier reprojection threshold in pixels.
        #[arg(long)]
        threshold_px: Option<f64>,
    },
    /// Train a model; writes a checkpoint and the loss history.
    Train {
        /// Directory of trial JSON files (falls back to [dataset] dir).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Run directory name under the output root.
        #[arg(long)]
        name: Option<String>,
        /// Training strategy: scratch|pretrain|mtl.
        #[arg(long)]
        strategy: Option<String>,
        /// Multi-task pose-loss weight; implies --strategy mtl.
        #[arg(long)]
        alpha: Option<f64>,
        /// Input window length in frames (receptive field).
        #[arg(long, alias = "f")]
        frames: Option<usize>,
        /// Training epochs.
        #[arg(long)]
        epochs: Option<usize>,
        /// Adam learning rate.
        #[arg(long)]
        lr: Option<f64>,
        /// Minibatch size.
        #[arg(long)]
        batch_size: Option<usize>,
        /// Number of ascending thresholds in the gated loss (1 = plain MSE).
        #[arg(long)]
        gate_terms: Option<usize>,
        /// Input stream: all_cameras|pose3d.
        #[arg(long)]
        source: Option<String>,
    },
    /// Evaluate a checkpoint; writes report.json and net-force curve CSVs.
    Eval {
        /// Checkpoint produced by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Directory of trial JSON files (falls back to [dataset] dir).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Run directory name under the output root.
        #[arg(long)]
        name: Option<String>,
    },
    /// Leave-one-movement-out protocol: train and evaluate once per class.
    Zeroshot {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Score a non-learned reference predictor.
    Baseline {
        /// Baseline kind: newton|exemplar.
        #[arg(long)]
        kind: String,
        /// Smoothing window (frames) for the newton baseline.
        #[arg(long, default_value_t = 5)]
        smooth: usize,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Train + evaluate across one swept axis; writes a table CSV.
    Sweep {
        /// Sweep axis: receptive_field|gate_terms (falls back to [sweep]).
        #[arg(long)]
        axis: Option<String>,
        /// Strategies to cross with the axis, comma separated.
        #[arg(long)]
        strategies: Option<String>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    /// Render curve CSVs as SVG comparisons.
    Plot {
        /// Curve CSV files or directories containing them.
        #[arg(long, required = true, num_args = 1..)]
        curves: Vec<PathBuf>,
        /// Second directory of curve CSVs to render side by side by filename.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.reseed(seed);
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(out) = cli.out {
        cfg.out_root = out;
    }
    if let Some(trials) = cli.trials {
        cfg.trial_limit = Some(trials);
    }
    if cfg.jobs > 0 {
        // Best effort: the pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global();
    }

    match cli.command {
        Command::Synth {
            dir,
            movement,
            noise_px,
            cameras,
            duration,
            count,
            exact_poses,
        } => cmd_synth(cfg, dir, movement, noise_px, cameras, duration, count, exact_poses),
        Command::Triangulate {
            input,
            output,
            overwrite,
            iterations,
            threshold_px,
        } => cmd_triangulate(cfg, input, output, overwrite, iterations, threshold_px),
        Command::Train {
            data,
            name,
            strategy,
            alpha,
            frames,
            epochs,
            lr,
            batch_size,
            gate_terms,
            source,
        } => {
            apply_train_flags(
                &mut cfg, strategy, alpha, frames, epochs, lr, batch_size, gate_terms, source,
            )?;
            cmd_train(cfg, data, name)
        }
        Command::Eval {
            checkpoint,
            data,
            name,
        } => cmd_eval(cfg, checkpoint, data, name),
        Command::Zeroshot { data, name } => cmd_zeroshot(cfg, data, name),
        Command::Baseline {
            kind,
            smooth,
            data,
            name,
        } => cmd_baseline(cfg, kind, smooth, data, name),
        Command::Sweep {
            axis,
            strategies,
            data,
            name,
        } => cmd_sweep(cfg, axis, strategies, data, name),
        Command::Plot {
            curves,
            compare,
            name,
        } => cmd_plot(cfg, curves, compare, name),
    }
}

// ── shared plumbing ───────────────────────────────────────────────────────

/// Create `<out_root>/<name>` and echo the resolved config into it.
fn make_run_dir(cfg: &RunConfig, name: Option<String>, default: &str) -> Result<PathBuf> {
    let name = name
        .or_else(|| cfg.run_name.clone())
        .unwrap_or_else(|| default.to_string());
    let dir = cfg.out_root.join(name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config"), cfg.serialize())
        .with_context(|| format!("writing {}", dir.join("config").display()))?;
    Ok(dir)
}

/// Load every `*.json` trial under `dir` in sorted filename order, applying
/// the trial cap.
fn load_dataset(dir: &Path, limit: Option<usize>) -> Result<Vec<Trial>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading dataset directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if let Some(n) = limit {
        paths.truncate(n);
    }
    if paths.is_empty() {
        bail!("no trial JSON files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| load_trial(p).with_context(|| format!("loading {}", p.display())))
        .collect()
}

/// Resolve the dataset directory from the flag or config and record it back
/// into the config so the echoed file is self-contained.
fn resolve_data_dir(cfg: &mut RunConfig, flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| cfg.dataset_dir.clone())
        .context("no dataset directory: pass --data or set [dataset] dir")?;
    let dir = fs::canonicalize(&dir).unwrap_or(dir);
    cfg.dataset_dir = Some(dir.clone());
    Ok(dir)
}

/// Training trials and evaluation trials per the configured split: the
/// held-out group evaluates, the rest trains. Without a hold-out list both
/// sides see every trial.
fn split_for_run<'a>(
    cfg: &RunConfig,
    trials: &'a [Trial],
) -> Result<(Vec<&'a Trial>, Vec<&'a Trial>)> {
    if cfg.split.held_out.is_empty() {
        let all: Vec<&Trial> = trials.iter().collect();
        return Ok((all.clone(), all));
    }
    let (train_part, test_part) = split_trials(trials, &cfg.split)?;
    audit_no_leakage(&train_part, &test_part, cfg.split.mode)?;
    Ok((train_part, test_part))
}

fn parse_strategy(name: &str, alpha: Option<f64>, cfg: &RunConfig) -> Result<Strategy> {
    Ok(match name {
        "scratch" => Strategy::Scratch,
        "pretrain" => match cfg.train.strategy {
            Strategy::PretrainLift { .. } => cfg.train.strategy.clone(),
            _ => Strategy::PretrainLift {
                epochs: grf_core::train::PRETRAIN_EPOCHS_DEFAULT,
                lr: grf_core::train::PRETRAIN_LR_DEFAULT,
            },
        },
        "mtl" => Strategy::MultiTask {
            alpha: alpha.unwrap_or(match cfg.train.strategy {
                Strategy::MultiTask { alpha } => alpha,
                _ => 0.5,
            }),
        },
        other => bail!("unknown strategy `{other}` (expected scratch|pretrain|mtl)"),
    })
}

#[allow(clippy::too_many_arguments)]
fn apply_train_flags(
    cfg: &mut RunConfig,
    strategy: Option<String>,
    alpha: Option<f64>,
    frames: Option<usize>,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch_size: Option<usize>,
    gate_terms: Option<usize>,
    source: Option<String>,
) -> Result<()> {
    if let Some(name) = strategy {
        cfg.train.strategy = parse_strategy(&name, alpha, cfg)?;
    } else if let Some(alpha) = alpha {
        cfg.train.strategy = Strategy::MultiTask { alpha };
    }
    if let Some(f) = frames {
        cfg.train.model.frames = f;
    }
    if let Some(e) = epochs {
        cfg.train.epochs = e;
    }
    if let Some(lr) = lr {
        cfg.train.lr = lr;
    }
    if let Some(b) = batch_size {
        cfg.train.batch_size = b;
    }
    if let Some(g) = gate_terms {
        cfg.train.gate_terms = g;
    }
    if let Some(s) = source {
        cfg.train.source = match s.as_str() {
            "all_cameras" => WindowSource::AllCameras,
            "pose3d" => WindowSource::Pose3d,
            other => bail!("unknown source `{other}` (expected all_cameras|pose3d)"),
        };
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Replace path-hostile characters in ids used as file stems.
fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_history(dir: &Path, outcome: &TrainOutcome) -> Result<()> {
    fs::write(dir.join("history.csv"), outcome.history.to_csv())?;
    if let Some(pre) = &outcome.pretrain_history {
        fs::write(dir.join("pretrain_history.csv"), pre.to_csv())?;
    }
    Ok(())
}

/// Write one net-vertical-force curve CSV per (video, input stream).
fn write_curves(dir: &Path, ckpt: &Checkpoint, trials: &[&Trial], source: WindowSource) -> Result<usize> {
    fs::create_dir_all(dir)?;
    let mut written = 0;
    for trial in trials {
        let (gt_net, preds) = video_curves(ckpt, trial, source)?;
        for (stream, pred_net) in preds {
            let path = dir.join(format!(
                "{}__{}.csv",
                sanitize(&trial.id),
                sanitize(&stream)
            ));
            fs::write(&path, write_curve_csv(&gt_net, &pred_net)?)?;
            written += 1;
        }
    }
    Ok(written)
}

// ── commands ──────────────────────────────────────────────────────────────

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    mut cfg: RunConfig,
    dir: Option<PathBuf>,
    movement: Option<String>,
    noise_px: Option<f64>,
    cameras: Option<usize>,
    duration: Option<f64>,
    count: Option<usize>,
    exact_poses: bool,
) -> Result<()> {
    if let Some(m) = movement {
        let parsed = SynthMovement::parse(&m)
            .with_context(|| format!("unknown movement `{m}` (expected cmj|squat|standing)"))?;
        cfg.synth_movements = vec![parsed];
    }
    if let Some(px) = noise_px {
        cfg.synth.noise_px = px;
    }
    if let Some(n) = cameras {
        cfg.synth.n_cameras = n;
    }
    if let Some(d) = duration {
        cfg.synth.duration_s = d;
    }
    if let Some(c) = count {
        cfg.synth_count = c;
    }
    let n = cfg.trial_limit.unwrap_or(cfg.synth_count);
    let out_dir = dir.unwrap_or_else(|| cfg.out_root.join("synth").join("trials"));
    fs::create_dir_all(&out_dir)?;
    cfg.dataset_dir = Some(fs::canonicalize(&out_dir).unwrap_or(out_dir.clone()));
    fs::write(out_dir.join("config"), cfg.serialize())?;

    for i in 0..n {
        let mut spec = cfg.synth.clone();
        spec.movement = cfg.synth_movements[i % cfg.synth_movements.len()];
        spec.seed = cfg.seed + i as u64;
        // Vary subject mass deterministically so the cohort is not uniform.
        spec.mass_kg = cfg.synth.mass_kg * (0.85 + 0.1 * (i % 4) as f64);
        let mut trial = generate_trial(&spec);
        if !exact_poses {
            trial.poses_3d = None; // the triangulate step reconstructs these
        }
        let path = out_dir.join(format!("{}.json", sanitize(&trial.id)));
        save_trial(&trial, &path)?;
        println!("wrote {}", path.display());
    }
    println!("generated {n} trials in {}", out_dir.display());
    Ok(())
}

fn cmd_triangulate(
    mut cfg: RunConfig,
    input: PathBuf,
    output: PathBuf,
    overwrite: bool,
    iterations: Option<usize>,
    threshold_px: Option<f64>,
) -> Result<()> {
    if let Some(it) = iterations {
        cfg.ransac_iterations = it;
    }
    if let Some(px) = threshold_px {
        cfg.ransac_threshold_px = px;
    }
    let trials = load_dataset(&input, cfg.trial_limit)?;
    fs::create_dir_all(&output)?;
    cfg.dataset_dir = Some(fs::canonicalize(&output).unwrap_or(output.clone()));
    fs::write(output.join("config"), cfg.serialize())?;

    let mut failures = 0usize;
    for mut trial in trials {
        let path = output.join(format!("{}.json", sanitize(&trial.id)));
        if trial.poses_3d.is_some() && !overwrite {
            save_trial(&trial, &path)?;
            println!("kept {} (already has 3D poses)", trial.id);
            continue;
        }
        match triangulate_sequence(
            &trial,
            cfg.ransac_iterations,
            cfg.ransac_threshold_px,
            cfg.seed,
            cfg.min_confidence,
        ) {
            Ok(poses) => {
                trial.poses_3d = Some(poses);
                save_trial(&trial, &path)?;
                println!("triangulated {}", trial.id);
            }
            Err(e) => {
                eprintln!("skipping {}: {e}", trial.id);
                save_trial(&trial, &path)?;
                failures += 1;
            }
        }
    }
    if failures > 0 {
        bail!("{failures} trial(s) failed triangulation");
    }
    Ok(())
}

fn cmd_train(mut cfg: RunConfig, data: Option<PathBuf>, name: Option<String>) -> Result<()> {
    let data_dir = resolve_data_dir(&mut cfg, data)?;
    let trials = load_dataset(&data_dir, cfg.trial_limit)?;
    let (train_part, _) = split_for_run(&cfg, &trials)?;
    let run_dir = make_run_dir(&cfg, name, "train")?;

    let outcome = train(&train_part, &cfg.train)?;
    let ckpt_dir = run_dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir)?;
    let ckpt_path = ckpt_dir.join("model.ckpt");
    save_checkpoint(&outcome.checkpoint(), &ckpt_path)?;
    write_history(&run_dir, &outcome)?;

    let last = outcome.history.epochs.last();
    println!(
        "trained {} epochs on {} trials ({} parameters); final train loss {}",
        outcome.history.epochs.len(),
        train_part.len(),
        outcome.model.parameter_count(),
        last.map(|e| e.train_loss.to_string()).unwrap_or_default()
    );
    println!("checkpoint {}", ckpt_path.display());
    Ok(())
}

fn cmd_eval(
    mut cfg: RunConfig,
    checkpoint: PathBuf,
    data: Option<PathBuf>,
    name: Option<String>,
) -> Result<()> {
    let data_dir = resolve_data_dir(&mut cfg, data)?;
    let trials = load_dataset(&data_dir, cfg.trial_limit)?;
    let (_, eval_part) = split_for_run(&cfg, &trials)?;
    let run_dir = make_run_dir(&cfg, name, "eval")?;

    let ckpt = load_checkpoint(&checkpoint)?;
    let report = evaluate(
        &ckpt,
        &eval_part,
        cfg.train.source,
        &cfg.ks,
        cfg.min_peak_distance,
    )?;
    write_json(&run_dir.join("report.json"), &report)?;
    let curves = write_curves(
        &run_dir.join("plots").join("curves"),
        &ckpt,
        &eval_part,
        cfg.train.source,
    )?;
    println!(
        "evaluated {} trials: overall RMSE {} N; wrote report.json and {curves} curve files",
        eval_part.len(),
        report.rmse_n
    );
    println!("report {}", run_dir.join("report.json").display());
    Ok(())
}

fn cmd_zeroshot(mut cfg: RunConfig, data: Option<PathBuf>, name: Option<String>) -> Result<()> {
    let data_dir = resolve_data_dir(&mut cfg, data)?;
    let trials = load_dataset(&data_dir, cfg.trial_limit)?;
    cfg.split.mode = SplitMode::Movement;
    cfg.split.held_out.clear();
    let run_dir = make_run_dir(&cfg, name, "zeroshot")?;

    let folds = leave_one_out_folds(&trials, SplitMode::Movement);
    if folds.len() < 2 {
        bail!("zero-shot needs at least two movement classes, found {}", folds.len());
    }
    let all_refs: Vec<&Trial> = trials.iter().collect();
    let mut summary = String::from("class,rmse_N\n");
    for spec in folds {
        let class = spec.held_out[0].clone();
        let (train_part, test_part) = split_trials(&trials, &spec)?;
        audit_no_leakage(&train_part, &test_part, SplitMode::Movement)?;
        let outcome = train(&train_part, &cfg.train)?;
        let ckpt = outcome.checkpoint();
        let report = zero_shot(
            &ckpt,
            &all_refs,
            &class,
            cfg.train.source,
            &cfg.ks,
            cfg.min_peak_distance,
        )?;
        let fold_dir = run_dir.join("folds").join(sanitize(&class));
        fs::create_dir_all(&fold_dir)?;
        write_json(&fold_dir.join("report.json"), &report)?;
        fs::write(fold_dir.join("history.csv"), outcome.history.to_csv())?;
        summary.push_str(&format!("{class},{}\n", report.rmse_n));
        println!("fold {class}: RMSE {} N over {} trials", report.rmse_n, test_part.len());
    }
    fs::write(run_dir.join("summary.csv"), summary)?;
    println!("zero-shot summary {}", run_dir.join("summary.csv").display());
    Ok(())
}

/// Assemble an `EvalReport` for one prediction stream per video.
fn baseline_report(
    scored: Vec<(String, SequenceScores)>,
    stream: &str,
) -> Result<EvalReport> {
    if scored.is_empty() {
        bail!("no trials were scored");
    }
    let mut videos = BTreeMap::new();
    for (id, scores) in scored {
        let mut cameras = BTreeMap::new();
        cameras.insert(stream.to_string(), scores.clone());
        videos.insert(
            id,
            VideoReport {
                rmse_n: scores.rmse_n,
                kpeaks_n: scores.kpeaks_n,
                cameras,
            },
        );
    }
    let rmse_n = videos.values().map(|v| v.rmse_n).sum::<f64>() / videos.len() as f64;
    // Average each k over the videos where it exists.
    let mut kpeaks_n = BTreeMap::new();
    let keys: std::collections::BTreeSet<String> = videos
        .values()
        .flat_map(|v| v.kpeaks_n.keys().cloned())
        .collect();
    for k in keys {
        let vals: Vec<f64> = videos.values().filter_map(|v| v.kpeaks_n.get(&k)).copied().collect();
        kpeaks_n.insert(k, vals.iter().sum::<f64>() / vals.len() as f64);
    }
    Ok(EvalReport {
        rmse_n,
        kpeaks_n,
        videos,
    })
}

fn cmd_baseline(
    mut cfg: RunConfig,
    kind: String,
    smooth: usize,
    data: Option<PathBuf>,
    name: Option<String>,
) -> Result<()> {
    let data_dir = resolve_data_dir(&mut cfg, data)?;
    let trials = load_dataset(&data_dir, cfg.trial_limit)?;
    let (train_part, eval_part) = split_for_run(&cfg, &trials)?;
    let run_dir = make_run_dir(&cfg, name, &format!("baseline-{kind}"))?;

    let gt_for = |trial: &Trial| -> Result<Vec<[f64; 6]>> {
        let aligned = align_trial(trial)?;
        Ok(denormalize_forces(&aligned.forces, trial.subject.mass_kg)?.frames)
    };

    let mut scored = Vec::new();
    match kind.as_str() {
        "newton" => {
            for trial in &eval_part {
                let pred = newton_sequence(trial, smooth)?;
                let scores =
                    score_sequence(&pred, &gt_for(trial)?, &cfg.ks, cfg.min_peak_distance)?;
                scored.push((trial.id.clone(), scores));
            }
        }
        "exemplar" => {
            let exemplar = ExemplarBaseline::build(&train_part)?;
            for trial in &eval_part {
                let pred = exemplar.predict(trial)?;
                let scores =
                    score_sequence(&pred, &gt_for(trial)?, &cfg.ks, cfg.min_peak_distance)?;
                scored.push((trial.id.clone(), scores));
            }
        }
        other => bail!("unknown baseline `{other}` (expected newton|exemplar)"),
    }
    let report = baseline_report(scored, &kind)?;
    write_json(&run_dir.join("report.json"), &report)?;
    println!(
        "{kind} baseline over {} trials: overall RMSE {} N",
        eval_part.len(),
        report.rmse_n
    );
    println!("report {}", run_dir.join("report.json").display());
    Ok(())
}

fn cmd_sweep(
    mut cfg: RunConfig,
    axis: Option<String>,
    strategies: Option<String>,
    data: Option<PathBuf>,
    name: Option<String>,
) -> Result<()> {
    if let Some(a) = axis {
        cfg.sweep_axis = match a.as_str() {
            "receptive_field" => SweepAxis::ReceptiveField,
            "gate_terms" => SweepAxis::GateTerms,
            other => bail!("unknown axis `{other}` (expected receptive_field|gate_terms)"),
        };
    }
    let strategy_list: Vec<Strategy> = match strategies {
        Some(list) => list
            .split(',')
            .map(|s| parse_strategy(s.trim(), None, &cfg))
            .collect::<Result<_>>()?,
        None => vec![cfg.train.strategy.clone()],
    };
    let data_dir = resolve_data_dir(&mut cfg, data)?;
    let trials = load_dataset(&data_dir, cfg.trial_limit)?;
    let (train_part, eval_part) = split_for_run(&cfg, &trials)?;
    let run_dir = make_run_dir(&cfg, name, "sweep")?;

    let mut csv = String::from("axis,value,strategy");
    for k in &cfg.ks {
        csv.push_str(&format!(",kpeaks_{k}_N"));
    }
    csv.push_str(",rmse_N\n");

    for strategy in &strategy_list {
        for &value in &cfg.sweep_values() {
            let mut case = cfg.clone();
            case.train.strategy = strategy.clone();
            let axis_name = match cfg.sweep_axis {
                SweepAxis::ReceptiveField => {
                    case.train.model.frames = value;
                    "receptive_field"
                }
                SweepAxis::GateTerms => {
                    case.train.gate_terms = value;
                    "gate_terms"
                }
            };
            let outcome = train(&train_part, &case.train)?;
            let report = evaluate(
                &outcome.checkpoint(),
                &eval_part,
                case.train.source,
                &case.ks,
                case.min_peak_distance,
            )?;
            let strategy_label = match strategy {
                Strategy::Scratch => "scratch",
                Strategy::PretrainLift { .. } => "pretrain",
                Strategy::MultiTask { .. } => "mtl",
            };
            csv.push_str(&format!("{axis_name},{value},{strategy_label}"));
            for k in &cfg.ks {
                match report.kpeaks_n.get(&k.to_string()) {
                    Some(v) => csv.push_str(&format!(",{v}")),
                    None => csv.push(','),
                }
            }
            csv.push_str(&format!(",{}\n", report.rmse_n));
            println!("{axis_name}={value} strategy={strategy_label}: RMSE {} N", report.rmse_n);
        }
    }
    fs::write(run_dir.join("sweep.csv"), csv)?;
    println!("sweep table {}", run_dir.join("sweep.csv").display());
    Ok(())
}

fn collect_curve_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no curve CSV files found");
    }
    Ok(files)
}

fn load_panel(path: &Path, title: &str, cfg: &RunConfig) -> Result<PanelSpec> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (gt, pred) =
        parse_curve_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(PanelSpec::from_curves(
        title,
        gt,
        pred,
        &cfg.ks,
        cfg.min_peak_distance,
    )?)
}

fn cmd_plot(
    cfg: RunConfig,
    curves: Vec<PathBuf>,
    compare: Option<PathBuf>,
    name: Option<String>,
) -> Result<()> {
    let run_dir = make_run_dir(&cfg, name, "plot")?;
    let plots_dir = run_dir.join("plots");
    fs::create_dir_all(&plots_dir)?;

    let files = collect_curve_files(&curves)?;
    let dir_label = |p: &Path| {
        p.parent()
            .and_then(|d| d.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let mut rendered = 0usize;
    for file in &files {
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "curve".into());
        let mut panels = Vec::new();
        match &compare {
            None => panels.push(load_panel(file, &stem, &cfg)?),
            Some(other_dir) => {
                let other = other_dir.join(file.file_name().expect("curve files have names"));
                if !other.is_file() {
                    eprintln!("no counterpart for {stem} in {}", other_dir.display());
                    continue;
                }
                panels.push(load_panel(
                    file,
                    &format!("{stem} ({})", dir_label(file)),
                    &cfg,
                )?);
                panels.push(load_panel(
                    &other,
                    &format!("{stem} ({})", dir_label(&other)),
                    &cfg,
                )?);
            }
        }
        let svg = render_svg(&panels, cfg.min_peak_distance);
        let out = plots_dir.join(format!("{stem}.svg"));
        fs::write(&out, svg)?;
        rendered += 1;
        println!("plotted {}", out.display());
    }
    if rendered == 0 {
        bail!("no plots were rendered");
    }
    Ok(())
}
