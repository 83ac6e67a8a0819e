//! Flat, typed key-value run configuration shared by every CLI command.
//!
//! The format is INI-style: `[section]` headers group keys per module, each
//! line is `key = value`, `#` starts a comment line. There are no nested
//! structures. Serialization emits sections and keys in a fixed sorted order
//! and uses shortest round-trip float formatting, so a resolved config echoed
//! next to a run's outputs parses back to a bit-identical `RunConfig`.

use crate::metrics::DEFAULT_MIN_PEAK_DISTANCE;
use crate::synth::{SynthMovement, SynthSpec};
use crate::train::{
    SplitMode, SplitSpec, Strategy, TrainConfig, WindowSource, PRETRAIN_EPOCHS_DEFAULT,
    PRETRAIN_LR_DEFAULT,
};
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

/// Errors raised while reading or interpreting a config file.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config [{section}] {key} (line {line}): {message}")]
    Value {
        section: String,
        key: String,
        line: usize,
        message: String,
    },
    #[error("config line {line}: unknown key [{section}] {key}")]
    UnknownKey {
        section: String,
        key: String,
        line: usize,
    },
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Sweep axis for the `sweep` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary the input window length (receptive field).
    ReceptiveField,
    /// Vary the number of ascending gate thresholds in the loss.
    GateTerms,
}

impl SweepAxis {
    pub fn default_values(self) -> Vec<usize> {
        match self {
            SweepAxis::ReceptiveField => vec![9, 27, 43, 81],
            SweepAxis::GateTerms => vec![1, 2, 3],
        }
    }

    fn name(self) -> &'static str {
        match self {
            SweepAxis::ReceptiveField => "receptive_field",
            SweepAxis::GateTerms => "gate_terms",
        }
    }
}

/// Fully resolved settings for one CLI invocation. Defaults match the
/// training recipe; a config file overrides defaults and CLI flags override
/// the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Directory of trial JSON files consumed by train/eval/baseline.
    pub dataset_dir: Option<PathBuf>,
    /// Root directory that run directories are created under.
    pub out_root: PathBuf,
    /// Run directory name; a timestamp-free default is derived from the
    /// command when absent.
    pub run_name: Option<String>,
    /// Master seed; training and synthesis derive their streams from it.
    pub seed: u64,
    /// Worker threads for the parallel-safe stages; 0 = library default.
    pub jobs: usize,
    /// Cap on the number of trials generated or loaded.
    pub trial_limit: Option<usize>,
    /// Model architecture plus optimization settings.
    pub train: TrainConfig,
    /// Train/test partition rule.
    pub split: SplitSpec,
    /// k values for the k-peaks metric.
    pub ks: Vec<usize>,
    /// Minimum frame distance between detected peaks.
    pub min_peak_distance: usize,
    /// Trial generator settings (seed field is overridden by `seed`).
    pub synth: SynthSpec,
    /// Number of trials the `synth` command generates.
    pub synth_count: usize,
    /// Movement classes cycled over generated trials.
    pub synth_movements: Vec<SynthMovement>,
    /// RANSAC iteration budget per point.
    pub ransac_iterations: usize,
    /// RANSAC inlier reprojection threshold in pixels.
    pub ransac_threshold_px: f64,
    /// Keypoints below this confidence are excluded from triangulation.
    pub min_confidence: f64,
    /// Axis for the `sweep` command.
    pub sweep_axis: SweepAxis,
    /// Explicit sweep values; axis defaults apply when absent.
    pub sweep_values: Option<Vec<usize>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset_dir: None,
            out_root: PathBuf::from("runs"),
            run_name: None,
            seed: 0,
            jobs: 0,
            trial_limit: None,
            train: TrainConfig::default(),
            split: SplitSpec {
                mode: SplitMode::Subject,
                held_out: Vec::new(),
            },
            ks: vec![1, 2, 3, 5],
            min_peak_distance: DEFAULT_MIN_PEAK_DISTANCE,
            synth: SynthSpec::default(),
            synth_count: 2,
            synth_movements: vec![SynthMovement::Jump, SynthMovement::Squat],
            ransac_iterations: 50,
            ransac_threshold_px: 4.0,
            min_confidence: 0.0,
            sweep_axis: SweepAxis::ReceptiveField,
            sweep_values: None,
        }
    }
}

fn strategy_name(s: &Strategy) -> &'static str {
    match s {
        Strategy::Scratch => "scratch",
        Strategy::PretrainLift { .. } => "pretrain",
        Strategy::MultiTask { .. } => "mtl",
    }
}

fn source_name(s: WindowSource) -> &'static str {
    match s {
        WindowSource::AllCameras => "all_cameras",
        WindowSource::Pose3d => "pose3d",
    }
}

fn split_mode_name(m: SplitMode) -> &'static str {
    match m {
        SplitMode::Subject => "subject",
        SplitMode::Movement => "movement",
    }
}

fn join_list<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Render the fully resolved config in canonical form: sorted sections,
    /// sorted keys, shortest round-trip number formatting. `parse` of the
    /// output reproduces `self` exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, pairs: &[(&str, String)]| {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in pairs {
                let _ = writeln!(out, "{k} = {v}");
            }
            let _ = writeln!(out);
        };

        section(
            "dataset",
            &[(
                "dir",
                self.dataset_dir
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            )],
        );
        section(
            "metrics",
            &[
                ("ks", join_list(&self.ks)),
                ("min_peak_distance", self.min_peak_distance.to_string()),
            ],
        );
        let m = &self.train.model;
        section(
            "model",
            &[
                ("frames", m.frames.to_string()),
                ("heads", m.heads.to_string()),
                ("in_channels", m.in_channels.to_string()),
                ("joints", m.joints.to_string()),
                ("spatial_layers", m.spatial_layers.to_string()),
                ("temporal_layers", m.temporal_layers.to_string()),
                ("token_dim", m.token_dim.to_string()),
            ],
        );
        section(
            "run",
            &[
                ("jobs", self.jobs.to_string()),
                ("name", self.run_name.clone().unwrap_or_default()),
                ("out", self.out_root.display().to_string()),
                ("seed", self.seed.to_string()),
                (
                    "trials",
                    self.trial_limit.map(|n| n.to_string()).unwrap_or_default(),
                ),
            ],
        );
        section(
            "split",
            &[
                ("held_out", self.split.held_out.join(",")),
                ("mode", split_mode_name(self.split.mode).to_string()),
            ],
        );
        section(
            "sweep",
            &[
                ("axis", self.sweep_axis.name().to_string()),
                (
                    "values",
                    self.sweep_values
                        .as_ref()
                        .map(|v| join_list(v))
                        .unwrap_or_default(),
                ),
            ],
        );
        let s = &self.synth;
        section(
            "synth",
            &[
                ("cameras", s.n_cameras.to_string()),
                ("count", self.synth_count.to_string()),
                ("duration_s", s.duration_s.to_string()),
                ("fps_force", s.fps_force.to_string()),
                ("fps_video", s.fps_video.to_string()),
                ("mass_kg", s.mass_kg.to_string()),
                (
                    "movements",
                    self.synth_movements
                        .iter()
                        .map(|m| m.label())
                        .collect::<Vec<_>>()
                        .join(","),
                ),
                ("noise_px", s.noise_px.to_string()),
            ],
        );
        let t = &self.train;
        let (pre_epochs, pre_lr) = match t.strategy {
            Strategy::PretrainLift { epochs, lr } => (epochs, lr),
            _ => (PRETRAIN_EPOCHS_DEFAULT, PRETRAIN_LR_DEFAULT),
        };
        let alpha = match t.strategy {
            Strategy::MultiTask { alpha } => alpha,
            _ => 0.5,
        };
        section(
            "train",
            &[
                ("batch_size", t.batch_size.to_string()),
                ("epochs", t.epochs.to_string()),
                ("flip_probability", t.flip_probability.to_string()),
                ("gate_terms", t.gate_terms.to_string()),
                ("lr", t.lr.to_string()),
                ("lr_decay", t.lr_decay.to_string()),
                ("mtl_alpha", alpha.to_string()),
                ("pretrain_epochs", pre_epochs.to_string()),
                ("pretrain_lr", pre_lr.to_string()),
                ("source", source_name(t.source).to_string()),
                ("strategy", strategy_name(&t.strategy).to_string()),
                ("val_fraction", t.val_fraction.to_string()),
            ],
        );
        section(
            "triangulate",
            &[
                ("iterations", self.ransac_iterations.to_string()),
                ("min_confidence", self.min_confidence.to_string()),
                ("threshold_px", self.ransac_threshold_px.to_string()),
            ],
        );
        out
    }

    /// Parse config text, applying each key onto defaults. Unknown sections
    /// or keys are errors; blank values leave the default in place.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        // Strategy composites are gathered first so key order cannot matter.
        let mut strategy = strategy_name(&cfg.train.strategy).to_string();
        let mut pre_epochs = PRETRAIN_EPOCHS_DEFAULT;
        let mut pre_lr = PRETRAIN_LR_DEFAULT;
        let mut alpha = 0.5;
        let mut strategy_line = 0usize;

        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                    line: line_no,
                    message: "section header missing closing ']'".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            if section.is_empty() {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("key `{key}` appears before any [section]"),
                });
            }
            if value.is_empty() {
                continue; // blank value = keep default
            }
            let fail = |message: String| ConfigError::Value {
                section: section.clone(),
                key: key.to_string(),
                line: line_no,
                message,
            };
            match (section.as_str(), key) {
                ("dataset", "dir") => cfg.dataset_dir = Some(PathBuf::from(value)),
                ("metrics", "ks") => cfg.ks = parse_list(value).map_err(fail)?,
                ("metrics", "min_peak_distance") => {
                    cfg.min_peak_distance = parse_num(value).map_err(fail)?
                }
                ("model", "frames") => cfg.train.model.frames = parse_num(value).map_err(fail)?,
                ("model", "heads") => cfg.train.model.heads = parse_num(value).map_err(fail)?,
                ("model", "in_channels") => {
                    cfg.train.model.in_channels = parse_num(value).map_err(fail)?
                }
                ("model", "joints") => cfg.train.model.joints = parse_num(value).map_err(fail)?,
                ("model", "spatial_layers") => {
                    cfg.train.model.spatial_layers = parse_num(value).map_err(fail)?
                }
                ("model", "temporal_layers") => {
                    cfg.train.model.temporal_layers = parse_num(value).map_err(fail)?
                }
                ("model", "token_dim") => {
                    cfg.train.model.token_dim = parse_num(value).map_err(fail)?
                }
                ("run", "jobs") => cfg.jobs = parse_num(value).map_err(fail)?,
                ("run", "name") => cfg.run_name = Some(value.to_string()),
                ("run", "out") => cfg.out_root = PathBuf::from(value),
                ("run", "seed") => cfg.seed = parse_num(value).map_err(fail)?,
                ("run", "trials") => cfg.trial_limit = Some(parse_num(value).map_err(fail)?),
                ("split", "held_out") => {
                    cfg.split.held_out = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                ("split", "mode") => {
                    cfg.split.mode = match value {
                        "subject" => SplitMode::Subject,
                        "movement" => SplitMode::Movement,
                        other => {
                            return Err(fail(format!(
                                "expected `subject` or `movement`, got `{other}`"
                            )))
                        }
                    }
                }
                ("sweep", "axis") => {
                    cfg.sweep_axis = match value {
                        "receptive_field" => SweepAxis::ReceptiveField,
                        "gate_terms" => SweepAxis::GateTerms,
                        other => {
                            return Err(fail(format!(
                                "expected `receptive_field` or `gate_terms`, got `{other}`"
                            )))
                        }
                    }
                }
                ("sweep", "values") => cfg.sweep_values = Some(parse_list(value).map_err(fail)?),
                ("synth", "cameras") => cfg.synth.n_cameras = parse_num(value).map_err(fail)?,
                ("synth", "count") => cfg.synth_count = parse_num(value).map_err(fail)?,
                ("synth", "duration_s") => {
                    cfg.synth.duration_s = parse_num(value).map_err(fail)?
                }
                ("synth", "fps_force") => cfg.synth.fps_force = parse_num(value).map_err(fail)?,
                ("synth", "fps_video") => cfg.synth.fps_video = parse_num(value).map_err(fail)?,
                ("synth", "mass_kg") => cfg.synth.mass_kg = parse_num(value).map_err(fail)?,
                ("synth", "movements") => {
                    let mut movements = Vec::new();
                    for part in value.split(',') {
                        let part = part.trim();
                        if part.is_empty() {
                            continue;
                        }
                        movements.push(SynthMovement::parse(part).ok_or_else(|| {
                            fail(format!("unknown movement class `{part}`"))
                        })?);
                    }
                    if movements.is_empty() {
                        return Err(fail("movement list is empty".into()));
                    }
                    cfg.synth_movements = movements;
                }
                ("synth", "noise_px") => cfg.synth.noise_px = parse_num(value).map_err(fail)?,
                ("train", "batch_size") => {
                    cfg.train.batch_size = parse_num(value).map_err(fail)?
                }
                ("train", "epochs") => cfg.train.epochs = parse_num(value).map_err(fail)?,
                ("train", "flip_probability") => {
                    cfg.train.flip_probability = parse_num(value).map_err(fail)?
                }
                ("train", "gate_terms") => cfg.train.gate_terms = parse_num(value).map_err(fail)?,
                ("train", "lr") => cfg.train.lr = parse_num(value).map_err(fail)?,
                ("train", "lr_decay") => cfg.train.lr_decay = parse_num(value).map_err(fail)?,
                ("train", "mtl_alpha") => alpha = parse_num(value).map_err(fail)?,
                ("train", "pretrain_epochs") => pre_epochs = parse_num(value).map_err(fail)?,
                ("train", "pretrain_lr") => pre_lr = parse_num(value).map_err(fail)?,
                ("train", "source") => {
                    cfg.train.source = match value {
                        "all_cameras" => WindowSource::AllCameras,
                        "pose3d" => WindowSource::Pose3d,
                        other => {
                            return Err(fail(format!(
                                "expected `all_cameras` or `pose3d`, got `{other}`"
                            )))
                        }
                    }
                }
                ("train", "strategy") => {
                    match value {
                        "scratch" | "pretrain" | "mtl" => strategy = value.to_string(),
                        other => {
                            return Err(fail(format!(
                                "expected `scratch`, `pretrain` or `mtl`, got `{other}`"
                            )))
                        }
                    }
                    strategy_line = line_no;
                }
                ("train", "val_fraction") => {
                    cfg.train.val_fraction = parse_num(value).map_err(fail)?
                }
                ("triangulate", "iterations") => {
                    cfg.ransac_iterations = parse_num(value).map_err(fail)?
                }
                ("triangulate", "min_confidence") => {
                    cfg.min_confidence = parse_num(value).map_err(fail)?
                }
                ("triangulate", "threshold_px") => {
                    cfg.ransac_threshold_px = parse_num(value).map_err(fail)?
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        section: section.clone(),
                        key: key.to_string(),
                        line: line_no,
                    })
                }
            }
        }

        cfg.train.strategy = match strategy.as_str() {
            "scratch" => Strategy::Scratch,
            "pretrain" => Strategy::PretrainLift {
                epochs: pre_epochs,
                lr: pre_lr,
            },
            "mtl" => Strategy::MultiTask { alpha },
            other => {
                return Err(ConfigError::Value {
                    section: "train".into(),
                    key: "strategy".into(),
                    line: strategy_line,
                    message: format!("unknown strategy `{other}`"),
                })
            }
        };
        cfg.train.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::parse(&text)
    }

    /// Propagate the master seed into derived fields. Call after mutating
    /// `seed` directly (e.g. from a CLI flag).
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        self.synth.seed = seed;
    }

    /// Resolved sweep values for the configured axis.
    pub fn sweep_values(&self) -> Vec<usize> {
        self.sweep_values
            .clone()
            .unwrap_or_else(|| self.sweep_axis.default_values())
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("invalid value `{value}`: {e}"))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for part in value.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        out.push(parse_num(part)?);
    }
    if out.is_empty() {
        return Err("list is empty".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_exactly() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        // Serialization is canonical: a second round trip is byte-identical.
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn non_default_config_round_trips_exactly() {
        let mut cfg = RunConfig::default();
        cfg.dataset_dir = Some(PathBuf::from("/tmp/trials"));
        cfg.run_name = Some("exp-1".into());
        cfg.reseed(42);
        cfg.jobs = 3;
        cfg.trial_limit = Some(7);
        cfg.train.model.frames = 9;
        cfg.train.model.token_dim = 16;
        cfg.train.epochs = 13;
        cfg.train.lr = 0.1 + 0.2; // deliberately non-representable decimal
        cfg.train.strategy = Strategy::MultiTask { alpha: 0.375 };
        cfg.split.mode = SplitMode::Movement;
        cfg.split.held_out = vec!["CMJ".into(), "Squat".into()];
        cfg.ks = vec![1, 5];
        cfg.synth_movements = vec![SynthMovement::Standing];
        cfg.synth.noise_px = 1.5;
        cfg.sweep_axis = SweepAxis::GateTerms;
        cfg.sweep_values = Some(vec![1, 2]);
        let back = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.train.lr.to_bits(), cfg.train.lr.to_bits());
    }

    #[test]
    fn pretrain_strategy_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.train.strategy = Strategy::PretrainLift {
            epochs: 3,
            lr: 1e-5,
        };
        let back = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(back.train.strategy, cfg.train.strategy);
    }

    #[test]
    fn strategy_keys_apply_regardless_of_order() {
        let text = "[train]\npretrain_epochs = 9\nstrategy = pretrain\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(
            cfg.train.strategy,
            Strategy::PretrainLift {
                epochs: 9,
                lr: PRETRAIN_LR_DEFAULT
            }
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        match RunConfig::parse("[model]\njoints 17\n") {
            Err(ConfigError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
        match RunConfig::parse("[model]\nwidth = 32\n") {
            Err(ConfigError::UnknownKey { line: 2, .. }) => {}
            other => panic!("expected unknown-key error, got {other:?}"),
        }
        match RunConfig::parse("[train]\nlr = fast\n") {
            Err(ConfigError::Value { line: 2, .. }) => {}
            other => panic!("expected value error, got {other:?}"),
        }
        match RunConfig::parse("lr = 1\n") {
            Err(ConfigError::Parse { line: 1, .. }) => {}
            other => panic!("expected missing-section error, got {other:?}"),
        }
    }

    #[test]
    fn comments_blanks_and_blank_values_keep_defaults() {
        let text = "# comment\n\n[run]\nname = \nseed = 5\n; also a comment\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.run_name, None);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.train.seed, 5, "master seed reaches training");
        assert_eq!(cfg.synth.seed, 5, "master seed reaches synthesis");
    }

    #[test]
    fn sweep_values_default_per_axis() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.sweep_values(), vec![9, 27, 43, 81]);
        cfg.sweep_axis = SweepAxis::GateTerms;
        assert_eq!(cfg.sweep_values(), vec![1, 2, 3]);
        cfg.sweep_values = Some(vec![27]);
        assert_eq!(cfg.sweep_values(), vec![27]);
    }
}
