//! Spatial-temporal transformer over pose windows.
//!
//! Each frame's joints are embedded and contextualized by a spatial encoder;
//! per-frame tokens are then contextualized across the window by a temporal
//! encoder, reduced to a single feature by a learned weighted average, and
//! mapped by linear heads to a 6-channel force prediction and a 3D pose
//! estimate.
//!
//! Parameters live in one generic container (`Params<T>`) whose field
//! traversal order is fixed; initialization draws, optimizer slots, and
//! checkpoint records all key off that order, which is what makes training
//! runs bitwise reproducible.

use crate::tensor::{Tape, Tensor, TensorError, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const LN_EPS: f64 = 1e-5;
const MAGIC: &[u8; 8] = b"GRFCKPT\x01";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error("checkpoint checksum mismatch: file is corrupted")]
    ChecksumMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Joints per frame.
    pub joints: usize,
    /// Input channels per joint (2 for pixel keypoints, 3 for world points).
    pub in_channels: usize,
    /// Window length (receptive field) in frames.
    pub frames: usize,
    /// Per-joint embedding width in the spatial encoder.
    pub token_dim: usize,
    /// Attention heads in both encoders.
    pub heads: usize,
    pub spatial_layers: usize,
    pub temporal_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            joints: 17,
            in_channels: 2,
            frames: 27,
            token_dim: 32,
            heads: 8,
            spatial_layers: 4,
            temporal_layers: 4,
        }
    }
}

impl ModelConfig {
    /// Width of one frame token in the temporal encoder.
    pub fn frame_dim(&self) -> usize {
        self.joints * self.token_dim
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |m: String| Err(ModelError::Config(m));
        if self.joints == 0 || self.frames == 0 || self.token_dim == 0 || self.heads == 0 {
            return err("joints, frames, token_dim, and heads must be positive".into());
        }
        if self.spatial_layers == 0 || self.temporal_layers == 0 {
            return err("both encoders need at least one layer".into());
        }
        if !(self.in_channels == 2 || self.in_channels == 3) {
            return err(format!("in_channels must be 2 or 3, got {}", self.in_channels));
        }
        if !self.token_dim.is_multiple_of(self.heads) {
            return err(format!(
                "token_dim {} not divisible by heads {}",
                self.token_dim, self.heads
            ));
        }
        if !self.frame_dim().is_multiple_of(self.heads) {
            return err(format!(
                "frame token width {} not divisible by heads {}",
                self.frame_dim(),
                self.heads
            ));
        }
        Ok(())
    }
}

// ── generic parameter containers ─────────────────────────────────────────
//
// `map_named` visits leaves in declaration order with a dotted path; every
// consumer of parameter order (init, Adam slots, checkpoints, binding) goes
// through it, so the order cannot drift between them.

#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub w: T,
    pub b: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Norm<T> {
    pub gamma: T,
    pub beta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attention<T> {
    pub q: Linear<T>,
    pub k: Linear<T>,
    pub v: Linear<T>,
    pub o: Linear<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub fc1: Linear<T>,
    pub fc2: Linear<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block<T> {
    pub ln1: Norm<T>,
    pub attn: Attention<T>,
    pub ln2: Norm<T>,
    pub mlp: Mlp<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoder<T> {
    pub blocks: Vec<Block<T>>,
    pub norm: Norm<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub embed: Linear<T>,
    pub spatial_pos: T,
    pub spatial: Encoder<T>,
    pub temporal_pos: T,
    pub temporal: Encoder<T>,
    pub reducer: T,
    pub force_head: Linear<T>,
    pub pose_head: Linear<T>,
}

impl<T> Linear<T> {
    fn map_named<U>(&self, path: &str, f: &mut impl FnMut(&str, &T) -> U) -> Linear<U> {
        Linear {
            w: f(&format!("{path}.w"), &self.w),
            b: f(&format!("{path}.b"), &self.b),
        }
    }
}

impl<T> Norm<T> {
    fn map_named<U>(&self, path: &str, f: &mut impl FnMut(&str, &T) -> U) -> Norm<U> {
        Norm {
            gamma: f(&format!("{path}.gamma"), &self.gamma),
            beta: f(&format!("{path}.beta"), &self.beta),
        }
    }
}

impl<T> Block<T> {
    fn map_named<U>(&self, path: &str, f: &mut impl FnMut(&str, &T) -> U) -> Block<U> {
        Block {
            ln1: self.ln1.map_named(&format!("{path}.ln1"), f),
            attn: Attention {
                q: self.attn.q.map_named(&format!("{path}.attn.q"), f),
                k: self.attn.k.map_named(&format!("{path}.attn.k"), f),
                v: self.attn.v.map_named(&format!("{path}.attn.v"), f),
                o: self.attn.o.map_named(&format!("{path}.attn.o"), f),
            },
            ln2: self.ln2.map_named(&format!("{path}.ln2"), f),
            mlp: Mlp {
                fc1: self.mlp.fc1.map_named(&format!("{path}.mlp.fc1"), f),
                fc2: self.mlp.fc2.map_named(&format!("{path}.mlp.fc2"), f),
            },
        }
    }
}

impl<T> Encoder<T> {
    fn map_named<U>(&self, path: &str, f: &mut impl FnMut(&str, &T) -> U) -> Encoder<U> {
        Encoder {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| b.map_named(&format!("{path}.block{i}"), f))
                .collect(),
            norm: self.norm.map_named(&format!("{path}.norm"), f),
        }
    }
}

impl<T> Params<T> {
    pub fn map_named<U>(&self, f: &mut impl FnMut(&str, &T) -> U) -> Params<U> {
        Params {
            embed: self.embed.map_named("embed", f),
            spatial_pos: f("spatial_pos", &self.spatial_pos),
            spatial: self.spatial.map_named("spatial", f),
            temporal_pos: f("temporal_pos", &self.temporal_pos),
            temporal: self.temporal.map_named("temporal", f),
            reducer: f("reducer", &self.reducer),
            force_head: self.force_head.map_named("force_head", f),
            pose_head: self.pose_head.map_named("pose_head", f),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Params<U> {
        self.map_named(&mut |_, t| f(t))
    }
}

// ── initialization ───────────────────────────────────────────────────────

enum InitRule {
    /// U(-a, a) per element.
    Uniform(f64),
    Const(f64),
}

/// The single structural template: shapes and init rules for every tensor.
fn template(cfg: &ModelConfig) -> Params<(Vec<usize>, InitRule)> {
    let lin = |fan_in: usize, fan_out: usize| {
        let a = 1.0 / (fan_in as f64).sqrt();
        Linear {
            w: (vec![fan_in, fan_out], InitRule::Uniform(a)),
            b: (vec![fan_out], InitRule::Const(0.0)),
        }
    };
    let norm = |n: usize| Norm {
        gamma: (vec![n], InitRule::Const(1.0)),
        beta: (vec![n], InitRule::Const(0.0)),
    };
    let block = |n: usize| Block {
        ln1: norm(n),
        attn: Attention {
            q: lin(n, n),
            k: lin(n, n),
            v: lin(n, n),
            o: lin(n, n),
        },
        ln2: norm(n),
        mlp: Mlp {
            fc1: lin(n, 2 * n),
            fc2: lin(2 * n, n),
        },
    };
    let encoder = |n: usize, layers: usize| Encoder {
        blocks: (0..layers).map(|_| block(n)).collect(),
        norm: norm(n),
    };
    let d = cfg.token_dim;
    let fd = cfg.frame_dim();
    Params {
        embed: lin(cfg.in_channels, d),
        spatial_pos: (vec![cfg.joints, d], InitRule::Uniform(0.02)),
        spatial: encoder(d, cfg.spatial_layers),
        temporal_pos: (vec![cfg.frames, fd], InitRule::Uniform(0.02)),
        temporal: encoder(fd, cfg.temporal_layers),
        reducer: (vec![cfg.frames], InitRule::Const(1.0 / cfg.frames as f64)),
        force_head: lin(fd, 6),
        pose_head: lin(fd, 3 * cfg.joints),
    }
}

/// Draw one tensor from its template entry using the shared init stream.
fn materialize(shape: &[usize], rule: &InitRule, rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let data = match rule {
        InitRule::Uniform(a) => (0..n).map(|_| rng.gen_range(-*a..*a)).collect(),
        InitRule::Const(c) => vec![*c; n],
    };
    Tensor::new(shape, data).expect("template shapes are valid")
}

/// Which prediction head an operation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Force,
    Pose,
}

/// A complete model: config plus all parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub config: ModelConfig,
    pub params: Params<Tensor>,
}

impl ModelParameters {
    /// Fresh parameters. Weight matrices draw U(-1/sqrt(fan_in), ..) and
    /// positional tables U(-0.02, 0.02), in fixed traversal order from one
    /// seeded stream; biases are zero, norms identity, and the temporal
    /// reducer starts as a plain mean over frames.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<ModelParameters, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = template(config).map(|(shape, rule)| materialize(shape, rule, &mut rng));
        Ok(ModelParameters {
            config: config.clone(),
            params,
        })
    }

    /// Replace one prediction head with freshly drawn weights while keeping
    /// every other tensor — the shared trunk and the untouched head —
    /// bit-exact. This is the boundary operation between lifting pretraining
    /// and force finetuning: the trunk carries over, the named head restarts
    /// from its configured initializer.
    pub fn swap_head(&self, head: Head, seed: u64) -> ModelParameters {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tpl = template(&self.config);
        let mut fresh_linear = |l: &Linear<(Vec<usize>, InitRule)>| Linear {
            w: materialize(&l.w.0, &l.w.1, &mut rng),
            b: materialize(&l.b.0, &l.b.1, &mut rng),
        };
        let mut out = self.clone();
        match head {
            Head::Force => out.params.force_head = fresh_linear(&tpl.force_head),
            Head::Pose => out.params.pose_head = fresh_linear(&tpl.pose_head),
        }
        out
    }

    pub fn named_tensors(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        self.params.map_named(&mut |name, t: &Tensor| {
            out.push((name.to_string(), t.clone()));
        });
        out
    }

    pub fn parameter_count(&self) -> usize {
        let mut n = 0;
        self.params.map(|t| n += t.numel());
        n
    }

    /// Insert every tensor as a trainable leaf on the tape.
    pub fn bind(&self, tape: &mut Tape) -> BoundModel {
        BoundModel {
            config: self.config.clone(),
            params: self.params.map(|t| tape.leaf(t.clone())),
        }
    }

    /// Insert every tensor as a constant (no gradients tracked).
    pub fn bind_frozen(&self, tape: &mut Tape) -> BoundModel {
        BoundModel {
            config: self.config.clone(),
            params: self.params.map(|t| tape.constant(t.clone())),
        }
    }

    /// Rebuild parameters from a slice of tape leaves, in traversal order.
    /// Panics if the slice length differs from the parameter tensor count.
    pub fn bound_from_vars(&self, vars: &[Var]) -> BoundModel {
        let mut it = vars.iter();
        let params = self.params.map(|_| *it.next().expect("one var per tensor"));
        assert!(it.next().is_none(), "extra vars beyond parameter count");
        BoundModel {
            config: self.config.clone(),
            params,
        }
    }
}

// ── forward pass ─────────────────────────────────────────────────────────

/// Model parameters registered on a tape.
pub struct BoundModel {
    pub config: ModelConfig,
    pub params: Params<Var>,
}

/// Both prediction heads for one input window.
pub struct ForwardOutput {
    /// `[1, 6]` force channels (units follow the training targets).
    pub force: Var,
    /// `[joints, 3]` pose estimate.
    pub pose: Var,
}

fn linear(tape: &mut Tape, x: Var, l: &Linear<Var>) -> Result<Var, TensorError> {
    let y = tape.matmul(x, l.w)?;
    tape.add_row(y, l.b)
}

/// Pre-norm transformer block: attention and MLP sublayers, each residual.
fn encoder_block(
    tape: &mut Tape,
    z: Var,
    block: &Block<Var>,
    heads: usize,
) -> Result<Var, TensorError> {
    let h = tape.layer_norm(z, block.ln1.gamma, block.ln1.beta, LN_EPS)?;
    let q = linear(tape, h, &block.attn.q)?;
    let k = linear(tape, h, &block.attn.k)?;
    let v = linear(tape, h, &block.attn.v)?;
    let d = tape.value(q).cols();
    let dh = d / heads;
    // Heads attend independently on column slices; the outputs are
    // re-concatenated along columns (via transposed row concat).
    let mut head_cols = Vec::with_capacity(heads);
    for i in 0..heads {
        let qh = tape.slice_cols(q, i * dh, dh)?;
        let kh = tape.slice_cols(k, i * dh, dh)?;
        let vh = tape.slice_cols(v, i * dh, dh)?;
        let a = crate::tensor::scaled_dot_attention(tape, qh, kh, vh)?;
        head_cols.push(tape.transpose(a)?);
    }
    let cat_t = tape.concat_rows(&head_cols)?;
    let cat = tape.transpose(cat_t)?;
    let attn_out = linear(tape, cat, &block.attn.o)?;
    let z = tape.add(z, attn_out)?;

    let h = tape.layer_norm(z, block.ln2.gamma, block.ln2.beta, LN_EPS)?;
    let m = linear(tape, h, &block.mlp.fc1)?;
    let m = tape.gelu(m);
    let m = linear(tape, m, &block.mlp.fc2)?;
    tape.add(z, m)
}

fn encode(
    tape: &mut Tape,
    mut z: Var,
    enc: &Encoder<Var>,
    heads: usize,
) -> Result<Var, TensorError> {
    for block in &enc.blocks {
        z = encoder_block(tape, z, block, heads)?;
    }
    tape.layer_norm(z, enc.norm.gamma, enc.norm.beta, LN_EPS)
}

/// Encode one frame's joints (`[joints, in_channels]`) into a frame token
/// (`[1, joints * token_dim]`).
pub fn spatial_encode(
    tape: &mut Tape,
    model: &BoundModel,
    frame: Var,
) -> Result<Var, TensorError> {
    let e = linear(tape, frame, &model.params.embed)?;
    let e = tape.add(e, model.params.spatial_pos)?;
    let s = encode(tape, e, &model.params.spatial, model.config.heads)?;
    tape.reshape(s, &[1, model.config.frame_dim()])
}

/// Full forward pass over one window var of shape
/// `[frames, joints * in_channels]` (frame-major, joint-grouped channels).
pub fn forward(
    tape: &mut Tape,
    model: &BoundModel,
    window: Var,
) -> Result<ForwardOutput, TensorError> {
    let cfg = &model.config;
    let expected = [cfg.frames, cfg.joints * cfg.in_channels];
    if tape.value(window).shape() != expected {
        return Err(TensorError::BadShape {
            op: "forward",
            expected: "a [frames, joints * in_channels] window",
            got: tape.value(window).shape().to_vec(),
        });
    }
    let xt = tape.transpose(window)?;
    let mut frame_tokens = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let col = tape.slice_cols(xt, t, 1)?;
        let row = tape.transpose(col)?;
        let jx = tape.reshape(row, &[cfg.joints, cfg.in_channels])?;
        frame_tokens.push(spatial_encode(tape, model, jx)?);
    }
    let z = tape.concat_rows(&frame_tokens)?;
    let z = tape.add(z, model.params.temporal_pos)?;
    let z = encode(tape, z, &model.params.temporal, cfg.heads)?;
    let feat = tape.conv1d_reduce(z, model.params.reducer)?;
    let force = linear(tape, feat, &model.params.force_head)?;
    let pose_flat = linear(tape, feat, &model.params.pose_head)?;
    let pose = tape.reshape(pose_flat, &[cfg.joints, 3])?;
    Ok(ForwardOutput { force, pose })
}

/// Convenience: run the frozen model on raw window data and return the force
/// row as plain numbers.
pub fn predict_force(
    model: &ModelParameters,
    window: &Tensor,
) -> Result<[f64; 6], ModelError> {
    let mut tape = Tape::new();
    let bound = model.bind_frozen(&mut tape);
    let x = tape.constant(window.clone());
    let out = forward(&mut tape, &bound, x)?;
    let data = tape.value(out.force).data();
    let mut f = [0.0; 6];
    f.copy_from_slice(data);
    Ok(f)
}

// ── checkpoints ──────────────────────────────────────────────────────────

/// Everything needed to reload and evaluate a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelParameters,
    /// Mean subject mass over the training split; evaluation uses it to
    /// convert normalized predictions back to newtons.
    pub train_mean_mass_kg: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointMeta {
    config: ModelConfig,
    train_mean_mass_kg: f64,
}

/// Binary layout: magic, JSON metadata, tensor table (name, shape, f64 LE
/// data) in traversal order, then a SHA-256 digest of all preceding bytes.
pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), ModelError> {
    let io_err = |source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    };
    let meta = serde_json::to_vec(&CheckpointMeta {
        config: ckpt.model.config.clone(),
        train_mean_mass_kg: ckpt.train_mean_mass_kg,
    })?;
    let named = ckpt.model.named_tensors();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta);
    buf.extend_from_slice(&(named.len() as u32).to_le_bytes());
    for (name, tensor) in &named {
        let nb = name.as_bytes();
        buf.extend_from_slice(&(nb.len() as u16).to_le_bytes());
        buf.extend_from_slice(nb);
        buf.push(tensor.shape().len() as u8);
        for &d in tensor.shape() {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in tensor.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(&buf).map_err(io_err)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.pos + n > self.buf.len() {
            return Err(ModelError::Format("unexpected end of file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, ModelError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ModelError> {
    let mut raw = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|source| ModelError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    if raw.len() < MAGIC.len() + 32 {
        return Err(ModelError::Format("file too short".into()));
    }
    let (body, stored_hash) = raw.split_at(raw.len() - 32);
    if Sha256::digest(body).as_slice() != stored_hash {
        return Err(ModelError::ChecksumMismatch);
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(ModelError::Format("bad magic bytes".into()));
    }
    let meta_len = r.u32()? as usize;
    let meta: CheckpointMeta = serde_json::from_slice(r.take(meta_len)?)?;
    meta.config.validate()?;
    let n_tensors = r.u32()? as usize;
    let mut tensors = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let name_len = r.u16()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| ModelError::Format("tensor name is not UTF-8".into()))?;
        let rank = r.take(1)?[0] as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let numel: usize = shape.iter().product();
        let bytes = r.take(numel * 8)?;
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        tensors.push((name, Tensor::new(&shape, data)?));
    }
    if r.pos != body.len() {
        return Err(ModelError::Format("trailing bytes after tensor table".into()));
    }

    // Rebuild structurally, verifying names and shapes against the template.
    let mut it = tensors.into_iter();
    let mut mismatch: Option<String> = None;
    let params = template(&meta.config).map_named(&mut |name, (shape, _)| {
        match it.next() {
            Some((got_name, t)) if got_name == name && t.shape() == &shape[..] => t,
            Some((got_name, t)) => {
                mismatch.get_or_insert_with(|| {
                    format!(
                        "expected tensor {name} {shape:?}, found {got_name} {:?}",
                        t.shape()
                    )
                });
                Tensor::zeros(shape)
            }
            None => {
                mismatch.get_or_insert_with(|| format!("missing tensor {name}"));
                Tensor::zeros(shape)
            }
        }
    });
    if let Some(m) = mismatch {
        return Err(ModelError::Format(m));
    }
    if it.next().is_some() {
        return Err(ModelError::Format("extra tensors beyond the template".into()));
    }
    Ok(Checkpoint {
        model: ModelParameters {
            config: meta.config,
            params,
        },
        train_mean_mass_kg: meta.train_mean_mass_kg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::check::finite_difference_check;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            joints: 3,
            in_channels: 2,
            frames: 3,
            token_dim: 4,
            heads: 2,
            spatial_layers: 1,
            temporal_layers: 1,
        }
    }

    fn window(cfg: &ModelConfig, seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.frames * cfg.joints * cfg.in_channels;
        Tensor::new(
            &[cfg.frames, cfg.joints * cfg.in_channels],
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn forward_produces_correct_shapes() {
        let cfg = tiny_config();
        let model = ModelParameters::init(&cfg, 0).unwrap();
        let mut tape = Tape::new();
        let bound = model.bind_frozen(&mut tape);
        let x = tape.constant(window(&cfg, 1));
        let out = forward(&mut tape, &bound, x).unwrap();
        assert_eq!(tape.value(out.force).shape(), [1, 6]);
        assert_eq!(tape.value(out.pose).shape(), [3, 3]);
        assert!(tape.value(out.force).is_finite());
        assert!(tape.value(out.pose).is_finite());
    }

    #[test]
    fn parameter_count_matches_hand_formula() {
        let cfg = tiny_config();
        let model = ModelParameters::init(&cfg, 0).unwrap();
        let (j, c, f, d, fd) = (3usize, 2usize, 3usize, 4usize, 12usize);
        let lin = |i: usize, o: usize| i * o + o;
        let block = |n: usize| 2 * (2 * n) + 4 * lin(n, n) + lin(n, 2 * n) + lin(2 * n, n);
        let expected = lin(c, d)
            + j * d                 // spatial positions
            + block(d) + 2 * d      // spatial encoder + final norm
            + f * fd                // temporal positions
            + block(fd) + 2 * fd    // temporal encoder + final norm
            + f                     // reducer
            + lin(fd, 6)
            + lin(fd, 3 * j);
        assert_eq!(model.parameter_count(), expected);
    }

    #[test]
    fn init_is_seed_deterministic() {
        let cfg = tiny_config();
        let a = ModelParameters::init(&cfg, 11).unwrap();
        let b = ModelParameters::init(&cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = ModelParameters::init(&cfg, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let cfg = tiny_config();
        let model = ModelParameters::init(&cfg, 3).unwrap();
        let w = window(&cfg, 4);
        let a = predict_force(&model, &w).unwrap();
        let b = predict_force(&model, &w).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn swap_head_replaces_only_the_named_head() {
        let cfg = tiny_config();
        let before = ModelParameters::init(&cfg, 5).unwrap();
        let after = before.swap_head(Head::Force, 99);

        let old: std::collections::BTreeMap<String, Tensor> =
            before.named_tensors().into_iter().collect();
        for (name, tensor) in after.named_tensors() {
            if name.starts_with("force_head.") {
                assert_eq!(tensor.shape(), old[&name].shape());
            } else {
                assert_eq!(tensor, old[&name], "trunk tensor {name} changed");
            }
        }
        assert_ne!(after.params.force_head.w, before.params.force_head.w);

        // A fresh head changes the force output but not the pose output.
        let w = window(&cfg, 6);
        let pose = |m: &ModelParameters| {
            let mut tape = Tape::new();
            let bound = m.bind_frozen(&mut tape);
            let x = tape.constant(w.clone());
            let out = forward(&mut tape, &bound, x).unwrap();
            (
                tape.value(out.pose).clone(),
                tape.value(out.force).clone(),
            )
        };
        let (pose_a, force_a) = pose(&before);
        let (pose_b, force_b) = pose(&after);
        assert_eq!(pose_a, pose_b);
        assert_ne!(force_a, force_b);

        // Same seed redraws the same head; the swap is deterministic.
        assert_eq!(after, before.swap_head(Head::Force, 99));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = tiny_config();
        cfg.token_dim = 5; // not divisible by 2 heads
        assert!(matches!(
            ModelParameters::init(&cfg, 0),
            Err(ModelError::Config(_))
        ));
        let mut cfg = tiny_config();
        cfg.in_channels = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_config();
        cfg.frames = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn checkpoint_roundtrip_is_bitwise_exact() {
        let cfg = tiny_config();
        let model = ModelParameters::init(&cfg, 21).unwrap();
        let ckpt = Checkpoint {
            model,
            train_mean_mass_kg: 88.37,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&ckpt, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, ckpt);

        // Flip one payload byte: the checksum must catch it.
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        let bad_path = dir.path().join("corrupt.ckpt");
        std::fs::write(&bad_path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&bad_path),
            Err(ModelError::ChecksumMismatch)
        ));
    }

    #[test]
    fn spatial_encoder_is_joint_permutation_equivariant_without_positions() {
        // With the positional table zeroed, permuting the joints of a frame
        // permutes the per-joint blocks of the frame token.
        let cfg = tiny_config();
        let mut model = ModelParameters::init(&cfg, 5).unwrap();
        model.params.spatial_pos = Tensor::zeros(&[cfg.joints, cfg.token_dim]);

        let frame = Tensor::new(&[3, 2], vec![0.3, -0.1, 0.8, 0.5, -0.4, 0.2]).unwrap();
        let perm = [2usize, 0, 1];
        let mut permuted = vec![0.0; 6];
        for (new_row, &old_row) in perm.iter().enumerate() {
            permuted[new_row * 2..new_row * 2 + 2]
                .copy_from_slice(&frame.data()[old_row * 2..old_row * 2 + 2]);
        }
        let frame_p = Tensor::new(&[3, 2], permuted).unwrap();

        let encode_one = |input: &Tensor| -> Vec<f64> {
            let mut tape = Tape::new();
            let bound = model.bind_frozen(&mut tape);
            let x = tape.constant(input.clone());
            let tok = spatial_encode(&mut tape, &bound, x).unwrap();
            tape.value(tok).data().to_vec()
        };
        let base = encode_one(&frame);
        let moved = encode_one(&frame_p);
        let d = cfg.token_dim;
        for (new_row, &old_row) in perm.iter().enumerate() {
            for c in 0..d {
                let got = moved[new_row * d + c];
                let expect = base[old_row * d + c];
                assert!(
                    (got - expect).abs() < 1e-9,
                    "block {new_row} col {c}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn gradient_check_spot_targets() {
        // Finite differences through the whole network for two parameter
        // tensors: the temporal reducer and the force head weights.
        let cfg = tiny_config();
        let model = ModelParameters::init(&cfg, 7).unwrap();
        let w = window(&cfg, 8);

        for target in ["reducer", "force_head.w"] {
            let model = model.clone();
            let w = w.clone();
            let target_tensor = model
                .named_tensors()
                .into_iter()
                .find(|(n, _)| n == target)
                .map(|(_, t)| t)
                .unwrap();
            let f = move |tape: &mut Tape, vars: &[Var]| {
                let var = vars[0];
                // Bind everything else frozen, splice the varying tensor in.
                let mut bound = model.bind_frozen(tape);
                match target {
                    "reducer" => bound.params.reducer = var,
                    "force_head.w" => bound.params.force_head.w = var,
                    _ => unreachable!(),
                }
                let x = tape.constant(w.clone());
                let out = forward(tape, &bound, x)?;
                Ok(tape.mean_all(out.force))
            };
            let err = finite_difference_check(&f, &[target_tensor], 1e-5).unwrap();
            assert!(err < 1e-6, "{target}: max relative gradient error {err}");
        }
    }
}
