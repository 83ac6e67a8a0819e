//! Index-based Wengert tape.
//!
//! Forward ops append nodes and return [`Var`] handles; [`Tape::backward`]
//! sweeps the node list in reverse and accumulates gradients. All iteration
//! orders are fixed, so replaying the same op sequence on the same inputs is
//! bit-identical — the training loop and the end-to-end determinism checks
//! rely on that.

use super::{Tensor, TensorError};

/// Handle to a node on a [`Tape`]. Only valid for the tape that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// How a node was produced. Inputs are recorded as tape indices.
#[derive(Debug, Clone)]
pub enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    /// `[m, n] + [n]`, the bias pattern.
    AddRow(Var, Var),
    Scale(Var, f64),
    Matmul(Var, Var),
    Transpose(Var),
    Reshape(Var),
    ConcatRows(Vec<Var>),
    SliceCols(Var, usize, usize),
    Softmax(Var, usize),
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
    },
    Gelu(Var),
    Relu(Var),
    Sqrt(Var),
    SumAll(Var),
    MeanAll(Var),
    SumAxis(Var, usize),
    /// Weighted average over rows: `x: [f, d]`, `w: [f]` → `[1, d]`.
    Conv1dReduce(Var, Var),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

/// Records a computation so gradients can be pulled back through it.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Register a differentiable input (a parameter).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Register a non-differentiable input (data, targets, masks).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` target w.r.t. `v`. `None` if `v` does
    /// not require grad or no backward pass has run.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.nodes[v.0].grad.as_deref()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
            grad: None,
        });
        Var(self.nodes.len() - 1)
    }

    fn push_from(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let rg = inputs.iter().any(|v| self.nodes[v.0].requires_grad);
        self.push(value, op, rg)
    }

    // ── elementwise ──────────────────────────────────────────────────────

    fn zip_same_shape(
        &mut self,
        op_name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var, TensorError> {
        let (ta, tb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if ta.shape() != tb.shape() {
            return Err(TensorError::ShapeMismatch {
                op: op_name,
                lhs: ta.shape().to_vec(),
                rhs: tb.shape().to_vec(),
            });
        }
        let data: Vec<f64> = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let out = Tensor::new(ta.shape(), data)?;
        Ok(self.push_from(out, op, &[a, b]))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.zip_same_shape("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.zip_same_shape("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        self.zip_same_shape("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// Broadcast a rank-1 bias over every row of a matrix.
    pub fn add_row(&mut self, x: Var, bias: Var) -> Result<Var, TensorError> {
        let (tx, tb) = (&self.nodes[x.0].value, &self.nodes[bias.0].value);
        if tb.shape().len() != 1 || tb.cols() != tx.cols() {
            return Err(TensorError::ShapeMismatch {
                op: "add_row",
                lhs: tx.shape().to_vec(),
                rhs: tb.shape().to_vec(),
            });
        }
        let n = tx.cols();
        let data: Vec<f64> = tx
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| v + tb.data()[i % n])
            .collect();
        let out = Tensor::new(tx.shape(), data)?;
        Ok(self.push_from(out, Op::AddRow(x, bias), &[x, bias]))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let tx = &self.nodes[x.0].value;
        let out = Tensor {
            shape: tx.shape().to_vec(),
            data: tx.data().iter().map(|&v| v * c).collect(),
        };
        self.push_from(out, Op::Scale(x, c), &[x])
    }

    pub fn gelu(&mut self, x: Var) -> Var {
        let tx = &self.nodes[x.0].value;
        let out = Tensor {
            shape: tx.shape().to_vec(),
            data: tx.data().iter().map(|&v| gelu_fwd(v)).collect(),
        };
        self.push_from(out, Op::Gelu(x), &[x])
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let tx = &self.nodes[x.0].value;
        let out = Tensor {
            shape: tx.shape().to_vec(),
            data: tx.data().iter().map(|&v| v.max(0.0)).collect(),
        };
        self.push_from(out, Op::Relu(x), &[x])
    }

    /// Elementwise square root. The derivative blows up at 0, so callers that
    /// can hit exact zeros should add a small epsilon first.
    pub fn sqrt(&mut self, x: Var) -> Var {
        let tx = &self.nodes[x.0].value;
        let out = Tensor {
            shape: tx.shape().to_vec(),
            data: tx.data().iter().map(|&v| v.sqrt()).collect(),
        };
        self.push_from(out, Op::Sqrt(x), &[x])
    }

    // ── linear algebra ───────────────────────────────────────────────────

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        let (ta, tb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        if ta.shape().len() != 2 || tb.shape().len() != 2 || ta.cols() != tb.rows() {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: ta.shape().to_vec(),
                rhs: tb.shape().to_vec(),
            });
        }
        let (m, k, n) = (ta.rows(), ta.cols(), tb.cols());
        let out = matmul_raw(ta.data(), tb.data(), m, k, n);
        let out = Tensor::new(&[m, n], out)?;
        Ok(self.push_from(out, Op::Matmul(a, b), &[a, b]))
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        if tx.shape().len() != 2 {
            return Err(TensorError::BadShape {
                op: "transpose",
                expected: "a rank-2 tensor",
                got: tx.shape().to_vec(),
            });
        }
        let (m, n) = (tx.rows(), tx.cols());
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = tx.data()[i * n + j];
            }
        }
        let out = Tensor::new(&[n, m], data)?;
        Ok(self.push_from(out, Op::Transpose(x), &[x]))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        let out = Tensor::new(shape, tx.data().to_vec())?;
        Ok(self.push_from(out, Op::Reshape(x), &[x]))
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var, TensorError> {
        if parts.is_empty() {
            return Err(TensorError::Empty("concat_rows"));
        }
        let n = self.nodes[parts[0].0].value.cols();
        let mut rows = 0usize;
        let mut data = Vec::new();
        for &p in parts {
            let tp = &self.nodes[p.0].value;
            if tp.cols() != n {
                return Err(TensorError::ShapeMismatch {
                    op: "concat_rows",
                    lhs: vec![rows, n],
                    rhs: tp.shape().to_vec(),
                });
            }
            rows += tp.rows();
            data.extend_from_slice(tp.data());
        }
        let out = Tensor::new(&[rows, n], data)?;
        Ok(self.push_from(out, Op::ConcatRows(parts.to_vec()), parts))
    }

    /// Columns `[start, start + len)` of a matrix.
    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        if tx.shape().len() != 2 || start + len > tx.cols() {
            return Err(TensorError::BadShape {
                op: "slice_cols",
                expected: "a rank-2 tensor wide enough for the slice",
                got: tx.shape().to_vec(),
            });
        }
        let (m, n) = (tx.rows(), tx.cols());
        let mut data = Vec::with_capacity(m * len);
        for i in 0..m {
            data.extend_from_slice(&tx.data()[i * n + start..i * n + start + len]);
        }
        let out = Tensor::new(&[m, len], data)?;
        Ok(self.push_from(out, Op::SliceCols(x, start, len), &[x]))
    }

    // ── structured nonlinearities ────────────────────────────────────────

    /// Softmax along `axis` of a rank-2 tensor (0 = down columns, 1 = along rows).
    /// Shift-by-max keeps it finite for any finite input.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        if tx.shape().len() != 2 || axis > 1 {
            return Err(TensorError::BadAxis {
                axis,
                shape: tx.shape().to_vec(),
            });
        }
        let (m, n) = (tx.rows(), tx.cols());
        let mut data = vec![0.0; m * n];
        for_each_lane(m, n, axis, |lane| {
            let max = lane
                .iter()
                .map(|&i| tx.data()[i])
                .fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for &i in lane {
                let e = (tx.data()[i] - max).exp();
                data[i] = e;
                denom += e;
            }
            for &i in lane {
                data[i] /= denom;
            }
        });
        let out = Tensor::new(&[m, n], data)?;
        Ok(self.push_from(out, Op::Softmax(x, axis), &[x]))
    }

    /// Layer normalization over the last dimension, with a learned affine map:
    /// `y = gamma * (x - mean) / sqrt(var + eps) + beta` per row.
    pub fn layer_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        eps: f64,
    ) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        let (m, n) = (tx.rows(), tx.cols());
        for (name, v) in [("gamma", gamma), ("beta", beta)] {
            let t = &self.nodes[v.0].value;
            if t.shape() != [n] {
                return Err(TensorError::ShapeMismatch {
                    op: if name == "gamma" {
                        "layer_norm gamma"
                    } else {
                        "layer_norm beta"
                    },
                    lhs: tx.shape().to_vec(),
                    rhs: t.shape().to_vec(),
                });
            }
        }
        let mut data = vec![0.0; m * n];
        for r in 0..m {
            let row = &tx.data()[r * n..(r + 1) * n];
            let (mean, inv_std) = row_moments(row, eps);
            for j in 0..n {
                let xhat = (row[j] - mean) * inv_std;
                data[r * n + j] =
                    self.nodes[gamma.0].value.data()[j] * xhat + self.nodes[beta.0].value.data()[j];
            }
        }
        let out = Tensor::new(tx.shape(), data)?;
        Ok(self.push_from(out, Op::LayerNorm { x, gamma, beta, eps }, &[x, gamma, beta]))
    }

    // ── reductions ───────────────────────────────────────────────────────

    pub fn sum_all(&mut self, x: Var) -> Var {
        let s: f64 = self.nodes[x.0].value.data().iter().sum();
        self.push_from(Tensor::scalar(s), Op::SumAll(x), &[x])
    }

    pub fn mean_all(&mut self, x: Var) -> Var {
        let t = &self.nodes[x.0].value;
        let s: f64 = t.data().iter().sum();
        let n = t.numel() as f64;
        self.push_from(Tensor::scalar(s / n), Op::MeanAll(x), &[x])
    }

    /// Sum a rank-2 tensor along `axis`; the result is rank 1.
    pub fn sum_axis(&mut self, x: Var, axis: usize) -> Result<Var, TensorError> {
        let tx = &self.nodes[x.0].value;
        if tx.shape().len() != 2 || axis > 1 {
            return Err(TensorError::BadAxis {
                axis,
                shape: tx.shape().to_vec(),
            });
        }
        let (m, n) = (tx.rows(), tx.cols());
        let out_len = if axis == 0 { n } else { m };
        let mut data = vec![0.0; out_len];
        for i in 0..m {
            for j in 0..n {
                let o = if axis == 0 { j } else { i };
                data[o] += tx.data()[i * n + j];
            }
        }
        let out = Tensor::new(&[out_len], data)?;
        Ok(self.push_from(out, Op::SumAxis(x, axis), &[x]))
    }

    /// Learned weighted average over the frame axis: `x: [f, d]`, `w: [f]` → `[1, d]`.
    /// With `w = 1/f` this is a plain temporal mean; training shapes the weights.
    pub fn conv1d_reduce(&mut self, x: Var, w: Var) -> Result<Var, TensorError> {
        let (tx, tw) = (&self.nodes[x.0].value, &self.nodes[w.0].value);
        if tx.shape().len() != 2 || tw.shape() != [tx.rows()] {
            return Err(TensorError::ShapeMismatch {
                op: "conv1d_reduce",
                lhs: tx.shape().to_vec(),
                rhs: tw.shape().to_vec(),
            });
        }
        let (f, d) = (tx.rows(), tx.cols());
        let mut data = vec![0.0; d];
        for t in 0..f {
            let wt = tw.data()[t];
            for j in 0..d {
                data[j] += wt * tx.data()[t * d + j];
            }
        }
        let out = Tensor::new(&[1, d], data)?;
        Ok(self.push_from(out, Op::Conv1dReduce(x, w), &[x, w]))
    }

    // ── backward ─────────────────────────────────────────────────────────

    /// Reverse sweep from a scalar node. Gradients of earlier backward passes
    /// on the same tape are cleared first.
    pub fn backward(&mut self, loss: Var) -> Result<(), TensorError> {
        if self.nodes[loss.0].value.numel() != 1 {
            return Err(TensorError::NotScalar(
                self.nodes[loss.0].value.shape().to_vec(),
            ));
        }
        for node in &mut self.nodes {
            node.grad = if node.requires_grad {
                Some(vec![0.0; node.value.numel()])
            } else {
                None
            };
        }
        if !self.nodes[loss.0].requires_grad {
            return Ok(()); // constant loss: every gradient is zero
        }
        self.nodes[loss.0].grad.as_mut().unwrap()[0] = 1.0;

        for i in (0..=loss.0).rev() {
            if self.nodes[i].grad.is_none() {
                continue;
            }
            let g = self.nodes[i].grad.clone().unwrap();
            let op = self.nodes[i].op.clone();
            self.backprop_node(i, &g, &op);
        }
        Ok(())
    }

    fn accumulate(&mut self, v: Var, contrib: impl Fn(usize) -> f64) {
        if let Some(grad) = self.nodes[v.0].grad.as_mut() {
            for (k, g) in grad.iter_mut().enumerate() {
                *g += contrib(k);
            }
        }
    }

    fn backprop_node(&mut self, idx: usize, g: &[f64], op: &Op) {
        match *op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.accumulate(a, |k| g[k]);
                self.accumulate(b, |k| g[k]);
            }
            Op::Sub(a, b) => {
                self.accumulate(a, |k| g[k]);
                self.accumulate(b, |k| -g[k]);
            }
            Op::Mul(a, b) => {
                let (da, db): (Vec<f64>, Vec<f64>) = {
                    let ta = self.nodes[a.0].value.data();
                    let tb = self.nodes[b.0].value.data();
                    (
                        g.iter().zip(tb).map(|(&gk, &bk)| gk * bk).collect(),
                        g.iter().zip(ta).map(|(&gk, &ak)| gk * ak).collect(),
                    )
                };
                self.accumulate(a, |k| da[k]);
                self.accumulate(b, |k| db[k]);
            }
            Op::AddRow(x, bias) => {
                let n = self.nodes[bias.0].value.numel();
                self.accumulate(x, |k| g[k]);
                let mut db = vec![0.0; n];
                for (k, &gk) in g.iter().enumerate() {
                    db[k % n] += gk;
                }
                self.accumulate(bias, |k| db[k]);
            }
            Op::Scale(x, c) => {
                self.accumulate(x, |k| c * g[k]);
            }
            Op::Matmul(a, b) => {
                let (m, k_dim) = {
                    let ta = &self.nodes[a.0].value;
                    (ta.rows(), ta.cols())
                };
                let n = self.nodes[b.0].value.cols();
                // dA = G · Bᵀ, dB = Aᵀ · G
                let da = {
                    let tb = self.nodes[b.0].value.data();
                    let mut da = vec![0.0; m * k_dim];
                    for i in 0..m {
                        for p in 0..k_dim {
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += g[i * n + j] * tb[p * n + j];
                            }
                            da[i * k_dim + p] = acc;
                        }
                    }
                    da
                };
                let db = {
                    let ta = self.nodes[a.0].value.data();
                    let mut db = vec![0.0; k_dim * n];
                    for p in 0..k_dim {
                        for j in 0..n {
                            let mut acc = 0.0;
                            for i in 0..m {
                                acc += ta[i * k_dim + p] * g[i * n + j];
                            }
                            db[p * n + j] = acc;
                        }
                    }
                    db
                };
                self.accumulate(a, |k| da[k]);
                self.accumulate(b, |k| db[k]);
            }
            Op::Transpose(x) => {
                let (m, n) = {
                    let tx = &self.nodes[x.0].value;
                    (tx.rows(), tx.cols())
                };
                // out is [n, m]; g[j * m + i] feeds x[i * n + j]
                self.accumulate(x, |k| {
                    let (i, j) = (k / n, k % n);
                    g[j * m + i]
                });
            }
            Op::Reshape(x) => {
                self.accumulate(x, |k| g[k]);
            }
            Op::ConcatRows(ref parts) => {
                let mut offset = 0usize;
                for &p in parts {
                    let len = self.nodes[p.0].value.numel();
                    let base = offset;
                    self.accumulate(p, |k| g[base + k]);
                    offset += len;
                }
            }
            Op::SliceCols(x, start, len) => {
                let n = self.nodes[x.0].value.cols();
                self.accumulate(x, |k| {
                    let (i, j) = (k / n, k % n);
                    if j >= start && j < start + len {
                        g[i * len + (j - start)]
                    } else {
                        0.0
                    }
                });
            }
            Op::Softmax(x, axis) => {
                let (m, n, y) = {
                    let ty = &self.nodes[idx].value;
                    (ty.rows(), ty.cols(), ty.data().to_vec())
                };
                let mut dx = vec![0.0; m * n];
                for_each_lane(m, n, axis, |lane| {
                    let dot: f64 = lane.iter().map(|&i| g[i] * y[i]).sum();
                    for &i in lane {
                        dx[i] = y[i] * (g[i] - dot);
                    }
                });
                self.accumulate(x, |k| dx[k]);
            }
            Op::LayerNorm { x, gamma, beta, eps } => {
                let (m, n) = {
                    let tx = &self.nodes[x.0].value;
                    (tx.rows(), tx.cols())
                };
                let mut dx = vec![0.0; m * n];
                let mut dgamma = vec![0.0; n];
                let mut dbeta = vec![0.0; n];
                {
                    let tx = self.nodes[x.0].value.data();
                    let tg = self.nodes[gamma.0].value.data();
                    for r in 0..m {
                        let row = &tx[r * n..(r + 1) * n];
                        let (mean, inv_std) = row_moments(row, eps);
                        let mut mean_h = 0.0;
                        let mut mean_hx = 0.0;
                        for j in 0..n {
                            let xhat = (row[j] - mean) * inv_std;
                            let h = g[r * n + j] * tg[j];
                            mean_h += h;
                            mean_hx += h * xhat;
                            dgamma[j] += g[r * n + j] * xhat;
                            dbeta[j] += g[r * n + j];
                        }
                        mean_h /= n as f64;
                        mean_hx /= n as f64;
                        for j in 0..n {
                            let xhat = (row[j] - mean) * inv_std;
                            let h = g[r * n + j] * tg[j];
                            dx[r * n + j] = inv_std * (h - mean_h - xhat * mean_hx);
                        }
                    }
                }
                self.accumulate(x, |k| dx[k]);
                self.accumulate(gamma, |k| dgamma[k]);
                self.accumulate(beta, |k| dbeta[k]);
            }
            Op::Gelu(x) => {
                let dx: Vec<f64> = self.nodes[x.0]
                    .value
                    .data()
                    .iter()
                    .zip(g)
                    .map(|(&v, &gk)| gk * gelu_grad(v))
                    .collect();
                self.accumulate(x, |k| dx[k]);
            }
            Op::Relu(x) => {
                let dx: Vec<f64> = self.nodes[x.0]
                    .value
                    .data()
                    .iter()
                    .zip(g)
                    .map(|(&v, &gk)| if v > 0.0 { gk } else { 0.0 })
                    .collect();
                self.accumulate(x, |k| dx[k]);
            }
            Op::Sqrt(x) => {
                let y = self.nodes[idx].value.data().to_vec();
                self.accumulate(x, |k| g[k] * 0.5 / y[k]);
            }
            Op::SumAll(x) => {
                self.accumulate(x, |_| g[0]);
            }
            Op::MeanAll(x) => {
                let n = self.nodes[x.0].value.numel() as f64;
                self.accumulate(x, |_| g[0] / n);
            }
            Op::SumAxis(x, axis) => {
                let n = self.nodes[x.0].value.cols();
                self.accumulate(x, |k| {
                    let (i, j) = (k / n, k % n);
                    if axis == 0 {
                        g[j]
                    } else {
                        g[i]
                    }
                });
            }
            Op::Conv1dReduce(x, w) => {
                let d = self.nodes[x.0].value.cols();
                let f = self.nodes[x.0].value.rows();
                let tw = self.nodes[w.0].value.data().to_vec();
                self.accumulate(x, |k| {
                    let t = k / d;
                    tw[t] * g[k % d]
                });
                let dw: Vec<f64> = {
                    let tx = self.nodes[x.0].value.data();
                    (0..f)
                        .map(|t| (0..d).map(|j| g[j] * tx[t * d + j]).sum())
                        .collect()
                };
                self.accumulate(w, |k| dw[k]);
            }
        }
    }
}

/// Single-head scaled dot-product attention: `softmax(Q Kᵀ / sqrt(dₖ)) V`.
pub fn scaled_dot_attention(tape: &mut Tape, q: Var, k: Var, v: Var) -> Result<Var, TensorError> {
    let dk = tape.value(k).cols();
    let kt = tape.transpose(k)?;
    let scores = tape.matmul(q, kt)?;
    let scaled = tape.scale(scores, 1.0 / (dk as f64).sqrt());
    let attn = tape.softmax(scaled, 1)?;
    tape.matmul(attn, v)
}

fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for p in 0..k {
            let av = a[i * k + p];
            for j in 0..n {
                out[i * n + j] += av * b[p * n + j];
            }
        }
    }
    out
}

fn row_moments(row: &[f64], eps: f64) -> (f64, f64) {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, 1.0 / (var + eps).sqrt())
}

/// Visit each 1-D lane of an `m x n` matrix along `axis`, passing flat indices.
fn for_each_lane(m: usize, n: usize, axis: usize, mut f: impl FnMut(&[usize])) {
    if axis == 1 {
        for i in 0..m {
            let lane: Vec<usize> = (0..n).map(|j| i * n + j).collect();
            f(&lane);
        }
    } else {
        for j in 0..n {
            let lane: Vec<usize> = (0..m).map(|i| i * n + j).collect();
            f(&lane);
        }
    }
}

fn gelu_fwd(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}
