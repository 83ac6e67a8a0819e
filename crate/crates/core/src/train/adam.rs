//! Adam with bias correction, one moment slot per parameter tensor.

use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 4e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Optimizer state across steps. Slots are positional: callers must present
/// tensors in the same order every step (the model's fixed traversal order).
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    step: u64,
    slots: Vec<Slot>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, sizes: &[usize]) -> Adam {
        Adam {
            cfg,
            step: 0,
            slots: sizes
                .iter()
                .map(|&n| Slot {
                    m: vec![0.0; n],
                    v: vec![0.0; n],
                })
                .collect(),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.cfg.lr = lr;
    }

    pub fn lr(&self) -> f64 {
        self.cfg.lr
    }

    /// One update over all tensors. `grads[i]` of `None` means no gradient
    /// flowed to tensor `i` this step; it is treated as a zero gradient, so a
    /// branch that never receives gradients keeps its parameters bit-stable.
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Option<&[f64]>]) {
        assert_eq!(params.len(), self.slots.len(), "tensor count changed");
        assert_eq!(grads.len(), self.slots.len(), "gradient count changed");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.cfg.beta1.powi(t);
        let bc2 = 1.0 - self.cfg.beta2.powi(t);
        for ((tensor, slot), grad) in params.iter_mut().zip(&mut self.slots).zip(grads) {
            let data = tensor.data_mut();
            for i in 0..data.len() {
                let g = grad.map(|g| g[i]).unwrap_or(0.0);
                slot.m[i] = self.cfg.beta1 * slot.m[i] + (1.0 - self.cfg.beta1) * g;
                slot.v[i] = self.cfg.beta2 * slot.v[i] + (1.0 - self.cfg.beta2) * g * g;
                let m_hat = slot.m[i] / bc1;
                let v_hat = slot.v[i] / bc2;
                data[i] -= self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
            }
        }
    }
}
