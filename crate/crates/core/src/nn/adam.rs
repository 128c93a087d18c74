use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::params::ModelParams;
use super::tape::{Gradients, Tensor};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Bias-corrected Adam with a stepwise exponential learning-rate decay.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizerState {
    pub step: u64,
    pub base_lr: f64,
    pub decay: f64,
    pub decay_every: u64,
    #[serde(skip)]
    first: BTreeMap<String, Tensor>,
    #[serde(skip)]
    second: BTreeMap<String, Tensor>,
}

impl OptimizerState {
    /// Decay of 0.97 every 1000 steps.
    pub fn new(base_lr: f64) -> Self {
        Self::with_schedule(base_lr, 0.97, 1000)
    }

    pub fn with_schedule(base_lr: f64, decay: f64, decay_every: u64) -> Self {
        OptimizerState {
            step: 0,
            base_lr,
            decay,
            decay_every: decay_every.max(1),
            first: BTreeMap::new(),
            second: BTreeMap::new(),
        }
    }

    /// Learning rate used by the update at `step`.
    pub fn lr_at(&self, step: u64) -> f64 {
        self.base_lr * self.decay.powi((step / self.decay_every) as i32)
    }

    pub fn current_lr(&self) -> f64 {
        self.lr_at(self.step)
    }

    /// One update of every model; all gradients are checked before any
    /// parameter is touched.
    pub fn step_models(&mut self, models: &mut [&mut ModelParams], grads: &Gradients) -> Result<()> {
        for m in models.iter() {
            let prefix = m.prefix();
            for (slot, value) in m.slots() {
                if let Some(g) = grads.get(&format!("{prefix}{slot}")) {
                    if g.shape() != value.shape() {
                        return Err(Error::DimensionMismatch(format!(
                            "gradient for `{prefix}{slot}` has shape {:?}, parameter {:?}",
                            g.shape(),
                            value.shape()
                        )));
                    }
                    if !g.is_finite() {
                        return Err(Error::NonFiniteGradient {
                            slot: format!("{prefix}{slot}"),
                        });
                    }
                }
            }
        }
        let lr = self.current_lr();
        let t = (self.step + 1) as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        for m in models.iter_mut() {
            let prefix = m.prefix();
            for (slot, value) in m.slots_mut() {
                let key = format!("{prefix}{slot}");
                let Some(g) = grads.get(&key) else { continue };
                let (r, c) = value.shape();
                let m1 = self.first.entry(key.clone()).or_insert_with(|| Matrix::zeros(r, c));
                let m2 = self.second.entry(key).or_insert_with(|| Matrix::zeros(r, c));
                let it = value
                    .data_mut()
                    .iter_mut()
                    .zip(g.data())
                    .zip(m1.data_mut().iter_mut().zip(m2.data_mut().iter_mut()));
                for ((theta, gv), (a, b)) in it {
                    *a = ADAM_BETA1 * *a + (1.0 - ADAM_BETA1) * gv;
                    *b = ADAM_BETA2 * *b + (1.0 - ADAM_BETA2) * gv * gv;
                    let mhat = *a / c1;
                    let vhat = *b / c2;
                    *theta -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
                }
            }
        }
        self.step += 1;
        Ok(())
    }
}

/// Single-model convenience wrapper.
pub fn adam_step(state: &mut OptimizerState, params: &mut ModelParams, grads: &Gradients) -> Result<()> {
    state.step_models(&mut [params], grads)
}
