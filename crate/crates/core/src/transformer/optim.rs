use super::config::ModelConfig;
use super::model::{backward_with, Batch, Mode};
use super::params::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-9,
        }
    }
}

/// First and second moment estimates plus the step counter used for bias
/// correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Parameters,
    pub v: Parameters,
}

impl AdamState {
    pub fn new(params: &Parameters) -> Self {
        AdamState {
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    /// Applies one bias-corrected Adam update with precomputed gradients.
    pub fn apply(&mut self, params: &mut Parameters, grads: &Parameters, hyper: AdamHyper) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - hyper.beta1.powi(t);
        let c2 = 1.0 - hyper.beta2.powi(t);
        for (name, p) in params.iter_mut() {
            let g = grads.slice(name);
            let m = self.m.slice_mut(name);
            for (mi, &gi) in m.iter_mut().zip(g) {
                *mi = hyper.beta1 * *mi + (1.0 - hyper.beta1) * gi;
            }
            let v = self.v.slice_mut(name);
            for (vi, &gi) in v.iter_mut().zip(g) {
                *vi = hyper.beta2 * *vi + (1.0 - hyper.beta2) * gi * gi;
            }
            let m = self.m.slice(name);
            let v = self.v.slice(name);
            for ((pi, &mi), &vi) in p.data_mut().iter_mut().zip(m).zip(v) {
                let mhat = mi / c1;
                let vhat = vi / c2;
                *pi -= hyper.lr * mhat / (vhat.sqrt() + hyper.eps);
            }
        }
    }
}

/// One optimisation step on `batch`. Returns the batch loss measured
/// before the update. A non-finite loss or gradient aborts without
/// touching the parameters.
pub fn train_step(
    batch: &Batch,
    params: &mut Parameters,
    state: &mut AdamState,
    hyper: AdamHyper,
    config: &ModelConfig,
    mode: Mode<'_>,
) -> Result<f64> {
    let g = backward_with(batch, params, config, mode, 1.0)?;
    if !g.loss.is_finite() {
        return Err(Error::Training(format!(
            "non-finite loss {} at optimizer step {}",
            g.loss,
            state.step + 1
        )));
    }
    if let Some((name, _)) = g.grads.iter().find(|(_, t)| !t.is_finite()) {
        return Err(Error::Training(format!(
            "non-finite gradient in {name} at optimizer step {} (loss {})",
            state.step + 1,
            g.loss
        )));
    }
    state.apply(params, &g.grads, hyper);
    Ok(g.loss)
}
