//! Central-difference verification of tape gradients.

use rand::Rng;

use crate::error::Result;

use super::params::ModelParams;
use super::tape::{Tape, Var};

#[derive(Clone, Debug)]
pub struct GradCheckEntry {
    pub slot: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradCheckEntry {
    /// `|a − n| / max(|a|, |n|)`, or the absolute gap when both are tiny.
    pub fn rel_error(&self) -> f64 {
        let gap = (self.analytic - self.numeric).abs();
        let scale = self.analytic.abs().max(self.numeric.abs());
        if scale < 1e-9 {
            gap
        } else {
            gap / scale
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_error()).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error() <= tol
    }
}

/// Compares backward against central differences on `coords` randomly
/// chosen parameter entries. `loss` must build a scalar on the given tape.
pub fn gradient_check<F>(
    models: &[ModelParams],
    loss: F,
    coords: usize,
    step: f64,
    rng: &mut impl Rng,
) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[ModelParams]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let root = loss(&mut tape, models)?;
    let grads = tape.backward(root)?;

    let mut entries = Vec::with_capacity(coords);
    for _ in 0..coords {
        let mi = rng.gen_range(0..models.len());
        let slots: Vec<&String> = models[mi].slots().keys().collect();
        let slot = slots[rng.gen_range(0..slots.len())].clone();
        let len = models[mi].get(&slot).expect("slot exists").data().len();
        let index = rng.gen_range(0..len);

        let eval = |delta: f64| -> Result<f64> {
            let mut perturbed = models.to_vec();
            perturbed[mi].get_mut(&slot).expect("slot exists").data_mut()[index] += delta;
            let mut t = Tape::new();
            let r = loss(&mut t, &perturbed)?;
            Ok(t.scalar(r))
        };
        let numeric = (eval(step)? - eval(-step)?) / (2.0 * step);
        let key = format!("{}{}", models[mi].prefix(), slot);
        let analytic = grads.get(&key).map(|g| g.data()[index]).unwrap_or(0.0);
        entries.push(GradCheckEntry {
            slot: key,
            index,
            analytic,
            numeric,
        });
    }
    Ok(GradCheckReport { entries })
}
