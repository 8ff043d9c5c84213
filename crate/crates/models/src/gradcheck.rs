//! Central-difference check of the analytic training gradient.

use crate::model::{Model, ModelError};
use qcgen_core::CircuitDag;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub max_rel_err: f64,
    /// (tensor name, index, analytic, numeric) at the worst entry.
    pub worst: Option<(String, usize, f64, f64)>,
}

/// Compares every parameter's analytic gradient of `structural + beta * kld`
/// (fixed noise `eps`) with `(f(x+h) − f(x−h)) / 2h`.
///
/// The relative error is `|a − n| / max(|a|, |n|, floor)`; the floor keeps
/// entries that are zero up to rounding from dominating.
pub fn check_gradients(
    model: &mut Model,
    dag: &CircuitDag,
    eps: &[f64],
    beta: f64,
    h: f64,
    floor: f64,
) -> Result<GradCheck, ModelError> {
    let mut grads = model.params().zero_grads();
    {
        let mut tape = model.tape();
        let parts = model.loss_on(&mut tape, dag, eps, beta)?;
        tape.backward(parts.total, &mut grads);
    }
    let eval = |m: &Model| -> Result<f64, ModelError> {
        let mut tape = m.tape();
        let parts = m.loss_on(&mut tape, dag, eps, beta)?;
        Ok(tape.scalar(parts.total))
    };
    let ids: Vec<_> = model.params().ids().collect();
    let mut out = GradCheck {
        checked: 0,
        max_rel_err: 0.0,
        worst: None,
    };
    for id in ids {
        for k in 0..model.params().data(id).len() {
            let orig = model.params().data(id)[k];
            model.params_mut().data_mut(id)[k] = orig + h;
            let up = eval(model)?;
            model.params_mut().data_mut(id)[k] = orig - h;
            let down = eval(model)?;
            model.params_mut().data_mut(id)[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grads.get(id)[k];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            out.checked += 1;
            if rel > out.max_rel_err {
                out.max_rel_err = rel;
                out.worst = Some((model.params().tensor(id).name.clone(), k, analytic, numeric));
            }
        }
    }
    Ok(out)
}
