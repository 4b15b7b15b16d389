//! Central finite-difference check of the reverse pass.

use ndarray::Array3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Mode, Network};
use crate::numerics::Rng;

/// Denominator floor for the relative error, so entries whose true gradient
/// is zero are judged by absolute error instead.
pub const REL_ERR_FLOOR: f64 = 1e-8;

/// One scalar entry of a named parameter tensor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamProbe {
    pub name: String,
    pub index: usize,
}

impl ParamProbe {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        Self {
            name: name.into(),
            index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub probe: ParamProbe,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub h: f64,
    pub results: Vec<ProbeResult>,
    pub max_rel_err: f64,
}

/// `|a − n| / max(|a|, |n|, floor)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

/// `½ · mean_b Σ_{t,c} y²` and its gradient.
pub fn quadratic_loss(logits: &Array3<f64>) -> (f64, Array3<f64>) {
    let b = logits.dim().0.max(1) as f64;
    let loss = 0.5 * logits.iter().map(|v| v * v).sum::<f64>() / b;
    (loss, logits / b)
}

/// Evenly spaced probes across every trainable tensor, `per_tensor` each.
pub fn spread_probes(net: &Network, per_tensor: usize) -> Vec<ParamProbe> {
    let mut out = Vec::new();
    for p in net.params() {
        let n = p.len();
        let k = per_tensor.min(n);
        for j in 0..k {
            out.push(ParamProbe::new(p.name.clone(), j * n / k.max(1)));
        }
    }
    out
}

/// Compares reverse-mode gradients with central differences of the
/// quadratic loss. The network should run with θ = +∞ or the relaxed spike
/// so that the forward pass is differentiable.
pub fn finite_difference_check(
    net: &Network,
    x: &Array3<f64>,
    probes: &[ParamProbe],
    h: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    finite_difference_check_with(net, x, probes, h, seed, &quadratic_loss)
}

/// Loss value and `dL/dlogits` for a batch of logits.
pub type LossFn = dyn Fn(&Array3<f64>) -> (f64, Array3<f64>);

/// As [`finite_difference_check`] with a caller-supplied loss returning its
/// value and `dL/dlogits`.
pub fn finite_difference_check_with(
    net: &Network,
    x: &Array3<f64>,
    probes: &[ParamProbe],
    h: f64,
    seed: u64,
    loss: &LossFn,
) -> Result<GradCheckReport> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Argument(format!("finite-difference step must be positive, got {h}")));
    }
    for p in probes {
        if p.name == "theta" || p.name.ends_with(".theta") {
            return Err(Error::Argument(format!(
                "`{}`: the spiking threshold is a fixed constant and has no gradient",
                p.name
            )));
        }
        let param = net
            .param(&p.name)
            .ok_or_else(|| Error::Argument(format!("no trainable parameter named `{}`", p.name)))?;
        if p.index >= param.len() {
            return Err(Error::Argument(format!(
                "index {} out of range for `{}` ({} entries)",
                p.index,
                p.name,
                param.len()
            )));
        }
    }
    let eval = |n: &Network| -> Result<f64> {
        let out = n.forward(x, Mode::Train, &mut Rng::new(seed, 0))?;
        Ok(loss(&out.logits).0)
    };
    let out = net.forward(x, Mode::Train, &mut Rng::new(seed, 0))?;
    let (_, dlogits) = loss(&out.logits);
    let mut tape = out.tape.expect("training forward records a tape");
    let grads = tape.backward(net, &dlogits)?;

    let mut work = net.clone();
    let mut results = Vec::with_capacity(probes.len());
    for p in probes {
        let analytic = grads.get(&p.name).expect("checked above").as_slice().expect("contiguous")[p.index];
        let orig = work.param(&p.name).expect("checked above").slice()[p.index];
        work.param_mut(&p.name).expect("checked").slice_mut()[p.index] = orig + h;
        let lp = eval(&work)?;
        work.param_mut(&p.name).expect("checked").slice_mut()[p.index] = orig - h;
        let lm = eval(&work)?;
        work.param_mut(&p.name).expect("checked").slice_mut()[p.index] = orig;
        let numeric = (lp - lm) / (2.0 * h);
        results.push(ProbeResult {
            probe: p.clone(),
            analytic,
            numeric,
            rel_err: relative_error(analytic, numeric),
        });
    }
    let max_rel_err = results.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(GradCheckReport { h, results, max_rel_err })
}
