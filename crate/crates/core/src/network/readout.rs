//! Non-firing leaky-integrator readout and the softmax-then-sum decoder.

use ndarray::{Array1, Array2, Array3, Axis};

use super::dense::DenseLayer;
use super::param::{Param, ParamGroup};
use crate::error::{Error, Result};
use crate::numerics::{log_uniform_sample, Rng};

/// Dense projection onto the classes followed by a leaky integrator with
/// `α = exp(−exp(λ_log))`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiReadout {
    pub dense: DenseLayer,
    pub lambda_log: Param,
}

/// Membrane trajectory `[batch, time + 1, classes]`, slot 0 is the zero state.
#[derive(Clone, Debug)]
pub struct LiSaved {
    pub currents: Array3<f64>,
    pub u: Array3<f64>,
}

pub fn li_decay(lambda_log: f64) -> f64 {
    (-lambda_log.exp()).exp()
}

impl LiReadout {
    /// Decays drawn with `λ` log-uniform in `[1/25, 1/5]`.
    pub fn init(name: &str, rng: &mut Rng, inputs: usize, classes: usize) -> Result<Self> {
        let dense = DenseLayer::init(name, rng, inputs, classes);
        let lambda = (0..classes)
            .map(|_| log_uniform_sample(rng, 1.0 / 25.0, 1.0 / 5.0).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dense,
            lambda_log: Param::vector(format!("{name}.lambda_log"), ParamGroup::Neuron, lambda),
        })
    }

    pub fn classes(&self) -> usize {
        self.dense.outputs()
    }

    pub fn alphas(&self) -> Array1<f64> {
        self.lambda_log.slice().iter().map(|&l| li_decay(l)).collect()
    }

    /// Integrates `currents` (`[batch, time, classes]`) into logits.
    pub fn integrate(&self, currents: &Array3<f64>) -> Result<(Array3<f64>, Array3<f64>)> {
        li_integrate(currents, self.alphas().as_slice().expect("contiguous"))
    }

    /// Returns `dL/dcurrents` and `dL/dλ_log`.
    pub fn integrate_backward(&self, saved: &LiSaved, dlogits: &Array3<f64>) -> (Array3<f64>, Vec<f64>) {
        let alphas = self.alphas();
        let (bsz, t_len, c) = dlogits.dim();
        let mut dcur = Array3::zeros((bsz, t_len, c));
        let mut galpha = vec![0.0; c];
        for b in 0..bsz {
            for k in 0..c {
                let a = alphas[k];
                let mut ubar = 0.0;
                for t in (0..t_len).rev() {
                    ubar += dlogits[[b, t, k]];
                    dcur[[b, t, k]] = (1.0 - a) * ubar;
                    galpha[k] += ubar * (saved.u[[b, t, k]] - saved.currents[[b, t, k]]);
                    ubar *= a;
                }
            }
        }
        let glambda = galpha
            .iter()
            .zip(self.lambda_log.slice())
            .zip(alphas.iter())
            .map(|((g, &l), &a)| g * (-a * l.exp()))
            .collect();
        (dcur, glambda)
    }
}

/// `u_t = α u_{t−1} + (1 − α) I_t` from a zero state, per class.
/// Returns the logits and the full trajectory with the initial slot.
pub fn li_integrate(currents: &Array3<f64>, alphas: &[f64]) -> Result<(Array3<f64>, Array3<f64>)> {
    let (bsz, t_len, c) = currents.dim();
    if alphas.len() != c {
        return Err(Error::Shape(format!("readout has {} decays, currents have {c} classes", alphas.len())));
    }
    let mut u = Array3::zeros((bsz, t_len + 1, c));
    for b in 0..bsz {
        for t in 0..t_len {
            for k in 0..c {
                let a = alphas[k];
                u[[b, t + 1, k]] = a * u[[b, t, k]] + (1.0 - a) * currents[[b, t, k]];
            }
        }
    }
    let logits = u.slice(ndarray::s![.., 1.., ..]).to_owned();
    Ok((logits, u))
}

/// Per-timestep softmax over classes, summed over time: `batch × classes`.
pub fn softmax_sum(logits: &Array3<f64>) -> Array2<f64> {
    let (bsz, _, c) = logits.dim();
    let mut out = Array2::zeros((bsz, c));
    for (b, sample) in logits.axis_iter(Axis(0)).enumerate() {
        for row in sample.axis_iter(Axis(0)) {
            let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            let e: Vec<f64> = row.iter().map(|&v| (v - m).exp()).collect();
            let z: f64 = e.iter().sum();
            for k in 0..c {
                out[[b, k]] += e[k] / z;
            }
        }
    }
    out
}

/// Reverse of [`softmax_sum`]: `dL/dlogits` from `dL/dscores`.
pub fn softmax_sum_backward(logits: &Array3<f64>, dscores: &Array2<f64>) -> Array3<f64> {
    let (bsz, t_len, c) = logits.dim();
    let mut d = Array3::zeros((bsz, t_len, c));
    for b in 0..bsz {
        for t in 0..t_len {
            let row = logits.slice(ndarray::s![b, t, ..]);
            let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            let e: Vec<f64> = row.iter().map(|&v| (v - m).exp()).collect();
            let z: f64 = e.iter().sum();
            let p: Vec<f64> = e.iter().map(|v| v / z).collect();
            let dot: f64 = (0..c).map(|k| p[k] * dscores[[b, k]]).sum();
            for k in 0..c {
                d[[b, t, k]] = p[k] * (dscores[[b, k]] - dot);
            }
        }
    }
    d
}
