use log::debug;
use serde::{Deserialize, Serialize};

use super::{heaviside, NeuronState, SecondOrder, SsmMatrices, TwoStateNeuron};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Continuous-domain parameters of one SiLIF neuron.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiLifParams {
    /// `ln(1/τ_u)`
    pub lambda_alpha_log: f64,
    /// `ln(1/τ_w)`
    pub lambda_beta_log: f64,
    pub dt_log: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
}

/// `α = exp(−exp(λ^α_log)·exp(Δt_log))` and likewise `β`.
///
/// Always in `[0, 1]`; values that saturate to exactly 0 or 1 in f64 are
/// returned as such and logged at debug level.
pub fn silif_decays(p: &SiLifParams) -> Result<(f64, f64)> {
    for (name, v) in [
        ("lambda_alpha_log", p.lambda_alpha_log),
        ("lambda_beta_log", p.lambda_beta_log),
        ("dt_log", p.dt_log),
    ] {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("{name} is not finite ({v})")));
        }
    }
    let dt = p.dt_log.exp();
    let alpha = (-p.lambda_alpha_log.exp() * dt).exp();
    let beta = (-p.lambda_beta_log.exp() * dt).exp();
    if alpha == 0.0 || alpha == 1.0 || beta == 0.0 || beta == 1.0 {
        debug!("SiLIF decay saturated: alpha = {alpha}, beta = {beta}");
    }
    Ok((alpha, beta))
}

impl TwoStateNeuron for SiLifParams {
    fn dynamics(&self) -> Result<SecondOrder> {
        let (alpha, beta) = silif_decays(self)?;
        Ok(SecondOrder {
            alpha,
            beta,
            a: self.a.clamp(self.clamp_a.0, self.clamp_a.1),
            b: self.b.clamp(self.clamp_b.0, self.clamp_b.1),
            theta: self.theta,
        })
    }

    fn subthreshold_matrices(&self) -> Result<SsmMatrices> {
        let d = self.dynamics()?;
        Ok(SsmMatrices::silif(d.alpha, d.beta, d.a))
    }
}

/// One SiLIF step. Adaptation updates first from the previous `u` and `s`,
/// then the membrane integrates against the fresh `w`:
///
/// ```text
/// w ← β·w + a·u + b·s
/// u ← α·(u − s) + (1 − α)·(I − w)
/// s ← [u ≥ θ]
/// ```
pub fn silif_step(state: NeuronState, p: &SecondOrder, input: f64) -> (NeuronState, bool) {
    let w = p.beta * state.w + p.a * state.u + p.b * state.s;
    let u = p.alpha * (state.u - state.s) + (1.0 - p.alpha) * (input - w);
    let spike = heaviside(u, p.theta);
    (
        NeuronState {
            u,
            w,
            s: if spike { 1.0 } else { 0.0 },
        },
        spike,
    )
}

/// Initialisation ranges for a SiLIF layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiLifInit {
    pub lambda_alpha: (f64, f64),
    pub lambda_beta: (f64, f64),
    pub dt0: f64,
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
    pub theta: f64,
}

impl Default for SiLifInit {
    /// With Δt₀ = 1 the decays start in `[e^{−1/5}, e^{−1/25}]`.
    fn default() -> Self {
        Self {
            lambda_alpha: (1.0 / 25.0, 1.0 / 5.0),
            lambda_beta: (1.0 / 25.0, 1.0 / 5.0),
            dt0: 1.0,
            a: (0.0, 1.0),
            b: (0.0, 2.0),
            clamp_a: (0.0, 1.0),
            clamp_b: (0.0, 2.0),
            theta: 1.0,
        }
    }
}

pub(crate) fn check_interval(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::ParamRange(format!("{name}: invalid interval [{lo}, {hi}]")));
    }
    Ok(())
}

pub fn init_silif(rng: &mut Rng, n: usize, init: &SiLifInit) -> Result<Vec<SiLifParams>> {
    for (name, r) in [("a", init.a), ("b", init.b), ("clamp_a", init.clamp_a), ("clamp_b", init.clamp_b)] {
        check_interval(name, r)?;
    }
    if !(init.dt0 > 0.0) {
        return Err(Error::ParamRange(format!("dt0 must be positive, got {}", init.dt0)));
    }
    let (la_lo, la_hi) = log_bounds("lambda_alpha", init.lambda_alpha)?;
    let (lb_lo, lb_hi) = log_bounds("lambda_beta", init.lambda_beta)?;
    let dt_log = init.dt0.ln();
    Ok((0..n)
        .map(|_| SiLifParams {
            lambda_alpha_log: rng.uniform_range(la_lo, la_hi),
            lambda_beta_log: rng.uniform_range(lb_lo, lb_hi),
            dt_log,
            a: rng.uniform_range(init.a.0, init.a.1),
            b: rng.uniform_range(init.b.0, init.b.1),
            theta: init.theta,
            clamp_a: init.clamp_a,
            clamp_b: init.clamp_b,
        })
        .collect())
}

pub(crate) fn log_bounds(name: &str, (lo, hi): (f64, f64)) -> Result<(f64, f64)> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::ParamRange(format!(
            "{name}: log-uniform range needs 0 < min <= max, got [{lo}, {hi}]"
        )));
    }
    Ok((lo.ln(), hi.ln()))
}
