use serde::{Deserialize, Serialize};

use super::{heaviside, ComplexState};
use crate::error::{Error, Result};
use crate::numerics::{log_uniform_sample, Complex64, Rng};

/// Output scale `C̄`: the neuron emits twice the real part of its state.
/// Frozen, never trained.
pub const CSILIF_READOUT_SCALE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSiLifParams {
    pub lambda_real_log: f64,
    /// Angular frequency in radians per unit time.
    pub lambda_img: f64,
    pub dt_log: f64,
    /// Real input gain.
    pub b: f64,
    pub theta: f64,
}

/// `α = exp((−exp(λ^real_log) + i·λ^img)·exp(Δt_log))`, strictly inside the
/// unit disk for finite parameters (up to f64 saturation).
pub fn csilif_alpha(p: &CSiLifParams) -> Result<Complex64> {
    if !(p.lambda_real_log.is_finite() && p.lambda_img.is_finite() && p.dt_log.is_finite()) {
        return Err(Error::Numeric(format!("non-finite C-SiLIF parameters {p:?}")));
    }
    let dt = p.dt_log.exp();
    Ok((Complex64::new(-p.lambda_real_log.exp(), p.lambda_img) * dt).exp())
}

/// `u ← α·(u − s/2) + b·I`, spike when `2·Re(u) ≥ θ`.
///
/// `alpha` is computed once per sequence with [`csilif_alpha`].
pub fn csilif_step(state: ComplexState, alpha: Complex64, b: f64, theta: f64, input: f64) -> (ComplexState, bool) {
    let u = alpha * (state.u - 0.5 * state.s) + b * input;
    let spike = heaviside(CSILIF_READOUT_SCALE * u.re, theta);
    (
        ComplexState {
            u,
            s: if spike { 1.0 } else { 0.0 },
        },
        spike,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CSiLifInit {
    pub dt_min: f64,
    pub dt_max: f64,
    pub theta: f64,
}

impl Default for CSiLifInit {
    fn default() -> Self {
        Self {
            dt_min: 0.01,
            dt_max: 0.5,
            theta: 1.0,
        }
    }
}

/// S4D-Lin style initialisation: every neuron starts at `λ^real = 0.5`,
/// `λ^img = π`; heterogeneity comes from the log-uniform `Δt` and `b ~ U(0, 1)`.
pub fn init_csilif(rng: &mut Rng, n: usize, init: &CSiLifInit) -> Result<Vec<CSiLifParams>> {
    if !(init.dt_min > 0.0 && init.dt_min <= init.dt_max) {
        return Err(Error::ParamRange(format!(
            "C-SiLIF dt range needs 0 < dt_min <= dt_max, got [{}, {}]",
            init.dt_min, init.dt_max
        )));
    }
    (0..n)
        .map(|_| {
            let dt = log_uniform_sample(rng, init.dt_min, init.dt_max)?;
            Ok(CSiLifParams {
                lambda_real_log: 0.5f64.ln(),
                lambda_img: std::f64::consts::PI,
                dt_log: dt.ln(),
                b: rng.uniform(),
                theta: init.theta,
            })
        })
        .collect()
}
