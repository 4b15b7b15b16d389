use serde::{Deserialize, Serialize};

use super::silif::check_interval;
use super::{heaviside, reset_term, ComplexState};
use crate::error::{Error, Result};
use crate::numerics::{Complex64, Rng};

/// Resonate-and-fire neuron with an Euler-discretised complex oscillator.
/// Carries no stability guarantee.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub alpha_real: f64,
    pub alpha_img: f64,
    /// Fixed integration step.
    pub dt: f64,
    pub theta: f64,
}

impl RfParams {
    /// Effective one-step transition `1 + Δt·(α^real + i·α^img)`.
    pub fn transition(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.dt * Complex64::new(self.alpha_real, self.alpha_img)
    }
}

/// `u ← u + Δt·(α·u + I) − θ·s`, spike when `Re(u) ≥ θ`.
pub fn rf_step(state: ComplexState, p: &RfParams, input: f64) -> (ComplexState, bool) {
    let alpha = Complex64::new(p.alpha_real, p.alpha_img);
    let u = state.u + p.dt * (alpha * state.u + input) - reset_term(p.theta, state.s);
    let spike = heaviside(u.re, p.theta);
    (
        ComplexState {
            u,
            s: if spike { 1.0 } else { 0.0 },
        },
        spike,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfInit {
    pub alpha_real: (f64, f64),
    pub alpha_img: (f64, f64),
    pub dt: f64,
    pub theta: f64,
}

impl Default for RfInit {
    fn default() -> Self {
        Self {
            alpha_real: (-0.2, -0.02),
            alpha_img: (-0.3, 0.3),
            dt: 1.0,
            theta: 1.0,
        }
    }
}

pub fn init_rf(rng: &mut Rng, n: usize, init: &RfInit) -> Result<Vec<RfParams>> {
    check_interval("alpha_real", init.alpha_real)?;
    check_interval("alpha_img", init.alpha_img)?;
    if !(init.dt >= 0.0 && init.dt.is_finite()) {
        return Err(Error::ParamRange(format!("RF dt must be finite and >= 0, got {}", init.dt)));
    }
    Ok((0..n)
        .map(|_| RfParams {
            alpha_real: rng.uniform_range(init.alpha_real.0, init.alpha_real.1),
            alpha_img: rng.uniform_range(init.alpha_img.0, init.alpha_img.1),
            dt: init.dt,
            theta: init.theta,
        })
        .collect())
}
