//! Single-neuron dynamics: parameter containers, initialisers, pure step
//! functions and the subthreshold state-space export.
//!
//! Step functions here are the scalar reference path. The batched layer
//! kernels in [`crate::engine`] implement the same recurrences over whole
//! tensors and are tested against these.

mod adlif;
mod csilif;
mod rf;
mod silif;

pub use adlif::{adlif_step, init_adlif, AdLifInit, AdLifParams};
pub use csilif::{csilif_alpha, csilif_step, init_csilif, CSiLifInit, CSiLifParams, CSILIF_READOUT_SCALE};
pub use rf::{init_rf, rf_step, RfInit, RfParams};
pub use silif::{init_silif, silif_decays, silif_step, SiLifInit, SiLifParams};

use serde::{Deserialize, Serialize};

use crate::numerics::{Complex64, Mat2};

/// Which neuron model a layer runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeuronKind {
    Silif,
    Csilif,
    Adlif,
    Cadlif,
    Rf,
}

impl NeuronKind {
    pub fn name(self) -> &'static str {
        match self {
            NeuronKind::Silif => "silif",
            NeuronKind::Csilif => "csilif",
            NeuronKind::Adlif => "adlif",
            NeuronKind::Cadlif => "cadlif",
            NeuronKind::Rf => "rf",
        }
    }

    /// Models whose state is a single complex scalar.
    pub fn is_complex(self) -> bool {
        matches!(self, NeuronKind::Csilif | NeuronKind::Rf)
    }
}

/// State of a two-variable (membrane + adaptation) neuron.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeuronState {
    pub u: f64,
    pub w: f64,
    /// Last spike. Binary after the first step; the random training-time
    /// initial state may hold a fractional value at t = 0.
    pub s: f64,
}

/// State of a complex-scalar neuron.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexState {
    pub u: Complex64,
    pub s: f64,
}

/// Resolved per-step coefficients of a two-state neuron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrder {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// Discrete linear system `x_t = A x_{t−1} + B u_t`, `y_t = C·x_t + D u_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsmMatrices {
    pub a_bar: Mat2,
    pub b_bar: [f64; 2],
    pub c_bar: [f64; 2],
    pub d_bar: f64,
}

impl SsmMatrices {
    /// The AdLIF subthreshold block with state `[u; w]`:
    /// `A = [[α, α−1], [a, β]]`, `B = [1−α, 0]`, `C = [1, 0]`, `D = 0`.
    pub fn adlif(alpha: f64, beta: f64, a: f64) -> Self {
        Self {
            a_bar: [[alpha, alpha - 1.0], [a, beta]],
            b_bar: [1.0 - alpha, 0.0],
            c_bar: [1.0, 0.0],
            d_bar: 0.0,
        }
    }

    /// The SiLIF subthreshold block. SiLIF refreshes `w` before `u`, so the
    /// membrane row sees the already-updated adaptation:
    /// `u_t = (α − (1−α)a)·u − (1−α)β·w + (1−α)·I`.
    pub fn silif(alpha: f64, beta: f64, a: f64) -> Self {
        let g = 1.0 - alpha;
        Self {
            a_bar: [[alpha - g * a, -g * beta], [a, beta]],
            b_bar: [g, 0.0],
            c_bar: [1.0, 0.0],
            d_bar: 0.0,
        }
    }

    pub fn step(&self, x: [f64; 2], input: f64) -> [f64; 2] {
        let a = &self.a_bar;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.b_bar[0] * input,
            a[1][0] * x[0] + a[1][1] * x[1] + self.b_bar[1] * input,
        ]
    }

    pub fn output(&self, x: [f64; 2], input: f64) -> f64 {
        self.c_bar[0] * x[0] + self.c_bar[1] * x[1] + self.d_bar * input
    }
}

/// Two-state neurons expose their resolved coefficients and linear block.
pub trait TwoStateNeuron {
    fn dynamics(&self) -> crate::Result<SecondOrder>;
    fn subthreshold_matrices(&self) -> crate::Result<SsmMatrices>;
}

/// Reset magnitude `θ·s` that stays finite for θ = +∞ (no spike can occur).
#[inline]
pub(crate) fn reset_term(theta: f64, s: f64) -> f64 {
    if theta.is_finite() {
        theta * s
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn heaviside(v: f64, theta: f64) -> bool {
    v >= theta
}
