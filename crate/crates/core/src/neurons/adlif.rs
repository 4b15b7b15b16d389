use serde::{Deserialize, Serialize};

use super::silif::check_interval;
use super::{heaviside, reset_term, NeuronState, SecondOrder, SsmMatrices, TwoStateNeuron};
use crate::error::Result;
use crate::numerics::Rng;

/// Discrete-domain AdLIF parameters. The constrained variant (cAdLIF) is the
/// same model with `clamp_a` restricted to non-negative values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdLifParams {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub clamp_alpha: (f64, f64),
    pub clamp_beta: (f64, f64),
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
}

impl TwoStateNeuron for AdLifParams {
    fn dynamics(&self) -> Result<SecondOrder> {
        Ok(SecondOrder {
            alpha: self.alpha.clamp(self.clamp_alpha.0, self.clamp_alpha.1),
            beta: self.beta.clamp(self.clamp_beta.0, self.clamp_beta.1),
            a: self.a.clamp(self.clamp_a.0, self.clamp_a.1),
            b: self.b.clamp(self.clamp_b.0, self.clamp_b.1),
            theta: self.theta,
        })
    }

    fn subthreshold_matrices(&self) -> Result<SsmMatrices> {
        let d = self.dynamics()?;
        Ok(SsmMatrices::adlif(d.alpha, d.beta, d.a))
    }
}

/// ```text
/// u_t = α·u + (1 − α)·(I − w) − θ·s
/// w_t = β·w + a·u + b·s
/// ```
/// Both updates read the previous `(u, w, s)`.
pub fn adlif_step(state: NeuronState, p: &SecondOrder, input: f64) -> (NeuronState, bool) {
    let u = p.alpha * state.u + (1.0 - p.alpha) * (input - state.w) - reset_term(p.theta, state.s);
    let w = p.beta * state.w + p.a * state.u + p.b * state.s;
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

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdLifInit {
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub clamp_alpha: (f64, f64),
    pub clamp_beta: (f64, f64),
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
    pub theta: f64,
}

impl AdLifInit {
    pub fn adlif() -> Self {
        Self {
            alpha: ((-1.0f64 / 5.0).exp(), (-1.0f64 / 25.0).exp()),
            beta: ((-1.0f64 / 5.0).exp(), (-1.0f64 / 25.0).exp()),
            a: (-1.0, 1.0),
            b: (0.0, 2.0),
            clamp_alpha: (0.36, 0.96),
            clamp_beta: (0.36, 0.98),
            clamp_a: (-1.0, 1.0),
            clamp_b: (0.0, 2.0),
            theta: 1.0,
        }
    }

    /// cAdLIF: adaptation coupling confined to `[0, 1]`.
    pub fn cadlif() -> Self {
        Self {
            a: (0.0, 1.0),
            clamp_a: (0.0, 1.0),
            ..Self::adlif()
        }
    }
}

pub fn init_adlif(rng: &mut Rng, n: usize, init: &AdLifInit) -> Result<Vec<AdLifParams>> {
    for (name, r) in [
        ("alpha", init.alpha),
        ("beta", init.beta),
        ("a", init.a),
        ("b", init.b),
        ("clamp_alpha", init.clamp_alpha),
        ("clamp_beta", init.clamp_beta),
        ("clamp_a", init.clamp_a),
        ("clamp_b", init.clamp_b),
    ] {
        check_interval(name, r)?;
    }
    Ok((0..n)
        .map(|_| AdLifParams {
            alpha: rng.uniform_range(init.alpha.0, init.alpha.1),
            beta: rng.uniform_range(init.beta.0, init.beta.1),
            a: rng.uniform_range(init.a.0, init.a.1),
            b: rng.uniform_range(init.b.0, init.b.1),
            theta: init.theta,
            clamp_alpha: init.clamp_alpha,
            clamp_beta: init.clamp_beta,
            clamp_a: init.clamp_a,
            clamp_b: init.clamp_b,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so(alpha: f64, beta: f64, a: f64, b: f64) -> SecondOrder {
        SecondOrder {
            alpha,
            beta,
            a,
            b,
            theta: 1.0,
        }
    }

    #[test]
    fn identity_dynamics() {
        let mut st = NeuronState { u: 0.3, w: -0.2, s: 0.0 };
        for _ in 0..10 {
            let (next, spike) = adlif_step(st, &so(1.0, 1.0, 0.0, 0.0), 0.0);
            assert!(!spike);
            assert_eq!(next, st);
            st = next;
        }
    }

    #[test]
    fn coupled_step() {
        let st = NeuronState { u: 1.0, w: 0.0, s: 0.0 };
        let (next, spike) = adlif_step(st, &so(0.9, 0.8, 0.1, 0.0), 0.0);
        assert!((next.u - 0.9).abs() < 1e-15);
        assert!((next.w - 0.1).abs() < 1e-15);
        assert!(!spike);
    }

    #[test]
    fn subtractive_reset() {
        let st = NeuronState { u: 1.5, w: 0.0, s: 1.0 };
        let (next, _) = adlif_step(st, &so(0.9, 0.5, 0.0, 0.0), 0.0);
        assert!((next.u - 0.35).abs() < 1e-15);
    }

    #[test]
    fn cadlif_clamps_coupling_nonnegative() {
        let mut rng = Rng::new(2, 0);
        for mut p in init_adlif(&mut rng, 100, &AdLifInit::cadlif()).unwrap() {
            p.a = -0.7;
            assert_eq!(p.dynamics().unwrap().a, 0.0);
        }
    }

    #[test]
    fn decays_clamped_at_forward() {
        let mut rng = Rng::new(2, 0);
        let mut p = init_adlif(&mut rng, 1, &AdLifInit::adlif()).unwrap()[0];
        p.alpha = 1.3;
        p.beta = 0.1;
        let d = p.dynamics().unwrap();
        assert_eq!((d.alpha, d.beta), (0.96, 0.36));
    }

    #[test]
    fn matrices_match_adlif_layout() {
        let p = AdLifParams {
            alpha: 0.5,
            beta: 0.5,
            a: 0.2,
            b: 0.0,
            theta: 1.0,
            clamp_alpha: (0.0, 1.0),
            clamp_beta: (0.0, 1.0),
            clamp_a: (-1.0, 1.0),
            clamp_b: (0.0, 2.0),
        };
        let m = p.subthreshold_matrices().unwrap();
        assert_eq!(m.a_bar, [[0.5, -0.5], [0.2, 0.5]]);
        assert_eq!(m.b_bar, [0.5, 0.0]);
        assert_eq!(m.c_bar, [1.0, 0.0]);
        assert_eq!(m.d_bar, 0.0);
    }
}
