//! Batched neuron layers: the recurrences of [`crate::neurons`] run over
//! `batch × time × neuron` tensors, with reverse-mode kernels.
//!
//! Saved trajectories use the layout `[batch, time + 1, neuron]` where
//! slot 0 holds the initial state.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::param::{Param, ParamGroup};
use crate::engine::surrogate::SpikeRule;
use crate::error::{Error, Result};
use crate::neurons::{
    AdLifParams, CSiLifParams, NeuronKind, RfParams, SecondOrder, SiLifParams, TwoStateNeuron,
    CSILIF_READOUT_SCALE,
};
use crate::numerics::{Complex64, Rng};

/// What a neuron layer emits downstream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerOutput {
    #[default]
    Spikes,
    /// The thresholded variable itself (`u`, `2·Re(u)` or `Re(u)`); only
    /// meaningful for linear-regime oracle runs.
    Membrane,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitState {
    Zero,
    /// Every state variable drawn from U(0, 1), spikes included.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeConfig {
    pub rule: SpikeRule,
    /// Block gradients through the reset term.
    pub detach_reset: bool,
    pub output: LayerOutput,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiLifLayer {
    pub lambda_alpha_log: Param,
    pub lambda_beta_log: Param,
    pub dt_log: Param,
    pub a: Param,
    pub b: Param,
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CSiLifLayer {
    pub lambda_real_log: Param,
    pub lambda_img: Param,
    pub dt_log: Param,
    pub b: Param,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdLifLayer {
    pub alpha: Param,
    pub beta: Param,
    pub a: Param,
    pub b: Param,
    pub clamp_alpha: (f64, f64),
    pub clamp_beta: (f64, f64),
    pub clamp_a: (f64, f64),
    pub clamp_b: (f64, f64),
    pub theta: f64,
    /// cAdLIF when set; only affects reporting, the clamp carries the constraint.
    pub constrained: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RfLayer {
    pub alpha_real: Param,
    pub alpha_img: Param,
    pub dt: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NeuronLayer {
    SiLif(SiLifLayer),
    CSiLif(CSiLifLayer),
    AdLif(AdLifLayer),
    Rf(RfLayer),
}

/// Forward trajectories kept for the reverse pass.
#[derive(Clone, Debug)]
pub enum NeuronSaved {
    TwoState {
        u: Vec<f64>,
        w: Vec<f64>,
        s: Vec<f64>,
        input: Array3<f64>,
    },
    Complex {
        re: Vec<f64>,
        im: Vec<f64>,
        s: Vec<f64>,
        input: Array3<f64>,
    },
}

fn vec_param(prefix: &str, name: &str, group: ParamGroup, v: Vec<f64>) -> Param {
    Param::vector(format!("{prefix}.{name}"), group, v)
}

impl NeuronLayer {
    pub fn from_silif(prefix: &str, ps: &[SiLifParams]) -> Self {
        let first = ps.first();
        NeuronLayer::SiLif(SiLifLayer {
            lambda_alpha_log: vec_param(prefix, "lambda_alpha_log", ParamGroup::Neuron, ps.iter().map(|p| p.lambda_alpha_log).collect()),
            lambda_beta_log: vec_param(prefix, "lambda_beta_log", ParamGroup::Neuron, ps.iter().map(|p| p.lambda_beta_log).collect()),
            dt_log: vec_param(prefix, "dt_log", ParamGroup::Neuron, ps.iter().map(|p| p.dt_log).collect()),
            a: vec_param(prefix, "a", ParamGroup::Neuron, ps.iter().map(|p| p.a).collect()),
            b: vec_param(prefix, "b", ParamGroup::Neuron, ps.iter().map(|p| p.b).collect()),
            clamp_a: first.map_or((0.0, 1.0), |p| p.clamp_a),
            clamp_b: first.map_or((0.0, 2.0), |p| p.clamp_b),
            theta: first.map_or(1.0, |p| p.theta),
        })
    }

    pub fn from_csilif(prefix: &str, ps: &[CSiLifParams]) -> Self {
        NeuronLayer::CSiLif(CSiLifLayer {
            lambda_real_log: vec_param(prefix, "lambda_real_log", ParamGroup::Neuron, ps.iter().map(|p| p.lambda_real_log).collect()),
            lambda_img: vec_param(prefix, "lambda_img", ParamGroup::Neuron, ps.iter().map(|p| p.lambda_img).collect()),
            dt_log: vec_param(prefix, "dt_log", ParamGroup::Neuron, ps.iter().map(|p| p.dt_log).collect()),
            b: vec_param(prefix, "b", ParamGroup::Neuron, ps.iter().map(|p| p.b).collect()),
            theta: ps.first().map_or(1.0, |p| p.theta),
        })
    }

    pub fn from_adlif(prefix: &str, ps: &[AdLifParams], constrained: bool) -> Self {
        let first = ps.first();
        NeuronLayer::AdLif(AdLifLayer {
            alpha: vec_param(prefix, "alpha", ParamGroup::Neuron, ps.iter().map(|p| p.alpha).collect()),
            beta: vec_param(prefix, "beta", ParamGroup::Neuron, ps.iter().map(|p| p.beta).collect()),
            a: vec_param(prefix, "a", ParamGroup::Neuron, ps.iter().map(|p| p.a).collect()),
            b: vec_param(prefix, "b", ParamGroup::Neuron, ps.iter().map(|p| p.b).collect()),
            clamp_alpha: first.map_or((0.36, 0.96), |p| p.clamp_alpha),
            clamp_beta: first.map_or((0.36, 0.98), |p| p.clamp_beta),
            clamp_a: first.map_or((-1.0, 1.0), |p| p.clamp_a),
            clamp_b: first.map_or((0.0, 2.0), |p| p.clamp_b),
            theta: first.map_or(1.0, |p| p.theta),
            constrained,
        })
    }

    pub fn from_rf(prefix: &str, ps: &[RfParams]) -> Self {
        NeuronLayer::Rf(RfLayer {
            alpha_real: vec_param(prefix, "alpha_real", ParamGroup::Neuron, ps.iter().map(|p| p.alpha_real).collect()),
            alpha_img: vec_param(prefix, "alpha_img", ParamGroup::Neuron, ps.iter().map(|p| p.alpha_img).collect()),
            dt: ps.first().map_or(1.0, |p| p.dt),
            theta: ps.first().map_or(1.0, |p| p.theta),
        })
    }

    pub fn kind(&self) -> NeuronKind {
        match self {
            NeuronLayer::SiLif(_) => NeuronKind::Silif,
            NeuronLayer::CSiLif(_) => NeuronKind::Csilif,
            NeuronLayer::AdLif(l) if l.constrained => NeuronKind::Cadlif,
            NeuronLayer::AdLif(_) => NeuronKind::Adlif,
            NeuronLayer::Rf(_) => NeuronKind::Rf,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            NeuronLayer::SiLif(l) => l.a.len(),
            NeuronLayer::CSiLif(l) => l.b.len(),
            NeuronLayer::AdLif(l) => l.alpha.len(),
            NeuronLayer::Rf(l) => l.alpha_real.len(),
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            NeuronLayer::SiLif(l) => l.theta,
            NeuronLayer::CSiLif(l) => l.theta,
            NeuronLayer::AdLif(l) => l.theta,
            NeuronLayer::Rf(l) => l.theta,
        }
    }

    pub fn set_theta(&mut self, theta: f64) {
        match self {
            NeuronLayer::SiLif(l) => l.theta = theta,
            NeuronLayer::CSiLif(l) => l.theta = theta,
            NeuronLayer::AdLif(l) => l.theta = theta,
            NeuronLayer::Rf(l) => l.theta = theta,
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        match self {
            NeuronLayer::SiLif(l) => vec![&l.lambda_alpha_log, &l.lambda_beta_log, &l.dt_log, &l.a, &l.b],
            NeuronLayer::CSiLif(l) => vec![&l.lambda_real_log, &l.lambda_img, &l.dt_log, &l.b],
            NeuronLayer::AdLif(l) => vec![&l.alpha, &l.beta, &l.a, &l.b],
            NeuronLayer::Rf(l) => vec![&l.alpha_real, &l.alpha_img],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            NeuronLayer::SiLif(l) => vec![&mut l.lambda_alpha_log, &mut l.lambda_beta_log, &mut l.dt_log, &mut l.a, &mut l.b],
            NeuronLayer::CSiLif(l) => vec![&mut l.lambda_real_log, &mut l.lambda_img, &mut l.dt_log, &mut l.b],
            NeuronLayer::AdLif(l) => vec![&mut l.alpha, &mut l.beta, &mut l.a, &mut l.b],
            NeuronLayer::Rf(l) => vec![&mut l.alpha_real, &mut l.alpha_img],
        }
    }

    /// Pulls clamped parameters back into their intervals.
    pub fn project(&mut self) {
        fn clamp(p: &mut Param, (lo, hi): (f64, f64)) {
            p.slice_mut().iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
        match self {
            NeuronLayer::SiLif(l) => {
                clamp(&mut l.a, l.clamp_a);
                clamp(&mut l.b, l.clamp_b);
            }
            NeuronLayer::AdLif(l) => {
                clamp(&mut l.alpha, l.clamp_alpha);
                clamp(&mut l.beta, l.clamp_beta);
                clamp(&mut l.a, l.clamp_a);
                clamp(&mut l.b, l.clamp_b);
            }
            NeuronLayer::CSiLif(_) | NeuronLayer::Rf(_) => {}
        }
    }

    pub fn silif_params(&self, i: usize) -> Option<SiLifParams> {
        match self {
            NeuronLayer::SiLif(l) => Some(SiLifParams {
                lambda_alpha_log: l.lambda_alpha_log.slice()[i],
                lambda_beta_log: l.lambda_beta_log.slice()[i],
                dt_log: l.dt_log.slice()[i],
                a: l.a.slice()[i],
                b: l.b.slice()[i],
                theta: l.theta,
                clamp_a: l.clamp_a,
                clamp_b: l.clamp_b,
            }),
            _ => None,
        }
    }

    pub fn csilif_params(&self, i: usize) -> Option<CSiLifParams> {
        match self {
            NeuronLayer::CSiLif(l) => Some(CSiLifParams {
                lambda_real_log: l.lambda_real_log.slice()[i],
                lambda_img: l.lambda_img.slice()[i],
                dt_log: l.dt_log.slice()[i],
                b: l.b.slice()[i],
                theta: l.theta,
            }),
            _ => None,
        }
    }

    pub fn adlif_params(&self, i: usize) -> Option<AdLifParams> {
        match self {
            NeuronLayer::AdLif(l) => Some(AdLifParams {
                alpha: l.alpha.slice()[i],
                beta: l.beta.slice()[i],
                a: l.a.slice()[i],
                b: l.b.slice()[i],
                theta: l.theta,
                clamp_alpha: l.clamp_alpha,
                clamp_beta: l.clamp_beta,
                clamp_a: l.clamp_a,
                clamp_b: l.clamp_b,
            }),
            _ => None,
        }
    }

    pub fn rf_params(&self, i: usize) -> Option<RfParams> {
        match self {
            NeuronLayer::Rf(l) => Some(RfParams {
                alpha_real: l.alpha_real.slice()[i],
                alpha_img: l.alpha_img.slice()[i],
                dt: l.dt,
                theta: l.theta,
            }),
            _ => None,
        }
    }

    /// Per-neuron resolved coefficients for two-state models.
    pub fn second_order(&self) -> Result<Option<Vec<SecondOrder>>> {
        let n = self.size();
        match self {
            NeuronLayer::SiLif(_) => (0..n)
                .map(|i| self.silif_params(i).expect("silif").dynamics())
                .collect::<Result<Vec<_>>>()
                .map(Some),
            NeuronLayer::AdLif(_) => (0..n)
                .map(|i| self.adlif_params(i).expect("adlif").dynamics())
                .collect::<Result<Vec<_>>>()
                .map(Some),
            _ => Ok(None),
        }
    }

    /// Per-neuron complex one-step transition for complex-state models.
    pub fn complex_transitions(&self) -> Result<Option<Vec<Complex64>>> {
        let n = self.size();
        match self {
            NeuronLayer::CSiLif(_) => (0..n)
                .map(|i| crate::neurons::csilif_alpha(&self.csilif_params(i).expect("csilif")))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            NeuronLayer::Rf(_) => Ok(Some((0..n).map(|i| self.rf_params(i).expect("rf").transition()).collect())),
            _ => Ok(None),
        }
    }

    /// Runs the layer over `input` (`[batch, time, neuron]`).
    pub fn forward(
        &self,
        input: Array3<f64>,
        init: InitState,
        cfg: &SpikeConfig,
        rng: &mut Rng,
        keep: bool,
    ) -> Result<(Array3<f64>, Option<NeuronSaved>)> {
        let (bsz, t_len, n) = input.dim();
        if n != self.size() {
            return Err(Error::Shape(format!(
                "neuron layer has {} units, input has {n} features",
                self.size()
            )));
        }
        let input = input.as_standard_layout().into_owned();
        let saved_len = bsz * (t_len + 1) * n;
        let mut out = Array3::<f64>::zeros((bsz, t_len, n));
        match self {
            NeuronLayer::SiLif(_) | NeuronLayer::AdLif(_) => {
                let coeffs = self.second_order()?.expect("two-state");
                let mut u = vec![0.0; saved_len];
                let mut w = vec![0.0; saved_len];
                let mut s = vec![0.0; saved_len];
                fill_init(&mut u, bsz, t_len, n, init, rng);
                fill_init(&mut w, bsz, t_len, n, init, rng);
                fill_init(&mut s, bsz, t_len, n, init, rng);
                let silif = matches!(self, NeuronLayer::SiLif(_));
                two_state_forward(
                    silif,
                    &coeffs,
                    slice(&input),
                    (bsz, t_len, n),
                    cfg,
                    &mut u,
                    &mut w,
                    &mut s,
                    out.as_slice_mut().expect("standard"),
                );
                let saved = keep.then(|| NeuronSaved::TwoState { u, w, s, input });
                Ok((out, saved))
            }
            NeuronLayer::CSiLif(_) | NeuronLayer::Rf(_) => {
                let trans = self.complex_transitions()?.expect("complex");
                let mut re = vec![0.0; saved_len];
                let im = vec![0.0; saved_len];
                let mut s = vec![0.0; saved_len];
                fill_init(&mut re, bsz, t_len, n, init, rng);
                fill_init(&mut s, bsz, t_len, n, init, rng);
                let mut im = im;
                let kernel = match self {
                    NeuronLayer::CSiLif(l) => ComplexKernel::CSiLif { b: l.b.slice(), theta: l.theta },
                    NeuronLayer::Rf(l) => ComplexKernel::Rf { dt: l.dt, theta: l.theta },
                    _ => unreachable!(),
                };
                complex_forward(
                    &kernel,
                    &trans,
                    slice(&input),
                    (bsz, t_len, n),
                    cfg,
                    &mut re,
                    &mut im,
                    &mut s,
                    out.as_slice_mut().expect("standard"),
                );
                let saved = keep.then(|| NeuronSaved::Complex { re, im, s, input });
                Ok((out, saved))
            }
        }
    }

    /// Reverse pass: returns `dL/dinput` and parameter gradients in
    /// [`NeuronLayer::params`] order.
    pub fn backward(
        &self,
        saved: &NeuronSaved,
        dout: &Array3<f64>,
        cfg: &SpikeConfig,
    ) -> Result<(Array3<f64>, Vec<Vec<f64>>)> {
        let dims = dout.dim();
        let dout = dout.as_standard_layout();
        let dout = dout.as_slice().expect("standard");
        let mut din = Array3::<f64>::zeros(dims);
        let n = dims.2;
        match (self, saved) {
            (NeuronLayer::SiLif(l), NeuronSaved::TwoState { u, w, s, input }) => {
                let coeffs = self.second_order()?.expect("two-state");
                let g = two_state_backward(true, &coeffs, slice(input), dims, cfg, u, w, s, dout, din.as_slice_mut().expect("standard"));
                let mut g_la = vec![0.0; n];
                let mut g_lb = vec![0.0; n];
                let mut g_dt = vec![0.0; n];
                for i in 0..n {
                    let dt = l.dt_log.slice()[i].exp();
                    let la = l.lambda_alpha_log.slice()[i].exp();
                    let lb = l.lambda_beta_log.slice()[i].exp();
                    // ∂α/∂λ_log = ∂α/∂Δt_log = −α·λ·Δt
                    let da = -coeffs[i].alpha * la * dt;
                    let db = -coeffs[i].beta * lb * dt;
                    g_la[i] = g.alpha[i] * da;
                    g_lb[i] = g.beta[i] * db;
                    g_dt[i] = g.alpha[i] * da + g.beta[i] * db;
                }
                let g_a = pass_clamped(&g.a, l.a.slice(), l.clamp_a);
                let g_b = pass_clamped(&g.b, l.b.slice(), l.clamp_b);
                Ok((din, vec![g_la, g_lb, g_dt, g_a, g_b]))
            }
            (NeuronLayer::AdLif(l), NeuronSaved::TwoState { u, w, s, input }) => {
                let coeffs = self.second_order()?.expect("two-state");
                let g = two_state_backward(false, &coeffs, slice(input), dims, cfg, u, w, s, dout, din.as_slice_mut().expect("standard"));
                Ok((
                    din,
                    vec![
                        pass_clamped(&g.alpha, l.alpha.slice(), l.clamp_alpha),
                        pass_clamped(&g.beta, l.beta.slice(), l.clamp_beta),
                        pass_clamped(&g.a, l.a.slice(), l.clamp_a),
                        pass_clamped(&g.b, l.b.slice(), l.clamp_b),
                    ],
                ))
            }
            (NeuronLayer::CSiLif(l), NeuronSaved::Complex { re, im, s, input }) => {
                let trans = self.complex_transitions()?.expect("complex");
                let kernel = ComplexKernel::CSiLif { b: l.b.slice(), theta: l.theta };
                let g = complex_backward(&kernel, &trans, slice(input), dims, cfg, re, im, s, dout, din.as_slice_mut().expect("standard"));
                let mut g_lr = vec![0.0; n];
                let mut g_li = vec![0.0; n];
                let mut g_dt = vec![0.0; n];
                for i in 0..n {
                    let dt = l.dt_log.slice()[i].exp();
                    let lr = l.lambda_real_log.slice()[i].exp();
                    let q = Complex64::new(-lr, l.lambda_img.slice()[i]);
                    let alpha = trans[i];
                    let ga = g.alpha[i];
                    // dL/dp = Re(conj(ḡα)·∂α/∂p)
                    let d_lr = alpha * (-lr * dt);
                    let d_li = alpha * Complex64::new(0.0, dt);
                    let d_dt = alpha * q * dt;
                    g_lr[i] = (ga.conj() * d_lr).re;
                    g_li[i] = (ga.conj() * d_li).re;
                    g_dt[i] = (ga.conj() * d_dt).re;
                }
                Ok((din, vec![g_lr, g_li, g_dt, g.gain]))
            }
            (NeuronLayer::Rf(l), NeuronSaved::Complex { re, im, s, input }) => {
                let trans = self.complex_transitions()?.expect("complex");
                let kernel = ComplexKernel::Rf { dt: l.dt, theta: l.theta };
                let g = complex_backward(&kernel, &trans, slice(input), dims, cfg, re, im, s, dout, din.as_slice_mut().expect("standard"));
                // A = 1 + Δt·α, so ∂L/∂α = Δt·∂L/∂A
                let g_re = g.alpha.iter().map(|ga| l.dt * ga.re).collect();
                let g_im = g.alpha.iter().map(|ga| l.dt * ga.im).collect();
                Ok((din, vec![g_re, g_im]))
            }
            _ => Err(Error::Shape("saved trajectory does not match the layer model".into())),
        }
    }
}

fn slice(a: &Array3<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

fn fill_init(buf: &mut [f64], bsz: usize, t_len: usize, n: usize, init: InitState, rng: &mut Rng) {
    if init == InitState::Zero {
        return;
    }
    for b in 0..bsz {
        let base = b * (t_len + 1) * n;
        for v in &mut buf[base..base + n] {
            *v = rng.uniform();
        }
    }
}

fn pass_clamped(g: &[f64], raw: &[f64], (lo, hi): (f64, f64)) -> Vec<f64> {
    g.iter()
        .zip(raw)
        .map(|(&g, &x)| if x >= lo && x <= hi { g } else { 0.0 })
        .collect()
}

#[inline]
fn reset_coeff(theta: f64) -> f64 {
    if theta.is_finite() {
        theta
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn two_state_forward(
    silif: bool,
    c: &[SecondOrder],
    input: &[f64],
    (bsz, t_len, n): (usize, usize, usize),
    cfg: &SpikeConfig,
    u: &mut [f64],
    w: &mut [f64],
    s: &mut [f64],
    out: &mut [f64],
) {
    let membrane = cfg.output == LayerOutput::Membrane;
    for b in 0..bsz {
        for t in 1..=t_len {
            let prev = (b * (t_len + 1) + t - 1) * n;
            let cur = prev + n;
            let x = (b * t_len + t - 1) * n;
            for i in 0..n {
                let k = &c[i];
                let (u0, w0, s0) = (u[prev + i], w[prev + i], s[prev + i]);
                let inp = input[x + i];
                let (u1, w1) = if silif {
                    let w1 = k.beta * w0 + k.a * u0 + k.b * s0;
                    (k.alpha * (u0 - s0) + (1.0 - k.alpha) * (inp - w1), w1)
                } else {
                    let u1 = k.alpha * u0 + (1.0 - k.alpha) * (inp - w0) - reset_coeff(k.theta) * s0;
                    (u1, k.beta * w0 + k.a * u0 + k.b * s0)
                };
                let s1 = cfg.rule.fire(u1, k.theta);
                u[cur + i] = u1;
                w[cur + i] = w1;
                s[cur + i] = s1;
                out[x + i] = if membrane { u1 } else { s1 };
            }
        }
    }
}

struct TwoStateGrads {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn two_state_backward(
    silif: bool,
    c: &[SecondOrder],
    input: &[f64],
    (bsz, t_len, n): (usize, usize, usize),
    cfg: &SpikeConfig,
    u: &[f64],
    w: &[f64],
    s: &[f64],
    dout: &[f64],
    din: &mut [f64],
) -> TwoStateGrads {
    let membrane = cfg.output == LayerOutput::Membrane;
    let keep_reset = if cfg.detach_reset { 0.0 } else { 1.0 };
    let mut g = TwoStateGrads {
        alpha: vec![0.0; n],
        beta: vec![0.0; n],
        a: vec![0.0; n],
        b: vec![0.0; n],
    };
    let mut ubar = vec![0.0; n];
    let mut wbar = vec![0.0; n];
    let mut sbar = vec![0.0; n];
    for b in 0..bsz {
        ubar.fill(0.0);
        wbar.fill(0.0);
        sbar.fill(0.0);
        for t in (1..=t_len).rev() {
            let prev = (b * (t_len + 1) + t - 1) * n;
            let cur = prev + n;
            let x = (b * t_len + t - 1) * n;
            for i in 0..n {
                let k = &c[i];
                let (u0, w0, s0) = (u[prev + i], w[prev + i], s[prev + i]);
                let (u1, w1) = (u[cur + i], w[cur + i]);
                let inp = input[x + i];
                let mut ub = ubar[i];
                let mut sb = sbar[i];
                if membrane {
                    ub += dout[x + i];
                } else {
                    sb += dout[x + i];
                }
                ub += sb * cfg.rule.slope(u1, k.theta);
                let one_m = 1.0 - k.alpha;
                din[x + i] = ub * one_m;
                let (wb, mut ub0, mut sb0);
                if silif {
                    // u1 = α(u0 − s0) + (1−α)(I − w1)
                    g.alpha[i] += ub * ((u0 - s0) - (inp - w1));
                    wb = wbar[i] - ub * one_m;
                    ub0 = ub * k.alpha;
                    sb0 = -ub * k.alpha * keep_reset;
                } else {
                    // u1 = αu0 + (1−α)(I − w0) − θ s0
                    g.alpha[i] += ub * (u0 - (inp - w0));
                    wb = wbar[i];
                    ub0 = ub * k.alpha;
                    sb0 = -ub * reset_coeff(k.theta) * keep_reset;
                }
                // w1 = βw0 + a u0 + b s0
                g.beta[i] += wb * w0;
                g.a[i] += wb * u0;
                g.b[i] += wb * s0;
                let mut wb0 = wb * k.beta;
                ub0 += wb * k.a;
                sb0 += wb * k.b;
                if !silif {
                    wb0 -= ub * one_m;
                }
                ubar[i] = ub0;
                wbar[i] = wb0;
                sbar[i] = sb0;
            }
        }
    }
    g
}

enum ComplexKernel<'a> {
    /// `u ← α(u − s/2) + b·I`, fires on `2·Re(u)`.
    CSiLif { b: &'a [f64], theta: f64 },
    /// `u ← A·u + Δt·I − θ·s`, fires on `Re(u)`.
    Rf { dt: f64, theta: f64 },
}

impl ComplexKernel<'_> {
    fn theta(&self) -> f64 {
        match self {
            ComplexKernel::CSiLif { theta, .. } | ComplexKernel::Rf { theta, .. } => *theta,
        }
    }

    /// Scale from `Re(u)` to the thresholded variable.
    fn readout(&self) -> f64 {
        match self {
            ComplexKernel::CSiLif { .. } => CSILIF_READOUT_SCALE,
            ComplexKernel::Rf { .. } => 1.0,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn complex_forward(
    kernel: &ComplexKernel,
    trans: &[Complex64],
    input: &[f64],
    (bsz, t_len, n): (usize, usize, usize),
    cfg: &SpikeConfig,
    re: &mut [f64],
    im: &mut [f64],
    s: &mut [f64],
    out: &mut [f64],
) {
    let membrane = cfg.output == LayerOutput::Membrane;
    let theta = kernel.theta();
    let scale = kernel.readout();
    for bi in 0..bsz {
        for t in 1..=t_len {
            let prev = (bi * (t_len + 1) + t - 1) * n;
            let cur = prev + n;
            let x = (bi * t_len + t - 1) * n;
            for i in 0..n {
                let u0 = Complex64::new(re[prev + i], im[prev + i]);
                let s0 = s[prev + i];
                let inp = input[x + i];
                let u1 = match kernel {
                    ComplexKernel::CSiLif { b, .. } => trans[i] * (u0 - 0.5 * s0) + b[i] * inp,
                    ComplexKernel::Rf { dt, theta } => trans[i] * u0 + dt * inp - reset_coeff(*theta) * s0,
                };
                let v = scale * u1.re;
                let s1 = cfg.rule.fire(v, theta);
                re[cur + i] = u1.re;
                im[cur + i] = u1.im;
                s[cur + i] = s1;
                out[x + i] = if membrane { v } else { s1 };
            }
        }
    }
}

struct ComplexGrads {
    /// `∂L/∂Re(A) + i·∂L/∂Im(A)` for the one-step transition.
    alpha: Vec<Complex64>,
    /// Input gain (C-SiLIF only).
    gain: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn complex_backward(
    kernel: &ComplexKernel,
    trans: &[Complex64],
    input: &[f64],
    (bsz, t_len, n): (usize, usize, usize),
    cfg: &SpikeConfig,
    re: &[f64],
    im: &[f64],
    s: &[f64],
    dout: &[f64],
    din: &mut [f64],
) -> ComplexGrads {
    let membrane = cfg.output == LayerOutput::Membrane;
    let keep_reset = if cfg.detach_reset { 0.0 } else { 1.0 };
    let theta = kernel.theta();
    let scale = kernel.readout();
    let mut g = ComplexGrads {
        alpha: vec![Complex64::new(0.0, 0.0); n],
        gain: vec![0.0; n],
    };
    let mut ubar = vec![Complex64::new(0.0, 0.0); n];
    let mut sbar = vec![0.0; n];
    for bi in 0..bsz {
        ubar.fill(Complex64::new(0.0, 0.0));
        sbar.fill(0.0);
        for t in (1..=t_len).rev() {
            let prev = (bi * (t_len + 1) + t - 1) * n;
            let cur = prev + n;
            let x = (bi * t_len + t - 1) * n;
            for i in 0..n {
                let u0 = Complex64::new(re[prev + i], im[prev + i]);
                let s0 = s[prev + i];
                let v = scale * re[cur + i];
                let mut ub = ubar[i];
                let mut sb = sbar[i];
                if membrane {
                    ub.re += scale * dout[x + i];
                } else {
                    sb += dout[x + i];
                }
                ub.re += scale * sb * cfg.rule.slope(v, theta);
                let inp = input[x + i];
                match kernel {
                    ComplexKernel::CSiLif { b, .. } => {
                        let z = u0 - 0.5 * s0;
                        g.alpha[i] += z.conj() * ub;
                        g.gain[i] += ub.re * inp;
                        din[x + i] = ub.re * b[i];
                        let zb = trans[i].conj() * ub;
                        ubar[i] = zb;
                        sbar[i] = -0.5 * zb.re * keep_reset;
                    }
                    ComplexKernel::Rf { dt, theta } => {
                        g.alpha[i] += u0.conj() * ub;
                        din[x + i] = ub.re * dt;
                        ubar[i] = trans[i].conj() * ub;
                        sbar[i] = -reset_coeff(*theta) * ub.re * keep_reset;
                    }
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::surrogate::{SpikeFn, SurrogateSpec};
    use crate::neurons::*;

    fn cfg() -> SpikeConfig {
        SpikeConfig {
            rule: SpikeRule {
                kind: SpikeFn::Heaviside,
                surrogate: SurrogateSpec::default(),
            },
            detach_reset: false,
            output: LayerOutput::Spikes,
        }
    }

    fn random_input(rng: &mut Rng, b: usize, t: usize, n: usize, scale: f64) -> Array3<f64> {
        Array3::from_shape_fn((b, t, n), |_| rng.uniform_range(-0.5, 1.5) * scale)
    }

    #[test]
    fn silif_layer_matches_scalar_steps() {
        let mut rng = Rng::new(3, 0);
        let ps = init_silif(&mut rng, 6, &SiLifInit::default()).unwrap();
        let layer = NeuronLayer::from_silif("l", &ps);
        let x = random_input(&mut rng, 2, 40, 6, 8.0);
        let (out, _) = layer.forward(x.clone(), InitState::Zero, &cfg(), &mut rng, false).unwrap();
        let mut spikes = 0;
        for b in 0..2 {
            for (i, p) in ps.iter().enumerate() {
                let d = p.dynamics().unwrap();
                let mut st = NeuronState::default();
                for t in 0..40 {
                    let (next, spike) = silif_step(st, &d, x[[b, t, i]]);
                    assert_eq!(out[[b, t, i]], if spike { 1.0 } else { 0.0 });
                    spikes += spike as usize;
                    st = next;
                }
            }
        }
        assert!(spikes > 0);
    }

    #[test]
    fn adlif_layer_matches_scalar_steps() {
        let mut rng = Rng::new(4, 0);
        let ps = init_adlif(&mut rng, 5, &AdLifInit::adlif()).unwrap();
        let layer = NeuronLayer::from_adlif("l", &ps, false);
        let x = random_input(&mut rng, 2, 30, 5, 3.0);
        let (out, _) = layer.forward(x.clone(), InitState::Zero, &cfg(), &mut rng, false).unwrap();
        for b in 0..2 {
            for (i, p) in ps.iter().enumerate() {
                let d = p.dynamics().unwrap();
                let mut st = NeuronState::default();
                for t in 0..30 {
                    let (next, spike) = adlif_step(st, &d, x[[b, t, i]]);
                    assert_eq!(out[[b, t, i]], if spike { 1.0 } else { 0.0 });
                    st = next;
                }
            }
        }
    }

    #[test]
    fn csilif_layer_matches_scalar_steps() {
        let mut rng = Rng::new(5, 0);
        let ps = init_csilif(&mut rng, 4, &CSiLifInit::default()).unwrap();
        let layer = NeuronLayer::from_csilif("l", &ps);
        let x = random_input(&mut rng, 2, 30, 4, 2.0);
        let (out, _) = layer.forward(x.clone(), InitState::Zero, &cfg(), &mut rng, false).unwrap();
        for b in 0..2 {
            for (i, p) in ps.iter().enumerate() {
                let alpha = csilif_alpha(p).unwrap();
                let mut st = ComplexState::default();
                for t in 0..30 {
                    let (next, spike) = csilif_step(st, alpha, p.b, p.theta, x[[b, t, i]]);
                    assert_eq!(out[[b, t, i]], if spike { 1.0 } else { 0.0 });
                    st = next;
                }
            }
        }
    }

    #[test]
    fn rf_layer_matches_scalar_steps() {
        let mut rng = Rng::new(6, 0);
        let ps = init_rf(&mut rng, 4, &RfInit::default()).unwrap();
        let layer = NeuronLayer::from_rf("l", &ps);
        let x = random_input(&mut rng, 1, 30, 4, 1.0);
        let (out, _) = layer.forward(x.clone(), InitState::Zero, &cfg(), &mut rng, false).unwrap();
        for (i, p) in ps.iter().enumerate() {
            let mut st = ComplexState::default();
            for t in 0..30 {
                let (next, spike) = rf_step(st, p, x[[0, t, i]]);
                assert_eq!(out[[0, t, i]], if spike { 1.0 } else { 0.0 });
                st = next;
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut rng = Rng::new(0, 0);
        let ps = init_silif(&mut rng, 3, &SiLifInit::default()).unwrap();
        let layer = NeuronLayer::from_silif("l", &ps);
        let x = Array3::zeros((1, 2, 4));
        assert!(matches!(
            layer.forward(x, InitState::Zero, &cfg(), &mut rng, false),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn project_restores_clamps() {
        let mut rng = Rng::new(0, 0);
        let ps = init_silif(&mut rng, 3, &SiLifInit::default()).unwrap();
        let mut layer = NeuronLayer::from_silif("l", &ps);
        if let NeuronLayer::SiLif(l) = &mut layer {
            l.a.slice_mut()[0] = 5.0;
            l.b.slice_mut()[1] = -3.0;
        }
        layer.project();
        if let NeuronLayer::SiLif(l) = &layer {
            assert_eq!(l.a.slice()[0], 1.0);
            assert_eq!(l.b.slice()[1], 0.0);
        }
    }
}
