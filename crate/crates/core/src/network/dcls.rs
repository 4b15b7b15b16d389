//! Learnable synaptic delays as Gaussian-interpolated 1-D convolution kernels.
//!
//! Each synapse `j → i` owns a weight `w_ij` and a real-valued delay `d_ij`.
//! Its kernel has `T_d + 1` taps; tap `p` reads the presynaptic train
//! `T_d − p` steps in the past, so the kernel is causal and tap `T_d` is the
//! zero-delay tap. During training the kernel is a normalised Gaussian of
//! width `σ` centred on the tap for delay `d`; at evaluation the delay is
//! rounded and the kernel collapses to a single tap.

use log::warn;
use ndarray::{s, Array2, Array3, ArrayView2, Ix2};

use super::param::{Param, ParamGroup};
use crate::error::{Error, Result};
use crate::numerics::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct DclsLayer {
    /// `out × in`
    pub weight: Param,
    /// `out × in`, in timesteps, kept in `[0, max_delay]`.
    pub delay: Param,
    /// Shared kernel width, scheduled rather than trained.
    pub sigma: f64,
    pub max_delay: usize,
}

/// Kernel taps as `(T_d + 1) × out × in` effective weights.
#[derive(Clone, Debug)]
pub struct DclsSaved {
    pub input: Array3<f64>,
    /// Normalised Gaussian per tap: `taps × out × in`.
    pub gauss: Array3<f64>,
}

/// Tap index holding delay `d`.
pub fn delay_tap(d: f64, max_delay: usize) -> f64 {
    max_delay as f64 - d
}

/// Normalised Gaussian kernel of length `T_d + 1` for delay `d`.
/// Delays outside `[0, T_d]` are clamped with a warning.
pub fn dcls_kernel(d: f64, sigma: f64, max_delay: usize) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::ParamRange(format!("sigma must be positive, got {sigma}")));
    }
    if !d.is_finite() {
        return Err(Error::Numeric(format!("delay is not finite ({d})")));
    }
    let td = max_delay as f64;
    let dc = if !(0.0..=td).contains(&d) {
        warn!("delay {d} outside [0, {max_delay}], clamping");
        d.clamp(0.0, td)
    } else {
        d
    };
    Ok(gaussian_taps(dc, sigma, max_delay))
}

fn gaussian_taps(d: f64, sigma: f64, max_delay: usize) -> Vec<f64> {
    let c = delay_tap(d, max_delay);
    let mut k: Vec<f64> = (0..=max_delay)
        .map(|p| {
            let z = (p as f64 - c) / sigma;
            (-0.5 * z * z).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Linear anneal from `T_d/2` at epoch 0 to 0.5 at a quarter of the run,
/// flat afterwards.
pub fn sigma_schedule(epoch: usize, total_epochs: usize, max_delay: usize) -> f64 {
    let start = max_delay as f64 / 2.0;
    let end = 0.5;
    let span = total_epochs as f64 / 4.0;
    if span <= 0.0 || epoch as f64 >= span {
        return end;
    }
    start + (end - start) * (epoch as f64 / span)
}

impl DclsLayer {
    /// Weights uniform in `±1/sqrt(in)`, delays uniform over `[0, T_d]`.
    pub fn init(name: &str, rng: &mut Rng, inputs: usize, outputs: usize, max_delay: usize) -> Self {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let w = Array2::from_shape_simple_fn((outputs, inputs), || rng.uniform_range(-bound, bound));
        let d = Array2::from_shape_simple_fn((outputs, inputs), || rng.uniform_range(0.0, max_delay as f64));
        Self {
            weight: Param::new(format!("{name}.weight"), ParamGroup::Weights, w.into_dyn()),
            delay: Param::new(format!("{name}.delay"), ParamGroup::Delays, d.into_dyn()),
            sigma: max_delay as f64 / 2.0,
            max_delay,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    fn view2(p: &Param) -> ArrayView2<'_, f64> {
        p.value.view().into_dimensionality::<Ix2>().expect("2-d")
    }

    pub fn project(&mut self) {
        let td = self.max_delay as f64;
        self.delay.slice_mut().iter_mut().for_each(|d| *d = d.clamp(0.0, td));
    }

    /// Per-tap normalised Gaussians for the current delays (`taps × out × in`).
    fn gaussians(&self) -> Array3<f64> {
        let (o, i) = (self.outputs(), self.inputs());
        let taps = self.max_delay + 1;
        let mut g = Array3::zeros((taps, o, i));
        let td = self.max_delay as f64;
        for ((r, c), &d) in Self::view2(&self.delay).indexed_iter() {
            let k = gaussian_taps(d.clamp(0.0, td), self.sigma, self.max_delay);
            for (p, v) in k.into_iter().enumerate() {
                g[[p, r, c]] = v;
            }
        }
        g
    }

    /// One-hot taps at the rounded delays.
    fn rounded(&self) -> Array3<f64> {
        let (o, i) = (self.outputs(), self.inputs());
        let mut g = Array3::zeros((self.max_delay + 1, o, i));
        let td = self.max_delay as f64;
        for ((r, c), &d) in Self::view2(&self.delay).indexed_iter() {
            let tap = delay_tap(d.clamp(0.0, td).round(), self.max_delay) as usize;
            g[[tap, r, c]] = 1.0;
        }
        g
    }

    fn check(&self, x: &Array3<f64>) -> Result<()> {
        if x.dim().2 != self.inputs() {
            return Err(Error::Shape(format!(
                "delay layer expects {} inputs, got {}",
                self.inputs(),
                x.dim().2
            )));
        }
        Ok(())
    }

    fn convolve(&self, x: &Array3<f64>, gauss: &Array3<f64>) -> Array3<f64> {
        let (bsz, t_len, _) = x.dim();
        let w = Self::view2(&self.weight);
        let mut y = Array3::zeros((bsz, t_len, self.outputs()));
        for p in 0..=self.max_delay {
            let shift = self.max_delay - p;
            if shift >= t_len {
                continue;
            }
            let k = &gauss.index_axis(ndarray::Axis(0), p) * &w;
            for b in 0..bsz {
                let src = x.slice(s![b, ..t_len - shift, ..]);
                let mut dst = y.slice_mut(s![b, shift.., ..]);
                ndarray::linalg::general_mat_mul(1.0, &src, &k.t(), 1.0, &mut dst);
            }
        }
        y
    }

    /// Training-mode pass with Gaussian kernels.
    pub fn forward_train(&self, x: &Array3<f64>) -> Result<(Array3<f64>, DclsSaved)> {
        self.check(x)?;
        let gauss = self.gaussians();
        let y = self.convolve(x, &gauss);
        Ok((
            y,
            DclsSaved {
                input: x.clone(),
                gauss,
            },
        ))
    }

    /// Evaluation-mode pass with integer delays.
    pub fn forward_eval(&self, x: &Array3<f64>) -> Result<Array3<f64>> {
        self.check(x)?;
        Ok(self.convolve(x, &self.rounded()))
    }

    /// Returns `(dL/dx, dL/dW, dL/dd)`.
    pub fn backward(&self, saved: &DclsSaved, dy: &Array3<f64>) -> (Array3<f64>, Array2<f64>, Array2<f64>) {
        let x = &saved.input;
        let (bsz, t_len, _) = x.dim();
        let (o, i) = (self.outputs(), self.inputs());
        let w = Self::view2(&self.weight);
        let d = Self::view2(&self.delay);
        let td = self.max_delay as f64;
        let inv_var = 1.0 / (self.sigma * self.sigma);
        let mut dx = Array3::zeros(x.dim());
        let mut dw = Array2::zeros((o, i));
        let mut dd = Array2::zeros((o, i));
        // Σ_q g[q]·(q − c) per synapse, needed for the normalisation term.
        let mut mean_off = Array2::<f64>::zeros((o, i));
        for p in 0..=self.max_delay {
            let g = saved.gauss.index_axis(ndarray::Axis(0), p);
            for ((r, c), &dv) in d.indexed_iter() {
                mean_off[[r, c]] += g[[r, c]] * (p as f64 - delay_tap(dv.clamp(0.0, td), self.max_delay));
            }
        }
        for p in 0..=self.max_delay {
            let shift = self.max_delay - p;
            if shift >= t_len {
                continue;
            }
            let g = saved.gauss.index_axis(ndarray::Axis(0), p);
            let k = &g * &w;
            let mut dk = Array2::<f64>::zeros((o, i));
            for b in 0..bsz {
                let src = x.slice(s![b, ..t_len - shift, ..]);
                let gy = dy.slice(s![b, shift.., ..]);
                ndarray::linalg::general_mat_mul(1.0, &gy.t(), &src, 1.0, &mut dk);
                let mut gx = dx.slice_mut(s![b, ..t_len - shift, ..]);
                ndarray::linalg::general_mat_mul(1.0, &gy, &k, 1.0, &mut gx);
            }
            for ((r, c), &gk) in dk.indexed_iter() {
                dw[[r, c]] += gk * g[[r, c]];
                let dv = d[[r, c]];
                if (0.0..=td).contains(&dv) {
                    let cen = delay_tap(dv, self.max_delay);
                    // ∂g_p/∂c = g_p·((p − c) − Σ_q g_q (q − c))/σ², and ∂c/∂d = −1
                    let dg_dc = g[[r, c]] * ((p as f64 - cen) - mean_off[[r, c]]) * inv_var;
                    dd[[r, c]] -= gk * w[[r, c]] * dg_dc;
                }
            }
        }
        (dx, dw, dd)
    }
}
