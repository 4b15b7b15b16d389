use ndarray::{Array1, Array3};

use super::param::{Param, ParamGroup};
use crate::error::{Error, Result};

/// Per-feature normalisation over the flattened `batch × time` axis.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta_shift: Param,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
    pub momentum: f64,
    pub eps: f64,
}

/// Values kept from a training-mode pass.
#[derive(Clone, Debug)]
pub struct BnSaved {
    pub xhat: Array3<f64>,
    pub inv_std: Array1<f64>,
}

/// Batch statistics to fold into the running averages.
#[derive(Clone, Debug, PartialEq)]
pub struct BnStats {
    pub mean: Array1<f64>,
    /// Unbiased variance.
    pub var: Array1<f64>,
}

impl BatchNorm {
    pub fn new(name: &str, features: usize) -> Self {
        Self {
            gamma: Param::vector(format!("{name}.gamma"), ParamGroup::Weights, vec![1.0; features]),
            beta_shift: Param::vector(format!("{name}.beta"), ParamGroup::Weights, vec![0.0; features]),
            running_mean: Array1::zeros(features),
            running_var: Array1::ones(features),
            momentum: 0.1,
            eps: 1e-5,
        }
    }

    pub fn features(&self) -> usize {
        self.gamma.len()
    }

    pub fn forward_train(&self, x: &Array3<f64>) -> Result<(Array3<f64>, BnSaved, BnStats)> {
        let (b, t, f) = x.dim();
        if f != self.features() {
            return Err(Error::Shape(format!("batchnorm has {} features, got {f}", self.features())));
        }
        let rows = b * t;
        if rows < 2 {
            return Err(Error::Shape("training-mode batchnorm needs at least 2 samples per feature".into()));
        }
        let xs = x.as_standard_layout();
        let xs = xs.as_slice().expect("standard layout");
        let mut mean = Array1::<f64>::zeros(f);
        for row in xs.chunks_exact(f) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean /= rows as f64;
        let mut var = Array1::<f64>::zeros(f);
        for row in xs.chunks_exact(f) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var /= rows as f64;
        let inv_std = var.mapv(|v| 1.0 / (v + self.eps).sqrt());
        let gamma = self.gamma.slice();
        let beta = self.beta_shift.slice();
        let (mean_s, inv_s) = (mean.as_slice().expect("1-d"), inv_std.as_slice().expect("1-d"));
        let mut xhat = vec![0.0; rows * f];
        let mut y = vec![0.0; rows * f];
        for ((row, xh), yr) in xs.chunks_exact(f).zip(xhat.chunks_exact_mut(f)).zip(y.chunks_exact_mut(f)) {
            for k in 0..f {
                let v = (row[k] - mean_s[k]) * inv_s[k];
                xh[k] = v;
                yr[k] = v * gamma[k] + beta[k];
            }
        }
        let unbiased = &var * (rows as f64 / (rows as f64 - 1.0));
        Ok((
            Array3::from_shape_vec((b, t, f), y).expect("shape"),
            BnSaved {
                xhat: Array3::from_shape_vec((b, t, f), xhat).expect("shape"),
                inv_std,
            },
            BnStats { mean, var: unbiased },
        ))
    }

    pub fn forward_eval(&self, x: &Array3<f64>) -> Result<Array3<f64>> {
        if x.dim().2 != self.features() {
            return Err(Error::Shape(format!("batchnorm has {} features, got {}", self.features(), x.dim().2)));
        }
        let f = self.features();
        let gamma = self.gamma.slice();
        let beta = self.beta_shift.slice();
        let scale: Vec<f64> = (0..f).map(|k| gamma[k] / (self.running_var[k] + self.eps).sqrt()).collect();
        let shift: Vec<f64> = (0..f).map(|k| beta[k] - self.running_mean[k] * scale[k]).collect();
        let xs = x.as_standard_layout();
        let xs = xs.as_slice().expect("standard layout");
        let mut out = Vec::with_capacity(xs.len());
        for row in xs.chunks_exact(f) {
            out.extend((0..f).map(|k| row[k] * scale[k] + shift[k]));
        }
        Ok(Array3::from_shape_vec(x.dim(), out).expect("shape"))
    }

    pub fn update_running(&mut self, stats: &BnStats) {
        let m = self.momentum;
        self.running_mean = &self.running_mean * (1.0 - m) + &stats.mean * m;
        self.running_var = &self.running_var * (1.0 - m) + &stats.var * m;
    }

    /// Returns `(dL/dx, dL/dγ, dL/dβ)`.
    pub fn backward(&self, saved: &BnSaved, dy: &Array3<f64>) -> (Array3<f64>, Array1<f64>, Array1<f64>) {
        let (b, t, f) = dy.dim();
        let rows = (b * t) as f64;
        let dys = dy.as_standard_layout();
        let dys = dys.as_slice().expect("standard layout");
        let xh = saved.xhat.as_slice().expect("saved activations are contiguous");
        let mut dbeta = vec![0.0; f];
        let mut dgamma = vec![0.0; f];
        for (dr, xr) in dys.chunks_exact(f).zip(xh.chunks_exact(f)) {
            for k in 0..f {
                dbeta[k] += dr[k];
                dgamma[k] += dr[k] * xr[k];
            }
        }
        // dx = γ/σ · (dy − mean(dy) − x̂·mean(dy·x̂))
        let gamma = self.gamma.slice();
        let coef: Vec<f64> = (0..f).map(|k| gamma[k] * saved.inv_std[k]).collect();
        let mean_dy: Vec<f64> = dbeta.iter().map(|v| v / rows).collect();
        let mean_dyx: Vec<f64> = dgamma.iter().map(|v| v / rows).collect();
        let mut dx = vec![0.0; dys.len()];
        for ((out, dr), xr) in dx.chunks_exact_mut(f).zip(dys.chunks_exact(f)).zip(xh.chunks_exact(f)) {
            for k in 0..f {
                out[k] = (dr[k] - mean_dy[k] - xr[k] * mean_dyx[k]) * coef[k];
            }
        }
        (Array3::from_shape_vec((b, t, f), dx).expect("shape"), Array1::from(dgamma), Array1::from(dbeta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn constant_feature_maps_to_zero() {
        let bn = BatchNorm::new("bn", 1);
        let x = Array3::from_elem((3, 4, 1), 2.5);
        let (y, _, _) = bn.forward_train(&x).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_gamma_gives_shift() {
        let mut bn = BatchNorm::new("bn", 2);
        bn.gamma.slice_mut().fill(0.0);
        bn.beta_shift.slice_mut().copy_from_slice(&[0.3, -1.0]);
        let x = Array3::from_shape_fn((2, 3, 2), |(b, t, f)| (b * 7 + t * 3 + f) as f64);
        let (y, _, _) = bn.forward_train(&x).unwrap();
        for ((_, _, f), v) in y.indexed_iter() {
            assert_eq!(*v, [0.3, -1.0][f]);
        }
    }

    #[test]
    fn two_point_feature() {
        let bn = BatchNorm::new("bn", 1);
        let x = Array3::from_shape_vec((2, 1, 1), vec![0.0, 2.0]).unwrap();
        let (y, _, _) = bn.forward_train(&x).unwrap();
        // var = 1, so the only deviation from ±1 is the eps term
        let expect = 1.0 / (1.0f64 + 1e-5).sqrt();
        assert!((y[[0, 0, 0]] + expect).abs() < 1e-12);
        assert!((y[[1, 0, 0]] - expect).abs() < 1e-12);
        assert!((expect - 1.0).abs() < 1e-5);
    }

    #[test]
    fn train_output_is_standardised() {
        let bn = BatchNorm::new("bn", 3);
        let x = Array3::from_shape_fn((4, 25, 3), |(b, t, f)| ((b * 31 + t * 17 + f * 5) % 13) as f64 * (f + 1) as f64);
        let (y, _, _) = bn.forward_train(&x).unwrap();
        let flat = y.into_shape_with_order((100, 3)).unwrap();
        for f in 0..3 {
            let col = flat.column(f);
            let m = col.mean().unwrap();
            let v = col.mapv(|x| (x - m) * (x - m)).mean().unwrap();
            assert!(m.abs() < 1e-12);
            assert!((v - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn eval_uses_running_stats() {
        let mut bn = BatchNorm::new("bn", 1);
        bn.running_mean[0] = 1.0;
        bn.running_var[0] = 4.0;
        bn.eps = 0.0;
        let x = Array3::from_elem((1, 1, 1), 5.0);
        assert_eq!(bn.forward_eval(&x).unwrap()[[0, 0, 0]], 2.0);
    }

    #[test]
    fn single_sample_rejected_in_train() {
        let bn = BatchNorm::new("bn", 1);
        assert!(bn.forward_train(&Array3::zeros((1, 1, 1))).is_err());
    }
}
