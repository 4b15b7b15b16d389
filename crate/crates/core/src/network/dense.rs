use ndarray::{Array2, Array3, ArrayView2, Ix2};

use super::param::{Param, ParamGroup};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Bias-free affine projection; the following normalisation supplies the shift.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    /// `out × in`
    pub weight: Param,
}

impl DenseLayer {
    /// Uniform in `±1/sqrt(in)`.
    pub fn init(name: &str, rng: &mut Rng, inputs: usize, outputs: usize) -> Self {
        let bound = 1.0 / (inputs.max(1) as f64).sqrt();
        let w = Array2::from_shape_simple_fn((outputs, inputs), || rng.uniform_range(-bound, bound));
        Self::from_weights(name, w)
    }

    pub fn from_weights(name: &str, w: Array2<f64>) -> Self {
        Self {
            weight: Param::new(format!("{name}.weight"), ParamGroup::Weights, w.into_dyn()),
        }
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weight.value.view().into_dimensionality::<Ix2>().expect("2-d weight")
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[0]
    }

    /// `x · Wᵀ` on a `rows × in` matrix.
    pub fn dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.inputs() {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.inputs(),
                x.ncols()
            )));
        }
        if density(x) < SPARSE_DENSITY {
            return Ok(sparse_rows_times(x, self.weights().t().as_standard_layout().view()));
        }
        Ok(x.dot(&self.weights().t()))
    }

    pub fn forward(&self, x: &Array3<f64>) -> Result<Array3<f64>> {
        let (b, t, f) = x.dim();
        let flat = x.view().into_shape_with_order((b * t, f)).map_err(|e| Error::Shape(e.to_string()))?;
        let y = self.dense(flat)?;
        Ok(y.into_shape_with_order((b, t, self.outputs())).expect("row count preserved"))
    }

    /// Returns `(dL/dx, dL/dW)` given the forward input and `dL/dy`.
    pub fn backward(&self, x: &Array3<f64>, dy: &Array3<f64>) -> (Array3<f64>, Array2<f64>) {
        let (dx, dw) = self.backward_opt(x, dy, true);
        (dx.expect("requested"), dw)
    }

    /// As [`DenseLayer::backward`], skipping `dL/dx` unless `need_dx`.
    pub fn backward_opt(&self, x: &Array3<f64>, dy: &Array3<f64>, need_dx: bool) -> (Option<Array3<f64>>, Array2<f64>) {
        let (b, t, f) = x.dim();
        let xf = x.view().into_shape_with_order((b * t, f)).expect("contiguous input");
        let dyf = dy.view().into_shape_with_order((b * t, self.outputs())).expect("contiguous grad");
        let dw = if density(xf) < SPARSE_DENSITY {
            // dWᵀ = xᵀ·dy, accumulated over the nonzero inputs only
            sparse_rows_times(xf.t(), dyf.as_standard_layout().view()).reversed_axes()
        } else {
            dyf.t().dot(&xf)
        };
        let dx = need_dx.then(|| {
            dyf.dot(&self.weights())
                .into_shape_with_order((b, t, f))
                .expect("shape")
        });
        (dx, dw)
    }
}

/// Inputs sparser than this take the event-driven product.
const SPARSE_DENSITY: f64 = 0.3;

fn density(x: ArrayView2<'_, f64>) -> f64 {
    if x.is_empty() {
        return 1.0;
    }
    x.iter().filter(|&&v| v != 0.0).count() as f64 / x.len() as f64
}

/// `a · m` visiting only the nonzero entries of `a`; `m` is row-major.
fn sparse_rows_times(a: ArrayView2<'_, f64>, m: ArrayView2<'_, f64>) -> Array2<f64> {
    let (rows, inner) = a.dim();
    let cols = m.ncols();
    let ms = m.as_slice().expect("standard layout");
    let mut out = vec![0.0; rows * cols];
    for (r, orow) in out.chunks_exact_mut(cols).enumerate() {
        for j in 0..inner {
            let v = a[[r, j]];
            if v != 0.0 {
                for (o, w) in orow.iter_mut().zip(&ms[j * cols..(j + 1) * cols]) {
                    *o += v * w;
                }
            }
        }
    }
    Array2::from_shape_vec((rows, cols), out).expect("shape")
}
