use ndarray::{ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

/// Optimizer group a parameter belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamGroup {
    /// Synaptic weights, normalisation affine terms and readout weights.
    Weights,
    /// Neuron dynamics parameters (decays, timesteps, coupling).
    Neuron,
    /// Learnable synaptic delays.
    Delays,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub group: ParamGroup,
    pub value: ArrayD<f64>,
}

impl Param {
    pub fn new(name: impl Into<String>, group: ParamGroup, value: ArrayD<f64>) -> Self {
        Self {
            name: name.into(),
            group,
            value,
        }
    }

    pub fn vector(name: impl Into<String>, group: ParamGroup, values: Vec<f64>) -> Self {
        let n = values.len();
        Self::new(name, group, ArrayD::from_shape_vec(IxDyn(&[n]), values).expect("1-d shape"))
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn slice(&self) -> &[f64] {
        self.value.as_slice().expect("parameters are contiguous")
    }

    pub fn slice_mut(&mut self) -> &mut [f64] {
        self.value.as_slice_mut().expect("parameters are contiguous")
    }
}

/// Gradients for every trainable tensor, in the network's parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub names: Vec<String>,
    pub grads: Vec<ArrayD<f64>>,
}

impl GradientSet {
    pub fn zeros_like(params: &[&Param]) -> Self {
        Self {
            names: params.iter().map(|p| p.name.clone()).collect(),
            grads: params.iter().map(|p| ArrayD::zeros(p.value.raw_dim())).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ArrayD<f64>> {
        self.names.iter().position(|n| n == name).map(|i| &self.grads[i])
    }

    pub fn zero(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
    }

    /// First non-finite entry as `(tensor index, element index)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.grads.iter().enumerate().find_map(|(i, g)| {
            g.iter().position(|v| !v.is_finite()).map(|j| (i, j))
        })
    }

    /// Elementwise sum of two gradient sets for the same network.
    pub fn accumulate(&mut self, other: &GradientSet) {
        for (a, b) in self.grads.iter_mut().zip(&other.grads) {
            *a += b;
        }
    }
}
