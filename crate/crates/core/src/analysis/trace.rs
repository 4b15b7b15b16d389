use serde::{Deserialize, Serialize};

/// Activity statistics of one synaptic stage (a projection and, for hidden
/// layers, the neuron layer it feeds).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerTrace {
    pub name: String,
    /// Nonzero entries that passed through the projection's weights.
    pub activity_in: u64,
    /// Width of the projection's input.
    pub inputs: usize,
    /// Outputs each active input reaches.
    pub fan_out: usize,
    /// Set when the projection's input is real-valued rather than spikes.
    pub dense_input: bool,
    /// Neurons in the spiking layer fed by this stage; 0 for the readout.
    pub neurons: usize,
    /// Spikes emitted by that layer.
    pub spikes: u64,
}

impl LayerTrace {
    pub fn is_spiking(&self) -> bool {
        self.neurons > 0
    }
}

/// Per-layer counts collected during one or more forward passes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub samples: u64,
    pub timesteps: u64,
    pub layers: Vec<LayerTrace>,
}

impl RunTrace {
    /// Folds another batch's trace into this one. Both must come from the
    /// same network and sequence length.
    pub fn merge(&mut self, other: &RunTrace) {
        if self.layers.is_empty() {
            *self = other.clone();
            return;
        }
        self.samples += other.samples;
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.activity_in += b.activity_in;
            a.spikes += b.spikes;
            a.dense_input |= b.dense_input;
        }
    }
}
