//! Layers and their assembly into the spiking classifier.

mod batchnorm;
mod dcls;
mod dense;
mod dropout;
mod model;
mod neuron_layer;
mod param;
mod readout;

pub use batchnorm::{BatchNorm, BnSaved, BnStats};
pub use dcls::{dcls_kernel, delay_tap, sigma_schedule, DclsLayer, DclsSaved};
pub use dense::DenseLayer;
pub use dropout::{apply_mask, dropout_mask};
pub use model::{ForwardOutput, HiddenLayer, Mode, Network, NetworkConfig, Projection};
pub use neuron_layer::{
    AdLifLayer, CSiLifLayer, InitState, LayerOutput, NeuronLayer, NeuronSaved, RfLayer, SiLifLayer, SpikeConfig,
};
pub use param::{GradientSet, Param, ParamGroup};
pub use readout::{li_decay, li_integrate, softmax_sum, softmax_sum_backward, LiReadout, LiSaved};
