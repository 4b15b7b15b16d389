//! Feed-forward spiking network: `projection → BN → neurons → dropout`
//! repeated per hidden layer, then a dense LI readout.

use ndarray::Array3;

use super::batchnorm::{BatchNorm, BnStats};
use super::dcls::DclsLayer;
use super::dense::DenseLayer;
use super::dropout::{apply_mask, dropout_mask};
use super::neuron_layer::{InitState, LayerOutput, NeuronLayer, SpikeConfig};
use super::param::Param;
use super::readout::{LiReadout, LiSaved};
use crate::analysis::{LayerTrace, RunTrace};
use crate::engine::surrogate::{SpikeFn, SpikeRule, SurrogateSpec};
use crate::engine::tape::{Node, Tape};
use crate::error::{Error, Result};
use crate::neurons::{
    init_adlif, init_csilif, init_rf, init_silif, AdLifInit, CSiLifInit, NeuronKind, RfInit, SiLifInit,
};
use crate::numerics::{streams, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Architecture and neuron options needed to build a [`Network`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub model: NeuronKind,
    pub inputs: usize,
    pub hidden: usize,
    pub layers: usize,
    pub classes: usize,
    pub dropout: f64,
    pub batchnorm: bool,
    /// Replace the hidden dense projections with learnable-delay kernels.
    pub delays: bool,
    pub max_delay: usize,
    pub theta: f64,
    pub surrogate: SurrogateSpec,
    pub spike_fn: SpikeFn,
    pub detach_reset: bool,
    pub output: LayerOutput,
    pub train_init: InitState,
    pub eval_init: InitState,
    pub csilif_dt_min: f64,
    pub csilif_dt_max: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            model: NeuronKind::Silif,
            inputs: 64,
            hidden: 512,
            layers: 2,
            classes: 10,
            dropout: 0.1,
            batchnorm: true,
            delays: false,
            max_delay: 11,
            theta: 1.0,
            surrogate: SurrogateSpec::default(),
            spike_fn: SpikeFn::Heaviside,
            detach_reset: false,
            output: LayerOutput::Spikes,
            train_init: InitState::Uniform,
            eval_init: InitState::Zero,
            csilif_dt_min: 0.01,
            csilif_dt_max: 0.5,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden == 0 || self.layers == 0 || self.classes == 0 {
            return Err(Error::Config("inputs, hidden, layers and classes must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Config(format!("theta must be positive, got {}", self.theta)));
        }
        self.surrogate.validate()
    }

    pub fn spike_config(&self) -> SpikeConfig {
        SpikeConfig {
            rule: SpikeRule {
                kind: self.spike_fn,
                surrogate: self.surrogate,
            },
            detach_reset: self.detach_reset,
            output: self.output,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Dense(DenseLayer),
    Dcls(DclsLayer),
}

impl Projection {
    pub fn inputs(&self) -> usize {
        match self {
            Projection::Dense(d) => d.inputs(),
            Projection::Dcls(d) => d.inputs(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Projection::Dense(d) => d.outputs(),
            Projection::Dcls(d) => d.outputs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiddenLayer {
    pub proj: Projection,
    pub bn: Option<BatchNorm>,
    pub neuron: NeuronLayer,
    pub dropout: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub layers: Vec<HiddenLayer>,
    pub readout: LiReadout,
    pub spike: SpikeConfig,
    pub train_init: InitState,
    pub eval_init: InitState,
}

pub struct ForwardOutput {
    /// `[batch, time, classes]`
    pub logits: Array3<f64>,
    /// Present in training mode only.
    pub tape: Option<Tape>,
    pub trace: RunTrace,
    /// Batch statistics per hidden layer (training mode with BN only).
    pub bn_stats: Vec<Option<BnStats>>,
}

fn neuron_layer(cfg: &NetworkConfig, prefix: &str, rng: &mut Rng) -> Result<NeuronLayer> {
    let n = cfg.hidden;
    Ok(match cfg.model {
        NeuronKind::Silif => {
            let init = SiLifInit {
                theta: cfg.theta,
                ..SiLifInit::default()
            };
            NeuronLayer::from_silif(prefix, &init_silif(rng, n, &init)?)
        }
        NeuronKind::Csilif => {
            let init = CSiLifInit {
                dt_min: cfg.csilif_dt_min,
                dt_max: cfg.csilif_dt_max,
                theta: cfg.theta,
            };
            NeuronLayer::from_csilif(prefix, &init_csilif(rng, n, &init)?)
        }
        NeuronKind::Adlif | NeuronKind::Cadlif => {
            let constrained = cfg.model == NeuronKind::Cadlif;
            let base = if constrained { AdLifInit::cadlif() } else { AdLifInit::adlif() };
            let init = AdLifInit { theta: cfg.theta, ..base };
            NeuronLayer::from_adlif(prefix, &init_adlif(rng, n, &init)?, constrained)
        }
        NeuronKind::Rf => {
            let init = RfInit {
                theta: cfg.theta,
                ..RfInit::default()
            };
            NeuronLayer::from_rf(prefix, &init_rf(rng, n, &init)?)
        }
    })
}

fn nonzero(x: &Array3<f64>) -> u64 {
    x.iter().filter(|&&v| v != 0.0).count() as u64
}

fn is_binary(x: &Array3<f64>) -> bool {
    x.iter().all(|&v| v == 0.0 || v == 1.0)
}

impl Network {
    /// Builds a freshly initialised network. Every layer draws from its own
    /// RNG stream of `seed`.
    pub fn new(cfg: &NetworkConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut layers = Vec::with_capacity(cfg.layers);
        let mut width = cfg.inputs;
        for l in 0..cfg.layers {
            let name = format!("layer{l}");
            let mut proj_rng = Rng::new(seed, streams::LAYER_INIT_BASE + 2 * l as u64);
            let mut neuron_rng = Rng::new(seed, streams::LAYER_INIT_BASE + 2 * l as u64 + 1);
            let proj = if cfg.delays {
                Projection::Dcls(DclsLayer::init(
                    &format!("{name}.proj"),
                    &mut proj_rng,
                    width,
                    cfg.hidden,
                    cfg.max_delay,
                ))
            } else {
                Projection::Dense(DenseLayer::init(&format!("{name}.proj"), &mut proj_rng, width, cfg.hidden))
            };
            let bn = cfg.batchnorm.then(|| BatchNorm::new(&format!("{name}.bn"), cfg.hidden));
            let neuron = neuron_layer(cfg, &format!("{name}.neuron"), &mut neuron_rng)?;
            layers.push(HiddenLayer {
                proj,
                bn,
                neuron,
                dropout: cfg.dropout,
            });
            width = cfg.hidden;
        }
        let mut ro_rng = Rng::new(seed, streams::LAYER_INIT_BASE + 2 * cfg.layers as u64);
        let readout = LiReadout::init("readout", &mut ro_rng, width, cfg.classes)?;
        Ok(Self {
            layers,
            readout,
            spike: cfg.spike_config(),
            train_init: cfg.train_init,
            eval_init: cfg.eval_init,
        })
    }

    pub fn inputs(&self) -> usize {
        self.layers.first().map_or(self.readout.dense.inputs(), |l| l.proj.inputs())
    }

    pub fn classes(&self) -> usize {
        self.readout.classes()
    }

    pub fn has_delays(&self) -> bool {
        self.layers.iter().any(|l| matches!(l.proj, Projection::Dcls(_)))
    }

    /// Every trainable tensor in a fixed order: per hidden layer the
    /// projection, normalisation and neuron parameters, then the readout.
    pub fn params(&self) -> Vec<&Param> {
        let mut out = Vec::new();
        for l in &self.layers {
            match &l.proj {
                Projection::Dense(d) => out.push(&d.weight),
                Projection::Dcls(d) => {
                    out.push(&d.weight);
                    out.push(&d.delay);
                }
            }
            if let Some(bn) = &l.bn {
                out.push(&bn.gamma);
                out.push(&bn.beta_shift);
            }
            out.extend(l.neuron.params());
        }
        out.push(&self.readout.dense.weight);
        out.push(&self.readout.lambda_log);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            match &mut l.proj {
                Projection::Dense(d) => out.push(&mut d.weight),
                Projection::Dcls(d) => {
                    out.push(&mut d.weight);
                    out.push(&mut d.delay);
                }
            }
            if let Some(bn) = &mut l.bn {
                out.push(&mut bn.gamma);
                out.push(&mut bn.beta_shift);
            }
            out.extend(l.neuron.params_mut());
        }
        out.push(&mut self.readout.dense.weight);
        out.push(&mut self.readout.lambda_log);
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params().into_iter().find(|p| p.name == name)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params_mut().into_iter().find(|p| p.name == name)
    }

    /// Restores interval constraints after an optimizer step.
    pub fn project(&mut self) {
        for l in &mut self.layers {
            l.neuron.project();
            if let Projection::Dcls(d) = &mut l.proj {
                d.project();
            }
        }
    }

    /// Sets the shared kernel width of every delay layer.
    pub fn set_sigma(&mut self, sigma: f64) {
        for l in &mut self.layers {
            if let Projection::Dcls(d) = &mut l.proj {
                d.sigma = sigma;
            }
        }
    }

    pub fn max_delay(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match &l.proj {
            Projection::Dcls(d) => Some(d.max_delay),
            _ => None,
        })
    }

    pub fn set_theta(&mut self, theta: f64) {
        for l in &mut self.layers {
            l.neuron.set_theta(theta);
        }
    }

    /// Folds training-mode batch statistics into the running averages.
    pub fn apply_bn_stats(&mut self, stats: &[Option<BnStats>]) {
        for (l, s) in self.layers.iter_mut().zip(stats) {
            if let (Some(bn), Some(s)) = (&mut l.bn, s) {
                bn.update_running(s);
            }
        }
    }

    /// Runs the network on `x` (`[batch, time, inputs]`).
    ///
    /// `rng` supplies dropout masks and random initial states; in evaluation
    /// mode with zero initial states it is left untouched.
    pub fn forward(&self, x: &Array3<f64>, mode: Mode, rng: &mut Rng) -> Result<ForwardOutput> {
        let (bsz, t_len, f) = x.dim();
        if f != self.inputs() {
            return Err(Error::Shape(format!("network expects {} inputs, got {f}", self.inputs())));
        }
        let train = mode == Mode::Train;
        let init = if train { self.train_init } else { self.eval_init };
        let mut tape = train.then(Tape::new);
        let mut trace = RunTrace {
            samples: bsz as u64,
            timesteps: t_len as u64,
            layers: Vec::with_capacity(self.layers.len() + 1),
        };
        let mut bn_stats = Vec::with_capacity(self.layers.len());
        let mut h = x.as_standard_layout().into_owned();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut lt = LayerTrace {
                name: format!("layer{li}"),
                activity_in: nonzero(&h),
                inputs: h.dim().2,
                fan_out: layer.proj.outputs(),
                dense_input: !is_binary(&h),
                neurons: layer.neuron.size(),
                spikes: 0,
            };
            let z = match (&layer.proj, tape.as_mut()) {
                (Projection::Dense(d), Some(tp)) => {
                    let z = d.forward(&h)?;
                    tp.push(Node::Dense { layer: li, input: h });
                    z
                }
                (Projection::Dense(d), None) => d.forward(&h)?,
                (Projection::Dcls(d), Some(tp)) => {
                    let (z, saved) = d.forward_train(&h)?;
                    tp.push(Node::Dcls { layer: li, saved });
                    z
                }
                (Projection::Dcls(d), None) => d.forward_eval(&h)?,
            };
            let z = match (&layer.bn, tape.as_mut()) {
                (Some(bn), Some(tp)) => {
                    let (y, saved, stats) = bn.forward_train(&z)?;
                    tp.push(Node::BatchNorm { layer: li, saved });
                    bn_stats.push(Some(stats));
                    y
                }
                (Some(bn), None) => {
                    bn_stats.push(None);
                    bn.forward_eval(&z)?
                }
                (None, _) => {
                    bn_stats.push(None);
                    z
                }
            };
            let (s, saved) = layer.neuron.forward(z, init, &self.spike, rng, train)?;
            lt.spikes = nonzero(&s);
            trace.layers.push(lt);
            if let (Some(tp), Some(saved)) = (tape.as_mut(), saved) {
                tp.push(Node::Neuron { layer: li, saved });
            }
            h = if train && layer.dropout > 0.0 {
                let mask = dropout_mask(rng, bsz, s.dim().2, layer.dropout)?;
                let out = apply_mask(&s, &mask);
                if let Some(tp) = tape.as_mut() {
                    tp.push(Node::Dropout { mask });
                }
                out
            } else {
                s
            };
        }
        trace.layers.push(LayerTrace {
            name: "readout".into(),
            activity_in: nonzero(&h),
            inputs: h.dim().2,
            fan_out: self.readout.classes(),
            dense_input: !is_binary(&h),
            neurons: 0,
            spikes: 0,
        });
        let currents = self.readout.dense.forward(&h)?;
        let (logits, u) = self.readout.integrate(&currents)?;
        if let Some(tp) = tape.as_mut() {
            tp.push(Node::ReadoutDense { input: h });
            tp.push(Node::Readout {
                saved: LiSaved { currents, u },
            });
        }
        Ok(ForwardOutput {
            logits,
            tape,
            trace,
            bn_stats,
        })
    }
}
