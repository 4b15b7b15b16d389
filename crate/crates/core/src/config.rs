//! Run configuration: a TOML document with top-level run settings and
//! optional `[neuron]`, `[surrogate]`, `[optim]`, `[data]` and `[eval]`
//! sections. Every key has a default, unknown keys are rejected, and errors
//! name the offending key and line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{gen_synthetic, load_spkt, SpikeTensor, SynthTaskSpec};
use crate::engine::surrogate::{SpikeFn, SurrogateSpec};
use crate::error::{Error, Result};
use crate::network::{InitState, LayerOutput, NetworkConfig};
use crate::neurons::NeuronKind;
use crate::training::{ScheduleKind, ScheduleSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    pub model: NeuronKind,
    /// Number of spiking hidden layers.
    pub layers: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub dropout: f64,
    pub batchnorm: bool,
    /// Learnable synaptic delays on the hidden projections.
    pub delays: bool,
    pub max_delay: usize,
    pub neuron: NeuronSection,
    pub surrogate: SurrogateSpec,
    pub optim: OptimSection,
    pub data: DataSection,
    pub eval: EvalSection,
}

/// Datasets for one run.
pub struct RunData {
    pub train: SpikeTensor,
    pub val: SpikeTensor,
    pub test: Option<SpikeTensor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronSection {
    /// Spiking threshold; fixed, never trained. `inf` disables spiking.
    pub theta: f64,
    pub spike_fn: SpikeFn,
    pub detach_reset: bool,
    pub output: LayerOutput,
    pub train_init: InitState,
    pub eval_init: InitState,
    pub csilif_dt_min: f64,
    pub csilif_dt_max: f64,
}

impl Default for NeuronSection {
    fn default() -> Self {
        let n = NetworkConfig::default();
        Self {
            theta: n.theta,
            spike_fn: n.spike_fn,
            detach_reset: n.detach_reset,
            output: n.output,
            train_init: n.train_init,
            eval_init: n.eval_init,
            csilif_dt_min: n.csilif_dt_min,
            csilif_dt_max: n.csilif_dt_max,
        }
    }
}

/// Weight schedule choice; `auto` means one-cycle with delays, plateau
/// without.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleChoice {
    Auto,
    Plateau,
    OneCycle,
    Cosine,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimSection {
    pub lr_weights: f64,
    pub lr_delays: f64,
    /// Multiplier on `lr_weights` for neuron dynamics parameters.
    pub neuron_lr_scale: f64,
    pub schedule_weights: ScheduleChoice,
    pub schedule_delays: ScheduleChoice,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub one_cycle_max_factor: f64,
}

impl Default for OptimSection {
    fn default() -> Self {
        Self {
            lr_weights: 1e-3,
            lr_delays: 1e-1,
            neuron_lr_scale: 1.0,
            schedule_weights: ScheduleChoice::Auto,
            schedule_delays: ScheduleChoice::Cosine,
            plateau_patience: 5,
            plateau_factor: 0.7,
            one_cycle_max_factor: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    Files,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub source: DataSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    pub synthetic: SynthTaskSpec,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: DataSource::Synthetic,
            train: None,
            val: None,
            test: None,
            synthetic: SynthTaskSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Count real-valued input features as dense multiply-accumulates.
    pub dense_as_macs: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            model: NeuronKind::Silif,
            layers: 2,
            hidden: 512,
            epochs: 100,
            batch: 128,
            dropout: 0.1,
            batchnorm: true,
            delays: false,
            max_delay: 11,
            neuron: NeuronSection::default(),
            surrogate: SurrogateSpec::default(),
            optim: OptimSection::default(),
            data: DataSection::default(),
            eval: EvalSection::default(),
        }
    }
}

fn line_at(text: &str, byte: usize) -> usize {
    text[..byte.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (empty section = top level).
fn line_of(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('[') {
            current = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if let Some((k, _)) = l.split_once('=') {
            let k = k.trim();
            let full = if let Some((sec, leaf)) = k.rsplit_once('.') {
                (if current.is_empty() { sec.to_string() } else { format!("{current}.{sec}") }, leaf)
            } else {
                (current.clone(), k)
            };
            if full.0 == section && full.1 == key {
                return Some(i + 1);
            }
        }
    }
    None
}

fn describe_toml_error(text: &str, e: &toml::de::Error) -> Error {
    let msg = e.message().trim().to_string();
    let Some(span) = e.span() else {
        return Error::Config(msg);
    };
    let line = line_at(text, span.start);
    let line_text = text.lines().nth(line - 1).unwrap_or("");
    let key = line_text.split_once('=').map(|(k, _)| k.trim().to_string());
    let kind = if msg.contains("invalid value: integer `-") {
        "range error: value must be nonnegative"
    } else {
        msg.as_str()
    };
    match key {
        Some(k) if !k.is_empty() => Error::Config(format!("line {line}, key `{k}`: {kind}")),
        _ => Error::Config(format!("line {line}: {kind}")),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| describe_toml_error(text, &e))?;
    cfg.validate_in(text)?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_in("")
    }

    fn validate_in(&self, text: &str) -> Result<()> {
        let mut checks: Vec<(&str, &str, bool, String)> = vec![
            ("", "layers", self.layers >= 1, "must be at least 1".into()),
            ("", "hidden", self.hidden >= 1, "must be at least 1".into()),
            ("", "batch", self.batch >= 1, "must be at least 1".into()),
            ("", "dropout", (0.0..1.0).contains(&self.dropout), "must be in [0, 1)".into()),
            ("", "max_delay", !self.delays || self.max_delay >= 1, "must be at least 1 with delays".into()),
            ("neuron", "theta", self.neuron.theta > 0.0, "must be positive".into()),
            (
                "neuron",
                "csilif_dt_min",
                self.neuron.csilif_dt_min > 0.0 && self.neuron.csilif_dt_min <= self.neuron.csilif_dt_max,
                "must satisfy 0 < csilif_dt_min ≤ csilif_dt_max".into(),
            ),
            ("surrogate", "width", self.surrogate.width > 0.0 && self.surrogate.width.is_finite(), "must be positive".into()),
            ("surrogate", "scale", self.surrogate.scale > 0.0 && self.surrogate.scale.is_finite(), "must be positive".into()),
            ("optim", "lr_weights", self.optim.lr_weights > 0.0 && self.optim.lr_weights.is_finite(), "must be positive".into()),
            ("optim", "lr_delays", self.optim.lr_delays > 0.0 && self.optim.lr_delays.is_finite(), "must be positive".into()),
            ("optim", "neuron_lr_scale", self.optim.neuron_lr_scale >= 0.0, "must be nonnegative".into()),
            (
                "optim",
                "plateau_factor",
                self.optim.plateau_factor > 0.0 && self.optim.plateau_factor < 1.0,
                "must be in (0, 1)".into(),
            ),
            ("optim", "one_cycle_max_factor", self.optim.one_cycle_max_factor >= 1.0, "must be at least 1".into()),
        ];
        let s = &self.data.synthetic;
        checks.extend([
            ("data.synthetic", "template_rate", (0.0..=1.0).contains(&s.template_rate), "must be in [0, 1]".to_string()),
            ("data.synthetic", "drop_prob", (0.0..=1.0).contains(&s.drop_prob), "must be in [0, 1]".to_string()),
            ("data.synthetic", "classes", s.classes >= 1, "must be at least 1".to_string()),
            ("data.synthetic", "channels", s.channels >= 1, "must be at least 1".to_string()),
            ("data.synthetic", "timesteps", s.timesteps >= 1, "must be at least 1".to_string()),
            ("data.synthetic", "samples_per_class", s.samples_per_class >= 1, "must be at least 1".to_string()),
        ]);
        if self.data.source == DataSource::Files && (self.data.train.is_none() || self.data.val.is_none()) {
            checks.push(("data", "train", false, "file data needs both `train` and `val` paths".into()));
        }
        for (section, key, ok, msg) in checks {
            if !ok {
                let name = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
                return Err(match line_of(text, section, key) {
                    Some(line) => Error::Config(format!("line {line}, key `{name}`: range error: {msg}")),
                    None => Error::Config(format!("key `{name}`: range error: {msg}")),
                });
            }
        }
        Ok(())
    }

    /// Network architecture for `inputs` channels and `classes` outputs.
    pub fn network(&self, inputs: usize, classes: usize) -> NetworkConfig {
        NetworkConfig {
            model: self.model,
            inputs,
            hidden: self.hidden,
            layers: self.layers,
            classes,
            dropout: self.dropout,
            batchnorm: self.batchnorm,
            delays: self.delays,
            max_delay: self.max_delay,
            theta: self.neuron.theta,
            surrogate: self.surrogate,
            spike_fn: self.neuron.spike_fn,
            detach_reset: self.neuron.detach_reset,
            output: self.neuron.output,
            train_init: self.neuron.train_init,
            eval_init: self.neuron.eval_init,
            csilif_dt_min: self.neuron.csilif_dt_min,
            csilif_dt_max: self.neuron.csilif_dt_max,
        }
    }

    fn schedule(&self, choice: ScheduleChoice, auto: ScheduleKind) -> ScheduleSpec {
        let kind = match choice {
            ScheduleChoice::Auto => auto,
            ScheduleChoice::Plateau => ScheduleKind::Plateau,
            ScheduleChoice::OneCycle => ScheduleKind::OneCycle,
            ScheduleChoice::Cosine => ScheduleKind::Cosine,
            ScheduleChoice::None => ScheduleKind::None,
        };
        ScheduleSpec {
            kind,
            patience: self.optim.plateau_patience,
            factor: self.optim.plateau_factor,
            max_factor: self.optim.one_cycle_max_factor,
        }
    }

    pub fn weight_schedule(&self) -> ScheduleSpec {
        let auto = if self.delays { ScheduleKind::OneCycle } else { ScheduleKind::Plateau };
        self.schedule(self.optim.schedule_weights, auto)
    }

    pub fn delay_schedule(&self) -> ScheduleSpec {
        self.schedule(self.optim.schedule_delays, ScheduleKind::Cosine)
    }

    /// Training, validation and (if available) test sets named by the
    /// `[data]` section. File paths are resolved against `base`.
    pub fn load_data(&self, base: &Path) -> Result<RunData> {
        match self.data.source {
            DataSource::Synthetic => {
                let s = gen_synthetic(&self.data.synthetic)?;
                Ok(RunData {
                    train: s.train,
                    val: s.val,
                    test: Some(s.test),
                })
            }
            DataSource::Files => {
                let load = |p: &Option<PathBuf>, what: &str| -> Result<Option<SpikeTensor>> {
                    match p {
                        Some(p) => load_spkt(base.join(p))
                            .map(Some)
                            .map_err(|e| Error::Config(format!("cannot load {what} data {}: {e}", p.display()))),
                        None => Ok(None),
                    }
                };
                Ok(RunData {
                    train: load(&self.data.train, "train")?.ok_or_else(|| Error::Config("data.train is required".into()))?,
                    val: load(&self.data.val, "validation")?.ok_or_else(|| Error::Config("data.val is required".into()))?,
                    test: load(&self.data.test, "test")?,
                })
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// The default configuration as a commented TOML document.
pub fn defaults_text() -> String {
    let mut out = String::from(
        "# Default run configuration. Every key is optional.\n\
         # model: silif | csilif | adlif | cadlif | rf\n\
         # neuron.spike_fn: heaviside | relaxed; neuron.output: spikes | membrane\n\
         # neuron.train_init / eval_init: zero | uniform\n\
         # optim.schedule_*: auto | plateau | one_cycle | cosine | none\n\
         #   (auto = one_cycle with delays, plateau otherwise)\n\
         # data.source: synthetic | files (files needs data.train and data.val .spkt paths)\n\n",
    );
    out.push_str(&RunConfig::default().to_toml());
    out
}
