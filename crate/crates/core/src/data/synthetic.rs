//! Spatiotemporal template-matching task for desk-scale training runs.
//!
//! Each class owns a random binary `time × channel` template. A sample
//! copies its class template, drops every spike independently and shifts
//! the survivors by a uniform integer jitter (clipped to the sequence).

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use super::tensor::{SpikeMeta, SpikeTensor};
use crate::error::{Error, Result};
use crate::numerics::{streams, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthTaskSpec {
    pub classes: usize,
    pub channels: usize,
    pub timesteps: usize,
    /// Spike probability per template channel-step.
    pub template_rate: f64,
    pub jitter_steps: usize,
    pub drop_prob: f64,
    pub samples_per_class: usize,
    pub seed: u64,
}

impl Default for SynthTaskSpec {
    fn default() -> Self {
        Self {
            classes: 10,
            channels: 64,
            timesteps: 100,
            template_rate: 0.05,
            jitter_steps: 2,
            drop_prob: 0.2,
            samples_per_class: 200,
            seed: 0,
        }
    }
}

impl SynthTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.channels == 0 || self.timesteps == 0 || self.samples_per_class == 0 {
            return Err(Error::ParamRange("synthetic task sizes must be positive".into()));
        }
        for (name, p) in [("template_rate", self.template_rate), ("drop_prob", self.drop_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ParamRange(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSplits {
    pub train: SpikeTensor,
    pub val: SpikeTensor,
    pub test: SpikeTensor,
    pub templates: Vec<Array2<f64>>,
}

/// Class templates, `timesteps × channels` each.
pub fn synth_templates(spec: &SynthTaskSpec) -> Vec<Array2<f64>> {
    let mut rng = Rng::new(spec.seed, streams::DATA_TEMPLATES);
    (0..spec.classes)
        .map(|_| {
            Array2::from_shape_simple_fn((spec.timesteps, spec.channels), || {
                rng.bernoulli(spec.template_rate) as u8 as f64
            })
        })
        .collect()
}

/// Generates the task and splits it 70/15/15 after a seeded shuffle.
pub fn gen_synthetic(spec: &SynthTaskSpec) -> Result<SynthSplits> {
    spec.validate()?;
    let templates = synth_templates(spec);
    let n = spec.classes * spec.samples_per_class;
    let mut data = Array3::zeros((n, spec.timesteps, spec.channels));
    let mut labels = Vec::with_capacity(n);
    let mut rng = Rng::new(spec.seed, streams::DATA_SAMPLES);
    let j = spec.jitter_steps as i64;
    let last = spec.timesteps as i64 - 1;
    for (class, tpl) in templates.iter().enumerate() {
        for k in 0..spec.samples_per_class {
            let idx = class * spec.samples_per_class + k;
            labels.push(class as u32);
            for ((t, c), &v) in tpl.indexed_iter() {
                if v == 0.0 || rng.bernoulli(spec.drop_prob) {
                    continue;
                }
                let shift = if j > 0 { rng.below(2 * j as u64 + 1) as i64 - j } else { 0 };
                let tt = (t as i64 + shift).clamp(0, last) as usize;
                data[[idx, tt, c]] = 1.0;
            }
        }
    }
    let meta = SpikeMeta {
        bin_ms: 1.0,
        channels: spec.channels,
        class_names: (0..spec.classes).map(|c| format!("class{c}")).collect(),
        lengths: Vec::new(),
    };
    let all = SpikeTensor::new(data, labels, meta)?;
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(spec.seed, streams::DATA_SPLIT).shuffle(&mut order);
    let n_train = (n as f64 * 0.70).round() as usize;
    let n_val = (n as f64 * 0.15).round() as usize;
    Ok(SynthSplits {
        train: all.subset(&order[..n_train]),
        val: all.subset(&order[n_train..n_train + n_val]),
        test: all.subset(&order[n_train + n_val..]),
        templates,
    })
}
