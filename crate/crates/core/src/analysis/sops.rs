use serde::Serialize;

use super::trace::RunTrace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SopOptions {
    /// Each synapse carries a delay kernel, doubling the operation count.
    pub delays: bool,
    /// Count a real-valued input stage as dense multiply-accumulates
    /// (every input at every step) instead of by its nonzero entries.
    pub dense_as_macs: bool,
}

/// Synaptic operations per sample: nonzero activity through each weight
/// times the fan-out it reaches.
pub fn count_sops(trace: &RunTrace, delay_enabled: bool) -> f64 {
    count_sops_with(
        trace,
        SopOptions {
            delays: delay_enabled,
            dense_as_macs: false,
        },
    )
}

pub fn count_sops_with(trace: &RunTrace, opts: SopOptions) -> f64 {
    if trace.samples == 0 {
        return 0.0;
    }
    let mut total: u128 = 0;
    for l in &trace.layers {
        let active = if opts.dense_as_macs && l.dense_input {
            l.inputs as u128 * trace.timesteps as u128 * trace.samples as u128
        } else {
            l.activity_in as u128
        };
        total += active * l.fan_out as u128;
    }
    if opts.delays {
        total *= 2;
    }
    total as f64 / trace.samples as f64
}

/// Fraction of silent neuron-timesteps in one spiking layer.
pub fn layer_sparsity(trace: &RunTrace, layer: usize) -> Option<f64> {
    let l = trace.layers.get(layer)?;
    if !l.is_spiking() || trace.samples == 0 || trace.timesteps == 0 {
        return None;
    }
    let slots = l.neurons as f64 * trace.timesteps as f64 * trace.samples as f64;
    Some(1.0 - l.spikes as f64 / slots)
}

/// Silent fraction averaged over the spiking layers; 1.0 when there are none.
pub fn sparsity(trace: &RunTrace) -> f64 {
    let per: Vec<f64> = (0..trace.layers.len()).filter_map(|i| layer_sparsity(trace, i)).collect();
    if per.is_empty() {
        1.0
    } else {
        per.iter().sum::<f64>() / per.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EventSsmSops {
    pub block1: u64,
    pub block2: u64,
    pub total: u64,
}

/// Closed-form operation count of a two-block event-driven SSM.
///
/// The first block touches two `N × N` matrices per input event; the second
/// touches every dense matrix and two per SSM for each of its events.
pub fn eventssm_sops(
    state_size: u64,
    events_block1: u64,
    events_block2: u64,
    ssm_count_block2: u64,
    dense_count_block2: u64,
) -> EventSsmSops {
    let n2 = state_size * state_size;
    let block1 = events_block1 * 2 * n2;
    let block2 = events_block2 * (dense_count_block2 + 2 * ssm_count_block2) * n2;
    EventSsmSops {
        block1,
        block2,
        total: block1 + block2,
    }
}

/// Millions with one decimal, as `98.3M`.
pub fn format_millions(v: f64) -> String {
    format!("{:.1}M", v / 1e6)
}
