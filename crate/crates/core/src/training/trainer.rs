//! The epoch loop: shuffled mini-batches, surrogate-gradient updates,
//! validation after every epoch and best-by-validation checkpointing.

use rayon::prelude::*;

use crate::analysis::{count_sops_with, sparsity, RunTrace, SopOptions};
use crate::config::{parse_config, RunConfig};
use crate::data::SpikeTensor;
use crate::error::{Error, Result};
use crate::network::{sigma_schedule, softmax_sum, softmax_sum_backward, Mode, Network};
use crate::numerics::{streams, Rng};

use super::adam::{Adam, GroupRates};
use super::checkpoint::{network_tensors, restore_network, Checkpoint, NamedTensor};
use super::log::LogRecord;
use super::loss::{correct, cross_entropy};
use super::schedule::Scheduler;

/// Aggregate metrics over one pass through a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub loss: f64,
    pub accuracy: f64,
    pub sparsity: f64,
    pub sops: f64,
    pub samples: usize,
}

pub struct TrainOutcome {
    pub log: Vec<LogRecord>,
    /// Snapshot at the best validation epoch; `None` when no epoch ran.
    pub best: Option<Checkpoint>,
    pub best_epoch: usize,
    pub best_accuracy: f64,
    /// Network state after the last epoch.
    pub network: Network,
}

fn check_data(cfg: &RunConfig, train: &SpikeTensor, val: &SpikeTensor) -> Result<(usize, usize)> {
    let inputs = train.channels();
    if val.channels() != inputs {
        return Err(Error::Config(format!(
            "train data has {inputs} channels but validation data has {}",
            val.channels()
        )));
    }
    if train.samples() == 0 || val.samples() == 0 {
        return Err(Error::Config("train and validation sets must be non-empty".into()));
    }
    let classes = train.classes().max(val.classes());
    if classes < 2 {
        return Err(Error::Config("data must contain at least 2 classes".into()));
    }
    if cfg.batchnorm && cfg.batch * train.timesteps() < 2 {
        return Err(Error::Config("batch normalisation needs batch × timesteps ≥ 2".into()));
    }
    Ok((inputs, classes))
}

fn sop_options(net: &Network, cfg: &RunConfig) -> SopOptions {
    SopOptions {
        delays: net.has_delays(),
        dense_as_macs: cfg.eval.dense_as_macs,
    }
}

/// Evaluation-mode pass over `data` in batches of `batch`.
pub fn evaluate(net: &Network, data: &SpikeTensor, batch: usize, opts: SopOptions, seed: u64) -> Result<EvalReport> {
    if net.inputs() != data.channels() {
        return Err(Error::Config(format!(
            "network expects {} channels, data has {}",
            net.inputs(),
            data.channels()
        )));
    }
    if let Some(&l) = data.labels.iter().find(|&&l| l as usize >= net.classes()) {
        return Err(Error::Data(format!("label {l} out of range for {} classes", net.classes())));
    }
    let base = Rng::new(seed, streams::EVAL);
    let n = data.samples();
    let idx: Vec<usize> = (0..n).collect();
    // batches are independent in evaluation mode; results are reduced in
    // batch order so the totals do not depend on the thread count
    let per_batch = idx
        .par_chunks(batch.max(1))
        .enumerate()
        .map(|(i, chunk)| -> Result<(f64, usize, RunTrace)> {
            let mut rng = base.fork(i as u64);
            let (x, labels) = data.gather(chunk);
            let out = net.forward(&x, Mode::Eval, &mut rng)?;
            let scores = softmax_sum(&out.logits);
            let (l, _) = cross_entropy(&scores, &labels)?;
            Ok((l * chunk.len() as f64, correct(&scores, &labels), out.trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut loss = 0.0;
    let mut hits = 0;
    let mut trace = RunTrace::default();
    for (l, h, t) in &per_batch {
        loss += l;
        hits += h;
        trace.merge(t);
    }
    Ok(EvalReport {
        loss: loss / n.max(1) as f64,
        accuracy: hits as f64 / n.max(1) as f64,
        sparsity: sparsity(&trace),
        sops: count_sops_with(&trace, opts),
        samples: n,
    })
}

struct State {
    net: Network,
    adam: Adam,
    sched_w: Scheduler,
    sched_d: Scheduler,
    order_rng: Rng,
    forward_rng: Rng,
    sigma: f64,
}

fn rng_words(r: &Rng) -> [u64; 4] {
    let p = r.word_pos();
    [r.seed(), r.stream_id(), (p >> 64) as u64, p as u64]
}

fn snapshot(st: &State, epoch: usize, best: f64, config_text: &str) -> Checkpoint {
    let mut c = Checkpoint::default();
    c.push(NamedTensor::u64_vec(
        "meta.shape",
        vec![st.net.inputs() as u64, st.net.classes() as u64],
    ));
    c.push(NamedTensor::bytes("meta.config", config_text.as_bytes().to_vec()));
    for t in network_tensors(&st.net) {
        c.push(t);
    }
    for (p, (m, v)) in st.net.params().iter().zip(st.adam.m.iter().zip(&st.adam.v)) {
        c.push(NamedTensor::f64(format!("adam.m.{}", p.name), m));
        c.push(NamedTensor::f64(format!("adam.v.{}", p.name), v));
    }
    c.push(NamedTensor::u64_vec("adam.step", vec![st.adam.step]));
    let mut words = rng_words(&st.order_rng).to_vec();
    words.extend(rng_words(&st.forward_rng));
    c.push(NamedTensor::u64_vec("train.rng", words));
    c.push(NamedTensor::u64_vec("train.epoch", vec![epoch as u64]));
    c.push(NamedTensor::f64_vec("train.best", vec![best]));
    c.push(NamedTensor::f64_vec("train.sigma", vec![st.sigma]));
    c.push(NamedTensor::f64_vec("sched.weights", st.sched_w.state().to_vec()));
    c.push(NamedTensor::f64_vec("sched.delays", st.sched_d.state().to_vec()));
    c
}

/// Rebuilds the configuration and network stored in a checkpoint.
pub fn load_model(ckpt: &Checkpoint) -> Result<(RunConfig, Network)> {
    let text = std::str::from_utf8(ckpt.bytes("meta.config")?)
        .map_err(|_| Error::Data("checkpoint config is not UTF-8".into()))?;
    let cfg = parse_config(text)?;
    let shape = ckpt.u64s("meta.shape")?;
    if shape.len() != 2 {
        return Err(Error::Data("checkpoint shape record must hold 2 entries".into()));
    }
    let mut net = Network::new(&cfg.network(shape[0] as usize, shape[1] as usize), cfg.seed)?;
    restore_network(&mut net, ckpt)?;
    Ok((cfg, net))
}

/// Trains a network from scratch on `train`, validating on `val` after
/// every epoch. Each log record is handed to `sink` as soon as it exists.
///
/// `config_text` is stored verbatim in checkpoints; it must parse to `cfg`.
pub fn train(
    cfg: &RunConfig,
    config_text: &str,
    train: &SpikeTensor,
    val: &SpikeTensor,
    sink: &mut dyn FnMut(&LogRecord) -> Result<()>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (inputs, classes) = check_data(cfg, train, val)?;
    let net = Network::new(&cfg.network(inputs, classes), cfg.seed)?;
    let adam = Adam::new(&net.params());
    let sched_w = Scheduler::new(cfg.weight_schedule(), cfg.optim.lr_weights, cfg.epochs)?;
    let sched_d = Scheduler::new(cfg.delay_schedule(), cfg.optim.lr_delays, cfg.epochs)?;
    let mut st = State {
        net,
        adam,
        sched_w,
        sched_d,
        order_rng: Rng::new(cfg.seed, streams::BATCH_ORDER),
        forward_rng: Rng::new(cfg.seed, streams::FORWARD),
        sigma: sigma_schedule(0, cfg.epochs, cfg.max_delay),
    };
    st.net.set_sigma(st.sigma);
    let opts = sop_options(&st.net, cfg);
    let delays = st.net.has_delays();
    let lr_d = |s: &Scheduler| if delays { s.lr } else { 0.0 };

    let mut log = Vec::new();
    let mut emit = |rec: LogRecord, log: &mut Vec<LogRecord>| -> Result<()> {
        sink(&rec)?;
        log.push(rec);
        Ok(())
    };

    let init = evaluate(&st.net, val, cfg.batch, opts, cfg.seed)?;
    emit(
        LogRecord {
            epoch: 0,
            split: "val".into(),
            loss: init.loss,
            accuracy: init.accuracy,
            sparsity: init.sparsity,
            sops: init.sops,
            lr_weights: st.sched_w.lr,
            lr_delays: lr_d(&st.sched_d),
        },
        &mut log,
    )?;

    let mut best: Option<Checkpoint> = None;
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut order: Vec<usize> = (0..train.samples()).collect();
    for epoch in 1..=cfg.epochs {
        if delays {
            st.sigma = sigma_schedule(epoch - 1, cfg.epochs, cfg.max_delay);
            st.net.set_sigma(st.sigma);
        }
        let rates = GroupRates {
            weights: st.sched_w.lr,
            neuron: st.sched_w.lr * cfg.optim.neuron_lr_scale,
            delays: st.sched_d.lr,
        };
        st.order_rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut hits = 0;
        let mut trace = RunTrace::default();
        for chunk in order.chunks(cfg.batch) {
            if cfg.batchnorm && chunk.len() * train.timesteps() < 2 {
                continue;
            }
            let (x, labels) = train.gather(chunk);
            let out = st.net.forward(&x, Mode::Train, &mut st.forward_rng)?;
            let scores = softmax_sum(&out.logits);
            let (loss, dscores) = cross_entropy(&scores, &labels)?;
            loss_sum += loss * chunk.len() as f64;
            hits += correct(&scores, &labels);
            trace.merge(&out.trace);
            let dlogits = softmax_sum_backward(&out.logits, &dscores);
            let mut tape = out.tape.expect("training forward records a tape");
            let grads = tape.backward(&st.net, &dlogits)?;
            st.adam.update(st.net.params_mut(), &grads, rates)?;
            st.net.project();
            st.net.apply_bn_stats(&out.bn_stats);
        }
        let n = train.samples() as f64;
        emit(
            LogRecord {
                epoch,
                split: "train".into(),
                loss: loss_sum / n,
                accuracy: hits as f64 / n,
                sparsity: sparsity(&trace),
                sops: count_sops_with(&trace, opts),
                lr_weights: rates.weights,
                lr_delays: if delays { rates.delays } else { 0.0 },
            },
            &mut log,
        )?;
        let v = evaluate(&st.net, val, cfg.batch, opts, cfg.seed)?;
        emit(
            LogRecord {
                epoch,
                split: "val".into(),
                loss: v.loss,
                accuracy: v.accuracy,
                sparsity: v.sparsity,
                sops: v.sops,
                lr_weights: rates.weights,
                lr_delays: if delays { rates.delays } else { 0.0 },
            },
            &mut log,
        )?;
        st.sched_w.step(v.accuracy);
        st.sched_d.step(v.accuracy);
        if v.accuracy > best_acc {
            best_acc = v.accuracy;
            best_epoch = epoch;
            best = Some(snapshot(&st, epoch, best_acc, config_text));
        }
        log::info!(
            "epoch {epoch}: train loss {:.4}, val acc {:.4}",
            loss_sum / n,
            v.accuracy
        );
    }
    Ok(TrainOutcome {
        log,
        best,
        best_epoch,
        best_accuracy: if best_epoch == 0 { init.accuracy } else { best_acc },
        network: st.net,
    })
}
