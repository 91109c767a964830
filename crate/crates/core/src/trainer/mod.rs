//! Minibatch SGD training loop, evaluation and SNR sweeps.
//!
//! The loop is deterministic by construction for any thread count:
//! per-sample gradients are collected into slots indexed by batch
//! position and reduced serially in that order, so data parallelism
//! changes wall clock, never results.

mod metrics;

pub use metrics::{Metrics, MetricsRow, Split};

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arch::{build_network, Profile, Variant};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::radar_sim::{generate_dataset, Dataset, RadarParams};

/// Default learning rates, picked by the grid search documented in the
/// repository README.
pub const DEFAULT_LR_MAIN: f64 = 8e-2;
pub const DEFAULT_LR_SP: f64 = 5e-2;

/// Core SGD settings, independent of how the network is built.
#[derive(Debug, Clone)]
pub struct SgdOptions {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_main: f64,
    pub lr_sp: f64,
    pub seed: u64,
    pub threads: usize,
    /// Record wall-clock timestamps into the metrics rows. Off by
    /// default: timing makes the metrics CSV non-reproducible.
    pub record_seconds: bool,
}

impl Default for SgdOptions {
    fn default() -> Self {
        SgdOptions {
            batch_size: 50,
            epochs: 5,
            lr_main: DEFAULT_LR_MAIN,
            lr_sp: DEFAULT_LR_SP,
            seed: 0,
            threads: 1,
            record_seconds: false,
        }
    }
}

/// Full training configuration: SGD settings plus the architecture
/// choice and dataset bookkeeping.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub sgd: SgdOptions,
    pub variant: Variant,
    pub profile: Profile,
    /// Paths recorded for run manifests; loading is the caller's job.
    pub train_path: Option<String>,
    pub val_path: Option<String>,
}

impl TrainConfig {
    pub fn new(variant: Variant, profile: Profile) -> Self {
        TrainConfig {
            sgd: SgdOptions::default(),
            variant,
            profile,
            train_path: None,
            val_path: None,
        }
    }
}

fn validate_options(opts: &SgdOptions, n_train: usize) -> Result<()> {
    if opts.batch_size < 1 {
        return Err(Error::Parameter("batch_size must be at least 1".into()));
    }
    if opts.epochs < 1 {
        return Err(Error::Parameter("epochs must be at least 1".into()));
    }
    if !(opts.lr_main > 0.0) || !(opts.lr_sp > 0.0) {
        return Err(Error::Parameter(format!(
            "learning rates must be positive, got lr_main={}, lr_sp={}",
            opts.lr_main, opts.lr_sp
        )));
    }
    if n_train == 0 {
        return Err(Error::Parameter("training dataset is empty".into()));
    }
    if opts.batch_size > n_train {
        return Err(Error::Parameter(format!(
            "batch_size {} exceeds dataset size {n_train}",
            opts.batch_size
        )));
    }
    Ok(())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    let _ = v[best];
    best
}

type SamplePass = (f64, bool, Vec<Vec<f64>>);

fn sample_pass(worker: &mut Network, ds: &Dataset, index: usize) -> Result<SamplePass> {
    let sample = &ds.samples[index];
    worker.zero_grads();
    let probs = worker.forward(&sample.raw)?;
    let loss = worker.loss(sample.label)?;
    let correct = argmax(&probs) == sample.label;
    worker.backward(sample.label)?;
    Ok((loss, correct, worker.collect_grads()))
}

/// Forward/backward over one batch with per-sample gradient slots filled
/// in index order: (mean loss, accuracy, per-layer gradient sums).
fn batch_pass(
    net: &Network,
    ds: &Dataset,
    indices: &[usize],
    threads: usize,
) -> Result<(f64, f64, Vec<Vec<f64>>)> {
    let mut slots: Vec<Option<Result<SamplePass>>> = Vec::new();
    slots.resize_with(indices.len(), || None);

    let threads = threads.max(1).min(indices.len());
    if threads <= 1 {
        let mut worker = net.clone();
        for (slot, &i) in slots.iter_mut().zip(indices) {
            *slot = Some(sample_pass(&mut worker, ds, i));
        }
    } else {
        let chunk = indices.len().div_ceil(threads);
        std::thread::scope(|scope| {
            for (slot_chunk, idx_chunk) in slots.chunks_mut(chunk).zip(indices.chunks(chunk)) {
                scope.spawn(move || {
                    let mut worker = net.clone();
                    for (slot, &i) in slot_chunk.iter_mut().zip(idx_chunk) {
                        *slot = Some(sample_pass(&mut worker, ds, i));
                    }
                });
            }
        });
    }

    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let mut grad_sums: Option<Vec<Vec<f64>>> = None;
    for slot in slots {
        let (loss, ok, grads) = slot.expect("slot filled")?;
        loss_sum += loss;
        correct += ok as usize;
        match &mut grad_sums {
            None => grad_sums = Some(grads),
            Some(sums) => {
                for (sum, g) in sums.iter_mut().zip(&grads) {
                    for (s, v) in sum.iter_mut().zip(g) {
                        *s += v;
                    }
                }
            }
        }
    }
    let n = indices.len() as f64;
    Ok((
        loss_sum / n,
        correct as f64 / n,
        grad_sums.expect("non-empty batch"),
    ))
}

fn eval_pass(net: &Network, ds: &Dataset, threads: usize) -> Result<(f64, f64)> {
    if ds.samples.is_empty() {
        return Err(Error::Parameter("evaluation dataset is empty".into()));
    }
    let run = |worker: &mut Network, range: std::ops::Range<usize>| -> Result<(f64, usize)> {
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for i in range {
            let sample = &ds.samples[i];
            let probs = worker.forward(&sample.raw)?;
            loss_sum += worker.loss(sample.label)?;
            correct += (argmax(&probs) == sample.label) as usize;
        }
        Ok((loss_sum, correct))
    };

    let n = ds.samples.len();
    let threads = threads.max(1).min(n);
    let mut partials: Vec<Option<Result<(f64, usize)>>> = Vec::new();
    partials.resize_with(threads, || None);
    if threads <= 1 {
        let mut worker = net.clone();
        partials[0] = Some(run(&mut worker, 0..n));
    } else {
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for (t, slot) in partials.iter_mut().enumerate() {
                let start = t * chunk;
                let end = ((t + 1) * chunk).min(n);
                scope.spawn(move || {
                    let mut worker = net.clone();
                    *slot = Some(run(&mut worker, start..end));
                });
            }
        });
    }

    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for p in partials {
        let (l, c) = p.expect("partial filled")?;
        loss_sum += l;
        correct += c;
    }
    Ok((correct as f64 / n as f64, loss_sum / n as f64))
}

/// Fraction of argmax-correct predictions; never mutates parameters (it
/// runs on a clone of the network).
pub fn evaluate(net: &Network, ds: &Dataset, threads: usize) -> Result<f64> {
    Ok(eval_pass(net, ds, threads)?.0)
}

/// Run the SGD loop on an existing network. `on_epoch` fires after each
/// completed epoch (checkpointing hook).
pub fn train_network(
    net: &mut Network,
    opts: &SgdOptions,
    train_set: &Dataset,
    val_set: &Dataset,
    mut on_epoch: impl FnMut(usize, &Network) -> Result<()>,
) -> Result<Metrics> {
    validate_options(opts, train_set.samples.len())?;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    shuffle_rng.set_stream(u64::MAX); // distinct from the dataset sample streams

    let n = train_set.samples.len();
    let iters_per_epoch = n / opts.batch_size;
    if iters_per_epoch == 0 {
        return Err(Error::Parameter(format!(
            "batch_size {} exceeds dataset size {n}",
            opts.batch_size
        )));
    }

    let started = Instant::now();
    let mut metrics = Metrics::default();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut iteration = 0usize;

    for epoch in 1..=opts.epochs {
        let epoch_started = Instant::now();
        indices.shuffle(&mut shuffle_rng);

        for batch in indices.chunks_exact(opts.batch_size).take(iters_per_epoch) {
            let (loss, accuracy, grad_sums) = batch_pass(net, train_set, batch, opts.threads)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss {loss} at iteration {}",
                    iteration + 1
                )));
            }
            let groups = net.param_groups();
            let scale = 1.0 / opts.batch_size as f64;
            let updates: Vec<Vec<f64>> = grad_sums
                .iter()
                .zip(&groups)
                .map(|(g, group)| {
                    let lr = match group {
                        crate::network::ParamGroup::Sp => opts.lr_sp,
                        crate::network::ParamGroup::Main => opts.lr_main,
                    };
                    g.iter().map(|v| -lr * scale * v).collect()
                })
                .collect();
            net.apply_updates(&updates)?;

            iteration += 1;
            metrics.rows.push(MetricsRow {
                iteration,
                epoch,
                split: Split::Train,
                loss,
                accuracy,
                rho: net.sp_params(),
                seconds: opts
                    .record_seconds
                    .then(|| started.elapsed().as_secs_f64()),
            });
        }

        let (train_acc, train_loss) = eval_pass(net, train_set, opts.threads)?;
        metrics.rows.push(MetricsRow {
            iteration,
            epoch,
            split: Split::TrainEpoch,
            loss: train_loss,
            accuracy: train_acc,
            rho: net.sp_params(),
            seconds: opts
                .record_seconds
                .then(|| started.elapsed().as_secs_f64()),
        });
        let (val_acc, val_loss) = eval_pass(net, val_set, opts.threads)?;
        metrics.rows.push(MetricsRow {
            iteration,
            epoch,
            split: Split::Val,
            loss: val_loss,
            accuracy: val_acc,
            rho: net.sp_params(),
            seconds: opts
                .record_seconds
                .then(|| started.elapsed().as_secs_f64()),
        });

        metrics.epoch_seconds.push(epoch_started.elapsed().as_secs_f64());
        on_epoch(epoch, net)?;
    }

    metrics.final_rho = net.sp_params();
    Ok(metrics)
}

/// Build the configured architecture and train it.
pub fn train(
    config: &TrainConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    on_epoch: impl FnMut(usize, &Network) -> Result<()>,
) -> Result<(Network, Metrics)> {
    if train_set.params.raw_size != config.profile.params.raw_size {
        return Err(Error::Dimension(format!(
            "dataset raw size {} does not match profile '{}' ({})",
            train_set.params.raw_size, config.profile.name, config.profile.params.raw_size
        )));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.sgd.seed);
    init_rng.set_stream(u64::MAX - 1);
    let mut net = build_network(&config.profile, config.variant, &mut init_rng)?;
    let metrics = train_network(&mut net, &config.sgd, train_set, val_set, on_epoch)?;
    Ok((net, metrics))
}

/// Evaluate a trained network on freshly generated validation sets, one
/// per SNR point. Every point reuses `seed`, so sweeps are reproducible
/// and differ across points only in the noise scale.
pub fn snr_sweep(
    net: &Network,
    snr_list: &[f64],
    n_per_point: usize,
    params: &RadarParams,
    seed: u64,
    threads: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(snr_list.len());
    for &snr_db in snr_list {
        let ds = generate_dataset(n_per_point, params, snr_db, seed)?;
        out.push((snr_db, evaluate(net, &ds, threads)?));
    }
    Ok(out)
}
