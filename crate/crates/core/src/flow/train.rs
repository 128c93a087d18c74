//! Flow-matching training loops.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bw::Gaussian;
use crate::data::{Dataset, GaussianDataset, PointCloudDataset};
use crate::error::{Error, Result};
use crate::nn::{gaussian_input_norm, gradient_check, Architecture, Gradients, MlpSpec, ModelParams, OptimizerState, Tape, TransformerSpec};
use crate::ot::PointCloud;
use crate::rng::{self, domain};

use super::config::{Geometry, Interpolant, TrainConfig};
use super::loss::{bw_batch_loss, bw_target, pc_loss_from_target, pc_target, MapKind, PcLossConfig};
use super::pairing::{multisample_pair_bw, multisample_pair_pc, PairingConfig};
use super::source::{
    fit_source_bw, fit_source_pc, sample_source_bw, sample_source_pc, source_point_count, SourceSpec,
};

pub const MEAN_NET: &str = "mean";
pub const COV_NET: &str = "cov";
pub const PC_NET: &str = "field";

/// Coordinates probed by the pre-training gradient check.
const SELF_CHECK_COORDS: usize = 10;
const SELF_CHECK_STEP: f64 = 1e-5;
/// Relative error above which the gradient check logs a warning.
pub const SELF_CHECK_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub loss: f64,
    pub lr: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Point-cloud pairs whose targets came from the rounded permutation.
    pub rounding_pairs: usize,
    /// Point-cloud pairs whose targets came from the entropic map.
    pub entropic_pairs: usize,
    pub self_check_max_rel_error: Option<f64>,
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Last parameters that produced a finite update.
    pub models: Vec<ModelParams>,
    pub optimizer: OptimizerState,
    pub source: SourceSpec,
    pub label_vocab: usize,
    /// One record per completed step.
    pub trace: Vec<LossRecord>,
    pub stats: TrainStats,
    pub steps_completed: usize,
    /// Numerical failure that stopped training early.
    pub abort: Option<Error>,
}

/// Called after every `checkpoint_every` completed steps.
pub type StepHook<'a> = dyn FnMut(usize, &[ModelParams], &OptimizerState) -> Result<()> + 'a;

fn label_vocab(cfg: &TrainConfig, labels: &Option<Vec<usize>>) -> Result<usize> {
    if !cfg.conditional {
        return Ok(0);
    }
    match labels {
        Some(l) => Ok(l.iter().max().map_or(0, |m| m + 1)),
        None => Err(Error::InvalidArgument("conditional training needs a labelled dataset".into())),
    }
}

fn label_of(labels: &Option<Vec<usize>>, i: usize, vocab: usize) -> Option<usize> {
    if vocab == 0 {
        None
    } else {
        labels.as_ref().map(|l| l[i])
    }
}

/// Mean and covariance networks, with inputs standardized against `items`.
pub fn bw_networks(cfg: &TrainConfig, items: &[Gaussian], vocab: usize) -> Vec<ModelParams> {
    let d = items.first().map_or(0, |g| g.dim());
    let p = d * (d + 1) / 2;
    let norm = gaussian_input_norm(items);
    [(MEAN_NET, d), (COV_NET, p)]
        .iter()
        .enumerate()
        .map(|(k, &(name, out))| {
            let arch = Architecture::Mlp(MlpSpec {
                input_dim: d + p,
                output_dim: out,
                width: cfg.mlp_width,
                layers: cfg.mlp_layers,
                fourier_k: cfg.fourier_k,
                label_vocab: vocab,
                label_dim: cfg.label_dim,
                input_norm: Some(norm.clone()),
            });
            ModelParams::init(name, arch, &mut rng::stream(cfg.seed, domain::INIT, k as u64, 0))
        })
        .collect()
}

pub fn pc_network(cfg: &TrainConfig, d: usize, vocab: usize) -> ModelParams {
    let arch = Architecture::Transformer(TransformerSpec {
        point_dim: d,
        embed_dim: cfg.embed_dim,
        heads: cfg.heads,
        blocks: cfg.blocks,
        ff_dim: cfg.ff_dim,
        fourier_k: cfg.fourier_k,
        label_vocab: vocab,
    });
    ModelParams::init(PC_NET, arch, &mut rng::stream(cfg.seed, domain::INIT, 0, 0))
}

fn pairing(cfg: &TrainConfig) -> PairingConfig {
    PairingConfig {
        epsilon: cfg.epsilon,
        iters: cfg.sinkhorn_iters,
        tol: cfg.sinkhorn_tol,
        anneal: cfg.sinkhorn_anneal,
    }
}

/// Copy with the zero-initialized output layers filled with noise, so that
/// a gradient check reaches every layer.
fn perturbed_for_check(models: &[ModelParams], r: &mut impl Rng) -> Vec<ModelParams> {
    let mut out = models.to_vec();
    for m in &mut out {
        for (slot, v) in m.slots_mut() {
            if slot.starts_with("out.") {
                v.data_mut().iter_mut().for_each(|x| *x = r.gen_range(-0.5..0.5));
            }
        }
    }
    out
}

fn report_check(max_err: f64) {
    if max_err > SELF_CHECK_TOL {
        log::warn!("gradient self-check: max relative error {max_err:.3e} exceeds {SELF_CHECK_TOL:.0e}");
    } else {
        log::info!("gradient self-check passed (max relative error {max_err:.3e})");
    }
}

struct BwBatch {
    states: Vec<Gaussian>,
    targets: Vec<crate::bw::TangentBW>,
    ts: Vec<f64>,
    labels: Vec<Option<usize>>,
}

fn bw_batch(
    cfg: &TrainConfig,
    data: &GaussianDataset,
    source: &super::source::BwSource,
    vocab: usize,
    multisample: bool,
    step: usize,
) -> Result<BwBatch> {
    let mut r = rng::stream(cfg.seed, domain::TRAIN_STEP, step as u64, 0);
    let b = cfg.batch_size;
    let idx: Vec<usize> = (0..b).map(|_| r.gen_range(0..data.len())).collect();
    let src = (0..b)
        .map(|_| sample_source_bw(source, &mut r))
        .collect::<Result<Vec<_>>>()?;
    let ts: Vec<f64> = (0..b).map(|_| r.gen::<f64>()).collect();
    let mut dst: Vec<&Gaussian> = idx.iter().map(|&i| &data.items[i]).collect();
    let mut labels: Vec<Option<usize>> = idx.iter().map(|&i| label_of(&data.labels, i, vocab)).collect();
    if multisample {
        let owned: Vec<Gaussian> = dst.iter().map(|g| (*g).clone()).collect();
        let perm = multisample_pair_bw(&src, &owned, &pairing(cfg))?;
        dst = perm.iter().map(|&j| dst[j]).collect();
        labels = perm.iter().map(|&j| labels[j]).collect();
    }
    let pairs = src
        .par_iter()
        .zip(dst.par_iter())
        .zip(ts.par_iter())
        .map(|((s, d), &t)| bw_target(s, d, t, cfg.bw_method))
        .collect::<Result<Vec<_>>>()?;
    let (states, targets) = pairs.into_iter().unzip();
    Ok(BwBatch {
        states,
        targets,
        ts,
        labels,
    })
}

fn bw_loss_on(tape: &mut Tape, models: &[ModelParams], batch: &BwBatch, cfg: &TrainConfig) -> Result<crate::nn::Var> {
    bw_batch_loss(
        tape,
        &models[0],
        &models[1],
        &batch.states,
        &batch.targets,
        &batch.ts,
        &batch.labels,
        cfg.bw_method,
    )
}

/// Trains the mean and covariance networks on a dataset of Gaussians.
pub fn train_bw(cfg: &TrainConfig, data: &GaussianDataset, hook: &mut StepHook) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training dataset is empty".into()));
    }
    let vocab = label_vocab(cfg, &data.labels)?;
    let source = fit_source_bw(&data.items, cfg.wishart_dof)?;
    let mut models = bw_networks(cfg, &data.items, vocab);
    let multisample = cfg.multisample.unwrap_or(true);
    let mut opt = OptimizerState::with_schedule(cfg.lr, cfg.lr_decay, cfg.lr_decay_every);
    let mut stats = TrainStats::default();

    if cfg.self_check && cfg.steps > 0 {
        let mut r = rng::stream(cfg.seed, domain::SELF_CHECK, 0, 0);
        let probe = perturbed_for_check(&models, &mut r);
        let small = TrainConfig {
            batch_size: cfg.batch_size.min(4),
            ..cfg.clone()
        };
        let batch = bw_batch(&small, data, &source, vocab, false, 0)?;
        let report = gradient_check(
            &probe,
            |tape, ms| bw_loss_on(tape, ms, &batch, cfg),
            SELF_CHECK_COORDS,
            SELF_CHECK_STEP,
            &mut r,
        )?;
        report_check(report.max_rel_error());
        stats.self_check_max_rel_error = Some(report.max_rel_error());
    }

    let mut trace = Vec::with_capacity(cfg.steps);
    let mut abort = None;
    for step in 0..cfg.steps {
        let lr = opt.current_lr();
        let before = models.clone();
        let attempt = (|| -> Result<f64> {
            let batch = bw_batch(cfg, data, &source, vocab, multisample, step)?;
            let mut tape = Tape::new();
            let loss = bw_loss_on(&mut tape, &models, &batch, cfg)?;
            let value = tape.scalar(loss);
            if !value.is_finite() {
                return Err(Error::NonFiniteLoss { step });
            }
            let grads = tape.backward(loss)?;
            let (m, c) = models.split_at_mut(1);
            opt.step_models(&mut [&mut m[0], &mut c[0]], &grads)?;
            Ok(value)
        })();
        match attempt {
            Ok(loss) => trace.push(LossRecord { step, loss, lr }),
            Err(e) if e.is_numerical() => {
                log::error!("training aborted at step {step}: {e}");
                models = before;
                abort = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
        after_step(cfg, step, &trace, &models, &opt, hook)?;
    }
    Ok(TrainOutcome {
        steps_completed: trace.len(),
        models,
        optimizer: opt,
        source: SourceSpec::Bw(source),
        label_vocab: vocab,
        trace,
        stats,
        abort,
    })
}

fn after_step(
    cfg: &TrainConfig,
    step: usize,
    trace: &[LossRecord],
    models: &[ModelParams],
    opt: &OptimizerState,
    hook: &mut StepHook,
) -> Result<()> {
    let done = step + 1;
    if cfg.log_every > 0 && done % cfg.log_every == 0 {
        let window = &trace[trace.len().saturating_sub(cfg.log_every)..];
        let mean = window.iter().map(|r| r.loss).sum::<f64>() / window.len().max(1) as f64;
        log::info!("step {done}/{}: loss {mean:.6} lr {:.3e}", cfg.steps, opt.current_lr());
    }
    if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 {
        hook(done, models, opt)?;
    }
    Ok(())
}

struct PcSample {
    src: PointCloud,
    dst: usize,
    t: f64,
    label: Option<usize>,
}

fn pc_batch(
    cfg: &TrainConfig,
    data: &PointCloudDataset,
    source: &super::source::PcSource,
    vocab: usize,
    multisample: bool,
    step: usize,
    batch_size: usize,
) -> Result<Vec<PcSample>> {
    let mut r = rng::stream(cfg.seed, domain::TRAIN_STEP, step as u64, 0);
    let idx: Vec<usize> = (0..batch_size).map(|_| r.gen_range(0..data.len())).collect();
    let mut src = Vec::with_capacity(batch_size);
    for &i in &idx {
        let n = source_point_count(source, data.items[i].len(), &mut r);
        src.push(sample_source_pc(source, n, &mut r)?);
    }
    let ts: Vec<f64> = (0..batch_size).map(|_| r.gen::<f64>()).collect();
    let mut dst = idx;
    if multisample {
        let clouds: Vec<PointCloud> = dst.iter().map(|&i| data.items[i].clone()).collect();
        let perm = multisample_pair_pc(&src, &clouds, &pairing(cfg))?;
        dst = perm.iter().map(|&j| dst[j]).collect();
    }
    Ok(src
        .into_iter()
        .zip(dst)
        .zip(ts)
        .map(|((src, dst), t)| PcSample {
            label: label_of(&data.labels, dst, vocab),
            src,
            dst,
            t,
        })
        .collect())
}

fn add_grads(acc: &mut Gradients, g: Gradients) {
    for (k, v) in g {
        match acc.get_mut(&k) {
            Some(a) => a.add_assign_scaled(&v, 1.0),
            None => {
                acc.insert(k, v);
            }
        }
    }
}

/// Multisample switch and loss settings after resolving the
/// geometry defaults against the dataset.
fn pc_settings(cfg: &TrainConfig, data: &PointCloudDataset) -> (bool, PcLossConfig) {
    let uniform = data.uniform_size();
    let interpolant = match cfg.interpolant {
        Interpolant::Auto if !uniform => Interpolant::EntropicMap,
        other => other,
    };
    let loss_cfg = PcLossConfig {
        epsilon: cfg.epsilon,
        iters: cfg.sinkhorn_iters,
        tol: cfg.sinkhorn_tol,
        anneal: cfg.sinkhorn_anneal,
        interpolant,
    };
    (cfg.multisample.unwrap_or(uniform), loss_cfg)
}

/// Trains the point-cloud transformer.
pub fn train_pc(cfg: &TrainConfig, data: &PointCloudDataset, hook: &mut StepHook) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("training dataset is empty".into()));
    }
    let vocab = label_vocab(cfg, &data.labels)?;
    let source = fit_source_pc(&data.items, cfg.point_count)?;
    let mut model = pc_network(cfg, data.dim, vocab);
    let (multisample, loss_cfg) = pc_settings(cfg, data);
    let mut opt = OptimizerState::with_schedule(cfg.lr, cfg.lr_decay, cfg.lr_decay_every);
    let mut stats = TrainStats::default();

    if cfg.self_check && cfg.steps > 0 {
        let mut r = rng::stream(cfg.seed, domain::SELF_CHECK, 0, 0);
        let probe = perturbed_for_check(std::slice::from_ref(&model), &mut r);
        let sample = pc_batch(cfg, data, &source, vocab, false, 0, 1)?.remove(0);
        let target = pc_target(&sample.src, &data.items[sample.dst], &loss_cfg)?;
        let report = gradient_check(
            &probe,
            |tape, ms| pc_loss_from_target(tape, &ms[0], sample.src.points(), &target.mapped, sample.t, sample.label),
            SELF_CHECK_COORDS,
            SELF_CHECK_STEP,
            &mut r,
        )?;
        report_check(report.max_rel_error());
        stats.self_check_max_rel_error = Some(report.max_rel_error());
    }

    let mut trace = Vec::with_capacity(cfg.steps);
    let mut abort = None;
    for step in 0..cfg.steps {
        let lr = opt.current_lr();
        let before = model.clone();
        let attempt = (|| -> Result<(f64, usize, usize)> {
            let batch = pc_batch(cfg, data, &source, vocab, multisample, step, cfg.batch_size)?;
            let per_sample = batch
                .par_iter()
                .map(|s| -> Result<(f64, Gradients, MapKind)> {
                    let target = pc_target(&s.src, &data.items[s.dst], &loss_cfg)?;
                    let mut tape = Tape::new();
                    let loss = pc_loss_from_target(&mut tape, &model, s.src.points(), &target.mapped, s.t, s.label)?;
                    let value = tape.scalar(loss);
                    if !value.is_finite() {
                        return Err(Error::NonFiniteLoss { step });
                    }
                    Ok((value, tape.backward(loss)?, target.kind))
                })
                .collect::<Result<Vec<_>>>()?;
            let inv_b = 1.0 / batch.len() as f64;
            let mut grads = Gradients::new();
            let (mut total, mut rounding, mut entropic) = (0.0, 0, 0);
            for (loss, g, kind) in per_sample {
                total += loss;
                match kind {
                    MapKind::Rounding => rounding += 1,
                    MapKind::EntropicMap => entropic += 1,
                }
                add_grads(&mut grads, g);
            }
            for g in grads.values_mut() {
                *g = g.scale(inv_b);
            }
            opt.step_models(&mut [&mut model], &grads)?;
            Ok((total * inv_b, rounding, entropic))
        })();
        match attempt {
            Ok((loss, rounding, entropic)) => {
                stats.rounding_pairs += rounding;
                stats.entropic_pairs += entropic;
                trace.push(LossRecord { step, loss, lr });
            }
            Err(e) if e.is_numerical() => {
                log::error!("training aborted at step {step}: {e}");
                model = before;
                abort = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
        after_step(cfg, step, &trace, std::slice::from_ref(&model), &opt, hook)?;
    }
    Ok(TrainOutcome {
        steps_completed: trace.len(),
        models: vec![model],
        optimizer: opt,
        source: SourceSpec::Pc(source),
        label_vocab: vocab,
        trace,
        stats,
        abort,
    })
}

/// Dispatches on the configured geometry.
pub fn train(cfg: &TrainConfig, data: &Dataset, hook: &mut StepHook) -> Result<TrainOutcome> {
    match (cfg.geometry, data) {
        (Geometry::Bw, Dataset::Gaussians(d)) => train_bw(cfg, d, hook),
        (Geometry::Pc, Dataset::PointClouds(d)) => train_pc(cfg, d, hook),
        (g, _) => Err(Error::InvalidArgument(format!(
            "geometry `{}` does not match a dataset of {}",
            g.name(),
            data.kind()
        ))),
    }
}

/// Mean of the squared field targets, i.e. the loss of a zero field.
pub fn zero_field_loss_bw(cfg: &TrainConfig, data: &GaussianDataset, steps: usize) -> Result<f64> {
    let source = fit_source_bw(&data.items, cfg.wishart_dof)?;
    let multisample = cfg.multisample.unwrap_or(true);
    let mut total = 0.0;
    for step in 0..steps {
        let batch = bw_batch(cfg, data, &source, 0, multisample, step)?;
        for (g, v) in batch.states.iter().zip(&batch.targets) {
            total += match cfg.bw_method {
                super::config::BwMethod::Frobenius => {
                    v.a.iter().map(|x| x * x).sum::<f64>() + v.s.frobenius_norm().powi(2)
                }
                _ => crate::bw::bw_tangent_norm_sq(g, v)?,
            };
        }
    }
    Ok(total / (steps * cfg.batch_size) as f64)
}

/// Mean per-point squared displacement over `steps` training batches,
/// i.e. the point-cloud loss of a zero field.
pub fn zero_field_loss_pc(cfg: &TrainConfig, data: &PointCloudDataset, steps: usize) -> Result<f64> {
    let source = fit_source_pc(&data.items, cfg.point_count)?;
    let (multisample, loss_cfg) = pc_settings(cfg, data);
    let mut total = 0.0;
    for step in 0..steps {
        let batch = pc_batch(cfg, data, &source, 0, multisample, step, cfg.batch_size)?;
        let losses = batch
            .par_iter()
            .map(|s| {
                let target = pc_target(&s.src, &data.items[s.dst], &loss_cfg)?;
                let disp = target.mapped.sub(s.src.points());
                Ok(disp.data().iter().map(|x| x * x).sum::<f64>() / s.src.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        total += losses.iter().sum::<f64>();
    }
    Ok(total / (steps * cfg.batch_size) as f64)
}
