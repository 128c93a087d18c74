//! Flow matching over Gaussians and point clouds: sources, pairing,
//! losses, training and generation.

mod config;
mod generate;
mod loss;
mod pairing;
mod source;
mod train;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bw::Gaussian;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, ModelParams};
use crate::ot::PointCloud;
use crate::rng::{self, domain};

pub use config::{BwMethod, Geometry, Interpolant, PointCountPolicy, Preset, TrainConfig};
pub use generate::{
    generate_bw, generate_bw_with, generate_pc, generate_pc_with, BwGeneration, GenerationStats, PcGeneration,
    UpdateRule, MAX_HALVINGS,
};
pub use loss::{
    bw_batch_loss, bw_fm_loss, bw_target, pc_fm_loss, pc_interpolant, pc_loss_from_target, pc_target, MapKind,
    PcLossConfig, PcTarget,
};
pub use pairing::{cloud_moments_gaussian, multisample_pair_bw, multisample_pair_pc, pair_by_cost, PairingConfig};
pub use source::{
    fit_source_bw, fit_source_pc, sample_source_bw, sample_source_pc, source_point_count, BwSource, PcSource,
    DEFAULT_WISHART_DOF,
    SourceSpec,
};
pub use train::{
    bw_networks, pc_network, train, train_bw, train_pc, zero_field_loss_bw, zero_field_loss_pc, LossRecord, StepHook, TrainOutcome,
    TrainStats, COV_NET, MEAN_NET, PC_NET, SELF_CHECK_TOL,
};

#[derive(Serialize, Deserialize)]
struct ModelMeta {
    config: TrainConfig,
    source: SourceSpec,
    label_vocab: usize,
    steps_completed: usize,
}

/// A trained flow: networks, the fitted source and the config that made them.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowModel {
    pub config: TrainConfig,
    pub source: SourceSpec,
    pub models: Vec<ModelParams>,
    pub label_vocab: usize,
    pub steps_completed: usize,
}

/// Generated samples of either kind.
#[derive(Clone, Debug)]
pub enum Generated {
    Gaussians(BwGeneration),
    Clouds(Vec<PcGeneration>),
}

impl FlowModel {
    pub fn from_outcome(config: &TrainConfig, outcome: &TrainOutcome) -> Self {
        Self::from_parts(config, outcome.source.clone(), outcome.models.clone(), outcome.label_vocab, outcome.steps_completed)
    }

    pub fn from_parts(
        config: &TrainConfig,
        source: SourceSpec,
        models: Vec<ModelParams>,
        label_vocab: usize,
        steps_completed: usize,
    ) -> Self {
        FlowModel {
            config: config.clone(),
            source,
            models,
            label_vocab,
            steps_completed,
        }
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let meta = ModelMeta {
            config: self.config.clone(),
            source: self.source.clone(),
            label_vocab: self.label_vocab,
            steps_completed: self.steps_completed,
        };
        Ok(Checkpoint::new(self.models.clone(), json!(meta)))
    }

    pub fn from_checkpoint(ck: Checkpoint) -> Result<Self> {
        let meta: ModelMeta = serde_json::from_value(ck.meta)
            .map_err(|e| Error::Checkpoint(format!("checkpoint metadata: {e}")))?;
        let model = FlowModel {
            config: meta.config,
            source: meta.source,
            models: ck.models,
            label_vocab: meta.label_vocab,
            steps_completed: meta.steps_completed,
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let names: Vec<&str> = self.models.iter().map(|m| m.name()).collect();
        let ok = match (&self.source, self.config.geometry) {
            (SourceSpec::Bw(_), Geometry::Bw) => names == [MEAN_NET, COV_NET],
            (SourceSpec::Pc(_), Geometry::Pc) => names == [PC_NET],
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Checkpoint(format!(
                "networks {names:?} do not fit a `{}` flow",
                self.config.geometry.name()
            )))
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(Checkpoint::load(path)?)
    }

    pub fn geometry(&self) -> Geometry {
        self.config.geometry
    }

    /// Integrator matching the training target.
    pub fn update_rule(&self) -> UpdateRule {
        match self.config.bw_method {
            BwMethod::Riemannian => UpdateRule::Riemannian,
            BwMethod::EuclideanBw | BwMethod::Frobenius => UpdateRule::Euclidean,
        }
    }

    fn labels(&self, count: usize, labels: &[usize]) -> Result<Vec<Option<usize>>> {
        if labels.is_empty() {
            return Ok(vec![None; count]);
        }
        if self.label_vocab == 0 {
            return Err(Error::InvalidArgument("this model was trained without labels".into()));
        }
        if labels.len() != count {
            return Err(Error::DimensionMismatch(format!("{} labels for {count} samples", labels.len())));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= self.label_vocab) {
            return Err(Error::InvalidArgument(format!(
                "label {l} is outside the trained vocabulary of {}",
                self.label_vocab
            )));
        }
        Ok(labels.iter().map(|&l| Some(l)).collect())
    }

    /// Source draw `i` of a generation run; independent of the batch size.
    pub fn source_gaussian(&self, seed: u64, i: usize) -> Result<Gaussian> {
        match &self.source {
            SourceSpec::Bw(s) => sample_source_bw(s, &mut rng::stream(seed, domain::GENERATE, i as u64, 0)),
            SourceSpec::Pc(_) => Err(Error::InvalidArgument("point-cloud model has no Gaussian source".into())),
        }
    }

    pub fn source_cloud(&self, seed: u64, i: usize, points: Option<usize>) -> Result<PointCloud> {
        match &self.source {
            SourceSpec::Pc(s) => {
                let mut r = rng::stream(seed, domain::GENERATE, i as u64, 0);
                let n = match (points, s.point_count) {
                    (Some(n), _) | (None, PointCountPolicy::Fixed(n)) => n,
                    _ if s.sizes.is_empty() => {
                        return Err(Error::InvalidArgument("no point count known for generation".into()))
                    }
                    _ => s.sizes[r.gen_range(0..s.sizes.len())],
                };
                sample_source_pc(s, n, &mut r)
            }
            SourceSpec::Bw(_) => Err(Error::InvalidArgument("Gaussian model has no point-cloud source".into())),
        }
    }

    /// Draws `count` Gaussians. `labels` is empty or one label per sample.
    pub fn generate_gaussians(
        &self,
        count: usize,
        n_steps: usize,
        labels: &[usize],
        seed: u64,
        record: bool,
    ) -> Result<BwGeneration> {
        let labels = self.labels(count, labels)?;
        let inits = (0..count)
            .map(|i| self.source_gaussian(seed, i))
            .collect::<Result<Vec<_>>>()?;
        generate_bw(&self.models[0], &self.models[1], inits, n_steps, &labels, self.update_rule(), record)
    }

    /// Draws `count` point clouds of `points` points each, or of sizes
    /// drawn from the training data when `points` is `None`.
    pub fn generate_clouds(
        &self,
        count: usize,
        n_steps: usize,
        labels: &[usize],
        points: Option<usize>,
        seed: u64,
        record: bool,
    ) -> Result<Vec<PcGeneration>> {
        let labels = self.labels(count, labels)?;
        let inits = (0..count)
            .map(|i| self.source_cloud(seed, i, points))
            .collect::<Result<Vec<_>>>()?;
        generate_pc(&self.models[0], inits, n_steps, &labels, record)
    }

    pub fn generate(
        &self,
        count: usize,
        n_steps: Option<usize>,
        labels: &[usize],
        seed: u64,
        record: bool,
    ) -> Result<Generated> {
        let n = n_steps.unwrap_or_else(|| self.config.generation_steps());
        match self.geometry() {
            Geometry::Bw => Ok(Generated::Gaussians(self.generate_gaussians(count, n, labels, seed, record)?)),
            Geometry::Pc => Ok(Generated::Clouds(self.generate_clouds(count, n, labels, None, seed, record)?)),
        }
    }
}
