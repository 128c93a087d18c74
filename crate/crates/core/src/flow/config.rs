use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::FOURIER_K;
use crate::ot::{EpsilonConfig, DEFAULT_SINKHORN_ITERS, DEFAULT_SINKHORN_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Bw,
    Pc,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Bw => "bw",
            Geometry::Pc => "pc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bw" => Ok(Geometry::Bw),
            "pc" => Ok(Geometry::Pc),
            _ => Err(Error::InvalidArgument(format!("unknown geometry `{s}`, expected bw or pc"))),
        }
    }
}

/// Training target and integrator for Gaussian flows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BwMethod {
    /// Riemannian velocity, BW norm, geodesic updates.
    Riemannian,
    /// Euclidean covariance derivative measured in the BW norm.
    EuclideanBw,
    /// Euclidean covariance derivative, Frobenius norm.
    Frobenius,
}

impl BwMethod {
    pub fn is_baseline(self) -> bool {
        self != BwMethod::Riemannian
    }
}

/// How point-cloud targets `T̂(X)` are built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolant {
    /// Rounded permutation when the dataset has uniform sizes and the two
    /// clouds match in size, entropic map otherwise.
    Auto,
    Rounding,
    EntropicMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Paper,
}

/// Number of points in a source cloud.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointCountPolicy {
    Fixed(usize),
    /// Same size as the target the source is drawn for.
    MatchTarget,
    /// Size drawn from the empirical distribution of target sizes.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub geometry: Geometry,
    pub bw_method: BwMethod,
    pub preset: Preset,
    pub batch_size: usize,
    pub steps: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub lr_decay_every: u64,
    pub epsilon: EpsilonConfig,
    pub sinkhorn_iters: usize,
    pub sinkhorn_tol: f64,
    /// Reach ε through a halving ladder from the largest cost.
    pub sinkhorn_anneal: bool,
    /// `None` picks the geometry default: on for Gaussians, on for
    /// point-cloud datasets of uniform size, off otherwise.
    pub multisample: Option<bool>,
    pub interpolant: Interpolant,
    pub point_count: PointCountPolicy,
    pub seed: u64,
    pub conditional: bool,
    pub mlp_width: usize,
    pub mlp_layers: usize,
    pub label_dim: usize,
    pub embed_dim: usize,
    pub heads: usize,
    pub blocks: usize,
    pub ff_dim: usize,
    pub fourier_k: usize,
    /// Defaults to 64 for Gaussians and 100 for point clouds.
    pub generation_steps: Option<usize>,
    /// Defaults to `max(DEFAULT_WISHART_DOF, d)`.
    pub wishart_dof: Option<usize>,
    /// 0 disables intermediate checkpoints.
    pub checkpoint_every: usize,
    pub log_every: usize,
    /// Compare analytic and finite-difference gradients before training.
    pub self_check: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::desk(Geometry::Bw)
    }
}

impl TrainConfig {
    pub fn desk(geometry: Geometry) -> Self {
        // decay intervals are compressed so short runs still anneal the rate
        let (batch_size, steps, lr, lr_decay_every, fourier_k) = match geometry {
            Geometry::Bw => (32, 5_000, 2e-3, 50, 1),
            Geometry::Pc => (32, 20_000, 2e-3, 500, FOURIER_K),
        };
        TrainConfig {
            geometry,
            bw_method: BwMethod::Riemannian,
            preset: Preset::Desk,
            batch_size,
            steps,
            lr,
            lr_decay: 0.97,
            lr_decay_every,
            epsilon: EpsilonConfig::default(),
            sinkhorn_iters: DEFAULT_SINKHORN_ITERS,
            sinkhorn_tol: DEFAULT_SINKHORN_TOL,
            sinkhorn_anneal: true,
            multisample: None,
            interpolant: Interpolant::Auto,
            point_count: PointCountPolicy::Empirical,
            seed: 0,
            conditional: false,
            mlp_width: 256,
            mlp_layers: 6,
            label_dim: 16,
            embed_dim: 64,
            heads: 4,
            blocks: 2,
            ff_dim: 128,
            fourier_k,
            generation_steps: None,
            wishart_dof: None,
            checkpoint_every: 0,
            log_every: 100,
            self_check: true,
        }
    }

    /// Sizes and schedules of the original experiments.
    pub fn paper(geometry: Geometry) -> Self {
        let mut c = Self::desk(geometry);
        c.preset = Preset::Paper;
        c.lr_decay_every = 1000;
        match geometry {
            Geometry::Bw => {
                c.batch_size = 128;
                c.steps = 100_000;
                c.mlp_width = 1024;
            }
            Geometry::Pc => {
                c.batch_size = 64;
                c.steps = 500_000;
                c.embed_dim = 512;
                c.blocks = 6;
                c.ff_dim = 1024;
            }
        }
        c
    }

    pub fn generation_steps(&self) -> usize {
        self.generation_steps.unwrap_or(match self.geometry {
            Geometry::Bw => 64,
            Geometry::Pc => 100,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) || self.lr_decay_every == 0 {
            return bad("learning-rate decay must lie in (0, 1] with a positive interval".into());
        }
        if !(self.epsilon.value.is_finite() && self.epsilon.value > 0.0) {
            return bad(format!("epsilon {} must be positive", self.epsilon.value));
        }
        if self.sinkhorn_iters == 0 || !(self.sinkhorn_tol > 0.0) {
            return bad("Sinkhorn needs positive iterations and tolerance".into());
        }
        if self.mlp_width == 0 || self.mlp_layers == 0 || self.fourier_k == 0 {
            return bad("MLP sizes must be positive".into());
        }
        if self.embed_dim == 0 || self.blocks == 0 || self.ff_dim == 0 || self.heads == 0 {
            return bad("transformer sizes must be positive".into());
        }
        if self.embed_dim % self.heads != 0 {
            return bad(format!(
                "embedding width {} is not divisible by {} heads",
                self.embed_dim, self.heads
            ));
        }
        if self.conditional && self.label_dim == 0 {
            return bad("conditioning needs a positive label embedding width".into());
        }
        if self.generation_steps == Some(0) {
            return bad("generation needs at least one step".into());
        }
        if let PointCountPolicy::Fixed(0) = self.point_count {
            return bad("fixed point count must be positive".into());
        }
        if self.log_every == 0 {
            return bad("log interval must be positive".into());
        }
        Ok(())
    }
}
