//! Minibatch OT pairing between source and target samples.

use crate::bw::{frechet_cost_matrix, Gaussian};
use crate::error::{Error, Result};
use crate::linalg::{psd_project, PsdMatrix, SymMatrix};
use crate::ot::{round_to_permutation, sinkhorn, sinkhorn_annealed, CostMatrix, EpsilonConfig, PointCloud};

#[derive(Clone, Copy, Debug)]
pub struct PairingConfig {
    pub epsilon: EpsilonConfig,
    pub iters: usize,
    pub tol: f64,
    pub anneal: bool,
}

/// `perm[i]` is the target index paired with source `i`.
pub fn pair_by_cost(cost: crate::linalg::Matrix, cfg: &PairingConfig) -> Result<Vec<usize>> {
    let (n, m) = cost.shape();
    if n != m {
        return Err(Error::DimensionMismatch(format!("pairing a batch of {n} with a batch of {m}")));
    }
    let cost = CostMatrix::from_matrix(cost)?;
    let w = vec![1.0 / n as f64; n];
    let eps = cfg.epsilon.effective(&cost);
    let solve = if cfg.anneal { sinkhorn_annealed } else { sinkhorn };
    let plan = solve(&cost, &w, &w, eps, cfg.iters, cfg.tol)?;
    round_to_permutation(&plan)
}

/// Pairing under the Fréchet (closed-form W₂²) cost.
pub fn multisample_pair_bw(src: &[Gaussian], dst: &[Gaussian], cfg: &PairingConfig) -> Result<Vec<usize>> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "source batch {} vs target batch {}",
            src.len(),
            dst.len()
        )));
    }
    pair_by_cost(frechet_cost_matrix(src, dst)?, cfg)
}

/// Gaussian with a cloud's empirical mean and covariance.
pub fn cloud_moments_gaussian(c: &PointCloud) -> Result<Gaussian> {
    let (mean, cov) = c.moments();
    let sym = SymMatrix::from_matrix(&cov);
    let cov = PsdMatrix::new(sym.clone()).or_else(|_| psd_project(&sym))?;
    Gaussian::new(mean, cov)
}

/// Pairing under the Fréchet cost between the clouds' moments.
pub fn multisample_pair_pc(src: &[PointCloud], dst: &[PointCloud], cfg: &PairingConfig) -> Result<Vec<usize>> {
    let a = src.iter().map(cloud_moments_gaussian).collect::<Result<Vec<_>>>()?;
    let b = dst.iter().map(cloud_moments_gaussian).collect::<Result<Vec<_>>>()?;
    multisample_pair_bw(&a, &b, cfg)
}
