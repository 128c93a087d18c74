//! Source measures: Gaussian means with Wishart covariances for Gaussian
//! flows, and clouds of iid Gaussian points with a random Cholesky factor
//! for point-cloud flows.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bw::{bw_barycenter, Gaussian};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, Matrix, PsdMatrix, SymMatrix};
use crate::ot::PointCloud;

use super::config::PointCountPolicy;

const BARYCENTER_ITERS: usize = 50;
const BARYCENTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BwSource {
    pub mean_mean: Vec<f64>,
    pub mean_std: Vec<f64>,
    /// Expected covariance; draws are `Wishart(scale / dof, dof)`.
    pub scale: PsdMatrix,
    pub dof: usize,
    /// Fixed-point residual of the barycenter that produced `scale`.
    pub barycenter_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcSource {
    /// Mean lower-triangular factor `μ_L`.
    pub factor_mean: Matrix,
    /// Entry-wise standard deviation `σ_L` of the factor.
    pub factor_std: f64,
    pub point_count: PointCountPolicy,
    /// Target sizes, for the empirical policy.
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Bw(BwSource),
    Pc(PcSource),
}

fn normal(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Wishart degrees of freedom unless configured; larger values keep source
/// covariances closer to the barycenter.
pub const DEFAULT_WISHART_DOF: usize = 50;

/// Matches the mean sampler to the target means and sets the Wishart scale
/// to the BW barycenter of the target covariances.
pub fn fit_source_bw(dataset: &[Gaussian], dof: Option<usize>) -> Result<BwSource> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot fit a source to an empty dataset".into()))?;
    let d = first.dim();
    let n = dataset.len() as f64;
    let mut mean_mean = vec![0.0; d];
    for g in dataset {
        for (m, v) in mean_mean.iter_mut().zip(&g.mean) {
            *m += v / n;
        }
    }
    let mut mean_std = vec![0.0; d];
    for g in dataset {
        for ((s, v), m) in mean_std.iter_mut().zip(&g.mean).zip(&mean_mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    mean_std.iter_mut().for_each(|s| *s = s.sqrt());
    let covs: Vec<PsdMatrix> = dataset.iter().map(|g| g.cov.clone()).collect();
    let (scale, barycenter_residual) = bw_barycenter(&covs, BARYCENTER_ITERS, BARYCENTER_TOL)?;
    let dof = dof.unwrap_or(DEFAULT_WISHART_DOF.max(d));
    if dof < d {
        return Err(Error::InvalidArgument(format!(
            "Wishart degrees of freedom {dof} below dimension {d}"
        )));
    }
    Ok(BwSource {
        mean_mean,
        mean_std,
        scale,
        dof,
        barycenter_residual,
    })
}

/// Lower Cholesky factor, adding a growing ridge when the matrix is
/// numerically singular.
fn robust_cholesky(m: &PsdMatrix) -> Result<Matrix> {
    let d = m.dim();
    let base = (m.trace() / d.max(1) as f64).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let shifted = if ridge == 0.0 {
            m.clone()
        } else {
            PsdMatrix::new(m.as_sym().add(&SymMatrix::scaled_identity(d, ridge)))?
        };
        if let Ok(l) = cholesky_factor(&shifted) {
            return Ok(l);
        }
        ridge = if ridge == 0.0 { 1e-12 * base } else { ridge * 10.0 };
    }
    Err(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })
}

pub fn sample_source_bw(spec: &BwSource, rng: &mut impl Rng) -> Result<Gaussian> {
    let d = spec.mean_mean.len();
    let mean = spec
        .mean_mean
        .iter()
        .zip(&spec.mean_std)
        .map(|(m, s)| m + s * normal(rng))
        .collect();
    let l = robust_cholesky(&spec.scale)?;
    let scale = (1.0 / spec.dof as f64).sqrt();
    let mut w = Matrix::zeros(d, d);
    let mut z = vec![0.0; d];
    for _ in 0..spec.dof {
        z.iter_mut().for_each(|v| *v = normal(rng));
        let x: Vec<f64> = l.matvec(&z).iter().map(|v| v * scale).collect();
        for i in 0..d {
            for j in 0..d {
                w[(i, j)] += x[i] * x[j];
            }
        }
    }
    Gaussian::new(mean, PsdMatrix::from_matrix(w)?)
}

/// Cholesky factors of each cloud's empirical covariance, summarized by
/// their mean and a single pooled standard deviation.
pub fn fit_source_pc(dataset: &[PointCloud], point_count: PointCountPolicy) -> Result<PcSource> {
    let first = dataset
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot fit a source to an empty dataset".into()))?;
    let d = first.dim();
    let mut factors = Vec::with_capacity(dataset.len());
    for c in dataset {
        let (_, cov) = c.moments();
        let cov = PsdMatrix::new(SymMatrix::from_matrix(&cov))
            .or_else(|_| crate::linalg::psd_project(&SymMatrix::from_matrix(&cov)))?;
        factors.push(robust_cholesky(&cov)?);
    }
    let n = factors.len() as f64;
    let mut mean = Matrix::zeros(d, d);
    for f in &factors {
        mean.add_assign_scaled(f, 1.0 / n);
    }
    let entries = d * (d + 1) / 2;
    let mut var = 0.0;
    for f in &factors {
        for i in 0..d {
            for j in 0..=i {
                let e = f[(i, j)] - mean[(i, j)];
                var += e * e;
            }
        }
    }
    let std = (var / (n * entries as f64)).sqrt().max(1e-8);
    Ok(PcSource {
        factor_mean: mean,
        factor_std: std,
        point_count,
        sizes: dataset.iter().map(|c| c.len()).collect(),
    })
}

/// Size of a source cloud drawn for a target of `target_len` points.
pub fn source_point_count(spec: &PcSource, target_len: usize, rng: &mut impl Rng) -> usize {
    match spec.point_count {
        PointCountPolicy::Fixed(n) => n,
        PointCountPolicy::MatchTarget => target_len,
        PointCountPolicy::Empirical => {
            if spec.sizes.is_empty() {
                target_len
            } else {
                spec.sizes[rng.gen_range(0..spec.sizes.len())]
            }
        }
    }
}

/// One random factor `L ~ μ_L + σ_L Z` (lower triangle), then `n` points
/// `x = L z`.
pub fn sample_source_pc(spec: &PcSource, n_points: usize, rng: &mut impl Rng) -> Result<PointCloud> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("source cloud needs at least one point".into()));
    }
    let d = spec.factor_mean.rows();
    let mut l = spec.factor_mean.clone();
    for i in 0..d {
        for j in 0..=i {
            l[(i, j)] += spec.factor_std * normal(rng);
        }
    }
    let mut pts = Matrix::zeros(n_points, d);
    let mut z = vec![0.0; d];
    for p in 0..n_points {
        z.iter_mut().for_each(|v| *v = normal(rng));
        pts.row_mut(p).copy_from_slice(&l.matvec(&z));
    }
    PointCloud::uniform(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g1(var: f64) -> Gaussian {
        Gaussian::new(vec![0.0], PsdMatrix::from_diag(&[var]).unwrap()).unwrap()
    }

    #[test]
    fn barycenter_of_equal_covariances() {
        let c = PsdMatrix::from_matrix(Matrix::from_rows(&[[2.0, 0.3], [0.3, 0.5]])).unwrap();
        let ds: Vec<Gaussian> = (0..4)
            .map(|i| Gaussian::new(vec![i as f64, 0.0], c.clone()).unwrap())
            .collect();
        let s = fit_source_bw(&ds, None).unwrap();
        for (a, b) in s.scale.as_matrix().data().iter().zip(c.as_matrix().data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        assert_eq!(s.dof, DEFAULT_WISHART_DOF);
        assert_abs_diff_eq!(s.mean_mean[0], 1.5);
        assert_abs_diff_eq!(s.mean_std[0], 1.25f64.sqrt());
        assert_eq!(s.mean_std[1], 0.0);
    }

    #[test]
    fn one_dimensional_barycenter_averages_deviations() {
        let s = fit_source_bw(&[g1(1.0), g1(9.0)], None).unwrap();
        assert_abs_diff_eq!(s.scale.as_matrix()[(0, 0)], 4.0, epsilon = 1e-10);
        assert!(fit_source_bw(&[], None).is_err());
    }

    #[test]
    fn barycenter_converges_on_random_set() {
        let mut r = ChaCha8Rng::seed_from_u64(8);
        let ds: Vec<Gaussian> = (0..6)
            .map(|_| {
                let a = crate::nn::Tensor::new(2, 2, (0..4).map(|_| r.gen_range(-1.0..1.0)).collect());
                let c = a.matmul(&a.transpose()).add(&Matrix::identity(2).scale(0.1));
                Gaussian::new(vec![0.0, 0.0], PsdMatrix::from_matrix(c.symmetrized()).unwrap()).unwrap()
            })
            .collect();
        let s = fit_source_bw(&ds, None).unwrap();
        assert!(s.barycenter_residual <= 1e-6, "{}", s.barycenter_residual);
    }

    #[test]
    fn wishart_draws_average_to_scale() {
        let scale = PsdMatrix::from_matrix(Matrix::from_rows(&[[1.0, 0.4], [0.4, 0.5]])).unwrap();
        let spec = BwSource {
            mean_mean: vec![0.0, 0.0],
            mean_std: vec![1.0, 1.0],
            scale: scale.clone(),
            dof: 4,
            barycenter_residual: 0.0,
        };
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let mut acc = Matrix::zeros(2, 2);
        for _ in 0..1000 {
            let g = sample_source_bw(&spec, &mut r).unwrap();
            acc.add_assign_scaled(g.cov.as_matrix(), 1e-3);
        }
        let rel = acc.sub(scale.as_matrix()).frobenius_norm() / scale.as_matrix().frobenius_norm();
        assert!(rel < 0.1, "relative error {rel}");
        let a = sample_source_bw(&spec, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_source_bw(&spec, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn point_source_statistics() {
        let l = Matrix::from_rows(&[[1.0, 0.0], [0.5, 0.3]]);
        let spec = PcSource {
            factor_mean: l.clone(),
            factor_std: 0.0,
            point_count: PointCountPolicy::Fixed(10_000),
            sizes: vec![],
        };
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let c = sample_source_pc(&spec, 10_000, &mut r).unwrap();
        let (_, cov) = c.moments();
        let llt = l.matmul(&l.transpose());
        let rel = cov.sub(&llt).frobenius_norm() / llt.frobenius_norm();
        assert!(rel < 0.05, "relative error {rel}");
        assert_abs_diff_eq!(c.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);

        // fitting back recovers a factor close to L
        let fit = fit_source_pc(std::slice::from_ref(&c), PointCountPolicy::MatchTarget).unwrap();
        assert!(fit.factor_mean.sub(&l).frobenius_norm() < 0.05);
        assert!(fit.factor_std > 0.0);
    }
}
