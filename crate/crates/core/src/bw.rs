//! Closed-form Bures-Wasserstein geometry on Gaussians `N(m, Σ)`.
//!
//! Tangent vectors at `μ = N(m, Σ)` are pairs `(a, S)` acting as the affine
//! field `x ↦ a + S(x - m)`. With the OT matrix
//! `C = Σ_μ^{-1/2} (Σ_μ^{1/2} Σ_ν Σ_μ^{1/2})^{1/2} Σ_μ^{-1/2}` everything else
//! (log, exp, geodesic, velocity) is a few products away.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    min_eigenvalue, psd_inv_sqrt, psd_sqrt, solve, Matrix, PsdMatrix, SymMatrix, PSD_REL_TOL,
};

/// Rank cutoff for the pseudo-inverse square root of a source covariance.
const OT_RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub cov: PsdMatrix,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: PsdMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(Error::DimensionMismatch(format!(
                "mean has length {} but covariance is {}x{}",
                mean.len(),
                cov.dim(),
                cov.dim()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gaussian mean".into()));
        }
        Ok(Gaussian { mean, cov })
    }

    pub fn standard(d: usize) -> Self {
        Gaussian {
            mean: vec![0.0; d],
            cov: PsdMatrix::identity(d),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Tangent vector `(a, S)` at a Gaussian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentBW {
    pub a: Vec<f64>,
    pub s: SymMatrix,
}

impl TangentBW {
    pub fn zero(d: usize) -> Self {
        TangentBW {
            a: vec![0.0; d],
            s: SymMatrix::zeros(d),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn sub(&self, other: &TangentBW) -> TangentBW {
        TangentBW {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
            s: self.s.sub(&other.s),
        }
    }

    pub fn scale(&self, k: f64) -> TangentBW {
        TangentBW {
            a: self.a.iter().map(|x| x * k).collect(),
            s: self.s.scale(k),
        }
    }
}

fn check_dims(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

/// OT matrix between two Gaussians, with a flag for the pseudo-inverse path.
#[derive(Clone, Debug)]
pub struct OtMatrix {
    pub matrix: SymMatrix,
    /// Source covariance was rank deficient and a pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

/// The symmetric matrix `C` of the affine OT map `x ↦ m_ν + C (x - m_μ)`.
pub fn bw_ot_matrix(src: &Gaussian, dst: &Gaussian) -> Result<OtMatrix> {
    check_dims(src.dim(), dst.dim(), "bw_ot_matrix")?;
    let root = psd_sqrt(&src.cov)?;
    let inner = dst.cov.congruence(root.as_sym());
    let inner_root = psd_sqrt(&inner)?;
    let inv_root = psd_inv_sqrt(&src.cov, OT_RANK_TOL)?;
    let pseudo_inverse = !inv_root.is_full_rank();
    if pseudo_inverse {
        log::warn!(
            "bw_ot_matrix: source covariance has rank {} < {}, using pseudo-inverse",
            inv_root.rank,
            src.dim()
        );
    }
    Ok(OtMatrix {
        matrix: inner_root.as_sym().congruence(&inv_root.matrix),
        pseudo_inverse,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared 2-Wasserstein distance between Gaussians:
/// `‖a - b‖² + Tr(A + B - 2 (A^{1/2} B A^{1/2})^{1/2})`.
pub fn bw_distance_sq(mu: &Gaussian, nu: &Gaussian) -> Result<f64> {
    check_dims(mu.dim(), nu.dim(), "bw_distance_sq")?;
    let root = psd_sqrt(&mu.cov)?;
    let inner = nu.cov.congruence(root.as_sym());
    let cross = psd_sqrt(&inner)?.trace();
    let bures = (mu.cov.trace() + nu.cov.trace() - 2.0 * cross).max(0.0);
    Ok(sq_dist(&mu.mean, &nu.mean) + bures)
}

/// Riemannian logarithm `log_μ(ν) = (m_ν - m_μ, C - I)`.
pub fn bw_log(base: &Gaussian, other: &Gaussian) -> Result<TangentBW> {
    let c = bw_ot_matrix(base, other)?.matrix;
    Ok(TangentBW {
        a: other.mean.iter().zip(&base.mean).map(|(x, y)| x - y).collect(),
        s: c.sub(&SymMatrix::identity(base.dim())),
    })
}

/// Riemannian exponential `exp_μ((a, S)) = N(m + a, (S + I) Σ (S + I))`.
pub fn bw_exp(base: &Gaussian, v: &TangentBW) -> Result<Gaussian> {
    check_dims(base.dim(), v.dim(), "bw_exp")?;
    let d = base.dim();
    let shifted = v.s.add(&SymMatrix::identity(d));
    let min = min_eigenvalue(&shifted)?;
    let tol = PSD_REL_TOL * shifted.frobenius_norm().max(1.0);
    if min < -tol {
        return Err(Error::TangentBoundary { eigenvalue: min });
    }
    Ok(Gaussian {
        mean: base.mean.iter().zip(&v.a).map(|(m, a)| m + a).collect(),
        cov: base.cov.congruence(&shifted),
    })
}

/// `‖(a, S)‖²_{BW(μ)} = ‖a‖² + Tr(S Σ_μ S)`.
pub fn bw_tangent_norm_sq(base: &Gaussian, v: &TangentBW) -> Result<f64> {
    check_dims(base.dim(), v.dim(), "bw_tangent_norm_sq")?;
    let a2: f64 = v.a.iter().map(|x| x * x).sum();
    Ok(a2 + trace_sandwich(&v.s, &base.cov).max(0.0))
}

/// `Tr(S Σ S) = Σ_ij (SΣ)_ij S_ji`.
pub(crate) fn trace_sandwich(s: &SymMatrix, cov: &PsdMatrix) -> f64 {
    let ss = s.as_matrix().matmul(cov.as_matrix());
    let d = s.dim();
    let mut tr = 0.0;
    for i in 0..d {
        for j in 0..d {
            tr += ss[(i, j)] * s[(j, i)];
        }
    }
    tr
}

/// Geodesic between two Gaussians with the OT matrix cached.
#[derive(Clone, Debug)]
pub struct BwPath {
    pub source: Gaussian,
    pub target: Gaussian,
    pub ot_matrix: SymMatrix,
}

impl BwPath {
    pub fn new(source: Gaussian, target: Gaussian) -> Result<Self> {
        let ot_matrix = bw_ot_matrix(&source, &target)?.matrix;
        Ok(BwPath {
            source,
            target,
            ot_matrix,
        })
    }

    #[inline]
    fn dim(&self) -> usize {
        self.source.dim()
    }

    /// `T_t = (1 - t) I + t C`.
    fn interpolation_factor(&self, t: f64) -> SymMatrix {
        SymMatrix::identity(self.dim())
            .scale(1.0 - t)
            .add(&self.ot_matrix.scale(t))
    }

    /// McCann interpolant `N((1-t)a + tb, T_t A T_t)`.
    pub fn at(&self, t: f64) -> Gaussian {
        let mean = self
            .source
            .mean
            .iter()
            .zip(&self.target.mean)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        let tt = self.interpolation_factor(t);
        Gaussian {
            mean,
            cov: self.source.cov.congruence(&tt),
        }
    }

    fn mean_velocity(&self) -> Vec<f64> {
        self.target
            .mean
            .iter()
            .zip(&self.source.mean)
            .map(|(b, a)| b - a)
            .collect()
    }

    /// Riemannian velocity `(b - a, (C - I) T_t^{-1})`.
    pub fn velocity(&self, t: f64) -> Result<TangentBW> {
        let d = self.dim();
        let dot_t = self.ot_matrix.sub(&SymMatrix::identity(d));
        let tt = self.interpolation_factor(t);
        let s = solve(tt.as_matrix(), dot_t.as_matrix())
            .ok_or(Error::SingularInterpolation { t })?;
        Ok(TangentBW {
            a: self.mean_velocity(),
            s: SymMatrix::from_matrix(&s),
        })
    }

    /// Euclidean time derivative of the covariance, `Ṫ A T_t + T_t A Ṫ`,
    /// paired with the mean velocity.
    pub fn euclidean_velocity(&self, t: f64) -> TangentBW {
        let d = self.dim();
        let dot_t = self.ot_matrix.sub(&SymMatrix::identity(d));
        let tt = self.interpolation_factor(t);
        let a = self.source.cov.as_matrix();
        let half = dot_t.as_matrix().matmul(a).matmul(tt.as_matrix());
        let full: Matrix = half.add(&half.transpose());
        TangentBW {
            a: self.mean_velocity(),
            s: SymMatrix::from_matrix(&full),
        }
    }
}

/// McCann interpolation at time `t ∈ [0, 1]`.
pub fn bw_mccann(src: &Gaussian, dst: &Gaussian, t: f64) -> Result<Gaussian> {
    check_t(t)?;
    Ok(BwPath::new(src.clone(), dst.clone())?.at(t))
}

/// Riemannian velocity of the McCann interpolation at time `t`.
pub fn bw_velocity(src: &Gaussian, dst: &Gaussian, t: f64) -> Result<TangentBW> {
    BwPath::new(src.clone(), dst.clone())?.velocity(t)
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("time {t} outside [0, 1]")));
    }
    Ok(())
}

/// Pairwise squared W₂ between two batches of Gaussians.
pub fn frechet_cost_matrix(batch_a: &[Gaussian], batch_b: &[Gaussian]) -> Result<Matrix> {
    let mut out = Matrix::zeros(batch_a.len(), batch_b.len());
    // reuse the square root of each row Gaussian
    for (i, a) in batch_a.iter().enumerate() {
        let root = psd_sqrt(&a.cov)?;
        let tr_a = a.cov.trace();
        for (j, b) in batch_b.iter().enumerate() {
            check_dims(a.dim(), b.dim(), "frechet_cost_matrix")?;
            let cross = psd_sqrt(&b.cov.congruence(root.as_sym()))?.trace();
            let bures = (tr_a + b.cov.trace() - 2.0 * cross).max(0.0);
            out[(i, j)] = sq_dist(&a.mean, &b.mean) + bures;
        }
    }
    Ok(out)
}

/// Bures-Wasserstein barycenter of covariances by the fixed-point iteration
/// `S ← S^{-1/2} (Σ_i w_i (S^{1/2} Σ_i S^{1/2})^{1/2})² S^{-1/2}`.
///
/// Returns the barycenter and the final step size `‖S_{k+1} - S_k‖_F`.
pub fn bw_barycenter(
    covs: &[PsdMatrix],
    max_iters: usize,
    tol: f64,
) -> Result<(PsdMatrix, f64)> {
    let first = covs
        .first()
        .ok_or_else(|| Error::InvalidArgument("barycenter of an empty set".into()))?;
    let d = first.dim();
    let w = 1.0 / covs.len() as f64;
    let mut acc = Matrix::zeros(d, d);
    for c in covs {
        check_dims(c.dim(), d, "bw_barycenter")?;
        acc.add_assign_scaled(c.as_matrix(), w);
    }
    let mut s = PsdMatrix::from_matrix(acc)?;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let root = psd_sqrt(&s)?;
        let inv_root = psd_inv_sqrt(&s, OT_RANK_TOL)?;
        let mut mean_root = Matrix::zeros(d, d);
        for c in covs {
            let r = psd_sqrt(&c.congruence(root.as_sym()))?;
            mean_root.add_assign_scaled(r.as_matrix(), w);
        }
        let mean_root = SymMatrix::from_matrix(&mean_root);
        let sq = SymMatrix::from_matrix(&mean_root.as_matrix().matmul(mean_root.as_matrix()));
        let next = PsdMatrix::new_unchecked(sq.congruence(&inv_root.matrix));
        residual = next.as_matrix().sub(s.as_matrix()).frobenius_norm();
        s = next;
        if residual <= tol {
            break;
        }
    }
    Ok((s, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::linalg::sym_eig;

    fn random_gaussian(rng: &mut ChaCha8Rng, d: usize) -> Gaussian {
        let data = (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = Matrix::new(d, d, data);
        let cov = g.matmul(&g.transpose()).add(&Matrix::identity(d).scale(0.2));
        let mean = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        Gaussian::new(mean, PsdMatrix::from_matrix(cov).unwrap()).unwrap()
    }

    fn g(mean: &[f64], cov: Matrix) -> Gaussian {
        Gaussian::new(mean.to_vec(), PsdMatrix::from_matrix(cov).unwrap()).unwrap()
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn ot_matrix_examples() {
        let src = Gaussian::standard(2);
        let dst = g(&[0.0, 0.0], Matrix::identity(2).scale(4.0));
        let c = bw_ot_matrix(&src, &dst).unwrap();
        assert!(close(c.matrix.as_matrix(), &Matrix::identity(2).scale(2.0), 1e-12));
        assert!(!c.pseudo_inverse);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_gaussian(&mut rng, 3);
        let c = bw_ot_matrix(&a, &a).unwrap();
        assert!(close(c.matrix.as_matrix(), &Matrix::identity(3), 1e-8));
    }

    #[test]
    fn ot_matrix_flags_rank_deficient_source() {
        let src = g(&[0.0, 0.0], Matrix::from_diag(&[1.0, 0.0]));
        let dst = Gaussian::standard(2);
        let c = bw_ot_matrix(&src, &dst).unwrap();
        assert!(c.pseudo_inverse);
        assert!(c.matrix.as_matrix().is_finite());
    }

    #[test]
    fn distance_examples() {
        let m = [1.0, -2.0];
        let d = bw_distance_sq(&Gaussian::standard(2), &g(&m, Matrix::identity(2))).unwrap();
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-12);
        let d = bw_distance_sq(&Gaussian::standard(2), &g(&[0.0, 0.0], Matrix::identity(2).scale(4.0))).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-12);
        assert!(bw_distance_sq(&Gaussian::standard(2), &Gaussian::standard(3)).is_err());
    }

    #[test]
    fn distance_matches_eigen_oracle() {
        // Tr((A^{1/2} B A^{1/2})^{1/2}) equals the sum of square roots of the
        // eigenvalues of A^{1/2} B A^{1/2}; evaluate that directly.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_gaussian(&mut rng, 3);
            let b = random_gaussian(&mut rng, 3);
            let ea = sym_eig(a.cov.as_sym()).unwrap();
            let ra = ea.reconstruct_with(|v| v.max(0.0).sqrt());
            let inner = SymMatrix::from_matrix(&ra.as_matrix().matmul(b.cov.as_matrix()).matmul(ra.as_matrix()));
            let cross: f64 = sym_eig(&inner).unwrap().values.iter().map(|v| v.max(0.0).sqrt()).sum();
            let mean_gap: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y).powi(2)).sum();
            let oracle = mean_gap + a.cov.trace() + b.cov.trace() - 2.0 * cross;
            let d = bw_distance_sq(&a, &b).unwrap();
            assert!((d - oracle).abs() <= 1e-9 * oracle.max(1.0));
            let d2 = bw_distance_sq(&b, &a).unwrap();
            assert!((d - d2).abs() <= 1e-8 * d.max(1.0));
        }
    }

    #[test]
    fn log_exp_examples() {
        let a = Gaussian::standard(2);
        let v = bw_log(&a, &a).unwrap();
        assert!(v.a.iter().all(|x| x.abs() < 1e-12));
        assert!(v.s.as_matrix().max_abs() < 1e-12);

        let b = g(&[1.0, 2.0], Matrix::identity(2).scale(4.0));
        let v = bw_log(&a, &b).unwrap();
        assert_eq!(v.a, vec![1.0, 2.0]);
        assert!(close(v.s.as_matrix(), &Matrix::identity(2), 1e-12));

        let out = bw_exp(&a, &TangentBW { a: vec![0.0, 0.0], s: SymMatrix::identity(2) }).unwrap();
        assert!(close(out.cov.as_matrix(), &Matrix::identity(2).scale(4.0), 1e-14));

        let out = bw_exp(&b, &TangentBW { a: vec![0.5, -1.0], s: SymMatrix::zeros(2) }).unwrap();
        assert_eq!(out.mean, vec![1.5, 1.0]);
        assert_eq!(out.cov, b.cov);
    }

    #[test]
    fn exp_rejects_tangent_past_boundary() {
        let a = Gaussian::standard(2);
        let v = TangentBW { a: vec![0.0; 2], s: SymMatrix::from_diag(&[-2.0, 0.0]) };
        assert!(matches!(bw_exp(&a, &v), Err(Error::TangentBoundary { .. })));
    }

    #[test]
    fn mccann_examples() {
        let a = Gaussian::standard(2);
        let b = g(&[0.0, 0.0], Matrix::identity(2).scale(4.0));
        let mid = bw_mccann(&a, &b, 0.5).unwrap();
        assert!(close(mid.cov.as_matrix(), &Matrix::identity(2).scale(2.25), 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_gaussian(&mut rng, 3);
        let y = random_gaussian(&mut rng, 3);
        let p0 = bw_mccann(&x, &y, 0.0).unwrap();
        let p1 = bw_mccann(&x, &y, 1.0).unwrap();
        assert!(close(p0.cov.as_matrix(), x.cov.as_matrix(), 1e-6));
        assert!(close(p1.cov.as_matrix(), y.cov.as_matrix(), 1e-6));
        assert!(bw_mccann(&x, &y, 1.5).is_err());
    }

    #[test]
    fn velocity_examples() {
        let a = Gaussian::standard(2);
        let v = bw_velocity(&a, &a, 0.3).unwrap();
        assert!(v.s.as_matrix().max_abs() < 1e-12);

        let b = g(&[1.0, -1.0], Matrix::identity(2).scale(4.0));
        let v0 = bw_velocity(&a, &b, 0.0).unwrap();
        assert_eq!(v0.a, vec![1.0, -1.0]);
        assert!(close(v0.s.as_matrix(), &Matrix::identity(2), 1e-12));
        let vh = bw_velocity(&a, &b, 0.5).unwrap();
        assert!(close(vh.s.as_matrix(), &Matrix::identity(2).scale(2.0 / 3.0), 1e-12));
    }

    #[test]
    fn euclidean_velocity_scalar_case() {
        let a = g(&[0.0], Matrix::from_diag(&[1.0]));
        let b = g(&[0.0], Matrix::from_diag(&[4.0]));
        let path = BwPath::new(a, b).unwrap();
        assert_abs_diff_eq!(path.euclidean_velocity(0.0).s[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.euclidean_velocity(0.5).s[(0, 0)], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn euclidean_velocity_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let path = BwPath::new(random_gaussian(&mut rng, 3), random_gaussian(&mut rng, 3)).unwrap();
        let h = 1e-6;
        let t = 0.4;
        let fd = path.at(t + h).cov.as_matrix().sub(path.at(t - h).cov.as_matrix()).scale(0.5 / h);
        assert!(close(path.euclidean_velocity(t).s.as_matrix(), &fd, 1e-6));
        // Σ̇ᴱ = Σ̇ᴮᵂ Σ_t + Σ_t Σ̇ᴮᵂ
        let s = path.velocity(t).unwrap().s;
        let sig = path.at(t).cov;
        let rel = s.as_matrix().matmul(sig.as_matrix());
        let rel = rel.add(&rel.transpose());
        assert!(close(path.euclidean_velocity(t).s.as_matrix(), &rel, 1e-9));
    }

    #[test]
    fn tangent_norm_examples() {
        let a = Gaussian::standard(2);
        assert_eq!(bw_tangent_norm_sq(&a, &TangentBW::zero(2)).unwrap(), 0.0);
        let s = SymMatrix::new(Matrix::from_rows(&[[1.0, 2.0], [2.0, -1.0]])).unwrap();
        let v = TangentBW { a: vec![3.0, 4.0], s };
        // ‖a‖² + Tr(S²) = 25 + (1+4) + (4+1)
        assert_abs_diff_eq!(bw_tangent_norm_sq(&a, &v).unwrap(), 35.0, epsilon = 1e-12);
    }

    #[test]
    fn frechet_matches_scalar_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<_> = (0..4).map(|_| random_gaussian(&mut rng, 2)).collect();
        let ys: Vec<_> = (0..4).map(|_| random_gaussian(&mut rng, 2)).collect();
        let m = frechet_cost_matrix(&xs, &ys).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d = bw_distance_sq(&xs[i], &ys[j]).unwrap();
                assert!((m[(i, j)] - d).abs() <= 1e-12 * d.max(1.0));
            }
        }
        let same = frechet_cost_matrix(&xs, &xs).unwrap();
        for i in 0..4 {
            assert!(same[(i, i)].abs() < 1e-10);
        }
        let single = frechet_cost_matrix(&xs[..1], &ys[..1]).unwrap();
        assert_eq!(single.shape(), (1, 1));
    }

    #[test]
    fn barycenter_fixed_points() {
        let s0 = PsdMatrix::from_matrix(Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]])).unwrap();
        let (b, _) = bw_barycenter(&[s0.clone(), s0.clone(), s0.clone()], 50, 1e-6).unwrap();
        assert!(close(b.as_matrix(), s0.as_matrix(), 1e-9));

        let v1 = PsdMatrix::from_diag(&[1.0]).unwrap();
        let v9 = PsdMatrix::from_diag(&[9.0]).unwrap();
        let (b, _) = bw_barycenter(&[v1, v9], 50, 1e-6).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 4.0, epsilon = 1e-9);
    }

    #[test]
    fn barycenter_converges_on_random_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let covs: Vec<_> = (0..6).map(|_| random_gaussian(&mut rng, 2).cov).collect();
        let (b, residual) = bw_barycenter(&covs, 50, 1e-6).unwrap();
        assert!(residual <= 1e-6, "residual {residual}");
        // stationarity: mean of OT maps from the barycenter is the identity
        let base = Gaussian::new(vec![0.0; 2], b).unwrap();
        let mut mean_map = Matrix::zeros(2, 2);
        for c in &covs {
            let other = Gaussian::new(vec![0.0; 2], c.clone()).unwrap();
            mean_map.add_assign_scaled(bw_ot_matrix(&base, &other).unwrap().matrix.as_matrix(), 1.0 / 6.0);
        }
        assert!(close(&mean_map, &Matrix::identity(2), 1e-5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_geometry_identities(seed in any::<u64>(), di in 0usize..4) {
            let d = [1, 2, 3, 16][di];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mu = random_gaussian(&mut rng, d);
            let nu = random_gaussian(&mut rng, d);

            let v = bw_log(&mu, &nu).unwrap();
            let back = bw_exp(&mu, &v).unwrap();
            let scale = nu.cov.as_matrix().max_abs().max(1.0);
            prop_assert!(back.cov.as_matrix().sub(nu.cov.as_matrix()).max_abs() <= 1e-6 * scale);
            for (x, y) in back.mean.iter().zip(&nu.mean) {
                prop_assert!((x - y).abs() <= 1e-9);
            }

            let w2 = bw_distance_sq(&mu, &nu).unwrap();
            let norm = bw_tangent_norm_sq(&mu, &v).unwrap();
            prop_assert!((norm - w2).abs() <= 1e-6 * w2.max(1e-12));

            let c = bw_ot_matrix(&mu, &nu).unwrap().matrix;
            let push = mu.cov.congruence(&c);
            prop_assert!(push.as_matrix().sub(nu.cov.as_matrix()).max_abs() <= 1e-6 * scale);

            let path = BwPath::new(mu.clone(), nu.clone()).unwrap();
            let (s, t) = (0.2, 0.7);
            let dst = bw_distance_sq(&path.at(s), &path.at(t)).unwrap();
            prop_assert!((dst - (t - s) * (t - s) * w2).abs() <= 1e-6 * w2.max(1e-9));
        }
    }
}
