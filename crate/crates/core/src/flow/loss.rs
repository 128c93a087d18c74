//! Flow-matching regression losses.

use crate::bw::{BwPath, Gaussian, TangentBW};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::{bw_field_tape, pc_field_tape, ModelParams, Tape, Var};
use crate::ot::{cost_matrix, entropic_map, round_to_permutation, sinkhorn, sinkhorn_annealed, EpsilonConfig, PointCloud};

use super::config::{BwMethod, Interpolant};

/// Interpolated state and regression target for one Gaussian pair.
pub fn bw_target(src: &Gaussian, dst: &Gaussian, t: f64, method: BwMethod) -> Result<(Gaussian, TangentBW)> {
    let path = BwPath::new(src.clone(), dst.clone())?;
    let state = path.at(t);
    let target = match method {
        BwMethod::Riemannian => path.velocity(t)?,
        BwMethod::EuclideanBw | BwMethod::Frobenius => path.euclidean_velocity(t),
    };
    Ok((state, target))
}

/// Batch loss `mean_b ‖f(μ_b, t_b) − v_b‖²`, where the norm is the BW
/// tangent norm at `μ_b` or, for the Frobenius baseline, the Euclidean norm
/// of `(m, Σ)`.
pub fn bw_batch_loss(
    tape: &mut Tape,
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    states: &[Gaussian],
    targets: &[TangentBW],
    ts: &[f64],
    labels: &[Option<usize>],
    method: BwMethod,
) -> Result<Var> {
    let b = states.len();
    if b == 0 || targets.len() != b || ts.len() != b {
        return Err(Error::DimensionMismatch("states, targets and times must align".into()));
    }
    let d = states[0].dim();
    let p = d * (d + 1) / 2;
    let (a, s) = bw_field_tape(tape, mean_net, cov_net, states, ts, labels)?;

    let mut ta = Matrix::zeros(b, d);
    let mut ts_mat = Matrix::zeros(b, p);
    for (i, v) in targets.iter().enumerate() {
        ta.row_mut(i).copy_from_slice(&v.a);
        ts_mat.row_mut(i).copy_from_slice(&v.s.to_lower());
    }
    let ta = tape.constant(ta);
    let tsv = tape.constant(ts_mat);
    let da = tape.sub(a, ta);
    let da2 = tape.mul(da, da);
    let mean_term = tape.sum_all(da2);
    let ds = tape.sub(s, tsv);
    let cov_term = match method {
        BwMethod::Riemannian | BwMethod::EuclideanBw => {
            let q = tape.sym_quad_trace(ds, states.iter().map(|g| g.cov.as_matrix().clone()).collect());
            tape.sum_all(q)
        }
        BwMethod::Frobenius => {
            // off-diagonal packed entries appear twice in the full matrix
            let mut w = Matrix::zeros(b, p);
            for r in 0..b {
                let mut k = 0;
                for i in 0..d {
                    for j in 0..=i {
                        w[(r, k)] = if i == j { 1.0 } else { 2.0 };
                        k += 1;
                    }
                }
            }
            let w = tape.constant(w);
            let sq = tape.mul(ds, ds);
            let weighted = tape.mul(sq, w);
            tape.sum_all(weighted)
        }
    };
    let total = tape.add(mean_term, cov_term);
    Ok(tape.scale(total, 1.0 / b as f64))
}

/// Single-pair loss on a fresh tape.
pub fn bw_fm_loss(
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    src: &Gaussian,
    dst: &Gaussian,
    t: f64,
    cond: Option<usize>,
    method: BwMethod,
) -> Result<(Tape, Var)> {
    let (state, target) = bw_target(src, dst, t, method)?;
    let mut tape = Tape::new();
    let loss = bw_batch_loss(
        &mut tape,
        mean_net,
        cov_net,
        &[state],
        &[target],
        &[t],
        &[cond],
        method,
    )?;
    Ok((tape, loss))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Rounding,
    EntropicMap,
}

#[derive(Clone, Copy, Debug)]
pub struct PcLossConfig {
    pub epsilon: EpsilonConfig,
    pub iters: usize,
    pub tol: f64,
    pub anneal: bool,
    pub interpolant: Interpolant,
}

impl Default for PcLossConfig {
    fn default() -> Self {
        PcLossConfig {
            epsilon: EpsilonConfig::default(),
            iters: crate::ot::DEFAULT_SINKHORN_ITERS,
            tol: crate::ot::DEFAULT_SINKHORN_TOL,
            anneal: true,
            interpolant: Interpolant::Auto,
        }
    }
}

/// Transported source points `T̂(X)`.
#[derive(Clone, Debug)]
pub struct PcTarget {
    pub mapped: Matrix,
    pub kind: MapKind,
    pub sinkhorn_iters: usize,
    pub marginal_error: f64,
}

/// Solves entropic OT from `src` to `dst` and maps every source point,
/// by the rounded permutation when allowed and the sizes agree, by the
/// entropic map otherwise.
pub fn pc_target(src: &PointCloud, dst: &PointCloud, cfg: &PcLossConfig) -> Result<PcTarget> {
    if src.is_empty() || dst.is_empty() {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    let cost = cost_matrix(src, dst)?;
    let eps = cfg.epsilon.effective(&cost);
    let solve = if cfg.anneal { sinkhorn_annealed } else { sinkhorn };
    let plan = solve(&cost, src.weights(), dst.weights(), eps, cfg.iters, cfg.tol)?;
    let rounding = match cfg.interpolant {
        Interpolant::EntropicMap => false,
        Interpolant::Rounding => {
            if src.len() != dst.len() {
                return Err(Error::InvalidArgument(format!(
                    "rounding needs equal sizes, got {} and {}",
                    src.len(),
                    dst.len()
                )));
            }
            true
        }
        Interpolant::Auto => src.len() == dst.len(),
    };
    let (mapped, kind) = if rounding {
        let perm = round_to_permutation(&plan)?;
        let mut m = Matrix::zeros(src.len(), src.dim());
        for (i, &j) in perm.iter().enumerate() {
            m.row_mut(i).copy_from_slice(dst.points().row(j));
        }
        (m, MapKind::Rounding)
    } else {
        (entropic_map(&plan, dst, src.points())?, MapKind::EntropicMap)
    };
    Ok(PcTarget {
        mapped,
        kind,
        sinkhorn_iters: plan.iterations_run,
        marginal_error: plan.marginal_error,
    })
}

/// `X̂_t = (1 − t) X + t T̂(X)`.
pub fn pc_interpolant(src: &Matrix, mapped: &Matrix, t: f64) -> Matrix {
    let mut out = src.scale(1.0 - t);
    out.add_assign_scaled(mapped, t);
    out
}

/// `mean_i ‖f(X̂_t, t)_i − (T̂(X) − X)_i‖²` recorded on `tape`.
pub fn pc_loss_from_target(
    tape: &mut Tape,
    params: &ModelParams,
    src: &Matrix,
    mapped: &Matrix,
    t: f64,
    cond: Option<usize>,
) -> Result<Var> {
    let xt = pc_interpolant(src, mapped, t);
    let pred = pc_field_tape(tape, params, &xt, t, cond)?;
    let target = tape.constant(mapped.sub(src));
    let diff = tape.sub(pred, target);
    let sq = tape.mul(diff, diff);
    let total = tape.sum_all(sq);
    Ok(tape.scale(total, 1.0 / src.rows() as f64))
}

pub fn pc_fm_loss(
    params: &ModelParams,
    src: &PointCloud,
    dst: &PointCloud,
    t: f64,
    cond: Option<usize>,
    cfg: &PcLossConfig,
) -> Result<(Tape, Var, MapKind)> {
    let target = pc_target(src, dst, cfg)?;
    let mut tape = Tape::new();
    let loss = pc_loss_from_target(&mut tape, params, src.points(), &target.mapped, t, cond)?;
    Ok((tape, loss, target.kind))
}
