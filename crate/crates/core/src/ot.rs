//! Entropic optimal transport between discrete measures.
//!
//! The solver works in the log domain: potentials `(f, g)` are updated with
//! log-sum-exp reductions so that regularization as small as a thousandth of
//! the mean cost does not underflow. The coupling is recovered as
//! `P_ij = exp((f_i + g_j - C_ij) / ε)`; the weights are absorbed into the
//! potentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default Sinkhorn iteration budget.
pub const DEFAULT_SINKHORN_ITERS: usize = 200;
/// Default early-exit tolerance on the L∞ marginal violation.
pub const DEFAULT_SINKHORN_TOL: f64 = 1e-4;
/// Largest problem size accepted by [`exact_ot_small`].
pub const EXACT_OT_MAX_POINTS: usize = 8;

/// Weighted point cloud: an `n × d` point matrix and weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Matrix,
    weights: Vec<f64>,
}

impl PointCloud {
    /// Uniformly weighted cloud.
    pub fn uniform(points: Matrix) -> Result<Self> {
        let n = points.rows();
        PointCloud::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn new(points: Matrix, weights: Vec<f64>) -> Result<Self> {
        let n = points.rows();
        if n == 0 {
            return Err(Error::InvalidArgument("point cloud must contain at least one point".into()));
        }
        if points.cols() == 0 {
            return Err(Error::InvalidArgument("point cloud must have ambient dimension ≥ 1".into()));
        }
        if weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} points",
                weights.len(),
                n
            )));
        }
        if !points.is_finite() {
            return Err(Error::NonFinite("point coordinate".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        Ok(PointCloud { points, weights })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        PointCloud::uniform(Matrix::from_rows(rows))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    #[inline]
    pub fn points(&self) -> &Matrix {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - w0).abs() <= 1e-12)
    }

    /// Replaces the points, keeping the weights.
    pub fn with_points(&self, points: Matrix) -> Result<Self> {
        PointCloud::new(points, self.weights.clone())
    }

    /// Weighted mean and covariance of the points.
    pub fn moments(&self) -> (Vec<f64>, Matrix) {
        let d = self.dim();
        let mut mean = vec![0.0; d];
        for (i, w) in self.weights.iter().enumerate() {
            for (m, x) in mean.iter_mut().zip(self.points.row(i)) {
                *m += w * x;
            }
        }
        let mut cov = Matrix::zeros(d, d);
        for (i, w) in self.weights.iter().enumerate() {
            let row = self.points.row(i);
            for a in 0..d {
                for b in 0..d {
                    cov[(a, b)] += w * (row[a] - mean[a]) * (row[b] - mean[b]);
                }
            }
        }
        (mean, cov)
    }
}

/// Squared Euclidean cost matrix `C_ij = ‖x_i - y_j‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix(Matrix);

impl CostMatrix {
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite("cost matrix entry".into()));
        }
        Ok(CostMatrix(m))
    }

    #[inline]
    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn mean(&self) -> f64 {
        let d = self.0.data();
        d.iter().sum::<f64>() / d.len().max(1) as f64
    }

    pub fn max(&self) -> f64 {
        self.0.data().iter().fold(0.0f64, |m, v| m.max(*v))
    }
}

/// Squared Euclidean distances between the supports of two clouds.
pub fn cost_matrix(src: &PointCloud, dst: &PointCloud) -> Result<CostMatrix> {
    pairwise_sq_dists(src.points(), dst.points()).map(CostMatrix)
}

pub(crate) fn pairwise_sq_dists(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    if x.cols() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions {} and {}",
            x.cols(),
            y.cols()
        )));
    }
    let mut c = Matrix::zeros(x.rows(), y.rows());
    for i in 0..x.rows() {
        let xi = x.row(i);
        for j in 0..y.rows() {
            c[(i, j)] = xi.iter().zip(y.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    Ok(c)
}

/// How the regularization strength is specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig {
    pub value: f64,
    /// When set, the effective ε is `value × mean(C)` for each problem.
    pub normalized: bool,
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        EpsilonConfig {
            value: 0.002,
            normalized: true,
        }
    }
}

impl EpsilonConfig {
    pub fn absolute(value: f64) -> Self {
        EpsilonConfig {
            value,
            normalized: false,
        }
    }

    pub fn relative(value: f64) -> Self {
        EpsilonConfig {
            value,
            normalized: true,
        }
    }

    pub fn effective(&self, cost: &CostMatrix) -> f64 {
        if self.normalized {
            let mean = cost.mean();
            if mean > 0.0 {
                return self.value * mean;
            }
        }
        self.value
    }
}

/// Output of [`sinkhorn`].
#[derive(Clone, Debug)]
pub struct EntropicPlan {
    pub coupling: Matrix,
    pub f_pot: Vec<f64>,
    pub g_pot: Vec<f64>,
    pub epsilon: f64,
    pub iterations_run: usize,
    pub marginal_error: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_weights(w: &[f64], n: usize, side: &str) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{side} weights have length {} but cost has {n}",
            w.len()
        )));
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("{side} weights must be nonnegative")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{side} weights sum to {total}")));
    }
    Ok(())
}

/// Scalings larger than `e^ABSORB_AT` are folded into the log potentials.
const ABSORB_AT: f64 = 30.0;

/// Sinkhorn state in scaling form with log-domain absorption: the plan is
/// `exp(k_ij + f_i + g_j) u_i v_j` with `k = -C / ε`, so iterations are
/// matrix-vector products and exponentials are only taken when `u` or `v`
/// drift far from one.
struct Scaling<'a> {
    k: Vec<f64>,
    a: &'a [f64],
    b: &'a [f64],
    f: Vec<f64>,
    g: Vec<f64>,
    kern: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> Scaling<'a> {
    fn new(c: &Matrix, epsilon: f64, a: &'a [f64], b: &'a [f64], init: Option<(Vec<f64>, Vec<f64>)>) -> Self {
        let (m, n) = c.shape();
        let k: Vec<f64> = c.data().iter().map(|v| -v / epsilon).collect();
        let g = match init {
            Some((f0, g0)) if f0.len() == m && g0.len() == n => g0.iter().map(|v| v / epsilon).collect(),
            _ => vec![0.0; n],
        };
        // f is overwritten by the first row update; pick it so every row
        // of the kernel peaks at one
        let f = (0..m)
            .map(|i| {
                let peak = (0..n)
                    .map(|j| k[i * n + j] + g[j])
                    .fold(f64::NEG_INFINITY, f64::max);
                if peak.is_finite() { -peak } else { 0.0 }
            })
            .collect();
        let mut st = Scaling {
            kern: vec![0.0; m * n],
            u: a.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect(),
            v: b.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect(),
            k,
            a,
            b,
            f,
            g,
        };
        st.rebuild();
        st
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn n(&self) -> usize {
        self.b.len()
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        if self.a[i] > 0.0 && self.b[j] > 0.0 {
            (self.k[i * self.n() + j] + self.f[i] + self.g[j]).exp()
        } else {
            0.0
        }
    }

    fn rebuild(&mut self) {
        let n = self.n();
        for i in 0..self.m() {
            for j in 0..n {
                self.kern[i * n + j] = self.entry(i, j);
            }
        }
    }

    fn row_sums(&mut self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut kv = vec![0.0; self.m()];
        for i in 0..self.m() {
            let row = &self.kern[i * n..(i + 1) * n];
            kv[i] = row.iter().zip(&self.v).map(|(k, v)| k * v).sum();
            if self.a[i] > 0.0 && !(kv[i] > self.a[i] * (-ABSORB_AT).exp()) {
                // the scaling would leave its safe range: solve this row in the log domain
                self.fold_cols();
                let b = self.b;
                let lse = log_sum_exp((0..n).filter(|&j| b[j] > 0.0).map(|j| self.k[i * n + j] + self.g[j]));
                self.f[i] = -lse;
                self.u[i] = 1.0;
                for j in 0..n {
                    self.kern[i * n + j] = self.entry(i, j);
                }
                kv[i] = self.kern[i * n..(i + 1) * n].iter().zip(&self.v).map(|(k, v)| k * v).sum();
            }
            if !kv[i].is_finite() {
                return Err(Error::NonFinite("sinkhorn row mass".into()));
            }
        }
        Ok(kv)
    }

    fn update_rows(&mut self, kv: &[f64]) {
        for i in 0..self.m() {
            self.u[i] = if self.a[i] > 0.0 { self.a[i] / kv[i] } else { 0.0 };
        }
    }

    fn update_cols(&mut self) -> Result<()> {
        let (m, n) = (self.m(), self.n());
        let mut ktu = vec![0.0; n];
        for i in 0..m {
            let ui = self.u[i];
            if ui == 0.0 {
                continue;
            }
            for (acc, k) in ktu.iter_mut().zip(&self.kern[i * n..(i + 1) * n]) {
                *acc += k * ui;
            }
        }
        for j in 0..n {
            if self.b[j] == 0.0 {
                self.v[j] = 0.0;
                continue;
            }
            if !(ktu[j] > self.b[j] * (-ABSORB_AT).exp()) {
                // the scaling would leave its safe range: solve this column in the log domain
                self.fold_rows();
                let a = self.a;
                let lse = log_sum_exp((0..m).filter(|&i| a[i] > 0.0).map(|i| self.k[i * n + j] + self.f[i]));
                self.g[j] = self.b[j].ln() - lse;
                self.v[j] = 1.0;
                for i in 0..m {
                    self.kern[i * n + j] = self.entry(i, j);
                }
                continue;
            }
            self.v[j] = self.b[j] / ktu[j];
            if !self.v[j].is_finite() {
                return Err(Error::NonFinite("sinkhorn column scaling".into()));
            }
        }
        Ok(())
    }

    /// Moves `u` into `f` without touching the kernel's values.
    fn fold_rows(&mut self) {
        let n = self.n();
        for i in 0..self.m() {
            if self.a[i] > 0.0 && self.u[i] != 1.0 {
                self.f[i] += self.u[i].ln();
                self.u[i] = 1.0;
                for j in 0..n {
                    self.kern[i * n + j] = self.entry(i, j);
                }
            }
        }
    }

    /// Moves `v` into `g` without touching the kernel's values.
    fn fold_cols(&mut self) {
        let n = self.n();
        for j in 0..n {
            if self.b[j] > 0.0 && self.v[j] != 1.0 {
                self.g[j] += self.v[j].ln();
                self.v[j] = 1.0;
                for i in 0..self.m() {
                    self.kern[i * n + j] = self.entry(i, j);
                }
            }
        }
    }

    fn absorb_if_large(&mut self) {
        let large = |x: &f64| *x > 0.0 && x.ln().abs() > ABSORB_AT;
        if self.u.iter().any(large) || self.v.iter().any(large) {
            for (f, (u, a)) in self.f.iter_mut().zip(self.u.iter_mut().zip(self.a)) {
                if *a > 0.0 {
                    *f += u.ln();
                    *u = 1.0;
                }
            }
            for (g, (v, b)) in self.g.iter_mut().zip(self.v.iter_mut().zip(self.b)) {
                if *b > 0.0 {
                    *g += v.ln();
                    *v = 1.0;
                }
            }
            self.rebuild();
        }
    }

    /// Dimensionless potentials `f + ln u`, `g + ln v`; `-inf` on zero weights.
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let join = |p: &[f64], s: &[f64], w: &[f64]| -> Vec<f64> {
            p.iter()
                .zip(s)
                .zip(w)
                .map(|((p, s), w)| if *w > 0.0 { p + s.ln() } else { f64::NEG_INFINITY })
                .collect()
        };
        (join(&self.f, &self.u, self.a), join(&self.g, &self.v, self.b))
    }
}

/// Sinkhorn iterations for `min_P ⟨C, P⟩ + ε Σ P_ij (log P_ij - 1)` over
/// couplings of the two weight vectors, stabilized by absorbing the
/// scalings into log potentials.
///
/// Each iteration updates `f` then `g`, so column marginals are exact after
/// every iteration and the stopping rule only has to look at the rows.
pub fn sinkhorn(
    cost: &CostMatrix,
    src_w: &[f64],
    dst_w: &[f64],
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<EntropicPlan> {
    sinkhorn_from(cost, src_w, dst_w, epsilon, max_iters, tol, None)
}

/// Iterations per intermediate stage of [`sinkhorn_annealed`].
pub const ANNEAL_STAGE_ITERS: usize = 10;

/// Sinkhorn with ε-scaling: solves at `ε_k = max(ε, max(C) / 2^k)` for
/// `k = 0, 1, ...`, warm-starting each stage from the previous potentials.
/// Only the last stage (at `epsilon` itself) uses `max_iters` and `tol`.
pub fn sinkhorn_annealed(
    cost: &CostMatrix,
    src_w: &[f64],
    dst_w: &[f64],
    epsilon: f64,
    max_iters: usize,
    tol: f64,
) -> Result<EntropicPlan> {
    let mut eps = cost.max();
    let mut warm = None;
    while eps > 2.0 * epsilon && eps.is_finite() {
        let plan = sinkhorn_from(cost, src_w, dst_w, eps, ANNEAL_STAGE_ITERS, 0.0, warm.take())?;
        warm = Some((plan.f_pot, plan.g_pot));
        eps *= 0.5;
    }
    sinkhorn_from(cost, src_w, dst_w, epsilon, max_iters, tol, warm)
}

/// `init` holds starting potentials in cost units.
fn sinkhorn_from(
    cost: &CostMatrix,
    src_w: &[f64],
    dst_w: &[f64],
    epsilon: f64,
    max_iters: usize,
    tol: f64,
    init: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<EntropicPlan> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let c = cost.as_matrix();
    if !c.is_finite() {
        return Err(Error::NonFinite("cost matrix entry".into()));
    }
    let (m, n) = c.shape();
    check_weights(src_w, m, "source")?;
    check_weights(dst_w, n, "target")?;

    let mut st = Scaling::new(c, epsilon, src_w, dst_w, init);
    let mut iterations_run = 0;
    for it in 0..max_iters.max(1) {
        let kv = st.row_sums()?;
        if it > 0 {
            let err = (0..m)
                .map(|i| (st.u[i] * kv[i] - src_w[i]).abs())
                .fold(0.0f64, f64::max);
            if err <= tol {
                break;
            }
        }
        st.update_rows(&kv);
        st.update_cols()?;
        st.absorb_if_large();
        iterations_run = it + 1;
    }
    let (f, g) = st.potentials();
    let k = &st.k;

    let mut coupling = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            coupling[(i, j)] = (f[i] + g[j] + k[i * n + j]).exp();
        }
    }
    let marginal_error = marginal_violation(&coupling, src_w, dst_w);
    if !coupling.is_finite() {
        return Err(Error::NonFinite("sinkhorn coupling".into()));
    }
    Ok(EntropicPlan {
        coupling,
        f_pot: f.iter().map(|v| v * epsilon).collect(),
        g_pot: g.iter().map(|v| v * epsilon).collect(),
        epsilon,
        iterations_run,
        marginal_error,
    })
}

/// L∞ violation of both marginals.
pub fn marginal_violation(p: &Matrix, a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = p.shape();
    let mut err = 0.0f64;
    for i in 0..m {
        let s: f64 = p.row(i).iter().sum();
        err = err.max((s - a[i]).abs());
    }
    for j in 0..n {
        let s: f64 = (0..m).map(|i| p[(i, j)]).sum();
        err = err.max((s - b[j]).abs());
    }
    err
}

/// Solves entropic OT between two clouds with the given ε policy.
pub fn solve_clouds(
    src: &PointCloud,
    dst: &PointCloud,
    eps: EpsilonConfig,
    max_iters: usize,
    tol: f64,
) -> Result<(EntropicPlan, CostMatrix)> {
    let cost = cost_matrix(src, dst)?;
    let epsilon = eps.effective(&cost);
    let plan = sinkhorn(&cost, src.weights(), dst.weights(), epsilon, max_iters, tol)?;
    Ok((plan, cost))
}

/// Greedy rounding of a square coupling to a permutation: repeatedly take the
/// largest remaining entry, then remove its row and column. Ties go to the
/// lexicographically smallest `(row, col)`.
///
/// Returns `perm` with `perm[i]` the column assigned to row `i`.
pub fn round_to_permutation(plan: &EntropicPlan) -> Result<Vec<usize>> {
    round_matrix_to_permutation(&plan.coupling)
}

pub fn round_matrix_to_permutation(p: &Matrix) -> Result<Vec<usize>> {
    let (m, n) = p.shape();
    if m != n {
        return Err(Error::DimensionMismatch(format!(
            "rounding needs a square coupling, got {m}x{n}"
        )));
    }
    let mut row_free = vec![true; n];
    let mut col_free = vec![true; n];
    let mut perm = vec![usize::MAX; n];
    for _ in 0..n {
        let mut best = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
        for i in (0..n).filter(|&i| row_free[i]) {
            let row = p.row(i);
            for j in (0..n).filter(|&j| col_free[j]) {
                if row[j] > best.0 || best.1 == usize::MAX {
                    best = (row[j], i, j);
                }
            }
        }
        let (_, i, j) = best;
        perm[i] = j;
        row_free[i] = false;
        col_free[j] = false;
    }
    Ok(perm)
}

/// Entropic transport map: for each query row `x`, the softmax-weighted
/// average of target points with logits `(g_j - ‖x - y_j‖²) / ε`.
pub fn entropic_map(plan: &EntropicPlan, dst: &PointCloud, query: &Matrix) -> Result<Matrix> {
    if plan.g_pot.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "plan has {} target potentials but cloud has {} points",
            plan.g_pot.len(),
            dst.len()
        )));
    }
    if !query.is_finite() {
        return Err(Error::NonFinite("entropic map query".into()));
    }
    let d2 = pairwise_sq_dists(query, dst.points())?;
    let y = dst.points();
    let mut out = Matrix::zeros(query.rows(), dst.dim());
    let mut logits = vec![0.0; dst.len()];
    for q in 0..query.rows() {
        let mut max = f64::NEG_INFINITY;
        for j in 0..dst.len() {
            logits[j] = (plan.g_pot[j] - d2[(q, j)]) / plan.epsilon;
            max = max.max(logits[j]);
        }
        let mut z = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            z += *l;
        }
        let row = out.row_mut(q);
        for (j, w) in logits.iter().enumerate() {
            let w = w / z;
            for (o, yv) in row.iter_mut().zip(y.row(j)) {
                *o += w * yv;
            }
        }
    }
    Ok(out)
}

/// `⟨C, P⟩`.
pub fn transport_cost(plan: &EntropicPlan, cost: &CostMatrix) -> Result<f64> {
    if plan.coupling.shape() != cost.shape() {
        return Err(Error::DimensionMismatch(format!(
            "coupling {:?} vs cost {:?}",
            plan.coupling.shape(),
            cost.shape()
        )));
    }
    Ok(plan
        .coupling
        .data()
        .iter()
        .zip(cost.as_matrix().data())
        .map(|(p, c)| p * c)
        .sum())
}

/// `⟨C, P⟩ + ε Σ P (log P - 1)`.
pub fn entropic_objective(p: &Matrix, cost: &CostMatrix, epsilon: f64) -> f64 {
    p.data()
        .iter()
        .zip(cost.as_matrix().data())
        .map(|(&pv, &cv)| {
            let ent = if pv > 0.0 { pv * (pv.ln() - 1.0) } else { 0.0 };
            pv * cv + epsilon * ent
        })
        .sum()
}

/// Mean squared displacement of a permutation assignment.
pub fn permutation_cost(cost: &CostMatrix, perm: &[usize]) -> f64 {
    let c = cost.as_matrix();
    perm.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum::<f64>() / perm.len() as f64
}

/// Exhaustive OT between two uniform clouds of equal size `n ≤ 8`.
/// Returns the first optimal permutation in lexicographic order and its mean
/// squared displacement.
pub fn exact_ot_small(src: &PointCloud, dst: &PointCloud) -> Result<(Vec<usize>, f64)> {
    let n = src.len();
    if dst.len() != n {
        return Err(Error::DimensionMismatch(format!("{} vs {} points", n, dst.len())));
    }
    if n > EXACT_OT_MAX_POINTS {
        return Err(Error::InvalidArgument(format!(
            "exact OT limited to {EXACT_OT_MAX_POINTS} points, got {n}"
        )));
    }
    if !src.is_uniform() || !dst.is_uniform() {
        return Err(Error::InvalidArgument("exact OT requires uniform weights".into()));
    }
    let cost = cost_matrix(src, dst)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (permutation_cost(&cost, &perm), perm.clone());
    while next_permutation(&mut perm) {
        let c = permutation_cost(&cost, &perm);
        if c < best.0 {
            best = (c, perm.clone());
        }
    }
    Ok((best.1, best.0))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}
