//! Reverse-mode differentiation over row-major matrices.
//!
//! A [`Tape`] records every primitive applied during one loss evaluation.
//! Parameters enter through [`Tape::param`], which caches one leaf per slot so
//! that repeated use accumulates into a single gradient. [`Tape::backward`]
//! may be called once, on a `1 × 1` root.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{gemm, Matrix};

use super::params::ModelParams;

pub type Tensor = Matrix;

/// Gradient per parameter slot.
pub type Gradients = BTreeMap<String, Tensor>;

/// Handle to a node on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// Layer-norm epsilon.
pub const LAYER_NORM_EPS: f64 = 1e-5;

enum Op {
    Leaf,
    Param,
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        offset: Var,
        xhat: Matrix,
        inv_std: Vec<f64>,
    },
    SoftmaxRows(Var),
    LogSumExpRows(Var),
    SumAll(Var),
    SumCols(Var),
    ConcatCols(Vec<Var>),
    SliceCols {
        x: Var,
        start: usize,
    },
    SymQuadTrace {
        x: Var,
        covs: Vec<Matrix>,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: BTreeMap<String, Var>,
    consumed: bool,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        let requires_grad = match &op {
            Op::Leaf => false,
            Op::Param => true,
            _ => self.parents(&op).iter().any(|p| self.nodes[p.0].requires_grad),
        };
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn parents(&self, op: &Op) -> Vec<Var> {
        match op {
            Op::Leaf | Op::Param => vec![],
            Op::MatMul(a, b)
            | Op::MatMulNT(a, b)
            | Op::Add(a, b)
            | Op::Sub(a, b)
            | Op::AddRow(a, b)
            | Op::Mul(a, b) => vec![*a, *b],
            Op::Scale(a, _)
            | Op::Relu(a)
            | Op::SoftmaxRows(a)
            | Op::LogSumExpRows(a)
            | Op::SumAll(a)
            | Op::SumCols(a) => vec![*a],
            Op::LayerNorm { x, gain, offset, .. } => vec![*x, *gain, *offset],
            Op::ConcatCols(vs) => vs.clone(),
            Op::SliceCols { x, .. } => vec![*x],
            Op::SymQuadTrace { x, .. } => vec![*x],
        }
    }

    #[inline]
    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Scalar value of a `1 × 1` node.
    pub fn scalar(&self, v: Var) -> f64 {
        let t = self.value(v);
        debug_assert_eq!(t.shape(), (1, 1));
        t[(0, 0)]
    }

    /// Constant input (no gradient).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Trainable slot of `params`; repeated calls return the same node.
    pub fn param(&mut self, params: &ModelParams, slot: &str) -> Var {
        let key = format!("{}{}", params.prefix(), slot);
        if let Some(&v) = self.params.get(&key) {
            return v;
        }
        let value = params
            .get(slot)
            .unwrap_or_else(|| panic!("model has no slot `{slot}`"))
            .clone();
        let v = self.push(value, Op::Param);
        self.params.insert(key, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        let mut out = Matrix::zeros(va.rows(), vb.cols());
        gemm(1.0, va, false, vb, false, 0.0, &mut out);
        self.push(out, Op::MatMul(a, b))
    }

    /// `a · bᵀ`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        let mut out = Matrix::zeros(va.rows(), vb.rows());
        gemm(1.0, va, false, vb, true, 0.0, &mut out);
        self.push(out, Op::MatMulNT(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).add(self.value(b));
        self.push(out, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let out = self.value(a).sub(self.value(b));
        self.push(out, Op::Sub(a, b))
    }

    /// Adds the `1 × c` row `b` to every row of `a`.
    pub fn add_row(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(vb.rows(), 1, "add_row expects a single row");
        assert_eq!(va.cols(), vb.cols(), "add_row width mismatch");
        let mut out = va.clone();
        let row = vb.row(0);
        for i in 0..out.rows() {
            for (o, r) in out.row_mut(i).iter_mut().zip(row) {
                *o += r;
            }
        }
        self.push(out, Op::AddRow(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "mul shape mismatch");
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let out = Matrix::new(va.rows(), va.cols(), data);
        self.push(out, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let out = self.value(a).scale(s);
        self.push(out, Op::Scale(a, s))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|x| x.max(0.0));
        self.push(out, Op::Relu(a))
    }

    /// Row-wise layer normalization with learned `1 × c` gain and offset.
    pub fn layer_norm(&mut self, x: Var, gain: Var, offset: Var) -> Var {
        let vx = self.value(x);
        let (n, c) = vx.shape();
        let mut xhat = Matrix::zeros(n, c);
        let mut inv_std = Vec::with_capacity(n);
        for i in 0..n {
            let row = vx.row(i);
            let mean = row.iter().sum::<f64>() / c as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / c as f64;
            let is = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            for (h, v) in xhat.row_mut(i).iter_mut().zip(row) {
                *h = (v - mean) * is;
            }
            inv_std.push(is);
        }
        let (g, b) = (self.value(gain), self.value(offset));
        assert_eq!(g.shape(), (1, c), "layer norm gain shape");
        assert_eq!(b.shape(), (1, c), "layer norm offset shape");
        let mut out = xhat.clone();
        for i in 0..n {
            for ((o, gv), bv) in out.row_mut(i).iter_mut().zip(g.row(0)).zip(b.row(0)) {
                *o = *o * gv + bv;
            }
        }
        self.push(
            out,
            Op::LayerNorm {
                x,
                gain,
                offset,
                xhat,
                inv_std,
            },
        )
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let mut out = va.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                z += *v;
            }
            for v in row.iter_mut() {
                *v /= z;
            }
        }
        self.push(out, Op::SoftmaxRows(a))
    }

    /// `n × 1` column of row-wise log-sum-exp.
    pub fn logsumexp_rows(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let data = (0..va.rows())
            .map(|i| {
                let row = va.row(i);
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
            })
            .collect();
        let out = Matrix::new(va.rows(), 1, data);
        self.push(out, Op::LogSumExpRows(a))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.push(Matrix::new(1, 1, vec![s]), Op::SumAll(a))
    }

    /// `n × 1` column of row sums.
    pub fn sum_cols(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let data = (0..va.rows()).map(|i| va.row(i).iter().sum()).collect();
        let out = Matrix::new(va.rows(), 1, data);
        self.push(out, Op::SumCols(a))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|p| self.value(*p).cols()).sum();
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let mut off = 0;
            for p in parts {
                let v = self.value(*p);
                assert_eq!(v.rows(), rows, "concat_cols row mismatch");
                out.row_mut(i)[off..off + v.cols()].copy_from_slice(v.row(i));
                off += v.cols();
            }
        }
        self.push(out, Op::ConcatCols(parts.to_vec()))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Var {
        let vx = self.value(x);
        assert!(start + len <= vx.cols(), "slice out of range");
        let mut out = Matrix::zeros(vx.rows(), len);
        for i in 0..vx.rows() {
            out.row_mut(i).copy_from_slice(&vx.row(i)[start..start + len]);
        }
        self.push(out, Op::SliceCols { x, start })
    }

    /// For each row `b` of `x`, read as the packed lower triangle of a
    /// symmetric `S_b`, returns `Tr(S_b Σ_b S_b)` as a `B × 1` column.
    pub fn sym_quad_trace(&mut self, x: Var, covs: Vec<Matrix>) -> Var {
        let vx = self.value(x);
        assert_eq!(vx.rows(), covs.len(), "one covariance per row");
        let data = (0..vx.rows())
            .map(|b| {
                let s = unpack_sym(vx.row(b), covs[b].rows());
                let ss = s.matmul(&covs[b]);
                let d = s.rows();
                let mut tr = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        tr += ss[(i, j)] * s[(j, i)];
                    }
                }
                tr
            })
            .collect();
        let out = Matrix::new(vx.rows(), 1, data);
        self.push(out, Op::SymQuadTrace { x, covs })
    }

    /// Reverse pass from a scalar root. The tape cannot be reused afterwards.
    pub fn backward(&mut self, root: Var) -> Result<Gradients> {
        if self.consumed {
            return Err(Error::Tape("backward already ran on this tape".into()));
        }
        if self.value(root).shape() != (1, 1) {
            return Err(Error::Tape(format!(
                "backward root must be scalar, got {:?}",
                self.value(root).shape()
            )));
        }
        self.consumed = true;
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Matrix::new(1, 1, vec![1.0]));

        for idx in (0..=root.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let node = &self.nodes[idx];
            let send = |v: Var, contrib: Tensor, grads: &mut Vec<Option<Tensor>>| {
                if !self.nodes[v.0].requires_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(acc) => acc.add_assign_scaled(&contrib, 1.0),
                    slot => *slot = Some(contrib),
                }
            };
            match &node.op {
                Op::Leaf => {}
                Op::Param => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    if self.nodes[a.0].requires_grad {
                        let mut da = Matrix::zeros(va.rows(), va.cols());
                        gemm(1.0, &g, false, vb, true, 0.0, &mut da);
                        send(*a, da, &mut grads);
                    }
                    if self.nodes[b.0].requires_grad {
                        let mut db = Matrix::zeros(vb.rows(), vb.cols());
                        gemm(1.0, va, true, &g, false, 0.0, &mut db);
                        send(*b, db, &mut grads);
                    }
                }
                Op::MatMulNT(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    if self.nodes[a.0].requires_grad {
                        let mut da = Matrix::zeros(va.rows(), va.cols());
                        gemm(1.0, &g, false, vb, false, 0.0, &mut da);
                        send(*a, da, &mut grads);
                    }
                    if self.nodes[b.0].requires_grad {
                        let mut db = Matrix::zeros(vb.rows(), vb.cols());
                        gemm(1.0, &g, true, va, false, 0.0, &mut db);
                        send(*b, db, &mut grads);
                    }
                }
                Op::Add(a, b) => {
                    send(*a, g.clone(), &mut grads);
                    send(*b, g, &mut grads);
                }
                Op::Sub(a, b) => {
                    send(*b, g.scale(-1.0), &mut grads);
                    send(*a, g, &mut grads);
                }
                Op::AddRow(a, b) => {
                    let mut db = Matrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (d, v) in db.row_mut(0).iter_mut().zip(g.row(i)) {
                            *d += v;
                        }
                    }
                    send(*b, db, &mut grads);
                    send(*a, g, &mut grads);
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.value(*a), self.value(*b));
                    let da = Matrix::new(
                        g.rows(),
                        g.cols(),
                        g.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect(),
                    );
                    let db = Matrix::new(
                        g.rows(),
                        g.cols(),
                        g.data().iter().zip(va.data()).map(|(x, y)| x * y).collect(),
                    );
                    send(*a, da, &mut grads);
                    send(*b, db, &mut grads);
                }
                Op::Scale(a, s) => send(*a, g.scale(*s), &mut grads),
                Op::Relu(a) => {
                    let va = self.value(*a);
                    let data = g
                        .data()
                        .iter()
                        .zip(va.data())
                        .map(|(gv, x)| if *x > 0.0 { *gv } else { 0.0 })
                        .collect();
                    send(*a, Matrix::new(g.rows(), g.cols(), data), &mut grads);
                }
                Op::LayerNorm {
                    x,
                    gain,
                    offset,
                    xhat,
                    inv_std,
                } => {
                    let (n, c) = g.shape();
                    let gv = self.value(*gain);
                    let mut dgain = Matrix::zeros(1, c);
                    let mut doff = Matrix::zeros(1, c);
                    let mut dx = Matrix::zeros(n, c);
                    for i in 0..n {
                        let gr = g.row(i);
                        let xr = xhat.row(i);
                        let mut sum_d = 0.0;
                        let mut sum_dx = 0.0;
                        for k in 0..c {
                            dgain.row_mut(0)[k] += gr[k] * xr[k];
                            doff.row_mut(0)[k] += gr[k];
                            let dh = gr[k] * gv.row(0)[k];
                            sum_d += dh;
                            sum_dx += dh * xr[k];
                        }
                        let cf = c as f64;
                        let row = dx.row_mut(i);
                        for k in 0..c {
                            let dh = gr[k] * gv.row(0)[k];
                            row[k] = inv_std[i] / cf * (cf * dh - sum_d - xr[k] * sum_dx);
                        }
                    }
                    send(*gain, dgain, &mut grads);
                    send(*offset, doff, &mut grads);
                    send(*x, dx, &mut grads);
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let mut da = Matrix::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let (yr, gr) = (y.row(i), g.row(i));
                        let dot: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                        for (k, d) in da.row_mut(i).iter_mut().enumerate() {
                            *d = yr[k] * (gr[k] - dot);
                        }
                    }
                    send(*a, da, &mut grads);
                }
                Op::LogSumExpRows(a) => {
                    let va = self.value(*a);
                    let lse = &node.value;
                    let mut da = Matrix::zeros(va.rows(), va.cols());
                    for i in 0..va.rows() {
                        let l = lse[(i, 0)];
                        let gi = g[(i, 0)];
                        for (d, x) in da.row_mut(i).iter_mut().zip(va.row(i)) {
                            *d = gi * (x - l).exp();
                        }
                    }
                    send(*a, da, &mut grads);
                }
                Op::SumAll(a) => {
                    let (r, c) = self.value(*a).shape();
                    send(*a, Matrix::filled(r, c, g[(0, 0)]), &mut grads);
                }
                Op::SumCols(a) => {
                    let (r, c) = self.value(*a).shape();
                    let mut da = Matrix::zeros(r, c);
                    for i in 0..r {
                        da.row_mut(i).iter_mut().for_each(|d| *d = g[(i, 0)]);
                    }
                    send(*a, da, &mut grads);
                }
                Op::ConcatCols(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let w = self.value(*p).cols();
                        let mut dp = Matrix::zeros(g.rows(), w);
                        for i in 0..g.rows() {
                            dp.row_mut(i).copy_from_slice(&g.row(i)[off..off + w]);
                        }
                        off += w;
                        send(*p, dp, &mut grads);
                    }
                }
                Op::SliceCols { x, start } => {
                    let (r, c) = self.value(*x).shape();
                    let mut dx = Matrix::zeros(r, c);
                    for i in 0..r {
                        dx.row_mut(i)[*start..*start + g.cols()].copy_from_slice(g.row(i));
                    }
                    send(*x, dx, &mut grads);
                }
                Op::SymQuadTrace { x, covs } => {
                    let vx = self.value(*x);
                    let mut dx = Matrix::zeros(vx.rows(), vx.cols());
                    for b in 0..vx.rows() {
                        let d = covs[b].rows();
                        let s = unpack_sym(vx.row(b), d);
                        let sc = s.matmul(&covs[b]);
                        // d Tr(SΣS) / dS = SΣ + ΣS, folded onto the packed entries
                        let full = sc.add(&sc.transpose());
                        let gb = g[(b, 0)];
                        let row = dx.row_mut(b);
                        let mut k = 0;
                        for i in 0..d {
                            for j in 0..=i {
                                row[k] = gb * if i == j { full[(i, i)] } else { 2.0 * full[(i, j)] };
                                k += 1;
                            }
                        }
                    }
                    send(*x, dx, &mut grads);
                }
            }
        }

        let mut out = Gradients::new();
        for (name, v) in &self.params {
            let (r, c) = self.value(*v).shape();
            let g = grads[v.0].take().unwrap_or_else(|| Matrix::zeros(r, c));
            out.insert(name.clone(), g);
        }
        Ok(out)
    }
}

/// Packed row-major lower triangle to a full symmetric matrix.
pub(crate) fn unpack_sym(packed: &[f64], d: usize) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in 0..=i {
            m[(i, j)] = packed[k];
            m[(j, i)] = packed[k];
            k += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::nn::params::ModelParams;

    fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::new(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    /// Central-difference check of `f` with respect to every entry of the
    /// single free slot "x".
    fn check_op(build: impl Fn(&mut Tape, Var) -> Var, x0: Matrix) {
        let params = ModelParams::from_slots([("x".to_string(), x0.clone())]);
        let mut tape = Tape::new();
        let x = tape.param(&params, "x");
        let root = build(&mut tape, x);
        let grads = tape.backward(root).unwrap();
        let g = &grads["x"];
        let h = 1e-6;
        for k in 0..x0.data().len() {
            let eval = |delta: f64| {
                let mut xv = x0.clone();
                xv.data_mut()[k] += delta;
                let p = ModelParams::from_slots([("x".to_string(), xv)]);
                let mut t = Tape::new();
                let x = t.param(&p, "x");
                let r = build(&mut t, x);
                t.scalar(r)
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let an = g.data()[k];
            assert!((fd - an).abs() <= 1e-6 * (1.0 + fd.abs()), "entry {k}: fd {fd} vs analytic {an}");
        }
    }

    #[test]
    fn hand_derivative_of_quadratic() {
        // loss = ‖W x‖² / 2 → ∂/∂W = (W x) xᵀ
        let w = Matrix::from_rows(&[[1.0, 2.0], [0.5, -1.0]]);
        let x = [3.0, -1.0];
        let params = ModelParams::from_slots([("w".to_string(), w.clone())]);
        let mut tape = Tape::new();
        let wv = tape.param(&params, "w");
        let xv = tape.constant(Matrix::new(2, 1, x.to_vec()));
        let wx = tape.matmul(wv, xv);
        let sq = tape.mul(wx, wx);
        let s = tape.sum_all(sq);
        let loss = tape.scale(s, 0.5);
        let g = tape.backward(loss).unwrap();
        let wxv = w.matvec(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(g["w"][(i, j)], wxv[i] * x[j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn relu_blocks_negative_units() {
        let params = ModelParams::from_slots([("x".to_string(), Matrix::row_vector(&[-1.0, 2.0]))]);
        let mut tape = Tape::new();
        let x = tape.param(&params, "x");
        let r = tape.relu(x);
        let s = tape.sum_all(r);
        let g = tape.backward(s).unwrap();
        assert_eq!(g["x"].data(), &[0.0, 1.0]);
    }

    #[test]
    fn tape_is_single_use_and_needs_scalar_root() {
        let params = ModelParams::from_slots([("x".to_string(), Matrix::row_vector(&[1.0, 2.0]))]);
        let mut tape = Tape::new();
        let x = tape.param(&params, "x");
        assert!(matches!(tape.backward(x), Err(Error::Tape(_))));
        let s = tape.sum_all(x);
        tape.backward(s).unwrap();
        assert!(matches!(tape.backward(s), Err(Error::Tape(_))));
    }

    #[test]
    fn primitive_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let other = rand_matrix(&mut rng, 4, 3);
        let wsq = rand_matrix(&mut rng, 3, 3);
        let weights = rand_matrix(&mut rng, 3, 4);
        let x0 = rand_matrix(&mut rng, 3, 4);

        check_op(
            |t, x| {
                let o = t.constant(other.clone());
                let m = t.matmul(x, o);
                let r = t.relu(m);
                t.sum_all(r)
            },
            x0.clone(),
        );
        check_op(
            |t, x| {
                let w = t.constant(weights.clone());
                let m = t.matmul_nt(x, w);
                let s = t.softmax_rows(m);
                let c = t.constant(wsq.clone());
                let p = t.mul(s, c);
                t.sum_all(p)
            },
            x0.clone(),
        );
        check_op(
            |t, x| {
                let g = t.constant(Matrix::row_vector(&[0.5, 1.5, -1.0, 2.0]));
                let b = t.constant(Matrix::row_vector(&[0.1, 0.0, 0.3, -0.2]));
                let y = t.layer_norm(x, g, b);
                let w = t.constant(weights.clone());
                let p = t.mul(y, w);
                let q = t.mul(p, p);
                t.sum_all(q)
            },
            x0.clone(),
        );
        check_op(
            |t, x| {
                let l = t.logsumexp_rows(x);
                let s = t.sum_cols(x);
                let a = t.add(l, s);
                let sq = t.mul(a, a);
                t.sum_all(sq)
            },
            x0.clone(),
        );
        check_op(
            |t, x| {
                let a = t.slice_cols(x, 1, 2);
                let b = t.slice_cols(x, 0, 1);
                let c = t.concat_cols(&[a, b, a]);
                let row = t.constant(Matrix::row_vector(&[1.0, -2.0, 0.5, 3.0, 0.25]));
                let d = t.add_row(c, row);
                let e = t.sub(d, c);
                let f = t.mul(d, e);
                let s = t.sum_all(f);
                t.scale(s, 0.3)
            },
            x0.clone(),
        );
        // three 2x2 symmetric matrices, packed
        let covs: Vec<Matrix> = (0..3)
            .map(|_| {
                let a = rand_matrix(&mut rng, 2, 2);
                a.matmul(&a.transpose())
            })
            .collect();
        check_op(
            |t, x| {
                let q = t.sym_quad_trace(x, covs.clone());
                t.sum_all(q)
            },
            rand_matrix(&mut rng, 3, 3),
        );
    }

    #[test]
    fn sym_quad_trace_value() {
        let mut tape = Tape::new();
        // S = [[1,2],[2,-1]], Σ = I → Tr(S²) = 10
        let x = tape.constant(Matrix::row_vector(&[1.0, 2.0, -1.0]));
        let q = tape.sym_quad_trace(x, vec![Matrix::identity(2)]);
        assert_abs_diff_eq!(tape.value(q)[(0, 0)], 10.0, epsilon = 1e-14);
    }
}
