//! Forward passes for the two vector-field architectures.

use std::f64::consts::PI;

use crate::bw::{Gaussian, TangentBW};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::ot::PointCloud;

use super::params::{Architecture, InputNorm, MlpSpec, ModelParams, TransformerSpec};
use super::tape::{Tape, Var};

/// Default number of Fourier frequencies for time.
pub const FOURIER_K: usize = 8;

/// `[sin(2π 2^i t) for i < k, cos(2π 2^i t) for i < k]`.
pub fn fourier_time_features(t: f64, k: usize) -> Vec<f64> {
    assert!(k >= 1, "need at least one frequency");
    let mut out = vec![0.0; 2 * k];
    for i in 0..k {
        let w = 2.0 * PI * (1u64 << i) as f64 * t;
        out[i] = w.sin();
        out[k + i] = w.cos();
    }
    out
}

/// Width of [`time_features`].
pub const fn time_width(k: usize) -> usize {
    2 * k + 1
}

/// Network time input: `t` itself, then its Fourier features. Every
/// frequency on the ladder has period 1, so the raw value is what tells
/// `t = 0` from `t = 1`.
pub fn time_features(t: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(time_width(k));
    out.push(t);
    out.extend(fourier_time_features(t, k));
    out
}

/// Time features for a batch of times, one row each.
pub fn time_rows(ts: &[f64], k: usize) -> Matrix {
    let mut m = Matrix::zeros(ts.len(), time_width(k));
    for (i, t) in ts.iter().enumerate() {
        m.row_mut(i).copy_from_slice(&time_features(*t, k));
    }
    m
}

/// One-hot rows for optional labels; `None` gives an all-zero row.
fn one_hot(labels: &[Option<usize>], vocab: usize) -> Result<Matrix> {
    let mut m = Matrix::zeros(labels.len(), vocab);
    for (i, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            if *l >= vocab {
                return Err(Error::InvalidArgument(format!(
                    "label {l} outside vocabulary of size {vocab}"
                )));
            }
            m[(i, *l)] = 1.0;
        }
    }
    Ok(m)
}

fn mlp_spec(params: &ModelParams) -> Result<&MlpSpec> {
    match params.arch() {
        Architecture::Mlp(s) => Ok(s),
        _ => Err(Error::InvalidArgument("expected an MLP model".into())),
    }
}

fn transformer_spec(params: &ModelParams) -> Result<&TransformerSpec> {
    match params.arch() {
        Architecture::Transformer(s) => Ok(s),
        _ => Err(Error::InvalidArgument("expected a transformer model".into())),
    }
}

fn linear(tape: &mut Tape, params: &ModelParams, x: Var, prefix: &str) -> Var {
    let w = tape.param(params, &format!("{prefix}.w"));
    let b = tape.param(params, &format!("{prefix}.b"));
    let xw = tape.matmul(x, w);
    tape.add_row(xw, b)
}

fn norm(tape: &mut Tape, params: &ModelParams, x: Var, prefix: &str) -> Var {
    let g = tape.param(params, &format!("{prefix}.g"));
    let b = tape.param(params, &format!("{prefix}.b"));
    tape.layer_norm(x, g, b)
}

/// Batched MLP: `inputs` is `B × input_dim`, `t_feat` is `B × (2k + 1)`.
pub fn mlp_forward_tape(
    tape: &mut Tape,
    params: &ModelParams,
    inputs: Var,
    t_feat: Var,
    labels: &[Option<usize>],
) -> Result<Var> {
    let spec = mlp_spec(params)?;
    let (b, din) = tape.value(inputs).shape();
    if din != spec.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "MLP expects input width {}, got {din}",
            spec.input_dim
        )));
    }
    if tape.value(t_feat).shape() != (b, time_width(spec.fourier_k)) {
        return Err(Error::DimensionMismatch("time features shape".into()));
    }
    let inputs = match &spec.input_norm {
        Some(n) => {
            if n.shift.len() != din || n.scale.len() != din {
                return Err(Error::DimensionMismatch("input normalization width".into()));
            }
            let shift = tape.constant(Matrix::row_vector(&n.shift.iter().map(|s| -s).collect::<Vec<_>>()));
            let centred = tape.add_row(inputs, shift);
            let mut inv = Matrix::zeros(b, din);
            for r in 0..b {
                for (c, s) in n.scale.iter().enumerate() {
                    inv[(r, c)] = 1.0 / s;
                }
            }
            let inv = tape.constant(inv);
            tape.mul(centred, inv)
        }
        None => inputs,
    };
    let mut parts = vec![inputs, t_feat];
    if spec.label_vocab > 0 {
        if labels.len() != b {
            return Err(Error::DimensionMismatch("one label slot per row".into()));
        }
        let oh = tape.constant(one_hot(labels, spec.label_vocab)?);
        let emb = tape.param(params, "label.emb");
        parts.push(tape.matmul(oh, emb));
    }
    let z = tape.concat_cols(&parts);
    let pre = linear(tape, params, z, "in");
    let act = tape.relu(pre);
    let mut h = norm(tape, params, act, "in.ln");
    for l in 0..spec.layers.saturating_sub(1) {
        let pre = linear(tape, params, h, &format!("hidden{l}"));
        let act = tape.relu(pre);
        let res = tape.add(h, act);
        h = norm(tape, params, res, &format!("hidden{l}.ln"));
    }
    Ok(linear(tape, params, h, "out"))
}

/// Single-vector MLP evaluation.
pub fn mlp_forward(params: &ModelParams, input: &[f64], t_feat: &[f64], cond: Option<usize>) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let x = tape.constant(Matrix::row_vector(input));
    let t = tape.constant(Matrix::row_vector(t_feat));
    let out = mlp_forward_tape(&mut tape, params, x, t, &[cond])?;
    Ok(tape.value(out).row(0).to_vec())
}

/// Network input row for a Gaussian: mean followed by the packed lower
/// triangle of its covariance.
pub fn gaussian_features(g: &Gaussian) -> Vec<f64> {
    let mut v = g.mean.clone();
    v.extend(g.cov.as_sym().to_lower());
    v
}

/// Standardization for [`gaussian_features`] fitted to a set of Gaussians:
/// means are centred and divided by their pooled spread, covariance entries
/// are divided by the average variance.
pub fn gaussian_input_norm(items: &[Gaussian]) -> InputNorm {
    let d = items.first().map_or(0, |g| g.dim());
    let n = items.len().max(1) as f64;
    let mut centre = vec![0.0; d];
    for g in items {
        for (c, m) in centre.iter_mut().zip(&g.mean) {
            *c += m / n;
        }
    }
    let spread = items
        .iter()
        .flat_map(|g| g.mean.iter().zip(&centre).map(|(m, c)| (m - c).powi(2)))
        .sum::<f64>()
        / (n * d.max(1) as f64);
    let var = items.iter().map(|g| g.cov.as_matrix().trace()).sum::<f64>() / (n * d.max(1) as f64);
    let positive = |x: f64| if x.is_finite() && x > 1e-12 { x } else { 1.0 };
    let p = d * (d + 1) / 2;
    let mut scale = vec![positive(spread.sqrt()); d];
    scale.extend(std::iter::repeat(positive(var)).take(p));
    centre.extend(std::iter::repeat(0.0).take(p));
    InputNorm { shift: centre, scale }
}

/// Batched BW field; returns the `B × d` mean velocities and the
/// `B × d(d+1)/2` packed symmetric velocities.
pub fn bw_field_tape(
    tape: &mut Tape,
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    states: &[Gaussian],
    ts: &[f64],
    labels: &[Option<usize>],
) -> Result<(Var, Var)> {
    let spec = mlp_spec(mean_net)?;
    let d = states.first().map(|g| g.dim()).unwrap_or(0);
    let p = d * (d + 1) / 2;
    if spec.input_dim != d + p || spec.output_dim != d {
        return Err(Error::DimensionMismatch(format!(
            "mean network is sized for {} inputs / {} outputs, Gaussians need {} / {d}",
            spec.input_dim,
            spec.output_dim,
            d + p
        )));
    }
    let cspec = mlp_spec(cov_net)?;
    if mean_net.name() == cov_net.name() {
        return Err(Error::InvalidArgument("mean and covariance networks need distinct names".into()));
    }
    if cspec.output_dim != p {
        return Err(Error::DimensionMismatch("covariance network output width".into()));
    }
    let mut x = Matrix::zeros(states.len(), d + p);
    for (i, g) in states.iter().enumerate() {
        if g.dim() != d {
            return Err(Error::DimensionMismatch("mixed Gaussian dimensions in batch".into()));
        }
        x.row_mut(i).copy_from_slice(&gaussian_features(g));
    }
    let xin = tape.constant(x);
    let tf = tape.constant(time_rows(ts, spec.fourier_k));
    let a = mlp_forward_tape(tape, mean_net, xin, tf, labels)?;
    let tf_c = if cspec.fourier_k == spec.fourier_k {
        tf
    } else {
        tape.constant(time_rows(ts, cspec.fourier_k))
    };
    let s = mlp_forward_tape(tape, cov_net, xin, tf_c, labels)?;
    Ok((a, s))
}

/// Tangent vector predicted at one Gaussian.
pub fn bw_field_forward(
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    g: &Gaussian,
    t: f64,
    cond: Option<usize>,
) -> Result<TangentBW> {
    let mut tape = Tape::new();
    let (a, s) = bw_field_tape(&mut tape, mean_net, cov_net, std::slice::from_ref(g), &[t], &[cond])?;
    Ok(TangentBW {
        a: tape.value(a).row(0).to_vec(),
        s: SymMatrix::from_lower(tape.value(s).row(0))?,
    })
}

/// Batched BW field evaluation without gradients.
pub fn bw_field_batch(
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    states: &[Gaussian],
    ts: &[f64],
    labels: &[Option<usize>],
) -> Result<Vec<TangentBW>> {
    let mut tape = Tape::new();
    let (a, s) = bw_field_tape(&mut tape, mean_net, cov_net, states, ts, labels)?;
    (0..states.len())
        .map(|i| {
            Ok(TangentBW {
                a: tape.value(a).row(i).to_vec(),
                s: SymMatrix::from_lower(tape.value(s).row(i))?,
            })
        })
        .collect()
}

/// Self-attention block `block` applied to `n × e` tokens.
pub fn attention_block_tape(tape: &mut Tape, params: &ModelParams, tokens: Var, block: usize) -> Result<Var> {
    let spec = transformer_spec(params)?;
    let e = spec.embed_dim;
    if spec.heads == 0 || e % spec.heads != 0 {
        return Err(Error::InvalidArgument(format!(
            "embedding width {e} is not divisible by {} heads",
            spec.heads
        )));
    }
    if tape.value(tokens).cols() != e {
        return Err(Error::DimensionMismatch("token width".into()));
    }
    let dh = e / spec.heads;
    let pre = format!("block{block}");
    let q = linear(tape, params, tokens, &format!("{pre}.attn.q"));
    let k = linear(tape, params, tokens, &format!("{pre}.attn.k"));
    let v = linear(tape, params, tokens, &format!("{pre}.attn.v"));
    let mut heads = Vec::with_capacity(spec.heads);
    for h in 0..spec.heads {
        let qh = tape.slice_cols(q, h * dh, dh);
        let kh = tape.slice_cols(k, h * dh, dh);
        let vh = tape.slice_cols(v, h * dh, dh);
        let scores = tape.matmul_nt(qh, kh);
        let scores = tape.scale(scores, 1.0 / (dh as f64).sqrt());
        let attn = tape.softmax_rows(scores);
        heads.push(tape.matmul(attn, vh));
    }
    let cat = if heads.len() == 1 { heads[0] } else { tape.concat_cols(&heads) };
    let o = linear(tape, params, cat, &format!("{pre}.attn.o"));
    let r1 = tape.add(tokens, o);
    let x1 = norm(tape, params, r1, &format!("{pre}.ln1"));
    let f1 = linear(tape, params, x1, &format!("{pre}.ff1"));
    let f1 = tape.relu(f1);
    let f2 = linear(tape, params, f1, &format!("{pre}.ff2"));
    let r2 = tape.add(x1, f2);
    Ok(norm(tape, params, r2, &format!("{pre}.ln2")))
}

/// Value-only block evaluation.
pub fn attention_block_forward(params: &ModelParams, tokens: &Matrix, block: usize) -> Result<Matrix> {
    let mut tape = Tape::new();
    let x = tape.constant(tokens.clone());
    let y = attention_block_tape(&mut tape, params, x, block)?;
    Ok(tape.value(y).clone())
}

/// Velocity of every point of `points` (`n × d`) at time `t`.
pub fn pc_field_tape(
    tape: &mut Tape,
    params: &ModelParams,
    points: &Matrix,
    t: f64,
    cond: Option<usize>,
) -> Result<Var> {
    let spec = transformer_spec(params)?;
    if points.rows() == 0 {
        return Err(Error::InvalidArgument("empty point cloud".into()));
    }
    if points.cols() != spec.point_dim {
        return Err(Error::DimensionMismatch(format!(
            "transformer expects {}-dimensional points, got {}",
            spec.point_dim,
            points.cols()
        )));
    }
    let x = tape.constant(points.clone());
    let mut tokens = linear(tape, params, x, "embed");
    let tf = tape.constant(Matrix::row_vector(&time_features(t, spec.fourier_k)));
    let mut ctx = linear(tape, params, tf, "time");
    if spec.label_vocab > 0 {
        let oh = tape.constant(one_hot(&[cond], spec.label_vocab)?);
        let emb = tape.param(params, "label.emb");
        let le = tape.matmul(oh, emb);
        ctx = tape.add(ctx, le);
    }
    tokens = tape.add_row(tokens, ctx);
    for b in 0..spec.blocks {
        tokens = attention_block_tape(tape, params, tokens, b)?;
    }
    Ok(linear(tape, params, tokens, "out"))
}

pub fn pc_field_forward(params: &ModelParams, cloud: &PointCloud, t: f64, cond: Option<usize>) -> Result<Matrix> {
    let mut tape = Tape::new();
    let v = pc_field_tape(&mut tape, params, cloud.points(), t, cond)?;
    Ok(tape.value(v).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PsdMatrix;
    use crate::nn::params::normal_matrix;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_transformer(vocab: usize) -> Architecture {
        Architecture::Transformer(TransformerSpec {
            point_dim: 2,
            embed_dim: 8,
            heads: 2,
            blocks: 2,
            ff_dim: 12,
            fourier_k: 3,
            label_vocab: vocab,
        })
    }

    fn randomize(p: &mut ModelParams, rng: &mut ChaCha8Rng) {
        for (_, t) in p.slots_mut() {
            *t = normal_matrix(rng, t.rows(), t.cols(), 0.5);
        }
    }

    #[test]
    fn fourier_features_examples() {
        let f = fourier_time_features(0.0, 4);
        assert_eq!(f.len(), 8);
        assert!(f[..4].iter().all(|v| *v == 0.0));
        assert!(f[4..].iter().all(|v| *v == 1.0));
        let h = fourier_time_features(0.5, 3);
        assert_abs_diff_eq!(h[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[3], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mlp_hand_computed_single_layer() {
        // input (1, 0), one frequency; identity-like embedding on the first two
        // coordinates, the time features are ignored by zero rows.
        let spec = MlpSpec {
            input_dim: 2,
            output_dim: 2,
            width: 2,
            layers: 1,
            fourier_k: 1,
            label_vocab: 0,
            label_dim: 0,
            input_norm: None,
        };
        let mut p = ModelParams::init("m", Architecture::Mlp(spec), &mut ChaCha8Rng::seed_from_u64(0));
        *p.get_mut("in.w").unwrap() = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        *p.get_mut("in.b").unwrap() = Matrix::row_vector(&[0.0, 0.0]);
        *p.get_mut("out.w").unwrap() = Matrix::identity(2);
        *p.get_mut("out.b").unwrap() = Matrix::row_vector(&[0.5, 0.0]);
        // relu → (1, 0); layer norm: mean 1/2, var 1/4 → ±1/sqrt(1/4 + 1e-5)
        let out = mlp_forward(&p, &[1.0, 0.0], &time_features(0.3, 1), None).unwrap();
        let z = 0.5 / (0.25f64 + 1e-5).sqrt();
        assert_abs_diff_eq!(out[0], z + 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out[1], -z, epsilon = 1e-12);
    }

    #[test]
    fn zero_init_fields_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = 2;
        let mk = |name: &str, out: usize, rng: &mut ChaCha8Rng| {
            ModelParams::init(
                name,
                Architecture::Mlp(MlpSpec {
                    input_dim: 5,
                    output_dim: out,
                    width: 16,
                    layers: 3,
                    fourier_k: FOURIER_K,
                    label_vocab: 2,
                    label_dim: 4,
                    input_norm: None,
                }),
                rng,
            )
        };
        let mean = mk("mean", d, &mut rng);
        let cov = mk("cov", 3, &mut rng);
        let g = Gaussian::new(vec![0.3, -1.0], PsdMatrix::from_diag(&[2.0, 0.5]).unwrap()).unwrap();
        let v = bw_field_forward(&mean, &cov, &g, 0.4, Some(1)).unwrap();
        assert!(v.a.iter().all(|x| *x == 0.0));
        assert!(v.s.as_matrix().data().iter().all(|x| *x == 0.0));

        let pc = ModelParams::init("pc", small_transformer(0), &mut rng);
        let cloud = PointCloud::from_rows(&[[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]).unwrap();
        let f = pc_field_forward(&pc, &cloud, 0.7, None).unwrap();
        assert_eq!(f.shape(), (3, 2));
        assert!(f.data().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn zero_label_embedding_ignores_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = MlpSpec {
            input_dim: 3,
            output_dim: 2,
            width: 8,
            layers: 2,
            fourier_k: 2,
            label_vocab: 3,
            label_dim: 2,
            input_norm: None,
        };
        let mut p = ModelParams::init("m", Architecture::Mlp(spec), &mut rng);
        randomize(&mut p, &mut rng);
        *p.get_mut("label.emb").unwrap() = Matrix::zeros(3, 2);
        let tf = time_features(0.2, 2);
        let a = mlp_forward(&p, &[1.0, 2.0, 3.0], &tf, Some(0)).unwrap();
        let b = mlp_forward(&p, &[1.0, 2.0, 3.0], &tf, Some(2)).unwrap();
        assert_eq!(a, b);
        assert!(mlp_forward(&p, &[1.0, 2.0, 3.0], &tf, Some(3)).is_err());
        assert!(matches!(
            mlp_forward(&p, &[1.0, 2.0], &tf, None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bw_field_cov_output_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mk = |name: &str, out: usize, rng: &mut ChaCha8Rng| {
            let mut p = ModelParams::init(
                name,
                Architecture::Mlp(MlpSpec {
                    input_dim: 9,
                    output_dim: out,
                    width: 8,
                    layers: 2,
                    fourier_k: 2,
                    label_vocab: 0,
                    label_dim: 0,
                    input_norm: None,
                }),
                rng,
            );
            randomize(&mut p, rng);
            p
        };
        let (mean, cov) = (mk("mean", 3, &mut rng), mk("cov", 6, &mut rng));
        let g = Gaussian::new(vec![0.0; 3], PsdMatrix::identity(3)).unwrap();
        let v = bw_field_forward(&mean, &cov, &g, 0.5, None).unwrap();
        let s = v.s.as_matrix();
        assert_eq!(s, &s.transpose());
        assert!(s.max_abs() > 0.0);
    }

    #[test]
    fn attention_block_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = ModelParams::init("pc", small_transformer(0), &mut rng);
        randomize(&mut p, &mut rng);

        let x = normal_matrix(&mut rng, 5, 8, 1.0);
        let y = attention_block_forward(&p, &x, 0).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let xp = Matrix::from_rows(&perm.iter().map(|&i| x.row(i).to_vec()).collect::<Vec<_>>());
        let yp = attention_block_forward(&p, &xp, 0).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            for c in 0..8 {
                assert_abs_diff_eq!(yp[(k, c)], y[(i, c)], epsilon = 1e-12);
            }
        }

        // duplicated token → duplicated output
        let r = x.row(1).to_vec();
        let twin = Matrix::from_rows(&[r.clone(), r]);
        let yt = attention_block_forward(&p, &twin, 1).unwrap();
        assert_eq!(yt.row(0), yt.row(1));

        // one token: attention weight is exactly 1, so the head output is V
        let single = Matrix::row_vector(x.row(2));
        let mut tape = Tape::new();
        let xv = tape.constant(single.clone());
        let q = linear(&mut tape, &p, xv, "block0.attn.q");
        let k = linear(&mut tape, &p, xv, "block0.attn.k");
        let s = tape.matmul_nt(q, k);
        let a = tape.softmax_rows(s);
        assert_eq!(tape.value(a).data(), &[1.0]);
    }

    #[test]
    fn heads_must_divide_width() {
        let arch = Architecture::Transformer(TransformerSpec {
            point_dim: 2,
            embed_dim: 6,
            heads: 4,
            blocks: 1,
            ff_dim: 4,
            fourier_k: 1,
            label_vocab: 0,
        });
        let p = ModelParams::init("pc", arch, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(
            attention_block_forward(&p, &Matrix::zeros(2, 6), 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pc_field_is_permutation_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p = ModelParams::init("pc", small_transformer(2), &mut rng);
        randomize(&mut p, &mut rng);
        let pts = normal_matrix(&mut rng, 6, 2, 1.0);
        let cloud = PointCloud::uniform(pts.clone()).unwrap();
        let v = pc_field_forward(&p, &cloud, 0.35, Some(1)).unwrap();
        let perm = [5, 2, 0, 1, 4, 3];
        let pp = Matrix::from_rows(&perm.iter().map(|&i| pts.row(i).to_vec()).collect::<Vec<_>>());
        let vp = pc_field_forward(&p, &PointCloud::uniform(pp).unwrap(), 0.35, Some(1)).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            for c in 0..2 {
                assert_abs_diff_eq!(vp[(k, c)], v[(i, c)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn input_norm_standardizes_gaussian_features() {
        let items: Vec<Gaussian> = [(1.0, 0.01), (3.0, 0.03)]
            .iter()
            .map(|&(m, v)| Gaussian::new(vec![m, -m], PsdMatrix::from_diag(&[v, v]).unwrap()).unwrap())
            .collect();
        let n = gaussian_input_norm(&items);
        assert_eq!(n.shift, vec![2.0, -2.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(n.scale[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.scale[2], 0.02, epsilon = 1e-12);
        // a single Gaussian has no spread; the scale falls back to one
        assert_eq!(gaussian_input_norm(&items[..1]).scale[0], 1.0);
    }
}
