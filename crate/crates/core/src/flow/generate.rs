//! Integration of learned fields from source samples.

use rayon::prelude::*;

use crate::bw::{Gaussian, TangentBW};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, psd_project, Matrix, PsdMatrix, SymMatrix};
use crate::nn::{bw_field_batch, pc_field_forward, ModelParams};
use crate::ot::PointCloud;

/// Most halvings of one Riemannian step before giving up.
pub const MAX_HALVINGS: usize = 10;

/// How a predicted `(a, S)` moves a Gaussian over a step `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateRule {
    /// `m ← m + h a`, `Σ ← (I + hS) Σ (I + hS)`.
    Riemannian,
    /// `m ← m + h a`, `Σ ← Σ + h S`, projected back to PSD when needed.
    Euclidean,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenerationStats {
    /// Step halvings forced by `I + hS` leaving the PSD cone.
    pub halvings: usize,
    /// Eigenvalue truncations applied to Euclidean iterates.
    pub projections: usize,
}

#[derive(Clone, Debug)]
pub struct BwGeneration {
    pub samples: Vec<Gaussian>,
    /// Per sample, the `N + 1` states visited.
    pub trajectories: Option<Vec<Vec<Gaussian>>>,
    pub stats: GenerationStats,
}

fn check_tangent(v: &TangentBW, step: usize) -> Result<()> {
    if v.a.iter().all(|x| x.is_finite()) && v.s.as_matrix().is_finite() {
        Ok(())
    } else {
        Err(Error::GenerationAbort {
            step,
            reason: "field returned a non-finite value".into(),
        })
    }
}

fn riemannian_step(g: &Gaussian, v: &TangentBW, h: f64, step: usize, stats: &mut GenerationStats) -> Result<Gaussian> {
    let d = g.dim();
    let mut halvings = 0;
    let mut hh = h;
    let u = loop {
        let u = SymMatrix::identity(d).add(&v.s.scale(hh));
        if min_eigenvalue(&u)? > 0.0 {
            break u;
        }
        halvings += 1;
        if halvings > MAX_HALVINGS {
            return Err(Error::GenerationAbort {
                step,
                reason: format!("I + hS stayed indefinite after {MAX_HALVINGS} halvings"),
            });
        }
        hh *= 0.5;
    };
    if halvings > 0 {
        log::warn!("generation step {step}: step size halved {halvings} times to keep I + hS positive");
        stats.halvings += halvings;
    }
    let mut cov = g.cov.clone();
    for _ in 0..(1usize << halvings) {
        cov = cov.congruence(&u);
    }
    let mean = g.mean.iter().zip(&v.a).map(|(m, a)| m + h * a).collect();
    Gaussian::new(mean, cov)
}

fn euclidean_step(g: &Gaussian, v: &TangentBW, h: f64, stats: &mut GenerationStats) -> Result<Gaussian> {
    let next = g.cov.as_sym().add(&v.s.scale(h));
    let cov = if min_eigenvalue(&next)? < 0.0 {
        stats.projections += 1;
        psd_project(&next)?
    } else {
        PsdMatrix::new(next.clone()).or_else(|_| psd_project(&next))?
    };
    let mean = g.mean.iter().zip(&v.a).map(|(m, a)| m + h * a).collect();
    Gaussian::new(mean, cov)
}

/// Integrates `field(states, t)` from `inits` over `[0, 1]` in `n_steps`
/// steps of size `1 / n_steps`.
pub fn generate_bw_with<F>(
    mut field: F,
    inits: Vec<Gaussian>,
    n_steps: usize,
    rule: UpdateRule,
    record: bool,
) -> Result<BwGeneration>
where
    F: FnMut(&[Gaussian], f64) -> Result<Vec<TangentBW>>,
{
    if n_steps == 0 {
        return Err(Error::InvalidArgument("generation needs at least one step".into()));
    }
    let h = 1.0 / n_steps as f64;
    let mut stats = GenerationStats::default();
    let mut states = inits;
    let mut traj: Option<Vec<Vec<Gaussian>>> = record.then(|| states.iter().map(|g| vec![g.clone()]).collect());
    for k in 0..n_steps {
        if states.is_empty() {
            break;
        }
        let t = k as f64 * h;
        let vs = field(&states, t)?;
        if vs.len() != states.len() {
            return Err(Error::DimensionMismatch("field returned the wrong number of tangents".into()));
        }
        let mut next = Vec::with_capacity(states.len());
        for (g, v) in states.iter().zip(&vs) {
            check_tangent(v, k)?;
            next.push(match rule {
                UpdateRule::Riemannian => riemannian_step(g, v, h, k, &mut stats)?,
                UpdateRule::Euclidean => euclidean_step(g, v, h, &mut stats)?,
            });
        }
        states = next;
        if let Some(tr) = traj.as_mut() {
            for (path, g) in tr.iter_mut().zip(&states) {
                path.push(g.clone());
            }
        }
    }
    Ok(BwGeneration {
        samples: states,
        trajectories: traj,
        stats,
    })
}

/// Integrates the two-network Gaussian field.
pub fn generate_bw(
    mean_net: &ModelParams,
    cov_net: &ModelParams,
    inits: Vec<Gaussian>,
    n_steps: usize,
    labels: &[Option<usize>],
    rule: UpdateRule,
    record: bool,
) -> Result<BwGeneration> {
    if labels.len() != inits.len() {
        return Err(Error::DimensionMismatch("one label slot per sample".into()));
    }
    let field = |states: &[Gaussian], t: f64| {
        let ts = vec![t; states.len()];
        bw_field_batch(mean_net, cov_net, states, &ts, labels)
    };
    generate_bw_with(field, inits, n_steps, rule, record)
}

#[derive(Clone, Debug)]
pub struct PcGeneration {
    pub sample: PointCloud,
    pub trajectory: Option<Vec<Matrix>>,
}

/// Forward Euler `X ← X + h field(X, kh)` on a whole cloud.
pub fn generate_pc_with<F>(mut field: F, init: PointCloud, n_steps: usize, record: bool) -> Result<PcGeneration>
where
    F: FnMut(&Matrix, f64) -> Result<Matrix>,
{
    if n_steps == 0 {
        return Err(Error::InvalidArgument("generation needs at least one step".into()));
    }
    if init.is_empty() {
        return Err(Error::InvalidArgument("empty initial cloud".into()));
    }
    let h = 1.0 / n_steps as f64;
    let mut x = init.points().clone();
    let mut traj = record.then(|| vec![x.clone()]);
    for k in 0..n_steps {
        let v = field(&x, k as f64 * h)?;
        if v.shape() != x.shape() {
            return Err(Error::DimensionMismatch("field changed the cloud shape".into()));
        }
        if !v.is_finite() {
            return Err(Error::GenerationAbort {
                step: k,
                reason: "field returned a non-finite value".into(),
            });
        }
        x.add_assign_scaled(&v, h);
        if let Some(tr) = traj.as_mut() {
            tr.push(x.clone());
        }
    }
    Ok(PcGeneration {
        sample: init.with_points(x)?,
        trajectory: traj,
    })
}

/// Integrates the transformer field from each initial cloud.
pub fn generate_pc(
    params: &ModelParams,
    inits: Vec<PointCloud>,
    n_steps: usize,
    labels: &[Option<usize>],
    record: bool,
) -> Result<Vec<PcGeneration>> {
    if labels.len() != inits.len() {
        return Err(Error::DimensionMismatch("one label slot per sample".into()));
    }
    inits
        .into_par_iter()
        .zip(labels.par_iter())
        .map(|(init, &cond)| {
            let field = |x: &Matrix, t: f64| {
                let c = PointCloud::uniform(x.clone())?;
                pc_field_forward(params, &c, t, cond)
            };
            generate_pc_with(field, init, n_steps, record)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bw::{bw_distance_sq, bw_log};
    use crate::metrics::chamfer_sq;
    use crate::ot::{exact_ot_small, PointCloud};
    use approx::assert_abs_diff_eq;

    fn g1(m: f64, v: f64) -> Gaussian {
        Gaussian::new(vec![m], PsdMatrix::from_diag(&[v]).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_keeps_init() {
        let init = Gaussian::new(
            vec![0.5, -1.0],
            PsdMatrix::from_matrix(Matrix::from_rows(&[[1.0, 0.2], [0.2, 0.3]])).unwrap(),
        )
        .unwrap();
        let zero = |s: &[Gaussian], _t: f64| Ok(s.iter().map(|g| TangentBW::zero(g.dim())).collect());
        let out = generate_bw_with(zero, vec![init.clone()], 17, UpdateRule::Riemannian, false).unwrap();
        assert_eq!(out.samples[0], init);
    }

    #[test]
    fn constant_field_one_step() {
        let field = |_: &[Gaussian], _t: f64| {
            Ok(vec![TangentBW {
                a: vec![2.0],
                s: SymMatrix::from_diag(&[0.5]),
            }])
        };
        let out = generate_bw_with(field, vec![g1(0.0, 1.0)], 2, UpdateRule::Riemannian, true).unwrap();
        let first = &out.trajectories.unwrap()[0][1];
        assert_abs_diff_eq!(first.mean[0], 1.0);
        assert_abs_diff_eq!(first.cov.as_matrix()[(0, 0)], 1.5625);
    }

    #[test]
    fn exact_field_reaches_target() {
        let target = Gaussian::new(
            vec![2.0, -1.0],
            PsdMatrix::from_matrix(Matrix::from_rows(&[[0.5, 0.1], [0.1, 2.0]])).unwrap(),
        )
        .unwrap();
        let init = Gaussian::new(vec![0.0, 0.0], PsdMatrix::from_diag(&[1.0, 0.2]).unwrap()).unwrap();
        let field = |s: &[Gaussian], t: f64| {
            s.iter()
                .map(|g| Ok(bw_log(g, &target)?.scale(1.0 / (1.0 - t))))
                .collect::<Result<Vec<_>>>()
        };
        let out = generate_bw_with(field, vec![init], 64, UpdateRule::Riemannian, false).unwrap();
        assert!(bw_distance_sq(&out.samples[0], &target).unwrap() <= 1e-3);
        assert_eq!(out.stats.halvings, 0);
    }

    #[test]
    fn indefinite_update_halves_then_aborts() {
        let field = |_: &[Gaussian], _t: f64| {
            Ok(vec![TangentBW {
                a: vec![0.0],
                s: SymMatrix::from_diag(&[-3.0]),
            }])
        };
        // h = 1/2: 1 - 1.5 < 0, one halving gives 1 - 0.75 > 0
        let out = generate_bw_with(field, vec![g1(0.0, 1.0)], 2, UpdateRule::Riemannian, false).unwrap();
        assert_eq!(out.stats.halvings, 2);
        assert!(out.samples[0].cov.as_matrix()[(0, 0)] > 0.0);

        let wild = |_: &[Gaussian], _t: f64| {
            Ok(vec![TangentBW {
                a: vec![0.0],
                s: SymMatrix::from_diag(&[-1e6]),
            }])
        };
        assert!(matches!(
            generate_bw_with(wild, vec![g1(0.0, 1.0)], 1, UpdateRule::Riemannian, false),
            Err(Error::GenerationAbort { step: 0, .. })
        ));
    }

    #[test]
    fn euclidean_rule_projects() {
        let field = |_: &[Gaussian], _t: f64| {
            Ok(vec![TangentBW {
                a: vec![0.0],
                s: SymMatrix::from_diag(&[-3.0]),
            }])
        };
        let out = generate_bw_with(field, vec![g1(0.0, 1.0)], 2, UpdateRule::Euclidean, false).unwrap();
        assert_eq!(out.stats.projections, 2);
        assert_eq!(out.samples[0].cov.as_matrix()[(0, 0)], 0.0);
    }

    #[test]
    fn point_cloud_euler() {
        let init = PointCloud::from_rows(&[[0.0]]).unwrap();
        let unit = |x: &Matrix, _t: f64| Ok(Matrix::filled(x.rows(), 1, 1.0));
        let out = generate_pc_with(unit, init.clone(), 2, false).unwrap();
        assert_eq!(out.sample.points().data(), &[1.0]);
        let zero = |x: &Matrix, _t: f64| Ok(Matrix::zeros(x.rows(), x.cols()));
        assert_eq!(generate_pc_with(zero, init, 5, false).unwrap().sample.points().data(), &[0.0]);
        let bad = |x: &Matrix, _t: f64| Ok(Matrix::filled(x.rows(), 1, f64::NAN));
        assert!(matches!(
            generate_pc_with(bad, PointCloud::from_rows(&[[0.0]]).unwrap(), 3, false),
            Err(Error::GenerationAbort { step: 0, .. })
        ));
    }

    #[test]
    fn true_displacement_field_reaches_paired_cloud() {
        let src = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.5], [-1.0, 2.0], [0.3, -0.7]]).unwrap();
        let dst = PointCloud::from_rows(&[[2.0, 1.0], [0.0, 3.0], [1.5, -1.0], [-0.5, 0.0]]).unwrap();
        let (perm, _) = exact_ot_small(&src, &dst).unwrap();
        let mut y = Matrix::zeros(4, 2);
        for (i, &j) in perm.iter().enumerate() {
            y.row_mut(i).copy_from_slice(dst.points().row(j));
        }
        let field = |x: &Matrix, t: f64| Ok(y.sub(x).scale(1.0 / (1.0 - t)));
        let out = generate_pc_with(field, src, 100, false).unwrap();
        assert!(chamfer_sq(&out.sample, &dst).unwrap() <= 1e-4);
        assert_eq!(out.sample.len(), 4);
    }
}
