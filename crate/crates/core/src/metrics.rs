//! Sample-quality metrics for generated Gaussians and point clouds.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bw::{bw_distance_sq, Gaussian};
use crate::error::{Error, Result};
use crate::ot::{cost_matrix, solve_clouds, transport_cost, EpsilonConfig, PointCloud};

/// Mean over `generated` of the smallest squared W₂ to any reference item.
pub fn min_bw_to_dataset(generated: &[Gaussian], reference: &[Gaussian]) -> Result<f64> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument("both sets must be nonempty".into()));
    }
    let mins = generated
        .par_iter()
        .map(|g| {
            reference
                .iter()
                .map(|r| bw_distance_sq(g, r))
                .try_fold(f64::INFINITY, |m, d| d.map(|d| m.min(d)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mins.iter().sum::<f64>() / mins.len() as f64)
}

/// Symmetric Chamfer distance with squared Euclidean costs, each direction
/// averaged over its points.
pub fn chamfer_sq(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Chamfer distance of an empty cloud".into()));
    }
    let cost = cost_matrix(a, b)?;
    let d = cost.as_matrix();
    let (n, m) = d.shape();
    let ab: f64 = (0..n)
        .map(|i| d.row(i).iter().cloned().fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / n as f64;
    let mut col_min = vec![f64::INFINITY; m];
    for i in 0..n {
        for (c, v) in col_min.iter_mut().zip(d.row(i)) {
            *c = c.min(*v);
        }
    }
    let ba = col_min.iter().sum::<f64>() / m as f64;
    Ok(ab + ba)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmdConfig {
    pub epsilon: EpsilonConfig,
    pub iters: usize,
    pub tol: f64,
}

impl Default for EmdConfig {
    fn default() -> Self {
        EmdConfig {
            epsilon: EpsilonConfig::default(),
            iters: 1000,
            tol: 1e-5,
        }
    }
}

/// Transport cost `⟨C, P_ε⟩` of the entropic plan. Up to the marginal
/// error of the solve, this is an upper bound on the exact OT cost.
pub fn emd_sq(a: &PointCloud, b: &PointCloud, cfg: &EmdConfig) -> Result<f64> {
    let (plan, cost) = solve_clouds(a, b, cfg.epsilon, cfg.iters, cfg.tol)?;
    transport_cost(&plan, &cost)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Chamfer,
    Emd,
    Bw,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cd" | "chamfer" => Ok(Metric::Chamfer),
            "emd" => Ok(Metric::Emd),
            "bw" | "w2" => Ok(Metric::Bw),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Chamfer => "cd",
            Metric::Emd => "emd",
            Metric::Bw => "bw",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Samples<'a> {
    Gaussians(&'a [Gaussian]),
    Clouds(&'a [PointCloud]),
}

impl Samples<'_> {
    pub fn len(&self) -> usize {
        match self {
            Samples::Gaussians(g) => g.len(),
            Samples::Clouds(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_kind(metric: Metric, s: &Samples) -> Result<()> {
    match (metric, s) {
        (Metric::Bw, Samples::Gaussians(_)) => Ok(()),
        (Metric::Chamfer | Metric::Emd, Samples::Clouds(_)) => Ok(()),
        _ => Err(Error::InvalidArgument(format!(
            "metric `{}` does not apply to these samples",
            metric.name()
        ))),
    }
}

/// Distances between every item of `a` and every item of `b`.
fn cross_distances(a: Samples, b: Samples, metric: Metric, emd: &EmdConfig) -> Result<Vec<Vec<f64>>> {
    check_kind(metric, &a)?;
    check_kind(metric, &b)?;
    match (a, b) {
        (Samples::Gaussians(x), Samples::Gaussians(y)) => x
            .par_iter()
            .map(|g| y.iter().map(|r| bw_distance_sq(g, r)).collect())
            .collect(),
        (Samples::Clouds(x), Samples::Clouds(y)) => x
            .par_iter()
            .map(|p| {
                y.iter()
                    .map(|q| match metric {
                        Metric::Emd => emd_sq(p, q, emd),
                        _ => chamfer_sq(p, q),
                    })
                    .collect()
            })
            .collect(),
        _ => Err(Error::InvalidArgument("generated and reference sets differ in kind".into())),
    }
}

/// Leave-one-out 1-NN two-sample accuracy on the pooled sets. Ties go to the
/// reference side, then to the lowest index; 0.5 means indistinguishable.
pub fn one_nn_accuracy(generated: Samples, reference: Samples, metric: Metric, emd: &EmdConfig) -> Result<f64> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument("both sets must be nonempty".into()));
    }
    let ng = generated.len();
    let gg = cross_distances(generated, generated, metric, emd)?;
    let gr = cross_distances(generated, reference, metric, emd)?;
    let rr = cross_distances(reference, reference, metric, emd)?;
    let nr = reference.len();
    let total = ng + nr;
    // pooled index: generated first, then reference
    let dist = |i: usize, j: usize| -> f64 {
        match (i < ng, j < ng) {
            (true, true) => gg[i][j],
            (true, false) => gr[i][j - ng],
            (false, true) => gr[j][i - ng],
            (false, false) => rr[i - ng][j - ng],
        }
    };
    let mut correct = 0usize;
    for i in 0..total {
        let mut best: Option<(f64, bool, usize)> = None;
        for j in (0..total).filter(|&j| j != i) {
            let d = dist(i, j);
            let is_ref = j >= ng;
            let better = match best {
                None => true,
                Some((bd, bref, _)) => d < bd || (d == bd && is_ref && !bref),
            };
            if better {
                best = Some((d, is_ref, j));
            }
        }
        if let Some((_, nn_ref, _)) = best {
            if nn_ref == (i >= ng) {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / total as f64)
}

/// Fraction of generated samples whose nearest reference item (lowest
/// index on ties) carries the label they were conditioned on.
pub fn label_accuracy_1nn(
    generated: Samples,
    generated_labels: &[usize],
    reference: Samples,
    reference_labels: &[usize],
    metric: Metric,
    emd: &EmdConfig,
) -> Result<f64> {
    if generated_labels.len() != generated.len() || reference_labels.len() != reference.len() {
        return Err(Error::InvalidArgument("labels are required on both sides".into()));
    }
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument("both sets must be nonempty".into()));
    }
    let d = cross_distances(generated, reference, metric, emd)?;
    let hits = d
        .iter()
        .zip(generated_labels)
        .filter(|(row, &lab)| {
            let mut best = 0;
            for (j, v) in row.iter().enumerate() {
                if *v < row[best] {
                    best = j;
                }
            }
            reference_labels[best] == lab
        })
        .count();
    Ok(hits as f64 / generated.len() as f64)
}

/// One line of a metrics report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: f64,
    pub config: Value,
    pub seed: Option<u64>,
}

pub fn write_report(path: impl AsRef<Path>, records: &[MetricRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let text = serde_json::to_string_pretty(records)?;
    writeln!(f, "{text}").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, PsdMatrix};
    use crate::ot::exact_ot_small;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_cloud(r: &mut ChaCha8Rng, n: usize, shift: f64) -> PointCloud {
        PointCloud::uniform(Matrix::new(n, 2, (0..2 * n).map(|_| r.gen_range(-1.0..1.0) + shift).collect()))
            .unwrap()
    }

    fn rand_gauss(r: &mut ChaCha8Rng) -> Gaussian {
        let a = Matrix::new(2, 2, (0..4).map(|_| r.gen_range(-1.0..1.0)).collect());
        let c = a.matmul(&a.transpose()).add(&Matrix::identity(2).scale(0.1)).symmetrized();
        Gaussian::new(vec![r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)], PsdMatrix::from_matrix(c).unwrap())
            .unwrap()
    }

    #[test]
    fn min_bw_matches_naive_loop() {
        let mut r = ChaCha8Rng::seed_from_u64(0);
        let gen: Vec<Gaussian> = (0..5).map(|_| rand_gauss(&mut r)).collect();
        let refs: Vec<Gaussian> = (0..7).map(|_| rand_gauss(&mut r)).collect();
        assert!(min_bw_to_dataset(&refs, &refs).unwrap() < 1e-12);
        let mut naive = 0.0;
        for g in &gen {
            let mut m = f64::INFINITY;
            for q in &refs {
                m = m.min(bw_distance_sq(g, q).unwrap());
            }
            naive += m / 5.0;
        }
        assert_abs_diff_eq!(min_bw_to_dataset(&gen, &refs).unwrap(), naive, epsilon = 1e-12);
        let one = min_bw_to_dataset(&gen[..1], &refs[..1]).unwrap();
        assert_eq!(one, bw_distance_sq(&gen[0], &refs[0]).unwrap());
    }

    #[test]
    fn chamfer_examples() {
        let a = PointCloud::from_rows(&[[0.0]]).unwrap();
        let b = PointCloud::from_rows(&[[1.0]]).unwrap();
        assert_eq!(chamfer_sq(&a, &b).unwrap(), 2.0);
        assert_eq!(chamfer_sq(&a, &a).unwrap(), 0.0);

        let mut r = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = (rand_cloud(&mut r, 5, 0.0), rand_cloud(&mut r, 7, 0.3));
        let sq = |p: &[f64], q: &[f64]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
        let dir = |u: &PointCloud, v: &PointCloud| {
            let mut s = 0.0;
            for i in 0..u.len() {
                let mut m = f64::INFINITY;
                for j in 0..v.len() {
                    m = m.min(sq(u.points().row(i), v.points().row(j)));
                }
                s += m;
            }
            s / u.len() as f64
        };
        assert_abs_diff_eq!(chamfer_sq(&x, &y).unwrap(), dir(&x, &y) + dir(&y, &x), epsilon = 1e-12);
    }

    #[test]
    fn emd_examples() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let a = rand_cloud(&mut r, 6, 0.0);
        let cost = crate::ot::cost_matrix(&a, &a).unwrap();
        assert!(emd_sq(&a, &a, &EmdConfig::default()).unwrap() < 1e-6 * cost.max());

        let p = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[[1.0, 2.0]]).unwrap();
        assert_abs_diff_eq!(emd_sq(&p, &q, &EmdConfig::default()).unwrap(), 5.0, epsilon = 1e-12);

        let cfg = EmdConfig {
            epsilon: EpsilonConfig::relative(0.01),
            iters: 50_000,
            tol: 1e-9,
        };
        for _ in 0..10 {
            let (x, y) = (rand_cloud(&mut r, 6, 0.0), rand_cloud(&mut r, 6, 0.5));
            let (_, exact) = exact_ot_small(&x, &y).unwrap();
            let e = emd_sq(&x, &y, &cfg).unwrap();
            assert!(e >= exact * (1.0 - 1e-4) && e <= 1.1 * exact, "{e} vs {exact}");
        }
    }

    #[test]
    fn one_nn_extremes() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let refs: Vec<PointCloud> = (0..5).map(|_| rand_cloud(&mut r, 4, 0.0)).collect();
        let far: Vec<PointCloud> = (0..5).map(|_| rand_cloud(&mut r, 4, 100.0)).collect();
        let cfg = EmdConfig::default();
        let acc = one_nn_accuracy(Samples::Clouds(&far), Samples::Clouds(&refs), Metric::Chamfer, &cfg).unwrap();
        assert_eq!(acc, 1.0);
        let dup = one_nn_accuracy(Samples::Clouds(&refs), Samples::Clouds(&refs), Metric::Chamfer, &cfg).unwrap();
        assert_eq!(dup, 0.0);
        let g: Vec<Gaussian> = (0..3).map(|_| rand_gauss(&mut r)).collect();
        assert!(one_nn_accuracy(Samples::Gaussians(&g), Samples::Gaussians(&g), Metric::Emd, &cfg).is_err());
        assert_eq!(
            one_nn_accuracy(Samples::Gaussians(&g), Samples::Gaussians(&g), Metric::Bw, &cfg).unwrap(),
            0.0
        );
    }

    #[test]
    fn one_nn_matches_brute_force() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let gen: Vec<Gaussian> = (0..4).map(|_| rand_gauss(&mut r)).collect();
        let refs: Vec<Gaussian> = (0..5).map(|_| rand_gauss(&mut r)).collect();
        let pool: Vec<(&Gaussian, bool)> = gen.iter().map(|g| (g, false)).chain(refs.iter().map(|g| (g, true))).collect();
        let mut correct = 0;
        for (i, (a, ai)) in pool.iter().enumerate() {
            let mut best = (f64::INFINITY, false);
            for (j, (b, bj)) in pool.iter().enumerate() {
                if i != j {
                    let d = bw_distance_sq(a, b).unwrap();
                    if d < best.0 {
                        best = (d, *bj);
                    }
                }
            }
            if best.1 == *ai {
                correct += 1;
            }
        }
        let acc = one_nn_accuracy(Samples::Gaussians(&gen), Samples::Gaussians(&refs), Metric::Bw, &EmdConfig::default())
            .unwrap();
        assert_abs_diff_eq!(acc, correct as f64 / 9.0);
    }

    #[test]
    fn label_accuracy_cases() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let refs: Vec<Gaussian> = (0..4).map(|_| rand_gauss(&mut r)).collect();
        let labels = [0, 1, 0, 1];
        let cfg = EmdConfig::default();
        let acc = label_accuracy_1nn(
            Samples::Gaussians(&refs),
            &labels,
            Samples::Gaussians(&refs),
            &labels,
            Metric::Bw,
            &cfg,
        )
        .unwrap();
        assert_eq!(acc, 1.0);
        // equidistant from two references: the lower index wins
        let a = PointCloud::from_rows(&[[-1.0]]).unwrap();
        let b = PointCloud::from_rows(&[[1.0]]).unwrap();
        let mid = PointCloud::from_rows(&[[0.0]]).unwrap();
        let acc = label_accuracy_1nn(
            Samples::Clouds(std::slice::from_ref(&mid)),
            &[7],
            Samples::Clouds(&[a, b]),
            &[7, 8],
            Metric::Chamfer,
            &cfg,
        )
        .unwrap();
        assert_eq!(acc, 1.0);
        assert!(label_accuracy_1nn(Samples::Gaussians(&refs), &[], Samples::Gaussians(&refs), &labels, Metric::Bw, &cfg).is_err());
    }
}
