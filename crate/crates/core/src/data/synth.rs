use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bw::Gaussian;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, PsdMatrix};
use crate::ot::PointCloud;
use crate::rng;

use super::{GaussianDataset, PointCloudDataset};

/// Variance along the curve direction for the synthetic Gaussian datasets.
pub const SPIRAL_TANGENT_VAR: f64 = 0.02;
/// Variance across the curve.
pub const SPIRAL_NORMAL_VAR: f64 = 0.005;

fn normal(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

/// 2D covariance with eigenvalues `(tangent, normal)` and major axis at angle `phi`.
fn oriented_cov(phi: f64, tangent: f64, normal: f64) -> PsdMatrix {
    let (s, c) = phi.sin_cos();
    let r = Matrix::from_rows(&[[c, -s], [s, c]]);
    let m = r.matmul(&Matrix::from_diag(&[tangent, normal])).matmul(&r.transpose());
    PsdMatrix::from_matrix(m.symmetrized()).expect("rotation of a PSD diagonal")
}

/// Gaussians along the Archimedean spiral `r = 0.5 + 1.5 θ / (3π)`,
/// `θ` evenly spaced on `[0, 3π]`, each stretched along the curve.
/// `noise` jitters means (absolute) and the axis angle (radians).
pub fn make_spiral_gaussians(count: usize, noise: f64, seed: u64) -> Result<GaussianDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("spiral needs at least one Gaussian".into()));
    }
    let theta_max = 3.0 * PI;
    let mut items = Vec::with_capacity(count);
    for k in 0..count {
        let mut r = rng::stream(seed, rng::domain::DATASET, 1, k as u64);
        let theta = if count == 1 {
            0.0
        } else {
            theta_max * k as f64 / (count - 1) as f64
        };
        let radius = 0.5 + 1.5 * theta / theta_max;
        let dr = 1.5 / theta_max;
        let (s, c) = theta.sin_cos();
        let tangent = [dr * c - radius * s, dr * s + radius * c];
        let mut phi = tangent[1].atan2(tangent[0]);
        let mut mean = vec![radius * c, radius * s];
        if noise > 0.0 {
            mean[0] += noise * normal(&mut r);
            mean[1] += noise * normal(&mut r);
            phi += noise * normal(&mut r);
        }
        items.push(Gaussian::new(mean, oriented_cov(phi, SPIRAL_TANGENT_VAR, SPIRAL_NORMAL_VAR))?);
    }
    GaussianDataset::new(
        items,
        None,
        json!({"generator": "spiral", "count": count, "noise": noise, "seed": seed}),
    )
}

/// Two interleaved half circles; the first half of the items is label 0.
pub fn make_moons_gaussians(count: usize, noise: f64, seed: u64) -> Result<GaussianDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("moons need at least one Gaussian".into()));
    }
    let upper = count.div_ceil(2);
    let mut items = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for k in 0..count {
        let mut r = rng::stream(seed, rng::domain::DATASET, 2, k as u64);
        let theta = r.gen_range(0.0..PI);
        let (s, c) = theta.sin_cos();
        let (mut mean, phi, label) = if k < upper {
            (vec![c, s], theta + PI / 2.0, 0)
        } else {
            (vec![1.0 - c, 0.5 - s], theta + PI / 2.0, 1)
        };
        if noise > 0.0 {
            mean[0] += noise * normal(&mut r);
            mean[1] += noise * normal(&mut r);
        }
        items.push(Gaussian::new(mean, oriented_cov(phi, SPIRAL_TANGENT_VAR, SPIRAL_NORMAL_VAR))?);
        labels.push(label);
    }
    GaussianDataset::new(
        items,
        Some(labels),
        json!({"generator": "moons", "count": count, "noise": noise, "seed": seed}),
    )
}

/// Means uniform on the unit sphere in 3D, covariance flat along the
/// tangent plane. `noise` pushes means off the sphere.
pub fn make_sphere_gaussians(count: usize, noise: f64, seed: u64) -> Result<GaussianDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("sphere needs at least one Gaussian".into()));
    }
    let mut items = Vec::with_capacity(count);
    for k in 0..count {
        let mut r = rng::stream(seed, rng::domain::DATASET, 3, k as u64);
        let mut n = [0.0; 3];
        loop {
            n.iter_mut().for_each(|v| *v = normal(&mut r));
            let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len > 1e-8 {
                n.iter_mut().for_each(|v| *v /= len);
                break;
            }
        }
        let mut cov = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let nn = n[i] * n[j];
                let id = if i == j { 1.0 } else { 0.0 };
                cov[(i, j)] = SPIRAL_TANGENT_VAR * (id - nn) + SPIRAL_NORMAL_VAR * nn;
            }
        }
        let mut mean = n.to_vec();
        if noise > 0.0 {
            mean.iter_mut().for_each(|v| *v += noise * normal(&mut r));
        }
        items.push(Gaussian::new(mean, PsdMatrix::from_matrix(cov)?)?);
    }
    GaussianDataset::new(
        items,
        None,
        json!({"generator": "sphere", "count": count, "noise": noise, "seed": seed}),
    )
}

/// 2D outlines used for the point-cloud experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeFamily {
    Ring,
    Cross,
    Box,
}

impl ShapeFamily {
    pub fn label(self) -> usize {
        match self {
            ShapeFamily::Ring => 0,
            ShapeFamily::Cross => 1,
            ShapeFamily::Box => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeFamily::Ring => "ring",
            ShapeFamily::Cross => "cross",
            ShapeFamily::Box => "box",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(ShapeFamily::Ring),
            "cross" => Ok(ShapeFamily::Cross),
            "box" => Ok(ShapeFamily::Box),
            _ => Err(Error::InvalidArgument(format!("unknown shape family `{s}`"))),
        }
    }

    /// Point on the outline for a uniform `u ∈ [0, 1)`.
    fn point(self, u: f64) -> [f64; 2] {
        match self {
            ShapeFamily::Ring => {
                let (s, c) = (2.0 * PI * u).sin_cos();
                [c, s]
            }
            ShapeFamily::Cross => {
                let v = 4.0 * u;
                if v < 2.0 {
                    [v - 1.0, 0.0]
                } else {
                    [0.0, v - 3.0]
                }
            }
            ShapeFamily::Box => {
                let v = 8.0 * u;
                let side = (v / 2.0).floor().min(3.0);
                let s = v - 2.0 * side - 1.0;
                match side as u8 {
                    0 => [s, -1.0],
                    1 => [1.0, s],
                    2 => [-s, 1.0],
                    _ => [-1.0, -s],
                }
            }
        }
    }
}

fn shape_cloud(family: ShapeFamily, n: usize, jitter: f64, r: &mut impl Rng) -> Result<PointCloud> {
    let mut pts = Matrix::zeros(n, 2);
    for i in 0..n {
        let p = family.point(r.gen::<f64>());
        for (c, v) in p.iter().enumerate() {
            pts[(i, c)] = v + if jitter > 0.0 { jitter * normal(r) } else { 0.0 };
        }
    }
    PointCloud::uniform(pts)
}

/// `count` clouds of one family, sizes uniform on `[min_points, max_points]`.
pub fn make_shape_pointclouds(
    family: ShapeFamily,
    count: usize,
    points: (usize, usize),
    jitter: f64,
    seed: u64,
) -> Result<PointCloudDataset> {
    make_shapes(&[family], count, points, jitter, seed)
}

/// `count` clouds cycling through `families`, labelled by family.
pub fn make_shapes(
    families: &[ShapeFamily],
    count: usize,
    points: (usize, usize),
    jitter: f64,
    seed: u64,
) -> Result<PointCloudDataset> {
    let (lo, hi) = points;
    if count == 0 || families.is_empty() {
        return Err(Error::InvalidArgument("need at least one cloud and one family".into()));
    }
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("bad point range [{lo}, {hi}]")));
    }
    let mut items = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for k in 0..count {
        let family = families[k % families.len()];
        let mut r = rng::stream(seed, rng::domain::DATASET, 4, k as u64);
        let n = r.gen_range(lo..=hi);
        items.push(shape_cloud(family, n, jitter, &mut r)?);
        labels.push(family.label());
    }
    let names: Vec<&str> = families.iter().map(|f| f.name()).collect();
    PointCloudDataset::new(
        items,
        Some(labels),
        json!({"generator": "shapes", "families": names, "count": count,
               "min_points": lo, "max_points": hi, "jitter": jitter, "seed": seed}),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eig;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_spiral_gaussian_sits_at_start() {
        let ds = make_spiral_gaussians(1, 0.0, 0).unwrap();
        let g = &ds.items[0];
        assert_abs_diff_eq!(g.mean[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.mean[1], 0.0, epsilon = 1e-15);
        // at θ = 0 the tangent is (r', r) = (1/(2π), 1/2)
        let phi = (0.5f64).atan2(0.5 / PI);
        let expect = oriented_cov(phi, 0.02, 0.005);
        for (a, b) in g.cov.as_matrix().data().iter().zip(expect.as_matrix().data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn noiseless_covariances_have_pinned_spectrum() {
        for ds in [
            make_spiral_gaussians(16, 0.0, 7).unwrap(),
            make_moons_gaussians(10, 0.0, 7).unwrap(),
        ] {
            for g in &ds.items {
                let e = sym_eig(g.cov.as_sym()).unwrap();
                assert_abs_diff_eq!(e.values[0], 0.02, epsilon = 1e-12);
                assert_abs_diff_eq!(e.values[1], 0.005, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sphere_means_are_unit() {
        let ds = make_sphere_gaussians(20, 0.0, 1).unwrap();
        for g in &ds.items {
            let n: f64 = g.mean.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn moons_labels_split_evenly() {
        let ds = make_moons_gaussians(10, 0.1, 2).unwrap();
        let l = ds.labels.unwrap();
        assert_eq!(l.iter().filter(|&&x| x == 0).count(), 5);
        assert!(l.iter().all(|&x| x <= 1));
    }

    #[test]
    fn shapes_respect_sizes_and_outline() {
        let ring = make_shape_pointclouds(ShapeFamily::Ring, 5, (50, 100), 0.0, 3).unwrap();
        for c in &ring.items {
            assert!((50..=100).contains(&c.len()));
            for i in 0..c.len() {
                let p = c.points().row(i);
                assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() <= 1e-12);
            }
        }
        let mixed = make_shapes(&[ShapeFamily::Cross, ShapeFamily::Box], 4, (3, 3), 0.0, 0).unwrap();
        assert_eq!(mixed.labels, Some(vec![1, 2, 1, 2]));
        for i in 0..3 {
            let p = mixed.items[1].points().row(i);
            assert!(p[0].abs().max(p[1].abs()) > 1.0 - 1e-12);
        }
    }
}
