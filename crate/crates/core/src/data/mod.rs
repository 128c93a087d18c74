//! Datasets of Gaussians and point clouds, their JSON-lines format,
//! synthetic generators, image ingestion and splitting.

mod image;
mod io;
mod synth;

use rand::seq::SliceRandom;
use serde_json::Value;

use crate::bw::Gaussian;
use crate::error::{Error, Result};
use crate::ot::PointCloud;
use crate::rng;

pub use image::{image_to_pointcloud, parse_pgm, read_pgm};
pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, DATASET_FORMAT_VERSION};
pub use synth::{
    make_moons_gaussians, make_shape_pointclouds, make_shapes, make_sphere_gaussians,
    make_spiral_gaussians, ShapeFamily, SPIRAL_NORMAL_VAR, SPIRAL_TANGENT_VAR,
};

fn check_labels(n: usize, labels: &Option<Vec<usize>>) -> Result<()> {
    match labels {
        Some(l) if l.len() != n => Err(Error::DimensionMismatch(format!(
            "{} labels for {n} items",
            l.len()
        ))),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDataset {
    pub items: Vec<Gaussian>,
    pub labels: Option<Vec<usize>>,
    pub dim: usize,
    pub metadata: Value,
}

impl GaussianDataset {
    pub fn new(items: Vec<Gaussian>, labels: Option<Vec<usize>>, metadata: Value) -> Result<Self> {
        let dim = items
            .first()
            .map(|g| g.dim())
            .ok_or_else(|| Error::InvalidArgument("dataset has no items; use `empty`".into()))?;
        Self::with_dim(dim, items, labels, metadata)
    }

    pub fn empty(dim: usize, metadata: Value) -> Self {
        GaussianDataset {
            items: vec![],
            labels: None,
            dim,
            metadata,
        }
    }

    pub fn with_dim(dim: usize, items: Vec<Gaussian>, labels: Option<Vec<usize>>, metadata: Value) -> Result<Self> {
        if let Some(g) = items.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "dataset of dimension {dim} holds a Gaussian of dimension {}",
                g.dim()
            )));
        }
        check_labels(items.len(), &labels)?;
        Ok(GaussianDataset {
            items,
            labels,
            dim,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        GaussianDataset {
            items: idx.iter().map(|&i| self.items[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            dim: self.dim,
            metadata: self.metadata.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloudDataset {
    pub items: Vec<PointCloud>,
    pub labels: Option<Vec<usize>>,
    pub dim: usize,
    pub metadata: Value,
}

impl PointCloudDataset {
    pub fn new(items: Vec<PointCloud>, labels: Option<Vec<usize>>, metadata: Value) -> Result<Self> {
        let dim = items
            .first()
            .map(|c| c.dim())
            .ok_or_else(|| Error::InvalidArgument("dataset has no items; use `empty`".into()))?;
        Self::with_dim(dim, items, labels, metadata)
    }

    pub fn empty(dim: usize, metadata: Value) -> Self {
        PointCloudDataset {
            items: vec![],
            labels: None,
            dim,
            metadata,
        }
    }

    pub fn with_dim(dim: usize, items: Vec<PointCloud>, labels: Option<Vec<usize>>, metadata: Value) -> Result<Self> {
        if let Some(c) = items.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "dataset of dimension {dim} holds a cloud of dimension {}",
                c.dim()
            )));
        }
        check_labels(items.len(), &labels)?;
        Ok(PointCloudDataset {
            items,
            labels,
            dim,
            metadata,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// True when every cloud has the same number of points.
    pub fn uniform_size(&self) -> bool {
        self.items.windows(2).all(|w| w[0].len() == w[1].len())
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        PointCloudDataset {
            items: idx.iter().map(|&i| self.items[i].clone()).collect(),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            dim: self.dim,
            metadata: self.metadata.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Gaussians(GaussianDataset),
    PointClouds(PointCloudDataset),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Gaussians(d) => d.len(),
            Dataset::PointClouds(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Dataset::Gaussians(_) => "gaussian",
            Dataset::PointClouds(_) => "pointcloud",
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match self {
            Dataset::Gaussians(d) => d.labels.as_deref(),
            Dataset::PointClouds(d) => d.labels.as_deref(),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        match self {
            Dataset::Gaussians(d) => Dataset::Gaussians(d.subset(idx)),
            Dataset::PointClouds(d) => Dataset::PointClouds(d.subset(idx)),
        }
    }
}

/// Seeded train/test split, stratified by label when labels are present.
/// Both sides keep the original item order.
pub fn split_indices(
    n: usize,
    labels: Option<&[usize]>,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    let mut groups: Vec<Vec<usize>> = match labels {
        Some(l) => {
            let max = l.iter().copied().max().unwrap_or(0);
            let mut g = vec![Vec::new(); max + 1];
            for (i, &lab) in l.iter().enumerate() {
                g[lab].push(i);
            }
            g
        }
        None => vec![(0..n).collect()],
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (gi, group) in groups.iter_mut().enumerate() {
        let mut r = rng::stream(seed, rng::domain::SPLIT, gi as u64, 0);
        group.shuffle(&mut r);
        let k = (test_fraction * group.len() as f64).round() as usize;
        test.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "splitting {n} items at fraction {test_fraction} leaves one side empty"
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (tr, te) = split_indices(dataset.len(), dataset.labels(), test_fraction, seed)?;
    Ok((dataset.subset(&tr), dataset.subset(&te)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_halves_ten_items() {
        let (a, b) = split_indices(10, None, 0.5, 3).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(split_indices(10, None, 0.5, 3).unwrap(), (a, b));
    }

    #[test]
    fn split_is_stratified() {
        let labels: Vec<usize> = (0..30).map(|i| if i < 20 { 0 } else { 1 }).collect();
        let (_, test) = split_indices(30, Some(&labels), 0.3, 1).unwrap();
        let ones = test.iter().filter(|&&i| labels[i] == 1).count();
        let zeros = test.len() - ones;
        assert!((zeros as i64 - 6).abs() <= 1 && (ones as i64 - 3).abs() <= 1);
    }

    #[test]
    fn split_rejects_empty_side() {
        assert!(split_indices(1, None, 0.5, 0).is_err());
        assert!(split_indices(10, None, 0.0, 0).is_err());
        assert!(split_indices(10, None, 0.01, 0).is_err());
    }
}
