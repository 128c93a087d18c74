//! JSON-lines dataset files.
//!
//! Line 1 is a header `{"kind", "dim", "version", "metadata", "count"}`;
//! every following line is one record.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bw::Gaussian;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, PsdMatrix, SymMatrix};
use crate::ot::PointCloud;

use super::{Dataset, GaussianDataset, PointCloudDataset};

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    kind: String,
    dim: usize,
    version: u32,
    #[serde(default)]
    metadata: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRecord {
    mean: Vec<f64>,
    cov_lower: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudRecord {
    points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
}

/// Serializes a dataset to JSON lines.
pub fn write_dataset(dataset: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    let (dim, metadata) = match dataset {
        Dataset::Gaussians(d) => (d.dim, &d.metadata),
        Dataset::PointClouds(d) => (d.dim, &d.metadata),
    };
    let header = Header {
        kind: dataset.kind().to_string(),
        dim,
        version: DATASET_FORMAT_VERSION,
        metadata: metadata.clone(),
        count: Some(dataset.len()),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    match dataset {
        Dataset::Gaussians(d) => {
            for (i, g) in d.items.iter().enumerate() {
                let rec = GaussianRecord {
                    mean: g.mean.clone(),
                    cov_lower: g.cov.as_sym().to_lower(),
                    label: d.label(i),
                };
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
            }
        }
        Dataset::PointClouds(d) => {
            for (i, c) in d.items.iter().enumerate() {
                let rec = CloudRecord {
                    points: (0..c.len()).map(|r| c.points().row(r).to_vec()).collect(),
                    weights: (!c.is_uniform()).then(|| c.weights().to_vec()),
                    label: d.label(i),
                };
                writeln!(out, "{}", serde_json::to_string(&rec)?)?;
            }
        }
    }
    Ok(())
}

pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_dataset(dataset, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), path)
}

/// Parses JSON lines; `origin` only labels error messages.
pub fn read_dataset(reader: impl BufRead, origin: &Path) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate();
    let header: Header = match lines.next() {
        Some((_, l)) => {
            let l = l.map_err(|e| Error::io(origin, e))?;
            serde_json::from_str(&l).map_err(|e| parse_err(1, format!("bad header: {e}")))?
        }
        None => return Err(parse_err(1, "empty file, expected a header".into())),
    };
    if header.version != DATASET_FORMAT_VERSION {
        return Err(parse_err(
            1,
            format!(
                "format version {} is not supported (expected {DATASET_FORMAT_VERSION})",
                header.version
            ),
        ));
    }
    let dim = header.dim;
    let mut gaussians = Vec::new();
    let mut clouds = Vec::new();
    let mut labels = Vec::new();
    let mut last_line = 1;
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        last_line = lineno;
        match header.kind.as_str() {
            "gaussian" => {
                let rec: GaussianRecord =
                    serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
                if rec.mean.len() != dim {
                    return Err(parse_err(
                        lineno,
                        format!("mean has length {}, header says dim {dim}", rec.mean.len()),
                    ));
                }
                if rec.cov_lower.len() != dim * (dim + 1) / 2 {
                    return Err(parse_err(
                        lineno,
                        format!("cov_lower has {} entries, expected {}", rec.cov_lower.len(), dim * (dim + 1) / 2),
                    ));
                }
                let cov = SymMatrix::from_lower(&rec.cov_lower)
                    .and_then(PsdMatrix::new)
                    .map_err(|e| parse_err(lineno, e.to_string()))?;
                let g = Gaussian::new(rec.mean, cov).map_err(|e| parse_err(lineno, e.to_string()))?;
                gaussians.push(g);
                labels.push(rec.label);
            }
            "pointcloud" => {
                let rec: CloudRecord =
                    serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
                if let Some(p) = rec.points.iter().find(|p| p.len() != dim) {
                    return Err(parse_err(
                        lineno,
                        format!("point of dimension {}, header says dim {dim}", p.len()),
                    ));
                }
                let n = rec.points.len();
                let pts = Matrix::new(n, dim, rec.points.into_iter().flatten().collect());
                let cloud = match rec.weights {
                    Some(w) => PointCloud::new(pts, w),
                    None => PointCloud::uniform(pts),
                }
                .map_err(|e| parse_err(lineno, e.to_string()))?;
                clouds.push(cloud);
                labels.push(rec.label);
            }
            other => return Err(parse_err(1, format!("unknown dataset kind `{other}`"))),
        }
    }
    let n = labels.len();
    if let Some(count) = header.count {
        if count != n {
            return Err(parse_err(
                last_line + 1,
                format!("header announces {count} records but the file ends after {n}"),
            ));
        }
    }
    let labels = if labels.iter().all(Option::is_some) && n > 0 {
        Some(labels.into_iter().map(|l| l.expect("checked")).collect())
    } else if labels.iter().all(Option::is_none) {
        None
    } else {
        let first = labels.iter().position(Option::is_none).expect("mixed") + 2;
        return Err(parse_err(first, "labels must be given on every record or on none".into()));
    };
    Ok(match header.kind.as_str() {
        "gaussian" => Dataset::Gaussians(GaussianDataset::with_dim(dim, gaussians, labels, header.metadata)?),
        _ => Dataset::PointClouds(PointCloudDataset::with_dim(dim, clouds, labels, header.metadata)?),
    })
}
