//! Turn a grayscale PGM image into a point cloud and write it as a dataset.
//! Without a path, or with `-`, a small ring is drawn in memory.
//!
//! ```text
//! cargo run --release --example image_to_pointcloud -- [image.pgm] [threshold] [out.jsonl]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use wfm::data::{image_to_pointcloud, parse_pgm, read_pgm, save_dataset, Dataset, PointCloudDataset};

fn ring_pgm(size: usize) -> String {
    let mut text = format!("P2\n{size} {size}\n255\n");
    let c = (size as f64 - 1.0) / 2.0;
    for row in 0..size {
        for col in 0..size {
            let r = ((row as f64 - c).powi(2) + (col as f64 - c).powi(2)).sqrt() / c;
            let v = (255.0 * (-(r - 0.7).powi(2) / 0.01).exp()).round() as u32;
            write!(text, "{v} ").unwrap();
        }
        text.push('\n');
    }
    text
}

fn main() -> wfm::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().filter(|p| p != "-");
    let threshold = args.next().map_or(0.5, |s| s.parse().expect("threshold"));
    let out = args.next();

    let grid = match &path {
        Some(p) => read_pgm(p)?,
        None => parse_pgm(&ring_pgm(20), Path::new("<ring>"))?,
    };
    let (h, w) = grid.shape();
    for row in 0..h {
        let line: String = (0..w).map(|col| if grid[(row, col)] > threshold { '#' } else { '.' }).collect();
        println!("{line}");
    }

    let cloud = image_to_pointcloud(&grid, threshold)?;
    println!("{} pixels above {threshold} out of {}", cloud.len(), h * w);
    let pts = cloud.points();
    let centre: Vec<f64> = (0..2).map(|j| (0..pts.rows()).map(|i| pts[(i, j)]).sum::<f64>() / pts.rows() as f64).collect();
    println!("centroid ({:.3}, {:.3})", centre[0], centre[1]);

    if let Some(out) = out {
        let data = PointCloudDataset::new(vec![cloud], Some(vec![0]), serde_json::json!({ "source": path }))?;
        save_dataset(&out, &Dataset::PointClouds(data))?;
        println!("wrote {out}");
    }
    Ok(())
}
