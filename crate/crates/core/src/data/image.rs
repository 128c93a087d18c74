use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ot::PointCloud;

/// Coordinates of the pixels strictly above `threshold`, at pixel centres in
/// the unit square with `y` pointing up.
pub fn image_to_pointcloud(grid: &Matrix, threshold: f64) -> Result<PointCloud> {
    let (h, w) = grid.shape();
    if h == 0 || w == 0 {
        return Err(Error::InvalidArgument("image has no pixels".into()));
    }
    let mut pts = Vec::new();
    for row in 0..h {
        for col in 0..w {
            if grid[(row, col)] > threshold {
                pts.push((col as f64 + 0.5) / w as f64);
                pts.push(1.0 - (row as f64 + 0.5) / h as f64);
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no pixel exceeds threshold {threshold}"
        )));
    }
    PointCloud::uniform(Matrix::new(pts.len() / 2, 2, pts))
}

/// Plain (P2) PGM to intensities in `[0, 1]`.
pub fn parse_pgm(text: &str, origin: &Path) -> Result<Matrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        tokens.extend(content.split_whitespace().map(|t| (i + 1, t)));
    }
    let mut it = tokens.into_iter();
    match it.next() {
        Some((_, "P2")) => {}
        Some((l, other)) => return Err(err(l, format!("expected plain PGM magic P2, found `{other}`"))),
        None => return Err(err(1, "empty image file".into())),
    }
    let mut num = |what: &str| -> Result<(usize, u64)> {
        let (l, t) = it.next().ok_or_else(|| err(0, format!("missing {what}")))?;
        t.parse::<u64>()
            .map(|v| (l, v))
            .map_err(|_| err(l, format!("bad {what} `{t}`")))
    };
    let (_, w) = num("width")?;
    let (_, h) = num("height")?;
    let (l, maxval) = num("maxval")?;
    if maxval == 0 {
        return Err(err(l, "maxval must be positive".into()));
    }
    let (w, h) = (w as usize, h as usize);
    let mut data = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        let (l, v) = num("pixel")?;
        if v > maxval {
            return Err(err(l, format!("pixel {v} exceeds maxval {maxval}")));
        }
        data.push(v as f64 / maxval as f64);
    }
    Ok(Matrix::new(h, w, data))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dark_image_is_rejected() {
        assert!(image_to_pointcloud(&Matrix::zeros(3, 3), 0.5).is_err());
    }

    #[test]
    fn single_pixel_lands_at_centre() {
        let mut g = Matrix::zeros(2, 2);
        g[(0, 0)] = 1.0;
        let c = image_to_pointcloud(&g, 0.5).unwrap();
        assert_eq!(c.points().data(), &[0.25, 0.75]);
    }

    #[test]
    fn checkerboard_gives_two_points() {
        let g = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(image_to_pointcloud(&g, 0.5).unwrap().len(), 2);
    }

    #[test]
    fn pgm_parsing() {
        let m = parse_pgm("P2\n# tiny\n3 2\n4\n0 4 2\n1 0 0\n", Path::new("t.pgm")).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.row(0), &[0.0, 1.0, 0.5]);
        assert!(parse_pgm("P5\n1 1\n1\n0\n", Path::new("t.pgm")).is_err());
        assert!(parse_pgm("P2\n2 2\n1\n0 1 1\n", Path::new("t.pgm")).is_err());
    }
}
