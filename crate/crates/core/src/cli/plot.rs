//! Minimal SVG scatter plots.

use std::fmt::Write;

/// One colour of points, optionally with 2x2 covariances drawn as
/// one-standard-deviation ellipses.
#[derive(Clone, Debug)]
pub struct PlotLayer {
    pub name: String,
    pub color: String,
    /// `(x, y, [c_xx, c_xy, c_yy])`.
    pub points: Vec<(f64, f64, Option<[f64; 3]>)>,
}

impl PlotLayer {
    pub fn new(name: &str, color: &str) -> Self {
        PlotLayer {
            name: name.into(),
            color: color.into(),
            points: vec![],
        }
    }

    pub fn push(&mut self, x: f64, y: f64, cov: Option<[f64; 3]>) {
        self.points.push((x, y, cov));
    }
}

/// Ellipse axes of a 2x2 covariance: `(sd_major, sd_minor, angle_deg)`.
fn ellipse([a, b, c]: [f64; 3]) -> (f64, f64, f64) {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c).powi(2) + b * b).sqrt();
    let l1 = (mid + rad).max(0.0);
    let l2 = (mid - rad).max(0.0);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    (l1.sqrt(), l2.sqrt(), angle.to_degrees())
}

/// Square plot with a shared data range; y grows upward.
pub fn render_svg(layers: &[PlotLayer], size: f64) -> String {
    let margin = 0.06 * size;
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for l in layers {
        for &(x, y, cov) in &l.points {
            let (rx, ry) = cov.map_or((0.0, 0.0), |c| (c[0].max(0.0).sqrt(), c[2].max(0.0).sqrt()));
            lo_x = lo_x.min(x - rx);
            hi_x = hi_x.max(x + rx);
            lo_y = lo_y.min(y - ry);
            hi_y = hi_y.max(y + ry);
        }
    }
    if !lo_x.is_finite() {
        (lo_x, hi_x, lo_y, hi_y) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
    let (cx, cy) = (0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
    let scale = (size - 2.0 * margin) / span;
    let sx = |x: f64| size / 2.0 + (x - cx) * scale;
    let sy = |y: f64| size / 2.0 - (y - cy) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, l) in layers.iter().enumerate() {
        let _ = writeln!(s, r#"<g id="{}" fill="{}" stroke="{}">"#, l.name, l.color, l.color);
        for &(x, y, cov) in &l.points {
            let (px, py) = (sx(x), sy(y));
            if let Some(c) = cov {
                let (a, b, deg) = ellipse(c);
                let _ = writeln!(
                    s,
                    r#"<ellipse cx="{px:.2}" cy="{py:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({:.2} {px:.2} {py:.2})" fill="none" stroke-width="1" opacity="0.8"/>"#,
                    a * scale,
                    b * scale,
                    -deg
                );
            }
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2" stroke="none" opacity="0.7"/>"#);
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{}">{}</text>"#,
            margin,
            margin * 0.6 + 14.0 * i as f64,
            l.color,
            l.name
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_axes() {
        let (a, b, deg) = ellipse([4.0, 0.0, 1.0]);
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && deg.abs() < 1e-12);
        let (_, _, deg) = ellipse([1.0, 0.5, 1.0]);
        assert!((deg - 45.0).abs() < 1e-9);
    }

    #[test]
    fn svg_has_one_circle_per_point() {
        let mut l = PlotLayer::new("a", "red");
        l.push(0.0, 0.0, Some([1.0, 0.0, 1.0]));
        l.push(1.0, 2.0, None);
        let svg = render_svg(&[l], 200.0);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<ellipse").count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(render_svg(&[], 100.0).contains("</svg>"));
    }
}
