//! Deterministic SVG rendering of planar sets.

use std::fmt::Write as _;
use std::path::Path;

use impulse_attain::geometry::PlanarSet;
use impulse_attain::{Error, Rat, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SvgStyle {
    pub width: u32,
    pub height: u32,
    pub stroke: String,
    pub fill: String,
    pub point_radius: f64,
    /// Vertices per arc.
    pub arc_samples: usize,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            width: 480,
            height: 480,
            stroke: "#1f4e8c".into(),
            fill: "#9fbfe6".into(),
            point_radius: 3.0,
            arc_samples: 64,
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
    w: f64,
    h: f64,
}

impl Frame {
    fn fit(set: &PlanarSet<f64>, arcs: &[Vec<[f64; 2]>], style: &SvgStyle) -> Frame {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut push = |p: &[f64]| {
            xs.push(p[0]);
            ys.push(p[1]);
        };
        set.points.iter().for_each(|p| push(p));
        set.segments.iter().flatten().for_each(|p| push(p));
        set.polygons.iter().flatten().for_each(|p| push(p));
        arcs.iter().flatten().for_each(|p| push(p));
        let range = |v: &[f64]| -> (f64, f64) {
            if v.is_empty() {
                return (-1.0, 1.0);
            }
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (mut x, mut y) = (range(&xs), range(&ys));
        let span = (x.1 - x.0).max(y.1 - y.0).max(1e-9);
        for r in [&mut x, &mut y] {
            if r.1 - r.0 < 1e-9 * span.max(1.0) {
                // flat direction: give it the other extent so the figure stays visible
                r.0 -= span / 2.0;
                r.1 += span / 2.0;
            }
            let margin = 0.05 * (r.1 - r.0);
            r.0 -= margin;
            r.1 += margin;
        }
        Frame { x, y, w: style.width as f64, h: style.height as f64 }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        let px = (p[0] - self.x.0) / (self.x.1 - self.x.0) * self.w;
        let py = (self.y.1 - p[1]) / (self.y.1 - self.y.0) * self.h;
        (px, py)
    }

    fn coords(&self, pts: &[[f64; 2]]) -> String {
        pts.iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn sample_arc(arc: &impulse_attain::geometry::Arc<f64>, samples: usize) -> Vec<[f64; 2]> {
    let (a, b) = (&arc.param.0, &arc.param.1);
    let n = samples.max(1) as i64;
    (0..=n)
        .map(|k| {
            let t = a + &((b - a) * Rat::new(k, n));
            let p = arc.point_at(&t);
            [p[0], p.get(1).copied().unwrap_or(0.0)]
        })
        .collect()
}

/// Renders a planar set: polygons as filled paths, segments and arcs as
/// polylines, points as circles, with coordinate axes.
pub fn render_svg(set: &PlanarSet<f64>, style: &SvgStyle) -> String {
    let arcs: Vec<Vec<[f64; 2]>> = set.arcs.iter().map(|a| sample_arc(a, style.arc_samples)).collect();
    let frame = Frame::fit(set, &arcs, style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        style.width, style.height
    );
    // axes through the origin, clamped to the frame
    let ax = 0.0f64.clamp(frame.x.0, frame.x.1);
    let ay = 0.0f64.clamp(frame.y.0, frame.y.1);
    let (x0, y_axis) = frame.map(&[frame.x.0, ay]);
    let (x1, _) = frame.map(&[frame.x.1, ay]);
    let (x_axis, y0) = frame.map(&[ax, frame.y.1]);
    let (_, y1) = frame.map(&[ax, frame.y.0]);
    let _ = writeln!(
        out,
        r##"<line x1="{x0:.3}" y1="{y_axis:.3}" x2="{x1:.3}" y2="{y_axis:.3}" stroke="#888888" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r##"<line x1="{x_axis:.3}" y1="{y0:.3}" x2="{x_axis:.3}" y2="{y1:.3}" stroke="#888888" stroke-width="1"/>"##
    );
    for poly in &set.polygons {
        let pts: Vec<[f64; 2]> = poly.iter().map(|p| [p[0], p[1]]).collect();
        let d = pts
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let (x, y) = frame.map(p);
                format!("{}{x:.3} {y:.3}", if k == 0 { "M" } else { "L" })
            })
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            r#"<path d="{d} Z" fill="{}" fill-opacity="0.6" stroke="{}" stroke-width="1.5"/>"#,
            style.fill, style.stroke
        );
    }
    let polyline = |out: &mut String, pts: &[[f64; 2]]| {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            frame.coords(pts),
            style.stroke
        );
    };
    for [a, b] in &set.segments {
        polyline(&mut out, &[[a[0], a[1]], [b[0], b[1]]]);
    }
    for pts in &arcs {
        polyline(&mut out, pts);
    }
    for p in &set.points {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{}" fill="{}"/>"#,
            style.point_radius, style.stroke
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(set: &PlanarSet<f64>, style: &SvgStyle, path: &Path) -> Result<()> {
    if set.points.iter().chain(set.segments.iter().flatten()).any(|p| p.len() != 2) {
        return Err(Error::Invalid("only planar sets can be drawn".into()));
    }
    std::fs::write(path, render_svg(set, style))
        .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use impulse_attain::geometry::Arc;
    use impulse_attain::Poly;

    fn count(svg: &str, tag: &str) -> usize {
        svg.matches(&format!("<{tag} ")).count()
    }

    #[test]
    fn empty_set_draws_axes_only() {
        let svg = render_svg(&PlanarSet::empty(), &SvgStyle::default());
        assert_eq!(count(&svg, "line"), 2);
        assert_eq!(count(&svg, "polyline") + count(&svg, "path") + count(&svg, "circle"), 0);
    }

    #[test]
    fn single_segment_is_two_vertex_polyline() {
        let mut set = PlanarSet::empty();
        set.segments.push([vec![0.0, 0.0], vec![1.0, 1.0]]);
        let svg = render_svg(&set, &SvgStyle::default());
        assert_eq!(count(&svg, "polyline"), 1);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let points = line.split('"').nth(1).unwrap();
        assert_eq!(points.split(' ').count(), 2);
        // 5% margin on both ends of a unit extent
        assert_eq!(points, "21.818,458.182 458.182,21.818");
    }

    #[test]
    fn arcs_and_points() {
        let mut set = PlanarSet::empty();
        set.arcs.push(Arc {
            param: (Rat::zero(), Rat::new(1, 2)),
            coeffs: vec![Poly::new(vec![1.0, -1.0]), Poly::constant(1.0)],
        });
        set.points.push(vec![1.0, 1.0]);
        let style = SvgStyle { arc_samples: 8, ..SvgStyle::default() };
        let svg = render_svg(&set, &style);
        assert_eq!(count(&svg, "circle"), 1);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.split('"').nth(1).unwrap().split(' ').count(), 9);
        assert_eq!(svg, render_svg(&set, &style));
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let path = Path::new("/nonexistent-dir/out.svg");
        assert!(write_svg(&PlanarSet::empty(), &SvgStyle::default(), path).is_err());
    }
}
