//! Plot of an HN polygon in the charge plane.

use std::fmt::Write;

use stabkit_core::hn::HnPolygon;
use stabkit_core::rational::{rat, to_f64};
use stabkit_core::QComplex;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

fn hull(points: &[QComplex]) -> Vec<QComplex> {
    let mut pts: Vec<QComplex> = points.to_vec();
    pts.sort_by(|a, b| a.re.cmp(&b.re).then(a.im.cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: &QComplex, a: &QComplex, b: &QComplex| (a - o).cross(&(b - o));
    let mut lower: Vec<QComplex> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && turn(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= rat(0) {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<QComplex> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= rat(0) {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        // centre the shorter side
        let x0 = x0 - ((span - (x1 - x0)) / 2.0);
        let y1 = y1 + ((span - (y1 - y0)) / 2.0);
        Self { x0, y1, scale }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.scale, MARGIN + (self.y1 - y) * self.scale)
    }
}

fn fp(p: &QComplex) -> (f64, f64) {
    (to_f64(&p.re), to_f64(&p.im))
}

fn points_attr(frame: &Frame, pts: &[QComplex]) -> String {
    pts.iter()
        .map(|p| {
            let (x, y) = frame.map(fp(p));
            format!("{x:.2},{y:.2}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Hull shaded, left boundary highlighted, subobject charges as dots, axes
/// through the origin. `truncated` adds the closed polygon on the boundary
/// vertices.
pub fn render_svg(polygon: &HnPolygon, charges: &[QComplex], truncated: bool) -> String {
    let mut all: Vec<(f64, f64)> = charges.iter().map(fp).collect();
    all.extend(polygon.vertices.iter().map(fp));
    let frame = Frame::fit(&all);
    let (ox, oy) = frame.map((0.0, 0.0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="600" height="600" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<line class="axis" x1="0" y1="{oy:.2}" x2="600" y2="{oy:.2}" stroke="#999999" stroke-width="1"/>"##);
    let _ = writeln!(s, r##"<line class="axis" x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="600" stroke="#999999" stroke-width="1"/>"##);

    let mut hull_input: Vec<QComplex> = charges.to_vec();
    hull_input.extend(polygon.vertices.iter().cloned());
    let h = hull(&hull_input);
    if h.len() >= 3 {
        let _ = writeln!(
            s,
            r##"<polygon class="hull" points="{}" fill="#dde6f5" stroke="#8899bb" stroke-width="1"/>"##,
            points_attr(&frame, &h)
        );
    }
    if truncated && polygon.vertices.len() >= 3 {
        let _ = writeln!(
            s,
            r##"<polygon class="truncated" points="{}" fill="#f5e0c8" fill-opacity="0.6" stroke="#c07020" stroke-width="1.5" stroke-dasharray="6,4"/>"##,
            points_attr(&frame, &polygon.vertices)
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline class="boundary" points="{}" fill="none" stroke="#cc2222" stroke-width="3"/>"##,
        points_attr(&frame, &polygon.vertices)
    );
    let mut dots: Vec<QComplex> = charges.to_vec();
    dots.sort_by(|a, b| a.re.cmp(&b.re).then(a.im.cmp(&b.im)));
    dots.dedup();
    for d in &dots {
        let (x, y) = frame.map(fp(d));
        let _ = writeln!(s, r##"<circle class="charge" cx="{x:.2}" cy="{y:.2}" r="4" fill="#222222"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabkit_core::Class;

    fn poly(v: &[(i64, i64)]) -> HnPolygon {
        HnPolygon {
            vertices: v.iter().map(|&(a, b)| QComplex::from_ints(a, b)).collect(),
            classes: (0..v.len()).map(|i| Class(vec![i as i64])).collect(),
        }
    }

    #[test]
    fn single_edge() {
        let p = poly(&[(0, 0), (-1, 2)]);
        let svg = render_svg(&p, &[QComplex::zero(), QComplex::from_ints(-1, 2), QComplex::from_ints(0, 1)], false);
        assert_eq!(svg.matches("class=\"boundary\"").count(), 1);
        let pts = svg.lines().find(|l| l.contains("boundary")).unwrap();
        assert_eq!(pts.split("points=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').count(), 2);
        assert!(svg.contains(r#"viewBox="0 0 600 600""#));
    }

    #[test]
    fn unstable_polygon_and_overlay() {
        let p = poly(&[(0, 0), (-1, 1), (-1, 3)]);
        let charges = [QComplex::zero(), QComplex::from_ints(-1, 1), QComplex::from_ints(-1, 3)];
        let svg = render_svg(&p, &charges, false);
        assert_eq!(svg.matches("<circle").count(), 3);
        let line = svg.lines().find(|l| l.contains("boundary")).unwrap();
        assert_eq!(line.split("points=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').count(), 3);
        assert!(!svg.contains("truncated"));
        let with = render_svg(&p, &charges, true);
        assert!(with.contains(r#"class="truncated""#));
        assert_eq!(with, render_svg(&p, &charges, true));
    }
}
