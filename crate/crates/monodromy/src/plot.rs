//! SVG pole maps: marked points, contour circles and the boundary lines of
//! the logarithm strip.

use monodromy_core::branch::{BranchMode, LogBranch};
use monodromy_core::C64;
use std::fmt::Write as _;

const SIZE: f64 = 480.0;
const PAD: f64 = 24.0;

/// Kind of a marked point; used as the SVG class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Sigma,
    Pole,
    Zero,
}

impl Marker {
    fn class(self) -> &'static str {
        match self {
            Marker::Sigma => "sigma",
            Marker::Pole => "pole",
            Marker::Zero => "zero",
        }
    }

    fn colour(self) -> &'static str {
        match self {
            Marker::Sigma => "#1f4e9c",
            Marker::Pole => "#b3261e",
            Marker::Zero => "#2e7d32",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PoleMap {
    pub title: String,
    pub points: Vec<(C64, Marker)>,
    pub circles: Vec<(C64, f64)>,
    pub strip: Option<LogBranch>,
    pub unit_circle: bool,
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn new(map: &PoleMap) -> Self {
        let mut lo = C64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut grow = |z: C64, r: f64| {
            lo = C64::new(lo.re.min(z.re - r), lo.im.min(z.im - r));
            hi = C64::new(hi.re.max(z.re + r), hi.im.max(z.im + r));
        };
        for &(p, _) in &map.points {
            grow(p, 0.0);
        }
        for &(c, r) in &map.circles {
            grow(c, r);
        }
        if map.unit_circle {
            grow(C64::new(0.0, 0.0), 1.0);
        }
        if let Some(BranchMode::StandardStrip { left }) = map.strip.as_ref().map(|b| &b.mode) {
            grow(C64::new(*left, 0.0), 0.0);
            grow(C64::new(left + 1.0, 0.0), 0.0);
        }
        if !lo.re.is_finite() {
            lo = C64::new(-1.0, -1.0);
            hi = C64::new(1.0, 1.0);
        }
        let margin = 0.1 * (hi.re - lo.re).max(hi.im - lo.im).max(1.0);
        let (x0, x1) = (lo.re - margin, hi.re + margin);
        let (y0, y1) = (lo.im - margin, hi.im + margin);
        let scale = (SIZE - 2.0 * PAD) / (x1 - x0).max(y1 - y0);
        Self { x0, y1, scale }
    }

    fn x(&self, re: f64) -> f64 {
        PAD + (re - self.x0) * self.scale
    }

    fn y(&self, im: f64) -> f64 {
        PAD + (self.y1 - im) * self.scale
    }
}

/// Endpoints of the two strip boundary lines, long enough to cross the
/// clipped viewport.
fn strip_lines(b: &LogBranch) -> Vec<(C64, C64)> {
    let BranchMode::StandardStrip { left } = b.mode else { return Vec::new() };
    let dir = if b.hbar.im.abs() <= 1e-14 * b.hbar.norm().max(1.0) { C64::new(0.0, 1.0) } else { b.hbar / b.hbar.norm() };
    let reach = 1e3;
    [left, left + 1.0].iter().map(|&t| (C64::new(t, 0.0) - dir * reach, C64::new(t, 0.0) + dir * reach)).collect()
}

impl PoleMap {
    pub fn render(&self) -> String {
        let f = Frame::new(self);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<defs><clipPath id="view"><rect x="0" y="0" width="{SIZE}" height="{SIZE}"/></clipPath></defs>"#);
        let _ = writeln!(s, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);
        let _ = writeln!(s, r#"<g clip-path="url(#view)">"#);
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="0" y1="{:.3}" x2="{SIZE}" y2="{:.3}" stroke="#bbbbbb"/>"##,
            f.y(0.0),
            f.y(0.0)
        );
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="{:.3}" y1="0" x2="{:.3}" y2="{SIZE}" stroke="#bbbbbb"/>"##,
            f.x(0.0),
            f.x(0.0)
        );
        if let Some(b) = &self.strip {
            for (a, e) in strip_lines(b) {
                let _ = writeln!(
                    s,
                    r##"<line class="strip" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#888888" stroke-dasharray="6 4"/>"##,
                    f.x(a.re),
                    f.y(a.im),
                    f.x(e.re),
                    f.y(e.im)
                );
            }
        }
        if self.unit_circle {
            let _ = writeln!(
                s,
                r##"<circle class="unit" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#888888" stroke-dasharray="6 4"/>"##,
                f.x(0.0),
                f.y(0.0),
                f.scale
            );
        }
        for &(c, r) in &self.circles {
            let _ = writeln!(
                s,
                r##"<circle class="contour" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#e08a00"/>"##,
                f.x(c.re),
                f.y(c.im),
                r * f.scale
            );
        }
        for &(p, m) in &self.points {
            let _ = writeln!(
                s,
                r#"<circle class="{}" cx="{:.3}" cy="{:.3}" r="3.5" fill="{}"/>"#,
                m.class(),
                f.x(p.re),
                f.y(p.im),
                m.colour()
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, "</svg>");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use monodromy_core::c64;

    #[test]
    fn markers_are_counted_by_class() {
        let map = PoleMap {
            title: "a < b".into(),
            points: vec![(c64(0.1, 0.0), Marker::Pole), (c64(0.4, 0.2), Marker::Pole), (c64(0.0, 0.3), Marker::Zero)],
            circles: vec![(c64(0.1, 0.0), 0.05)],
            strip: Some(LogBranch::standard(c64(0.3, 0.0))),
            unit_circle: false,
        };
        let svg = map.render();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches(r#"class="pole""#).count(), 2);
        assert_eq!(svg.matches(r#"class="zero""#).count(), 1);
        assert_eq!(svg.matches(r#"class="strip""#).count(), 2);
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn empty_map_has_no_markers() {
        let svg = PoleMap::default().render();
        assert!(svg.contains("<svg"));
        assert_eq!(svg.matches("class=\"contour\"").count(), 0);
        assert_eq!(svg.matches("r=\"3.5\"").count(), 0);
    }
}
