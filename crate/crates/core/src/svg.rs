//! Minimal SVG plots of domains, level curves, basins and cuts.

use std::fmt::Write as _;

use crate::flow::{FlowDecomposition, FlowLine};
use crate::geometry::{DomainSpec, Point};

pub struct Svg {
    lo: Point,
    hi: Point,
    scale: f64,
    body: String,
}

impl Svg {
    /// Canvas showing `[lo, hi]` at `width` pixels.
    pub fn new(lo: Point, hi: Point, width: f64) -> Self {
        Self {
            lo,
            hi,
            scale: width / (hi.x - lo.x),
            body: String::new(),
        }
    }

    pub fn for_domain(domain: &DomainSpec, width: f64) -> Self {
        let (lo, hi) = domain.bounding_box();
        let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y);
        Self::new(lo - Point::new(pad, pad), hi + Point::new(pad, pad), width)
    }

    fn tx(&self, p: Point) -> (f64, f64) {
        ((p.x - self.lo.x) * self.scale, (self.hi.y - p.y) * self.scale)
    }

    pub fn polygon(&mut self, pts: &[Point], stroke: &str, fill: &str, width: f64) {
        let mut d = String::new();
        for p in pts {
            let (x, y) = self.tx(*p);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" stroke="{stroke}" fill="{fill}" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn polyline(&mut self, pts: &[Point], stroke: &str, width: f64) {
        let mut d = String::new();
        for p in pts {
            let (x, y) = self.tx(*p);
            let _ = write!(d, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" stroke="{stroke}" fill="none" stroke-width="{width}"/>"#,
            d.trim_end()
        );
    }

    pub fn segments(&mut self, segs: &[(Point, Point)], stroke: &str, width: f64) {
        let mut d = String::new();
        for (a, b) in segs {
            let (x0, y0) = self.tx(*a);
            let (x1, y1) = self.tx(*b);
            let _ = write!(d, "M{x0:.2} {y0:.2}L{x1:.2} {y1:.2}");
        }
        let _ = writeln!(self.body, r#"<path d="{d}" stroke="{stroke}" fill="none" stroke-width="{width}"/>"#);
    }

    pub fn circle(&mut self, c: Point, r: f64, stroke: &str, dashed: bool) {
        let (x, y) = self.tx(c);
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" stroke="{stroke}" fill="none"{dash}/>"#,
            r * self.scale
        );
    }

    /// Axis-aligned squares of side `step` centered at `centers`.
    pub fn cells(&mut self, centers: &[Point], step: f64, fill: &str) {
        let s = step * self.scale;
        let mut d = String::new();
        for c in centers {
            let (x, y) = self.tx(*c);
            let _ = write!(d, "M{:.2} {:.2}h{s:.2}v{s:.2}h{:.2}z", x - s / 2.0, y - s / 2.0, -s);
        }
        let _ = writeln!(self.body, r#"<path d="{d}" fill="{fill}" stroke="none"/>"#);
    }

    pub fn finish(self) -> String {
        let w = (self.hi.x - self.lo.x) * self.scale;
        let h = (self.hi.y - self.lo.y) * self.scale;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Domain outline, optionally with basins, cut and a few flow lines.
pub fn domain_plot(domain: &DomainSpec, flow: Option<&FlowDecomposition>, lines: &[FlowLine]) -> String {
    let mut svg = Svg::for_domain(domain, 600.0);
    if let Some(dec) = flow {
        let g = &dec.grid;
        let pick = |mask: &[bool]| -> Vec<Point> {
            (0..g.len())
                .filter(|&k| dec.inside[k] && mask[k])
                .map(|k| g.point(k % g.nx, k / g.nx))
                .collect()
        };
        svg.cells(&pick(&dec.in_star), g.step, "#cfe3f7");
        svg.cells(&pick(&dec.out_star), g.step, "#f7e0c8");
    }
    for line in lines {
        svg.polyline(&line.points, "#777", 0.6);
    }
    svg.polygon(domain.outer().samples(), "black", "none", 1.5);
    svg.polygon(domain.inner().samples(), "black", "none", 1.5);
    if let Some(dec) = flow {
        svg.segments(&dec.cut, "#c0392b", 2.0);
    }
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let d = DomainSpec::annulus(1.0, 2.0).unwrap();
        let s = domain_plot(&d, None, &[]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polygon").count(), 2);
    }
}
