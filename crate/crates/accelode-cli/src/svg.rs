//! Minimal static SVG emission: polylines plus cross markers, auto-scaled to
//! the data bounding box. Presentation only; nothing downstream parses these.

use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 620.0;
const MARGIN: f64 = 50.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub struct SvgPlot {
    title: String,
    polylines: Vec<Vec<(f64, f64)>>,
    crosses: Vec<(f64, f64)>,
}

impl SvgPlot {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            polylines: Vec::new(),
            crosses: Vec::new(),
        }
    }

    pub fn add_polyline(&mut self, points: Vec<(f64, f64)>) {
        if points.len() >= 2 {
            self.polylines.push(points);
        }
    }

    pub fn add_cross(&mut self, x: f64, y: f64) {
        self.crosses.push((x, y));
    }

    fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let all = self
            .polylines
            .iter()
            .flatten()
            .chain(self.crosses.iter());
        for &(x, y) in all {
            lo.0 = lo.0.min(x);
            lo.1 = lo.1.min(y);
            hi.0 = hi.0.max(x);
            hi.1 = hi.1.max(y);
        }
        if !lo.0.is_finite() {
            return (0.0, 0.0, 1.0, 1.0);
        }
        let pad = |a: f64, b: f64| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        let (x0, x1) = pad(lo.0, hi.0);
        let (y0, y1) = pad(lo.1, hi.1);
        (x0, y0, x1, y1)
    }

    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.bbox();
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
        let px = |x: f64| MARGIN + (x - x0) * sx;
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) * sy;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(
            s,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{}</text>",
            MARGIN, self.title
        );
        // Axes through the origin when visible.
        if x0 < 0.0 && x1 > 0.0 {
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\"/>",
                px(0.0),
                py(y0),
                px(0.0),
                py(y1)
            );
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#bbbbbb\"/>",
                px(x0),
                py(0.0),
                px(x1),
                py(0.0)
            );
        }
        for (i, line) in self.polylines.iter().enumerate() {
            let mut pts = String::new();
            for &(x, y) in line {
                let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
            }
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" opacity=\"0.8\"/>",
                pts.trim_end(),
                PALETTE[i % PALETTE.len()]
            );
        }
        for &(x, y) in &self.crosses {
            let (cx, cy) = (px(x), py(y));
            let _ = writeln!(
                s,
                "<path d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" stroke=\"#d62728\" stroke-width=\"1.2\"/>",
                cx - 3.0,
                cy - 3.0,
                cx + 3.0,
                cy + 3.0,
                cx - 3.0,
                cy + 3.0,
                cx + 3.0,
                cy - 3.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\">q: [{x0:.3}, {x1:.3}]  p: [{y0:.3}, {y1:.3}]</text>",
            MARGIN,
            HEIGHT - 12.0
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_markup() {
        let mut plot = SvgPlot::new("test");
        plot.add_polyline(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]);
        plot.add_cross(1.0, 0.5);
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn empty_plot_still_renders() {
        let svg = SvgPlot::new("empty").render();
        assert!(svg.contains("</svg>"));
    }
}
