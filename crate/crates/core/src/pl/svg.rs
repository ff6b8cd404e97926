//! SVG plots of PL graphs with square overlays. Floating point is used only for drawing.

use std::fmt::Write as _;

use super::PLMap;
use crate::rational::{to_f64, Rational};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Curve<'a> {
    pub map: &'a PLMap,
    pub label: String,
}

/// A square `[lo, hi]²` drawn over the graphs.
pub struct Square {
    pub lo: Rational,
    pub hi: Rational,
    pub label: String,
    pub dashed: bool,
}

pub struct Plot<'a> {
    pub width: u32,
    pub height: u32,
    pub lo: Rational,
    pub hi: Rational,
    pub curves: Vec<Curve<'a>>,
    pub squares: Vec<Square>,
    pub title: String,
}

impl<'a> Plot<'a> {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Plot { width: 640, height: 640, lo, hi, curves: Vec::new(), squares: Vec::new(), title: String::new() }
    }

    pub fn render(&self) -> String {
        let (w, h) = (self.width as f64, self.height as f64);
        let (lo, hi) = (to_f64(&self.lo), to_f64(&self.hi));
        let span = (hi - lo).max(1e-12);
        let sx = |x: f64| (x - lo) / span * w;
        let sy = |y: f64| h - (y - lo) / span * h;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if !self.title.is_empty() {
            let _ = writeln!(s, r#"<title>{}</title>"#, escape(&self.title));
        }
        // diagonal
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##,
            sx(lo),
            sy(lo),
            sx(hi),
            sy(hi)
        );
        for sq in &self.squares {
            let (a, b) = (to_f64(&sq.lo), to_f64(&sq.hi));
            let dash = if sq.dashed { r#" stroke-dasharray="2 3""# } else { "" };
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444444"{dash}><title>{}</title></rect>"##,
                sx(a),
                sy(b),
                sx(b) - sx(a),
                sy(a) - sy(b),
                escape(&sq.label)
            );
        }
        for (i, c) in self.curves.iter().enumerate() {
            let mut xs: Vec<Rational> = vec![self.lo.clone(), self.hi.clone()];
            xs.extend(c.map.breakpoints().iter().filter(|p| p.0 > self.lo && p.0 < self.hi).map(|p| p.0.clone()));
            xs.sort();
            let pts: Vec<String> =
                xs.iter().map(|x| format!("{:.2},{:.2}", sx(to_f64(x)), sy(to_f64(&c.map.eval(x))))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"><title>{}</title></polyline>"#,
                pts.join(" "),
                PALETTE[i % PALETTE.len()],
                escape(&c.label)
            );
            let _ = writeln!(
                s,
                r#"<text x="8" y="{}" font-family="monospace" font-size="12" fill="{}">{}</text>"#,
                16 + 14 * i,
                PALETTE[i % PALETTE.len()],
                escape(&c.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
