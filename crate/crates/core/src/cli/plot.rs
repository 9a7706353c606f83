//! Static SVG rendering of a sequence and, optionally, its traced paths.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::measure::TimedSequence;
use crate::trace::TrajectoryForest;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
/// Radius of the heaviest atom; other radii scale with the square root of
/// mass so circle area is proportional to mass.
const MAX_RADIUS: f64 = 8.0;

struct Frame {
    lo: (f64, f64),
    scale: (f64, f64),
}

impl Frame {
    fn new(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
        let (sx, sy) = (span(lo.0, hi.0), span(lo.1, hi.1));
        let lo = (
            if hi.0 > lo.0 { lo.0 } else { lo.0 - 0.5 },
            if hi.1 > lo.1 { lo.1 } else { lo.1 - 0.5 },
        );
        Frame {
            lo,
            scale: ((WIDTH - 2.0 * MARGIN) / sx, (HEIGHT - 2.0 * MARGIN) / sy),
        }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            MARGIN + (x - self.lo.0) * self.scale.0,
            HEIGHT - MARGIN - (y - self.lo.1) * self.scale.1,
        )
    }
}

fn step_colour(step: usize, steps: usize) -> String {
    let hue = if steps > 1 {
        240.0 * (1.0 - step as f64 / (steps - 1) as f64)
    } else {
        240.0
    };
    format!("hsl({hue:.0},70%,45%)")
}

/// One circle per atom, coloured by step; traced edges as lines underneath.
pub fn render_svg(
    seq: &TimedSequence,
    dims: (usize, usize),
    forest: Option<&TrajectoryForest>,
) -> Result<String> {
    let d = seq.dim();
    for k in [dims.0, dims.1] {
        if k >= d {
            return Err(Error::BadDims(format!(
                "dimension {k} out of range for {d}-dimensional data"
            )));
        }
    }
    if let Some(f) = forest {
        if let Some(n) = f.nodes.iter().find(|n| n.pos.len() <= dims.0.max(dims.1)) {
            return Err(Error::BadDims(format!(
                "trace node at step {} has only {} coordinates",
                n.step,
                n.pos.len()
            )));
        }
    }

    let project = |p: &[f64]| (p[dims.0], p[dims.1]);
    let atoms = seq
        .measures()
        .iter()
        .flat_map(|m| (0..m.len()).map(move |i| (m.point(i)[dims.0], m.point(i)[dims.1])))
        .collect::<Vec<_>>();
    let traced = forest
        .map(|f| f.nodes.iter().map(|n| project(&n.pos)).collect::<Vec<_>>())
        .unwrap_or_default();
    let frame = Frame::new(atoms.iter().chain(traced.iter()).copied());

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    if let Some(f) = forest {
        let heaviest = f.edges.iter().map(|e| e.mass).fold(0.0, f64::max);
        let _ = writeln!(
            svg,
            r#"<g class="trace" stroke="black" stroke-opacity="0.4">"#
        );
        for e in &f.edges {
            let (x1, y1) = frame.map(project(&f.nodes[e.from].pos));
            let (x2, y2) = frame.map(project(&f.nodes[e.to].pos));
            let width = if heaviest > 0.0 {
                0.3 + 1.7 * e.mass / heaviest
            } else {
                0.3
            };
            let _ = writeln!(
                svg,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke-width="{width:.3}"/>"#
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    let heaviest = seq
        .measures()
        .iter()
        .flat_map(|m| m.weights().to_vec())
        .fold(0.0, f64::max);
    let steps = seq.len();
    let _ = writeln!(svg, r#"<g class="atoms" fill-opacity="0.7">"#);
    for (step, (_, m)) in seq.entries().iter().enumerate() {
        let colour = step_colour(step, steps);
        for i in 0..m.len() {
            let (cx, cy) = frame.map((m.point(i)[dims.0], m.point(i)[dims.1]));
            let r = MAX_RADIUS * (m.weights()[i] / heaviest).sqrt();
            let _ = writeln!(
                svg,
                r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.4}" fill="{colour}"/>"#
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
