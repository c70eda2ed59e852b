use std::fmt::Write;

use thickset_core::ballsys::{BallSystem, Norm};
use thickset_core::cantor::{cover, IfsSet1D};
use thickset_core::scalar::{to_f64, Interval};

const W: f64 = 800.0;
const MARGIN: f64 = 20.0;
const ROW: f64 = 18.0;
const ROW_GAP: f64 = 10.0;

fn header(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    )
}

/// Nested cover intervals, one row per depth, with optional point marks below.
pub fn set_bars(set: &IfsSet1D, depth: u32, marks: &[Interval]) -> String {
    let (lo, hi) = (to_f64(set.hull().lo()), to_f64(set.hull().hi()));
    let sx = |x: f64| MARGIN + (x - lo) / (hi - lo) * (W - 2.0 * MARGIN);
    let rows = depth + 1;
    let h =
        2.0 * MARGIN + rows as f64 * (ROW + ROW_GAP) + if marks.is_empty() { 0.0 } else { 30.0 };
    let mut s = header(W, h);
    for d in 0..=depth {
        let y = MARGIN + d as f64 * (ROW + ROW_GAP);
        let _ = writeln!(s, "<g id=\"depth-{d}\" fill=\"#333333\">");
        for iv in &cover(set, d).intervals {
            let (a, b) = (sx(to_f64(iv.lo())), sx(to_f64(iv.hi())));
            let _ = writeln!(
                s,
                "<rect x=\"{a:.4}\" y=\"{y:.4}\" width=\"{:.4}\" height=\"{ROW:.4}\"/>",
                (b - a).max(0.5)
            );
        }
        s.push_str("</g>\n");
    }
    if !marks.is_empty() {
        let y = MARGIN + rows as f64 * (ROW + ROW_GAP) + 10.0;
        s.push_str("<g id=\"witness\" fill=\"#c0392b\">\n");
        for m in marks {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.4}\" cy=\"{y:.4}\" r=\"4\"/>",
                sx(m.to_f64_mid())
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

struct Frame {
    cx: f64,
    cy: f64,
    half: f64,
    size: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.cx + self.half) / (2.0 * self.half) * self.size
    }

    fn y(&self, y: f64) -> f64 {
        MARGIN + (self.cy + self.half - y) / (2.0 * self.half) * self.size
    }

    fn len(&self, r: f64) -> f64 {
        r / (2.0 * self.half) * self.size
    }
}

fn overlay(s: &mut String, f: &Frame, pts: &[(f64, f64)]) {
    if pts.is_empty() {
        return;
    }
    s.push_str("<g id=\"witness\">\n");
    if pts.len() >= 3 {
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.4},{:.4}", f.x(x), f.y(y)))
            .collect();
        let _ = writeln!(
            s,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );
    }
    for &(x, y) in pts {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"3\" fill=\"#c0392b\"/>",
            f.x(x),
            f.y(y)
        );
    }
    s.push_str("</g>\n");
}

/// Balls of one level as discs or squares inside the root outline.
pub fn system_balls(sys: &BallSystem, depth: u32, pts: &[(f64, f64)]) -> String {
    let root = sys.root();
    let f = Frame {
        cx: to_f64(&root.center[0]),
        cy: to_f64(root.center.get(1).unwrap_or(&root.center[0])),
        half: to_f64(&root.radius),
        size: 600.0,
    };
    let side = f.size + 2.0 * MARGIN;
    let mut s = header(side, side);
    let shape = |s: &mut String, c: &[f64], r: f64, style: &str| match sys.norm() {
        Norm::L2 => {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\" {style}/>",
                f.x(c[0]),
                f.y(c[1]),
                f.len(r)
            );
        }
        Norm::Linf => {
            let _ = writeln!(
                s,
                "<rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" height=\"{:.4}\" {style}/>",
                f.x(c[0] - r),
                f.y(c[1] + r),
                f.len(2.0 * r),
                f.len(2.0 * r)
            );
        }
    };
    let rc: Vec<f64> = root.center.iter().map(to_f64).collect();
    shape(
        &mut s,
        &rc,
        to_f64(&root.radius),
        "fill=\"none\" stroke=\"#333333\"",
    );
    let _ = writeln!(s, "<g id=\"level-{depth}\">");
    for n in sys.level(depth) {
        let c: Vec<f64> = n.ball.center.iter().map(to_f64).collect();
        shape(
            &mut s,
            &c,
            to_f64(&n.ball.radius),
            "fill=\"#9bb7d4\" stroke=\"#1f3b57\" stroke-width=\"0.5\"",
        );
    }
    s.push_str("</g>\n");
    overlay(&mut s, &f, pts);
    s.push_str("</svg>\n");
    s
}

/// Product cover `C × C` at `depth` with witness vertices.
pub fn product_boxes(set: &IfsSet1D, depth: u32, pts: &[(f64, f64)]) -> String {
    let (lo, hi) = (to_f64(set.hull().lo()), to_f64(set.hull().hi()));
    let f = Frame {
        cx: (lo + hi) / 2.0,
        cy: (lo + hi) / 2.0,
        half: (hi - lo) / 2.0,
        size: 600.0,
    };
    let side = f.size + 2.0 * MARGIN;
    let mut s = header(side, side);
    let ivs = cover(set, depth).intervals;
    let _ = writeln!(s, "<g id=\"cover-{depth}\" fill=\"#9bb7d4\">");
    for a in &ivs {
        for b in &ivs {
            let (x0, x1) = (to_f64(a.lo()), to_f64(a.hi()));
            let (y0, y1) = (to_f64(b.lo()), to_f64(b.hi()));
            let _ = writeln!(
                s,
                "<rect x=\"{:.4}\" y=\"{:.4}\" width=\"{:.4}\" height=\"{:.4}\"/>",
                f.x(x0),
                f.y(y1),
                f.len(x1 - x0).max(0.5),
                f.len(y1 - y0).max(0.5)
            );
        }
    }
    s.push_str("</g>\n");
    overlay(&mut s, &f, pts);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use thickset_core::scalar::{parse_exact, rat};

    #[test]
    fn off_center_bars() {
        let set = IfsSet1D::off_center(&rat(3, 10)).unwrap();
        let svg = set_bars(&set, 2, &[]);
        let depth2 = svg.split("<g id=\"depth-2\"").nth(1).unwrap();
        let depth2 = depth2.split("</g>").next().unwrap();
        assert_eq!(depth2.matches("<rect").count(), 4);
        assert_eq!(svg, set_bars(&set, 2, &[]));
    }

    #[test]
    fn grid_squares() {
        let sys = BallSystem::grid_ifs(10, parse_exact("0.095").unwrap(), rat(1, 100), 0).unwrap();
        let svg = system_balls(&sys, 1, &[]);
        let level = svg.split("<g id=\"level-1\">").nth(1).unwrap();
        let level = level.split("</g>").next().unwrap();
        assert_eq!(level.matches("<rect").count(), 100);
    }
}
