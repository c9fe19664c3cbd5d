//! SVG pictures: phase diagrams of interval maps and the embedded model.
//!
//! R intervals are drawn in red with arrows pointing right, L intervals in
//! blue with arrows pointing left. Coordinates are printed with four decimals
//! so output is byte-stable.

use std::fmt::Write;

use crate::continuum::{Geometry, YHomeo, YModel, YPoint};
use crate::plmap::{Orientation, PlHomeo};
use crate::rational::{to_f64, Rational};

const R_COLOR: &str = "#c0392b";
const L_COLOR: &str = "#2c6fbb";

fn color(o: Orientation) -> &'static str {
    match o {
        Orientation::R => R_COLOR,
        Orientation::L => L_COLOR,
    }
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <defs>\n\
         <marker id=\"head-r\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"4\" orient=\"auto\">\
         <path d=\"M0,0 L8,4 L0,8 z\" fill=\"{R_COLOR}\"/></marker>\n\
         <marker id=\"head-l\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"4\" orient=\"auto\">\
         <path d=\"M0,0 L8,4 L0,8 z\" fill=\"{L_COLOR}\"/></marker>\n\
         </defs>\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn marker(o: Orientation) -> &'static str {
    match o {
        Orientation::R => "url(#head-r)",
        Orientation::L => "url(#head-l)",
    }
}

/// Phase diagram on a horizontal line: fixed points in black, each wandering
/// interval as a coloured arc with an arrow in its flow direction. Intervals
/// too small to see are drawn as plain ticks.
pub fn phase_diagram(f: &PlHomeo) -> String {
    let (width, height, pad) = (960.0, 220.0, 30.0);
    let axis = height * 0.7;
    let (lo, hi) = f.domain();
    let span = to_f64(&(&hi - &lo));
    let sx = |x: &Rational| pad + (to_f64(&(x - &lo)) / span) * (width - 2.0 * pad);
    let mut out = header(width, height);
    let _ = writeln!(
        out,
        "<line x1=\"{:.4}\" y1=\"{axis:.4}\" x2=\"{:.4}\" y2=\"{axis:.4}\" stroke=\"black\" stroke-width=\"3\"/>",
        sx(&lo),
        sx(&hi)
    );
    for w in f.wandering_intervals() {
        let (x0, x1) = (sx(&w.a), sx(&w.b));
        let c = color(w.orientation);
        // gap in the fixed line
        let _ = writeln!(
            out,
            "<line x1=\"{x0:.4}\" y1=\"{axis:.4}\" x2=\"{x1:.4}\" y2=\"{axis:.4}\" stroke=\"white\" stroke-width=\"5\"/>"
        );
        let _ = writeln!(
            out,
            "<line x1=\"{x0:.4}\" y1=\"{axis:.4}\" x2=\"{x1:.4}\" y2=\"{axis:.4}\" stroke=\"{c}\" stroke-width=\"1\"/>"
        );
        if x1 - x0 < 4.0 {
            continue;
        }
        let r = (x1 - x0) / 2.0;
        let rise = r.min(height * 0.55);
        let (from, to) = match w.orientation {
            Orientation::R => (x0, x1),
            Orientation::L => (x1, x0),
        };
        let sweep = match w.orientation {
            Orientation::R => 1,
            Orientation::L => 0,
        };
        let _ = writeln!(
            out,
            "<path d=\"M{from:.4},{axis:.4} A{r:.4},{rise:.4} 0 0 {sweep} {to:.4},{axis:.4}\" fill=\"none\" \
             stroke=\"{c}\" stroke-width=\"1.5\" marker-end=\"{}\"/>",
            marker(w.orientation)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// The embedded model with the circle below the horizontal segment. With a map, each wandering interval of
/// each arc is overlaid in its orientation colour.
pub fn model_picture(model: &YModel, g: Option<&YHomeo>) -> String {
    let (width, height, pad) = (800.0, 640.0, 40.0);
    let scale = (width - 2.0 * pad) / 2.0;
    let tx = |x: f64| pad + (x + 1.0) * scale;
    // y in [-1, 1] maps top to bottom
    let ty = |y: f64| pad + (1.0 - y) * scale * 0.75;
    let geo = Geometry::new(model);
    let mut out = header(width, height);
    let path = |pts: &[(f64, f64)]| {
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.4},{:.4} ", if i == 0 { "M" } else { "L" }, tx(*x), ty(*y));
        }
        d.trim_end().to_string()
    };
    for a in &model.arcs {
        let pts: Vec<(f64, f64)> = geo.polys[a.id].iter().map(|p| p.to_f64()).collect();
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"><title>{}</title></path>",
            path(&pts),
            a.label
        );
    }
    if let Some(g) = g {
        for a in &model.arcs {
            for w in g.on_arc(a.id).wandering_intervals() {
                let mut pts = vec![geo.embed(&YPoint::new(a.id, w.a.clone())).to_f64()];
                let k = geo.polys[a.id].len() - 1;
                for j in 1..k {
                    let t = Rational::new(j.into(), k.into());
                    if w.a < t && t < w.b {
                        pts.push(geo.polys[a.id][j].to_f64());
                    }
                }
                pts.push(geo.embed(&YPoint::new(a.id, w.b.clone())).to_f64());
                if w.orientation == Orientation::L {
                    pts.reverse();
                }
                let _ = writeln!(
                    out,
                    "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"3\" marker-end=\"{}\"/>",
                    path(&pts),
                    color(w.orientation),
                    marker(w.orientation)
                );
            }
        }
    }
    for v in &model.vertices {
        let (x, y) = v.point.to_f64();
        let _ = writeln!(
            out,
            "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"3\" fill=\"black\"><title>{}</title></circle>",
            tx(x),
            ty(y),
            v.label
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::build_f_star;
    use crate::continuum::{build_g_star, build_y};

    #[test]
    fn phase_diagram_has_one_arrow_per_interval() {
        let svg = phase_diagram(&build_f_star(1));
        assert_eq!(svg.matches("marker-end=\"url(#head-r)\"").count(), 1);
        assert_eq!(svg.matches("marker-end=\"url(#head-l)\"").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn single_r_interval_at_depth_zero() {
        let svg = phase_diagram(&build_f_star(0));
        assert_eq!(svg.matches("marker-end").count(), 1);
        assert!(svg.contains("head-r)\""));
    }

    #[test]
    fn model_picture_is_deterministic() {
        let y = build_y(3).unwrap();
        let g = build_g_star(&y, 1);
        let a = model_picture(&y, Some(&g));
        assert_eq!(a, model_picture(&y, Some(&g)));
        assert_eq!(a.matches("<title>").count(), y.arcs.len() + y.vertices.len());
    }
}
