// SPDX-License-Identifier: Apache-2.0

//! Deterministic SVG drawing of a placement.
//!
//! The y axis is flipped so that the origin sits at the bottom left. Devices
//! are labelled boxes, nets are dashed centroid contours, blockages are
//! hatched and symmetry axes are dash-dotted lines.

use std::fmt::Write;

use crate::evaluator::net_contour;
use crate::model::{bounding_box, Axis, Instance, Placement};
use crate::scalar::Real;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Shortest decimal form of a half-integer coordinate.
fn num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v:.1}")
    }
}

pub fn render_svg<R: Real>(p: &Placement, inst: &Instance<R>) -> String {
    let (w, h) = bounding_box(p, inst);
    let (w, h) = inst.blockages.iter().fold((w, h), |(w, h), b| (w.max(b.x + b.w), h.max(b.y + b.h)));
    let pad = ((w.max(h) as f64) * 0.02).ceil().max(1.0) as i64;
    let font = ((w.min(h).max(1) as f64) / 40.0).max(0.5);
    let stroke = (w.max(h).max(1) as f64 / 800.0).max(0.05);
    let fy = |y: f64| h as f64 - y;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        -pad,
        -pad,
        w + 2 * pad,
        h + 2 * pad,
        800,
        ((h + 2 * pad) as f64 * 800.0 / (w + 2 * pad).max(1) as f64).round() as i64
    );
    let _ = writeln!(
        s,
        r##"<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="{0}" height="{0}" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="{0}" stroke="#888" stroke-width="{1}"/></pattern></defs>"##,
        num(4.0 * stroke * 10.0),
        num(stroke * 4.0)
    );
    let _ = writeln!(
        s,
        r##"<rect class="outline" x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#000" stroke-width="{}"/>"##,
        num(stroke)
    );

    s.push_str("<g class=\"blockages\">\n");
    for (k, b) in inst.blockages.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<rect class="blockage" data-index="{k}" x="{}" y="{}" width="{}" height="{}" fill="url(#hatch)" stroke="#888" stroke-width="{}"/>"##,
            b.x,
            num(fy((b.y + b.h) as f64)),
            b.w,
            b.h,
            num(stroke)
        );
    }
    s.push_str("</g>\n<g class=\"devices\">\n");
    for (i, rect) in inst.rects.iter().enumerate() {
        let v = p.dims(inst, i);
        let c = p.coords[i];
        let _ = writeln!(
            s,
            r##"<rect class="device" data-index="{i}" x="{}" y="{}" width="{}" height="{}" fill="#cfe3f7" stroke="#1f4e79" stroke-width="{}"/>"##,
            c.x,
            num(fy((c.y + v.h) as f64)),
            v.w,
            v.h,
            num(stroke)
        );
        let _ = writeln!(
            s,
            r#"<text class="label" x="{}" y="{}" font-size="{}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            num(c.x as f64 + v.w as f64 / 2.0),
            num(fy(c.y as f64 + v.h as f64 / 2.0)),
            num((font * 10.0).round() / 10.0),
            escape(&rect.name)
        );
    }
    s.push_str("</g>\n<g class=\"nets\">\n");
    for e in 0..inst.nets.len() {
        if let Some(((x0, y0), (x1, y1))) = net_contour(p, inst, e) {
            let _ = writeln!(
                s,
                r##"<rect class="net" data-index="{e}" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#c0392b" stroke-dasharray="{} {}" stroke-width="{}"/>"##,
                num(x0),
                num(fy(y1)),
                num(x1 - x0),
                num(y1 - y0),
                num(stroke * 6.0),
                num(stroke * 4.0),
                num(stroke)
            );
        }
    }
    s.push_str("</g>\n<g class=\"axes\">\n");
    for (g, group) in inst.groups.iter().enumerate() {
        let a = p.axes[g] as f64 / 2.0;
        let (x1, y1, x2, y2) = match group.axis {
            Axis::Vertical => (a, fy(0.0), a, fy(h as f64)),
            Axis::Horizontal => (0.0, fy(a), w as f64, fy(a)),
        };
        let _ = writeln!(
            s,
            r##"<line class="axis" data-index="{g}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#2e7d32" stroke-dasharray="{} {} {} {}" stroke-width="{}"/>"##,
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(stroke * 8.0),
            num(stroke * 3.0),
            num(stroke),
            num(stroke * 3.0),
            num(stroke)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Blockage, Net, Point, Rect, SymmetryGroup, Variant};
    use std::collections::BTreeSet;

    fn count(s: &str, needle: &str) -> usize {
        s.matches(needle).count()
    }

    #[test]
    fn single_device() {
        let inst: Instance<f64> = Instance::new(vec![Rect::new("m<1>", vec![Variant::new(3, 2)])]);
        let p = Placement { coords: vec![Point::ORIGIN], variants: vec![0], axes: vec![] };
        let svg = render_svg(&p, &inst);
        assert_eq!(count(&svg, "class=\"device\""), 1);
        assert!(svg.contains("m&lt;1&gt;"));
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg, render_svg(&p, &inst));
    }

    #[test]
    fn contours_axes_and_blockages() {
        let mut inst: Instance<f64> = Instance::new(vec![
            Rect::new("a", vec![Variant::new(2, 2)]),
            Rect::new("b", vec![Variant::new(2, 2)]),
            Rect::new("c", vec![Variant::new(3, 1)]),
        ]);
        inst.nets.push(Net::new(vec![0, 2]));
        inst.groups.push(SymmetryGroup { axis: Axis::Vertical, pairs: vec![(0, 1)], selfs: vec![] });
        inst.blockages.push(Blockage { x: 6, y: 0, w: 2, h: 2, restricted: BTreeSet::new() });
        let p = Placement {
            coords: vec![Point::new(0, 0), Point::new(2, 0), Point::new(0, 2)],
            variants: vec![0; 3],
            axes: vec![4],
        };
        let svg = render_svg(&p, &inst);
        assert_eq!(count(&svg, "class=\"device\""), 3);
        assert_eq!(count(&svg, "class=\"net\""), 1);
        assert_eq!(count(&svg, "class=\"axis\""), 1);
        assert_eq!(count(&svg, "class=\"blockage\""), 1);
        // Centroids (1, 1) and (1.5, 2.5); the box height is 3, so y flips to 3 - 2.5.
        let ((x0, y0), (x1, y1)) = net_contour(&p, &inst, 0).unwrap();
        assert_eq!(((x0, y0), (x1, y1)), ((1.0, 1.0), (1.5, 2.5)));
        assert!(svg.contains(r#"class="net" data-index="0" x="1" y="0.5" width="0.5" height="1.5""#), "{svg}");
        assert!(svg.contains(r#"class="axis" data-index="0" x1="2" y1="3" x2="2" y2="0""#));
    }
}
