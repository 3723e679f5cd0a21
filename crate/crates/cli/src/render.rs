//! Static SVG pictures of a configuration.

use std::fmt::Write;

use locperv::{PathKind, PathSpec, QPerv, Sign};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;
const INSET: (f64, f64, f64) = (SIZE - 44.0, 44.0, 32.0);

struct Frame {
    min: (f64, f64),
    max: (f64, f64),
    scale: f64,
}

impl Frame {
    fn fit(points: &[(f64, f64)]) -> Self {
        let min = points.iter().fold((f64::INFINITY, f64::INFINITY), |m, p| {
            (m.0.min(p.0), m.1.min(p.1))
        });
        let max = points
            .iter()
            .fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
                (m.0.max(p.0), m.1.max(p.1))
            });
        let span = (max.0 - min.0).max(max.1 - min.1).max(1.0);
        Self {
            min,
            max,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    /// Screen coordinates, y pointing down, picture centred.
    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        let pad_x = (SIZE - 2.0 * MARGIN - (self.max.0 - self.min.0) * self.scale) / 2.0;
        let pad_y = (SIZE - 2.0 * MARGIN - (self.max.1 - self.min.1) * self.scale) / 2.0;
        (
            MARGIN + pad_x + (p.0 - self.min.0) * self.scale,
            MARGIN + pad_y + (self.max.1 - p.1) * self.scale,
        )
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn path_data(f: &QPerv, spec: &PathSpec, screen: &[(f64, f64)]) -> String {
    let (a, b) = (screen[spec.from], screen[spec.to]);
    let length = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let u = ((b.0 - a.0) / length, (b.1 - a.1) / length);
    let inter = f.intermediates(spec.from, spec.to);
    let mut d = format!("M {} {}", num(a.0), num(a.1));
    if let PathKind::Word(w) = &spec.kind {
        let mut stops: Vec<f64> = vec![0.0];
        stops.extend(
            inter
                .iter()
                .map(|&k| (screen[k].0 - a.0) * u.0 + (screen[k].1 - a.1) * u.1),
        );
        stops.push(length);
        let gap = stops
            .windows(2)
            .map(|s| s[1] - s[0])
            .fold(f64::INFINITY, f64::min);
        let r = (0.3 * gap).min(14.0);
        for (&k, s) in inter.iter().zip(&w.0) {
            let c = screen[k];
            let (p, q) = (
                (c.0 - r * u.0, c.1 - r * u.1),
                (c.0 + r * u.0, c.1 + r * u.1),
            );
            // plus detours to the right of travel, which is the counterclockwise arc on screen
            let sweep = if *s == Sign::Plus { 0 } else { 1 };
            let _ = write!(
                d,
                " L {} {} A {} {} 0 0 {} {} {}",
                num(p.0),
                num(p.1),
                num(r),
                num(r),
                sweep,
                num(q.0),
                num(q.1)
            );
        }
    }
    let _ = write!(d, " L {} {}", num(b.0), num(b.1));
    d
}

pub fn render(f: &QPerv, path: Option<&PathSpec>) -> String {
    let coords: Vec<(f64, f64)> = f.config().points().iter().map(|p| p.to_f64()).collect();
    let frame = Frame::fit(&coords);
    let screen: Vec<(f64, f64)> = coords.iter().map(|&p| frame.map(p)).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let _ = writeln!(
        s,
        r##"<g class="segments" stroke="#c8c8c8" stroke-width="1">"##
    );
    for i in 0..screen.len() {
        for j in i + 1..screen.len() {
            let (a, b) = (screen[i], screen[j]);
            let _ = writeln!(
                s,
                r#"<line data-pair="{i}-{j}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(a.0),
                num(a.1),
                num(b.0),
                num(b.1)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let (cx, cy, r) = INSET;
    let _ = writeln!(
        s,
        r##"<g class="stokes-rays" stroke="#3060a0" stroke-width="1" fill="none">"##
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{}" cy="{}" r="{}"/>"#,
        num(cx),
        num(cy),
        num(r)
    );
    for z in f.config().stokes_directions() {
        let (x, y) = z.to_f64();
        let n = (x * x + y * y).sqrt();
        let _ = writeln!(
            s,
            r#"<line data-direction="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            z.to_text(),
            num(cx),
            num(cy),
            num(cx + r * x / n),
            num(cy - r * y / n)
        );
    }
    let _ = writeln!(s, "</g>");

    if let Some(spec) = path {
        let _ = writeln!(
            s,
            r##"<path class="avoidance" data-spec="{spec}" d="{}" stroke="#c03020" stroke-width="2" fill="none"{}/>"##,
            path_data(f, spec, &screen),
            if spec.kind == PathKind::Alien {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            }
        );
    }

    let _ = writeln!(
        s,
        r##"<g class="points" font-family="monospace" font-size="12" fill="#202020">"##
    );
    for (i, p) in screen.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<circle data-point="{i}" cx="{}" cy="{}" r="4"/>"#,
            num(p.0),
            num(p.1)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{i}: {} (dim {})</text>"#,
            num(p.0 + 7.0),
            num(p.1 - 7.0),
            f.point(i),
            f.dim(i)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
