//! Minimal self-contained SVG line chart: the computed curve overlaid
//! with its leading asymptote, on automatically chosen linear or
//! log-10 axes, in a fixed 1200×800 view box.

use std::fmt::Write;

use bifurc::asymptotics::AsymptoticModel;
use bifurc::timemap::CurvePoint;

const WIDTH: f64 = 1200.0;
const HEIGHT: f64 = 800.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 1170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 730.0;

/// One axis with its screen span and an optional log-10 transform.
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    screen_lo: f64,
    screen_hi: f64,
}

impl Axis {
    fn build(values: impl Iterator<Item = f64>, screen_lo: f64, screen_hi: f64) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut positive = true;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
            positive &= v > 0.0;
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        let log = positive && hi / lo >= 50.0;
        let (mut lo, mut hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        Axis { lo, hi, log, screen_lo, screen_hi }
    }

    fn place(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.screen_lo + (t - self.lo) / (self.hi - self.lo) * (self.screen_hi - self.screen_lo)
    }

    /// Data value at an even fraction of the axis, for tick labels.
    fn value_at(&self, fraction: f64) -> f64 {
        let t = self.lo + fraction * (self.hi - self.lo);
        if self.log {
            10f64.powf(t)
        } else {
            t
        }
    }
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{:.2e}", v)
    } else {
        format!("{:.3}", v)
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], style: &str) {
    out.push_str(r#"<polyline fill="none" "#);
    out.push_str(style);
    out.push_str(r#" points=""#);
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{:.2},{:.2}", x, y).unwrap();
    }
    out.push_str("\"/>\n");
}

/// Render curve points plus the model's leading power-law asymptote.
pub fn curve_chart(points: &[CurvePoint], model: &AsymptoticModel, title: &str) -> String {
    let finite: Vec<&CurvePoint> =
        points.iter().filter(|p| p.alpha.is_finite() && p.lambda.is_finite()).collect();
    let leading =
        |alpha: f64| -> f64 { model.leading_coeff * alpha.powf(model.leading_exp) };
    let x_axis = Axis::build(finite.iter().map(|p| p.alpha), LEFT, RIGHT);
    let y_axis = Axis::build(
        finite.iter().flat_map(|p| [p.lambda, leading(p.alpha)]),
        BOTTOM,
        TOP,
    );

    let mut out = String::new();
    write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {:.0} {:.0}" width="{:.0}" height="{:.0}" font-family="monospace" font-size="16">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    )
    .unwrap();
    out.push('\n');
    writeln!(out, r#"<rect width="{:.0}" height="{:.0}" fill="white"/>"#, WIDTH, HEIGHT)
        .unwrap();
    writeln!(
        out,
        r#"<rect x="{:.0}" y="{:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="black"/>"#,
        LEFT,
        TOP,
        RIGHT - LEFT,
        BOTTOM - TOP
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.0}" y="24" text-anchor="middle">{}</text>"#,
        0.5 * (LEFT + RIGHT),
        title
    )
    .unwrap();

    // Ticks and grid lines at even fractions of each axis.
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x = LEFT + f * (RIGHT - LEFT);
        writeln!(
            out,
            r#"<line x1="{:.1}" y1="{:.0}" x2="{:.1}" y2="{:.0}" stroke="silver"/>"#,
            x,
            TOP,
            x,
            BOTTOM
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.0}" text-anchor="middle">{}</text>"#,
            x,
            BOTTOM + 28.0,
            label(x_axis.value_at(f))
        )
        .unwrap();
        let y = BOTTOM - f * (BOTTOM - TOP);
        writeln!(
            out,
            r#"<line x1="{:.0}" y1="{:.1}" x2="{:.0}" y2="{:.1}" stroke="silver"/>"#,
            LEFT,
            y,
            RIGHT,
            y
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.0}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 5.0,
            label(y_axis.value_at(f))
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.0}" y="{:.0}" text-anchor="middle">alpha{}</text>"#,
        0.5 * (LEFT + RIGHT),
        BOTTOM + 58.0,
        if x_axis.log { " (log)" } else { "" }
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="22" y="{:.0}" text-anchor="middle" transform="rotate(-90 22 {:.0})">lambda{}</text>"#,
        0.5 * (TOP + BOTTOM),
        0.5 * (TOP + BOTTOM),
        if y_axis.log { " (log)" } else { "" }
    )
    .unwrap();

    let curve: Vec<(f64, f64)> =
        finite.iter().map(|p| (x_axis.place(p.alpha), y_axis.place(p.lambda))).collect();
    let asymptote: Vec<(f64, f64)> = finite
        .iter()
        .map(|p| (x_axis.place(p.alpha), y_axis.place(leading(p.alpha))))
        .collect();
    polyline(&mut out, &asymptote, r#"stroke="crimson" stroke-width="1.5" stroke-dasharray="6 4""#);
    polyline(&mut out, &curve, r#"stroke="royalblue" stroke-width="2""#);

    // Legend, top-left inside the plot area.
    writeln!(
        out,
        r#"<line x1="{:.0}" y1="{:.0}" x2="{:.0}" y2="{:.0}" stroke="royalblue" stroke-width="2"/>"#,
        LEFT + 14.0,
        TOP + 22.0,
        LEFT + 50.0,
        TOP + 22.0
    )
    .unwrap();
    writeln!(out, r#"<text x="{:.0}" y="{:.0}">computed curve</text>"#, LEFT + 58.0, TOP + 27.0)
        .unwrap();
    writeln!(
        out,
        r#"<line x1="{:.0}" y1="{:.0}" x2="{:.0}" y2="{:.0}" stroke="crimson" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
        LEFT + 14.0,
        TOP + 46.0,
        LEFT + 50.0,
        TOP + 46.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.0}" y="{:.0}">leading asymptote</text>"#,
        LEFT + 58.0,
        TOP + 51.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}
