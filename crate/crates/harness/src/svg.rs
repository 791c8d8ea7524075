//! Minimal static SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 110.0;
const PALETTE: [&str; 8] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c"];

/// One bar: label, height and an optional whisker interval on the same axis.
/// A whisker with an infinite top is drawn to the frame and marked open.
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub whisker: Option<(f64, f64)>,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-9 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v.clamp(self.lo, self.hi) - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn frame(out: &mut String, x_label: &str, y_label: &str, y: &Axis) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(out, r#"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let v = y.lo + (y.hi - y.lo) * k as f64 / 4.0;
        let py = y.map(v, y0, y1);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

pub fn bar_chart(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let y = Axis::new(bars.iter().flat_map(|b| {
        let (lo, hi) = b.whisker.unwrap_or((b.value, b.value));
        [b.value, lo, hi, 0.0]
    }));
    frame(&mut out, "", y_label, &y);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    if bars.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no data</text>"#, (x0 + x1) / 2.0, (y0 + y1) / 2.0);
    }
    let slot = (x1 - x0) / bars.len().max(1) as f64;
    for (i, b) in bars.iter().enumerate() {
        let cx = x0 + slot * (i as f64 + 0.5);
        let color = PALETTE[i % PALETTE.len()];
        if b.value.is_finite() {
            let top = y.map(b.value, y0, y1);
            let base = y.map(0.0, y0, y1);
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
                cx - slot * 0.35,
                top.min(base),
                slot * 0.7,
                (base - top).abs()
            );
        } else {
            let _ = writeln!(out, r#"<text class="unbounded" x="{cx:.1}" y="{}" text-anchor="middle">inf</text>"#, y1 + 12.0);
        }
        if let Some((lo, hi)) = b.whisker.filter(|(lo, _)| lo.is_finite()) {
            let (plo, phi) = (y.map(lo, y0, y1), if hi.is_finite() { y.map(hi, y0, y1) } else { y1 });
            let cap = slot * 0.15;
            let dash = if hi.is_finite() { "" } else { r#" stroke-dasharray="4 3""# };
            let _ = writeln!(
                out,
                r#"<path class="whisker" d="M{:.1} {plo:.1} H{:.1} M{cx:.1} {plo:.1} V{phi:.1} M{:.1} {phi:.1} H{:.1}" stroke="black" fill="none"{dash}/>"#,
                cx - cap,
                cx + cap,
                cx - cap,
                cx + cap
            );
        }
        let _ = writeln!(
            out,
            r#"<text transform="translate({cx:.1} {}) rotate(40)">{}</text>"#,
            y0 + 14.0,
            escape(&b.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let x = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    frame(&mut out, x_label, y_label, &y);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    for k in 0..=4 {
        let v = x.lo + (x.hi - x.lo) * k as f64 / 4.0;
        let px = x.map(v, x0, x1);
        let _ = writeln!(out, r#"<text x="{px:.1}" y="{}" text-anchor="middle">{v:.2}</text>"#, y0 + 16.0);
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|&(a, b)| format!("{:.1},{:.1}", x.map(a, x0, x1), y.map(b, y0, y1)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                out,
                r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        let ly = y0 + 34.0 + 13.0 * (i / 3) as f64;
        let lx = x0 + 210.0 * (i % 3) as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{ly}">{}</text>"#,
            ly - 9.0,
            lx + 14.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
