//! Static SVG plots written by hand so the bytes only depend on the data.

use std::fmt::Write as _;

use liouville_core::geometry::Mesh;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Series {
        Series { name: name.into(), points }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{}", (v * 1000.0).round() / 1000.0)
    } else {
        format!("{v:.2e}")
    }
}

/// Line plot with axes, five ticks per axis and one polyline per series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/></g>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&ser.name)
        );
        if series.len() > 1 {
            let y = TOP + 14.0 * k as f64 + 10.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{y:.2}" fill="{color}" text-anchor="end">{}</text>"#,
                LEFT + pw - 4.0,
                escape(&ser.name)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn frame(mesh: &Mesh) -> (f64, f64, impl Fn([f64; 2]) -> (f64, f64)) {
    let (x0, x1) = range(mesh.nodes().iter().map(|p| p[0]));
    let (y0, y1) = range(mesh.nodes().iter().map(|p| p[1]));
    let scale = ((W - 40.0) / (x1 - x0)).min((H - 40.0) / (y1 - y0));
    let (w, h) = ((x1 - x0) * scale + 40.0, (y1 - y0) * scale + 40.0);
    (w, h, move |p: [f64; 2]| (20.0 + (p[0] - x0) * scale, h - 20.0 - (p[1] - y0) * scale))
}

/// Triangle wireframe with boundary nodes marked.
pub fn mesh_plot(mesh: &Mesh) -> String {
    let (w, h, map) = frame(mesh);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r##"<g fill="none" stroke="#555" stroke-width="0.4">"##);
    for tri in mesh.triangles() {
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let (x, y) = map(mesh.node(v));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    s.push_str("</g>\n<g fill=\"#d62728\">\n");
    for &b in mesh.boundary_nodes() {
        let (x, y) = map(mesh.node(b));
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.2"/>"#);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Triangles filled by the mean nodal value, blue (min) to red (max).
pub fn field_plot(mesh: &Mesh, values: &[f64], title: &str) -> String {
    let (w, h, map) = frame(mesh);
    let (lo, hi) = range(values.iter().copied());
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{:.0}" viewBox="0 0 {w:.2} {:.2}" font-family="sans-serif" font-size="12">"#,
        h + 20.0,
        h + 20.0
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}">{} in [{}, {}]</text>"#,
        h + 12.0,
        escape(title),
        tick_label(lo),
        tick_label(hi)
    );
    for tri in mesh.triangles() {
        let mean = tri.iter().map(|&v| values[v]).sum::<f64>() / 3.0;
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let (x, y) = map(mesh.node(v));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let c = color((mean - lo) / (hi - lo));
        let _ = writeln!(s, r#"<polygon points="{}" fill="{c}" stroke="{c}" stroke-width="0.3"/>"#, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let svg = line_plot("t", "x", "y", &[Series::new("a", vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)])]);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(r#"class="axes""#));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn constant_data_still_plots() {
        let svg = line_plot("t", "x", "y", &[Series::new("a", vec![(0.0, 0.0), (1.0, 0.0)])]);
        assert!(!svg.contains("NaN"));
    }
}
