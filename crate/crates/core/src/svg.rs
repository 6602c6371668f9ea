//! Minimal SVG charts for the report emitters.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub(crate) struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    /// Draw a polyline through the points as well as markers.
    pub line: bool,
    /// Hollow markers, used for invalid rows.
    pub hollow: Vec<bool>,
}

impl<'a> Series<'a> {
    pub fn new(label: &'a str, points: Vec<(f64, f64)>, line: bool) -> Self {
        let n = points.len();
        Series { label, points, line, hollow: vec![false; n] }
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let d = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - d, hi + d);
    }
    let m = (hi - lo) * 0.05;
    (lo - m, hi + m)
}

/// Scatter/line chart with axis labels and a legend.
pub(crate) fn xy_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let mut s = header(title);
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    axes(&mut s, xlabel, ylabel, (x0, x1), (y0, y1));
    for (i, ser) in series.iter().enumerate() {
        let col = COLORS[i % COLORS.len()];
        if ser.line && ser.points.len() > 1 {
            let pts: Vec<String> = ser.points.iter().map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{col}" points="{}"/>"#, pts.join(" "));
        }
        for (j, p) in ser.points.iter().enumerate() {
            let fill = if ser.hollow.get(j).copied().unwrap_or(false) { "white" } else { col };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{fill}" stroke="{col}"/>"#,
                sx(p.0),
                sy(p.1)
            );
        }
        let ly = 40.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{col}"/>"#, W - 170.0, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, W - 155.0, esc(ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, xlabel: &str, ylabel: &str, (x0, x1): (f64, f64), (y0, y1): (f64, f64)) {
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let x = PAD + f * (W - 2.0 * PAD);
        let y = H - PAD - f * (H - 2.0 * PAD);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, H - PAD + 16.0, tick(x0 + f * (x1 - x0)));
        let _ = writeln!(s, r#"<text x="{}" y="{y:.1}" text-anchor="end">{}</text>"#, PAD - 4.0, tick(y0 + f * (y1 - y0)));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 20.0, esc(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 0.01 || v.abs() >= 1e5) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Stacked bars: one bar per group, one segment per category.
pub(crate) fn stacked_bars(title: &str, groups: &[(String, Vec<f64>)], categories: &[&str]) -> String {
    let mut s = header(title);
    let max = groups.iter().map(|g| g.1.iter().sum::<f64>()).fold(0.0, f64::max).max(1e-300);
    let n = groups.len().max(1) as f64;
    let bw = (W - 2.0 * PAD) / n * 0.6;
    axes(&mut s, "", "", (0.0, n), (0.0, max));
    for (gi, (name, vals)) in groups.iter().enumerate() {
        let x = PAD + (gi as f64 + 0.2) / n * (W - 2.0 * PAD);
        let mut y = H - PAD;
        for (ci, v) in vals.iter().enumerate() {
            let h = v / max * (H - 2.0 * PAD);
            y -= h;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bw:.1}" height="{h:.1}" fill="{}"/>"#,
                COLORS[ci % COLORS.len()]
            );
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, x + bw / 2.0, H - PAD + 30.0, esc(name));
    }
    for (ci, c) in categories.iter().enumerate() {
        let ly = 40.0 + 16.0 * ci as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, W - 170.0, ly - 9.0, COLORS[ci % COLORS.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, W - 155.0, esc(c));
    }
    s.push_str("</svg>\n");
    s
}

/// Grid heatmap, values normalized to the maximum; `grid[row][col]`, row 0 at the bottom.
pub(crate) fn heatmap(title: &str, grid: &[Vec<f64>]) -> String {
    let mut s = header(title);
    let rows = grid.len().max(1);
    let cols = grid.iter().map(|r| r.len()).max().unwrap_or(1).max(1);
    let max = grid.iter().flatten().copied().fold(0.0, f64::max).max(1e-300);
    let cw = (W - 2.0 * PAD) / cols as f64;
    let ch = (H - 2.0 * PAD) / rows as f64;
    for (r, row) in grid.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let t = (v / max).clamp(0.0, 1.0);
            let red = (255.0 * t) as u8;
            let blue = (255.0 * (1.0 - t)) as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="rgb({red},64,{blue})"/>"#,
                PAD + c as f64 * cw,
                H - PAD - (r + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Filled rectangles in a `width × height` world frame, y up; the last field picks the color.
pub(crate) fn boxes(title: &str, width: f64, height: f64, rects: &[(f64, f64, f64, f64, usize)]) -> String {
    let mut s = header(title);
    let k = ((W - 2.0 * PAD) / width.max(1e-300)).min((H - 2.0 * PAD) / height.max(1e-300));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        H - PAD - height * k,
        width * k,
        height * k
    );
    for &(x, y, w, h, c) in rects {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.7" stroke="white" stroke-width="0.3"/>"#,
            PAD + x * k,
            H - PAD - (y + h) * k,
            w * k,
            h * k,
            COLORS[c % COLORS.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_closed_documents() {
        let xy = xy_chart("t", "x", "y", &[Series::new("a", vec![(0.0, 1.0), (1.0, 2.0)], true)]);
        assert!(xy.starts_with("<svg") && xy.trim_end().ends_with("</svg>"));
        assert_eq!(xy.matches("<circle").count(), 2);
        let bars = stacked_bars("b", &[("g".into(), vec![1.0, 2.0])], &["p", "q"]);
        assert!(bars.contains("</svg>"));
        let hm = heatmap("h", &[vec![0.0, 1.0], vec![2.0, 3.0]]);
        assert_eq!(hm.matches("<rect").count(), 5);
        assert!(xy_chart("<&>", "", "", &[]).contains("&lt;&amp;&gt;"));
        assert_eq!(boxes("p", 10.0, 5.0, &[(0.0, 0.0, 1.0, 1.0, 0)]).matches("<rect").count(), 3);
    }
}
