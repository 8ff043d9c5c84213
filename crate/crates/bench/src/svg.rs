//! Minimal static box plots.

use crate::report::Dist;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One box per labelled group: whiskers at min/max, box at the quartiles,
/// a line at the median and a dot at the mean.
pub fn box_plot(title: &str, y_label: &str, groups: &[(String, Dist)]) -> String {
    let (mut lo, mut hi) = groups
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, d)| (a.min(d.min), b.max(d.max)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    lo = lo.min(0.0);
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let plot_h = H - TOP - BOTTOM;
    let y = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        esc(y_label)
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"##,
            W - RIGHT,
            y(v),
            y(v),
            LEFT - 6.0,
            y(v) + 4.0
        );
    }
    if lo < 0.0 && hi > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
            W - RIGHT,
            y(0.0),
            y(0.0)
        );
    }
    let slot = (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    for (i, (label, d)) in groups.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let bw = (slot * 0.5).min(60.0);
        let _ = writeln!(
            s,
            r##"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="#333"/>"##,
            y(d.max),
            y(d.min)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{bw:.1}" height="{:.1}" fill="#9ecae1" stroke="#333"/>"##,
            cx - bw / 2.0,
            y(d.q3),
            (y(d.q1) - y(d.q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#08306b" stroke-width="2"/>"##,
            cx - bw / 2.0,
            cx + bw / 2.0,
            y(d.median),
            y(d.median)
        );
        let _ = writeln!(s, r##"<circle cx="{cx:.1}" cy="{:.1}" r="3" fill="#d62728"/>"##, y(d.mean));
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 18.0,
            esc(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_box_per_group() {
        let d = Dist::of(&[-10.0, 0.0, 20.0, 35.0]).unwrap();
        let svg = box_plot("gate <reduction>", "%", &[("2q/16g".into(), d), ("4q/16g".into(), d)]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect x=").count(), 2);
        assert!(svg.contains("gate &lt;reduction&gt;"));
        assert!(svg.contains("stroke-dasharray"));
        let empty = box_plot("none", "%", &[]);
        assert!(empty.ends_with("</svg>\n"));
    }
}
