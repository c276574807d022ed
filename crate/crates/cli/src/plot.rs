//! Deterministic SVG charts. Coordinates are printed with fixed precision so
//! identical data always yields identical bytes.

use std::fmt::Write;

use pedsim::filterpipe::{Tag, TagDistribution};
use pedsim::metrics::MetricsReport;
use pedsim::trajectory::TrajectoryStats;

const W: f64 = 720.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#9c755f", "#76b7b2"];

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = W,
        h = H
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, num(W / 2.0), escape(title)).unwrap();
    let (x0, y0, x1) = (LEFT, H - BOTTOM, W - RIGHT);
    writeln!(s, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line class="axis" x1="{x0}" y1="{TOP}" x2="{x0}" y2="{y0}" stroke="black"/>"#).unwrap();
    s
}

fn legend(s: &mut String, i: usize, label: &str, color: &str) {
    let y = TOP + 10.0 + 20.0 * i as f64;
    let x = W - RIGHT + 15.0;
    writeln!(s, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#, num(y - 10.0)).unwrap();
    writeln!(s, r#"<text class="label" x="{}" y="{}">{}</text>"#, num(x + 18.0), num(y), escape(label)).unwrap();
}

fn y_ticks(s: &mut String, lo: f64, hi: f64) {
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = H - BOTTOM - (H - TOP - BOTTOM) * k as f64 / 4.0;
        writeln!(s, r#"<text class="tick" x="{}" y="{}" text-anchor="end">{}</text>"#, num(LEFT - 6.0), num(y + 4.0), num(v))
            .unwrap();
    }
}

/// Grouped bars: one group per behavior class, one bar per tag (multi-label counts).
pub fn tag_distribution_svg(d: &TagDistribution) -> String {
    let mut s = open("Motion tags by behavior class");
    let max = d.by_class.values().flat_map(|c| c.tags.values()).copied().max().unwrap_or(0);
    let scale = if max == 0 { 0.0 } else { (H - TOP - BOTTOM) / max as f64 };
    y_ticks(&mut s, 0.0, max as f64);
    let groups = d.by_class.len().max(1) as f64;
    let group_w = (W - LEFT - RIGHT) / groups;
    let bar_w = group_w * 0.8 / Tag::ALL.len() as f64;
    for (g, (class, counts)) in d.by_class.iter().enumerate() {
        let gx = LEFT + group_w * g as f64 + group_w * 0.1;
        writeln!(s, r#"<g class="group" data-class="{}">"#, escape(class)).unwrap();
        for (k, tag) in Tag::ALL.iter().enumerate() {
            let n = counts.tags.get(tag).copied().unwrap_or(0);
            let h = n as f64 * scale;
            writeln!(
                s,
                r#"<rect class="bar" data-tag="{tag}" data-count="{n}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                num(gx + bar_w * k as f64),
                num(H - BOTTOM - h),
                num(bar_w),
                num(h),
                PALETTE[k]
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text class="label" x="{}" y="{}" text-anchor="middle">{} (n={})</text>"#,
            num(gx + group_w * 0.4),
            num(H - BOTTOM + 18.0),
            escape(class),
            counts.motions
        )
        .unwrap();
        s.push_str("</g>\n");
    }
    for (k, tag) in Tag::ALL.iter().enumerate() {
        legend(&mut s, k, tag.label(), PALETTE[k]);
    }
    s.push_str("</svg>\n");
    s
}

/// Mean forward-displacement curve per class with a ±1 standard deviation band.
pub fn class_curves_svg(stats: &TrajectoryStats) -> String {
    let mut s = open("Forward displacement by behavior class");
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for c in &stats.classes {
        for (m, v) in c.mean.iter().zip(&c.variance) {
            lo = lo.min(m - v.sqrt());
            hi = hi.max(m + v.sqrt());
        }
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    y_ticks(&mut s, lo, hi);
    let n = stats.samples.max(2);
    let px = |i: usize| LEFT + (W - LEFT - RIGHT) * i as f64 / (n - 1) as f64;
    let py = |v: f64| H - BOTTOM - (H - TOP - BOTTOM) * (v - lo) / (hi - lo);
    for (k, c) in stats.classes.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let sd: Vec<f64> = c.variance.iter().map(|v| v.sqrt()).collect();
        let mut band = String::new();
        for (i, (m, d)) in c.mean.iter().zip(&sd).enumerate() {
            write!(band, "{}{},{} ", if i == 0 { "M" } else { "L" }, num(px(i)), num(py(m + d))).unwrap();
        }
        for (i, (m, d)) in c.mean.iter().zip(&sd).enumerate().rev() {
            write!(band, "L{},{} ", num(px(i)), num(py(m - d))).unwrap();
        }
        band.push('Z');
        let line: Vec<String> = c
            .mean
            .iter()
            .enumerate()
            .map(|(i, m)| format!("{}{},{}", if i == 0 { "M" } else { "L" }, num(px(i)), num(py(*m))))
            .collect();
        let class = c.class.label();
        writeln!(s, r#"<path class="band" data-class="{class}" d="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#).unwrap();
        writeln!(s, r#"<path class="series" data-class="{class}" d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "))
            .unwrap();
        legend(&mut s, k, &format!("{class} (n={})", c.count), color);
    }
    writeln!(
        s,
        r#"<text class="label" x="{}" y="{}" text-anchor="middle">normalized arc length</text>"#,
        num((LEFT + W - RIGHT) / 2.0),
        num(H - 12.0)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

/// One bar per summary metric, each scaled to its own panel.
pub fn report_svg(r: &MetricsReport) -> String {
    let mut s = open(&format!("Safety metrics: {}", r.model));
    let metrics: [(&str, Option<f64>); 4] = [
        ("collisions/km", Some(r.collisions_per_km)),
        ("pMAIS3+ (%)", Some(r.mean_pmais3 * 100.0)),
        ("FPBR", Some(r.fpbr)),
        ("ADE (m)", r.ade),
    ];
    let slot = (W - LEFT - RIGHT) / metrics.len() as f64;
    for (k, (name, value)) in metrics.iter().enumerate() {
        let v = value.unwrap_or(0.0);
        let h = (H - TOP - BOTTOM - 20.0) * v / v.max(1.0);
        let x = LEFT + slot * k as f64 + slot * 0.2;
        writeln!(
            s,
            r#"<rect class="bar" data-metric="{name}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            num(x),
            num(H - BOTTOM - h),
            num(slot * 0.6),
            num(h),
            PALETTE[k]
        )
        .unwrap();
        let text = value.map_or("-".to_string(), |v| format!("{v:.3}"));
        writeln!(s, r#"<text class="value" x="{}" y="{}" text-anchor="middle">{text}</text>"#, num(x + slot * 0.3), num(H - BOTTOM - h - 6.0))
            .unwrap();
        writeln!(s, r#"<text class="label" x="{}" y="{}" text-anchor="middle">{}</text>"#, num(x + slot * 0.3), num(H - BOTTOM + 18.0), escape(name))
            .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pedsim::filterpipe::tag_distribution;

    #[test]
    fn empty_distribution_has_zero_bars() {
        let svg = tag_distribution_svg(&tag_distribution(&[]));
        assert_eq!(svg.matches(r#"class="bar""#).count(), 15);
        assert!(svg.matches(r#"height="0.00""#).count() >= 15);
        assert!(!svg.contains("NaN"));
    }
}
