//! Minimal static SVG renderings of the report data.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::WeekEstimate;

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bars, one per topic, scaled to the largest share.
pub(super) fn bars(labels: &[String], values: &[f64]) -> String {
    let (row, left, width) = (24.0, 140.0, 360.0);
    let height = row * values.len() as f64 + 20.0;
    let max = values.iter().cloned().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="12">"#,
        left + width + 60.0
    );
    for (i, (label, v)) in labels.iter().zip(values).enumerate() {
        let y = 10.0 + i as f64 * row;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + 14.0,
            escape(label)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{left:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            width * v / max,
            row - 6.0,
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{v:.3}</text>"#, left + width * v / max + 4.0, y + 14.0);
    }
    s.push_str("</svg>\n");
    s
}

/// One line per topic over weeks, with the band as a translucent area.
pub(super) fn week_lines(labels: &[String], rows: &[WeekEstimate]) -> String {
    let (w, h, pad) = (560.0, 300.0, 40.0);
    let weeks: Vec<u32> = rows.iter().map(|r| r.week).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let (first, last) = (weeks.first().copied().unwrap_or(1), weeks.last().copied().unwrap_or(1));
    let span = (last - first).max(1) as f64;
    let x = |week: u32| pad + (week - first) as f64 / span * (w - 2.0 * pad);
    let y = |v: f64| h - pad - v * (h - 2.0 * pad);

    let mut by_topic: BTreeMap<usize, Vec<&WeekEstimate>> = BTreeMap::new();
    for r in rows {
        by_topic.entry(r.topic).or_default().push(r);
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{0}" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    for week in &weeks {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{week}</text>"#, x(*week), h - pad + 14.0);
    }
    for (topic, pts) in &by_topic {
        let color = PALETTE[(topic - 1) % PALETTE.len()];
        let mut band = String::new();
        for p in pts.iter() {
            let _ = write!(band, "{:.1},{:.1} ", x(p.week), y(p.upper));
        }
        for p in pts.iter().rev() {
            let _ = write!(band, "{:.1},{:.1} ", x(p.week), y(p.lower));
        }
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2"/>"#, band.trim_end());
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", x(p.week), y(p.mean))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, line.join(" "));
        let label = labels.get(topic - 1).map_or(String::new(), |l| escape(l));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{label}</text>"#,
            w - pad + 4.0,
            pad + 14.0 * (*topic as f64 - 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}
