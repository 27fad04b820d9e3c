use std::fmt::Write;

use bellwb::analysis::Fig1Row;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One polyline per party count plus a dashed line at its large-`M` limit.
pub fn fig1_svg(rows: &[Fig1Row]) -> String {
    let mut parties: Vec<usize> = rows.iter().map(|r| r.n_parties).collect();
    parties.dedup();
    let m_min = rows.iter().map(|r| r.n_settings).min().unwrap_or(2) as f64;
    let m_max = rows.iter().map(|r| r.n_settings).max().unwrap_or(3).max(3) as f64;
    let y_max = rows
        .iter()
        .flat_map(|r| [r.violation_factor, r.limit])
        .fold(1.0f64, f64::max)
        * 1.05;
    let x = |m: f64| MARGIN + (m - m_min) / (m_max - m_min) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x(m_min), x(m_max), y(0.0), y(y_max));
    let _ = writeln!(
        out,
        r#"<polyline points="{x0:.2},{y1:.2} {x0:.2},{y0:.2} {x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="gray" stroke-width="0.5"/>"#,
        y(1.0),
        y(1.0)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">settings per party M</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.2}" transform="rotate(-90 15 {:.2})" text-anchor="middle" font-size="14">violation factor V(N,M)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (m, label) in [(m_min, m_min), (m_max, m_max)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{label}</text>"#,
            x(m),
            y0 + 18.0
        );
    }
    for v in [0.0, 1.0, y_max / 1.05] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{v:.2}</text>"#,
            x0 - 6.0,
            y(v) + 4.0
        );
    }

    for (k, n) in parties.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let curve: Vec<&Fig1Row> = rows.iter().filter(|r| r.n_parties == *n).collect();
        let points: Vec<String> = curve
            .iter()
            .map(|r| format!("{:.2},{:.2}", x(r.n_settings as f64), y(r.violation_factor)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
        let limit = curve[0].limit;
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6,4"/>"#,
            y(limit),
            y(limit)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" fill="{color}">N = {n}</text>"#,
            x1 + 6.0,
            y(limit) + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_one_curve_and_asymptote_per_party_count() {
        let rows = bellwb::analysis::fig1_data(&[2, 3], 10).unwrap();
        let svg = fig1_svg(&rows);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-width=\"2\"").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
    }
}
