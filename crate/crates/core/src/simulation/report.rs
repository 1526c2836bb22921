use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

use super::StudyRow;

/// Writes the rejection-rate table as CSV with a header row.
pub fn write_csv<W: Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// A small line chart of rejection rate against `n1 + n2`, one line per
/// method and condition family, with the nominal level dashed.
pub fn plot_svg(rows: &[StudyRow], level: f64) -> String {
    let (w, h, pad) = (720.0, 440.0, 60.0);
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.rate.is_finite()) {
        let key = format!("{} {} k={} {}", r.method, r.matrix, r.k, r.scenario);
        series.entry(key).or_default().push(((r.n1 + r.n2) as f64, r.rate));
    }
    let xs = series.values().flatten().map(|p| p.0);
    let xmax = xs.clone().fold(1.0f64, f64::max);
    let xmin = xs.fold(xmax, f64::min);
    let ymax = series
        .values()
        .flatten()
        .map(|p| p.1)
        .fold(level * 2.0, f64::max)
        .min(1.0);
    let sx = |x: f64| pad + (x - xmin) / (xmax - xmin).max(1.0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - y / ymax * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{y0}" stroke="black"/>"#,
        y0 = h - pad,
        x1 = w - pad
    );
    for i in 0..=4 {
        let y = ymax * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            pad - 6.0,
            sy(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">n1 + n2</text><text x="{:.1}" y="{:.1}" text-anchor="middle">{xmin}</text><text x="{:.1}" y="{:.1}" text-anchor="middle">{xmax}</text>"#,
        w / 2.0,
        h - 20.0,
        sx(xmin),
        h - pad + 16.0,
        sx(xmax),
        h - pad + 16.0
    );
    let _ = writeln!(
        s,
        r##"<line x1="{pad}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#888" stroke-dasharray="4 4"/>"##,
        y = sy(level),
        x1 = w - pad
    );
    for (i, (name, pts)) in series.iter_mut().enumerate() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{colour}">{name}</text>"#,
            pad + 10.0,
            pad + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}
