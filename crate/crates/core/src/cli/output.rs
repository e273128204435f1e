//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::CliError;
use crate::curve::{Curve, Point};

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes `alpha,x,y` rows. Numbers use the shortest round-trip form.
pub fn write_curve_csv<W: Write>(w: W, curve: &Curve) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(["alpha", "x", "y"])?;
    for (a, p) in curve.alphas.iter().zip(&curve.points) {
        out.write_record([a.to_string(), p.x.to_string(), p.y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads two named columns of a headed CSV file.
pub fn read_xy_csv(path: &Path, x_col: &str, y_col: &str) -> Result<Vec<Point>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Invalid(format!("{}: missing column '{name}'", path.display())))
    };
    let (ix, iy) = (find(x_col)?, find(y_col)?);
    let mut pts = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize, name: &str| -> Result<f64, CliError> {
            let cell = rec.get(i).unwrap_or("");
            cell.parse::<f64>().map_err(|_| {
                CliError::Invalid(format!("{}: row {}: column '{name}' is not a number: '{cell}'", path.display(), row + 2))
            })
        };
        pts.push(Point::new(parse(ix, x_col)?, parse(iy, y_col)?));
    }
    Ok(pts)
}

/// A polyline with its stroke colour.
pub struct Trace<'a> {
    pub points: &'a [Point],
    pub stroke: &'a str,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

/// Plots polylines with both axes into an SVG document. The output only
/// depends on the inputs, so equal inputs give equal bytes.
pub fn render_svg(traces: &[Trace]) -> String {
    let all = traces.iter().flat_map(|t| t.points.iter());
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in all {
        xlo = xlo.min(p.x);
        xhi = xhi.max(p.x);
        ylo = ylo.min(p.y);
        yhi = yhi.max(p.y);
    }
    let span = (xhi - xlo).max(yhi - ylo).max(1e-12);
    let k = (SIZE - 2.0 * MARGIN) / span;
    let w = (xhi - xlo) * k + 2.0 * MARGIN;
    let h = (yhi - ylo) * k + 2.0 * MARGIN;
    let px = |x: f64| (x - xlo) * k + MARGIN;
    let py = |y: f64| (yhi - y) * k + MARGIN;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<g class="axes" stroke="#888888" stroke-width="1"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/></g>"##,
        MARGIN / 2.0,
        py(0.0),
        w - MARGIN / 2.0,
        py(0.0),
        px(0.0),
        h - MARGIN / 2.0,
        px(0.0),
        MARGIN / 2.0
    );
    for t in traces {
        let mut pts = String::new();
        for (i, p) in t.points.iter().enumerate() {
            if i > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.3},{:.3}", px(p.x), py(p.y));
        }
        let _ = writeln!(
            s,
            r#"<polyline class="branch" fill="none" stroke="{}" stroke-width="1.5" points="{pts}"/>"#,
            t.stroke
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Splits a sampled loop at its leftmost and rightmost samples into the
/// two branches, each including both turning points.
pub fn branches(points: &[Point]) -> (Vec<Point>, Vec<Point>) {
    let mut pts = points.to_vec();
    if pts.len() > 1 && pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    let n = pts.len();
    if n < 2 {
        return (pts.clone(), pts);
    }
    let imin = (0..n).min_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x)).unwrap_or(0);
    let imax = (0..n).max_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x)).unwrap_or(0);
    let walk = |from: usize, to: usize| {
        let mut v = vec![pts[from]];
        let mut i = from;
        while i != to {
            i = (i + 1) % n;
            v.push(pts[i]);
        }
        v
    };
    (walk(imin, imax), walk(imax, imin))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
