//! Result tables (CSV), reports (JSON) and polyline diagrams (SVG).
//!
//! Floats are written as `{:.16e}`: 17 significant digits, so every value
//! re-parses to the same `f64`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::FeatureScan;
use crate::geometry::Vec3;
use crate::strata::StratumLocus;

/// Certificate columns of the feature table, empty when a record lacks them.
pub const FEATURE_COLUMNS: [&str; 7] = ["kappa", "tau", "tau_prime", "vertex_reg", "twist_cert", "interval_lo", "interval_hi"];

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::Io(e.to_string()))?
        .flush()
        .map_err(|e| Error::Io(e.to_string()))
}

/// `kind,t,residual,source` followed by [`FEATURE_COLUMNS`].
pub fn write_feature_csv<W: Write>(out: W, scan: &FeatureScan) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["kind", "t", "residual", "source"];
    header.extend(FEATURE_COLUMNS);
    w.write_record(&header).map_err(csv_error)?;
    for f in &scan.features {
        let mut row = vec![
            f.kind.name().to_string(),
            format_f64(f.t),
            format_f64(f.residual),
            f.source.clone(),
        ];
        row.extend(
            FEATURE_COLUMNS
                .iter()
                .map(|c| f.certificates.get(*c).map(|v| format_f64(*v)).unwrap_or_default()),
        );
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

/// `t,x,y,z`.
pub fn write_polyline_csv<W: Write>(out: W, points: &[(f64, Vec3)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x", "y", "z"]).map_err(csv_error)?;
    for (t, p) in points {
        w.write_record([format_f64(*t), format_f64(p.x), format_f64(p.y), format_f64(p.z)])
            .map_err(csv_error)?;
    }
    finish(w)
}

/// `stratum,s1,s2,residual`, one row per locus point.
pub fn write_loci_csv<W: Write>(out: W, loci: &[StratumLocus]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stratum", "s1", "s2", "residual"]).map_err(csv_error)?;
    for l in loci {
        for (p, r) in l.polyline.iter().zip(&l.residuals) {
            w.write_record([
                l.stratum.name().to_string(),
                format_f64(p[0]),
                format_f64(p[1]),
                format_f64(*r),
            ])
            .map_err(csv_error)?;
        }
    }
    finish(w)
}

/// `name,value`.
pub fn write_named_values_csv<W: Write>(out: W, rows: &[(&str, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["name", "value"]).map_err(csv_error)?;
    for (n, v) in rows {
        w.write_record([n.to_string(), format_f64(*v)]).map_err(csv_error)?;
    }
    finish(w)
}

/// `component,order,coefficient` for the Taylor coefficients of `x, y, z`.
pub fn write_jet_csv<W: Write>(out: W, components: &[&[f64]; 3]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["component", "order", "coefficient"]).map_err(csv_error)?;
    for (name, c) in ["x", "y", "z"].iter().zip(components) {
        for (k, v) in c.iter().enumerate() {
            w.write_record([name.to_string(), k.to_string(), format_f64(*v)]).map_err(csv_error)?;
        }
    }
    finish(w)
}

/// Header and rows of a CSV table, each cell kept as text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column; empty cells become `None`.
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self
            .column(name)
            .ok_or_else(|| Error::Schema(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| match r[i].as_str() {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|e| Error::Schema(format!("column `{name}`: {s:?}: {e}"))),
            })
            .collect()
    }
}

pub fn read_csv<R: Read>(input: R) -> Result<Table> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()).map_err(csv_error))
        .collect::<Result<_>>()?;
    Ok(Table { header, rows })
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n").map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPolyline {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

impl LabeledPolyline {
    pub fn new(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

impl From<&StratumLocus> for LabeledPolyline {
    fn from(l: &StratumLocus) -> Self {
        Self::new(l.stratum.name(), l.polyline.clone())
    }
}

/// Axis-aligned rectangle in data coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Viewport {
    /// Bounding box of all finite points, `None` when there are none.
    pub fn fit(lines: &[LabeledPolyline]) -> Option<Self> {
        let mut pts = lines
            .iter()
            .flat_map(|l| l.points.iter())
            .filter(|p| p[0].is_finite() && p[1].is_finite());
        let first = *pts.next()?;
        let mut v = Self {
            min: first,
            max: first,
        };
        for p in pts {
            for i in 0..2 {
                v.min[i] = v.min[i].min(p[i]);
                v.max[i] = v.max[i].max(p[i]);
            }
        }
        Some(v)
    }

    /// Grown by `fraction` of the larger side on every edge; degenerate sides
    /// are widened to the other side or to 1.
    fn with_margin(self, fraction: f64) -> Self {
        let w = self.max[0] - self.min[0];
        let h = self.max[1] - self.min[1];
        let side = w.max(h);
        let side = if side > 0.0 { side } else { 1.0 };
        let pad = |len: f64| if len > 0.0 { 0.0 } else { 0.5 * side };
        let (px, py) = (pad(w) + fraction * side, pad(h) + fraction * side);
        Self {
            min: [self.min[0] - px, self.min[1] - py],
            max: [self.max[0] + px, self.max[1] + py],
        }
    }
}

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];
pub const SVG_MARGIN: f64 = 0.05;
/// Jumps longer than this multiple of the median spacing may break a path.
const GAP_MEDIAN_FACTOR: f64 = 4.0;
/// Consecutive points farther apart than this fraction of the viewport
/// diagonal start a new subpath.
const GAP_FRACTION: f64 = 0.05;

fn num(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Standalone SVG of the polylines with the data y-axis pointing up.
///
/// Polylines with two or more points become one `path` each, single points a
/// `circle`. Colors follow the order in which labels first appear.
pub fn render_svg(lines: &[LabeledPolyline], viewport: Option<Viewport>) -> Result<String> {
    if !lines.iter().any(|l| l.points.len() >= 2) {
        return Err(Error::EmptyPlot);
    }
    let vp = viewport
        .or_else(|| Viewport::fit(lines))
        .ok_or(Error::EmptyPlot)?
        .with_margin(SVG_MARGIN);
    let (w, h) = (vp.max[0] - vp.min[0], vp.max[1] - vp.min[1]);
    let gap = GAP_FRACTION * w.hypot(h);
    let unit = w.max(h) / 400.0;

    let mut labels: Vec<&str> = Vec::new();
    for l in lines {
        if !labels.contains(&l.label.as_str()) {
            labels.push(&l.label);
        }
    }
    let color = |label: &str| PALETTE[labels.iter().position(|l| *l == label).unwrap_or(0) % PALETTE.len()];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        num(vp.min[0]),
        num(-vp.max[1]),
        num(w),
        num(h),
        num((800.0 * h / w).round()),
    );
    let stroke = num(unit);
    if vp.min[1] <= 0.0 && vp.max[1] >= 0.0 {
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="{}" y1="0" x2="{}" y2="0" stroke="#888888" stroke-width="{stroke}"/>"##,
            num(vp.min[0]),
            num(vp.max[0]),
        );
    }
    if vp.min[0] <= 0.0 && vp.max[0] >= 0.0 {
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="0" y1="{}" x2="0" y2="{}" stroke="#888888" stroke-width="{stroke}"/>"##,
            num(-vp.max[1]),
            num(-vp.min[1]),
        );
    }
    for l in lines {
        let pts: Vec<&[f64; 2]> = l.points.iter().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
        match pts.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    s,
                    r#"<circle data-label="{}" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                    l.label,
                    num(pts[0][0]),
                    num(-pts[0][1]),
                    num(3.0 * unit),
                    color(&l.label),
                );
            }
            _ => {
                let step = |a: &[f64; 2], b: &[f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
                let mut steps: Vec<f64> = pts.windows(2).map(|w| step(w[0], w[1])).collect();
                steps.sort_by(f64::total_cmp);
                // A jump breaks the path only if it is long both on the plot and
                // against the polyline's own median spacing.
                let limit = gap.max(GAP_MEDIAN_FACTOR * steps[steps.len() / 2]);
                let mut d = String::new();
                let mut prev: Option<&[f64; 2]> = None;
                for p in pts {
                    let cmd = match prev {
                        Some(q) if step(p, q) <= limit => 'L',
                        _ => 'M',
                    };
                    if !d.is_empty() {
                        d.push(' ');
                    }
                    let _ = write!(d, "{cmd}{},{}", num(p[0]), num(-p[1]));
                    prev = Some(p);
                }
                let _ = writeln!(
                    s,
                    r#"<path data-label="{}" d="{d}" fill="none" stroke="{}" stroke-width="{stroke}"/>"#,
                    l.label,
                    color(&l.label),
                );
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_polyline_is_one_path() {
        let svg = render_svg(&[LabeledPolyline::new("a", vec![[0.0, 0.0], [1.0, 2.0]])], None).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains("viewBox=\"-0.1 -2.1 1.2 2.2\""), "{svg}");
        // y is flipped
        assert!(svg.contains("L1,-2"));
    }

    #[test]
    fn nothing_drawable() {
        assert!(matches!(render_svg(&[], None), Err(Error::EmptyPlot)));
        let single = [LabeledPolyline::new("C", vec![[0.0, 0.0]])];
        assert!(matches!(render_svg(&single, None), Err(Error::EmptyPlot)));
    }

    #[test]
    fn colors_follow_label_order() {
        let lines = [
            LabeledPolyline::new("F", vec![[0.0, 0.0], [1.0, 1.0]]),
            LabeledPolyline::new("V", vec![[0.0, 0.0], [1.0, 0.9]]),
            LabeledPolyline::new("C", vec![[0.0, 0.0]]),
        ];
        let svg = render_svg(&lines, None).unwrap();
        assert!(svg.contains(&format!("data-label=\"F\" d=\"M0,0 L1,-1\" fill=\"none\" stroke=\"{}\"", PALETTE[0])));
        assert!(svg.contains(PALETTE[1]) && svg.contains(PALETTE[2]));
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg, render_svg(&lines, None).unwrap());
    }

    #[test]
    fn csv_floats_round_trip() {
        let pts = vec![(0.1, Vec3::new(1.0 / 3.0, -2e-300, 6.02e23)), (f64::MIN_POSITIVE, Vec3::new(0.0, -0.0, 1.0))];
        let mut buf = Vec::new();
        write_polyline_csv(&mut buf, &pts).unwrap();
        let t = read_csv(buf.as_slice()).unwrap();
        assert_eq!(t.header, ["t", "x", "y", "z"]);
        let x = t.numbers("x").unwrap();
        assert_eq!(x[0], Some(1.0 / 3.0));
        assert_eq!(t.numbers("t").unwrap()[1], Some(f64::MIN_POSITIVE));
        assert_eq!(t.numbers("z").unwrap()[0], Some(6.02e23));
    }
}
