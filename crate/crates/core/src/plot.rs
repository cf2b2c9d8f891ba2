//! Interval plots as plain SVG text.
//!
//! Each row is a 400×60 panel with a horizontal [0, 1] axis: green for
//! [0, 0.5), red for [0.5, 1], a purple band over the interval and a blue
//! tick at the point prediction. Output depends only on the input rows, so
//! identical predictions give byte-identical files.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use thiserror::Error;

use crate::decision::Outcome;
use crate::harness::PredictionRow;

pub const GREEN: &str = "#2ca02c";
pub const RED: &str = "#d62728";
pub const PURPLE: &str = "#9467bd";
pub const BLUE: &str = "#1f77b4";

pub const ROW_WIDTH: u32 = 400;
pub const ROW_HEIGHT: u32 = 60;
/// The axis spans x = 20..380.
pub const AXIS_X0: f64 = 20.0;
pub const AXIS_WIDTH: f64 = 360.0;
const BAR_Y: f64 = 22.0;
const BAR_H: f64 = 16.0;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("malformed prediction rows at lines {lines:?}: {first}")]
    Malformed { lines: Vec<u64>, first: String },
    #[error("prediction file has no rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Horizontal pixel position of probability `p`.
pub fn axis_x(p: f64) -> f64 {
    AXIS_X0 + p.clamp(0.0, 1.0) * AXIS_WIDTH
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn row_group(out: &mut String, row: &PredictionRow, y0: f64) {
    let (x0, mid, x1) = (axis_x(0.0), axis_x(0.5), axis_x(1.0));
    let y = y0 + BAR_Y;
    let _ = writeln!(
        out,
        r#"<text x="{x0:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{} {} p={:.3} [{:.3}, {:.3}] {}</text>"#,
        y0 + 14.0,
        escape(&row.participant_id),
        row.date,
        row.p_hat,
        row.lo,
        row.hi,
        row.outcome
    );
    let _ = writeln!(
        out,
        r#"<rect class="no-uti" x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{BAR_H:.2}" fill="{GREEN}"/>"#,
        mid - x0
    );
    let _ = writeln!(
        out,
        r#"<rect class="uti" x="{mid:.2}" y="{y:.2}" width="{:.2}" height="{BAR_H:.2}" fill="{RED}"/>"#,
        x1 - mid
    );
    let (lo, hi) = (axis_x(row.lo), axis_x(row.hi));
    let _ = writeln!(
        out,
        r#"<rect class="interval" x="{lo:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{PURPLE}" fill-opacity="0.85"/>"#,
        y + 3.0,
        hi - lo,
        BAR_H - 6.0
    );
    let px = axis_x(row.p_hat);
    let _ = writeln!(
        out,
        r#"<line class="p-hat" x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{BLUE}" stroke-width="2"/>"#,
        y - 3.0,
        y + BAR_H + 3.0
    );
    let ty = y + BAR_H + 14.0;
    for (p, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ty:.2}" font-family="sans-serif" font-size="9" text-anchor="middle">{label}</text>"#,
            axis_x(p)
        );
    }
}

/// Vertical stack of rows, one 400×60 panel each.
pub fn strip_svg(rows: &[PredictionRow]) -> String {
    let h = ROW_HEIGHT as usize * rows.len().max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{ROW_WIDTH}" height="{h}" viewBox="0 0 {ROW_WIDTH} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{ROW_WIDTH}" height="{h}" fill="white"/>"#);
    for (i, row) in rows.iter().enumerate() {
        row_group(&mut out, row, (i as u32 * ROW_HEIGHT) as f64);
    }
    out.push_str("</svg>\n");
    out
}

pub fn interval_svg(row: &PredictionRow) -> String {
    strip_svg(std::slice::from_ref(row))
}

/// Reads a `participant_id,date,p_hat,lo,hi,outcome,label` file. Every bad
/// row is collected so the error lists all offending line numbers.
pub fn read_predictions<R: Read>(reader: R) -> Result<Vec<PredictionRow>, PlotError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let expected = ["participant_id", "date", "p_hat", "lo", "hi", "outcome", "label"];
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(PlotError::Malformed {
            lines: vec![1],
            first: format!("header must be {}", expected.join(",")),
        });
    }
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    let mut first = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        match parse_prediction(&rec) {
            Ok(r) => rows.push(r),
            Err(msg) => {
                bad.push(line);
                first.get_or_insert(format!("line {line}: {msg}"));
            }
        }
    }
    if let Some(first) = first {
        return Err(PlotError::Malformed { lines: bad, first });
    }
    if rows.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok(rows)
}

fn parse_prediction(rec: &csv::StringRecord) -> Result<PredictionRow, String> {
    if rec.len() != 7 {
        return Err(format!("expected 7 fields, found {}", rec.len()));
    }
    let prob = |i: usize, name: &str| -> Result<f64, String> {
        match rec[i].trim().parse::<f64>() {
            Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
            _ => Err(format!("{name} `{}` is not a probability", &rec[i])),
        }
    };
    let date =
        NaiveDate::parse_from_str(rec[1].trim(), "%Y-%m-%d").map_err(|_| format!("bad date `{}`", &rec[1]))?;
    let (p_hat, lo, hi) = (prob(2, "p_hat")?, prob(3, "lo")?, prob(4, "hi")?);
    if lo > hi {
        return Err(format!("lo {lo} exceeds hi {hi}"));
    }
    let outcome = Outcome::parse(rec[5].trim()).ok_or_else(|| format!("bad outcome `{}`", &rec[5]))?;
    let label = match rec[6].trim() {
        "0" => 0,
        "1" => 1,
        other => return Err(format!("bad label `{other}`")),
    };
    Ok(PredictionRow {
        participant_id: rec[0].trim().to_string(),
        date,
        p_hat,
        lo,
        hi,
        outcome,
        label,
    })
}

/// Writes `<stem>_rowNNN.svg` per row and `<stem>_strip.svg`.
pub fn write_plots(rows: &[PredictionRow], out_dir: &Path, stem: &str) -> Result<Vec<PathBuf>, PlotError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| PlotError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut written = Vec::with_capacity(rows.len() + 1);
    for (i, row) in rows.iter().enumerate() {
        let path = out_dir.join(format!("{stem}_row{i:03}.svg"));
        std::fs::write(&path, interval_svg(row)).map_err(io(&path))?;
        written.push(path);
    }
    let path = out_dir.join(format!("{stem}_strip.svg"));
    std::fs::write(&path, strip_svg(rows)).map_err(io(&path))?;
    written.push(path);
    Ok(written)
}
