//! CSV and SVG output for run records and sweep tables.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Series, SweepTable};
use crate::error::ExperimentError;
use crate::measurement::{Granularity, MeasurementEvent, RunRecord};

pub const RECORD_HEADER: &str = "step,rho_rr,p_abs_inst,p_tot,trace";

#[derive(Serialize, Deserialize)]
struct Row {
    step: usize,
    rho_rr: f64,
    p_abs_inst: f64,
    p_tot: f64,
    trace: f64,
}

fn csv_err(path: &Path, e: csv::Error) -> ExperimentError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ExperimentError::io(path, source),
        kind => ExperimentError::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{kind:?}"),
        },
    }
}

/// Writes one record. The `step` column holds the step number for per-step
/// records and the pass count for per-pass records.
pub fn write_record_csv<W: io::Write>(w: W, record: &RunRecord) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if record.is_empty() {
        out.write_record(RECORD_HEADER.split(','))?;
    }
    for e in &record.events {
        out.serialize(Row {
            step: match record.granularity {
                Granularity::PerStep => e.step,
                Granularity::PerPass => e.passes,
            },
            rho_rr: e.rho_rr,
            p_abs_inst: e.p_abs_inst,
            p_tot: e.p_tot,
            trace: e.trace,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn record_csv_string(record: &RunRecord) -> String {
    let mut buf = Vec::new();
    write_record_csv(&mut buf, record).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn parse_record_csv<R: io::Read>(r: R, granularity: Granularity) -> csv::Result<RunRecord> {
    let mut reader = csv::Reader::from_reader(r);
    let mut record = RunRecord::new(granularity);
    for row in reader.deserialize() {
        let row: Row = row?;
        let (step, passes) = match granularity {
            Granularity::PerStep => (row.step, 2 * row.step),
            Granularity::PerPass => (row.step.div_ceil(2), row.step),
        };
        record.events.push(MeasurementEvent {
            step,
            passes,
            rho_rr: row.rho_rr,
            p_abs_inst: row.p_abs_inst,
            p_tot: row.p_tot,
            trace: row.trace,
        });
    }
    Ok(record)
}

pub fn read_record_csv(
    path: &Path,
    granularity: Granularity,
) -> Result<RunRecord, ExperimentError> {
    let file = fs::File::open(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_record_csv(file, granularity).map_err(|e| csv_err(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), ExperimentError> {
    fs::write(path, contents).map_err(|e| ExperimentError::io(path, e))
}

/// Writes `<name>_<tag>.csv` per series into `dir`, plus `<name>.svg` when
/// `svg` is set. Returns the written paths.
pub fn emit(
    dir: &Path,
    name: &str,
    series: &[Series],
    svg: bool,
) -> Result<Vec<PathBuf>, ExperimentError> {
    if series.is_empty() {
        return Err(ExperimentError::Config("nothing to emit".into()));
    }
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let mut written = Vec::new();
    for s in series {
        let path = dir.join(format!("{name}_{}.csv", s.model.tag()));
        write_file(&path, record_csv_string(&s.record).as_bytes())?;
        written.push(path);
    }
    if svg {
        let path = dir.join(format!("{name}.svg"));
        write_file(&path, render_svg(name, series).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn sweep_csv_string(table: &SweepTable) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = table
        .axis_names
        .iter()
        .map(|a| a.as_str())
        .chain([table.reducer.name()])
        .collect();
    out.write_record(&header).expect("writing to memory");
    for (coords, value) in &table.rows {
        let row: Vec<String> = coords
            .iter()
            .chain([value])
            .map(|v| v.to_string())
            .collect();
        out.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(out.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    write_file(path, sweep_csv_string(table).as_bytes())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Static line plot of `P_tot` against the event index for every series.
pub fn render_svg(title: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 150.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let t_max = series
        .iter()
        .map(|s| s.record.len())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let x = |t: f64| left + pw * t / t_max;
    let y = |p: f64| top + ph * (1.0 - p.clamp(0.0, 1.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{p}</text>"#,
            left - 6.0,
            y(p) + 4.0
        );
        let t = t_max * p;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x(t),
            top + ph + 16.0,
            t.round()
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">P_tot</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut points = format!("{},{}", x(0.0), y(0.0));
        for (i, e) in s.record.events.iter().enumerate() {
            let _ = write!(points, " {:.2},{:.2}", x((i + 1) as f64), y(e.p_tot));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{points}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#
        );
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.model.label())
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
