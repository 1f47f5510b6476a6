//! Report and trace files.

use std::fmt::Write as _;
use std::path::Path;

use super::json::{self, format_g17};
use super::{AnalysisReport, CurveTrace};
use crate::forms::Domain;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format {other:?}; expected json, csv or svg")),
        }
    }
}

fn num(v: f64) -> String {
    format_g17(v).unwrap_or_default()
}

/// One row per trace point: `curve_id,t,x,y,F`, with `F` empty when absent.
pub fn csv_traces(traces: &[CurveTrace]) -> String {
    let mut out = String::from("curve_id,t,x,y,F\n");
    for (id, trace) in traces.iter().enumerate() {
        for p in &trace.points {
            let f = p.f.map(num).unwrap_or_default();
            writeln!(out, "{id},{},{},{},{f}", num(p.t), num(p.x), num(p.y)).unwrap();
        }
    }
    out
}

const SVG_WIDTH: f64 = 800.0;

/// One polyline per trace, scaled to the rectangle; punctures are open
/// circles of the exclusion radius.
pub fn svg_traces(traces: &[CurveTrace], u: &Domain) -> String {
    let [xmin, xmax, ymin, ymax] = u.rect();
    let scale = SVG_WIDTH / (xmax - xmin);
    let height = (ymax - ymin) * scale;
    let sx = |x: f64| (x - xmin) * scale;
    let sy = |y: f64| (ymax - y) * scale;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{height:.3}" viewBox="0 0 {SVG_WIDTH} {height:.3}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{height:.3}" fill="white" stroke="black"/>"#
    )
    .unwrap();
    for q in u.punctures() {
        writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="red"/>"#,
            sx(q.x),
            sy(q.y),
            u.exclusion_radius() * scale
        )
        .unwrap();
    }
    for trace in traces {
        let pts: Vec<String> = trace
            .points
            .iter()
            .map(|p| format!("{:.3},{:.3}", sx(p.x), sy(p.y)))
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_report(report: &AnalysisReport, path: &Path) -> Result<(), Error> {
    std::fs::write(path, report.to_json())?;
    Ok(())
}

pub fn emit_traces(traces: &[CurveTrace], u: &Domain, format: Format, path: &Path) -> Result<(), Error> {
    let text = match format {
        Format::Json => json::to_string(traces),
        Format::Csv => csv_traces(traces),
        Format::Svg => svg_traces(traces, u),
    };
    std::fs::write(path, text)?;
    Ok(())
}
