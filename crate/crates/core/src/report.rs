//! JSON, CSV, and Markdown rendering of evaluation reports.
//!
//! All real numbers are written with exactly six decimals and JSON keys are
//! sorted, so identical reports render to identical bytes.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::eval::EvaluationReport;
use crate::labels::EmotionLabel;

pub const CSV_HEADER: &str = "method,n_clips,accuracy,macro_f1,weighted_f1,macro_precision,macro_recall";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported report format `{0}` (expected json, csv, or md)")]
    UnsupportedFormat(String),
    #[error("cannot parse report: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Pretty JSON with every float written as `{:.6}`.
struct FixedDecimals(PrettyFormatter<'static>);

impl Formatter for FixedDecimals {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.6}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.6}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes any value as key-sorted JSON with six-decimal floats.
pub fn to_stable_json<T: Serialize>(value: &T) -> Vec<u8> {
    // Round-tripping through Value sorts object keys.
    let value = serde_json::to_value(value).expect("report values are serializable");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDecimals(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("writing to a Vec cannot fail");
    out.push(b'\n');
    out
}

pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => to_stable_json(report),
        ReportFormat::Csv => render_csv(report).into_bytes(),
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
    }
}

/// Renders by format name; fails on anything other than json/csv/md.
pub fn render_report_named(report: &EvaluationReport, format: &str) -> Result<Vec<u8>, ReportError> {
    Ok(render_report(report, format.parse()?))
}

pub fn parse_json_report(bytes: &[u8]) -> Result<EvaluationReport, ReportError> {
    Ok(serde_json::from_slice(bytes)?)
}

fn render_csv(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.per_method {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.method, r.n_clips, r.accuracy, r.macro_f1, r.weighted_f1, r.macro_precision, r.macro_recall
        )
        .unwrap();
    }
    out
}

fn render_markdown(report: &EvaluationReport) -> String {
    let mut out = String::new();
    out.push_str("# Evaluation report\n\n");
    writeln!(out, "Manifest digest: `{}`\n", report.manifest_digest).unwrap();
    out.push_str("| Method | Clips | Accuracy | Weighted F1 | Macro F1 | Macro Precision | Macro Recall |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for r in &report.per_method {
        writeln!(
            out,
            "| {} | {} | {:.6} | {:.6} | {:.6} | {:.6} | {:.6} |",
            r.method, r.n_clips, r.accuracy, r.weighted_f1, r.macro_f1, r.macro_precision, r.macro_recall
        )
        .unwrap();
    }

    let header: Vec<&str> = EmotionLabel::ALL.iter().map(|l| l.as_str()).collect();
    for r in &report.per_method {
        writeln!(out, "\n## Confusion matrix: {}\n", r.method).unwrap();
        writeln!(out, "| truth \\ predicted | {} |", header.join(" | ")).unwrap();
        writeln!(out, "|---|{}", "---:|".repeat(header.len())).unwrap();
        for (label, row) in EmotionLabel::ALL.iter().zip(r.confusion.0.iter()) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(out, "| {} | {} |", label, cells.join(" | ")).unwrap();
        }
    }
    out
}
