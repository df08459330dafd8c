//! CSV tables, SVG plots and run manifests.

pub mod manifest;
pub mod svg;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{DistortionReport, Spectrum};
use crate::trainer::ErrorCurve;

pub use manifest::RunManifest;
pub use svg::{LinePlot, Series};

/// Writes a header plus `rows`; refuses to create the file when `rows` is
/// empty.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyData(path.to_path_buf()));
    }
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if text.is_empty() {
        return Err(Error::EmptyData(path.to_path_buf()));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn spectrum_rows(s: &Spectrum) -> Vec<Vec<String>> {
    s.freqs
        .iter()
        .zip(s.power_db())
        .map(|(f, db)| vec![f.to_string(), db.to_string()])
        .collect()
}

pub fn write_spectrum_csv(path: &Path, s: &Spectrum) -> Result<()> {
    write_csv(path, &["freq_hz", "power_db"], &spectrum_rows(s))
}

pub fn write_curve_csv(path: &Path, curve: &ErrorCurve) -> Result<()> {
    let rows: Vec<Vec<String>> = curve
        .errors
        .iter()
        .enumerate()
        .map(|(e, v)| vec![e.to_string(), v.to_string()])
        .collect();
    write_csv(path, &["epoch", "test_error"], &rows)
}

/// One `epoch` column plus one column per curve. Curves must share a length.
pub fn write_comparison_csv(path: &Path, curves: &[ErrorCurve]) -> Result<()> {
    let len = curves.first().map_or(0, |c| c.errors.len());
    if curves.iter().any(|c| c.errors.len() != len) {
        return Err(Error::InvalidConfig("curves differ in length".into()));
    }
    let mut header = vec!["epoch"];
    header.extend(curves.iter().map(|c| c.label.as_str()));
    let rows: Vec<Vec<String>> = (0..len)
        .map(|e| {
            std::iter::once(e.to_string())
                .chain(curves.iter().map(|c| c.errors[e].to_string()))
                .collect()
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub fn distortion_rows(label: &str, r: &DistortionReport) -> Vec<Vec<String>> {
    r.peaks
        .iter()
        .map(|p| {
            vec![
                label.to_string(),
                p.kind.label().to_string(),
                p.freq_hz.to_string(),
                p.power_db.to_string(),
            ]
        })
        .collect()
}

pub fn distortion_text(label: &str, r: &DistortionReport) -> String {
    let mut s = format!("[{label}]\n");
    s += &format!("signal_hz            = {}\n", r.signal_hz);
    s += &format!("signal_power_db      = {:.3}\n", r.signal_power_db);
    s += &format!("noise_floor_db       = {:.3}\n", r.noise_floor_db);
    s += &format!("signal_above_floor   = {:.3} dB\n", r.signal_above_floor_db());
    s += &format!("distortion_power_db  = {:.3}\n", r.distortion_power_db);
    s += &format!("distortion_peaks     = {}\n", r.distortion_count());
    for p in r.distortion_peaks().take(12) {
        s += &format!("  {:>10.2} Hz  {:>9.3} dB\n", p.freq_hz, p.power_db);
    }
    s
}

/// Per-regime summary for a comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSummary {
    pub label: String,
    pub final_error: f64,
    pub best_epoch: usize,
    pub best_error: f64,
    /// First epoch at which this curve reaches the dropout curve's final error.
    pub epochs_to_dropout_final: Option<usize>,
}

pub fn summarize(curves: &[ErrorCurve]) -> Vec<CurveSummary> {
    let dropout_final = curves.iter().find(|c| c.label == "dropout").map(|c| c.final_error());
    curves
        .iter()
        .map(|c| {
            let (best_epoch, best_error) = c.best();
            CurveSummary {
                label: c.label.clone(),
                final_error: c.final_error(),
                best_epoch,
                best_error,
                epochs_to_dropout_final: dropout_final.and_then(|t| c.first_epoch_reaching(t)),
            }
        })
        .collect()
}

pub fn write_summary_csv(path: &Path, summary: &[CurveSummary]) -> Result<()> {
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                s.final_error.to_string(),
                s.best_epoch.to_string(),
                s.best_error.to_string(),
                s.epochs_to_dropout_final.map_or(String::new(), |e| e.to_string()),
            ]
        })
        .collect();
    write_csv(
        path,
        &["regime", "final_error", "best_epoch", "best_error", "epochs_to_dropout_final"],
        &rows,
    )
}

pub fn summary_table(summary: &[CurveSummary]) -> String {
    let mut s = format!(
        "{:<26}{:>12}{:>12}{:>12}{:>25}\n",
        "regime", "final_err%", "best_epoch", "best_err%", "reaches_dropout_final_at"
    );
    let mut ranked: Vec<&CurveSummary> = summary.iter().collect();
    ranked.sort_by(|a, b| a.final_error.total_cmp(&b.final_error));
    for c in ranked {
        s += &format!(
            "{:<26}{:>12.2}{:>12}{:>12.2}{:>25}\n",
            c.label,
            100.0 * c.final_error,
            c.best_epoch,
            100.0 * c.best_error,
            c.epochs_to_dropout_final.map_or("-".to_string(), |e| e.to_string())
        );
    }
    s
}
