//! CSV and JSON metadata persistence.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::experiments::{Report, Table};

pub fn write_table<W: Write>(table: &Table, sink: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `results.csv` → `results.<suffix>`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Metadata document. Keys are emitted in sorted order; only `timestamp`
/// varies between identical runs.
pub fn metadata(report: &Report, cfg: &RunConfig, out: Option<&Path>, timestamp: u64) -> Value {
    let mut echo = cfg.clone();
    echo.output = None;
    let mut outputs = serde_json::Map::new();
    if let Some(out) = out {
        outputs.insert("table".into(), json!(file_name(out)));
        for (suffix, _) in &report.sidecars {
            outputs.insert(
                (*suffix).into(),
                json!(file_name(&sibling_path(out, &format!("{suffix}.csv")))),
            );
        }
    }
    json!({
        "experiment": report.experiment.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": echo,
        "header": report.table.header,
        "row_count": report.table.rows.len(),
        "rows": report.row_details,
        "tolerances": report.tolerances,
        "flags": report.flags,
        "extra": report.extra,
        "non_adiabatic_ratios": report.non_adiabatic_ratios,
        "threshold_failures": report.failures,
        "outputs": outputs,
        "timestamp": timestamp,
    })
}

/// Writes the table to `out` (stdout when absent) plus, for file output, the
/// sidecar tables and `<stem>.meta.json`.
pub fn write_report(report: &Report, cfg: &RunConfig, out: Option<&Path>, timestamp: u64) -> Result<(), CliError> {
    match out {
        None => {
            let stdout = std::io::stdout();
            write_table(&report.table, stdout.lock())?;
        }
        Some(path) => {
            write_table(&report.table, std::fs::File::create(path)?)?;
            for (suffix, table) in &report.sidecars {
                write_table(
                    table,
                    std::fs::File::create(sibling_path(path, &format!("{suffix}.csv")))?,
                )?;
            }
            let meta = metadata(report, cfg, Some(path), timestamp);
            let mut text = serde_json::to_string_pretty(&meta)?;
            text.push('\n');
            std::fs::write(sibling_path(path, "meta.json"), text)?;
        }
    }
    Ok(())
}
