//! Experiment runner for hearability sweeps: configuration, execution and
//! CSV output shared by the `hearability` binary and its tests.

pub mod config;
pub mod output;
pub mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

pub use config::{Method, RunConfig};
pub use output::{render, Row, Table};
pub use run::{run, Command, FigureName, Output};

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Renders `output`, with a timestamp line unless `timestamp` is false.
pub fn render_output(output: &Output, timestamp: bool) -> String {
    render(&output.table, timestamp.then(unix_now))
}

/// Path of the plot script written next to `csv`.
pub fn plot_path(csv: &Path) -> PathBuf {
    csv.with_extension("py")
}

/// Writes the CSV to `path` and, when `plot` is set, a matplotlib script
/// next to it. Returns the script path if one was written.
pub fn write_output(output: &Output, path: &Path, timestamp: bool, plot: bool) -> Result<Option<PathBuf>> {
    fs::write(path, render_output(output, timestamp)).with_context(|| format!("writing {}", path.display()))?;
    if !plot {
        return Ok(None);
    }
    let file = |p: &Path| {
        p.file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let script_path = plot_path(path);
    let script = output::plot_script(
        &output.table,
        output.axis,
        output.ylabel,
        &file(path),
        &file(&path.with_extension("png")),
    );
    fs::write(&script_path, script).with_context(|| format!("writing {}", script_path.display()))?;
    Ok(Some(script_path))
}
