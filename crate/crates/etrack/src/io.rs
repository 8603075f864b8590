//! MOT Challenge files on disk.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use etrack_core::mot::{format_row, output_rows, parse_row, sort_rows, MotRow, RowError};
use etrack_core::scenario::Scenario;
use etrack_core::TrackerOutput;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MotIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}line {line}: {kind}: `{text}`", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        text: String,
        kind: RowError,
    },
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map(|p| format!("{}: ", p.display()))
        .unwrap_or_default()
}

impl MotIoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        MotIoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Reads rows from a stream, skipping blank lines. The result is sorted by
/// `(frame, id)`.
pub fn parse_mot_csv(reader: impl BufRead) -> Result<Vec<MotRow>, MotIoError> {
    let mut rows = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MotIoError::io(Path::new("<stream>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = parse_row(&line).map_err(|kind| MotIoError::Parse {
            path: None,
            line: index + 1,
            text: line.clone(),
            kind,
        })?;
        rows.push(row);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn read_mot_file(path: &Path) -> Result<Vec<MotRow>, MotIoError> {
    let file = File::open(path).map_err(|e| MotIoError::io(path, e))?;
    parse_mot_csv(BufReader::new(file)).map_err(|e| match e {
        MotIoError::Parse {
            line, text, kind, ..
        } => MotIoError::Parse {
            path: Some(path.to_path_buf()),
            line,
            text,
            kind,
        },
        MotIoError::Io { source, .. } => MotIoError::io(path, source),
    })
}

/// One line per row, in the given order.
pub fn write_mot_csv(rows: &[MotRow], mut out: impl Write) -> std::io::Result<()> {
    for row in rows {
        writeln!(out, "{}", format_row(row))?;
    }
    Ok(())
}

pub fn write_mot_file(path: &Path, rows: &[MotRow]) -> Result<(), MotIoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| MotIoError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| MotIoError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_mot_csv(rows, &mut out).map_err(|e| MotIoError::io(path, e))?;
    out.flush().map_err(|e| MotIoError::io(path, e))
}

/// Tracker output as a submission file, sorted by `(frame, id)`.
pub fn write_tracker_output(path: &Path, output: &TrackerOutput) -> Result<(), MotIoError> {
    write_mot_file(path, &output_rows(output))
}

/// File name used for a generated detector.
pub fn detector_file_name(name: &str) -> String {
    format!("det_{name}.txt")
}

/// Writes `gt/gt.txt` and one `det_<name>.txt` per detector under `dir`.
pub fn write_scenario(dir: &Path, scenario: &Scenario) -> Result<(), MotIoError> {
    write_mot_file(&dir.join("gt").join("gt.txt"), &scenario.ground_truth)?;
    for det in &scenario.detectors {
        write_mot_file(&dir.join(detector_file_name(&det.profile.name)), &det.rows)?;
    }
    Ok(())
}
