//! Sample CSV and JSON outputs, written through temporary files and atomic renames.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lorentz_core::ensembles::EnsembleKind;
use lorentz_core::runner::SampleRecord;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{runtime, CliError, Result};

pub const SAMPLE_COLUMNS: [&str; 9] = ["stream_id", "counter", "ensemble", "d", "r", "tau", "xi", "censored", "cos_in"];

fn directory_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Fails unless every path could be created: the directory exists and accepts a new file.
pub fn preflight(paths: &[&Path]) -> Result<()> {
    for path in paths {
        if path.is_dir() {
            return Err(CliError::Config(format!("{} is a directory", path.display())));
        }
        let dir = directory_of(path);
        if !dir.is_dir() {
            return Err(CliError::Config(format!("output directory {} does not exist", dir.display())));
        }
        NamedTempFile::new_in(&dir)
            .map_err(|e| CliError::Config(format!("{} is not writable: {e}", dir.display())))?;
    }
    Ok(())
}

/// A fully written temporary file waiting to be renamed into place.
pub struct Staged {
    file: NamedTempFile,
    target: PathBuf,
}

impl Staged {
    pub fn new(target: &Path) -> Result<Self> {
        let file = NamedTempFile::new_in(directory_of(target)).map_err(runtime)?;
        Ok(Self { file, target: target.to_path_buf() })
    }

    pub fn writer(&mut self) -> BufWriter<&mut File> {
        BufWriter::new(self.file.as_file_mut())
    }

    pub fn commit(self) -> Result<()> {
        self.file.as_file().sync_all().map_err(runtime)?;
        self.file
            .persist(&self.target)
            .map_err(|e| CliError::Runtime(format!("cannot move output to {}: {}", self.target.display(), e.error)))?;
        Ok(())
    }
}

/// Commits all staged files, or none if any failed to stage.
pub fn commit_all(staged: Vec<Staged>) -> Result<()> {
    staged.into_iter().try_for_each(Staged::commit)
}

pub fn stage_bytes(target: &Path, bytes: &[u8]) -> Result<Staged> {
    let mut staged = Staged::new(target)?;
    {
        let mut w = staged.writer();
        w.write_all(bytes).map_err(runtime)?;
        w.flush().map_err(runtime)?;
    }
    Ok(staged)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(runtime)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes JSON to `path`, or to stdout when `path` is `None`.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let bytes = to_json(value)?;
    match path {
        Some(p) => {
            preflight(&[p])?;
            stage_bytes(p, &bytes)?.commit()
        }
        None => std::io::stdout().write_all(&bytes).map_err(runtime),
    }
}

pub fn stage_samples(target: &Path, kind: EnsembleKind, dim: usize, r: f64, records: &[SampleRecord]) -> Result<Staged> {
    let mut staged = Staged::new(target)?;
    {
        let mut w = csv::Writer::from_writer(staged.writer());
        w.write_record(SAMPLE_COLUMNS).map_err(runtime)?;
        let (d, r) = (dim.to_string(), r.to_string());
        for s in records {
            w.write_record([
                s.stream_id.to_string(),
                format!("{:#x}", s.counter),
                kind.as_str().to_string(),
                d.clone(),
                r.clone(),
                s.tau.to_string(),
                s.xi.to_string(),
                u8::from(s.censored).to_string(),
                s.cos_in.unwrap_or(f64::NAN).to_string(),
            ])
            .map_err(runtime)?;
        }
        w.flush().map_err(runtime)?;
    }
    Ok(staged)
}

/// A parsed sample file.
#[derive(Debug, Clone)]
pub struct SampleTable {
    pub ensemble: EnsembleKind,
    pub dim: usize,
    pub radius: f64,
    pub records: Vec<SampleRecord>,
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, line: u64, col: usize) -> Result<T> {
    let raw = row.get(col).unwrap_or("");
    raw.trim().parse().map_err(|_| {
        CliError::Input(format!("line {line}: column `{}` has invalid value `{raw}`", SAMPLE_COLUMNS[col]))
    })
}

pub fn read_samples(path: &Path) -> Result<SampleTable> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    for (i, expected) in SAMPLE_COLUMNS.iter().enumerate() {
        match header.get(i) {
            Some(h) if h.trim() == *expected => {}
            Some(h) => {
                return Err(CliError::Input(format!("column {}: expected `{expected}`, found `{h}`", i + 1)))
            }
            None => return Err(CliError::Input(format!("missing column `{expected}`"))),
        }
    }
    if header.len() > SAMPLE_COLUMNS.len() {
        return Err(CliError::Input(format!("unexpected column `{}`", &header[SAMPLE_COLUMNS.len()])));
    }
    let mut meta: Option<(EnsembleKind, usize, f64)> = None;
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| CliError::Input(format!("line {line}: {e}")))?;
        let counter_raw = row.get(1).unwrap_or("");
        let counter = u128::from_str_radix(counter_raw.trim().trim_start_matches("0x"), 16)
            .map_err(|_| CliError::Input(format!("line {line}: column `counter` has invalid value `{counter_raw}`")))?;
        let kind_raw = row.get(2).unwrap_or("");
        let kind = EnsembleKind::parse(kind_raw.trim())
            .ok_or_else(|| CliError::Input(format!("line {line}: column `ensemble` has invalid value `{kind_raw}`")))?;
        let dim: usize = field(&row, line, 3)?;
        let r: f64 = field(&row, line, 4)?;
        match meta {
            None => meta = Some((kind, dim, r)),
            Some(m) if m != (kind, dim, r) => {
                return Err(CliError::Input(format!("line {line}: ensemble, d and r must be constant")))
            }
            _ => {}
        }
        let censored = match row.get(7).map(str::trim) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(CliError::Input(format!(
                    "line {line}: column `censored` has invalid value `{}`",
                    other.unwrap_or("")
                )))
            }
        };
        let cos: f64 = field(&row, line, 8)?;
        records.push(SampleRecord {
            stream_id: field(&row, line, 0)?,
            counter,
            tau: field(&row, line, 5)?,
            xi: field(&row, line, 6)?,
            censored,
            cos_in: (!cos.is_nan()).then_some(cos),
        });
    }
    let (ensemble, dim, radius) = meta.ok_or_else(|| CliError::Input(format!("{} has no samples", path.display())))?;
    Ok(SampleTable { ensemble, dim, radius, records })
}

/// Rounds to 15 significant digits.
pub fn sig15(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}
