use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::Path;

use padfair_core::{parse_manifest, parse_scores, SampleManifest, ScoreSet};
use tempfile::NamedTempFile;

use crate::error::CliError;

pub fn load_manifest(path: &Path) -> Result<SampleManifest, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    parse_manifest(BufReader::new(file)).map_err(CliError::input(path))
}

pub fn load_scores(path: &Path, manifest: Option<&SampleManifest>) -> Result<ScoreSet, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    parse_scores(BufReader::new(file), manifest).map_err(CliError::input(path))
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(CliError::io(dir))?;
    {
        let mut buffered = io::BufWriter::new(tmp.as_file_mut());
        write(&mut buffered).map_err(CliError::io(path))?;
        buffered.flush().map_err(CliError::io(path))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path)(e.error))?;
    Ok(())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, |w| w.write_all(bytes))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => write_bytes(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(CliError::io(Path::new("<stdout>")))
        }
    }
}

pub fn to_json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}
