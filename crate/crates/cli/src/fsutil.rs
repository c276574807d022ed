use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub struct InputFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

/// A single file, or every file in a directory whose name ends with `suffix`, sorted by name.
pub fn list_inputs(root: &Path, suffix: &str) -> Result<Vec<PathBuf>, CliError> {
    let meta = fs::metadata(root).map_err(|e| CliError::Validation(format!("{}: {e}", root.display())))?;
    if meta.is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| CliError::Validation(format!("{}: {e}", root.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(suffix)))
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_inputs(root: &Path, suffix: &str) -> Result<Vec<InputFile>, CliError> {
    list_inputs(root, suffix)?
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            Ok(InputFile { path, bytes })
        })
        .collect()
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Processing(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Processing(format!("cannot write {}: {e}", path.display())))
}
