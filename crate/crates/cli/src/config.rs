//! Optional JSON config file. Values here sit between command-line flags
//! (which win) and built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pedsim::filterpipe::Tag;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::fsutil::read_file;

pub const CONFIG_DIR_ENV: &str = "PEDSIM_CONFIG_DIR";
pub const CONFIG_FILE_NAME: &str = "pedsim.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub keywords: Option<Vec<String>>,
    pub tags: Option<BTreeMap<Tag, Vec<String>>>,
    pub attempt_min: Option<f64>,
    pub cross_min: Option<f64>,
    pub resample_hz: Option<f64>,
    pub stats_samples: Option<usize>,
    pub skeleton_map: Option<PathBuf>,
    pub planner: Option<String>,
    pub tick: Option<f64>,
    pub threads: Option<usize>,
}

/// `explicit` if given, else `$PEDSIM_CONFIG_DIR/pedsim.json` when that file exists.
pub fn load(explicit: Option<&Path>, env_dir: Option<&Path>) -> Result<FileConfig, CliError> {
    let path = match (explicit, env_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(dir)) if dir.join(CONFIG_FILE_NAME).is_file() => dir.join(CONFIG_FILE_NAME),
        _ => return Ok(FileConfig::default()),
    };
    let bytes = read_file(&path)?;
    pedsim::io::from_json(&bytes).map_err(|e| CliError::from(e).in_file(&path))
}
