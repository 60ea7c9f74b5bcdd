//! JSON document loading with field-path error messages.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use semnav_core::building::{BuildingDescription, BuildingError, BuildingGraph};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    /// `at` is the path of the offending field, e.g. `rooms[2].polygon[0]`.
    #[error("{path}: at `{at}`: {message}")]
    Parse { path: PathBuf, at: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: BuildingError },
}

/// Parses JSON into `T`, reporting the path of the field that failed.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| LoadError::Parse {
        path: origin.to_path_buf(),
        at: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Parses and validates a building description.
pub fn parse_building(text: &str, origin: &Path) -> Result<BuildingGraph, LoadError> {
    let desc: BuildingDescription = parse_json(text, origin)?;
    BuildingGraph::from_description(&desc).map_err(|source| LoadError::Invalid {
        path: origin.to_path_buf(),
        source,
    })
}

pub fn load_building(path: &Path) -> Result<BuildingGraph, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_building(&text, path)
}
