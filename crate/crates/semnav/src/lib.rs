//! Std companion to `semnav-core`: building and grid file formats, JSON-lines
//! logs, the scenario runner, anchor-location reports and the HTTP service.

pub mod files;
pub mod grid_file;
pub mod jsonl;
pub mod locate;
pub mod scenario;
pub mod service;

pub use files::{load_building, parse_building, LoadError};
