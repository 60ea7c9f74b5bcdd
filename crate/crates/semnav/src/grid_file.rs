//! Grid export: an 8-bit PGM image of the occupancy plane plus a JSON sidecar
//! carrying the class and log-odds planes, from which the grid is rebuilt
//! exactly.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use semnav_core::geometry::Point2;
use semnav_core::grid::{Cell, ClassId, SemanticOccupancyGrid};
use semnav_core::merge::probability;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::files::{read_json, write_json, LoadError};

/// Full grid contents. Planes are row-major with row 0 at `origin.y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSnapshot {
    pub resolution: f64,
    pub origin: Point2,
    pub width: usize,
    pub height: usize,
    /// File name of the PGM image, when written next to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub classes: Vec<u8>,
    pub logodds: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum GridFileError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}: plane sizes do not match width x height")]
    Shape(PathBuf),
}

impl GridSnapshot {
    pub fn of(grid: &SemanticOccupancyGrid) -> Self {
        GridSnapshot {
            resolution: grid.resolution(),
            origin: grid.origin(),
            width: grid.width(),
            height: grid.height(),
            image: None,
            classes: grid.cells().iter().map(|c| c.class.0).collect(),
            logodds: grid.cells().iter().map(|c| c.l).collect(),
        }
    }

    pub fn to_grid(&self) -> Option<SemanticOccupancyGrid> {
        if self.classes.len() != self.logodds.len() {
            return None;
        }
        let cells = self
            .classes
            .iter()
            .zip(&self.logodds)
            .map(|(&class, &l)| Cell {
                p: probability(l),
                class: ClassId(class),
                l,
            })
            .collect();
        SemanticOccupancyGrid::from_cells(self.resolution, self.origin, self.width, self.height, cells)
    }
}

/// Binary PGM, top row first. Free space is white, occupied black.
pub fn write_pgm<W: Write>(grid: &SemanticOccupancyGrid, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", grid.width(), grid.height())?;
    let w = grid.width();
    let mut row = vec![0u8; w];
    for j in (0..grid.height()).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            let p = grid.cells()[j * w + i].p;
            *px = ((1.0 - p) * 255.0).round().clamp(0.0, 255.0) as u8;
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// Writes `<prefix>.pgm` and `<prefix>.json`; returns both paths.
pub fn export_grid(grid: &SemanticOccupancyGrid, prefix: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let pgm = prefix.with_extension("pgm");
    let json = prefix.with_extension("json");
    let mut bytes = Vec::new();
    write_pgm(grid, &mut bytes)?;
    fs::write(&pgm, bytes)?;
    let mut snap = GridSnapshot::of(grid);
    snap.image = pgm.file_name().map(|n| n.to_string_lossy().into_owned());
    write_json(&json, &snap)?;
    Ok((pgm, json))
}

/// Rebuilds a grid from its JSON sidecar.
pub fn import_grid(sidecar: &Path) -> Result<SemanticOccupancyGrid, GridFileError> {
    let snap: GridSnapshot = read_json(sidecar)?;
    snap.to_grid()
        .ok_or_else(|| GridFileError::Shape(sidecar.to_path_buf()))
}
