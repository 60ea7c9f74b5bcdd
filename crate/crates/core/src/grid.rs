//! Semantic occupancy grid: every cell carries an occupancy probability, its
//! log-odds and a material class id.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::merge::{logodds, probability};

/// Material class identifier. `ClassId::UNKNOWN` (0) means "unclassified".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u8);

impl ClassId {
    pub const UNKNOWN: ClassId = ClassId(0);
}

/// Set of material classes a range sensor can see. Class 0 is always a member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassMask([u64; 4]);

impl ClassMask {
    /// Only the unknown class.
    pub fn unknown_only() -> Self {
        let mut m = ClassMask([0; 4]);
        m.insert(ClassId::UNKNOWN);
        m
    }

    pub fn all() -> Self {
        ClassMask([u64::MAX; 4])
    }

    pub fn from_ids<I: IntoIterator<Item = ClassId>>(ids: I) -> Self {
        let mut m = Self::unknown_only();
        for id in ids {
            m.insert(id);
        }
        m
    }

    pub fn insert(&mut self, id: ClassId) {
        self.0[usize::from(id.0 >> 6)] |= 1u64 << (id.0 & 63);
    }

    pub fn remove(&mut self, id: ClassId) {
        if id != ClassId::UNKNOWN {
            self.0[usize::from(id.0 >> 6)] &= !(1u64 << (id.0 & 63));
        }
    }

    pub fn contains(&self, id: ClassId) -> bool {
        id == ClassId::UNKNOWN || self.0[usize::from(id.0 >> 6)] & (1u64 << (id.0 & 63)) != 0
    }
}

/// Occupancy threshold used by every consumer of the grid.
pub const OCCUPIED_THRESHOLD: f64 = 0.5;
/// Prior for wall cells coming from the building model.
pub const P_OCCUPIED_PRIOR: f64 = 0.95;
/// Prior for free cells coming from the building model.
pub const P_FREE_PRIOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Occupancy probability in [0, 1].
    pub p: f64,
    pub class: ClassId,
    /// Log-odds of `p`.
    pub l: f64,
}

impl Cell {
    pub fn with_probability(p: f64, class: ClassId) -> Self {
        let l = logodds(p);
        Cell {
            p: probability(l),
            class,
            l,
        }
    }

    pub fn is_occupied(&self) -> bool {
        self.p >= OCCUPIED_THRESHOLD
    }
}

/// Integer cell coordinates: `i` is the column (x), `j` the row (y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticOccupancyGrid {
    resolution: f64,
    origin: Point2,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl SemanticOccupancyGrid {
    /// A grid with every cell at probability `p` and class 0.
    pub fn filled(resolution: f64, origin: Point2, width: usize, height: usize, p: f64) -> Self {
        assert!(resolution > 0.0, "grid resolution must be positive");
        SemanticOccupancyGrid {
            resolution,
            origin,
            width,
            height,
            cells: vec![Cell::with_probability(p, ClassId::UNKNOWN); width * height],
        }
    }

    /// Rebuilds a grid from raw cells (row-major, row 0 at `origin.y`).
    pub fn from_cells(resolution: f64, origin: Point2, width: usize, height: usize, cells: Vec<Cell>) -> Option<Self> {
        (resolution > 0.0 && cells.len() == width * height).then_some(SemanticOccupancyGrid {
            resolution,
            origin,
            width,
            height,
            cells,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn flat_index(&self, c: CellIndex) -> usize {
        c.j * self.width + c.i
    }

    pub fn index_of(&self, flat: usize) -> CellIndex {
        CellIndex::new(flat % self.width, flat / self.width)
    }

    pub fn cell(&self, c: CellIndex) -> &Cell {
        &self.cells[self.flat_index(c)]
    }

    /// Signed cell coordinates of a world point; may be outside the grid.
    pub fn world_to_cell_signed(&self, p: &Point2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    pub fn contains_signed(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    pub fn world_to_cell(&self, p: &Point2) -> Option<CellIndex> {
        let (i, j) = self.world_to_cell_signed(p);
        self.contains_signed(i, j)
            .then(|| CellIndex::new(i as usize, j as usize))
    }

    pub fn cell_center(&self, c: CellIndex) -> Point2 {
        Point2::new(
            self.origin.x + (c.i as f64 + 0.5) * self.resolution,
            self.origin.y + (c.j as f64 + 0.5) * self.resolution,
        )
    }

    /// Upper-right corner of the grid in world coordinates.
    pub fn extent(&self) -> Point2 {
        Point2::new(
            self.origin.x + self.width as f64 * self.resolution,
            self.origin.y + self.height as f64 * self.resolution,
        )
    }

    pub fn is_occupied(&self, c: CellIndex) -> bool {
        self.cell(c).is_occupied()
    }

    pub fn set_probability(&mut self, c: CellIndex, p: f64) {
        let idx = self.flat_index(c);
        let class = self.cells[idx].class;
        self.cells[idx] = Cell::with_probability(p, class);
    }

    /// Sets the log-odds of a cell and recomputes its probability.
    pub fn set_logodds(&mut self, c: CellIndex, l: f64) {
        let idx = self.flat_index(c);
        let cell = &mut self.cells[idx];
        cell.l = l;
        cell.p = probability(l);
    }

    pub fn set_class(&mut self, c: CellIndex, class: ClassId) {
        let idx = self.flat_index(c);
        self.cells[idx].class = class;
    }

    pub fn set_cell(&mut self, c: CellIndex, p: f64, class: ClassId) {
        let idx = self.flat_index(c);
        self.cells[idx] = Cell::with_probability(p, class);
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_occupied()).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.height).flat_map(move |j| (0..self.width).map(move |i| CellIndex::new(i, j)))
    }
}
