//! Index spaces, boxes, parts and semi-structured grids.
//!
//! Every part lives in its own integer index space. Cells are numbered
//! globally by part id, then box order within the part, then lexicographically
//! inside each box with `i` running fastest.

use std::ops::Range;

use crate::error::{Result, SsamgError};

pub type Index3 = [i64; 3];

/// An axis-aligned range of cells `lower..=upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoxIdx {
    pub lower: Index3,
    pub upper: Index3,
}

impl BoxIdx {
    pub fn new(lower: Index3, upper: Index3) -> Result<Self> {
        if (0..3).any(|d| lower[d] > upper[d]) {
            return Err(SsamgError::InvalidGrid(format!(
                "box lower {lower:?} exceeds upper {upper:?}"
            )));
        }
        Ok(BoxIdx { lower, upper })
    }

    /// Cube `[0, n-1]^3`.
    pub fn cube(n: i64) -> Self {
        BoxIdx { lower: [0, 0, 0], upper: [n - 1, n - 1, n - 1] }
    }

    pub fn extent(&self, d: usize) -> i64 {
        self.upper[d] - self.lower[d] + 1
    }

    pub fn volume(&self) -> usize {
        (0..3).map(|d| self.extent(d) as usize).product()
    }

    pub fn contains(&self, cell: Index3) -> bool {
        (0..3).all(|d| cell[d] >= self.lower[d] && cell[d] <= self.upper[d])
    }

    /// Position of `cell` in this box's lexicographic ordering.
    #[inline]
    pub fn offset_of(&self, cell: Index3) -> Option<usize> {
        if !self.contains(cell) {
            return None;
        }
        let nx = self.extent(0);
        let ny = self.extent(1);
        let i = cell[0] - self.lower[0];
        let j = cell[1] - self.lower[1];
        let k = cell[2] - self.lower[2];
        Some((i + nx * (j + ny * k)) as usize)
    }

    pub fn cell_at(&self, offset: usize) -> Index3 {
        let nx = self.extent(0) as usize;
        let ny = self.extent(1) as usize;
        let i = offset % nx;
        let j = (offset / nx) % ny;
        let k = offset / (nx * ny);
        [
            self.lower[0] + i as i64,
            self.lower[1] + j as i64,
            self.lower[2] + k as i64,
        ]
    }

    pub fn cells(&self) -> impl Iterator<Item = Index3> + '_ {
        (0..self.volume()).map(move |o| self.cell_at(o))
    }

    pub fn intersects(&self, other: &BoxIdx) -> bool {
        (0..3).all(|d| self.lower[d] <= other.upper[d] && other.lower[d] <= self.upper[d])
    }

    /// Keep the cells with an even coordinate in `dir` and halve that coordinate.
    /// Returns `None` when the box holds no even coordinate in `dir`.
    pub fn coarsen_even(&self, dir: usize) -> Option<BoxIdx> {
        let mut out = *self;
        out.lower[dir] = ceil_half(self.lower[dir]);
        out.upper[dir] = floor_half(self.upper[dir]);
        (out.lower[dir] <= out.upper[dir]).then_some(out)
    }
}

#[inline]
pub fn floor_half(x: i64) -> i64 {
    x.div_euclid(2)
}

#[inline]
pub fn ceil_half(x: i64) -> i64 {
    -((-x).div_euclid(2))
}

/// Coarsen a box by a factor of two in `dir`.
///
/// Surviving cells are those with even coordinate in `dir`; a box of width
/// one in `dir` keeps width one (mapped to `floor(lower/2)`).
pub fn coarsen_box(b: &BoxIdx, dir: usize) -> BoxIdx {
    match b.coarsen_even(dir) {
        Some(c) => c,
        None => {
            let mut c = *b;
            c.lower[dir] = floor_half(b.lower[dir]);
            c.upper[dir] = c.lower[dir];
            c
        }
    }
}

/// Componentwise min of lowers and max of uppers.
pub fn bounding_box(part: &Part) -> BoxIdx {
    bounding_box_of(&part.boxes)
}

pub fn bounding_box_of(boxes: &[BoxIdx]) -> BoxIdx {
    let mut bb = boxes[0];
    for b in &boxes[1..] {
        for d in 0..3 {
            bb.lower[d] = bb.lower[d].min(b.lower[d]);
            bb.upper[d] = bb.upper[d].max(b.upper[d]);
        }
    }
    bb
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub id: usize,
    pub boxes: Vec<BoxIdx>,
    box_offsets: Vec<usize>,
}

impl Part {
    pub fn num_cells(&self) -> usize {
        *self.box_offsets.last().unwrap()
    }

    /// Part-local index of `cell`.
    #[inline]
    pub fn local_index(&self, cell: Index3) -> Option<usize> {
        self.boxes
            .iter()
            .zip(&self.box_offsets)
            .find_map(|(b, off)| b.offset_of(cell).map(|o| off + o))
    }

    pub fn contains(&self, cell: Index3) -> bool {
        self.boxes.iter().any(|b| b.contains(cell))
    }

    pub fn cell_at(&self, local: usize) -> Index3 {
        let bi = self.box_offsets.partition_point(|&o| o <= local) - 1;
        self.boxes[bi].cell_at(local - self.box_offsets[bi])
    }

    /// Cells in part-local order.
    pub fn cells(&self) -> impl Iterator<Item = Index3> + '_ {
        self.boxes.iter().flat_map(|b| b.cells())
    }

    pub fn box_offsets(&self) -> &[usize] {
        &self.box_offsets
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiStructGrid {
    ndim: usize,
    parts: Vec<Part>,
    part_offsets: Vec<usize>,
}

impl SemiStructGrid {
    /// Build a grid from per-part box lists. Part ids are the list positions.
    pub fn new(ndim: usize, part_boxes: Vec<Vec<BoxIdx>>) -> Result<Self> {
        if !(ndim == 2 || ndim == 3) {
            return Err(SsamgError::InvalidGrid(format!("unsupported dimension {ndim}")));
        }
        if part_boxes.is_empty() {
            return Err(SsamgError::InvalidGrid("grid has no parts".into()));
        }
        let mut parts = Vec::with_capacity(part_boxes.len());
        let mut part_offsets = vec![0];
        for (id, boxes) in part_boxes.into_iter().enumerate() {
            if boxes.is_empty() {
                return Err(SsamgError::InvalidGrid(format!("part {id} has no boxes")));
            }
            for b in &boxes {
                if (0..3).any(|d| b.lower[d] > b.upper[d]) {
                    return Err(SsamgError::InvalidGrid(format!("inverted box {b:?}")));
                }
                if ndim == 2 && (b.lower[2] != 0 || b.upper[2] != 0) {
                    return Err(SsamgError::InvalidGrid(format!(
                        "2D box {b:?} must have k = 0"
                    )));
                }
            }
            for (a, ba) in boxes.iter().enumerate() {
                for bb in &boxes[a + 1..] {
                    if ba.intersects(bb) {
                        return Err(SsamgError::InvalidGrid(format!(
                            "boxes {ba:?} and {bb:?} of part {id} overlap"
                        )));
                    }
                }
            }
            let mut box_offsets = vec![0];
            for b in &boxes {
                box_offsets.push(box_offsets.last().unwrap() + b.volume());
            }
            part_offsets.push(part_offsets.last().unwrap() + box_offsets.last().unwrap());
            parts.push(Part { id, boxes, box_offsets });
        }
        Ok(SemiStructGrid { ndim, parts, part_offsets })
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn part(&self, p: usize) -> &Part {
        &self.parts[p]
    }

    pub fn num_cells(&self) -> usize {
        *self.part_offsets.last().unwrap()
    }

    pub fn part_offset(&self, p: usize) -> usize {
        self.part_offsets[p]
    }

    pub fn part_range(&self, p: usize) -> Range<usize> {
        self.part_offsets[p]..self.part_offsets[p + 1]
    }

    /// Global row index of `cell` in part `part`.
    pub fn global_index(&self, part: usize, cell: Index3) -> Result<usize> {
        self.try_global_index(part, cell)
            .ok_or(SsamgError::OutOfGrid { part, cell })
    }

    #[inline]
    pub fn try_global_index(&self, part: usize, cell: Index3) -> Option<usize> {
        self.parts
            .get(part)?
            .local_index(cell)
            .map(|l| self.part_offsets[part] + l)
    }

    /// Inverse of [`global_index`](Self::global_index).
    pub fn cell_of(&self, global: usize) -> (usize, Index3) {
        let p = self.part_offsets.partition_point(|&o| o <= global) - 1;
        (p, self.parts[p].cell_at(global - self.part_offsets[p]))
    }

    pub fn part_of(&self, global: usize) -> usize {
        self.part_offsets.partition_point(|&o| o <= global) - 1
    }

    pub fn bounding_boxes(&self) -> Vec<BoxIdx> {
        self.parts.iter().map(bounding_box).collect()
    }
}
