use crate::error::{Result, SsamgError};
use crate::grid::{Index3, SemiStructGrid};

pub type Offset = [i64; 3];

pub const CENTER: Offset = [0, 0, 0];

/// Marker for a stencil target that leaves the part.
pub const MASKED: u32 = u32::MAX;

/// Position of `o` inside the 27-point envelope.
#[inline]
pub fn envelope_index(o: Offset) -> usize {
    ((o[0] + 1) + 3 * (o[1] + 1) + 9 * (o[2] + 1)) as usize
}

#[inline]
pub fn envelope_offset(idx: usize) -> Offset {
    let i = idx as i64;
    [i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1]
}

#[inline]
pub fn shift(cell: Index3, o: Offset) -> Index3 {
    [cell[0] + o[0], cell[1] + o[1], cell[2] + o[2]]
}

/// An ordered set of distinct offsets in `{-1, 0, 1}^3` that includes the center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilShape {
    offsets: Vec<Offset>,
    center: usize,
}

impl StencilShape {
    pub fn new(offsets: Vec<Offset>) -> Result<Self> {
        if offsets.len() > 27 {
            return Err(SsamgError::InvalidStencil(format!("{} offsets", offsets.len())));
        }
        let mut seen = [false; 27];
        for o in &offsets {
            if o.iter().any(|c| !(-1..=1).contains(c)) {
                return Err(SsamgError::InvalidStencil(format!("offset {o:?} out of range")));
            }
            let e = envelope_index(*o);
            if seen[e] {
                return Err(SsamgError::InvalidStencil(format!("duplicate offset {o:?}")));
            }
            seen[e] = true;
        }
        let center = offsets
            .iter()
            .position(|o| *o == CENTER)
            .ok_or_else(|| SsamgError::InvalidStencil("missing center offset".into()))?;
        Ok(StencilShape { offsets, center })
    }

    /// Center, then -i, +i, -j, +j, -k, +k.
    pub fn seven_point() -> Self {
        Self::new(vec![
            [0, 0, 0],
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ])
        .unwrap()
    }

    pub fn five_point() -> Self {
        Self::new(vec![[0, 0, 0], [-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0]]).unwrap()
    }

    /// Every offset of the 9-point (2D) or 27-point (3D) envelope, in envelope order.
    pub fn full(ndim: usize) -> Self {
        let offsets = (0..27)
            .map(envelope_offset)
            .filter(|o| ndim == 3 || o[2] == 0)
            .collect();
        Self::new(offsets).unwrap()
    }

    pub fn identity() -> Self {
        Self::new(vec![CENTER]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn index_of(&self, o: Offset) -> Option<usize> {
        self.offsets.iter().position(|x| *x == o)
    }
}

/// Stencil coefficients of one part. Coefficients are stored cell-major in
/// part-local cell order: `coeffs[cell * len + s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartStencil {
    shape: StencilShape,
    coeffs: Vec<f64>,
    targets: Vec<u32>,
}

impl PartStencil {
    pub fn shape(&self) -> &StencilShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn row(&self, local: usize) -> &[f64] {
        let n = self.shape.len();
        &self.coeffs[local * n..(local + 1) * n]
    }

    /// Part-local target of each stencil entry of `local`, [`MASKED`] when
    /// the target lies outside the part.
    #[inline]
    pub fn row_targets(&self, local: usize) -> &[u32] {
        let n = self.shape.len();
        &self.targets[local * n..(local + 1) * n]
    }

    pub fn num_cells(&self) -> usize {
        self.coeffs.len() / self.shape.len()
    }
}

/// Structured component `S` of a semi-structured matrix.
///
/// Entries whose target leaves the part are kept but never applied; inter-part
/// coupling lives in the unstructured component.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilMatrix {
    parts: Vec<PartStencil>,
}

impl StencilMatrix {
    pub fn new(grid: &SemiStructGrid, parts: Vec<(StencilShape, Vec<f64>)>) -> Result<Self> {
        if parts.len() != grid.num_parts() {
            return Err(SsamgError::DimensionMismatch {
                expected: grid.num_parts(),
                got: parts.len(),
            });
        }
        let mut out = Vec::with_capacity(parts.len());
        for (p, (shape, coeffs)) in parts.into_iter().enumerate() {
            let part = grid.part(p);
            let n = shape.len();
            if coeffs.len() != part.num_cells() * n {
                return Err(SsamgError::DimensionMismatch {
                    expected: part.num_cells() * n,
                    got: coeffs.len(),
                });
            }
            if grid.ndim() == 2 && shape.offsets().iter().any(|o| o[2] != 0) {
                return Err(SsamgError::InvalidStencil("3D offset in a 2D grid".into()));
            }
            let mut targets = Vec::with_capacity(coeffs.len());
            for cell in part.cells() {
                for o in shape.offsets() {
                    targets.push(
                        part.local_index(shift(cell, *o))
                            .map(|t| t as u32)
                            .unwrap_or(MASKED),
                    );
                }
            }
            out.push(PartStencil { shape, coeffs, targets });
        }
        Ok(StencilMatrix { parts: out })
    }

    /// One-offset identity stencil on every part.
    pub fn identity(grid: &SemiStructGrid) -> Self {
        let parts = (0..grid.num_parts())
            .map(|p| (StencilShape::identity(), vec![1.0; grid.part(p).num_cells()]))
            .collect();
        Self::new(grid, parts).unwrap()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, p: usize) -> &PartStencil {
        &self.parts[p]
    }

    pub fn parts(&self) -> &[PartStencil] {
        &self.parts
    }

    /// `y += S x` on global vectors.
    pub fn apply_add(&self, grid: &SemiStructGrid, x: &[f64], y: &mut [f64]) {
        for (p, ps) in self.parts.iter().enumerate() {
            let range = grid.part_range(p);
            let xp = &x[range.clone()];
            let yp = &mut y[range];
            let n = ps.shape.len();
            for (local, yv) in yp.iter_mut().enumerate() {
                let c = &ps.coeffs[local * n..(local + 1) * n];
                let t = &ps.targets[local * n..(local + 1) * n];
                let mut acc = 0.0;
                for s in 0..n {
                    if t[s] != MASKED {
                        acc += c[s] * xp[t[s] as usize];
                    }
                }
                *yv += acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trip() {
        for i in 0..27 {
            assert_eq!(envelope_index(envelope_offset(i)), i);
        }
        assert_eq!(envelope_index(CENTER), 13);
    }

    #[test]
    fn shape_validation() {
        assert!(StencilShape::new(vec![[1, 0, 0]]).is_err());
        assert!(StencilShape::new(vec![[0, 0, 0], [2, 0, 0]]).is_err());
        assert!(StencilShape::new(vec![[0, 0, 0], [0, 0, 0]]).is_err());
        assert_eq!(StencilShape::full(3).len(), 27);
        assert_eq!(StencilShape::full(2).len(), 9);
        assert_eq!(StencilShape::seven_point().center(), 0);
    }
}
