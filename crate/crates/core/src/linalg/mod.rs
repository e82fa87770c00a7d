//! Structured, unstructured and semi-structured matrices and vectors.

mod sparse;
mod stencil;

use std::sync::Arc;

use nalgebra::DMatrix;

pub use sparse::RowSparseMatrix;
pub use stencil::{
    envelope_index, envelope_offset, shift, Offset, PartStencil, StencilMatrix, StencilShape,
    CENTER, MASKED,
};

use crate::error::{Result, SsamgError};
use crate::grid::SemiStructGrid;

/// Default row cap for dense assembly.
pub const DENSE_CAP: usize = 4096;

/// Anything that can compute `y = A x` on flat vectors.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for RowSparseMatrix {
    fn nrows(&self) -> usize {
        self.n_rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Values on the cells of a semi-structured grid, in global row order.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiStructVector {
    grid: Arc<SemiStructGrid>,
    values: Vec<f64>,
}

impl SemiStructVector {
    pub fn zeros(grid: Arc<SemiStructGrid>) -> Self {
        let n = grid.num_cells();
        SemiStructVector { grid, values: vec![0.0; n] }
    }

    pub fn from_values(grid: Arc<SemiStructGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(SsamgError::DimensionMismatch {
                expected: grid.num_cells(),
                got: values.len(),
            });
        }
        Ok(SemiStructVector { grid, values })
    }

    pub fn grid(&self) -> &Arc<SemiStructGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of one box of one part.
    pub fn box_values(&self, part: usize, b: usize) -> &[f64] {
        let base = self.grid.part_offset(part);
        let offs = self.grid.part(part).box_offsets();
        &self.values[base + offs[b]..base + offs[b + 1]]
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }
}

pub(crate) fn same_grid(a: &Arc<SemiStructGrid>, b: &Arc<SemiStructGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A = S + U`: stencil couplings inside parts plus sparse couplings between them.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiStructMatrix {
    grid: Arc<SemiStructGrid>,
    s: StencilMatrix,
    u: RowSparseMatrix,
}

impl SemiStructMatrix {
    pub fn new(grid: Arc<SemiStructGrid>, s: StencilMatrix, u: RowSparseMatrix) -> Result<Self> {
        let n = grid.num_cells();
        if u.n_rows() != n || u.n_cols() != n {
            return Err(SsamgError::DimensionMismatch { expected: n, got: u.n_rows() });
        }
        if s.num_parts() != grid.num_parts() {
            return Err(SsamgError::DimensionMismatch {
                expected: grid.num_parts(),
                got: s.num_parts(),
            });
        }
        if let Some((i, _, _)) = u.triplets().find(|&(i, j, _)| i == j) {
            return Err(SsamgError::InvalidProblem(format!(
                "unstructured component has a diagonal entry in row {i}"
            )));
        }
        Ok(SemiStructMatrix { grid, s, u })
    }

    /// Structured-only matrix.
    pub fn from_stencil(grid: Arc<SemiStructGrid>, s: StencilMatrix) -> Result<Self> {
        let n = grid.num_cells();
        Self::new(grid, s, RowSparseMatrix::zeros(n, n))
    }

    pub fn grid(&self) -> &Arc<SemiStructGrid> {
        &self.grid
    }

    pub fn stencil(&self) -> &StencilMatrix {
        &self.s
    }

    pub fn unstructured(&self) -> &RowSparseMatrix {
        &self.u
    }

    pub fn num_rows(&self) -> usize {
        self.grid.num_cells()
    }

    pub fn matvec(&self, x: &SemiStructVector) -> Result<SemiStructVector> {
        if !same_grid(&self.grid, &x.grid) {
            return Err(SsamgError::GridMismatch("matvec operand".into()));
        }
        let mut y = SemiStructVector::zeros(self.grid.clone());
        self.apply(&x.values, &mut y.values);
        Ok(y)
    }

    /// Every effective entry as `(row, col, value)`; structured entries first,
    /// in box then offset order.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (p, ps) in self.s.parts().iter().enumerate() {
            let base = self.grid.part_offset(p);
            for local in 0..ps.num_cells() {
                for (c, t) in ps.row(local).iter().zip(ps.row_targets(local)) {
                    if *t != MASKED && *c != 0.0 {
                        out.push((base + local, base + *t as usize, *c));
                    }
                }
            }
        }
        out.extend(self.u.triplets());
        out
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.to_dense_capped(DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.num_rows();
        if n > cap {
            return Err(SsamgError::DenseCapExceeded { size: n, cap });
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        Ok(m)
    }

    /// The whole operator in row-compressed form.
    pub fn to_row_sparse(&self) -> RowSparseMatrix {
        let n = self.num_rows();
        RowSparseMatrix::from_triplets(n, n, self.entries()).expect("indices in range")
    }

    pub fn diagonal(&self) -> Result<SemiStructVector> {
        let mut d = SemiStructVector::zeros(self.grid.clone());
        for (p, ps) in self.s.parts().iter().enumerate() {
            let center = ps
                .shape()
                .index_of(CENTER)
                .ok_or(SsamgError::MissingDiagonal { part: p })?;
            let base = self.grid.part_offset(p);
            for local in 0..ps.num_cells() {
                d.values[base + local] = ps.row(local)[center];
            }
        }
        Ok(d)
    }

    pub fn l1_row_sums(&self) -> SemiStructVector {
        let mut m = SemiStructVector::zeros(self.grid.clone());
        for (p, ps) in self.s.parts().iter().enumerate() {
            let base = self.grid.part_offset(p);
            for local in 0..ps.num_cells() {
                m.values[base + local] = ps
                    .row(local)
                    .iter()
                    .zip(ps.row_targets(local))
                    .filter(|(_, t)| **t != MASKED)
                    .map(|(c, _)| c.abs())
                    .sum();
            }
        }
        for i in 0..self.u.n_rows() {
            m.values[i] += self.u.row(i).1.iter().map(|v| v.abs()).sum::<f64>();
        }
        m
    }

    /// The structured block of part `p` as a standalone single-part matrix.
    pub fn part_block(&self, p: usize) -> Result<SemiStructMatrix> {
        let grid = Arc::new(SemiStructGrid::new(
            self.grid.ndim(),
            vec![self.grid.part(p).boxes.clone()],
        )?);
        let ps = self.s.part(p);
        let s = StencilMatrix::new(&grid, vec![(ps.shape().clone(), ps.coeffs().to_vec())])?;
        SemiStructMatrix::from_stencil(grid, s)
    }
}

impl LinearOperator for SemiStructMatrix {
    fn nrows(&self) -> usize {
        self.num_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.s.apply_add(&self.grid, x, y);
        self.u.matvec_add(x, y);
    }
}
