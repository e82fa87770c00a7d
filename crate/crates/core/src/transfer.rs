//! Two-point prolongation built by collapsing the stencil of `A`.
//!
//! For a fine cell `x` of a part coarsened in direction `d`:
//! cells with even `x[d]` are coarse points and are injected; every other
//! cell interpolates from its two neighbors `x - e_d` and `x + e_d` with
//! weights `-n_minus / den` and `-n_plus / den`, where `n_minus` (`n_plus`)
//! sums the stored coefficients with `o[d] = -1` (`+1`) and `den` sums those
//! with `o[d] = 0`. A neighbor outside the part contributes no weight; its
//! weight is moved to the opposite side so the row sum is unchanged.

use std::sync::Arc;

use crate::error::{Result, SsamgError};
use crate::grid::{BoxIdx, Index3, SemiStructGrid};
use crate::linalg::{RowSparseMatrix, SemiStructMatrix, SemiStructVector, same_grid};

/// Coarse grid obtained by semi-coarsening each part in its direction.
///
/// Returns the grid and the directions actually applied: a part whose boxes
/// hold no even coordinate in the requested direction is left unchanged.
pub fn coarsen_grid(
    fine: &SemiStructGrid,
    dirs: &[Option<usize>],
) -> Result<(Arc<SemiStructGrid>, Vec<Option<usize>>)> {
    let mut applied = Vec::with_capacity(fine.num_parts());
    let mut boxes = Vec::with_capacity(fine.num_parts());
    for (p, part) in fine.parts().iter().enumerate() {
        match dirs[p] {
            Some(d) => {
                let cb: Vec<BoxIdx> = part.boxes.iter().filter_map(|b| b.coarsen_even(d)).collect();
                if cb.is_empty() {
                    applied.push(None);
                    boxes.push(part.boxes.clone());
                } else {
                    applied.push(Some(d));
                    boxes.push(cb);
                }
            }
            None => {
                applied.push(None);
                boxes.push(part.boxes.clone());
            }
        }
    }
    Ok((Arc::new(SemiStructGrid::new(fine.ndim(), boxes)?), applied))
}

#[inline]
pub(crate) fn with_coord(mut c: Index3, d: usize, v: i64) -> Index3 {
    c[d] = v;
    c
}

/// Structured prolongation from a coarse to a fine semi-structured grid.
#[derive(Debug, Clone)]
pub struct Prolongation {
    fine: Arc<SemiStructGrid>,
    coarse: Arc<SemiStructGrid>,
    directions: Vec<Option<usize>>,
    w_minus: Vec<f64>,
    w_plus: Vec<f64>,
    matrix: RowSparseMatrix,
}

/// Collapsed sums `(n_minus, den, n_plus)` of one stored stencil row.
pub fn collapse_row(offsets: &[[i64; 3]], coeffs: &[f64], d: usize) -> (f64, f64, f64) {
    let (mut nm, mut den, mut np) = (0.0, 0.0, 0.0);
    for (o, v) in offsets.iter().zip(coeffs) {
        match o[d] {
            -1 => nm += v,
            0 => den += v,
            _ => np += v,
        }
    }
    (nm, den, np)
}

/// Build `P` for one level. `dirs[p] = None` makes part `p` an identity block.
pub fn build_prolongation(a: &SemiStructMatrix, dirs: &[Option<usize>]) -> Result<Prolongation> {
    let fine = a.grid().clone();
    if dirs.len() != fine.num_parts() {
        return Err(SsamgError::DimensionMismatch { expected: fine.num_parts(), got: dirs.len() });
    }
    let (coarse, directions) = coarsen_grid(&fine, dirs)?;
    let n = fine.num_cells();
    let mut w_minus = vec![0.0; n];
    let mut w_plus = vec![0.0; n];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);

    for (p, part) in fine.parts().iter().enumerate() {
        let base = fine.part_offset(p);
        let ps = a.stencil().part(p);
        let offsets = ps.shape().offsets();
        let Some(d) = directions[p] else {
            for cell in part.cells() {
                rows.push(vec![(coarse.try_global_index(p, cell).unwrap(), 1.0)]);
            }
            continue;
        };
        for (local, x) in part.cells().enumerate() {
            if x[d].rem_euclid(2) == 0 {
                let c = with_coord(x, d, x[d] / 2);
                rows.push(vec![(coarse.try_global_index(p, c).unwrap(), 1.0)]);
                continue;
            }
            let (nm, den, np) = collapse_row(offsets, ps.row(local), d);
            let (mut wm, mut wp) = if den.abs() < 1e-300 {
                (0.5, 0.5)
            } else {
                (-nm / den, -np / den)
            };
            let left = with_coord(x, d, x[d] - 1);
            let right = with_coord(x, d, x[d] + 1);
            let has_left = part.contains(left);
            let has_right = part.contains(right);
            match (has_left, has_right) {
                (true, true) => {}
                (false, true) => {
                    wp += wm;
                    wm = 0.0;
                }
                (true, false) => {
                    wm += wp;
                    wp = 0.0;
                }
                (false, false) => {
                    wm = 0.0;
                    wp = 0.0;
                }
            }
            w_minus[base + local] = wm;
            w_plus[base + local] = wp;
            let mut row = Vec::with_capacity(2);
            if has_left && wm != 0.0 {
                let c = with_coord(left, d, left[d].div_euclid(2));
                row.push((coarse.try_global_index(p, c).unwrap(), wm));
            }
            if has_right && wp != 0.0 {
                let c = with_coord(right, d, right[d].div_euclid(2));
                row.push((coarse.try_global_index(p, c).unwrap(), wp));
            }
            rows.push(row);
        }
    }
    let matrix = RowSparseMatrix::from_row_lists(coarse.num_cells(), rows);
    Ok(Prolongation { fine, coarse, directions, w_minus, w_plus, matrix })
}

impl Prolongation {
    pub fn fine_grid(&self) -> &Arc<SemiStructGrid> {
        &self.fine
    }

    pub fn coarse_grid(&self) -> &Arc<SemiStructGrid> {
        &self.coarse
    }

    pub fn directions(&self) -> &[Option<usize>] {
        &self.directions
    }

    /// Interpolation weights `(w_minus, w_plus)` of a fine cell; `(0, 0)` for
    /// injected cells.
    pub fn weights(&self, fine_global: usize) -> (f64, f64) {
        (self.w_minus[fine_global], self.w_plus[fine_global])
    }

    pub fn matrix(&self) -> &RowSparseMatrix {
        &self.matrix
    }

    pub fn apply_p(&self, xc: &SemiStructVector) -> Result<SemiStructVector> {
        if !same_grid(xc.grid(), &self.coarse) {
            return Err(SsamgError::GridMismatch("prolongation operand".into()));
        }
        let mut xf = SemiStructVector::zeros(self.fine.clone());
        self.matrix.matvec(xc.values(), xf.values_mut());
        Ok(xf)
    }

    pub fn apply_r(&self, xf: &SemiStructVector) -> Result<SemiStructVector> {
        if !same_grid(xf.grid(), &self.fine) {
            return Err(SsamgError::GridMismatch("restriction operand".into()));
        }
        let mut xc = SemiStructVector::zeros(self.coarse.clone());
        self.matrix.matvec_transpose_add(xf.values(), xc.values_mut());
        Ok(xc)
    }

    /// `xf += P xc`
    pub fn prolong_add(&self, xc: &[f64], xf: &mut [f64]) {
        self.matrix.matvec_add(xc, xf);
    }

    /// `xc = Pᵀ xf`
    pub fn restrict(&self, xf: &[f64], xc: &mut [f64]) {
        xc.iter_mut().for_each(|v| *v = 0.0);
        self.matrix.matvec_transpose_add(xf, xc);
    }

    /// Rows of `P` listed in `rows` (in that order) as a `rows.len() x n_coarse`
    /// sparse matrix.
    pub fn to_row_sparse(&self, rows: &[usize]) -> RowSparseMatrix {
        let lists = rows
            .iter()
            .map(|&r| {
                let (c, v) = self.matrix.row(r);
                c.iter().cloned().zip(v.iter().cloned()).collect()
            })
            .collect();
        RowSparseMatrix::from_row_lists(self.coarse.num_cells(), lists)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxIdx;
    use crate::linalg::{StencilMatrix, StencilShape};

    fn nine_point() -> StencilShape {
        StencilShape::full(2)
    }

    /// 2D single-part matrix with the same 9-point row everywhere.
    fn uniform_2d(n: i64, row: [f64; 9]) -> SemiStructMatrix {
        let g = Arc::new(
            SemiStructGrid::new(2, vec![vec![BoxIdx::new([0, 0, 0], [n - 1, n - 1, 0]).unwrap()]])
                .unwrap(),
        );
        let cells = (n * n) as usize;
        let coeffs = (0..cells).flat_map(|_| row).collect();
        let s = StencilMatrix::new(&g, vec![(nine_point(), coeffs)]).unwrap();
        SemiStructMatrix::from_stencil(g, s).unwrap()
    }

    // 9-point envelope order: (-1,-1) (0,-1) (1,-1) (-1,0) (0,0) (1,0) (-1,1) (0,1) (1,1)
    fn row(sw: f64, s: f64, se: f64, w: f64, c: f64, e: f64, nw: f64, n: f64, ne: f64) -> [f64; 9] {
        [sw, s, se, w, c, e, nw, n, ne]
    }

    #[test]
    fn five_point_interior_weights_are_half() {
        let a = uniform_2d(6, row(0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0));
        let p = build_prolongation(&a, &[Some(0)]).unwrap();
        let g = a.grid();
        let x = g.global_index(0, [3, 3, 0]).unwrap();
        assert_eq!(p.weights(x), (0.5, 0.5));
        // an injected cell
        let c = g.global_index(0, [2, 3, 0]).unwrap();
        let (cols, vals) = p.matrix().row(c);
        assert_eq!(vals, &[1.0]);
        assert_eq!(p.coarse_grid().cell_of(cols[0]), (0, [1, 3, 0]));
    }

    #[test]
    fn asymmetric_row_weights() {
        let a = uniform_2d(6, row(0.0, -1.0, 0.0, -2.0, 5.0, -1.0, 0.0, -1.0, 0.0));
        let p = build_prolongation(&a, &[Some(0)]).unwrap();
        let x = a.grid().global_index(0, [3, 3, 0]).unwrap();
        let (wm, wp) = p.weights(x);
        assert!((wm - 2.0 / 3.0).abs() < 1e-15 && (wp - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn part_boundary_weight_moves_to_opposite_side() {
        // odd lower bound: cell 1 is a fine cell whose west neighbor is outside the part
        let g = Arc::new(
            SemiStructGrid::new(2, vec![vec![BoxIdx::new([1, 0, 0], [6, 2, 0]).unwrap()]]).unwrap(),
        );
        let cells = g.num_cells();
        let r = row(0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0);
        let s = StencilMatrix::new(&g, vec![(nine_point(), (0..cells).flat_map(|_| r).collect())])
            .unwrap();
        let a = SemiStructMatrix::from_stencil(g.clone(), s).unwrap();
        let p = build_prolongation(&a, &[Some(0)]).unwrap();
        let x = g.global_index(0, [1, 1, 0]).unwrap();
        assert_eq!(p.weights(x), (0.0, 1.0));
    }

    #[test]
    fn constants_are_preserved_and_restriction_is_transpose() {
        let a = uniform_2d(7, row(0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0));
        let p = build_prolongation(&a, &[Some(1)]).unwrap();
        let ones = SemiStructVector::from_values(p.coarse_grid().clone(), vec![1.0; p.coarse_grid().num_cells()]).unwrap();
        let f = p.apply_p(&ones).unwrap();
        assert!(f.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let zero = SemiStructVector::zeros(a.grid().clone());
        assert!(p.apply_r(&zero).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(p.apply_r(&ones).is_err());
    }

    #[test]
    fn inactive_part_is_identity() {
        let a = uniform_2d(4, row(0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0));
        let p = build_prolongation(&a, &[None]).unwrap();
        let xc = SemiStructVector::from_values(
            p.coarse_grid().clone(),
            (0..16).map(|i| i as f64).collect(),
        )
        .unwrap();
        let back = p.apply_r(&p.apply_p(&xc).unwrap()).unwrap();
        assert_eq!(back.values(), xc.values());
    }

    #[test]
    fn selector_restriction() {
        let a = uniform_2d(4, row(0.0, -1.0, 0.0, -1.0, 4.0, -1.0, 0.0, -1.0, 0.0));
        let p = build_prolongation(&a, &[Some(0)]).unwrap();
        let empty = p.to_row_sparse(&[]);
        assert_eq!((empty.n_rows(), empty.n_cols(), empty.nnz()), (0, 8, 0));
        let all: Vec<usize> = (0..16).collect();
        assert_eq!(p.to_row_sparse(&all), *p.matrix());
        let some = p.to_row_sparse(&[3, 0]);
        assert_eq!(some.n_rows(), 2);
        assert_eq!(some.row(0), p.matrix().row(3));
    }
}
