//! Assemble a two-part 2D Poisson problem by hand: an L-shaped part glued
//! to a square, with the interface couplings in the unstructured matrix.

use std::sync::Arc;

use ssamg::grid::{BoxIdx, SemiStructGrid};
use ssamg::hierarchy::{ssamg_setup, SsamgOptions};
use ssamg::krylov::{pcg, PcgOptions};
use ssamg::linalg::{RowSparseMatrix, SemiStructMatrix, StencilMatrix, StencilShape};

fn main() -> ssamg::Result<()> {
    let n = 16;
    let l_shape = vec![BoxIdx::new([0, 0, 0], [n - 1, n / 2 - 1, 0])?, BoxIdx::new([0, n / 2, 0], [n / 2 - 1, n - 1, 0])?];
    let square = vec![BoxIdx::new([0, 0, 0], [n / 2 - 1, n / 2 - 1, 0])?];
    let grid = Arc::new(SemiStructGrid::new(2, vec![l_shape, square])?);

    // part 1 sits in the notch of part 0: its cell (i, j) is (i + n/2, j + n/2) there
    let shape = StencilShape::five_point();
    let off = n / 2;
    let mut parts = Vec::new();
    let mut u = Vec::new();
    for q in 0..2 {
        let part = grid.part(q);
        let mut coeffs = Vec::new();
        for c in part.cells() {
            for &o in shape.offsets() {
                let v = if o == [0, 0, 0] { 4.0 } else { -1.0 };
                let nb = [c[0] + o[0], c[1] + o[1], 0];
                let inside = part.contains(nb);
                let glued = if q == 0 { [nb[0] - off, nb[1] - off, 0] } else { [nb[0] + off, nb[1] + off, 0] };
                let other = 1 - q;
                if !inside && o != [0, 0, 0] {
                    if let Some(j) = grid.try_global_index(other, glued) {
                        u.push((grid.global_index(q, c)?, j, -1.0));
                    }
                    // masked entries are stored but never applied
                    coeffs.push(if grid.part(other).contains(glued) { -1.0 } else { 0.0 });
                } else {
                    coeffs.push(v);
                }
            }
        }
        parts.push((shape.clone(), coeffs));
    }
    let s = StencilMatrix::new(&grid, parts)?;
    let nrows = grid.num_cells();
    let a = SemiStructMatrix::new(grid, s, RowSparseMatrix::from_triplets(nrows, nrows, u)?)?;

    let h = ssamg_setup(&a, &SsamgOptions::base())?;
    print!("{}", h.plan().dump());
    let b = vec![1.0; nrows];
    let res = pcg(&a, &b, &h, PcgOptions::default(), None)?;
    println!("{} iterations, converged {}", res.iterations, res.converged);
    Ok(())
}
