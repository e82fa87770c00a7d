//! Coarse operators `A_c = PᵀSP + PᵀUP`.
//!
//! The structured product is formed stencil-wise per part. Stored entries that
//! point outside a part are carried to the coarse level as well: their target
//! is mapped to a virtual coarse cell beyond the part, so the coarse stencil
//! keeps the row sums of the fine one. Those entries stay masked.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Result, SsamgError};
use crate::grid::{Index3, SemiStructGrid};
use crate::linalg::{
    envelope_index, envelope_offset, RowSparseMatrix, SemiStructMatrix, StencilMatrix,
    StencilShape, CENTER, MASKED,
};
use crate::transfer::{with_coord, Prolongation};

fn coarse_offset(c: Index3, target: Index3) -> Result<usize> {
    let o = [target[0] - c[0], target[1] - c[1], target[2] - c[2]];
    if o.iter().any(|v| !(-1..=1).contains(v)) {
        return Err(SsamgError::StencilEnvelope { offset: o });
    }
    Ok(envelope_index(o))
}

/// Shape holding the center and every offset with a nonzero coefficient.
fn trim(ndim: usize, acc: &[[f64; 27]]) -> (StencilShape, Vec<f64>) {
    let mut used = [false; 27];
    used[envelope_index(CENTER)] = true;
    for row in acc {
        for (e, v) in row.iter().enumerate() {
            if *v != 0.0 {
                used[e] = true;
            }
        }
    }
    let idx: Vec<usize> = (0..27)
        .filter(|&e| used[e] && (ndim == 3 || envelope_offset(e)[2] == 0))
        .collect();
    let shape = StencilShape::new(idx.iter().map(|&e| envelope_offset(e)).collect())
        .expect("envelope offsets are valid");
    let coeffs = acc.iter().flat_map(|row| idx.iter().map(move |&e| row[e])).collect();
    (shape, coeffs)
}

/// Structured part `PᵀSP`, restricted to couplings inside each part, plus
/// the masked entries carried over from the fine stencil.
pub fn rap_structured(p: &Prolongation, s: &StencilMatrix) -> Result<StencilMatrix> {
    let parts = structured_blocks(p, s)?;
    StencilMatrix::new(p.coarse_grid(), parts)
}

fn structured_blocks(p: &Prolongation, s: &StencilMatrix) -> Result<Vec<(StencilShape, Vec<f64>)>> {
    let fine = p.fine_grid();
    let coarse = p.coarse_grid();
    if s.num_parts() != fine.num_parts() {
        return Err(SsamgError::DimensionMismatch { expected: fine.num_parts(), got: s.num_parts() });
    }
    let mut out = Vec::with_capacity(fine.num_parts());
    for (pi, ps) in s.parts().iter().enumerate() {
        let Some(d) = p.directions()[pi] else {
            out.push((ps.shape().clone(), ps.coeffs().to_vec()));
            continue;
        };
        let fpart = fine.part(pi);
        let cpart = coarse.part(pi);
        let fbase = fine.part_offset(pi);
        let offsets = ps.shape().offsets();
        let mut acc = vec![[0.0f64; 27]; cpart.num_cells()];
        for (clocal, c) in cpart.cells().enumerate() {
            let row = &mut acc[clocal];
            let f0 = with_coord(c, d, 2 * c[d]);
            let support = [
                (f0, None),
                (with_coord(c, d, 2 * c[d] - 1), Some(true)),
                (with_coord(c, d, 2 * c[d] + 1), Some(false)),
            ];
            for (f, side) in support {
                let Some(flocal) = fpart.local_index(f) else { continue };
                let wf = match side {
                    None => 1.0,
                    Some(true) => p.weights(fbase + flocal).1,
                    Some(false) => p.weights(fbase + flocal).0,
                };
                if wf == 0.0 {
                    continue;
                }
                let coeffs = ps.row(flocal);
                let targets = ps.row_targets(flocal);
                for ((o, &v), &t) in offsets.iter().zip(coeffs).zip(targets) {
                    if v == 0.0 {
                        continue;
                    }
                    let g = [f[0] + o[0], f[1] + o[1], f[2] + o[2]];
                    let a = wf * v;
                    if t != MASKED {
                        if g[d].rem_euclid(2) == 0 {
                            row[coarse_offset(c, with_coord(g, d, g[d] / 2))?] += a;
                        } else {
                            let (wm, wp) = p.weights(fbase + t as usize);
                            if wm != 0.0 {
                                row[coarse_offset(c, with_coord(g, d, (g[d] - 1).div_euclid(2)))?] += a * wm;
                            }
                            if wp != 0.0 {
                                row[coarse_offset(c, with_coord(g, d, (g[d] + 1).div_euclid(2)))?] += a * wp;
                            }
                        }
                    } else {
                        // virtual target beyond the part
                        let images: [(i64, f64); 2] = if g[d].rem_euclid(2) == 0 {
                            [(g[d] / 2, 1.0), (0, 0.0)]
                        } else if o[d] != 0 {
                            [((g[d] + o[d]).div_euclid(2), 1.0), (0, 0.0)]
                        } else {
                            [((g[d] - 1).div_euclid(2), 0.5), ((g[d] + 1).div_euclid(2), 0.5)]
                        };
                        for (x, w) in images {
                            if w == 0.0 {
                                continue;
                            }
                            let cg = with_coord(g, d, x);
                            if cpart.contains(cg) {
                                continue;
                            }
                            row[coarse_offset(c, cg)?] += a * w;
                        }
                    }
                }
            }
        }
        out.push(trim(fine.ndim(), &acc));
    }
    Ok(out)
}

/// `PᵀUP` as an `n_c x n_c` sparse matrix, using only the rows of `P` on
/// the row and column support of `U`.
pub fn rap_unstructured(p: &Prolongation, u: &RowSparseMatrix) -> Result<RowSparseMatrix> {
    let nf = p.fine_grid().num_cells();
    let nc = p.coarse_grid().num_cells();
    if u.n_rows() != nf || u.n_cols() != nf {
        return Err(SsamgError::DimensionMismatch { expected: nf, got: u.n_rows() });
    }
    if u.nnz() == 0 {
        return Ok(RowSparseMatrix::zeros(nc, nc));
    }
    let mut local = vec![usize::MAX; nf];
    for (i, j, _) in u.triplets() {
        local[i] = 0;
        local[j] = 0;
    }
    let mut support = Vec::new();
    for (g, l) in local.iter_mut().enumerate() {
        if *l == 0 {
            *l = support.len();
            support.push(g);
        }
    }
    let rows = support
        .iter()
        .map(|&g| {
            let (c, v) = u.row(g);
            c.iter().map(|&j| local[j]).zip(v.iter().cloned()).collect()
        })
        .collect();
    let u_sub = RowSparseMatrix::from_row_lists(support.len(), rows);
    let p_sel = p.to_row_sparse(&support);
    RowSparseMatrix::triple_product(&p_sel, &u_sub)
}

/// Coarse operator `PᵀAP`.
///
/// Entries of `PᵀUP` that couple two cells of one part within the stencil
/// envelope are moved into the coarse stencil; everything else stays in `U`.
pub fn galerkin_product(p: &Prolongation, a: &SemiStructMatrix) -> Result<SemiStructMatrix> {
    let coarse: &Arc<SemiStructGrid> = p.coarse_grid();
    let mut blocks = structured_blocks(p, a.stencil())?;
    let uc = rap_unstructured(p, a.unstructured())?;
    let nc = coarse.num_cells();

    let mut intra: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); coarse.num_parts()];
    let mut cross = Vec::with_capacity(uc.nnz());
    for (i, j, v) in uc.triplets() {
        let (pi, ci) = coarse.cell_of(i);
        let (pj, cj) = coarse.cell_of(j);
        if pi == pj {
            if let Ok(e) = coarse_offset(ci, cj) {
                let li = i - coarse.part_offset(pi);
                *intra[pi].entry((li, e)).or_insert(0.0) += v;
                continue;
            }
        }
        cross.push((i, j, v));
    }
    for (pi, adds) in intra.into_iter().enumerate() {
        if adds.is_empty() {
            continue;
        }
        let (shape, coeffs) = &blocks[pi];
        let n = shape.len();
        let mut acc = vec![[0.0f64; 27]; coeffs.len() / n];
        for (cell, row) in acc.iter_mut().enumerate() {
            for (s, o) in shape.offsets().iter().enumerate() {
                row[envelope_index(*o)] = coeffs[cell * n + s];
            }
        }
        for ((li, e), v) in adds {
            acc[li][e] += v;
        }
        blocks[pi] = trim(coarse.ndim(), &acc);
    }
    let s = StencilMatrix::new(coarse, blocks)?;
    let u = RowSparseMatrix::from_triplets(nc, nc, cross)?;
    SemiStructMatrix::new(coarse.clone(), s, u)
}
