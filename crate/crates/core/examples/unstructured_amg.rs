//! Classical AMG on a plain sparse matrix (2D Laplacian).

use ssamg::krylov::{pcg, PcgOptions};
use ssamg::linalg::RowSparseMatrix;
use ssamg::uamg::{uamg_setup, UamgOptions};

fn main() -> ssamg::Result<()> {
    let n = 64;
    let id = |i: usize, j: usize| i * n + j;
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            t.push((id(i, j), id(i, j), 4.0));
            if i > 0 { t.push((id(i, j), id(i - 1, j), -1.0)); }
            if i + 1 < n { t.push((id(i, j), id(i + 1, j), -1.0)); }
            if j > 0 { t.push((id(i, j), id(i, j - 1), -1.0)); }
            if j + 1 < n { t.push((id(i, j), id(i, j + 1), -1.0)); }
        }
    }
    let a = RowSparseMatrix::from_triplets(n * n, n * n, t)?;
    let h = uamg_setup(a.clone(), UamgOptions::default())?;
    for (l, lev) in h.levels().iter().enumerate() {
        println!("level {l}: {} rows, {} nonzeros", lev.a.n_rows(), lev.a.nnz());
    }
    let b = vec![1.0; n * n];
    let res = pcg(&a, &b, &h, PcgOptions::default(), None)?;
    println!("{} iterations, relres {:.2e}", res.iterations, res.final_relres());
    Ok(())
}
