//! Classical algebraic multigrid on a plain sparse matrix.
//!
//! Strength of connection on negative entries, greedy C/F splitting in row
//! order, direct interpolation and Galerkin coarse operators. The coarsest
//! system is solved with a dense LU factorization.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Result, SsamgError};
use crate::krylov::Preconditioner;
use crate::linalg::{RowSparseMatrix, DENSE_CAP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UamgOptions {
    pub strength_threshold: f64,
    pub max_coarse: usize,
    pub max_levels: usize,
    pub relax_factor: f64,
}

impl Default for UamgOptions {
    fn default() -> Self {
        UamgOptions { strength_threshold: 0.25, max_coarse: 8, max_levels: 25, relax_factor: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct UamgLevel {
    pub a: RowSparseMatrix,
    /// Prolongation to this level from the next coarser one.
    pub p: Option<RowSparseMatrix>,
    scaled_inv: Vec<f64>,
}

#[derive(Debug, Clone)]
enum CoarseSolver {
    Lu(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    /// Used only when the coarsest system is too large to factor.
    Relax(usize),
}

#[derive(Debug, Clone)]
pub struct UamgHierarchy {
    levels: Vec<UamgLevel>,
    coarse: CoarseSolver,
}

/// Strong connections of every row: `-a_ij ≥ θ max_{k≠i}(-a_ik)` with `a_ij < 0`.
pub fn strength(a: &RowSparseMatrix, theta: f64) -> Vec<Vec<usize>> {
    (0..a.n_rows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let max_neg = cols
                .iter()
                .zip(vals)
                .filter(|(&j, _)| j != i)
                .map(|(_, &v)| -v)
                .fold(0.0, f64::max);
            if max_neg <= 0.0 {
                return Vec::new();
            }
            cols.iter()
                .zip(vals)
                .filter(|(&j, &v)| j != i && v < 0.0 && -v >= theta * max_neg)
                .map(|(&j, _)| j)
                .collect()
        })
        .collect()
}

/// `true` marks a coarse point. An undecided point becomes coarse and every
/// point it strongly influences becomes fine.
pub fn cf_split(strong: &[Vec<usize>]) -> Vec<bool> {
    let n = strong.len();
    let mut influences: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in strong.iter().enumerate() {
        for &j in s {
            influences[j].push(i);
        }
    }
    // 0 undecided, 1 coarse, 2 fine
    let mut state = vec![0u8; n];
    for i in 0..n {
        if state[i] != 0 {
            continue;
        }
        state[i] = 1;
        for &k in &influences[i] {
            if state[k] == 0 {
                state[k] = 2;
            }
        }
    }
    state.into_iter().map(|s| s == 1).collect()
}

/// Direct interpolation. Positive off-diagonals are lumped into the diagonal.
pub fn direct_interpolation(a: &RowSparseMatrix, strong: &[Vec<usize>], coarse: &[bool]) -> RowSparseMatrix {
    let mut cidx = vec![usize::MAX; coarse.len()];
    let mut nc = 0;
    for (i, &c) in coarse.iter().enumerate() {
        if c {
            cidx[i] = nc;
            nc += 1;
        }
    }
    let rows = (0..a.n_rows())
        .map(|i| {
            if coarse[i] {
                return vec![(cidx[i], 1.0)];
            }
            let (cols, vals) = a.row(i);
            let mut diag = 0.0;
            let mut sum_neg = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i || v > 0.0 {
                    diag += v;
                } else {
                    sum_neg += v;
                }
            }
            let ci: Vec<(usize, f64)> = strong[i]
                .iter()
                .filter(|&&j| coarse[j])
                .map(|&j| (j, a.get(i, j)))
                .collect();
            let sum_c: f64 = ci.iter().map(|e| e.1).sum();
            if ci.is_empty() || sum_c == 0.0 || diag == 0.0 {
                return Vec::new();
            }
            let alpha = sum_neg / sum_c;
            ci.into_iter().map(|(j, v)| (cidx[j], -alpha * v / diag)).collect()
        })
        .collect();
    RowSparseMatrix::from_row_lists(nc, rows)
}

fn l1_inverse(a: &RowSparseMatrix, factor: f64) -> Result<Vec<f64>> {
    (0..a.n_rows())
        .map(|i| {
            let s: f64 = a.row(i).1.iter().map(|v| v.abs()).sum();
            if s == 0.0 {
                Err(SsamgError::SingularSmoother { row: i })
            } else {
                Ok(factor / s)
            }
        })
        .collect()
}

pub fn uamg_setup(a: RowSparseMatrix, opts: UamgOptions) -> Result<UamgHierarchy> {
    let scale = a.triplets().map(|t| t.2.abs()).fold(0.0, f64::max);
    let asym = a.max_asymmetry();
    if asym > 1e-10 * scale.max(1.0) {
        return Err(SsamgError::NotSymmetric { deviation: asym });
    }
    let mut levels = Vec::new();
    let mut current = a;
    loop {
        let n = current.n_rows();
        let scaled_inv = l1_inverse(&current, opts.relax_factor)?;
        if n <= opts.max_coarse || levels.len() + 1 >= opts.max_levels {
            levels.push(UamgLevel { a: current, p: None, scaled_inv });
            break;
        }
        let strong = strength(&current, opts.strength_threshold);
        let cf = cf_split(&strong);
        let nc = cf.iter().filter(|&&c| c).count();
        if nc == n || nc == 0 {
            levels.push(UamgLevel { a: current, p: None, scaled_inv });
            break;
        }
        let p = direct_interpolation(&current, &strong, &cf);
        let next = RowSparseMatrix::triple_product(&p, &current)?;
        levels.push(UamgLevel { a: current, p: Some(p), scaled_inv });
        current = next;
    }
    let last = &levels.last().unwrap().a;
    let coarse = if last.n_rows() <= DENSE_CAP {
        let lu = LU::new(last.to_dense());
        if !lu.is_invertible() {
            return Err(SsamgError::SingularCoarse);
        }
        CoarseSolver::Lu(lu)
    } else {
        CoarseSolver::Relax(10)
    };
    Ok(UamgHierarchy { levels, coarse })
}

impl UamgHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[UamgLevel] {
        &self.levels
    }

    fn relax(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let lev = &self.levels[l];
        let mut ax = vec![0.0; x.len()];
        lev.a.matvec(x, &mut ax);
        for i in 0..x.len() {
            x[i] += lev.scaled_inv[i] * (b[i] - ax[i]);
        }
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let lev = &self.levels[l];
        let Some(p) = &lev.p else {
            match &self.coarse {
                CoarseSolver::Lu(lu) => {
                    let sol = lu.solve(&DVector::from_column_slice(b)).expect("factor is invertible");
                    x.copy_from_slice(sol.as_slice());
                }
                CoarseSolver::Relax(k) => {
                    for _ in 0..*k {
                        self.relax(l, b, x);
                    }
                }
            }
            return;
        };
        self.relax(l, b, x);
        let mut r = vec![0.0; x.len()];
        lev.a.matvec(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let mut rc = vec![0.0; p.n_cols()];
        p.matvec_transpose_add(&r, &mut rc);
        let mut xc = vec![0.0; p.n_cols()];
        self.cycle(l + 1, &rc, &mut xc);
        p.matvec_add(&xc, x);
        self.relax(l, b, x);
    }

    /// One V(1,1)-cycle from `x`.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    /// Dense copy of the coarsest operator.
    pub fn coarsest_dense(&self) -> DMatrix<f64> {
        self.levels.last().unwrap().a.to_dense()
    }
}

impl Preconditioner for UamgHierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(r, z);
    }
}
