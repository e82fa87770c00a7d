//! Preconditioned conjugate gradients.

use crate::error::{Result, SsamgError};
use crate::linalg::{dot, norm2, LinearOperator};

/// `z = M⁻¹ r` for a fixed symmetric positive definite `M`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// `M = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        PcgOptions { tol: 1e-6, max_iters: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r_k‖ / ‖b‖` for `k = 0..=iterations`; the last entry is the true residual.
    pub history: Vec<f64>,
}

impl PcgResult {
    pub fn final_relres(&self) -> f64 {
        *self.history.last().unwrap_or(&0.0)
    }
}

fn true_residual<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solve `A x = b` until `‖r‖ < tol ‖b‖`. `x0 = None` starts from zero.
pub fn pcg<A, M>(a: &A, b: &[f64], m: &M, opts: PcgOptions, x0: Option<&[f64]>) -> Result<PcgResult>
where
    A: LinearOperator + ?Sized,
    M: Preconditioner + ?Sized,
{
    let n = a.nrows();
    if b.len() != n {
        return Err(SsamgError::DimensionMismatch { expected: n, got: b.len() });
    }
    let mut x = match x0 {
        Some(v) if v.len() != n => return Err(SsamgError::DimensionMismatch { expected: n, got: v.len() }),
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let bnorm = norm2(b);
    let mut r = vec![0.0; n];
    true_residual(a, b, &x, &mut r);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(PcgResult { x, iterations: 0, converged: true, history: vec![0.0] });
    }
    let target = opts.tol * bnorm;
    let mut rnorm = norm2(&r);
    let mut history = vec![rnorm / bnorm];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut rz_old = 0.0;
    let mut k = 0;
    let mut converged = rnorm < target;
    while !converged && k < opts.max_iters {
        m.apply(&r, &mut z);
        let rz = dot(&r, &z);
        if rz == 0.0 || !rz.is_finite() {
            return Err(SsamgError::Stagnation { iteration: k });
        }
        if k == 0 {
            p.copy_from_slice(&z);
        } else {
            let beta = rz / rz_old;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        a.apply(&p, &mut ap);
        let curv = dot(&p, &ap);
        if curv <= 0.0 || !curv.is_finite() {
            return Err(SsamgError::Indefinite { iteration: k, curvature: curv });
        }
        let alpha = rz / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rz_old = rz;
        k += 1;
        rnorm = norm2(&r);
        if rnorm < target {
            // confirm against the true residual before stopping
            true_residual(a, b, &x, &mut r);
            rnorm = norm2(&r);
            converged = rnorm < target;
        }
        history.push(rnorm / bnorm);
    }
    Ok(PcgResult { x, iterations: k, converged, history })
}
