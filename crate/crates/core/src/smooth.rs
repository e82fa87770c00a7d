//! Jacobi-type relaxation `x <- x + ω M⁻¹ (b - A x)`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::coarsen::{CoarsenPlan, WeightMatrix};
use crate::error::{Result, SsamgError};
use crate::linalg::{LinearOperator, SemiStructMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    /// `M = diag(A)` with a per-part weight derived from the grid spacings.
    WeightedJacobi,
    /// `M` = row sums of `|a_ij|`, scaled by a user relaxation factor.
    L1Jacobi,
}

/// `ω_p = 2 / (3 - β_p/α_p)` with `α_p = Σ_d 1/W_d²` and
/// `β_p = α_p - 1/W_{d*}²`. Falls back to 2/3 when `α_p` vanishes.
pub fn jacobi_weight(w_row: &[f64], d_star: usize) -> f64 {
    let alpha: f64 = w_row.iter().map(|w| 1.0 / (w * w)).sum();
    if alpha == 0.0 || !alpha.is_finite() {
        return 2.0 / 3.0;
    }
    let beta = alpha - 1.0 / (w_row[d_star] * w_row[d_star]);
    2.0 / (3.0 - beta / alpha)
}

/// `skip[l][p]` is set when part `p` coarsens in the same direction at
/// levels `l` and `l - n_d`.
pub fn skip_levels(plan: &CoarsenPlan, n_d: usize) -> Vec<Vec<bool>> {
    (0..plan.num_levels())
        .map(|l| {
            plan.directions[l]
                .iter()
                .enumerate()
                .map(|(p, d)| l >= n_d && d.is_some() && *d == plan.directions[l - n_d][p])
                .collect()
        })
        .collect()
}

/// Relaxation data for one level.
#[derive(Debug)]
pub struct SmootherState {
    kind: SmootherKind,
    factor: f64,
    omega: Vec<f64>,
    /// `ω / M` per cell; zero where relaxation is switched off.
    scaled_inv: Vec<f64>,
    active_cells: usize,
    work: AtomicU64,
}

impl Clone for SmootherState {
    fn clone(&self) -> Self {
        SmootherState {
            kind: self.kind,
            factor: self.factor,
            omega: self.omega.clone(),
            scaled_inv: self.scaled_inv.clone(),
            active_cells: self.active_cells,
            work: AtomicU64::new(self.work.load(Ordering::Relaxed)),
        }
    }
}

impl SmootherState {
    /// `relax_part[p] = false` turns relaxation off on part `p`.
    /// `weights` and `dirs` feed the weighted-Jacobi `ω_p`.
    pub fn new(
        a: &SemiStructMatrix,
        kind: SmootherKind,
        factor: f64,
        weights: &WeightMatrix,
        dirs: &[Option<usize>],
        relax_part: &[bool],
    ) -> Result<Self> {
        let grid = a.grid();
        let n_p = grid.num_parts();
        let omega: Vec<f64> = (0..n_p)
            .map(|p| match (kind, dirs[p]) {
                (SmootherKind::L1Jacobi, _) => factor,
                (SmootherKind::WeightedJacobi, Some(d)) => jacobi_weight(weights.row(p), d),
                (SmootherKind::WeightedJacobi, None) => 2.0 / 3.0,
            })
            .collect();
        let m = match kind {
            SmootherKind::WeightedJacobi => a.diagonal()?.into_values(),
            SmootherKind::L1Jacobi => a.l1_row_sums().into_values(),
        };
        let mut scaled_inv = vec![0.0; m.len()];
        let mut active_cells = 0;
        for p in 0..n_p {
            if !relax_part[p] {
                continue;
            }
            for i in grid.part_range(p) {
                if m[i] == 0.0 || !m[i].is_finite() {
                    return Err(SsamgError::SingularSmoother { row: i });
                }
                scaled_inv[i] = omega[p] / m[i];
            }
            active_cells += grid.part(p).num_cells();
        }
        Ok(SmootherState { kind, factor, omega, scaled_inv, active_cells, work: AtomicU64::new(0) })
    }

    pub fn kind(&self) -> SmootherKind {
        self.kind
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// Weight per part.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn scaled_inverse(&self) -> &[f64] {
        &self.scaled_inv
    }

    /// False when every part is skipped or inactive.
    pub fn is_active(&self) -> bool {
        self.active_cells > 0
    }

    /// Cell updates performed so far.
    pub fn work(&self) -> u64 {
        self.work.load(Ordering::Relaxed)
    }

    pub fn reset_work(&self) {
        self.work.store(0, Ordering::Relaxed);
    }

    /// `sweeps` Jacobi sweeps on `A x = b`.
    pub fn relax<A: LinearOperator + ?Sized>(&self, a: &A, b: &[f64], x: &mut [f64], sweeps: usize) {
        if !self.is_active() || sweeps == 0 {
            return;
        }
        let mut ax = vec![0.0; x.len()];
        for _ in 0..sweeps {
            a.apply(x, &mut ax);
            for ((xi, &s), (&bi, &ai)) in x.iter_mut().zip(&self.scaled_inv).zip(b.iter().zip(&ax)) {
                *xi += s * (bi - ai);
            }
        }
        self.work.fetch_add((sweeps * self.active_cells) as u64, Ordering::Relaxed);
    }

    /// One sweep from a zero initial guess: `x = ω M⁻¹ b`.
    pub fn relax_from_zero(&self, b: &[f64], x: &mut [f64]) {
        for ((xi, &s), &bi) in x.iter_mut().zip(&self.scaled_inv).zip(b) {
            *xi = s * bi;
        }
        if self.is_active() {
            self.work.fetch_add(self.active_cells as u64, Ordering::Relaxed);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsen::{build_plan, SENTINEL};
    use crate::grid::{BoxIdx, SemiStructGrid};
    use crate::linalg::{norm2, StencilMatrix, StencilShape};
    use std::sync::Arc;

    fn poisson_1d(n: i64) -> SemiStructMatrix {
        let g = Arc::new(
            SemiStructGrid::new(2, vec![vec![BoxIdx::new([0, 0, 0], [n - 1, 0, 0]).unwrap()]]).unwrap(),
        );
        let shape = StencilShape::new(vec![[0, 0, 0], [-1, 0, 0], [1, 0, 0]]).unwrap();
        let coeffs = (0..n).flat_map(|_| [2.0, -1.0, -1.0]).collect();
        let s = StencilMatrix::new(&g, vec![(shape, coeffs)]).unwrap();
        SemiStructMatrix::from_stencil(g, s).unwrap()
    }

    fn w1() -> WeightMatrix {
        WeightMatrix::new(2, vec![[1.0, SENTINEL, SENTINEL]])
    }

    #[test]
    fn omega_spot_values() {
        assert_eq!(jacobi_weight(&[1.0, 1.0, 1.0], 0), 6.0 / 7.0);
        // strong coupling in two directions, negligible in the third
        let r = jacobi_weight(&[1.0, 1.0, 1e12], 0);
        assert!((r - 0.8).abs() < 1e-15);
        assert!((jacobi_weight(&[1.0, 1e9, 1e9], 0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(jacobi_weight(&[f64::INFINITY; 3], 0), 2.0 / 3.0);
    }

    #[test]
    fn zero_sweeps_and_exact_identity_solve() {
        let a = poisson_1d(7);
        let sm = SmootherState::new(&a, SmootherKind::L1Jacobi, 1.5, &w1(), &[Some(0)], &[true]).unwrap();
        let mut x = vec![0.3; 7];
        sm.relax(&a, &[1.0; 7], &mut x, 0);
        assert_eq!(x, vec![0.3; 7]);

        let g = a.grid().clone();
        let id = SemiStructMatrix::from_stencil(g.clone(), StencilMatrix::identity(&g)).unwrap();
        let sm = SmootherState::new(&id, SmootherKind::L1Jacobi, 1.0, &w1(), &[None], &[true]).unwrap();
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 2.0).collect();
        let mut x = vec![0.0; 7];
        sm.relax(&id, &b, &mut x, 1);
        assert_eq!(x, b);
    }

    #[test]
    fn l1_residual_decreases_monotonically() {
        let a = poisson_1d(7);
        let sm = SmootherState::new(&a, SmootherKind::L1Jacobi, 1.5, &w1(), &[Some(0)], &[true]).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0];
        let mut x = vec![0.0; 7];
        let res = |x: &[f64]| {
            let mut ax = vec![0.0; 7];
            a.apply(x, &mut ax);
            norm2(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>())
        };
        let mut last = res(&x);
        for _ in 0..50 {
            sm.relax(&a, &b, &mut x, 1);
            let r = res(&x);
            assert!(r < last, "{r} !< {last}");
            last = r;
        }
        assert_eq!(sm.work(), 350);
    }

    #[test]
    fn highest_mode_damping_matches_analysis() {
        // periodic-like check on the interior: mode (-1)^i of tridiag(-1,2,-1)
        let n = 9;
        let a = poisson_1d(n);
        let sm = SmootherState::new(&a, SmootherKind::WeightedJacobi, 1.0, &w1(), &[Some(0)], &[true]).unwrap();
        let omega = sm.omega()[0];
        assert_eq!(omega, 2.0 / 3.0);
        // the highest Dirichlet eigenmode sin(kπ i/(n+1)), k = n
        let lam = 2.0 - 2.0 * (n as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let mut x: Vec<f64> = (1..=n)
            .map(|i| (n as f64 * std::f64::consts::PI * i as f64 / (n as f64 + 1.0)).sin())
            .collect();
        let x0 = x.clone();
        sm.relax(&a, &vec![0.0; n as usize], &mut x, 1);
        let factor = (1.0 - omega * lam / 2.0).abs();
        for (u, v) in x.iter().zip(&x0) {
            assert!((u.abs() - factor * v.abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn skip_flags_follow_the_lag_rule() {
        let g = SemiStructGrid::new(3, vec![vec![BoxIdx::cube(16)]]).unwrap();
        let plan = build_plan(&g, &WeightMatrix::new(3, vec![[1.0; 3]]), 1, 31);
        let skip = skip_levels(&plan, 3);
        for (l, row) in skip.iter().enumerate() {
            let expect = l >= 3 && plan.direction(l, 0).is_some();
            assert_eq!(row[0], expect, "level {l}");
        }
        let plan = build_plan(&g, &WeightMatrix::new(3, vec![[1.0, 100.0, 100.0]]), 1, 31);
        let skip = skip_levels(&plan, 3);
        assert!(!skip[0][0] && !skip[1][0] && !skip[2][0]);
        assert!(skip[3][0]);
    }

    #[test]
    fn switched_off_part_is_untouched() {
        let a = poisson_1d(5);
        let sm = SmootherState::new(&a, SmootherKind::L1Jacobi, 1.5, &w1(), &[Some(0)], &[false]).unwrap();
        let mut x = vec![0.25; 5];
        sm.relax(&a, &[1.0; 5], &mut x, 3);
        assert_eq!(x, vec![0.25; 5]);
        assert_eq!(sm.work(), 0);
        assert!(!sm.is_active());
    }
}
