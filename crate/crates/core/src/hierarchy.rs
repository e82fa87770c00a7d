//! Multigrid hierarchies and their V(1,1)-cycles.

use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{DVector, LU};

use crate::coarsen::{build_plan, compute_weights, CoarsenPlan, WeightMatrix};
use crate::error::{Result, SsamgError};
use crate::galerkin::galerkin_product;
use crate::krylov::Preconditioner;
use crate::linalg::{LinearOperator, SemiStructMatrix, DENSE_CAP};
use crate::smooth::{skip_levels, SmootherKind, SmootherState};
use crate::transfer::{build_prolongation, Prolongation};
use crate::uamg::{uamg_setup, UamgHierarchy, UamgOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseStrategy {
    /// One sweep of the level smoother on every cell.
    RelaxSweep,
    /// Dense LU solve.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsamgOptions {
    pub smoother: SmootherKind,
    /// ω for L1-Jacobi; ignored by weighted Jacobi.
    pub relax_factor: f64,
    pub skip: bool,
    pub hybrid: bool,
    /// Number of semi-structured levels kept when `hybrid` is set.
    pub transition_level: usize,
    /// Coarsening stops below this many cells; `None` means the number of parts.
    pub s_max: Option<usize>,
    pub l_max: usize,
    pub coarse_strategy: CoarseStrategy,
    pub uamg: UamgOptions,
}

impl Default for SsamgOptions {
    fn default() -> Self {
        Self::base()
    }
}

impl SsamgOptions {
    /// L1-Jacobi with factor 3/2, no skip, no hybrid tail.
    pub fn base() -> Self {
        SsamgOptions {
            smoother: SmootherKind::L1Jacobi,
            relax_factor: 1.5,
            skip: false,
            hybrid: false,
            transition_level: 10,
            s_max: None,
            l_max: 31,
            coarse_strategy: CoarseStrategy::RelaxSweep,
            uamg: UamgOptions::default(),
        }
    }

    pub fn skip() -> Self {
        SsamgOptions { skip: true, ..Self::base() }
    }

    pub fn hybrid() -> Self {
        SsamgOptions { hybrid: true, transition_level: 10, ..Self::base() }
    }

    pub fn opt() -> Self {
        SsamgOptions { hybrid: true, transition_level: 7, ..Self::base() }
    }

    /// Inner cycle of the Split preconditioner: weighted Jacobi with skip.
    pub fn split() -> Self {
        SsamgOptions { smoother: SmootherKind::WeightedJacobi, skip: true, ..Self::base() }
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub a: SemiStructMatrix,
    /// Prolongation from the next level; `None` on the last semi-structured level.
    pub p: Option<Prolongation>,
    pub smoother: SmootherState,
    pub directions: Vec<Option<usize>>,
    pub skip: Vec<bool>,
    pub weights: WeightMatrix,
}

#[derive(Debug, Clone)]
enum Coarsest {
    Sweep,
    Lu(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Tail(UamgHierarchy),
}

/// Semi-structured AMG hierarchy.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<Level>,
    coarsest: Coarsest,
    plan: CoarsenPlan,
}

pub fn ssamg_setup(a: &SemiStructMatrix, opts: &SsamgOptions) -> Result<Hierarchy> {
    let grid = a.grid();
    if grid.num_cells() == 0 {
        return Err(SsamgError::InvalidGrid("empty grid".into()));
    }
    if opts.hybrid && opts.transition_level == 0 {
        return Err(SsamgError::InvalidProblem("transition level must be at least 1".into()));
    }
    let w = compute_weights(a);
    let s_max = opts.s_max.unwrap_or(grid.num_parts()).max(1);
    let plan = build_plan(grid, &w, s_max, opts.l_max);
    let n_d = grid.ndim();
    let skip = if opts.skip {
        skip_levels(&plan, n_d)
    } else {
        vec![vec![false; grid.num_parts()]; plan.num_levels()]
    };
    let tail_at = if opts.hybrid && opts.transition_level <= plan.num_levels() {
        Some(opts.transition_level - 1)
    } else {
        None
    };
    let last = tail_at.unwrap_or(plan.num_levels() - 1);

    let mut levels = Vec::with_capacity(last + 1);
    let mut current = a.clone();
    for l in 0..=last {
        let dirs = if l == last { vec![None; grid.num_parts()] } else { plan.directions[l].clone() };
        let p = if l == last { None } else { Some(build_prolongation(&current, &dirs)?) };
        let applied = p.as_ref().map(|p| p.directions().to_vec()).unwrap_or(dirs);
        let relax: Vec<bool> = (0..grid.num_parts())
            .map(|pi| {
                if l == last {
                    tail_at.is_none()
                } else {
                    applied[pi].is_some() && !skip[l][pi]
                }
            })
            .collect();
        let smoother = SmootherState::new(
            &current,
            opts.smoother,
            opts.relax_factor,
            &plan.weights[l],
            &applied,
            &relax,
        )?;
        let next = match &p {
            Some(p) => Some(galerkin_product(p, &current)?),
            None => None,
        };
        levels.push(Level {
            a: current,
            p,
            smoother,
            directions: applied,
            skip: skip[l].clone(),
            weights: plan.weights[l].clone(),
        });
        match next {
            Some(n) => current = n,
            None => break,
        }
    }

    let coarse_a = &levels.last().unwrap().a;
    let coarsest = if tail_at.is_some() {
        Coarsest::Tail(uamg_setup(coarse_a.to_row_sparse(), opts.uamg)?)
    } else {
        match opts.coarse_strategy {
            CoarseStrategy::RelaxSweep => Coarsest::Sweep,
            CoarseStrategy::Direct => {
                let lu = LU::new(coarse_a.to_dense_capped(DENSE_CAP)?);
                if !lu.is_invertible() {
                    return Err(SsamgError::SingularCoarse);
                }
                Coarsest::Lu(lu)
            }
        }
    };
    Ok(Hierarchy { levels, coarsest, plan })
}

fn residual(a: &SemiStructMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

impl Hierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Semi-structured levels, the last one included.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn plan(&self) -> &CoarsenPlan {
        &self.plan
    }

    pub fn tail(&self) -> Option<&UamgHierarchy> {
        match &self.coarsest {
            Coarsest::Tail(t) => Some(t),
            _ => None,
        }
    }

    /// Smoother cell updates per level since the last reset.
    pub fn level_work(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.smoother.work()).collect()
    }

    pub fn reset_work(&self) {
        self.levels.iter().for_each(|l| l.smoother.reset_work());
    }

    /// V(1,1)-cycle at level `l` from a zero initial guess.
    pub fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let lev = &self.levels[l];
        let Some(p) = &lev.p else {
            match &self.coarsest {
                Coarsest::Sweep => lev.smoother.relax_from_zero(b, x),
                Coarsest::Lu(lu) => {
                    let sol = lu.solve(&DVector::from_column_slice(b)).expect("factor is invertible");
                    x.copy_from_slice(sol.as_slice());
                }
                Coarsest::Tail(t) => {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    t.vcycle(b, x);
                }
            }
            return;
        };
        lev.smoother.relax_from_zero(b, x);
        let mut r = vec![0.0; x.len()];
        if lev.smoother.is_active() {
            residual(&lev.a, b, x, &mut r);
        } else {
            r.copy_from_slice(b);
        }
        let nc = p.coarse_grid().num_cells();
        let mut rc = vec![0.0; nc];
        p.restrict(&r, &mut rc);
        let mut xc = vec![0.0; nc];
        self.vcycle(l + 1, &rc, &mut xc);
        p.prolong_add(&xc, x);
        lev.smoother.relax(&lev.a, b, x, 1);
    }

    /// Levels, sizes, directions, stencil sizes and `U` nonzeros.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (l, lev) in self.levels.iter().enumerate() {
            let _ = write!(
                out,
                "level {l:2} rows {:9} unnz {:7} stencils",
                lev.a.num_rows(),
                lev.a.unstructured().nnz()
            );
            for ps in lev.a.stencil().parts() {
                let _ = write!(out, " {}", ps.shape().len());
            }
            out.push_str(" dirs");
            for (d, s) in lev.directions.iter().zip(&lev.skip) {
                match d {
                    Some(d) => {
                        let _ = write!(out, " {d}{}", if *s { "s" } else { "" });
                    }
                    None => out.push_str(" -"),
                }
            }
            out.push('\n');
        }
        if let Some(t) = self.tail() {
            for (k, lev) in t.levels().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "tail  {k:2} rows {:9} nnz {:9}",
                    lev.a.n_rows(),
                    lev.a.nnz()
                );
            }
        }
        out
    }
}

impl Preconditioner for Hierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(0, r, z);
    }
}

/// Block Jacobi over parts: an independent structured hierarchy per part,
/// inter-part coupling ignored.
#[derive(Debug, Clone)]
pub struct SplitPreconditioner {
    blocks: Vec<(Range<usize>, Hierarchy)>,
}

pub fn split_setup(a: &SemiStructMatrix, opts: &SsamgOptions) -> Result<SplitPreconditioner> {
    let grid = a.grid();
    let blocks = (0..grid.num_parts())
        .map(|p| {
            let block = a.part_block(p)?;
            Ok((grid.part_range(p), ssamg_setup(&block, opts)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitPreconditioner { blocks })
}

impl SplitPreconditioner {
    pub fn blocks(&self) -> impl Iterator<Item = &Hierarchy> {
        self.blocks.iter().map(|b| &b.1)
    }
}

impl Preconditioner for SplitPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for (range, h) in &self.blocks {
            h.apply(&r[range.clone()], &mut z[range.clone()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxIdx, SemiStructGrid};
    use crate::krylov::{pcg, IdentityPreconditioner, PcgOptions};
    use crate::linalg::{dot, RowSparseMatrix, StencilMatrix, StencilShape};
    use std::sync::Arc;

    fn poisson_1d(n: i64) -> SemiStructMatrix {
        let g = Arc::new(
            SemiStructGrid::new(2, vec![vec![BoxIdx::new([0, 0, 0], [n - 1, 0, 0]).unwrap()]]).unwrap(),
        );
        let shape = StencilShape::new(vec![[0, 0, 0], [-1, 0, 0], [1, 0, 0]]).unwrap();
        let coeffs = (0..n)
            .flat_map(|i| [2.0, if i == 0 { 0.0 } else { -1.0 }, if i == n - 1 { 0.0 } else { -1.0 }])
            .collect();
        let s = StencilMatrix::new(&g, vec![(shape, coeffs)]).unwrap();
        SemiStructMatrix::from_stencil(g, s).unwrap()
    }

    fn poisson_3d_parts(m: i64, parts: usize, coupled: bool) -> SemiStructMatrix {
        let g = Arc::new(SemiStructGrid::new(3, vec![vec![BoxIdx::cube(m)]; parts]).unwrap());
        let row = |c: [i64; 3]| {
            let mut r = [6.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0];
            for d in 0..3 {
                if c[d] == 0 {
                    r[1 + 2 * d] = 0.0;
                }
                if c[d] == m - 1 {
                    r[2 + 2 * d] = 0.0;
                }
            }
            r
        };
        let blocks = (0..parts)
            .map(|p| (StencilShape::seven_point(), g.part(p).cells().flat_map(row).collect()))
            .collect();
        let s = StencilMatrix::new(&g, blocks).unwrap();
        let n = g.num_cells();
        let mut t = Vec::new();
        if coupled {
            // part p's i = m-1 face to part p+1's i = 0 face, kept SPD by a unit shift
            for p in 0..parts - 1 {
                for j in 0..m {
                    for k in 0..m {
                        let a = g.global_index(p, [m - 1, j, k]).unwrap();
                        let b = g.global_index(p + 1, [0, j, k]).unwrap();
                        t.push((a, b, -0.5));
                        t.push((b, a, -0.5));
                    }
                }
            }
        }
        let u = RowSparseMatrix::from_triplets(n, n, t).unwrap();
        SemiStructMatrix::new(g, s, u).unwrap()
    }

    fn cycle(h: &impl Preconditioner, b: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; b.len()];
        h.apply(b, &mut z);
        z
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn one_level_is_the_coarse_strategy() {
        let a = poisson_1d(7);
        let opts = SsamgOptions { l_max: 1, ..SsamgOptions::base() };
        let h = ssamg_setup(&a, &opts).unwrap();
        assert_eq!(h.num_levels(), 1);
        let b = [1.0; 7];
        let z = cycle(&h, &b);
        let l1 = a.l1_row_sums();
        for i in 0..7 {
            assert_eq!(z[i], 1.5 / l1.values()[i]);
        }
    }

    #[test]
    fn two_level_beats_smoothing_alone() {
        let a = poisson_1d(7);
        let dense = a.to_dense().unwrap();
        let xs = DVector::from_vec(pseudo_random(7, 3));
        let b: Vec<f64> = (&dense * &xs).iter().cloned().collect();
        let anorm = |x: &[f64]| {
            let e = DVector::from_column_slice(x) - &xs;
            (e.transpose() * &dense * &e)[(0, 0)].sqrt()
        };
        let opts = SsamgOptions { l_max: 2, coarse_strategy: CoarseStrategy::Direct, ..SsamgOptions::base() };
        let h = ssamg_setup(&a, &opts).unwrap();
        let mg = cycle(&h, &b);
        let mut jac = vec![0.0; 7];
        h.levels()[0].smoother.relax(&a, &b, &mut jac, 2);
        assert!(anorm(&mg) < anorm(&jac));
    }

    #[test]
    fn cycle_is_linear_and_symmetric() {
        let a = poisson_3d_parts(6, 2, true);
        for opts in [SsamgOptions::base(), SsamgOptions::skip(), SsamgOptions { transition_level: 4, ..SsamgOptions::hybrid() }] {
            let h = ssamg_setup(&a, &opts).unwrap();
            let n = a.num_rows();
            let u = pseudo_random(n, 1);
            let v = pseudo_random(n, 2);
            let s: Vec<f64> = u.iter().zip(&v).map(|(p, q)| p + q).collect();
            let (bu, bv, bs) = (cycle(&h, &u), cycle(&h, &v), cycle(&h, &s));
            for i in 0..n {
                assert!((bs[i] - bu[i] - bv[i]).abs() < 1e-12);
            }
            let lhs = dot(&bu, &v);
            let rhs = dot(&u, &bv);
            let scale = crate::linalg::norm2(&u) * crate::linalg::norm2(&v);
            assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn galerkin_chain_matches_dense() {
        let a = poisson_3d_parts(4, 2, true);
        let h = ssamg_setup(&a, &SsamgOptions::base()).unwrap();
        for w in h.levels().windows(2) {
            let pd = w[0].p.as_ref().unwrap().matrix().to_dense();
            let oracle = pd.transpose() * w[0].a.to_dense().unwrap() * &pd;
            let got = w[1].a.to_dense().unwrap();
            assert!((got - &oracle).norm() <= 1e-12 * oracle.norm());
        }
    }

    #[test]
    fn hybrid_keeps_upper_levels() {
        let a = poisson_3d_parts(8, 2, true);
        let base = ssamg_setup(&a, &SsamgOptions::base()).unwrap();
        let hyb = ssamg_setup(&a, &SsamgOptions { transition_level: 5, ..SsamgOptions::hybrid() }).unwrap();
        assert_eq!(hyb.num_levels(), 5);
        assert!(hyb.tail().is_some());
        for l in 0..4 {
            assert_eq!(hyb.levels()[l].a, base.levels()[l].a);
            assert_eq!(hyb.levels()[l].smoother.scaled_inverse(), base.levels()[l].smoother.scaled_inverse());
        }
        assert_eq!(hyb.levels()[4].a, base.levels()[4].a);
    }

    #[test]
    fn preconditioned_cg_converges() {
        let a = poisson_3d_parts(8, 2, true);
        let b = vec![1.0; a.num_rows()];
        let h = ssamg_setup(&a, &SsamgOptions::base()).unwrap();
        let with = pcg(&a, &b, &h, PcgOptions::default(), None).unwrap();
        let without = pcg(&a, &b, &IdentityPreconditioner, PcgOptions::default(), None).unwrap();
        assert!(with.converged);
        assert!(with.iterations < without.iterations);
    }

    #[test]
    fn split_equals_ssamg_without_coupling() {
        let a = poisson_3d_parts(4, 3, false);
        let opts = SsamgOptions::split();
        let h = ssamg_setup(&a, &opts).unwrap();
        let sp = split_setup(&a, &opts).unwrap();
        let r = pseudo_random(a.num_rows(), 9);
        let (z1, z2) = (cycle(&h, &r), cycle(&sp, &r));
        for (p, q) in z1.iter().zip(&z2) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn skip_levels_do_no_work() {
        let a = poisson_3d_parts(8, 1, false);
        let h = ssamg_setup(&a, &SsamgOptions::skip()).unwrap();
        let _ = cycle(&h, &vec![1.0; a.num_rows()]);
        let work = h.level_work();
        let last = h.num_levels() - 1;
        for (l, lev) in h.levels().iter().enumerate() {
            if lev.skip[0] {
                assert_eq!(work[l], 0, "level {l}");
            } else if l < 3 || l == last {
                assert!(work[l] > 0);
            }
        }
        assert!(h.levels()[3].skip[0]);
    }
}
