//! Benchmark problems: seven-point diffusion on multi-part grids.
//!
//! Each part discretizes `-(α u_xx + β u_yy + γ u_zz) = 0` on `m³` cells
//! with Dirichlet data equal to one on the `k = 0` face and zero elsewhere.
//! Couplings that leave a part go to `U`; the stencil keeps them as masked
//! entries.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Result, SsamgError};
use crate::grid::{BoxIdx, Index3, SemiStructGrid};
use crate::linalg::{RowSparseMatrix, SemiStructMatrix, SemiStructVector, StencilMatrix, StencilShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// Four cubes in a 2x2 arrangement.
    Cubes,
    /// Cubes, every part strongly coupled in `i`.
    AnisoA,
    /// Cubes, parts 0 and 2 strong in `i`, parts 1 and 3 strong in `j`.
    AnisoB,
    /// Cubes, part 0 strong in `i`, part 3 in `j`, parts 1 and 2 in `k`.
    AnisoC,
    /// Three cubes around a common edge.
    Tripoint,
    /// A coarse cube with one refined patch.
    Samr,
}

impl Case {
    pub const ALL: [Case; 6] = [Case::Cubes, Case::AnisoA, Case::AnisoB, Case::AnisoC, Case::Tripoint, Case::Samr];

    pub fn name(self) -> &'static str {
        match self {
            Case::Cubes => "cubes",
            Case::AnisoA => "aniso-a",
            Case::AnisoB => "aniso-b",
            Case::AnisoC => "aniso-c",
            Case::Tripoint => "tripoint",
            Case::Samr => "samr",
        }
    }

    fn is_cube_layout(self) -> bool {
        matches!(self, Case::Cubes | Case::AnisoA | Case::AnisoB | Case::AnisoC)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = SsamgError;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('-', "_") == s)
            .ok_or_else(|| SsamgError::InvalidProblem(format!("unknown case '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    pub case: Case,
    pub m: usize,
    /// Assemble the same physical problem on a single part.
    pub single_part: bool,
}

impl ProblemSpec {
    pub fn new(case: Case, m: usize) -> Self {
        ProblemSpec { case, m, single_part: false }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub a: SemiStructMatrix,
    pub b: SemiStructVector,
}

/// `(α, β, γ)` of a part: 100 in the strong direction, 1 elsewhere.
pub fn scenario_coefficients(case: Case, part: usize) -> Result<[f64; 3]> {
    let strong = match (case, part) {
        (_, p) if p > 3 => return Err(SsamgError::InvalidProblem(format!("part {p} out of range"))),
        (Case::AnisoA, _) => 0,
        (Case::AnisoB, 0 | 2) => 0,
        (Case::AnisoB, _) => 1,
        (Case::AnisoC, 0) => 0,
        (Case::AnisoC, 3) => 1,
        (Case::AnisoC, _) => 2,
        _ => return Err(SsamgError::InvalidProblem(format!("case {case} has no anisotropy"))),
    };
    let mut c = [1.0; 3];
    c[strong] = 100.0;
    Ok(c)
}

fn part_coefficients(case: Case, part: usize) -> [f64; 3] {
    scenario_coefficients(case, part).unwrap_or([1.0; 3])
}

/// Face transmissibility between two cells with coefficients `a` and `b`.
pub fn harmonic(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        2.0 * a * b / (a + b)
    }
}

/// The cube-layout problem on one part of extent `(2m, 2m, m)`.
pub fn single_part_equivalent(spec: ProblemSpec) -> Result<ProblemSpec> {
    if !spec.case.is_cube_layout() {
        return Err(SsamgError::InvalidProblem(format!(
            "case {} has no single-part equivalent",
            spec.case
        )));
    }
    Ok(ProblemSpec { single_part: true, ..spec })
}

/// What lies across one face of a cell.
enum Across {
    /// Stencil entry `stored`, diagonal contribution `diag`, unstructured
    /// couplings `(part, cell, value)`.
    Coupled { stored: f64, diag: f64, u: Vec<(usize, Index3, f64)> },
    /// Eliminated boundary condition with the given value.
    Dirichlet { coef: f64, value: f64 },
}

const FACES: [(usize, i64); 6] = [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)];

fn boundary_value(d: usize, s: i64) -> f64 {
    if d == 2 && s < 0 {
        1.0
    } else {
        0.0
    }
}

fn step(c: Index3, d: usize, s: i64) -> Index3 {
    let mut g = c;
    g[d] += s;
    g
}

fn assemble<N, G>(grid: Arc<SemiStructGrid>, across: N, ghost: G) -> Result<(SemiStructMatrix, SemiStructVector)>
where
    N: Fn(usize, Index3, usize, i64) -> Across,
    G: Fn(usize, Index3) -> bool,
{
    let n = grid.num_cells();
    let mut b = vec![0.0; n];
    let mut u = Vec::new();
    let mut blocks = Vec::with_capacity(grid.num_parts());
    for p in 0..grid.num_parts() {
        let base = grid.part_offset(p);
        let mut coeffs = Vec::with_capacity(grid.part(p).num_cells() * 7);
        for (local, c) in grid.part(p).cells().enumerate() {
            let mut row = [0.0; 7];
            if ghost(p, c) {
                row[0] = 1.0;
                coeffs.extend_from_slice(&row);
                continue;
            }
            for (f, &(d, s)) in FACES.iter().enumerate() {
                match across(p, c, d, s) {
                    Across::Coupled { stored, diag, u: cpl } => {
                        row[1 + f] = stored;
                        row[0] += diag;
                        for (q, cq, v) in cpl {
                            u.push((base + local, grid.global_index(q, cq)?, v));
                        }
                    }
                    Across::Dirichlet { coef, value } => {
                        row[0] += coef;
                        b[base + local] += coef * value;
                    }
                }
            }
            coeffs.extend_from_slice(&row);
        }
        blocks.push((StencilShape::seven_point(), coeffs));
    }
    let s = StencilMatrix::new(&grid, blocks)?;
    let u = RowSparseMatrix::from_triplets(n, n, u)?;
    let a = SemiStructMatrix::new(grid.clone(), s, u)?;
    Ok((a, SemiStructVector::from_values(grid, b)?))
}

const LAYOUT: [[i64; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];

fn cube_layout(case: Case, m: i64) -> Result<(SemiStructMatrix, SemiStructVector)> {
    let grid = Arc::new(SemiStructGrid::new(3, vec![vec![BoxIdx::cube(m)]; 4])?);
    let locate = move |g: Index3| -> Option<(usize, Index3)> {
        if g.iter().any(|&v| v < 0) || g[0] >= 2 * m || g[1] >= 2 * m || g[2] >= m {
            return None;
        }
        let q = (g[0] / m + 2 * (g[1] / m)) as usize;
        Some((q, [g[0] - LAYOUT[q][0] * m, g[1] - LAYOUT[q][1] * m, g[2]]))
    };
    let across = move |p: usize, c: Index3, d: usize, s: i64| {
        let own = part_coefficients(case, p)[d];
        let g = step([c[0] + LAYOUT[p][0] * m, c[1] + LAYOUT[p][1] * m, c[2]], d, s);
        match locate(g) {
            None => Across::Dirichlet { coef: own, value: boundary_value(d, s) },
            Some((q, _)) if q == p => Across::Coupled { stored: -own, diag: own, u: vec![] },
            Some((q, cq)) => {
                let h = harmonic(own, part_coefficients(case, q)[d]);
                Across::Coupled { stored: -h, diag: h, u: vec![(q, cq, -h)] }
            }
        }
    };
    assemble(grid, across, |_, _| false)
}

fn cube_layout_single(case: Case, m: i64) -> Result<(SemiStructMatrix, SemiStructVector)> {
    let grid = Arc::new(SemiStructGrid::new(
        3,
        vec![vec![BoxIdx::new([0, 0, 0], [2 * m - 1, 2 * m - 1, m - 1])?]],
    )?);
    let region = move |c: Index3| (c[0] / m + 2 * (c[1] / m)) as usize;
    let across = move |_: usize, c: Index3, d: usize, s: i64| {
        let own = part_coefficients(case, region(c))[d];
        let g = step(c, d, s);
        if g.iter().any(|&v| v < 0) || g[0] >= 2 * m || g[1] >= 2 * m || g[2] >= m {
            return Across::Dirichlet { coef: own, value: boundary_value(d, s) };
        }
        let h = harmonic(own, part_coefficients(case, region(g))[d]);
        Across::Coupled { stored: -h, diag: h, u: vec![] }
    };
    assemble(grid, across, |_, _| false)
}

/// Part 0 sits at the origin, part 2 east of it and part 1 north of it.
/// The east face of part 1 is glued to the north face of part 2, so the
/// three parts meet around the edge `i = j = m` of part 0.
fn tripoint(m: i64) -> Result<(SemiStructMatrix, SemiStructVector)> {
    let grid = Arc::new(SemiStructGrid::new(3, vec![vec![BoxIdx::cube(m)]; 3])?);
    let inside = move |c: Index3| c.iter().all(|&v| (0..m).contains(&v));
    let across = move |p: usize, c: Index3, d: usize, s: i64| {
        let g = step(c, d, s);
        if inside(g) {
            return Across::Coupled { stored: -1.0, diag: 1.0, u: vec![] };
        }
        let remote = match (p, d, s) {
            (0, 0, 1) => Some((2, [0, c[1], c[2]])),
            (2, 0, -1) => Some((0, [m - 1, c[1], c[2]])),
            (0, 1, 1) => Some((1, [c[0], 0, c[2]])),
            (1, 1, -1) => Some((0, [c[0], m - 1, c[2]])),
            (1, 0, 1) => Some((2, [c[1], m - 1, c[2]])),
            (2, 1, 1) => Some((1, [m - 1, c[0], c[2]])),
            _ => None,
        };
        match remote {
            Some((q, cq)) => Across::Coupled { stored: -1.0, diag: 1.0, u: vec![(q, cq, -1.0)] },
            None => Across::Dirichlet { coef: 1.0, value: boundary_value(d, s) },
        }
    };
    assemble(grid, across, |_, _| false)
}

/// Coarse part 0 covers `[0, m)³`; the patch refines coarse cells
/// `[lo, lo + m/2)³` with `lo = m/4` into the fine part 1 of `m³` cells.
/// Covered coarse cells are ghosts with identity rows. Each coarse face
/// under the patch couples to the four fine cells behind it with weight
/// 2/3 of the face coefficient.
fn samr(m: i64) -> Result<(SemiStructMatrix, SemiStructVector)> {
    if m % 2 != 0 {
        return Err(SsamgError::InvalidProblem("samr needs an even m".into()));
    }
    let grid = Arc::new(SemiStructGrid::new(3, vec![vec![BoxIdx::cube(m)]; 2])?);
    let lo = m / 4;
    let half = m / 2;
    let in_coarse = move |c: Index3| c.iter().all(|&v| (0..m).contains(&v));
    let is_ghost = move |c: Index3| c.iter().all(|&v| (lo..lo + half).contains(&v));
    let w = 2.0 / 3.0;
    let across = move |p: usize, c: Index3, d: usize, s: i64| {
        let g = step(c, d, s);
        if p == 0 {
            if !in_coarse(g) {
                return Across::Dirichlet { coef: 1.0, value: boundary_value(d, s) };
            }
            if !is_ghost(g) {
                return Across::Coupled { stored: -1.0, diag: 1.0, u: vec![] };
            }
            // fine cells of the patch face adjacent to this coarse cell
            let face = if s > 0 { 0 } else { m - 1 };
            let (t1, t2) = match d {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mut u = Vec::with_capacity(4);
            for a in 0..2 {
                for b in 0..2 {
                    let mut f = [0; 3];
                    f[d] = face;
                    f[t1] = 2 * (c[t1] - lo) + a;
                    f[t2] = 2 * (c[t2] - lo) + b;
                    u.push((1, f, -w));
                }
            }
            Across::Coupled { stored: 0.0, diag: 4.0 * w, u }
        } else {
            if (0..m).contains(&g[d]) {
                return Across::Coupled { stored: -1.0, diag: 1.0, u: vec![] };
            }
            let mut cc = [lo + c[0].div_euclid(2), lo + c[1].div_euclid(2), lo + c[2].div_euclid(2)];
            cc[d] = if s < 0 { lo - 1 } else { lo + half };
            if !in_coarse(cc) {
                return Across::Dirichlet { coef: 1.0, value: boundary_value(d, s) };
            }
            Across::Coupled { stored: -1.0, diag: 1.0, u: vec![(0, cc, -w)] }
        }
    };
    assemble(grid, across, move |p, c| p == 0 && is_ghost(c))
}

pub fn build_problem(spec: ProblemSpec) -> Result<Problem> {
    if spec.m < 2 {
        return Err(SsamgError::InvalidProblem(format!("m = {} is below 2", spec.m)));
    }
    let m = spec.m as i64;
    let (a, b) = match (spec.case, spec.single_part) {
        (c, true) if c.is_cube_layout() => cube_layout_single(c, m)?,
        (c, true) => {
            return Err(SsamgError::InvalidProblem(format!("case {c} has no single-part equivalent")))
        }
        (Case::Tripoint, false) => tripoint(m)?,
        (Case::Samr, false) => samr(m)?,
        (c, false) => cube_layout(c, m)?,
    };
    Ok(Problem { spec, a, b })
}

/// Global index in the single-part system of every multi-part cube-layout row.
pub fn cube_permutation(m: usize) -> Result<Vec<usize>> {
    let m = m as i64;
    let multi = SemiStructGrid::new(3, vec![vec![BoxIdx::cube(m)]; 4])?;
    let single = SemiStructGrid::new(3, vec![vec![BoxIdx::new([0, 0, 0], [2 * m - 1, 2 * m - 1, m - 1])?]])?;
    (0..multi.num_cells())
        .map(|g| {
            let (q, c) = multi.cell_of(g);
            single.global_index(0, [c[0] + LAYOUT[q][0] * m, c[1] + LAYOUT[q][1] * m, c[2]])
        })
        .collect()
}
