//! Per-part semi-coarsening directions.
//!
//! Each part gets a row of "representative grid spacings" `W[p][d]` derived
//! from its stencil coefficients. Every level coarsens each active part in its
//! direction of smallest spacing and then doubles that spacing.

use std::fmt::Write as _;

use crate::error::{Result, SsamgError};
use crate::grid::{bounding_box, coarsen_box, BoxIdx, SemiStructGrid};
use crate::linalg::{SemiStructMatrix, CENTER};

/// Spacing assigned to directions that cannot be coarsened.
pub const SENTINEL: f64 = 1e30;

/// `n_p x n_d` grid-spacing metric. Directions beyond `ndim` hold [`SENTINEL`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    ndim: usize,
    rows: Vec<[f64; 3]>,
}

impl WeightMatrix {
    pub fn new(ndim: usize, rows: Vec<[f64; 3]>) -> Self {
        WeightMatrix { ndim, rows }
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn num_parts(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.rows[p][..self.ndim]
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    /// True when every direction of part `p` is flagged non-coarsenable.
    pub fn is_frozen(&self, p: usize) -> bool {
        self.row(p).iter().all(|&w| w >= SENTINEL)
    }
}

/// Collapsed off-diagonal sums `c_d` per part, using every stored coefficient.
pub fn collapsed_sums(a: &SemiStructMatrix) -> Vec<[f64; 3]> {
    let grid = a.grid();
    a.stencil()
        .parts()
        .iter()
        .map(|ps| {
            let shape = ps.shape();
            let center = shape.index_of(CENTER).unwrap_or(0);
            let n = ps.num_cells();
            let diag_sum: f64 = (0..n).map(|c| ps.row(c)[center]).sum();
            let sign = if diag_sum < 0.0 { -1.0 } else { 1.0 };
            let mut c = [0.0; 3];
            for local in 0..n {
                for (o, v) in shape.offsets().iter().zip(ps.row(local)) {
                    for d in 0..grid.ndim() {
                        if o[d] != 0 {
                            c[d] -= sign * v;
                        }
                    }
                }
            }
            c
        })
        .collect()
}

/// Grid-spacing metric from the structured coefficients; `U` is ignored.
pub fn compute_weights(a: &SemiStructMatrix) -> WeightMatrix {
    let ndim = a.grid().ndim();
    let rows = collapsed_sums(a)
        .into_iter()
        .map(|c| {
            let cmax = c[..ndim].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut w = [SENTINEL; 3];
            if cmax > 0.0 {
                for d in 0..ndim {
                    if c[d] > 0.0 && c[d] > 1e-14 * cmax {
                        w[d] = (cmax / c[d]).sqrt();
                    }
                }
            }
            w
        })
        .collect();
    WeightMatrix { ndim, rows }
}

/// Index of the smallest spacing; ties go to the smallest index.
pub fn choose_direction(w_row: &[f64]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (d, &w) in w_row.iter().enumerate() {
        if w >= SENTINEL || !w.is_finite() {
            continue;
        }
        if best.map_or(true, |b| w < w_row[b]) {
            best = Some(d);
        }
    }
    best.ok_or(SsamgError::NoDirection)
}

/// Coarsening directions for every level and part.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarsenPlan {
    ndim: usize,
    /// Part bounding boxes at each level.
    pub bboxes: Vec<Vec<BoxIdx>>,
    /// Spacing metric in effect at each level (before that level's doubling).
    pub weights: Vec<WeightMatrix>,
    /// Direction used to go from level `l` to `l + 1`; `None` on the coarsest
    /// level and for inactive parts.
    pub directions: Vec<Vec<Option<usize>>>,
}

impl CoarsenPlan {
    pub fn num_levels(&self) -> usize {
        self.directions.len()
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    pub fn direction(&self, level: usize, part: usize) -> Option<usize> {
        self.directions[level][part]
    }

    pub fn total_size(&self, level: usize) -> usize {
        self.bboxes[level].iter().map(|b| b.volume()).sum()
    }

    /// One line per level: `part:direction` pairs, `-` for none.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (l, dirs) in self.directions.iter().enumerate() {
            let _ = write!(out, "level {l:2} size {:8}:", self.total_size(l));
            for (p, d) in dirs.iter().enumerate() {
                match d {
                    Some(d) => {
                        let _ = write!(out, " {p}:{d}");
                    }
                    None => {
                        let _ = write!(out, " {p}:-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Semi-coarsening plan over part bounding boxes.
///
/// Stops at the first level whose total bounding-box size is below `s_max`,
/// when `l_max` levels exist, or when no part can be coarsened further.
pub fn build_plan(grid: &SemiStructGrid, w: &WeightMatrix, s_max: usize, l_max: usize) -> CoarsenPlan {
    let ndim = grid.ndim();
    let l_max = l_max.max(1);
    let mut bboxes: Vec<BoxIdx> = grid.parts().iter().map(bounding_box).collect();
    let mut weights = w.clone();
    let mut plan = CoarsenPlan {
        ndim,
        bboxes: Vec::new(),
        weights: Vec::new(),
        directions: Vec::new(),
    };
    loop {
        let total: usize = bboxes.iter().map(|b| b.volume()).sum();
        let stop = total < s_max || plan.directions.len() + 1 >= l_max;
        let dirs: Vec<Option<usize>> = if stop {
            vec![None; bboxes.len()]
        } else {
            bboxes
                .iter()
                .enumerate()
                .map(|(p, bb)| {
                    if bb.volume() <= 1 {
                        return None;
                    }
                    // width-1 directions cannot shrink
                    let row: Vec<f64> = (0..ndim)
                        .map(|d| if bb.extent(d) > 1 { weights.rows[p][d] } else { SENTINEL })
                        .collect();
                    choose_direction(&row).ok()
                })
                .collect()
        };
        let done = dirs.iter().all(Option::is_none);
        plan.bboxes.push(bboxes.clone());
        plan.weights.push(weights.clone());
        plan.directions.push(dirs.clone());
        if done {
            break;
        }
        for (p, d) in dirs.iter().enumerate() {
            if let Some(d) = *d {
                bboxes[p] = coarsen_box(&bboxes[p], d);
                weights.rows[p][d] *= 2.0;
            }
        }
    }
    plan
}
