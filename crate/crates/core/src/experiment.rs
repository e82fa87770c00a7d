//! Benchmark runs: build a problem, set up a preconditioner, solve with PCG.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Result, SsamgError};
use crate::grid::{BoxIdx, SemiStructGrid};
use crate::hierarchy::{split_setup, ssamg_setup, Hierarchy, SsamgOptions};
use crate::krylov::{pcg, IdentityPreconditioner, PcgOptions, PcgResult, Preconditioner};
use crate::linalg::{RowSparseMatrix, SemiStructMatrix, SemiStructVector, StencilMatrix, StencilShape};
use crate::problems::{Case, Problem, ProblemSpec};
use crate::smooth::SmootherKind;
use crate::uamg::uamg_setup;

pub const CSV_HEADER: &str = "case,variant,m,dof,iters,setup_seconds,solve_seconds,final_relres,converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    SsamgBase,
    SsamgSkip,
    SsamgHybrid,
    SsamgOpt,
    Split,
    Uamg,
    None,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::SsamgBase,
        Variant::SsamgSkip,
        Variant::SsamgHybrid,
        Variant::SsamgOpt,
        Variant::Split,
        Variant::Uamg,
        Variant::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SsamgBase => "ssamg-base",
            Variant::SsamgSkip => "ssamg-skip",
            Variant::SsamgHybrid => "ssamg-hybrid",
            Variant::SsamgOpt => "ssamg-opt",
            Variant::Split => "split",
            Variant::Uamg => "uamg",
            Variant::None => "none",
        }
    }

    /// Preset options of the semi-structured variants.
    pub fn preset(self) -> SsamgOptions {
        match self {
            Variant::SsamgSkip => SsamgOptions::skip(),
            Variant::SsamgHybrid => SsamgOptions::hybrid(),
            Variant::SsamgOpt => SsamgOptions::opt(),
            Variant::Split => SsamgOptions::split(),
            _ => SsamgOptions::base(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = SsamgError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| SsamgError::InvalidProblem(format!("unknown variant '{s}'")))
    }
}

/// Name of a problem as printed in the CSV `case` column.
pub fn case_label(spec: &ProblemSpec) -> String {
    if spec.single_part {
        if spec.case == Case::Cubes {
            "single-part".into()
        } else {
            format!("{}-single", spec.case)
        }
    } else {
        spec.case.name().into()
    }
}

/// Parse a CSV case label back into a problem description.
pub fn parse_case(label: &str, m: usize) -> Result<ProblemSpec> {
    if label == "single-part" {
        return Ok(ProblemSpec { case: Case::Cubes, m, single_part: true });
    }
    if let Some(base) = label.strip_suffix("-single") {
        return Ok(ProblemSpec { case: base.parse()?, m, single_part: true });
    }
    Ok(ProblemSpec::new(label.parse()?, m))
}

/// Overrides applied on top of a variant's preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub smoother: Option<SmootherKind>,
    pub relax_factor: Option<f64>,
    pub skip: Option<bool>,
    pub transition_level: Option<usize>,
    pub s_max: Option<usize>,
    pub l_max: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut o: SsamgOptions) -> SsamgOptions {
        if let Some(s) = self.smoother {
            o.smoother = s;
        }
        if let Some(f) = self.relax_factor {
            o.relax_factor = f;
        }
        if let Some(s) = self.skip {
            o.skip = s;
        }
        if let Some(t) = self.transition_level {
            o.transition_level = t;
        }
        if self.s_max.is_some() {
            o.s_max = self.s_max;
        }
        if let Some(l) = self.l_max {
            o.l_max = l;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub case: String,
    pub variant: Variant,
    pub m: usize,
    pub dof: usize,
    pub iters: usize,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub final_relres: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:e},{}",
            self.case,
            self.variant,
            self.m,
            self.dof,
            self.iters,
            self.setup_seconds,
            self.solve_seconds,
            self.final_relres,
            self.converged
        )
    }
}

/// A set-up preconditioner of any variant.
pub enum Built {
    Ssamg(Hierarchy),
    Split(crate::hierarchy::SplitPreconditioner),
    Uamg(crate::uamg::UamgHierarchy),
    None,
}

impl Preconditioner for Built {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Built::Ssamg(h) => h.apply(r, z),
            Built::Split(s) => s.apply(r, z),
            Built::Uamg(u) => u.apply(r, z),
            Built::None => IdentityPreconditioner.apply(r, z),
        }
    }
}

pub fn setup(a: &SemiStructMatrix, variant: Variant, overrides: &Overrides) -> Result<Built> {
    let opts = overrides.apply(variant.preset());
    Ok(match variant {
        Variant::Split => Built::Split(split_setup(a, &opts)?),
        Variant::Uamg => {
            let mut u = opts.uamg;
            if let Some(f) = overrides.relax_factor {
                u.relax_factor = f;
            }
            Built::Uamg(uamg_setup(a.to_row_sparse(), u)?)
        }
        Variant::None => Built::None,
        _ => Built::Ssamg(ssamg_setup(a, &opts)?),
    })
}

/// Set up and solve one problem; returns the record and the solver output.
pub fn run_experiment(
    problem: &Problem,
    variant: Variant,
    overrides: &Overrides,
    pcg_opts: PcgOptions,
) -> Result<(RunRecord, PcgResult, Built)> {
    let t0 = Instant::now();
    let built = setup(&problem.a, variant, overrides)?;
    let setup_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let res = pcg(&problem.a, problem.b.values(), &built, pcg_opts, None)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    let rec = RunRecord {
        case: case_label(&problem.spec),
        variant,
        m: problem.spec.m,
        dof: problem.a.num_rows(),
        iters: res.iterations,
        setup_seconds,
        solve_seconds,
        final_relres: res.final_relres(),
        converged: res.converged,
        history: res.history.clone(),
    };
    Ok((rec, res, built))
}

/// Append rows to a CSV file, writing the header first if the file is new or empty.
pub fn append_csv(path: &Path, rows: &[RunRecord]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{CSV_HEADER}")?;
    }
    for r in rows {
        writeln!(f, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Residual history as CSV (`iteration,relres`).
pub fn history_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,relres\n");
    for (k, r) in history.iter().enumerate() {
        let _ = writeln!(out, "{k},{r:e}");
    }
    out
}

/// Setup time, solve time and iterations as three tables (rows: case and m,
/// columns: variants).
pub fn markdown_summary(records: &[RunRecord]) -> String {
    let variants: BTreeSet<Variant> = records.iter().map(|r| r.variant).collect();
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.case.clone(), r.m)) {
            keys.push((r.case.clone(), r.m));
        }
    }
    let panels: [(&str, fn(&RunRecord) -> String); 3] = [
        ("Setup time (s)", |r| format!("{:.3}", r.setup_seconds)),
        ("Solve time (s)", |r| format!("{:.3}", r.solve_seconds)),
        ("Iterations", |r| if r.converged { r.iters.to_string() } else { format!("{}*", r.iters) }),
    ];
    let mut out = String::new();
    for (title, cell) in panels {
        let _ = writeln!(out, "### {title}\n");
        out.push_str("| case | m | dof |");
        for v in &variants {
            let _ = write!(out, " {v} |");
        }
        out.push_str("\n|---|---|---|");
        for _ in &variants {
            out.push_str("---|");
        }
        out.push('\n');
        for (case, m) in &keys {
            let dof = records.iter().find(|r| &r.case == case && r.m == *m).map_or(0, |r| r.dof);
            let _ = write!(out, "| {case} | {m} | {dof} |");
            for v in &variants {
                match records.iter().find(|r| &r.case == case && r.m == *m && r.variant == *v) {
                    Some(r) => {
                        let _ = write!(out, " {} |", cell(r));
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("`*` marks runs that hit the iteration cap.\n");
    out
}

/// Plain-text problem dump.
///
/// ```text
/// ssamg-problem 1
/// ndim <d>
/// parts <n_p>
/// part <p> boxes <n_b>
/// box <lo_i> <lo_j> <lo_k> <hi_i> <hi_j> <hi_k>
/// stencil <p> offsets <n_s>
/// offset <o_i> <o_j> <o_k>
/// coeffs <p> <cells>
/// <n_s coefficients per line, one line per cell>
/// unstructured <nnz>
/// <row> <col> <value>
/// rhs <n>
/// <value per line>
/// end
/// ```
///
/// Cells are listed in global order; values use the shortest round-trip
/// decimal form, so reading a dump back reproduces the system bit for bit.
pub fn write_problem(a: &SemiStructMatrix, b: &SemiStructVector) -> String {
    let g = a.grid();
    let mut out = String::new();
    let _ = writeln!(out, "ssamg-problem 1\nndim {}\nparts {}", g.ndim(), g.num_parts());
    for (p, part) in g.parts().iter().enumerate() {
        let _ = writeln!(out, "part {p} boxes {}", part.boxes.len());
        for bx in &part.boxes {
            let (l, u) = (bx.lower, bx.upper);
            let _ = writeln!(out, "box {} {} {} {} {} {}", l[0], l[1], l[2], u[0], u[1], u[2]);
        }
    }
    for (p, ps) in a.stencil().parts().iter().enumerate() {
        let _ = writeln!(out, "stencil {p} offsets {}", ps.shape().len());
        for o in ps.shape().offsets() {
            let _ = writeln!(out, "offset {} {} {}", o[0], o[1], o[2]);
        }
        let _ = writeln!(out, "coeffs {p} {}", ps.num_cells());
        for c in 0..ps.num_cells() {
            let line: Vec<String> = ps.row(c).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    let u = a.unstructured();
    let _ = writeln!(out, "unstructured {}", u.nnz());
    for (i, j, v) in u.triplets() {
        let _ = writeln!(out, "{i} {j} {v:?}");
    }
    let _ = writeln!(out, "rhs {}", b.values().len());
    for v in b.values() {
        let _ = writeln!(out, "{v:?}");
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        for (n, l) in self.it.by_ref() {
            self.line = n + 1;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(t.split_whitespace().collect());
            }
        }
        Err(self.err("unexpected end of input"))
    }

    fn err(&self, msg: &str) -> SsamgError {
        SsamgError::Parse { line: self.line, message: msg.to_string() }
    }

    fn keyword(&mut self, kw: &str, n_args: usize) -> Result<Vec<&'a str>> {
        let t = self.next()?;
        if t.first() != Some(&kw) || t.len() != n_args + 1 {
            return Err(self.err(&format!("expected '{kw}' with {n_args} fields")));
        }
        Ok(t[1..].to_vec())
    }

    fn num<T: FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(&format!("bad number '{s}'")))
    }
}

pub fn read_problem(text: &str) -> Result<(SemiStructMatrix, SemiStructVector)> {
    let mut r = Lines { it: text.lines().enumerate(), line: 0 };
    let v = r.keyword("ssamg-problem", 1)?;
    if v[0] != "1" {
        return Err(r.err("unsupported version"));
    }
    let t = r.keyword("ndim", 1)?;
    let ndim: usize = r.num(t[0])?;
    let t = r.keyword("parts", 1)?;
    let n_p: usize = r.num(t[0])?;
    let mut parts = Vec::with_capacity(n_p);
    for p in 0..n_p {
        let t = r.keyword("part", 3)?;
        if r.num::<usize>(t[0])? != p || t[1] != "boxes" {
            return Err(r.err("part header out of order"));
        }
        let nb: usize = r.num(t[2])?;
        let mut boxes = Vec::with_capacity(nb);
        for _ in 0..nb {
            let t = r.keyword("box", 6)?;
            let c: Vec<i64> = t.iter().map(|s| r.num(s)).collect::<Result<_>>()?;
            boxes.push(BoxIdx::new([c[0], c[1], c[2]], [c[3], c[4], c[5]])?);
        }
        parts.push(boxes);
    }
    let grid = Arc::new(SemiStructGrid::new(ndim, parts)?);
    let mut blocks = Vec::with_capacity(n_p);
    for p in 0..n_p {
        let t = r.keyword("stencil", 3)?;
        if r.num::<usize>(t[0])? != p || t[1] != "offsets" {
            return Err(r.err("stencil header out of order"));
        }
        let ns: usize = r.num(t[2])?;
        let mut offs = Vec::with_capacity(ns);
        for _ in 0..ns {
            let t = r.keyword("offset", 3)?;
            offs.push([r.num(t[0])?, r.num(t[1])?, r.num(t[2])?]);
        }
        let shape = StencilShape::new(offs)?;
        let t = r.keyword("coeffs", 2)?;
        let cells: usize = r.num(t[1])?;
        let mut coeffs = Vec::with_capacity(cells * ns);
        for _ in 0..cells {
            let t = r.next()?;
            if t.len() != ns {
                return Err(r.err("coefficient count does not match the stencil"));
            }
            for s in t {
                coeffs.push(r.num(s)?);
            }
        }
        blocks.push((shape, coeffs));
    }
    let s = StencilMatrix::new(&grid, blocks)?;
    let t = r.keyword("unstructured", 1)?;
    let nnz: usize = r.num(t[0])?;
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let t = r.next()?;
        if t.len() != 3 {
            return Err(r.err("expected 'row col value'"));
        }
        trip.push((r.num(t[0])?, r.num(t[1])?, r.num(t[2])?));
    }
    let n = grid.num_cells();
    let u = RowSparseMatrix::from_triplets(n, n, trip)?;
    let t = r.keyword("rhs", 1)?;
    let len: usize = r.num(t[0])?;
    let mut b = Vec::with_capacity(len);
    for _ in 0..len {
        let t = r.next()?;
        if t.len() != 1 {
            return Err(r.err("expected one value"));
        }
        b.push(r.num(t[0])?);
    }
    r.keyword("end", 0)?;
    let a = SemiStructMatrix::new(grid.clone(), s, u)?;
    Ok((a, SemiStructVector::from_values(grid, b)?))
}
