//! Print the per-part coarsening directions for each anisotropic case.

use ssamg::coarsen::{build_plan, compute_weights};
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    for case in [Case::AnisoA, Case::AnisoB, Case::AnisoC] {
        let p = build_problem(ProblemSpec::new(case, 8))?;
        let w = compute_weights(&p.a);
        println!("== {case}");
        for (q, row) in w.rows().iter().enumerate() {
            println!("part {q}: W = [{:.3}, {:.3}, {:.3}]", row[0], row[1], row[2]);
        }
        let plan = build_plan(p.a.grid(), &w, p.a.grid().num_parts(), 31);
        print!("{}", plan.dump());
    }
    Ok(())
}
