//! Per-part coarsening against a single global direction on aniso-b.

use ssamg::hierarchy::{ssamg_setup, SsamgOptions};
use ssamg::krylov::{pcg, PcgOptions};
use ssamg::problems::{build_problem, single_part_equivalent, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    let spec = ProblemSpec::new(Case::AnisoB, 16);
    let opts = PcgOptions { tol: 1e-6, max_iters: 200 };
    for spec in [spec, single_part_equivalent(spec)?] {
        let p = build_problem(spec)?;
        let h = ssamg_setup(&p.a, &SsamgOptions::base())?;
        let res = pcg(&p.a, p.b.values(), &h, opts, None)?;
        println!("{} part(s): {} iterations", p.a.grid().num_parts(), res.iterations);
    }
    Ok(())
}
