//! Hybrid hierarchy on the tripoint case: semi-structured levels on top,
//! unstructured AMG below the transition level.

use ssamg::hierarchy::{ssamg_setup, SsamgOptions};
use ssamg::krylov::{pcg, PcgOptions};
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    let p = build_problem(ProblemSpec::new(Case::Tripoint, 16))?;
    for t in [3, 5, 7, 10] {
        let opts = SsamgOptions { transition_level: t, ..SsamgOptions::hybrid() };
        let h = ssamg_setup(&p.a, &opts)?;
        let tail = h.tail().map_or(0, |u| u.num_levels());
        let res = pcg(&p.a, p.b.values(), &h, PcgOptions::default(), None)?;
        println!("T={t:2}: {} semi-structured + {tail} unstructured levels, {} iterations", h.num_levels(), res.iterations);
    }
    Ok(())
}
