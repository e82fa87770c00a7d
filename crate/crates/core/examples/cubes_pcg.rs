//! Solve the four-cube problem with SSAMG-preconditioned CG.
//!
//!     cargo run --release --example cubes_pcg -- 32

use ssamg::hierarchy::{ssamg_setup, SsamgOptions};
use ssamg::krylov::{pcg, PcgOptions};
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    let m = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let p = build_problem(ProblemSpec::new(Case::Cubes, m))?;
    let h = ssamg_setup(&p.a, &SsamgOptions::base())?;
    println!("{} unknowns, {} levels", p.a.num_rows(), h.num_levels());
    let res = pcg(&p.a, p.b.values(), &h, PcgOptions::default(), None)?;
    for (k, r) in res.history.iter().enumerate() {
        println!("{k:3} {r:.3e}");
    }
    println!("converged: {} in {} iterations", res.converged, res.iterations);
    Ok(())
}
