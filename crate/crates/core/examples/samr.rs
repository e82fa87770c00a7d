//! Refined patch inside a coarse cube, solved with each SSAMG preset.

use ssamg::experiment::{run_experiment, Overrides, Variant};
use ssamg::krylov::PcgOptions;
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    let p = build_problem(ProblemSpec::new(Case::Samr, 16))?;
    let u = p.a.unstructured();
    println!("{} unknowns, {} unstructured entries", p.a.num_rows(), u.nnz());
    for v in [Variant::SsamgBase, Variant::SsamgSkip, Variant::SsamgHybrid, Variant::SsamgOpt] {
        let (rec, _, _) = run_experiment(&p, v, &Overrides::default(), PcgOptions::default())?;
        println!("{}", rec.csv_row());
    }
    Ok(())
}
