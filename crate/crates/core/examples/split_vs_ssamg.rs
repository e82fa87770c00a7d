//! Block-Jacobi over parts (each block solved by SSAMG) against SSAMG on the
//! full operator.

use ssamg::experiment::{run_experiment, Overrides, Variant};
use ssamg::krylov::PcgOptions;
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    for m in [8, 16, 32] {
        let p = build_problem(ProblemSpec::new(Case::Cubes, m))?;
        let mut line = format!("m={m:2}");
        for v in [Variant::SsamgBase, Variant::Split] {
            let (rec, _, _) = run_experiment(&p, v, &Overrides::default(), PcgOptions::default())?;
            line += &format!("  {v}: {}", rec.iters);
        }
        println!("{line}");
    }
    Ok(())
}
