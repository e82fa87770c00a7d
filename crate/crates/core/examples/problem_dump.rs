//! Write a problem in text form, read it back and solve the copy.

use ssamg::experiment::{read_problem, write_problem};
use ssamg::hierarchy::{ssamg_setup, SsamgOptions};
use ssamg::krylov::{pcg, PcgOptions};
use ssamg::problems::{build_problem, Case, ProblemSpec};

fn main() -> ssamg::Result<()> {
    let p = build_problem(ProblemSpec::new(Case::Tripoint, 2))?;
    let text = write_problem(&p.a, &p.b);
    println!("{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    println!("... ({} lines)", text.lines().count());
    let (a, b) = read_problem(&text)?;
    assert_eq!(write_problem(&a, &b), text);
    let h = ssamg_setup(&a, &SsamgOptions::base())?;
    let res = pcg(&a, b.values(), &h, PcgOptions::default(), None)?;
    println!("reloaded copy: {} iterations", res.iterations);
    Ok(())
}
