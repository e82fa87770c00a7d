use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser, ValueEnum};

use ssamg::experiment::{
    append_csv, case_label, history_csv, markdown_summary, parse_case, run_experiment, write_problem, Built,
    Overrides, Variant, CSV_HEADER,
};
use ssamg::krylov::PcgOptions;
use ssamg::problems::build_problem;
use ssamg::smooth::SmootherKind;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SmootherArg {
    Wjacobi,
    L1jacobi,
}

/// Build a benchmark problem, set up a preconditioner and solve with PCG.
///
/// `--case`, `--m` and `--variant` take comma-separated lists; every
/// combination is run and reported as one CSV row.
#[derive(Debug, Parser)]
#[command(name = "ssamg-bench", version)]
struct Args {
    /// cubes, aniso-a, aniso-b, aniso-c, tripoint, samr, single-part
    #[arg(long, value_delimiter = ',', default_value = "cubes")]
    case: Vec<String>,
    /// Cells per part and direction.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    m: Vec<usize>,
    /// ssamg-base, ssamg-skip, ssamg-hybrid, ssamg-opt, split, uamg, none
    #[arg(long, value_delimiter = ',', default_value = "ssamg-base")]
    variant: Vec<String>,
    #[arg(long, value_enum)]
    smoother: Option<SmootherArg>,
    /// L1-Jacobi relaxation factor [default: 1.5]
    #[arg(long)]
    relax_factor: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long)]
    s_max: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    transition_level: Option<usize>,
    #[arg(long, action = ArgAction::Set)]
    skip: Option<bool>,
    /// Append rows to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write a Markdown summary (setup, solve, iterations).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write the residual history of each run next to this path.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Print the coarsening plan and level summary to stderr.
    #[arg(long)]
    dump_hierarchy: bool,
    /// Write the assembled system in text form.
    #[arg(long)]
    dump_problem: Option<PathBuf>,
    /// Reserved; every generator is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with status 1 if any run fails to converge.
    #[arg(long)]
    strict: bool,
}

fn suffixed(path: &Path, tag: &str, many: bool) -> PathBuf {
    if !many {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-{tag}.{ext}"),
        None => format!("{stem}-{tag}"),
    };
    path.with_file_name(name)
}

fn run(args: Args) -> Result<bool, (u8, String)> {
    let usage = |e: ssamg::SsamgError| (2, e.to_string());
    let variants: Vec<Variant> = args
        .variant
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.parse())
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    if variants.is_empty() {
        return Err((2, "no variant given".into()));
    }
    let mut specs = Vec::new();
    for c in &args.case {
        for &m in &args.m {
            specs.push(parse_case(c, m).map_err(usage)?);
        }
    }
    if specs.is_empty() {
        return Err((2, "no case given".into()));
    }
    let overrides = Overrides {
        smoother: args.smoother.map(|s| match s {
            SmootherArg::Wjacobi => SmootherKind::WeightedJacobi,
            SmootherArg::L1jacobi => SmootherKind::L1Jacobi,
        }),
        relax_factor: args.relax_factor,
        skip: args.skip,
        transition_level: args.transition_level,
        s_max: args.s_max,
        l_max: args.l_max,
    };
    let pcg_opts = PcgOptions { tol: args.tol, max_iters: args.max_iters };
    let many = specs.len() * variants.len() > 1;

    println!("{CSV_HEADER}");
    let mut records = Vec::new();
    let mut all_converged = true;
    for spec in &specs {
        let problem = build_problem(*spec).map_err(usage)?;
        let tag = format!("{}-{}", case_label(spec), spec.m);
        if let Some(path) = &args.dump_problem {
            let path = suffixed(path, &tag, specs.len() > 1);
            std::fs::write(&path, write_problem(&problem.a, &problem.b))
                .map_err(|e| (1, format!("{}: {e}", path.display())))?;
        }
        for &variant in &variants {
            let (rec, res, built) =
                run_experiment(&problem, variant, &overrides, pcg_opts).map_err(|e| (1, e.to_string()))?;
            if args.dump_hierarchy {
                eprintln!("# {tag} {variant}");
                if let Built::Ssamg(h) = &built {
                    eprint!("{}", h.plan().dump());
                    eprint!("{}", h.dump());
                }
            }
            if let Some(path) = &args.history {
                let path = suffixed(path, &format!("{tag}-{variant}"), many);
                std::fs::write(&path, history_csv(&res.history))
                    .map_err(|e| (1, format!("{}: {e}", path.display())))?;
            }
            println!("{}", rec.csv_row());
            all_converged &= rec.converged;
            records.push(rec);
        }
    }
    if let Some(path) = &args.csv {
        append_csv(path, &records).map_err(|e| (1, e.to_string()))?;
    }
    if let Some(path) = &args.summary {
        std::fs::write(path, markdown_summary(&records)).map_err(|e| (1, format!("{}: {e}", path.display())))?;
    }
    Ok(all_converged)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let strict = args.strict;
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if strict => ExitCode::from(1),
        Ok(false) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
