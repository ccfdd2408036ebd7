use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hpvem::bench::{
    build_mesh, csv_writer, fit_rates, format_reference, generate_reference, reference_spectrum, run_checks,
    run_study_with, solve_case, summary, write_csv_rows, FitModel, ReferenceRun, Regime, StudyConfig, StudyOptions,
    TestCase,
};
use hpvem::mesh::write_mesh;
use hpvem::vem::{S1Kind, StabChoice};
use hpvem::{Error, Result};

#[derive(Parser)]
#[command(
    name = "hpvem",
    version,
    about = "p- and hp-version virtual element eigenvalue benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the meshes of a study and write them to --out.
    Mesh(StudyArgs),
    /// Solve one step of a study and print its eigenvalues.
    Solve {
        #[command(flatten)]
        args: StudyArgs,
        /// Step of the study to solve (default: the last one).
        #[arg(long)]
        run: Option<usize>,
    },
    /// Run a convergence study; writes CSV and summary files to --out.
    Study(StudyArgs),
    /// Run the built-in property checks.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compute a reference spectrum file from extrapolated fine hp solves.
    Reference {
        #[arg(long)]
        case: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 12)]
        layers: usize,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        mu: usize,
        /// Number of distinct eigenvalues written.
        #[arg(long, default_value_t = 6)]
        neigs: usize,
        #[arg(long, default_value = "drecipe")]
        stab: String,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Study options; every flag can also be given as `key=value` in --config.
#[derive(Args, Default)]
struct StudyArgs {
    /// tc1, tc2, tc3, tc4 or their full ids.
    #[arg(long)]
    case: Option<String>,
    /// h, p or hp.
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    pmin: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Largest layer index of the hp regime, or of the fixed graded p-regime mesh.
    #[arg(long)]
    layers: Option<usize>,
    /// explicit or drecipe.
    #[arg(long)]
    stab: Option<String>,
    /// Checkerboard contrast.
    #[arg(long)]
    eps: Option<f64>,
    /// Distinct eigenvalues tracked.
    #[arg(long)]
    neigs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    ref_file: Option<PathBuf>,
    /// cartesian, voronoi or graded.
    #[arg(long)]
    mesh: Option<String>,
    /// Comma-separated mesh levels of the h-regime.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Seed count of the fixed Voronoi mesh of the p-regime.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    lloyd: Option<usize>,
    /// sqrt_dof, cbrt_dof or h.
    #[arg(long)]
    abscissa: Option<String>,
    /// Record wall times (reports are then not byte-reproducible).
    #[arg(long)]
    walltime: bool,
    #[arg(long)]
    quad_extra: Option<usize>,
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl StudyArgs {
    fn options(&self) -> Result<StudyOptions> {
        let flags = StudyOptions {
            case: self.case.clone(),
            regime: self.regime.clone(),
            p: self.p,
            pmin: self.pmin,
            pmax: self.pmax,
            mu: self.mu,
            sigma: self.sigma,
            layers: self.layers,
            stab: self.stab.clone(),
            eps: self.eps,
            neigs: self.neigs,
            seed: self.seed,
            out: self.out.clone(),
            ref_file: self.ref_file.clone(),
            mesh: self.mesh.clone(),
            levels: self.levels.clone(),
            seeds: self.seeds,
            lloyd: self.lloyd,
            abscissa: self.abscissa.clone(),
            walltime: self.walltime.then_some(true),
            quad_extra: self.quad_extra,
        };
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Ingestion {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                StudyOptions::from_config_text(&text)?
            }
            None => StudyOptions::default(),
        };
        Ok(base.merged_with(flags))
    }
}

fn out_dir(opts: &StudyOptions) -> Result<PathBuf> {
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn stem(cfg: &StudyConfig) -> String {
    let eps = match cfg.case {
        TestCase::Checkerboard { eps } => format!("_eps{eps:e}"),
        _ => String::new(),
    };
    let detail = match &cfg.regime {
        Regime::H { p, .. } => format!("_p{p}"),
        _ => String::new(),
    };
    format!("{}{eps}_{}{detail}", cfg.case.id(), cfg.regime.name())
}

fn cmd_mesh(args: &StudyArgs) -> Result<()> {
    let opts = args.options()?;
    let cfg = opts.to_study_config()?;
    let dir = out_dir(&opts)?;
    for (run, (mesh_spec, deg)) in cfg.regime.steps().into_iter().enumerate() {
        let (mesh, degrees) = build_mesh(&cfg.case, mesh_spec, deg, cfg.seed)?;
        let path = dir.join(format!("{}_{run}.mesh", stem(&cfg)));
        write_mesh(&path, &mesh, None, Some(&degrees.cell_degree))?;
        println!("{} {mesh_spec}: {} cells -> {}", run, mesh.n_cells(), path.display());
    }
    Ok(())
}

fn cmd_solve(args: &StudyArgs, run: Option<usize>) -> Result<()> {
    let opts = args.options()?;
    let cfg = opts.to_study_config()?;
    let steps = cfg.regime.steps();
    let k = run.unwrap_or(steps.len() - 1);
    let (mesh_spec, deg) = *steps
        .get(k)
        .ok_or_else(|| Error::Argument(format!("run {k} out of range (0..{})", steps.len())))?;
    let reference = reference_spectrum(&cfg.case, cfg.n_eigs, cfg.ref_file.as_deref()).ok();
    let n_values = reference
        .as_ref()
        .map_or(cfg.n_eigs, |r| r.total_multiplicity(cfg.n_eigs));
    let (mesh, degrees) = build_mesh(&cfg.case, mesh_spec, deg, cfg.seed)?;
    let sol = solve_case(&cfg.case, mesh, degrees, cfg.stab, cfg.quad_extra, n_values, cfg.seed)?;
    println!(
        "{} {mesh_spec} degrees {}..{}: {} DOFs, h {:.4e}",
        cfg.case,
        sol.degrees.min_degree(),
        sol.degrees.max_degree(),
        sol.system.dofs.n_free(),
        sol.mesh.h()
    );
    if let Some(z) = sol.eigen.zero_mode {
        println!("zero mode {z:.3e} (dropped)");
    }
    let expanded = reference.map(|r| r.expanded()).unwrap_or_default();
    for (i, v) in sol.eigen.eigenvalues.iter().enumerate() {
        match expanded.get(i) {
            Some(r) => println!(
                "{:>3} {v:.15e}  ref {r:.12e}  rel.err {:.3e}",
                i + 1,
                (v - r).abs() / r.abs()
            ),
            None => println!("{:>3} {v:.15e}", i + 1),
        }
    }
    Ok(())
}

fn cmd_study(args: &StudyArgs) -> Result<()> {
    let opts = args.options()?;
    let cfg = opts.to_study_config()?;
    let dir = out_dir(&opts)?;
    let csv_path = dir.join(format!("{}.csv", stem(&cfg)));
    let mut writer = csv_writer(BufWriter::new(File::create(&csv_path)?))?;
    // rows are flushed as they come, so a failing step keeps the earlier ones
    let records = run_study_with(&cfg, |r| {
        eprintln!("run {} done: {} DOFs", r.run, r.dofs);
        write_csv_rows(&mut writer, r)
    })?;
    let model = match cfg.regime {
        Regime::H { .. } => FitModel::Algebraic,
        _ => FitModel::Exponential,
    };
    let fits = match fit_rates(&records, cfg.abscissa, model) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("no rate fit: {e}");
            Vec::new()
        }
    };
    let text = summary(&cfg.describe(), &records, &fits);
    let summary_path = dir.join(format!("{}_summary.txt", stem(&cfg)));
    fs::write(&summary_path, &text)?;
    print!("{text}");
    println!("wrote {} and {}", csv_path.display(), summary_path.display());
    Ok(())
}

fn cmd_check(seed: u64) -> Result<bool> {
    let mut ok = true;
    for c in run_checks(seed)? {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_reference(
    case: &str,
    eps: Option<f64>,
    layers: usize,
    sigma: f64,
    mu: usize,
    neigs: usize,
    stab: &str,
    out: Option<&Path>,
) -> Result<()> {
    let case = TestCase::parse_with_eps(case, eps)?;
    let run = ReferenceRun {
        layers,
        sigma,
        mu,
        n_distinct: neigs,
        stab: StabChoice::with_s1(stab.parse::<S1Kind>()?),
        ..ReferenceRun::default()
    };
    let text = format_reference(&generate_reference(&case, &run)?);
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Mesh(a) => cmd_mesh(&a).map(|_| true),
        Command::Solve { args, run } => cmd_solve(&args, run).map(|_| true),
        Command::Study(a) => cmd_study(&a).map(|_| true),
        Command::Check { seed } => cmd_check(seed),
        Command::Reference {
            case,
            eps,
            layers,
            sigma,
            mu,
            neigs,
            stab,
            out,
        } => cmd_reference(&case, eps, layers, sigma, mu, neigs, &stab, out.as_deref()).map(|_| true),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
