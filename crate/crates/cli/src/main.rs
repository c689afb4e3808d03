use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use asirk::conditions;
use asirk::harness::{config_hash, run_suite_kinds};
use asirk::integrator::{integrate, step_count, CsvTrajectory, InnerSolver, Method, StepperConfig};
use asirk::problems::{InitialVariant, ProblemSpec};
use asirk::rational;
use asirk::stability::{region_scan, BoundarySpec, GridSpec, ScanMethod};
use asirk::tableau::{catalog, family_s2, family_s3, leading_error_objective, scheme_from_json, scheme_to_json, Scheme};
use asirk::{Error, Result};

/// Low-storage IMEX Runge-Kutta toolkit.
#[derive(Parser)]
#[command(name = "asirk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order, additional and stiff-accuracy conditions of a scheme.
    Verify {
        /// Catalog name or path to a scheme JSON file.
        scheme: String,
        #[arg(long)]
        json: bool,
    },
    /// Scan the S1 stability region over a z1 window and write CSV.
    Stability(StabilityArgs),
    /// Integrate one problem and write the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Run the [[sweep]] experiments of a config file.
    Sweep(SuiteArgs),
    /// Run the [[efficiency]] experiments of a config file.
    Efficiency(SuiteArgs),
    /// Run every experiment of a config file.
    Suite(SuiteArgs),
    /// Members of the one-parameter low-storage families.
    Family {
        #[arg(value_enum)]
        family: FamilyKind,
        #[arg(long, value_parser = parse_rational)]
        omega1: rational::Rational,
        #[arg(long)]
        json: bool,
    },
    /// Print a catalog scheme as JSON, or a problem's initial field as CSV.
    Export {
        #[command(subcommand)]
        what: ExportKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    S2,
    S3,
}

#[derive(Subcommand)]
enum ExportKind {
    Scheme {
        name: String,
    },
    Initial {
        problem: String,
        #[arg(long, default_value = "1", value_parser = parse_number)]
        eps: f64,
        #[arg(long, default_value = "C_InVal")]
        variant: InitialVariant,
    },
}

#[derive(Args)]
struct StabilityArgs {
    scheme: String,
    #[arg(long, value_parser = parse_number, default_value = "-4")]
    re_min: f64,
    #[arg(long, value_parser = parse_number, default_value = "1")]
    re_max: f64,
    #[arg(long, value_parser = parse_number, default_value = "0")]
    im_min: f64,
    #[arg(long, value_parser = parse_number, default_value = "4")]
    im_max: f64,
    #[arg(long, default_value_t = 500)]
    nx: usize,
    #[arg(long, default_value_t = 400)]
    ny: usize,
    /// Evaluate every cell instead of flood-filling from the border.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the boundary polyline here.
    #[arg(long)]
    boundary: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    scheme: String,
    problem: String,
    /// Stiffness ε (diffusion d for the population model).
    #[arg(long, value_parser = parse_number)]
    eps: Option<f64>,
    #[arg(long, default_value = "C_InVal")]
    variant: InitialVariant,
    #[arg(long, value_parser = parse_number)]
    h: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    t_end: Option<f64>,
    #[arg(long, value_enum, default_value = "fixed-point")]
    solver: SolverArg,
    #[arg(long, value_parser = parse_number, default_value = "1e-12")]
    tol: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    FixedPoint,
    Newton,
    LinearDirect,
}

#[derive(Args)]
struct SuiteArgs {
    config: PathBuf,
    /// Output directory; defaults to results/<config name>.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn parse_rational(s: &str) -> std::result::Result<rational::Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    parse_rational(s).map(|q| rational::to_f64(&q))
}

fn load_scheme(name: &str) -> Result<Scheme> {
    match catalog(name) {
        Ok(s) => Ok(s),
        Err(_) if Path::new(name).is_file() => scheme_from_json(&fs::read_to_string(name)?),
        Err(e) => Err(e),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn verify(name: &str, as_json: bool) -> Result<()> {
    let scheme = load_scheme(name)?;
    let report = conditions::analyze(&scheme)?;
    let mut out = io::stdout().lock();
    if as_json {
        writeln!(out, "{}", report.to_json())?;
        return Ok(());
    }
    let row = conditions::classify(&scheme)?;
    writeln!(out, "{:<18} {:>7} {:>11} {:<30} {:>9}", "method", "order", "additional", "stiff error (u, v)", "registers")?;
    writeln!(
        out,
        "{:<18} {:>7} {:>11} {:<30} {:>9}",
        row.method,
        row.order_label(),
        if row.additional_conditions { "yes" } else { "no" },
        row.stiff_error.to_string(),
        row.registers.to_string()
    )?;
    writeln!(out)?;
    writeln!(out, "{:<18} {:>22} {:>22} {:>12}  ok", "condition", "lhs", "rhs", "residual")?;
    for r in &report.records {
        let residual = r.exact_residual.clone().unwrap_or_else(|| format!("{:.3e}", r.residual));
        writeln!(
            out,
            "{:<18} {:>22.15e} {:>22.15e} {:>12}  {}",
            r.id,
            r.lhs,
            r.rhs,
            residual,
            if r.satisfied { "yes" } else { "no" }
        )?;
    }
    Ok(())
}

fn stability(a: &StabilityArgs) -> Result<()> {
    let scheme = load_scheme(&a.scheme)?;
    let Some(s) = scheme.as_asirk() else {
        return Err(Error::Domain(format!("{} has no ASIRK form", scheme.name())));
    };
    let grid = GridSpec {
        re_min: a.re_min,
        re_max: a.re_max,
        im_min: a.im_min,
        im_max: a.im_max,
        nx: a.nx,
        ny: a.ny,
    };
    if grid.nx == 0 || grid.ny == 0 || !(grid.re_max > grid.re_min && grid.im_max > grid.im_min) {
        return Err(Error::Domain("empty stability window".into()));
    }
    let method = if a.exhaustive { ScanMethod::Exhaustive } else { ScanMethod::FloodFill };
    let scan = region_scan(s, &grid, &BoundarySpec::default(), 1e-9, method);
    let hash = config_hash(serde_json::to_string(&grid)?.as_bytes());
    let mut out = output(a.out.as_deref())?;
    write!(out, "# config-hash: {hash}\n{}", scan.to_csv())?;
    out.flush()?;
    if let Some(path) = &a.boundary {
        fs::write(path, format!("# config-hash: {hash}\n{}", scan.boundary_csv()))?;
    }
    eprintln!("{}: area {:.6} ({} evaluations)", scheme.name(), scan.area, scan.evaluations);
    Ok(())
}

fn integrate_cmd(a: &IntegrateArgs) -> Result<()> {
    let scheme = load_scheme(&a.scheme)?;
    let eps = a.eps.unwrap_or(1.0);
    let spec = ProblemSpec::named(&a.problem, eps, a.variant)?;
    let problem = spec.build()?;
    let h = a.h.unwrap_or(problem.run.h);
    let t_end = a.t_end.unwrap_or(problem.run.t_end);
    step_count(problem.run.t0, t_end, h)?;
    let solver = match a.solver {
        SolverArg::FixedPoint => InnerSolver::FixedPoint,
        SolverArg::Newton => InnerSolver::Newton,
        SolverArg::LinearDirect => InnerSolver::LinearDirect,
    };
    let config = StepperConfig::default().with_solver(solver).with_tol(a.tol);
    let mut stepper = Method::from_scheme(&scheme).stepper(problem.ode.dim(), config)?;
    let provenance = serde_json::json!({
        "scheme": scheme.name(), "problem": spec, "h": h, "t_end": t_end, "solver": config,
    });
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "# config-hash: {}", config_hash(provenance.to_string().as_bytes()))?;
    let mut csv = CsvTrajectory::new(out, problem.ode.dim())?;
    let run = integrate(
        stepper.as_mut(),
        problem.ode.as_ref(),
        &problem.y0,
        problem.run.t0,
        t_end,
        h,
        &mut |n, t, y| csv.observe(n, t, y),
    )?;
    csv.finish()?;
    eprintln!("{}", serde_json::to_string(&run.report)?);
    Ok(())
}

fn suite(a: &SuiteArgs, kinds: Option<&[&str]>) -> Result<()> {
    let text = fs::read_to_string(&a.config)?;
    let out = a.out.clone().unwrap_or_else(|| {
        let stem = a.config.file_stem().map(|s| s.to_string_lossy().into_owned());
        PathBuf::from("results").join(stem.unwrap_or_else(|| "suite".into()))
    });
    let bundle = run_suite_kinds(&text, &a.config.display().to_string(), &out, kinds)?;
    let mut stdout = io::stdout().lock();
    for f in &bundle.files {
        writeln!(stdout, "{}", f.display())?;
    }
    writeln!(stdout, "{}", out.join("summary.json").display())?;
    Ok(())
}

fn family(kind: FamilyKind, omega1: &rational::Rational, as_json: bool) -> Result<()> {
    let params = match kind {
        FamilyKind::S2 => family_s2(omega1)?,
        FamilyKind::S3 => family_s3(omega1)?,
    };
    let fmt = |v: &[rational::Rational]| v.iter().map(rational::format).collect::<Vec<_>>();
    let objective = leading_error_objective(&params);
    let mut out = io::stdout().lock();
    if as_json {
        let doc = serde_json::json!({
            "omega": fmt(&params.omega),
            "gamma": fmt(&params.gamma),
            "lambda": fmt(&params.lambda),
            "leading_error": objective,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "omega  = [{}]", fmt(&params.omega).join(", "))?;
        writeln!(out, "gamma  = [{}]", fmt(&params.gamma).join(", "))?;
        writeln!(out, "lambda = [{}]", fmt(&params.lambda).join(", "))?;
        writeln!(out, "leading error = {objective:.6}")?;
    }
    Ok(())
}

fn export(what: &ExportKind) -> Result<()> {
    match what {
        ExportKind::Scheme { name } => writeln!(io::stdout().lock(), "{}", scheme_to_json(&load_scheme(name)?))?,
        ExportKind::Initial { problem, eps, variant } => {
            let p = ProblemSpec::named(problem, *eps, *variant)?.build()?;
            let mut out = output(None)?;
            writeln!(out, "index,component,value")?;
            for c in &p.components {
                for i in c.range.clone() {
                    writeln!(out, "{i},{},{}", c.name, asirk::integrator::format_f64(p.y0[i]))?;
                }
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Verify { scheme, json } => verify(&scheme, json),
        Command::Stability(a) => stability(&a),
        Command::Integrate(a) => integrate_cmd(&a),
        Command::Sweep(a) => suite(&a, Some(&["sweep"])),
        Command::Efficiency(a) => suite(&a, Some(&["efficiency"])),
        Command::Suite(a) => suite(&a, None),
        Command::Family { family: f, omega1, json } => family(f, &omega1, json),
        Command::Export { what } => export(&what),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (e.g. `| head`) is not a failure.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
