use clap::{Args, Parser, Subcommand};
use fracheat::cli_sweep::{persist, run_sweep, SolveConfig, SweepConfig};
use fracheat::spectral_constants::{exponents_for, lambda_max, ProblemSpec};
use fracheat::supersolution_lab::{find_certificate, SupersolutionCertificate};
use fracheat::verifier::{run_suite, suite_json, CheckConfig, CATALOG, SUITE};
use fracheat::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracheat", version, about = "Fractional heat operator with a Hardy potential: constants, checks, solver and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exponent bundle of (N, s, lambda) as JSON.
    Constants {
        #[arg(long = "dim", short = 'N', default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        /// lambda as a fraction of the sharp Hardy constant, in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
    },
    /// Run verifier checks; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Run the monotone scheme once and print the trajectory report.
    Solve(SolveArgs),
    /// Search for a supersolution certificate, or reload and re-verify one.
    Supersol(SupersolArgs),
    /// Sweep (s, lambda, p) and write sweep.csv and sweep.json.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Check ids; see --list.
    ids: Vec<String>,
    /// Run the inequality suite.
    #[arg(long)]
    suite: bool,
    /// Run every catalog check.
    #[arg(long, conflicts_with = "suite")]
    all: bool,
    #[arg(long)]
    list: bool,
    /// JSON file with a check config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long = "dim", short = 'N')]
    dim: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    fraction: Option<f64>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "dim", short = 'N')]
    dim: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    certified: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SupersolArgs {
    #[arg(long = "dim", short = 'N', default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// Defaults to the midpoint of (F, p_+).
    #[arg(long)]
    p: Option<f64>,
    /// Re-verify a saved certificate instead of searching.
    #[arg(long, conflicts_with = "p")]
    reload: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "dim", short = 'N')]
    dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    #[arg(long)]
    p_per_band: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code 2 for bad input, 1 for failed checks, refusals and runtime errors.
fn failure(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) | Error::UnknownCheck(_) | Error::Domain(_) | Error::Json(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

/// Print to stdout; a reader that hangs up early is not an error.
fn emit(text: &str) -> fracheat::Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> fracheat::Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn constants(dim: usize, s: f64, fraction: f64) -> fracheat::Result<ExitCode> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!("lambda fraction {fraction} outside (0, 1)")));
    }
    let bundle = exponents_for(dim, s, fraction * lambda_max(dim, s)?)?;
    eprintln!(
        "Lambda = {}  mu = {}  F = {}  F_tilde = {}  p_plus = {}",
        bundle.lambda_max, bundle.mu, bundle.fujita_F, bundle.fujita_F_tilde, bundle.p_plus
    );
    emit(&serde_json::to_string_pretty(&bundle)?)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> fracheat::Result<ExitCode> {
    if args.list {
        emit(&CATALOG.join("\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => CheckConfig::default(),
    };
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.samples = args.samples.unwrap_or(cfg.samples);
    cfg.dim = args.dim.or(cfg.dim);
    cfg.s = args.s.or(cfg.s);
    cfg.lambda_fraction = args.fraction.or(cfg.lambda_fraction);
    let ids: Vec<&str> = if args.suite {
        SUITE.to_vec()
    } else if args.all {
        CATALOG.to_vec()
    } else {
        args.ids.iter().map(String::as_str).collect()
    };
    if ids.is_empty() {
        return Err(Error::Config("give check ids, --suite or --all".into()));
    }
    let reports = run_suite(&ids, &cfg)?;
    let text = suite_json(&reports)?;
    emit(&text)?;
    write_out(&args.out, &text)?;
    for r in &reports {
        eprintln!("{} {} (worst margin {:.3e})", if r.passed { "PASS" } else { "FAIL" }, r.id, r.worst_margin);
    }
    Ok(if reports.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn solve(args: SolveArgs) -> fracheat::Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(path) => SolveConfig::load(path)?,
        None => SolveConfig::default(),
    };
    cfg.dim = args.dim.unwrap_or(cfg.dim);
    cfg.s = args.s.unwrap_or(cfg.s);
    cfg.lambda_fraction = args.fraction.unwrap_or(cfg.lambda_fraction);
    cfg.p = args.p.unwrap_or(cfg.p);
    cfg.certified |= args.certified;
    let report = cfg.run()?;
    let text = report.to_json()?;
    emit(&text)?;
    write_out(&args.out, &text)?;
    eprintln!("{} after {} iterations, growth {:.3}", report.verdict, report.n_final, report.growth_factor);
    Ok(ExitCode::SUCCESS)
}

fn supersol(args: SupersolArgs) -> fracheat::Result<ExitCode> {
    let cert = match &args.reload {
        Some(path) => SupersolutionCertificate::from_json(&std::fs::read_to_string(path)?)?,
        None => {
            let lambda = ProblemSpec::from_fraction(args.dim, args.s, args.fraction, 2.0)?.lambda;
            let bundle = exponents_for(args.dim, args.s, lambda)?;
            let p = args.p.unwrap_or(0.5 * (bundle.fujita_F + bundle.p_plus));
            find_certificate(&ProblemSpec::new(args.dim, args.s, lambda, p)?)?
        }
    };
    let text = cert.to_json()?;
    emit(&text)?;
    write_out(&args.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> fracheat::Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    cfg.dim = args.dim.unwrap_or(cfg.dim);
    cfg.s = args.s.unwrap_or(cfg.s);
    cfg.lambda_fractions = args.fractions.unwrap_or(cfg.lambda_fractions);
    cfg.p_per_band = args.p_per_band.unwrap_or(cfg.p_per_band);
    cfg.threads = args.threads.or(cfg.threads);
    cfg.output_dir = args.out.unwrap_or(cfg.output_dir);
    let rows = run_sweep(&cfg)?;
    let summary = persist(&cfg, &rows)?;
    for row in &rows {
        eprintln!("{}{}", if row.agrees { "  " } else { "! " }, row.csv_line());
    }
    eprintln!("{} rows, {} mismatches, written to {}", rows.len(), summary.mismatches, cfg.output_dir.display());
    Ok(if summary.mismatches == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constants { dim, s, fraction } => constants(dim, s, fraction),
        Command::Verify(args) => verify(args),
        Command::Solve(args) => solve(args),
        Command::Supersol(args) => supersol(args),
        Command::Sweep(args) => sweep(args),
    };
    result.unwrap_or_else(failure)
}
