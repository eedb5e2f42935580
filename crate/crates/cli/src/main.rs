use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tricontract::continuation::{
    start_point, trace_both, BranchFile, BranchPoint, ContinuationOptions,
};
use tricontract::problem::{trivial_solution, DEFAULT_NEWTON_MAX_ITER, DEFAULT_NEWTON_TOL};
use tricontract::prover::{batch_prove, prove};
use tricontract::seqspace::weight;
use tricontract::{
    Error, ProblemSpec, ProofCertificate, ProofParams, ProveOptions, QuadraticProblem,
};

#[derive(Parser)]
#[command(
    name = "tricontract",
    version,
    about = "Computer-assisted existence proofs along a solution branch"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve at one value of sigma and prove the solution.
    Prove(ProveCmd),
    /// Trace the branch in both directions, optionally proving every point.
    Continue(ContinueCmd),
    /// Prove every point of a branch file.
    Batch(BatchCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Example4,
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in problem (the default when no file is given).
    #[arg(long, value_enum, conflicts_with = "problem")]
    builtin: Option<Builtin>,
    /// JSON problem file.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Overrides the problem's sigma.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct ProofArgs {
    /// Number of finite-block coefficients.
    #[arg(long = "m")]
    m: Option<usize>,
    /// Explicit tail indices beyond m.
    #[arg(long = "M", default_value_t = 20)]
    big_m: usize,
    /// Decay rate of the weights.
    #[arg(long = "s", default_value_t = 2.0)]
    s: f64,
    /// Truncation length for the tail sums.
    #[arg(long = "L", default_value_t = 100)]
    l: usize,
    /// Verify at this radius instead of choosing one.
    #[arg(long)]
    r: Option<f64>,
    /// Omit the timestamp so identical runs give identical files.
    #[arg(long)]
    no_timestamp: bool,
}

impl ProofArgs {
    fn params(&self, m: usize) -> ProofParams {
        ProofParams {
            m,
            big_m: self.big_m,
            l: self.l,
            s: self.s,
        }
    }

    fn options(&self) -> ProveOptions {
        ProveOptions {
            r: self.r,
            timestamp: !self.no_timestamp,
            ..ProveOptions::default()
        }
    }
}

#[derive(Args)]
struct ProveCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    proof: ProofArgs,
    /// Newton tolerance.
    #[arg(long, default_value_t = DEFAULT_NEWTON_TOL)]
    tol: f64,
    /// Initial guess as a JSON array (defaults to cos ξ).
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Certificate output path.
    #[arg(long, default_value = "certificate.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ContinueCmd {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    proof: ProofArgs,
    /// Accepted steps in each direction.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    ds: f64,
    #[arg(long, default_value_t = 1e-9)]
    ds_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    ds_max: f64,
    /// Residual tolerance for the start point and the corrector.
    #[arg(long, default_value_t = DEFAULT_NEWTON_TOL)]
    tol: f64,
    /// Corrector iterations per step.
    #[arg(long, default_value_t = 12)]
    max_iter: usize,
    /// Initial guess as a JSON array (defaults to cos ξ).
    #[arg(long)]
    x0: Option<PathBuf>,
    /// Prove every traced point.
    #[arg(long)]
    prove: bool,
    #[arg(long, default_value = "branch.json")]
    branch_out: PathBuf,
    #[arg(long, default_value = "branch.csv")]
    csv_out: PathBuf,
    /// Certificates of the proved points (with --prove).
    #[arg(long)]
    certs_out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchCmd {
    /// Branch file written by `continue`.
    #[arg(long)]
    branch: PathBuf,
    #[command(flatten)]
    proof: ProofArgs,
    #[arg(long, default_value = "certificates.json")]
    out: PathBuf,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

/// Failure taxonomy mapped onto exit codes.
enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
    NotProved(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::NotProved(_) => 3,
            Failure::Io(_) => 4,
            Failure::Core(e) => match e {
                Error::UnsupportedRegime(_)
                | Error::Assumption { .. }
                | Error::Parameter(_)
                | Error::Problem(_) => 2,
                Error::EmptyFeasibleSet { .. } => 3,
                Error::Stall { .. } => 5,
                Error::Interval(_)
                | Error::DegenerateLu { .. }
                | Error::Singular
                | Error::Convergence { .. }
                | Error::Fold { .. } => 6,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Usage(s) | Failure::Io(s) | Failure::NotProved(s) => s.clone(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Writes through a sibling temporary file and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Outcome {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| io_err(path, "not a file path"))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_problem(args: &ProblemArgs) -> std::result::Result<QuadraticProblem, Failure> {
    let spec = match (&args.problem, args.builtin) {
        (Some(path), _) => read_json::<ProblemSpec>(path)?,
        (None, Some(Builtin::Example4) | None) => ProblemSpec::Example4 { sigma: 0.0 },
    };
    let spec = match args.sigma {
        Some(s) => spec.with_sigma(s),
        None => spec,
    };
    Ok(QuadraticProblem::from_spec(&spec)?)
}

fn initial_guess(path: Option<&PathBuf>, m: usize) -> std::result::Result<Vec<f64>, Failure> {
    let x: Vec<f64> = match path {
        Some(p) => read_json(p)?,
        None => trivial_solution(m),
    };
    if x.len() > m {
        return Err(Failure::Usage(format!(
            "initial guess has {} entries but m = {m}",
            x.len()
        )));
    }
    Ok(x)
}

fn fmt_interval(i: Option<[f64; 2]>) -> String {
    match i {
        Some([lo, hi]) => format!("[{lo:e}, {hi:e}]"),
        None => "empty".into(),
    }
}

fn report(cert: &ProofCertificate) {
    println!(
        "sigma = {}  proved = {}  r = {:e}  I = {}  worst margin {:e} at k = {}",
        cert.sigma,
        cert.proved,
        cert.r,
        fmt_interval(cert.feasible),
        cert.worst_margin,
        cert.worst_index
    );
}

fn run_prove(cmd: &ProveCmd) -> Outcome {
    let m = cmd.proof.m.unwrap_or(ProofParams::default().m);
    let params = cmd.proof.params(m);
    params.validate()?;
    let problem = load_problem(&cmd.problem)?;
    let x0 = initial_guess(cmd.x0.as_ref(), m)?;
    let x = problem.newton_solve(&x0, m, cmd.tol, DEFAULT_NEWTON_MAX_ITER)?;
    let cert = prove(&problem, &x, &params, &cmd.proof.options())?;
    report(&cert);
    write_json(&cmd.out, &cert)?;
    if cert.proved {
        Ok(())
    } else {
        Err(Failure::NotProved(format!(
            "verification failed at r = {:e} (worst index {})",
            cert.r, cert.worst_index
        )))
    }
}

fn norm_s(x: &[f64], s: f64) -> f64 {
    x.iter()
        .enumerate()
        .fold(0.0, |a: f64, (k, v)| a.max(v.abs() * weight(k, s)))
}

/// One CSV row per point: sigma, x1, norm_s, proved, r.
fn write_csv(
    path: &Path,
    points: &[(f64, Vec<f64>)],
    certs: Option<&[std::result::Result<ProofCertificate, Error>]>,
    s: f64,
) -> Outcome {
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |err: csv::Error| io_err(path, err);
    w.write_record(["sigma", "x1", "norm_s", "proved", "r"])
        .map_err(e)?;
    for (i, (sigma, x)) in points.iter().enumerate() {
        let (proved, r) = match certs.map(|c| &c[i]) {
            None => (String::new(), String::new()),
            Some(Ok(c)) => (c.proved.to_string(), format!("{:.16e}", c.r)),
            Some(Err(_)) => ("false".into(), String::new()),
        };
        w.write_record([
            format!("{sigma:.16e}"),
            format!("{:.16e}", x.get(1).copied().unwrap_or(0.0)),
            format!("{:.16e}", norm_s(x, s)),
            proved,
            r,
        ])
        .map_err(e)?;
    }
    let bytes = w.into_inner().map_err(|err| io_err(path, err))?;
    write_atomic(path, &bytes)
}

/// Proves all points, writes the outputs and summarises.
fn prove_points(
    problem: &QuadraticProblem,
    points: &[(f64, Vec<f64>)],
    params: &ProofParams,
    opts: &ProveOptions,
) -> (Vec<std::result::Result<ProofCertificate, Error>>, usize) {
    let certs = batch_prove(problem, points, params, opts);
    let proved = certs
        .iter()
        .filter(|c| matches!(c, Ok(c) if c.proved))
        .count();
    for (i, c) in certs.iter().enumerate() {
        if let Err(e) = c {
            eprintln!("point {i} (sigma = {}): {e}", points[i].0);
        }
    }
    (certs, proved)
}

fn run_continue(cmd: &ContinueCmd) -> Outcome {
    let m = cmd.proof.m.unwrap_or(ProofParams::default().m);
    let params = cmd.proof.params(m);
    if cmd.prove {
        params.validate()?;
    }
    let problem = load_problem(&cmd.problem)?;
    let x0 = initial_guess(cmd.x0.as_ref(), m)?;
    let opts = ContinuationOptions {
        ds: cmd.ds,
        ds_min: cmd.ds_min,
        ds_max: cmd.ds_max,
        tol: cmd.tol,
        max_iter: cmd.max_iter,
    };
    let start = start_point(&problem, &x0, m, cmd.tol, None)?;
    let (branch, stall): (Vec<BranchPoint>, Option<Error>) =
        match trace_both(&problem, &start, cmd.steps, &opts) {
            Ok(b) => (b, None),
            Err(Error::Stall { sigma, ds, partial }) => {
                let pts = (*partial).clone();
                (pts, Some(Error::Stall { sigma, ds, partial }))
            }
            Err(e) => return Err(e.into()),
        };
    write_json(&cmd.branch_out, &BranchFile::new(&problem, m, &branch))?;
    let points: Vec<(f64, Vec<f64>)> = branch.iter().map(|b| (b.sigma, b.x.clone())).collect();
    println!(
        "traced {} points, sigma in [{}, {}]",
        points.len(),
        points.first().map_or(0.0, |p| p.0),
        points.last().map_or(0.0, |p| p.0)
    );

    let mut outcome = Ok(());
    if cmd.prove {
        let (certs, proved) = prove_points(&problem, &points, &params, &cmd.proof.options());
        println!("proved {proved}/{}", points.len());
        write_csv(&cmd.csv_out, &points, Some(&certs), params.s)?;
        if let Some(path) = &cmd.certs_out {
            let ok: Vec<&ProofCertificate> = certs.iter().flatten().collect();
            write_json(path, &ok)?;
        }
        if proved < points.len() {
            outcome = Err(Failure::NotProved(format!(
                "{} points failed to prove",
                points.len() - proved
            )));
        }
    } else {
        write_csv(&cmd.csv_out, &points, None, params.s)?;
    }
    match stall {
        Some(e) => Err(e.into()),
        None => outcome,
    }
}

fn run_batch(cmd: &BatchCmd) -> Outcome {
    let file: BranchFile = read_json(&cmd.branch)?;
    if let Some(m) = cmd.proof.m {
        if m != file.m {
            return Err(Failure::Usage(format!(
                "--m {m} does not match the branch file (m = {})",
                file.m
            )));
        }
    }
    let params = cmd.proof.params(file.m);
    params.validate()?;
    let problem = QuadraticProblem::from_spec(&file.problem)?;
    let points: Vec<(f64, Vec<f64>)> = file.points.iter().map(|p| (p.sigma, p.x.clone())).collect();
    let (certs, proved) = prove_points(&problem, &points, &params, &cmd.proof.options());
    println!("proved {proved}/{}", points.len());
    let ok: Vec<&ProofCertificate> = certs.iter().flatten().collect();
    write_json(&cmd.out, &ok)?;
    if let Some(path) = &cmd.csv_out {
        write_csv(path, &points, Some(&certs), params.s)?;
    }
    if proved < points.len() {
        return Err(Failure::NotProved(format!(
            "{} points failed to prove",
            points.len() - proved
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prove(c) => run_prove(c),
        Command::Continue(c) => run_continue(c),
        Command::Batch(c) => run_batch(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
