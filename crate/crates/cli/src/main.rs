//! `petz-lab`: run inequality suites, compute single quantities, generate ensembles.
//!
//! Exit codes: 0 success, 1 at least one check failed, 2 usage, parse or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use petz_lab::entropy::{
    alpha_z_renyi, measured_relative_entropy_psd, p_fidelity, p_fidelity_normalized, relative_entropy, weighted_p_norm,
    RenyiDomain, WeightedNormSpec, MEASURED_DEFAULT_TOL,
};
use petz_lab::io::{read_json, read_matrix, write_json, write_matrix, ChannelJson, MatrixJson};
use petz_lab::linalg::PsdMatrix;
use petz_lab::quadrature::QuadratureRule;
use petz_lab::recovery::RecoveryContext;
use petz_lab::states::{DensityMatrix, QuantumChannel};
use petz_lab::suite::{run_suite, InstanceEnsemble, SuiteConfig};
use petz_lab::Error;

#[derive(Parser)]
#[command(name = "petz-lab", version, about = "Recovery maps, entropies and trace inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run inequality checks on seeded random ensembles.
    Check(CheckArgs),
    /// Compute one quantity from matrix/channel JSON files.
    Compute(ComputeArgs),
    /// Write the instances of an ensemble descriptor to a directory.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CheckArgs {
    /// Comma-separated check names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    suite: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    dim: Vec<usize>,
    /// Instances per dimension and check.
    #[arg(long, default_value_t = 500)]
    instances: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Exponents for the checks that take one.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-6)]
    regularization: f64,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the extension of `--out` (`.csv` or JSON otherwise).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Directory for replay files of failing instances [default: `<out>.replay`].
    #[arg(long)]
    replay_dir: Option<PathBuf>,
    /// Record per-check runtimes (reports are then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    RelEntropy,
    MeasuredRelEntropy,
    AlphaZ,
    PFidelity,
    Petz,
    UniversalRecovery,
    WeightedNorm,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    quantity: Quantity,
    #[arg(long)]
    rho: Option<PathBuf>,
    #[arg(long)]
    eta: Option<PathBuf>,
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Operator argument of `petz`, `universal-recovery` and `weighted-norm`.
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    /// Schatten exponent; for `universal-recovery` selects the nonlinear map.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    w: f64,
    /// Use `∥ρ^{1/2p} η^{1/2p}∥_p` instead of `∥√ρ √η∥_p`.
    #[arg(long)]
    normalized: bool,
    /// Allow α-z parameters outside the data-processing domain.
    #[arg(long)]
    unchecked: bool,
    #[arg(long, default_value_t = MEASURED_DEFAULT_TOL)]
    tol: f64,
    /// Output file for matrix-valued quantities.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Ensemble descriptor JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Check(args) => check(args),
        Command::Compute(args) => compute(args),
        Command::Gen(args) => gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("petz-lab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("PETZLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("PETZLAB_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let mut config = SuiteConfig::new(&[], &args.dim, args.instances, args.seed);
    config.checks = args.suite;
    config.p_values = args.p;
    config.settings.regularization = args.regularization;
    config.timing = args.timing;
    config.threads = threads_from_env()?;
    let outcome = run_suite(&config)?;

    let format = args.format.unwrap_or_else(|| {
        if args.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            Format::Csv
        } else {
            Format::Json
        }
    });
    let text = match format {
        Format::Json => outcome.to_json()?,
        Format::Csv => outcome.to_csv()?,
    };
    std::fs::write(&args.out, text).map_err(|e| Failure::Usage(format!("{}: {e}", args.out.display())))?;

    for s in &outcome.report.checks {
        let status = if s.failures.is_empty() { "pass" } else { "FAIL" };
        let min = s.min_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}"));
        println!(
            "{:<22} {status}  instances={:<6} failures={:<4} min_margin={min}",
            s.check,
            s.instances,
            s.failures.len()
        );
    }
    if outcome.passed() {
        return Ok(());
    }
    let dir = args.replay_dir.unwrap_or_else(|| {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".replay");
        args.out.with_file_name(name)
    });
    let written = outcome.write_replays(&dir)?;
    eprintln!(
        "{} failing instance(s); {} replay file(s) in {}",
        outcome.report.total_failures,
        written.len(),
        dir.display()
    );
    Err(Failure::Checks)
}

fn need<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn need_value(value: Option<f64>, flag: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn state(path: &Path) -> Result<DensityMatrix, Failure> {
    DensityMatrix::from_matrix(read_matrix(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn psd(path: &Path) -> Result<PsdMatrix, Failure> {
    PsdMatrix::from_matrix(read_matrix(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn channel(path: &Path) -> Result<QuantumChannel, Failure> {
    let json: ChannelJson = read_json(path)?;
    let ch = QuantumChannel::try_from(json).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let v = ch.validate();
    if !v.pass {
        return Err(Failure::Usage(format!(
            "{}: not a channel (trace defect {:.3e}, Choi minimum {:.3e})",
            path.display(),
            v.tp_defect,
            v.min_choi_eigenvalue
        )));
    }
    Ok(ch)
}

/// Twelve significant digits; `+inf` for infinite values.
fn format_value(x: f64) -> String {
    if x == f64::INFINITY {
        return "+inf".into();
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..12).contains(&magnitude) {
        format!("{:.*}", (11 - magnitude) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn compute(args: ComputeArgs) -> Result<(), Failure> {
    let value = match args.quantity {
        Quantity::RelEntropy => {
            let (rho, eta) = (state(need(&args.rho, "rho")?)?, state(need(&args.eta, "eta")?)?);
            relative_entropy(&rho, &eta)?.value
        }
        Quantity::MeasuredRelEntropy => {
            let (rho, eta) = (psd(need(&args.rho, "rho")?)?, psd(need(&args.eta, "eta")?)?);
            measured_relative_entropy_psd(&rho, &eta, args.tol)?.value.value
        }
        Quantity::AlphaZ => {
            let (rho, eta) = (state(need(&args.rho, "rho")?)?, state(need(&args.eta, "eta")?)?);
            let alpha = need_value(args.alpha, "alpha")?;
            let z = args.z.unwrap_or(alpha);
            let domain = if args.unchecked { RenyiDomain::Unchecked } else { RenyiDomain::Checked };
            alpha_z_renyi(&rho, &eta, alpha, z, domain)?.value
        }
        Quantity::PFidelity => {
            let (rho, eta) = (psd(need(&args.rho, "rho")?)?, psd(need(&args.eta, "eta")?)?);
            let p = args.p.unwrap_or(1.0);
            if args.normalized {
                p_fidelity_normalized(&rho, &eta, p)?
            } else {
                p_fidelity(&rho, &eta, p)?
            }
        }
        Quantity::WeightedNorm => {
            let x = read_matrix(need(&args.x, "x")?)?;
            let (rho, eta) = (psd(need(&args.rho, "rho")?)?, psd(need(&args.eta, "eta")?)?);
            let p = need_value(args.p, "p")?;
            weighted_p_norm(&x, &WeightedNormSpec::new(p, args.w, &rho, &eta)?)?
        }
        Quantity::Petz | Quantity::UniversalRecovery => return recover(&args),
    };
    println!("{}", format_value(value));
    Ok(())
}

fn recover(args: &ComputeArgs) -> Result<(), Failure> {
    let eta = state(need(&args.eta, "eta")?)?;
    let ch = channel(need(&args.channel, "channel")?)?;
    let x = read_matrix(need(&args.x, "x")?)?;
    let out = need(&args.out, "out")?;
    let ctx = RecoveryContext::new(&eta, &ch)?;
    let rule = QuadratureRule::default();
    let result = match (args.quantity, args.p) {
        (Quantity::Petz, _) => ctx.petz(&x)?,
        (_, Some(p)) => {
            let x = PsdMatrix::from_matrix(x)?;
            ctx.nonlinear(p, &x, &rule)?.value.matrix().clone()
        }
        _ => ctx.universal(&x, &rule)?.value,
    };
    write_matrix(out, &result).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    println!("{}", out.display());
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let ensemble: InstanceEnsemble = read_json(&args.spec)?;
    ensemble.validate()?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::Usage(format!("{}: {e}", args.out.display())))?;
    for index in 0..ensemble.count {
        let inst = ensemble.instance(index)?;
        let stem = format!("instance-{}-{:04}", ensemble.seed, index);
        let states = serde_json::json!({
            "id": inst.id,
            "rho": MatrixJson::from_matrix(inst.rho.matrix()),
            "eta": MatrixJson::from_matrix(inst.eta.matrix()),
        });
        write_json(&args.out.join(format!("{stem}.state.json")), &states)?;
        write_json(&args.out.join(format!("{stem}.channel.json")), &ChannelJson::from(inst.channel))?;
    }
    println!("{} instance(s) written to {}", ensemble.count, args.out.display());
    Ok(())
}
