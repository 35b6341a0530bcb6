use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use fhl_cli::commands::{self, LatticeSpec};
use fhl_cli::report::ExperimentReport;
use fhl_core::error::Budget;

/// Desk-scale experiments on rational points of bounded height on
/// hypersurfaces: exact lattice counts, minimal heights, and averaged
/// point-count statistics, with reproducible machine-readable reports.
#[derive(Parser)]
#[command(name = "fhl", version, about)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,

    /// Enumeration budget in candidate visits (overrides FHL_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count rational points of height at most B on one hypersurface.
    Count {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        /// Comma-separated integer coefficients in the fixed monomial order.
        #[arg(long)]
        coeffs: String,
        /// Height bound (integer, fraction p/q, or finite decimal).
        #[arg(long = "B")]
        height_bound: String,
    },
    /// Search for the smallest height of a rational point.
    Minheight {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        coeffs: String,
        /// Height cap (rational), or 'auto' for the complete conic search
        /// bound 3 * ||coefficients||.
        #[arg(long)]
        cap: String,
    },
    /// Averaged point count against the predicted constant.
    Theorem2(Theorem2Args),
    /// Proportion of sampled hypersurfaces with minimal height above a
    /// threshold function of the coefficient norm.
    Theorem1 {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "A")]
        coeff_bound: String,
        /// Threshold family: linear (c*u), power (u^c), logdamp
        /// (c*u/sqrt(log u)).
        #[arg(long)]
        psi: String,
        #[arg(long = "psi-param")]
        psi_param: String,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact lattice computations.
    #[command(subcommand)]
    Lattice(LatticeCommand),
}

#[derive(Args)]
struct Theorem2Args {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    n: usize,
    /// Coefficient-norm bound A.
    #[arg(long = "A")]
    coeff_bound: Option<String>,
    /// Sweep over several coefficient bounds (comma separated).
    #[arg(long = "A-list")]
    coeff_bound_list: Option<String>,
    /// Height bound B.
    #[arg(long = "B")]
    height_bound: Option<String>,
    /// Sweep over several height bounds (comma separated).
    #[arg(long = "B-list")]
    height_bound_list: Option<String>,
    #[arg(long, value_parser = ["exact", "sampled"])]
    mode: String,
    /// Number of sampled hypersurfaces (sampled mode).
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Sphere samples for the constant's integral.
    #[arg(long = "c-samples", default_value_t = 10_000_000)]
    constant_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Determinant (squared) of a lattice given by basis columns.
    Det {
        /// Basis columns, e.g. "1,0;0,1".
        #[arg(long)]
        basis: String,
    },
    /// Determinant of the lattice orthogonal to the given vectors, by the
    /// minor-gcd formula, cross-checked against the kernel basis.
    Ortho {
        /// Constraint vector (repeatable).
        #[arg(long = "c", required = true)]
        constraints: Vec<String>,
    },
    /// Exact successive minima within a bound.
    Minima {
        #[arg(long = "kernel-of")]
        kernel_of: Option<Vec<String>>,
        #[arg(long)]
        basis: Option<String>,
        #[arg(long)]
        bound: String,
    },
    /// Exact number of lattice points in a ball of radius T.
    Count {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "kernel-of")]
        kernel_of: Option<Vec<String>>,
        #[arg(long)]
        basis: Option<String>,
        #[arg(long = "T")]
        radius: String,
    },
    /// Exact number of primitive lattice points in a ball of radius T.
    Primitive {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long = "kernel-of")]
        kernel_of: Option<Vec<String>>,
        #[arg(long)]
        basis: Option<String>,
        #[arg(long = "T")]
        radius: String,
        #[arg(long, default_value = "both", value_parser = ["direct", "moebius", "both"])]
        method: String,
    },
}

fn lattice_spec(
    dim: Option<usize>,
    kernel_of: Option<Vec<String>>,
    basis: Option<String>,
) -> Result<LatticeSpec> {
    match (dim, kernel_of, basis) {
        (Some(n), None, None) => Ok(LatticeSpec::Dim(n)),
        (None, Some(cs), None) => Ok(LatticeSpec::KernelOf(
            cs.iter().map(|c| commands::parse_vector(c)).collect::<Result<_>>()?,
        )),
        (None, None, Some(b)) => Ok(LatticeSpec::Basis(commands::parse_basis(&b)?)),
        _ => bail!("specify exactly one of --dim, --kernel-of, --basis"),
    }
}

fn run(cli: Cli, budget: Budget) -> Result<Vec<ExperimentReport>> {
    let b = &budget;
    let reports = match cli.command {
        Command::Count { d, n, coeffs, height_bound } => {
            vec![commands::cmd_count(d, n, &commands::parse_vector(&coeffs)?, &height_bound, b)?]
        }
        Command::Minheight { d, n, coeffs, cap } => {
            vec![commands::cmd_minheight(d, n, &commands::parse_vector(&coeffs)?, &cap, b)?]
        }
        Command::Theorem2(args) => {
            let coeff_bounds: Vec<String> = match (&args.coeff_bound, &args.coeff_bound_list) {
                (Some(a), None) => vec![a.clone()],
                (None, Some(list)) => list.split(',').map(|s| s.trim().to_string()).collect(),
                _ => bail!("specify exactly one of --A, --A-list"),
            };
            let height_bounds: Vec<String> = match (&args.height_bound, &args.height_bound_list) {
                (Some(x), None) => vec![x.clone()],
                (None, Some(list)) => list.split(',').map(|s| s.trim().to_string()).collect(),
                _ => bail!("specify exactly one of --B, --B-list"),
            };
            let mut out = Vec::new();
            for a in &coeff_bounds {
                for h in &height_bounds {
                    out.push(commands::cmd_theorem2(
                        args.d,
                        args.n,
                        a,
                        h,
                        &args.mode,
                        args.samples,
                        args.constant_samples,
                        args.seed,
                        b,
                    )?);
                }
            }
            out
        }
        Command::Theorem1 { d, n, coeff_bound, psi, psi_param, samples, seed } => {
            vec![commands::cmd_theorem1(d, n, &coeff_bound, &psi, &psi_param, samples, seed, b)?]
        }
        Command::Lattice(sub) => match sub {
            LatticeCommand::Det { basis } => {
                vec![commands::cmd_lattice_det(&LatticeSpec::Basis(commands::parse_basis(&basis)?))?]
            }
            LatticeCommand::Ortho { constraints } => {
                let cs: Vec<Vec<i128>> = constraints
                    .iter()
                    .map(|c| commands::parse_vector(c))
                    .collect::<Result<_>>()?;
                vec![commands::cmd_lattice_ortho(&cs)?]
            }
            LatticeCommand::Minima { kernel_of, basis, bound } => {
                let spec = lattice_spec(None, kernel_of, basis)?;
                vec![commands::cmd_lattice_minima(&spec, &bound, b)?]
            }
            LatticeCommand::Count { dim, kernel_of, basis, radius } => {
                let spec = lattice_spec(dim, kernel_of, basis)?;
                vec![commands::cmd_lattice_count(&spec, &radius, b)?]
            }
            LatticeCommand::Primitive { dim, kernel_of, basis, radius, method } => {
                let spec = lattice_spec(dim, kernel_of, basis)?;
                vec![commands::cmd_lattice_primitive(&spec, &radius, &method, b)?]
            }
        },
    };
    Ok(reports)
}

fn emit(reports: &[ExperimentReport], format: &str) -> Result<()> {
    match format {
        "json" => {
            for r in reports {
                println!("{}", r.to_json_line());
            }
        }
        "csv" => {
            let mut header: Option<String> = None;
            for r in reports {
                let text = r.to_csv();
                let (h, row) = text
                    .split_once('\n')
                    .ok_or_else(|| anyhow!("malformed CSV serialization"))?;
                match &header {
                    None => {
                        print!("{text}");
                        header = Some(h.to_string());
                    }
                    Some(prev) if prev == h => print!("{row}"),
                    Some(_) => bail!("sweep rows have mismatched columns"),
                }
            }
        }
        other => bail!("unknown format {other}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let env_budget = std::env::var("FHL_BUDGET").ok().and_then(|v| v.parse::<u64>().ok());
    let budget = Budget::new(
        cli.budget.or(env_budget).unwrap_or_else(|| Budget::default().max_candidates),
    );
    let format = cli.format.clone();

    let started = std::time::Instant::now();
    match run(cli, budget) {
        Ok(mut reports) => {
            let elapsed = started.elapsed().as_millis() as u64;
            for r in &mut reports {
                r.wall_time_ms = elapsed;
            }
            if let Err(e) = emit(&reports, &format) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
