use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ibm_core::{
    calibrate_b, compare, load_networks, oracle_check, read_manifest, run_monte_carlo_with,
    scan_pairwise, scan_to_csv, to_json, Error, ExperimentSpec, TestReport,
};

/// Two-sample network comparison with interlacing balance statistics.
#[derive(Debug, Parser)]
#[command(name = "ibm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two networks on the same node set.
    Compare(CompareArgs),
    /// Compare every pair in an ordered list of networks.
    Scan(ScanArgs),
    /// Monte Carlo null and alternative runs for a simulation case.
    Simulate(SimulateArgs),
    /// Find the off-diagonal block value that hits a target SNR.
    Calibrate(CalibrateArgs),
    /// Check the fast kernels against brute-force enumeration.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScanFormat {
    Csv,
    Json,
}

fn order_parser() -> clap::builder::RangedI64ValueParser<u8> {
    clap::value_parser!(u8).range(2..=3)
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 2, value_parser = order_parser())]
    order: u8,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Text file listing one edge-list path per line.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 2, value_parser = order_parser())]
    order: u8,
    #[arg(long, value_enum, default_value_t = ScanFormat::Json)]
    format: ScanFormat,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long = "case", value_parser = clap::value_parser!(u8).range(1..=6))]
    case_id: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long, conflicts_with = "target_snr", required_unless_present = "target_snr")]
    b: Option<f64>,
    #[arg(long)]
    target_snr: Option<f64>,
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 2, value_parser = order_parser())]
    order: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Does not affect the output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long = "case", value_parser = clap::value_parser!(u8).range(1..=6))]
    case_id: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    target_snr: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    n_max: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

struct Failure {
    code: u8,
    detail: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::DegenerateDenominator => 3,
            Error::Overflow(_) | Error::NonFinite(_) | Error::NonConvergence { .. } => 4,
            _ => 2,
        };
        Failure { code, detail: err.to_string() }
    }
}

fn text_report(r: &TestReport) -> String {
    format!(
        "n {}\ndirected {}\norder {}\nq_star {}\nq_a {}\nq_b {}\nstatistic {}\nz_score {}\np_value {}\n",
        r.n, r.directed, r.order, r.q_star, r.q_a, r.q_b, r.statistic, r.z_score, r.p_value
    )
}

fn run(command: Command) -> Result<String, Failure> {
    match command {
        Command::Compare(args) => {
            let nets = load_networks(&[args.a, args.b], args.directed)?;
            let report = compare(&nets[0], &nets[1], args.order)?;
            Ok(match args.format {
                ReportFormat::Json => to_json(&report),
                ReportFormat::Text => text_report(&report),
            })
        }
        Command::Scan(args) => {
            let paths = read_manifest(&args.manifest)?;
            let nets = load_networks(&paths, args.directed)?;
            let result = scan_pairwise(&nets, args.order)?;
            Ok(match args.format {
                ScanFormat::Json => to_json(&result),
                ScanFormat::Csv => scan_to_csv(&result),
            })
        }
        Command::Simulate(args) => {
            let spec = ExperimentSpec {
                case_id: args.case_id,
                n: args.n,
                k: args.k,
                beta: args.beta,
                b: args.b,
                target_snr: args.target_snr,
                replicates: args.reps,
                alpha: args.alpha,
                order: args.order,
                seed: args.seed,
            };
            Ok(to_json(&run_monte_carlo_with(&spec, args.workers)?))
        }
        Command::Calibrate(args) => {
            let c = calibrate_b(args.case_id, args.n, args.k, args.beta, args.target_snr, args.seed, args.tol)?;
            Ok(to_json(&c))
        }
        Command::OracleCheck(args) => {
            let report = oracle_check(args.n_max, args.trials, args.seed)?;
            if report.all_match() {
                Ok(to_json(&report))
            } else {
                Err(Failure {
                    code: 4,
                    detail: format!(
                        "{}/{} exact matches; {}",
                        report.matches,
                        report.trials,
                        report.mismatches.join("; ")
                    ),
                })
            }
        }
    }
}

fn fail(code: u8, detail: &str) -> ExitCode {
    let line = detail.lines().next().unwrap_or_default();
    eprintln!("ERROR {code}: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            let detail = rendered.trim_start_matches("error: ");
            return fail(2, detail);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return fail(4, "failed to write output");
            }
            ExitCode::SUCCESS
        }
        Err(f) => fail(f.code, &f.detail),
    }
}
