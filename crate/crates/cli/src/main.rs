use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qsmpc::qubit::NoiseModel;
use qsmpc_cli::{
    compute, emit_circuit, histogram_json, noise_sweep, parse_bits, parse_list, reproduce, security_audit,
    side_by_side, CircuitFormat, ExperimentCase, DEFAULT_SHOTS,
};

#[derive(Parser)]
#[command(name = "qsmpc", version, about = "Single-qubit secure multiparty computation of symmetric Boolean functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rerun a built-in experiment case and tabulate correct-output frequencies.
    Reproduce(ReproduceArgs),
    /// Run the protocol once and print its transcript summary.
    Compute(ComputeArgs),
    /// Correct-output frequency against per-gate depolarizing strength.
    NoiseSweep(SweepArgs),
    /// Eavesdropper and collusion leakage checks by exact enumeration.
    SecurityAudit(AuditArgs),
    /// Print VU(n,k,x,r) in operator notation or OpenQASM 2.0.
    EmitCircuit(EmitArgs),
}

#[derive(Args)]
struct CaseArgs {
    /// n5, n8, n10 or custom.
    #[arg(long, default_value = "custom")]
    case: String,
    /// Private input bits for a custom case, e.g. 1,1,0,0,1.
    #[arg(long)]
    x: Option<String>,
    /// Random mask bits for a custom case.
    #[arg(long)]
    r: Option<String>,
    /// Comma-separated moduli; defaults to the case's list.
    #[arg(long)]
    k: Option<String>,
    /// Number of clients; checked against the length of --x.
    #[arg(long)]
    n: Option<usize>,
}

impl CaseArgs {
    fn resolve(&self) -> Result<ExperimentCase> {
        let case = if self.case == "custom" {
            let (Some(x), Some(r), Some(ks)) = (&self.x, &self.r, &self.k) else {
                bail!("a custom case needs --x, --r and --k");
            };
            ExperimentCase::custom(parse_bits(x)?, parse_bits(r)?, parse_list(ks)?)?
        } else {
            if self.x.is_some() || self.r.is_some() {
                bail!("--x and --r apply only to --case custom");
            }
            let mut case = ExperimentCase::builtin(&self.case)?;
            if let Some(ks) = &self.k {
                case.ks = ExperimentCase::custom(case.x.clone(), case.r.clone(), parse_list(ks)?)?.ks;
            }
            case
        };
        if let Some(n) = self.n {
            if n != case.n() {
                bail!("--n {n} does not match the {} input bits", case.n());
            }
        }
        Ok(case)
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Depolarizing probability after each gate.
    #[arg(long = "noise-p", default_value_t = 0.0)]
    noise_p: f64,
    /// Probability that a measurement result is flipped.
    #[arg(long = "meas-flip", default_value_t = 0.0)]
    meas_flip: f64,
}

impl NoiseArgs {
    fn model(&self) -> Result<NoiseModel> {
        Ok(NoiseModel::new(self.noise_p, self.meas_flip)?)
    }
}

#[derive(Args)]
struct ReproduceArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// csv (result table), json (outcome histogram) or table (with hardware column).
    #[arg(long, default_value = "csv")]
    format: String,
    /// Directory receiving table.csv, histogram.json and announcements.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    x: String,
    #[arg(long)]
    r: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    noise: NoiseArgs,
    /// summary or transcript.
    #[arg(long, default_value = "summary")]
    format: String,
    /// Also write the full transcript to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// Comma-separated depolarizing grid.
    #[arg(long = "noise-p", default_value = "0,0.005,0.01,0.02")]
    noise_p: String,
    #[arg(long = "meas-flip", default_value_t = 0.0)]
    meas_flip: f64,
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct EmitArgs {
    #[command(flatten)]
    case: CaseArgs,
    /// paper-notation or qasm.
    #[arg(long, default_value = "paper-notation")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Reproduce(args) => {
            let mut case = args.case.resolve()?;
            case.shots = args.shots;
            case.noise = args.noise.model()?;
            case.seed = args.seed;
            let result = reproduce(&case)?;
            let table = result.table.to_csv()?;
            let histogram = histogram_json(&result.histogram)?;
            if let Some(dir) = &args.out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                fs::write(dir.join("table.csv"), &table)?;
                fs::write(dir.join("histogram.json"), &histogram)?;
                fs::write(dir.join("announcements.json"), histogram_json(&result.announcement_histogram)?)?;
            }
            match args.format.as_str() {
                "csv" => print!("{table}"),
                "json" => print!("{histogram}"),
                "table" => print!("{}", side_by_side(&case, &result)?),
                other => bail!("unknown format {other:?}; expected csv, json or table"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compute(args) => {
            let x = parse_bits(&args.x)?;
            let r = parse_bits(&args.r)?;
            if let Some(n) = args.n {
                if n != x.len() || n != r.len() {
                    bail!("--n {n} does not match --x ({} bits) and --r ({} bits)", x.len(), r.len());
                }
            }
            let report = compute(&x, &r, args.k, args.noise.model()?, args.seed)
                .context("usage: qsmpc compute --k K --x BITS --r BITS with 2 ≤ K ≤ n")?;
            if let Some(path) = &args.out {
                fs::write(path, report.transcript.to_text())?;
            }
            match args.format.as_str() {
                "summary" => print!("{}", report.summary()),
                "transcript" => print!("{}", report.transcript.to_text()),
                other => bail!("unknown format {other:?}; expected summary or transcript"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::NoiseSweep(args) => {
            let mut case = args.case.resolve()?;
            case.shots = args.shots;
            case.seed = args.seed;
            let ps: Vec<f64> = parse_list(&args.noise_p)?;
            let report = noise_sweep(&case, &ps, args.meas_flip)?;
            write_or_print(args.out.as_deref(), &report.to_csv()?)?;
            eprint!("{}", report.monotonicity_summary());
            Ok(ExitCode::SUCCESS)
        }
        Command::SecurityAudit(args) => {
            let report = security_audit(args.n, args.k)?;
            print!("{}", report.render());
            Ok(if report.pass() { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::EmitCircuit(args) => {
            let case = args.case.resolve()?;
            let format: CircuitFormat = args.format.parse()?;
            write_or_print(args.out.as_deref(), &emit_circuit(&case.x, &case.r, &case.ks, format)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
