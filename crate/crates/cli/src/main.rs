use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ldp_freq::multidim::{FakeMode, Solution};
use ldp_freq::sim::{audit_config, run_experiment, Distribution, ExperimentConfig, ExperimentResult, Protocol, Task};
use ldp_freq::LdpError;

const EXIT_INVALID: u8 = 2;
const EXIT_AUDIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ldp-freq",
    version,
    about = "Simulate and audit locally private frequency estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate data collection and aggregation.
    Run(RunArgs),
    /// Enumerate a protocol's channel and check its realized privacy budget.
    Audit(ProtocolArgs),
}

#[derive(Args)]
struct ProtocolArgs {
    /// single | long | mdim | long-mdim; inferred from the protocol and domains when omitted.
    #[arg(long)]
    task: Option<Task>,
    /// grr | sue | oue | blh | olh | ss | l-grr | l-sue | l-oue | l-soue | l-osue | dbitflippm
    #[arg(long)]
    protocol: Protocol,
    /// spl | smp | rsfd
    #[arg(long)]
    solution: Option<Solution>,
    /// zero | rnd (RS+FD with unary encoding)
    #[arg(long, default_value = "zero")]
    fake_mode: FakeMode,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_perm: Option<f64>,
    #[arg(long = "eps-1")]
    eps_1: Option<f64>,
    /// Domain size of a single attribute.
    #[arg(long, conflicts_with = "ks")]
    k: Option<usize>,
    /// Comma-separated domain sizes, one per attribute.
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,
    /// Buckets sampled per user by dBitFlipPM.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Master seed; also fixes the hash function audited for local hashing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    collections: usize,
    /// uniform | zipf:<a> | point:<v>
    #[arg(long, default_value = "uniform")]
    dist: Distribution,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Clip estimates to [0, 1] and renormalize.
    #[arg(long)]
    postprocess: bool,
    #[arg(long, value_enum, default_value = "json")]
    out: OutFormat,
    /// Write results here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Report elapsed_ms as 0 so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl ProtocolArgs {
    fn config(&self, n: usize) -> Result<ExperimentConfig, LdpError> {
        let ks = match (self.k, self.ks.as_slice()) {
            (Some(k), _) => vec![k],
            (None, []) => return Err(LdpError::InvalidConfig("one of --k or --ks is required".into())),
            (None, ks) => ks.to_vec(),
        };
        let long = matches!(self.protocol, Protocol::Long(_));
        let multi = self.solution.is_some() || ks.len() > 1;
        let task = self.task.unwrap_or(match (long, multi) {
            (false, false) => Task::Single,
            (true, false) => Task::Long,
            (false, true) => Task::Mdim,
            (true, true) => Task::LongMdim,
        });
        Ok(ExperimentConfig {
            task,
            protocol: self.protocol,
            solution: self.solution,
            fake_mode: self.fake_mode,
            eps: self.eps,
            eps_perm: self.eps_perm,
            eps_1: self.eps_1,
            n,
            ks,
            dbit_d: self.d,
            collections: 1,
            distribution: Distribution::Uniform,
            seed: self.seed,
            trials: 1,
            postprocess: false,
        })
    }
}

fn to_csv(res: &ExperimentResult) -> String {
    let mut out = String::from("trial,collection,attribute,value,true_freq,est_freq\n");
    for run in &res.runs {
        for (j, est) in run.est.iter().enumerate() {
            for (v, e) in est.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{j},{v},{},{e}",
                    run.trial, run.collection, res.true_freq[j][v]
                );
            }
        }
    }
    for (j, est) in res.est_freq.iter().enumerate() {
        for (v, e) in est.iter().enumerate() {
            let _ = writeln!(out, "mean,,{j},{v},{},{e}", res.true_freq[j][v]);
        }
    }
    out
}

fn emit(text: &str, path: Option<&PathBuf>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(args: RunArgs) -> Result<ExitCode, String> {
    let invalid = |e: LdpError| e.to_string();
    let cfg = ExperimentConfig {
        collections: args.collections,
        distribution: args.dist,
        trials: args.trials,
        postprocess: args.postprocess,
        ..args.protocol.config(args.n).map_err(invalid)?
    };
    if let Some(t) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let mut res = run_experiment(&cfg).map_err(invalid)?;
    if args.no_timing {
        res = res.without_timing();
    }
    let text = match args.out {
        OutFormat::Json => res.to_json() + "\n",
        OutFormat::Csv => to_csv(&res),
    };
    for w in &res.warnings {
        eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
    emit(&text, args.output.as_ref()).map_err(|e| format!("cannot write output: {e}"))?;
    Ok(ExitCode::SUCCESS)
}

fn audit(args: ProtocolArgs) -> Result<ExitCode, String> {
    let cfg = args.config(1).map_err(|e| e.to_string())?;
    let checks = audit_config(&cfg).map_err(|e| e.to_string())?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        println!(
            "{}: declared {:.9} realized {:.9} {}",
            c.check,
            c.declared,
            c.realized,
            if c.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_AUDIT_FAILED)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Audit(args) => audit(args),
    };
    outcome.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(EXIT_INVALID)
    })
}
