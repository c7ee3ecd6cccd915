use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpoly::optimizer::MeasurementSearch;
use qpoly::polygamy::{ChainOptions, CHAIN_TOLERANCE};
use qpoly::{OptimizerConfig, Verdict};
use qpoly_cli::commands::{self, split_labels, Measure, RunConfig};
use qpoly_cli::report::{canonical_json, fuzz_csv, record_csv};
use qpoly_cli::spec::parse_dims;
use qpoly_cli::{statefile, CliError, CliResult, LoadedState, StateKind};

#[derive(Parser, Debug)]
#[command(
    name = "qpoly",
    version,
    about = "Strong polygamy checks for multi-party quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one correlation measure.
    Compute {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum)]
        measure: Measure,
        /// Parties to keep before measuring (default: all).
        #[arg(long)]
        keep: Option<String>,
        /// Parties on the unmeasured side of the cut (default: first kept).
        #[arg(long)]
        side: Option<String>,
        #[arg(long, value_enum, default_value_t = RouteArg::Dual)]
        route: RouteArg,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run both strong polygamy chains and the identity suite.
    Verify {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value = "A")]
        focus: String,
        /// Accept a mixed state and run a best-effort entanglement chain.
        #[arg(long)]
        allow_mixed: bool,
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Verify many Haar-random pure states.
    Fuzz {
        #[arg(long, default_value = "2x2x2x2")]
        dims: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "A")]
        focus: String,
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Write a state file.
    Export {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct StateArgs {
    /// State file (JSON).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Generated state, e.g. `ghz,4`, `dicke,4,2`, `random-pure,2x2x2,7`.
    #[arg(long = "gen")]
    generate: Option<String>,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(long, default_value_t = OptimizerConfig::default().restarts)]
    restarts: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().max_evals_per_restart)]
    max_evals: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, env = "QPOLY_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[arg(long, value_enum, default_value_t = Switch::On)]
    escalate: Switch,
    /// Slack tolerance for chain verdicts.
    #[arg(long, default_value_t = CHAIN_TOLERANCE)]
    chain_tol: f64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    identities: Switch,
}

#[derive(Args, Debug)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Dual,
    Direct,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_evals_per_restart: self.max_evals,
            tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

fn run_config(
    opt: &OptArgs,
    chain: Option<&ChainArgs>,
    route: MeasurementSearch,
    allow_mixed: bool,
) -> RunConfig {
    let mut cfg = RunConfig {
        optimizer: opt.config(),
        route,
        allow_mixed,
        ..RunConfig::default()
    };
    if let Some(c) = chain {
        cfg.chain = ChainOptions {
            tolerance: c.chain_tol,
            escalate: c.escalate == Switch::On,
            ..ChainOptions::default()
        };
        cfg.identities = c.identities == Switch::On;
    }
    cfg
}

fn load_state(args: &StateArgs, seed: u64) -> CliResult<(LoadedState, String)> {
    match (&args.state, &args.generate) {
        (Some(path), _) => Ok((statefile::load(path)?, format!("file:{}", path.display()))),
        (None, Some(spec)) => {
            let kind = spec.parse::<StateKind>()?.resolve_seed(seed);
            Ok((kind.build(seed)?, kind.to_string()))
        }
        (None, None) => Err(CliError::Invalid(
            "one of --state or --gen is required".into(),
        )),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    if v == Verdict::Pass {
        0
    } else {
        1
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Compute {
            state,
            measure,
            keep,
            side,
            route,
            opt,
            out,
        } => {
            let (loaded, echo) = load_state(&state, opt.seed)?;
            let layout = loaded.layout().clone();
            let keep = keep.map(|k| split_labels(&k, &layout)).transpose()?;
            let side = side.map(|s| split_labels(&s, &layout)).transpose()?;
            let route = match route {
                RouteArg::Dual => MeasurementSearch::Dual,
                RouteArg::Direct => MeasurementSearch::Direct,
            };
            let cfg = run_config(&opt, None, route, false);
            let rec = with_jobs(opt.jobs, || {
                commands::cmd_compute(
                    &loaded,
                    &echo,
                    measure,
                    keep.as_deref(),
                    side.as_deref(),
                    &cfg,
                )
            })??;
            let text = match out.format {
                Format::Json => canonical_json(&rec),
                Format::Csv => record_csv(&rec)?,
            };
            emit(out.out.as_ref(), &text)?;
            Ok(0)
        }
        Command::Verify {
            state,
            focus,
            allow_mixed,
            chain,
            opt,
            out,
        } => {
            let (loaded, echo) = load_state(&state, opt.seed)?;
            let cfg = run_config(&opt, Some(&chain), MeasurementSearch::Dual, allow_mixed);
            let rec = with_jobs(opt.jobs, || {
                commands::cmd_verify(&loaded, &echo, &focus, &cfg)
            })??;
            let text = match out.format {
                Format::Json => canonical_json(&rec),
                Format::Csv => record_csv(&rec)?,
            };
            emit(out.out.as_ref(), &text)?;
            Ok(verdict_code(rec.verdict.unwrap_or(Verdict::Inconclusive)))
        }
        Command::Fuzz {
            dims,
            trials,
            focus,
            chain,
            opt,
            out,
        } => {
            let dims = parse_dims(&dims)?;
            let cfg = run_config(&opt, Some(&chain), MeasurementSearch::Dual, false);
            let rep = with_jobs(opt.jobs, || {
                commands::cmd_fuzz(&dims, trials, opt.seed, &focus, &cfg)
            })??;
            let text = match out.format {
                Format::Json => canonical_json(&rep),
                Format::Csv => fuzz_csv(&rep)?,
            };
            emit(out.out.as_ref(), &text)?;
            eprintln!(
                "fuzz: {} trials, {} pass, {} fail, {} inconclusive, {} escalated, min slack {:.3e}",
                rep.summary.trials,
                rep.summary.pass,
                rep.summary.fail,
                rep.summary.inconclusive,
                rep.summary.escalations,
                rep.summary.min_slack
            );
            Ok(verdict_code(rep.verdict))
        }
        Command::Export { state, seed, out } => {
            let (loaded, _) = load_state(&state, seed)?;
            emit(out.as_ref(), &statefile::to_json(&loaded))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qpoly: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
