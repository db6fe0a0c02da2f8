//! Command-line driver: every run emits one JSON report (or a table) whose
//! inputs section is a versioned RunConfig that can be fed back through
//! `--config`. Exit code 0 means all checks passed, 1 means a check failed,
//! 2 means the input was invalid.

mod commands;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use commands::*;
use report::{Report, RunConfig};
use serde_json::Value;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "padic-stringy", version)]
#[command(about = "Exact stringy invariants, orbifold volumes over F_q((t)), and duality checks")]
struct Cli {
    /// Output format for the report
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Read the run configuration from a JSON file instead of flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Include wall-clock timing in the report (off by default so reports
    /// stay byte-stable)
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Orbifold volume of A^n/(Z/d) over F_q((t)), sector by sector
    Orbvol {
        #[arg(long)]
        d: u64,
        #[arg(long, value_delimiter = ',')]
        weights: Vec<u64>,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: Option<i64>,
        /// Series literal such as "1*t^1 + O(t^8)" to run the specialization
        /// map on
        #[arg(long)]
        probe: Option<String>,
    },
    /// Stringy count and E-polynomial of a cyclic quotient, optional gerbe
    Stringy {
        #[arg(long)]
        d: u64,
        #[arg(long, value_delimiter = ',')]
        weights: Vec<u64>,
        #[arg(long)]
        q: u64,
        /// Sector character exponents, d comma-separated entries starting
        /// with 0
        #[arg(long, value_delimiter = ',')]
        gerbe: Option<Vec<u64>>,
    },
    /// Residue-level point counts of a smooth model against its Weil volume
    Weil {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: Option<i64>,
    },
    /// Twisted point counts, the averaging identity, and zeta consistency
    TwistCount {
        #[arg(long)]
        d: u64,
        #[arg(long, value_delimiter = ',')]
        weights: Vec<u64>,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        m_max: Option<u32>,
    },
    /// Local Euler characteristic over torsion modules of curves
    Euler {
        #[arg(long)]
        q: u64,
        /// a1,a2,a3,a4,a6
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        curve: Option<Vec<i64>>,
        #[arg(long)]
        n: Option<u64>,
        /// Battery size when no curve is given
        #[arg(long)]
        count: Option<usize>,
    },
    /// Self-dual isogeny cardinalities |E/nE| = |E\[n\]|
    Selfdual {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        curve: Option<Vec<i64>>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Dual-pair fibre simulator: per-fibre cases and the global identity
    MirrorSim {
        /// Group syntax "Z/2 x Z/4"
        #[arg(long)]
        group: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        curve: Option<Vec<i64>>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, default_value_t = 100)]
        fibers: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Root of unity as order,power
        #[arg(long, value_delimiter = ',')]
        xi: Option<Vec<u64>>,
    },
    /// Run the full verification battery
    Suite {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid input: {e}");
            std::process::exit(2);
        }
    };
    let started = Instant::now();
    match dispatch(&config) {
        Err(e) => {
            eprintln!("invalid input: {e}");
            std::process::exit(2);
        }
        Ok(out) => {
            let report = Report {
                command: config.command.clone(),
                inputs: config,
                outputs: out.outputs,
                checks: out.checks,
                precision_used: out.precision_used,
                timing_ms: cli.timing.then(|| started.elapsed().as_millis()),
            };
            match cli.format {
                Format::Json => println!("{}", report.render_json()),
                Format::Table => print!("{}", report.render_table()),
            }
            std::process::exit(if report.all_pass() { 0 } else { 1 });
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    if let Some(path) = &cli.config {
        if cli.command.is_some() {
            return Err("give either --config or a subcommand, not both".into());
        }
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("bad config: {e}"))?;
        if config.version != 1 {
            return Err(format!("unsupported config version {}", config.version));
        }
        return Ok(config);
    }
    let command = cli.command.as_ref().ok_or("missing subcommand")?;
    let (name, parameters) = match command {
        Command::Orbvol {
            d,
            weights,
            q,
            k,
            probe,
        } => (
            "orbvol",
            serde_json::to_value(OrbvolParams {
                d: *d,
                weights: weights.clone(),
                q: *q,
                k: *k,
                probe: probe.clone(),
            }),
        ),
        Command::Stringy {
            d,
            weights,
            q,
            gerbe,
        } => (
            "stringy",
            serde_json::to_value(StringyParams {
                d: *d,
                weights: weights.clone(),
                q: *q,
                gerbe: gerbe.clone(),
            }),
        ),
        Command::Weil { model, q, k } => (
            "weil",
            serde_json::to_value(WeilParams {
                model: model.clone(),
                q: *q,
                k: *k,
            }),
        ),
        Command::TwistCount {
            d,
            weights,
            q,
            m_max,
        } => (
            "twist-count",
            serde_json::to_value(TwistCountParams {
                d: *d,
                weights: weights.clone(),
                q: *q,
                m_max: *m_max,
            }),
        ),
        Command::Euler { q, curve, n, count } => (
            "euler",
            serde_json::to_value(CurveBatteryParams {
                q: *q,
                curve: curve.clone(),
                n: *n,
                count: *count,
            }),
        ),
        Command::Selfdual { q, curve, n, count } => (
            "selfdual",
            serde_json::to_value(CurveBatteryParams {
                q: *q,
                curve: curve.clone(),
                n: *n,
                count: *count,
            }),
        ),
        Command::MirrorSim {
            group,
            curve,
            q,
            n,
            fibers,
            seed,
            xi,
        } => {
            let xi = match xi {
                None => None,
                Some(v) if v.len() == 2 => Some([v[0], v[1]]),
                Some(_) => return Err("xi must be order,power".into()),
            };
            (
                "mirror-sim",
                serde_json::to_value(MirrorSimParams {
                    group: group.clone(),
                    curve: curve.clone(),
                    q: *q,
                    n: *n,
                    fibers: *fibers,
                    seed: *seed,
                    xi,
                }),
            )
        }
        Command::Suite { filter, seed } => (
            "suite",
            serde_json::to_value(SuiteParams {
                filter: filter.clone(),
                seed: *seed,
            }),
        ),
    };
    Ok(RunConfig {
        version: 1,
        command: name.to_string(),
        parameters: parameters.map_err(|e| e.to_string())?,
    })
}

fn dispatch(config: &RunConfig) -> Result<CommandOutput, InputError> {
    fn params<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, InputError> {
        serde_json::from_value(v.clone()).map_err(|e| InputError(format!("bad parameters: {e}")))
    }
    match config.command.as_str() {
        "orbvol" => run_orbvol(&params::<OrbvolParams>(&config.parameters)?),
        "stringy" => run_stringy(&params::<StringyParams>(&config.parameters)?),
        "weil" => run_weil(&params::<WeilParams>(&config.parameters)?),
        "twist-count" => run_twist_count(&params::<TwistCountParams>(&config.parameters)?),
        "euler" => run_euler(&params::<CurveBatteryParams>(&config.parameters)?),
        "selfdual" => run_selfdual(&params::<CurveBatteryParams>(&config.parameters)?),
        "mirror-sim" => run_mirror_sim(&params::<MirrorSimParams>(&config.parameters)?),
        "suite" => run_suite(&params::<SuiteParams>(&config.parameters)?),
        other => Err(InputError(format!("unknown command {other:?}"))),
    }
}
