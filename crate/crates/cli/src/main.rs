use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coboson::runner::{resolve_threads, run, write_report};
use coboson::scenario::{
    preset, Axis, BranchingParams, CobosonModel, CobosonParams, EpScanParams, Format, Grid, Kind, Output, Params,
    Range, Scenario, TimeUnit, TunnelParams, FORMAT_VERSION,
};
use coboson::selftest::run_selftest;
use coboson::Error;

/// Composite-boson statistics, two-site tunneling and branching fractions.
///
/// Numeric options marked GRID take a single value, a comma-separated list
/// (`0.1,0.2`) or an inclusive range `start:stop:count`. Up to two options
/// may carry more than one value; they become sweep axes, the first listed
/// in this help being the outer loop.
#[derive(Parser, Debug)]
#[command(name = "coboson", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,

    /// Worker threads for sweeps (1 = serial; default: all cores)
    #[arg(long, global = true, env = "COBOSON_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetName {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    #[value(name = "fmo_demo")]
    FmoDemo,
}

impl PresetName {
    fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1 => "fig1",
            PresetName::Fig2a => "fig2a",
            PresetName::Fig2b => "fig2b",
            PresetName::Fig3a => "fig3a",
            PresetName::Fig3b => "fig3b",
            PresetName::FmoDemo => "fmo_demo",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Unit {
    Absolute,
    T0,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coboson measures of a Schmidt spectrum over a range of pair numbers
    Coboson(CobosonArgs),
    /// Quantum-dot g2(0) and bosonic deviation versus pair number
    Qdot(QdotArgs),
    /// Two-site population trajectories
    Tunnel(TunnelArgs),
    /// |Omega|^2, regime and eigenvector coalescence over (v, gamma_diff)
    EpScan(EpScanArgs),
    /// Branching fraction F2 by closed form, time integral and energy integral
    Branching(BranchingArgs),
    /// Trajectory and branching fractions of a network scenario file
    Network {
        /// Scenario document of kind `network`
        scenario: PathBuf,
    },
    /// Runs any scenario document
    Run {
        scenario: PathBuf,
    },
    /// Runs a built-in figure scenario
    Preset {
        #[arg(value_enum)]
        name: PresetName,
        /// Print the scenario document instead of running it
        #[arg(long)]
        print_scenario: bool,
    },
    /// Randomized agreement checks against independent references
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per check
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true, group = clap::ArgGroup::new("source").required(true))]
struct CobosonArgs {
    /// J equally weighted modes
    #[arg(long, group = "source")]
    uniform: Option<usize>,
    /// Comma-separated raw weights (normalized on load)
    #[arg(long, group = "source", value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Spectrum file: one weight per line, `#` comments
    #[arg(long, group = "source")]
    spectrum: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct QdotArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 100)]
    n_max: usize,
    /// Ratio a_B/L of exciton Bohr radius to dot size (GRID)
    #[arg(long, default_value = "0.01,0.03,0.05,0.07", allow_hyphen_values = true)]
    r: String,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct TunnelArgs {
    /// Energy of site 1
    #[arg(long, default_value_t = 0.0)]
    omega1: f64,
    /// Detuning omega2 - omega1 (GRID)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    omega0: String,
    /// Tunneling coupling (GRID)
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    v: String,
    /// Decay rate of site 1 (GRID; default 0.1 unless --delta1 is given)
    #[arg(long, conflicts_with = "delta1", allow_hyphen_values = true)]
    gamma1: Option<String>,
    /// Decay rate of site 2 (GRID; default 0.1 unless --delta2 is given)
    #[arg(long, conflicts_with = "delta2", allow_hyphen_values = true)]
    gamma2: Option<String>,
    /// Bosonic deviation of site 1, gamma1 = scale1 * delta1 (GRID)
    #[arg(long, allow_hyphen_values = true)]
    delta1: Option<String>,
    /// Bosonic deviation of site 2, gamma2 = scale2 * delta2 (GRID)
    #[arg(long, allow_hyphen_values = true)]
    delta2: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    scale1: f64,
    #[arg(long, default_value_t = 1.0)]
    scale2: f64,
    #[arg(long, default_value_t = 20.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Time unit of t_max, dt and the t column
    #[arg(long, value_enum, default_value = "absolute")]
    time_unit: Unit,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct EpScanArgs {
    /// Tunneling coupling (GRID)
    #[arg(long, default_value = "0:0.5:21", allow_hyphen_values = true)]
    v: String,
    /// Half difference of decay rates (gamma2 - gamma1)/2 (GRID)
    #[arg(long, default_value = "-0.5:0.5:21", allow_hyphen_values = true)]
    gamma_diff: String,
    /// Detuning (GRID)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    omega0: String,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct BranchingArgs {
    /// Bosonic deviation of site 1 (GRID)
    #[arg(long, default_value = "0.1", allow_hyphen_values = true)]
    delta1: String,
    /// Bosonic deviation of site 2 (GRID)
    #[arg(long, default_value = "0.1", allow_hyphen_values = true)]
    delta2: String,
    /// Detuning (GRID)
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    omega0: String,
    /// Tunneling coupling (GRID)
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    v: String,
    #[arg(long, default_value_t = 1.0)]
    scale1: f64,
    #[arg(long, default_value_t = 1.0)]
    scale2: f64,
    /// Accuracy target of the two numerical integrals
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// A parsed GRID option: one value is a fixed parameter, more a sweep axis.
fn parse_grid(key: &str, text: &str) -> Result<Grid, Failure> {
    let bad = |what: &str| Failure::Usage(format!("--{}: {what} in `{text}`", key.replace('_', "-")));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("expected a number"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let count = parts[2].trim().parse().map_err(|_| bad("expected an integer count"))?;
        return Ok(Grid::Range(Range {
            start: number(parts[0])?,
            stop: number(parts[1])?,
            count,
        }));
    }
    Ok(Grid::Values(text.split(',').map(number).collect::<Result<_, _>>()?))
}

/// Splits GRID options into fixed values and sweep axes, in the given order.
struct Builder {
    axes: Vec<Axis>,
}

impl Builder {
    fn new() -> Self {
        Self { axes: Vec::new() }
    }

    fn take(&mut self, key: &str, text: Option<&str>) -> Result<Option<f64>, Failure> {
        let Some(text) = text else { return Ok(None) };
        let grid = parse_grid(key, text)?;
        match &grid {
            Grid::Values(v) if v.len() == 1 => Ok(Some(v[0])),
            _ => {
                self.axes.push(Axis {
                    name: key.to_string(),
                    grid,
                });
                Ok(None)
            }
        }
    }
}

fn n_range(min: usize, max: usize) -> Result<Grid, Error> {
    if max < min {
        return Err(Error::Validation {
            key: "n_max".into(),
            constraint: format!("n_max >= n_min (got {max} < {min})"),
        });
    }
    Ok(Grid::Range(Range {
        start: min as f64,
        stop: max as f64,
        count: max - min + 1,
    }))
}

fn scenario(params: Params, sweep: Vec<Axis>) -> Result<Scenario, Error> {
    let s = Scenario {
        version: FORMAT_VERSION,
        params,
        sweep,
        output: Output::default(),
    };
    s.validate()?;
    Ok(s)
}

fn build(command: &Command) -> Result<Scenario, Failure> {
    match command {
        Command::Coboson(a) => {
            let axes = vec![Axis {
                name: "n".into(),
                grid: n_range(a.n_min, a.n_max)?,
            }];
            let params = CobosonParams {
                model: CobosonModel::Spectrum,
                weights: a.weights.clone(),
                uniform_modes: a.uniform,
                spectrum_file: a.spectrum.as_ref().map(|p| p.display().to_string()),
                n: None,
                r: None,
            };
            Ok(scenario(Params::CobosonSweep(params), axes)?)
        }
        Command::Qdot(a) => {
            let mut b = Builder::new();
            let r = b.take("r", Some(&a.r))?;
            b.axes.push(Axis {
                name: "n".into(),
                grid: n_range(a.n_min, a.n_max)?,
            });
            let params = CobosonParams {
                model: CobosonModel::Qdot,
                weights: None,
                uniform_modes: None,
                spectrum_file: None,
                n: None,
                r,
            };
            Ok(scenario(Params::CobosonSweep(params), b.axes)?)
        }
        Command::Tunnel(a) => {
            let mut b = Builder::new();
            let omega0 = b.take("omega0", Some(&a.omega0))?;
            let v = b.take("v", Some(&a.v))?;
            let default_rate = |g: &Option<String>, d: &Option<String>| match (g, d) {
                (None, None) => Some("0.1".to_string()),
                _ => g.clone(),
            };
            let gamma1 = b.take("gamma1", default_rate(&a.gamma1, &a.delta1).as_deref())?;
            let gamma2 = b.take("gamma2", default_rate(&a.gamma2, &a.delta2).as_deref())?;
            let delta1 = b.take("delta1", a.delta1.as_deref())?;
            let delta2 = b.take("delta2", a.delta2.as_deref())?;
            let params = TunnelParams {
                omega1: a.omega1,
                omega0,
                v,
                gamma1,
                gamma2,
                delta1,
                delta2,
                scale1: a.scale1,
                scale2: a.scale2,
                t_max: a.t_max,
                dt: a.dt,
                time_unit: match a.time_unit {
                    Unit::Absolute => TimeUnit::Absolute,
                    Unit::T0 => TimeUnit::T0,
                },
            };
            Ok(scenario(Params::Tunnel(params), b.axes)?)
        }
        Command::EpScan(a) => {
            let mut b = Builder::new();
            let v = b.take("v", Some(&a.v))?;
            let gamma_diff = b.take("gamma_diff", Some(&a.gamma_diff))?;
            let omega0 = b.take("omega0", Some(&a.omega0))?;
            Ok(scenario(Params::EpScan(EpScanParams { v, gamma_diff, omega0 }), b.axes)?)
        }
        Command::Branching(a) => {
            let mut b = Builder::new();
            let delta1 = b.take("delta1", Some(&a.delta1))?;
            let delta2 = b.take("delta2", Some(&a.delta2))?;
            let omega0 = b.take("omega0", Some(&a.omega0))?;
            let v = b.take("v", Some(&a.v))?;
            let params = BranchingParams {
                delta1,
                delta2,
                omega0,
                v,
                scale1: a.scale1,
                scale2: a.scale2,
                tolerance: a.tol,
            };
            Ok(scenario(Params::BranchingSweep(params), b.axes)?)
        }
        Command::Network { scenario } => {
            let s = Scenario::load(scenario)?;
            if s.kind() != Kind::Network {
                return Err(Failure::Run(Error::Validation {
                    key: "kind".into(),
                    constraint: format!("kind `network` (got `{}`)", s.kind().as_str()),
                }));
            }
            Ok(s)
        }
        Command::Run { scenario } => Ok(Scenario::load(scenario)?),
        Command::Preset { name, .. } => Ok(preset(name.as_str())?),
        Command::Selftest { .. } => unreachable!("selftest has no scenario"),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::Accuracy { .. } => 4,
        _ => 3,
    }
}

fn emit(cli: &Cli, bytes: &[u8], scenario_path: Option<&str>) -> Result<(), Error> {
    let path = cli.out.clone().or_else(|| scenario_path.map(PathBuf::from));
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, bytes)?,
        _ => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<u8, Failure> {
    if let Command::Selftest { seed, cases } = cli.command {
        let checks = run_selftest(seed, cases)?;
        let mut text = String::new();
        for c in &checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            text.push_str(&format!(
                "{status} {} [{} cases, worst {:e}, limit {:e}]\n",
                c.name, c.cases, c.worst, c.limit
            ));
        }
        emit(cli, text.as_bytes(), None)?;
        return Ok(if checks.iter().all(|c| c.passed()) { 0 } else { 4 });
    }
    let mut scenario = build(&cli.command)?;
    if let Some(f) = cli.format {
        scenario.output.format = match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        };
    }
    if let Some(p) = &cli.out {
        scenario.output.path = Some(p.display().to_string());
    }
    if let Command::Preset { print_scenario: true, .. } = cli.command {
        emit(cli, format!("{}\n", scenario.to_json()).as_bytes(), None)?;
        return Ok(0);
    }
    let format = scenario.output.format;
    let report = run(&scenario, resolve_threads(cli.threads))?;
    let mut buf = Vec::new();
    write_report(&scenario, &report, format, &mut buf)?;
    emit(cli, &buf, scenario.output.path.as_deref())?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error_code: usage: {first}");
            eprint!("{msg}");
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error_code: usage: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error_code: {}: {e}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}
