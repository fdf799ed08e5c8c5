//! Command-line front end: argument parsing, scenario loading, report output
//! and exit-code mapping.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crypto_stackelberg::attacker::{
    calibrate_threshold, solve_brute_force, solve_dp, solve_hybrid, solve_sample_greedy,
    AttackerError, CalibrationConfig, HybridOutcome, SolverConfig, SolverKind,
};
use crypto_stackelberg::baselines::{
    baseline_strategies, compare_strategies, Comparison, DEFAULT_SAMPLES,
};
use crypto_stackelberg::defender::{solve_stackelberg, DefenderError, StrategyReport};
use crypto_stackelberg::model::{GameInstance, MixedStrategy};
use crypto_stackelberg::report;
use crypto_stackelberg::robust::{
    breach_regret_matrix, regret_matrix, scenario_table, solve_maximin, solve_minimax_regret,
    solve_unconstrained_case, ComparisonMatrix, MaximinReport, RegretReport, RobustError,
    ScenarioSet, ScenarioTable,
};
use crypto_stackelberg::scenario::{load_scenario, paper_dataset, LoadedScenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "stackelberg",
    version,
    about = "Stackelberg encryption portfolio solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ScenarioArgs {
    /// Scenario JSON file. The bundled reference dataset is used when omitted.
    #[arg(long, value_name = "FILE")]
    scenario: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SolverArgs {
    /// Seed for SampleGreedy's coin flips.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cost multiplier used by the DP before rounding.
    #[arg(long, value_name = "M", default_value_t = 10)]
    scale: u32,
    /// Method count above which the hybrid solver switches to SampleGreedy.
    #[arg(long, value_name = "N")]
    threshold: Option<usize>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut config = SolverConfig::default();
        config.greedy.rng_seed = self.seed;
        config.dp.cost_scale = self.scale;
        if let Some(t) = self.threshold {
            config.method_threshold = t;
        }
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackerSolver {
    Dp,
    Greedy,
    Hybrid,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RobustMode {
    Regret,
    Maximin,
    Unconstrained,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Best attack plan against a single algorithm.
    SolveAttacker {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "ID")]
        algorithm: String,
        /// Attacker budget; defaults to the scenario's.
        #[arg(long, value_name = "K")]
        budget: Option<f64>,
        /// Breach value; defaults to the scenario's.
        #[arg(long, value_name = "V")]
        value: Option<f64>,
        #[arg(long, value_enum, default_value_t = AttackerSolver::Hybrid)]
        solver: AttackerSolver,
        #[command(flatten)]
        solver_args: SolverArgs,
        /// Print a plain-text summary instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Equilibrium mixed strategy at one attacker budget.
    SolveDefender {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_name = "K")]
        budget: Option<f64>,
        /// Also write the JSON report to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Print `algorithm,probability,utility,breach,plan` CSV.
        #[arg(long, conflicts_with = "table")]
        csv: bool,
        /// Print a plain-text table.
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Strategies that hedge over several attacker budgets.
    SolveRobust {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated budgets; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',', value_name = "K,K,...")]
        budgets: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = RobustMode::Regret)]
        mode: RobustMode,
        /// Include regret and breach-regret matrices.
        #[arg(long)]
        matrices: bool,
        /// Print the matrices as CSV (requires --matrices).
        #[arg(long, requires = "matrices", conflicts_with = "table")]
        csv: bool,
        #[arg(long)]
        table: bool,
        #[command(flatten)]
        solver_args: SolverArgs,
    },
    /// Compare the equilibrium against random vertices and single-criterion strategies.
    Baselines {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Seed for the random vertices and SampleGreedy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print `label,objective,breach,op,cpu,mem,latency,resilience` CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Time the DP on growing synthetic instances to pick the hybrid threshold.
    Calibrate {
        #[arg(long, value_name = "SECONDS", default_value_t = 0.2)]
        time_limit: f64,
        #[arg(long, value_name = "N", default_value_t = 500)]
        max_methods: usize,
        #[arg(long, value_name = "N", default_value_t = 1)]
        step: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the `n,seconds` series to this file.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Check a scenario file and list every problem found.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<AttackerError> for CliError {
    fn from(e: AttackerError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<DefenderError> for CliError {
    fn from(e: DefenderError) -> Self {
        let code = match &e {
            DefenderError::InfeasibleDefender => EXIT_INFEASIBLE,
            DefenderError::Attacker(_) => EXIT_INPUT,
            DefenderError::Lp(_) | DefenderError::Unbounded => EXIT_INTERNAL,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<RobustError> for CliError {
    fn from(e: RobustError) -> Self {
        match e {
            RobustError::InvalidScenarios(_) => CliError::input(e.to_string()),
            RobustError::Shape(_) => CliError::internal(e.to_string()),
            RobustError::Defender(d) => d.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

/// Parses `argv` (program name first), runs the command against the process
/// stdout and stderr and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn load(args: &ScenarioArgs) -> Result<LoadedScenario, CliError> {
    match &args.scenario {
        Some(path) => Ok(load_scenario(path)?),
        None => Ok(paper_dataset()),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    let written = out.write_all(text.as_bytes()).and_then(|()| {
        if text.ends_with('\n') {
            Ok(())
        } else {
            out.write_all(b"\n")
        }
    });
    match written {
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct AttackerOutput<'a> {
    algorithm: &'a str,
    budget: f64,
    value: f64,
    #[serde(flatten)]
    outcome: &'a HybridOutcome,
}

#[derive(Serialize)]
struct RobustOutput<'a> {
    mode: &'static str,
    table: &'a ScenarioTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    regret: Option<&'a RegretReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    maximin: Option<&'a MaximinReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unconstrained: Option<&'a StrategyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<Matrices>,
}

#[derive(Serialize)]
struct Matrices {
    regret: ComparisonMatrix,
    breach_regret: ComparisonMatrix,
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    valid: bool,
    algorithms: usize,
    attack_methods: usize,
    scenario_budgets: Option<&'a [f64]>,
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::SolveAttacker {
            scenario,
            algorithm,
            budget,
            value,
            solver,
            solver_args,
            table,
        } => {
            let inst = load(&scenario)?.instance;
            let alg = inst
                .algorithm(&algorithm)
                .ok_or_else(|| CliError::input(format!("unknown algorithm \"{algorithm}\"")))?;
            let mut params = inst.attacker;
            if let Some(k) = budget {
                params.budget = k;
            }
            if let Some(v) = value {
                params.value = v;
            }
            let config = solver_args.config();
            let outcome = match solver {
                AttackerSolver::Hybrid => solve_hybrid(alg, &params, &config)?,
                AttackerSolver::Dp => HybridOutcome {
                    plan: solve_dp(alg, &params, &config.dp)?,
                    solver: SolverKind::Dp,
                },
                AttackerSolver::Greedy => {
                    if params.budget.is_nan() || params.budget < 0.0 {
                        return Err(AttackerError::BudgetNegative(params.budget).into());
                    }
                    HybridOutcome {
                        plan: solve_sample_greedy(alg, &params, &config.greedy),
                        solver: SolverKind::SampleGreedy,
                    }
                }
                AttackerSolver::Brute => HybridOutcome {
                    plan: solve_brute_force(alg, &params)?,
                    solver: SolverKind::BruteForce,
                },
            };
            if table {
                emit(out, &report::attacker_table(&alg.id, &outcome))
            } else {
                emit(
                    out,
                    &to_json(&AttackerOutput {
                        algorithm: &alg.id,
                        budget: params.budget,
                        value: params.value,
                        outcome: &outcome,
                    })?,
                )
            }
        }
        Command::SolveDefender {
            scenario,
            budget,
            out: out_path,
            csv,
            table,
            solver_args,
        } => {
            let mut inst = load(&scenario)?.instance;
            if let Some(k) = budget {
                inst = inst.with_attacker_budget(k);
            }
            let result = solve_stackelberg(&inst, &solver_args.config())?;
            let json = to_json(&result)?;
            if let Some(path) = out_path {
                write_file(&path, &format!("{json}\n"))?;
            }
            if csv {
                emit(out, &report::strategy_csv(&result)?)
            } else if table {
                emit(out, &report::strategy_table(&result))
            } else {
                emit(out, &json)
            }
        }
        Command::SolveRobust {
            scenario,
            budgets,
            mode,
            matrices,
            csv,
            table,
            solver_args,
        } => {
            let loaded = load(&scenario)?;
            let inst = loaded.instance;
            let set = match budgets {
                Some(b) => ScenarioSet::new(b)?,
                None => loaded.scenarios.ok_or_else(|| {
                    CliError::input(
                        "no --budgets given and the scenario file lists no scenario_budgets",
                    )
                })?,
            };
            let scenarios = scenario_table(&inst, &set, &solver_args.config())?;
            let (mut regret, mut maximin, mut unconstrained) = (None, None, None);
            let (label, strategy): (&'static str, MixedStrategy) = match mode {
                RobustMode::Regret => {
                    let r = solve_minimax_regret(&inst, &scenarios)?;
                    let s = r.strategy.clone();
                    regret = Some(r);
                    ("minimax_regret", s)
                }
                RobustMode::Maximin => {
                    let r = solve_maximin(&inst, &scenarios)?;
                    let s = r.strategy.clone();
                    maximin = Some(r);
                    ("maximin", s)
                }
                RobustMode::Unconstrained => {
                    let r = solve_unconstrained_case(&inst)?;
                    let s = r.strategy.clone();
                    unconstrained = Some(r);
                    ("unconstrained", s)
                }
            };
            let matrices = matrices.then(|| {
                let extras = [(label.to_string(), strategy)];
                Matrices {
                    regret: regret_matrix(&scenarios, &extras),
                    breach_regret: breach_regret_matrix(&scenarios, &extras),
                }
            });
            if csv {
                let m = matrices
                    .as_ref()
                    .expect("clap enforces --matrices with --csv");
                emit(
                    out,
                    &format!("{}\n{}", m.regret.to_csv()?, m.breach_regret.to_csv()?),
                )
            } else if table {
                let mut text = report::scenario_table_text(&scenarios);
                text.push_str("\n\n");
                if let Some(r) = &regret {
                    text.push_str(&report::regret_text(r, &scenarios.algorithms));
                }
                if let Some(r) = &maximin {
                    text.push_str(&report::maximin_text(
                        r,
                        &scenarios.algorithms,
                        &scenarios.budgets,
                    ));
                }
                if let Some(r) = &unconstrained {
                    text.push_str(&report::strategy_table(r));
                }
                emit(out, &text)
            } else {
                emit(
                    out,
                    &to_json(&RobustOutput {
                        mode: label,
                        table: &scenarios,
                        regret: regret.as_ref(),
                        maximin: maximin.as_ref(),
                        unconstrained: unconstrained.as_ref(),
                        matrices,
                    })?,
                )
            }
        }
        Command::Baselines {
            scenario,
            samples,
            seed,
            csv,
        } => {
            let inst = load(&scenario)?.instance;
            let mut config = SolverConfig::default();
            config.greedy.rng_seed = seed;
            let comparison: Comparison =
                compare_strategies(&inst, &baseline_strategies(&inst, samples, seed)?, &config)?;
            if csv {
                emit(out, &comparison.to_csv()?)
            } else {
                emit(out, &to_json(&comparison)?)
            }
        }
        Command::Calibrate {
            time_limit,
            max_methods,
            step,
            seed,
            csv,
        } => {
            if time_limit.is_nan() || time_limit <= 0.0 || max_methods == 0 || step == 0 {
                return Err(CliError::input(
                    "--time-limit must be positive and --max-methods, --step at least 1",
                ));
            }
            let config = CalibrationConfig {
                time_limit,
                max_methods,
                step,
                rng_seed: seed,
                ..CalibrationConfig::default()
            };
            let calibration = calibrate_threshold(&config);
            if let Some(path) = csv {
                write_file(&path, &report::calibration_csv(&calibration)?)?;
            }
            emit(out, &to_json(&calibration)?)
        }
        Command::Validate { scenario } => {
            let loaded = load(&scenario)?;
            let inst: &GameInstance = &loaded.instance;
            emit(
                out,
                &to_json(&ValidateOutput {
                    valid: true,
                    algorithms: inst.algorithms.len(),
                    attack_methods: inst.attack_method_count(),
                    scenario_budgets: loaded.scenarios.as_ref().map(ScenarioSet::budgets),
                })?,
            )
        }
    }
}
