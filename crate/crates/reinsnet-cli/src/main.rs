//! `reinsnet`: scenario generation, risk measurement, treaty optimization,
//! dominance experiments, stochastic-order checks and the closed-form
//! analyses, all emitting machine-readable JSON reports that echo their full
//! configuration.

mod laws;
mod reports;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use reinsnet_core::allocator::{
    dominance_harness, solve_rvar_case, solve_var_case, HarnessConfig, NetworkProblem,
    SolverConfig,
};
use reinsnet_core::closedform;
use reinsnet_core::error::{Error, Result};
use reinsnet_core::measures::{self, DistortionFunction, PremiumPrinciple, RiskMeasureSpec};
use reinsnet_core::orders;
use reinsnet_core::scenarios::{
    load_scenarios, sample_scenarios, save_scenarios, BernoulliMixtureModel, CopulaSpec, Marginal,
};
use reinsnet_core::treaties;

use reports::{round_sig, OptimizeReport};

#[derive(Parser)]
#[command(
    name = "reinsnet",
    version,
    about = "Socially optimal reinsurance treaties for insurer networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate joint loss scenarios and write them as CSV.
    Simulate {
        /// Semicolon-separated marginal specs, e.g.
        /// "lognormal:0,0.5;pareto:2.5,1;point:5".
        #[arg(long)]
        marginals: String,
        /// Copula spec: independent | comonotone | gaussian:<rho> | clayton:<theta>.
        #[arg(long)]
        copula: String,
        /// Number of scenarios.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate RVaR (VaR/ES as special cases) of one scenario column.
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        /// 1-based column index.
        #[arg(long)]
        col: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Optional treaty to apply first: layer:a=..,b=.. | stoploss:a=.. |
        /// pwl:knots=..,slopes=..
        #[arg(long)]
        treaty: Option<String>,
        /// Which side of the treaty to measure.
        #[arg(long, value_enum, default_value_t = Side::Ceded)]
        side: Side,
    },
    /// Price a scenario column (or the row sums) under a premium principle.
    Premium {
        /// ev:<theta> | wang:<distortion>:<theta> | exp:<gamma>.
        #[arg(long)]
        principle: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// 1-based column index, or "sum" for pathwise row sums.
        #[arg(long, default_value = "sum")]
        col: String,
    },
    /// Solve the finite-dimensional layer allocation problem.
    Optimize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Risk measure specs as inline JSON `[{"alpha":..,"beta":..},..]`
        /// or `@file.json`.
        #[arg(long)]
        specs: String,
        #[arg(long)]
        principle: String,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-treaty dominance experiment against the layer improvements.
    Dominate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        specs: String,
        #[arg(long)]
        principle: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Declared copula of the input scenarios (validates the RVaR-mode
        /// preconditions).
        #[arg(long)]
        copula: Option<String>,
        /// Relative dominance tolerance.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stochastic order and dependence checks.
    Orders {
        #[command(subcommand)]
        command: OrdersCommand,
    },
    /// Bernoulli-mixture ceding analysis (social vs individual thresholds).
    Bernoulli {
        #[arg(long)]
        n: usize,
        /// Systemic factor as "support:probs", e.g. "0.1,0.9:0.5,0.5".
        #[arg(long)]
        z: String,
        /// Concave distortion name: identity | sqrt | pow<c>.
        #[arg(long)]
        g: String,
        #[arg(long)]
        theta: f64,
    },
    /// Premium additivity check for the three separable cases.
    Separability {
        #[arg(long, value_enum)]
        case: SeparabilityCase,
        #[arg(long, default_value_t = 100_000)]
        m: usize,
        #[arg(long)]
        seed: u64,
        /// Loading for ev/wang cases.
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
        /// Risk sensitivity for the exp case.
        #[arg(long, default_value_t = 0.6)]
        gamma: f64,
    },
    /// Run the full acceptance battery and print one line per criterion.
    Acceptance {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OrdersCommand {
    /// Check an order/dependence relation on laws given as JSON.
    Check {
        #[arg(long, value_enum)]
        kind: OrderKind,
        #[arg(long = "in")]
        input: PathBuf,
        /// Tolerance for the (unused by exact checks) sample comparisons.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Emit the bivariate POD-but-not-PDS counterexample verdict bundle.
    Example213,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Ceded,
    Retained,
    Gross,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Var,
    Rvar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrderKind {
    St,
    Icx,
    Cut,
    Pod,
    Pds,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeparabilityCase {
    Ev,
    Wang,
    Exp,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `REINSNET_THREADS` caps the rayon pool.
fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("REINSNET_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|e| Error::invalid(format!("REINSNET_THREADS=`{v}`: {e}")))?;
        if threads == 0 {
            return Err(Error::invalid("REINSNET_THREADS must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("report serialization: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_marginals(spec: &str) -> Result<Vec<Marginal>> {
    spec.split(';')
        .map(|s| Marginal::parse(s.trim()))
        .collect()
}

fn parse_specs(arg: &str) -> Result<Vec<RiskMeasureSpec>> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path)?
    } else {
        arg.to_string()
    };
    #[derive(serde::Deserialize)]
    struct RawSpec {
        alpha: f64,
        #[serde(default)]
        beta: f64,
    }
    let raw: Vec<RawSpec> = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("risk measure specs: {e}")))?;
    raw.into_iter()
        .map(|r| RiskMeasureSpec::new(r.alpha, r.beta))
        .collect()
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate {
            marginals,
            copula,
            m,
            seed,
            out,
        } => {
            let parsed = parse_marginals(&marginals)?;
            let copula_spec = CopulaSpec::parse(&copula, parsed.len())?;
            let matrix = sample_scenarios(&parsed, &copula_spec, m, seed)?;
            save_scenarios(&matrix, &out)?;
            emit(
                &serde_json::json!({
                    "config": {
                        "marginals": marginals,
                        "copula": copula_spec,
                        "m": m,
                        "seed": seed,
                    },
                    "rows": matrix.m(),
                    "columns": matrix.n(),
                    "out": out.display().to_string(),
                }),
                None,
            )?;
            Ok(0)
        }

        Command::Measure {
            input,
            col,
            alpha,
            beta,
            treaty,
            side,
        } => {
            let spec = RiskMeasureSpec::new(alpha, beta)?;
            let matrix = load_scenarios(&input)?;
            let column = checked_column(&matrix, col)?;
            let values: Vec<f64> = match &treaty {
                None => column.to_vec(),
                Some(t) => {
                    let f = treaties::parse_treaty_spec(t)?;
                    match side {
                        Side::Ceded => treaties::apply(&f, column),
                        Side::Retained => treaties::retained(&f, column),
                        Side::Gross => column.to_vec(),
                    }
                }
            };
            let mut sorted = values;
            sorted.sort_unstable_by(f64::total_cmp);
            let value = measures::rvar(&sorted, &spec)?;
            emit(
                &serde_json::json!({
                    "value": round_sig(value),
                    "config": {
                        "in": input.display().to_string(),
                        "col": col,
                        "alpha": alpha,
                        "beta": beta,
                        "treaty": treaty,
                    },
                }),
                None,
            )?;
            Ok(0)
        }

        Command::Premium {
            principle,
            input,
            col,
        } => {
            let p = PremiumPrinciple::parse(&principle)?;
            let matrix = load_scenarios(&input)?;
            let sample: Vec<f64> = if col == "sum" {
                matrix.row_sums()
            } else {
                let idx: usize = col
                    .parse()
                    .map_err(|e| Error::invalid(format!("--col `{col}`: {e}")))?;
                checked_column(&matrix, idx)?.to_vec()
            };
            let value = measures::premium(&p, &sample)?;
            emit(
                &serde_json::json!({
                    "value": round_sig(value),
                    "config": {
                        "in": input.display().to_string(),
                        "principle": p.describe(),
                        "col": col,
                    },
                }),
                None,
            )?;
            Ok(0)
        }

        Command::Optimize {
            input,
            specs,
            principle,
            mode,
            seed,
            out,
        } => {
            let parsed_specs = parse_specs(&specs)?;
            let p = PremiumPrinciple::parse(&principle)?;
            let matrix = load_scenarios(&input)?;
            let problem = NetworkProblem::new(matrix, parsed_specs, p)?;
            let config = SolverConfig::with_seed(seed);
            let solution = match mode {
                Mode::Var => solve_var_case(&problem, &config)?,
                Mode::Rvar => solve_rvar_case(&problem, &config)?,
            };
            let report = OptimizeReport::new(
                input.display().to_string(),
                &problem,
                match mode {
                    Mode::Var => "var",
                    Mode::Rvar => "rvar",
                },
                seed,
                &config,
                &solution,
            );
            emit(
                &serde_json::to_value(&report)
                    .map_err(|e| Error::Numerical(format!("report: {e}")))?,
                out.as_ref(),
            )?;
            Ok(0)
        }

        Command::Dominate {
            input,
            specs,
            principle,
            trials,
            seed,
            copula,
            tol,
            out,
        } => {
            let parsed_specs = parse_specs(&specs)?;
            let p = PremiumPrinciple::parse(&principle)?;
            let matrix = load_scenarios(&input)?;
            let n = matrix.n();
            let problem = NetworkProblem::new(matrix, parsed_specs, p.clone())?;
            let copula_spec = copula
                .as_deref()
                .map(|c| CopulaSpec::parse(c, n))
                .transpose()?;
            let report = dominance_harness(
                &problem,
                &HarnessConfig {
                    trials,
                    seed,
                    rel_tol: tol,
                    copula: copula_spec.clone(),
                },
            )?;
            emit(
                &serde_json::json!({
                    "config": {
                        "in": input.display().to_string(),
                        "principle": p.describe(),
                        "trials": trials,
                        "seed": seed,
                        "tol": tol,
                        "copula": copula_spec,
                    },
                    "report": report,
                }),
                out.as_ref(),
            )?;
            Ok(if report.zero_violations() { 0 } else { 1 })
        }

        Command::Orders { command } => run_orders(command),

        Command::Bernoulli { n, z, g, theta } => {
            let (support, probs) = parse_mixture(&z)?;
            let model = BernoulliMixtureModel::new(n, support, probs)?;
            let distortion = DistortionFunction::parse(&g)?;
            let decision = closedform::ceding_analysis(&model, &distortion, theta)?;
            emit(
                &serde_json::json!({
                    "config": { "n": n, "z": z, "g": g, "theta": theta },
                    "decision": decision,
                }),
                None,
            )?;
            Ok(0)
        }

        Command::Separability {
            case,
            m,
            seed,
            theta,
            gamma,
        } => {
            let marginals = vec![
                Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
                Marginal::Uniform { lo: 0.0, hi: 4.0 },
            ];
            let (name, principle, copula) = match case {
                SeparabilityCase::Ev => (
                    "ev",
                    PremiumPrinciple::expected_value(theta)?,
                    CopulaSpec::clayton(1.5)?,
                ),
                SeparabilityCase::Wang => (
                    "wang",
                    PremiumPrinciple::wang(DistortionFunction::sqrt(), theta)?,
                    CopulaSpec::Comonotone,
                ),
                SeparabilityCase::Exp => (
                    "exp",
                    PremiumPrinciple::exponential(gamma)?,
                    CopulaSpec::Independent,
                ),
            };
            let matrix = sample_scenarios(&marginals, &copula, m, seed)?;
            let report = closedform::separability_check(&principle, matrix.columns())?;
            emit(
                &serde_json::json!({
                    "config": {
                        "case": name,
                        "principle": principle.describe(),
                        "copula": copula,
                        "m": m,
                        "seed": seed,
                    },
                    "report": report,
                }),
                None,
            )?;
            Ok(0)
        }

        Command::Acceptance { out } => {
            let outcomes = reinsnet_core::acceptance::run_all();
            for o in &outcomes {
                println!(
                    "{} C{} {} [{} ms] {}",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.id,
                    o.name,
                    o.elapsed_ms,
                    o.details
                );
            }
            if let Some(path) = out {
                emit(
                    &serde_json::to_value(&outcomes)
                        .map_err(|e| Error::Numerical(format!("report: {e}")))?,
                    Some(&path),
                )?;
            }
            Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
        }
    }
}

fn run_orders(command: OrdersCommand) -> Result<u8> {
    match command {
        OrdersCommand::Check { kind, input, tol } => {
            let file = laws::LawsFile::load(&input)?;
            let verdict = match kind {
                OrderKind::St => {
                    let (x, y) = file.pair()?;
                    orders::check_st(&x, &y)
                }
                OrderKind::Icx => {
                    let (x, y) = file.pair()?;
                    orders::check_icx(&x, &y)
                }
                OrderKind::Cut => {
                    let (x, y) = file.pair()?;
                    orders::check_cut_criterion(&x, &y)
                }
                OrderKind::Pod => orders::check_pod(&file.joint()?),
                OrderKind::Pds => orders::check_pds_bivariate(&file.joint()?)?,
            };
            emit(
                &serde_json::json!({
                    "config": {
                        "kind": format!("{:?}", kind).to_lowercase(),
                        "in": input.display().to_string(),
                        "tol": tol,
                    },
                    "verdict": verdict,
                }),
                None,
            )?;
            Ok(0)
        }
        OrdersCommand::Example213 => {
            let bundle = orders::pod_not_pds_counterexample();
            emit(&reports::counterexample_json(&bundle)?, None)?;
            Ok(0)
        }
    }
}

fn checked_column(matrix: &reinsnet_core::ScenarioMatrix, col: usize) -> Result<&[f64]> {
    if col == 0 || col > matrix.n() {
        return Err(Error::invalid(format!(
            "column {col} out of range 1..={}",
            matrix.n()
        )));
    }
    Ok(matrix.column(col - 1))
}

/// Parse "0.1,0.9:0.5,0.5" into (support, probabilities).
fn parse_mixture(z: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let (support, probs) = z.split_once(':').ok_or_else(|| {
        Error::invalid(format!("--z `{z}`: expected `<support>:<probs>`"))
    })?;
    let parse_list = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("--z `{z}`: bad number `{v}`: {e}")))
            })
            .collect()
    };
    Ok((parse_list(support)?, parse_list(probs)?))
}
