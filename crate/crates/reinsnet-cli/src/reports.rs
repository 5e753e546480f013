//! Report assembly with stable formatting: golden outputs round every number
//! to 12 significant digits so files are byte-identical across runs and
//! platforms.

use serde::Serialize;

use reinsnet_core::allocator::{AllocationSolution, NetworkProblem, SolverConfig};
use reinsnet_core::error::{Error, Result};
use reinsnet_core::orders::CounterexampleBundle;

/// Round to 12 significant digits (golden-output precision).
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Serialize)]
pub struct OptimizeConfigEcho {
    pub input: String,
    pub specs: Vec<SpecEcho>,
    pub principle: String,
    pub mode: String,
    pub seed: u64,
    pub grid_points: usize,
    pub random_starts: usize,
    pub cost_of_capital: f64,
}

#[derive(Serialize)]
pub struct SpecEcho {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Serialize)]
pub struct TreatyEcho {
    pub deductible: f64,
    /// Absent for stop-loss treaties (infinite bound).
    pub bound: Option<f64>,
}

#[derive(Serialize)]
pub struct TraceEcho {
    pub sweep: usize,
    pub coordinate: String,
    pub objective: f64,
}

#[derive(Serialize)]
pub struct OptimizeReport {
    pub config: OptimizeConfigEcho,
    pub objective: f64,
    pub treaties: Vec<TreatyEcho>,
    pub per_insurer_capital: Vec<f64>,
    pub trace: Vec<TraceEcho>,
}

impl OptimizeReport {
    pub fn new(
        input: String,
        problem: &NetworkProblem,
        mode: &str,
        seed: u64,
        config: &SolverConfig,
        solution: &AllocationSolution,
    ) -> Self {
        OptimizeReport {
            config: OptimizeConfigEcho {
                input,
                specs: problem
                    .specs
                    .iter()
                    .map(|s| SpecEcho {
                        alpha: s.alpha,
                        beta: s.beta,
                    })
                    .collect(),
                principle: problem.principle.describe(),
                mode: mode.to_string(),
                seed,
                grid_points: config.grid_points,
                random_starts: config.random_starts,
                cost_of_capital: problem.r_coc,
            },
            objective: round_sig(solution.objective),
            treaties: solution
                .deductibles
                .iter()
                .zip(&solution.bounds)
                .map(|(&a, &b)| TreatyEcho {
                    deductible: round_sig(a),
                    bound: b.is_finite().then(|| round_sig(b)),
                })
                .collect(),
            per_insurer_capital: solution
                .per_insurer_capital
                .iter()
                .map(|&c| round_sig(c))
                .collect(),
            trace: solution
                .trace
                .iter()
                .map(|t| TraceEcho {
                    sweep: t.sweep,
                    coordinate: t.coordinate.clone(),
                    objective: round_sig(t.objective),
                })
                .collect(),
        }
    }
}

/// Counterexample bundle with the exact law tables spelled out as fractions.
pub fn counterexample_json(bundle: &CounterexampleBundle) -> Result<serde_json::Value> {
    let law = |d: &reinsnet_core::scenarios::DiscreteJointDistribution| {
        serde_json::json!({
            "atoms": d.atoms(),
            "probs": d.probs().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })
    };
    let verdicts = serde_json::to_value(bundle)
        .map_err(|e| Error::Numerical(format!("verdict serialization: {e}")))?;
    Ok(serde_json::json!({
        "law_y": law(&bundle.law_y),
        "law_x": law(&bundle.law_x),
        "verdicts": verdicts,
    }))
}
