//! Dominance harness: random admissible treaties against their layer
//! improvements on a shared scenario matrix.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures;
use crate::rng::StreamRng;
use crate::scenarios::CopulaSpec;
use crate::treaties::{self, CededFunction};

use super::{objective, NetworkProblem};

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub trials: usize,
    pub seed: u64,
    /// Relative tolerance for objective dominance (covers Monte Carlo error;
    /// both sides share one scenario matrix).
    pub rel_tol: f64,
    /// Copula the scenarios were generated with, when known. Required to
    /// validate the preconditions of the RVaR-mode comparison.
    pub copula: Option<CopulaSpec>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            trials: 100,
            seed: 0,
            rel_tol: 1e-2,
            copula: None,
        }
    }
}

/// Result of one trial: objective at the random treaties vs at their layer
/// improvements.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub objective_original: f64,
    pub objective_improved: f64,
    /// `original - improved`; dominance means this is not meaningfully
    /// negative.
    pub gap: f64,
    /// RVaR mode only: worst relative drift between `RVaR(f_i(X_i))` and
    /// `RVaR(k_{f_i}(X_i))` across insurers.
    pub max_rvar_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    /// "var" when every insurer uses VaR (h-construction), "rvar" otherwise
    /// (k-construction).
    pub mode: String,
    pub trials: usize,
    pub rel_tol: f64,
    pub violations: Vec<TrialRecord>,
    pub min_gap: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub max_rvar_deviation: f64,
}

impl DominanceReport {
    pub fn zero_violations(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For each trial draw admissible treaties `f_i`, build their layer
/// improvements (`h` in the all-VaR case, `k` otherwise), and evaluate both
/// objectives on the same scenario matrix. Violations beyond tolerance are
/// reported, never thrown.
pub fn dominance_harness(
    problem: &NetworkProblem,
    config: &HarnessConfig,
) -> Result<DominanceReport> {
    if config.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let var_mode = problem.all_var();
    if !var_mode {
        if let Some(copula) = &config.copula {
            if !copula.is_documented_pds() {
                return Err(Error::invalid(
                    "RVaR-mode dominance requires a copula from the documented PDS families \
                     (independent, comonotone, Gaussian with non-negative correlations, \
                     Clayton with theta >= 0)",
                ));
            }
            if !problem.principle.is_icx_consistent(copula.is_independent()) {
                return Err(Error::invalid(
                    "RVaR-mode dominance requires a premium principle consistent with the \
                     increasing convex order (expected value, Wang with concave distortion, \
                     or exponential on independent risks)",
                ));
            }
        }
    }

    let n = problem.n();
    let sorted_cols: Vec<Vec<f64>> = (0..n).map(|j| problem.scenarios.sorted_column(j)).collect();
    let col_max: Vec<f64> = sorted_cols
        .iter()
        .map(|c| *c.last().expect("non-empty column"))
        .collect();
    let rng = StreamRng::new(config.seed);

    let records: Vec<Result<TrialRecord>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let originals: Vec<treaties::CededLossFunction> = (0..n)
                .map(|i| {
                    let mut stream = rng.substream(trial as u64, i as u64);
                    treaties::random_ceded(&mut stream, col_max[i])
                })
                .collect();
            let mut max_dev = 0.0_f64;
            let improved: Vec<treaties::LayerTreaty> = if var_mode {
                (0..n)
                    .map(|i| {
                        treaties::build_h(&originals[i], &sorted_cols[i], problem.specs[i].alpha)
                    })
                    .collect::<Result<_>>()?
            } else {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let k = treaties::build_k(&originals[i], &sorted_cols[i], &problem.specs[i])?;
                    let rf = measures::rvar_transformed(&sorted_cols[i], &problem.specs[i], |x| {
                        originals[i].ceded(x)
                    })?;
                    let rk = measures::rvar_transformed(&sorted_cols[i], &problem.specs[i], |x| {
                        k.ceded(x)
                    })?;
                    max_dev = max_dev.max((rf - rk).abs() / (1.0 + rf.abs()));
                    out.push(k);
                }
                out
            };
            let objective_original = objective(problem, &originals)?;
            let objective_improved = objective(problem, &improved)?;
            Ok(TrialRecord {
                trial,
                objective_original,
                objective_improved,
                gap: objective_original - objective_improved,
                max_rvar_deviation: max_dev,
            })
        })
        .collect();
    let records: Vec<TrialRecord> = records.into_iter().collect::<Result<_>>()?;

    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    let mut sum_gap = 0.0;
    let mut max_dev = 0.0_f64;
    let mut violations = Vec::new();
    for r in &records {
        min_gap = min_gap.min(r.gap);
        max_gap = max_gap.max(r.gap);
        sum_gap += r.gap;
        max_dev = max_dev.max(r.max_rvar_deviation);
        if r.gap < -config.rel_tol * (1.0 + r.objective_original.abs()) {
            violations.push(r.clone());
        }
    }
    Ok(DominanceReport {
        mode: if var_mode { "var" } else { "rvar" }.into(),
        trials: config.trials,
        rel_tol: config.rel_tol,
        violations,
        min_gap,
        mean_gap: sum_gap / records.len() as f64,
        max_gap,
        max_rvar_deviation: max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DistortionFunction, PremiumPrinciple, RiskMeasureSpec};
    use crate::scenarios::{sample_scenarios, Marginal, ScenarioMatrix};
    use crate::treaties::LayerTreaty;

    fn matrix(copula: &CopulaSpec, m: usize, seed: u64) -> ScenarioMatrix {
        let marginals = vec![
            Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
            Marginal::Pareto { shape: 2.5, scale: 1.0 },
        ];
        sample_scenarios(&marginals, copula, m, seed).unwrap()
    }

    #[test]
    fn var_mode_has_no_violations() {
        let problem = NetworkProblem::new(
            matrix(&CopulaSpec::Independent, 4_000, 21),
            vec![
                RiskMeasureSpec::var(0.1).unwrap(),
                RiskMeasureSpec::var(0.05).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.2).unwrap(),
        )
        .unwrap();
        let report = dominance_harness(
            &problem,
            &HarnessConfig {
                trials: 40,
                seed: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.mode, "var");
        assert!(report.zero_violations(), "violations: {:?}", report.violations);
    }

    #[test]
    fn rvar_mode_has_no_violations_and_preserves_rvar() {
        let copula = CopulaSpec::Comonotone;
        let problem = NetworkProblem::new(
            matrix(&copula, 4_000, 22),
            vec![
                RiskMeasureSpec::new(0.05, 0.1).unwrap(),
                RiskMeasureSpec::var(0.1).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.2).unwrap(),
        )
        .unwrap();
        let report = dominance_harness(
            &problem,
            &HarnessConfig {
                trials: 40,
                seed: 2,
                copula: Some(copula),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.mode, "rvar");
        assert!(report.zero_violations(), "violations: {:?}", report.violations);
        assert!(report.max_rvar_deviation <= 1e-9, "{}", report.max_rvar_deviation);
    }

    #[test]
    fn h_form_layers_are_fixed_points_with_zero_gap() {
        // Treaties already of the h-form (deductible + bound = VaR) are
        // reproduced exactly, so both objectives coincide.
        let mx = ScenarioMatrix::from_columns(
            vec![vec![1.0, 2.0, 4.0, 8.0], vec![0.5, 1.0, 2.0, 4.0]],
            0,
        )
        .unwrap();
        let problem = NetworkProblem::new(
            mx,
            vec![
                RiskMeasureSpec::var(0.25).unwrap(),
                RiskMeasureSpec::var(0.25).unwrap(),
            ],
            PremiumPrinciple::expected_value(0.3).unwrap(),
        )
        .unwrap();
        // VaR_{0.25} per column: 4 and 2. Layers with a + b = VaR.
        let f = vec![
            LayerTreaty::new(1.0, 3.0).unwrap(),
            LayerTreaty::new(0.5, 1.5).unwrap(),
        ];
        let h: Vec<LayerTreaty> = (0..2)
            .map(|i| {
                crate::treaties::build_h(
                    &f[i],
                    &problem.scenarios.sorted_column(i),
                    problem.specs[i].alpha,
                )
                .unwrap()
            })
            .collect();
        for i in 0..2 {
            for &x in problem.scenarios.column(i) {
                assert_eq!(h[i].ceded(x), f[i].ceded(x), "insurer {i} at {x}");
            }
        }
        let a = objective(&problem, &f).unwrap();
        let b = objective(&problem, &h).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rvar_mode_rejects_undocumented_copulas() {
        let corr = crate::scenarios::CorrelationMatrix::equicorrelated(2, -0.3).unwrap();
        let copula = CopulaSpec::Gaussian { correlation: corr };
        let problem = NetworkProblem::new(
            matrix(&CopulaSpec::Independent, 100, 23),
            vec![
                RiskMeasureSpec::new(0.05, 0.1).unwrap(),
                RiskMeasureSpec::var(0.1).unwrap(),
            ],
            PremiumPrinciple::expected_value(0.3).unwrap(),
        )
        .unwrap();
        let err = dominance_harness(
            &problem,
            &HarnessConfig {
                trials: 5,
                copula: Some(copula),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("PDS"), "{err}");
    }

    #[test]
    fn rvar_mode_rejects_inconsistent_principle() {
        // Exponential premium is accepted only for independent scenarios.
        let problem = NetworkProblem::new(
            matrix(&CopulaSpec::Comonotone, 100, 24),
            vec![
                RiskMeasureSpec::new(0.05, 0.1).unwrap(),
                RiskMeasureSpec::var(0.1).unwrap(),
            ],
            PremiumPrinciple::exponential(0.5).unwrap(),
        )
        .unwrap();
        let err = dominance_harness(
            &problem,
            &HarnessConfig {
                trials: 5,
                copula: Some(CopulaSpec::Comonotone),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("increasing convex"), "{err}");
    }
}
