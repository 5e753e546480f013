//! Network objective, finite-dimensional layer reductions, derivative-free
//! solvers, the dominance harness and capital-requirement accounting.

mod harness;
mod solver;

pub use harness::{dominance_harness, DominanceReport, HarnessConfig, TrialRecord};
pub use solver::{solve_rvar_case, solve_var_case, SolverConfig};

pub(crate) use solver::{candidate_grid, golden_section};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{self, PremiumPrinciple, RiskMeasureSpec};
use crate::scenarios::ScenarioMatrix;
use crate::treaties::{CededFunction, LayerTreaty};

/// One reinsurance market: joint scenarios, per-insurer risk measures, the
/// reinsurer's premium principle, insurer premium incomes and the cost of
/// capital rate.
#[derive(Debug, Clone)]
pub struct NetworkProblem {
    pub scenarios: ScenarioMatrix,
    pub specs: Vec<RiskMeasureSpec>,
    pub principle: PremiumPrinciple,
    pub premium_incomes: Vec<f64>,
    pub r_coc: f64,
}

pub const DEFAULT_COST_OF_CAPITAL: f64 = 0.06;

impl NetworkProblem {
    pub fn new(
        scenarios: ScenarioMatrix,
        specs: Vec<RiskMeasureSpec>,
        principle: PremiumPrinciple,
    ) -> Result<Self> {
        if specs.len() != scenarios.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} risk measure specs for {} scenario columns",
                specs.len(),
                scenarios.n()
            )));
        }
        let n = scenarios.n();
        Ok(NetworkProblem {
            scenarios,
            specs,
            principle,
            premium_incomes: vec![0.0; n],
            r_coc: DEFAULT_COST_OF_CAPITAL,
        })
    }

    pub fn with_premium_incomes(mut self, incomes: Vec<f64>) -> Result<Self> {
        if incomes.len() != self.scenarios.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} premium incomes for {} insurers",
                incomes.len(),
                self.scenarios.n()
            )));
        }
        self.premium_incomes = incomes;
        Ok(self)
    }

    pub fn with_cost_of_capital(mut self, r_coc: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r_coc) {
            return Err(Error::invalid(format!(
                "cost of capital rate must lie in [0,1), got {r_coc}"
            )));
        }
        self.r_coc = r_coc;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.scenarios.n()
    }

    /// Whether every insurer uses plain VaR (`beta = 0`).
    pub fn all_var(&self) -> bool {
        self.specs.iter().all(|s| s.is_var())
    }
}

/// Network objective: the sum of retained-risk measures plus the reinsurer's
/// premium on the pathwise total ceded loss.
pub fn objective<F: CededFunction>(problem: &NetworkProblem, treaties: &[F]) -> Result<f64> {
    if treaties.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} treaties for {} insurers",
            treaties.len(),
            problem.n()
        )));
    }
    let m = problem.scenarios.m();
    let mut total = 0.0;
    let mut ceded_total = vec![0.0; m];
    for (i, f) in treaties.iter().enumerate() {
        let col = problem.scenarios.column(i);
        let mut retained: Vec<f64> = col.iter().map(|&x| x - f.ceded(x)).collect();
        retained.sort_unstable_by(f64::total_cmp);
        total += measures::rvar(&retained, &problem.specs[i])?;
        for (acc, &x) in ceded_total.iter_mut().zip(col) {
            *acc += f.ceded(x);
        }
    }
    total += measures::premium(&problem.principle, &ceded_total)?;
    Ok(total)
}

/// Per-insurer capital requirements at the given treaties:
/// `(rho_i(retained) - premium_income_i + allocated reinsurance premium) / (1 - r_CoC)`.
pub fn capital_requirement<F: CededFunction>(
    problem: &NetworkProblem,
    treaties: &[F],
) -> Result<Vec<f64>> {
    if treaties.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} treaties for {} insurers",
            treaties.len(),
            problem.n()
        )));
    }
    if problem.r_coc >= 1.0 {
        return Err(Error::invalid("cost of capital rate must be below 1"));
    }
    let m = problem.scenarios.m();
    let ceded: Vec<Vec<f64>> = treaties
        .iter()
        .enumerate()
        .map(|(i, f)| crate::treaties::apply(f, problem.scenarios.column(i)))
        .collect();
    let mut total_ceded = vec![0.0; m];
    for col in &ceded {
        for (acc, &x) in total_ceded.iter_mut().zip(col) {
            *acc += x;
        }
    }
    let scale = 1.0 / (1.0 - problem.r_coc);
    let mut out = Vec::with_capacity(problem.n());
    for i in 0..problem.n() {
        let mut retained: Vec<f64> = problem
            .scenarios
            .column(i)
            .iter()
            .zip(&ceded[i])
            .map(|(&x, &c)| x - c)
            .collect();
        retained.sort_unstable_by(f64::total_cmp);
        let rho = measures::rvar(&retained, &problem.specs[i])?;
        let psi = measures::premium_allocation(&problem.principle, &ceded[i], &total_ceded)?;
        out.push(scale * (rho - problem.premium_incomes[i] + psi));
    }
    Ok(out)
}

/// One accepted move of the coordinate-descent solver.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub sweep: usize,
    pub coordinate: String,
    pub value: f64,
    pub objective: f64,
}

/// Feasible solution of the finite-dimensional layer problem.
#[derive(Debug, Clone, Serialize)]
pub struct AllocationSolution {
    pub deductibles: Vec<f64>,
    pub bounds: Vec<f64>,
    pub objective: f64,
    pub per_insurer_capital: Vec<f64>,
    pub trace: Vec<TraceEntry>,
}

impl AllocationSolution {
    pub fn treaties(&self) -> Vec<LayerTreaty> {
        self.deductibles
            .iter()
            .zip(&self.bounds)
            .map(|(&a, &b)| LayerTreaty {
                deductible: a,
                bound: b,
            })
            .collect()
    }

    /// Check the constraint families of the reduced problem exactly
    /// (boundaries included).
    pub fn validate_feasible(&self, problem: &NetworkProblem) -> Result<()> {
        for i in 0..problem.n() {
            let spec = &problem.specs[i];
            let sorted = problem.scenarios.sorted_column(i);
            let v_hi = measures::var(&sorted, spec.alpha + spec.beta)?;
            let v_lo = measures::var(&sorted, spec.alpha)?;
            let a = self.deductibles[i];
            let b = self.bounds[i];
            if !(0.0 <= a && a <= v_hi) {
                return Err(Error::Numerical(format!(
                    "insurer {i}: deductible {a} outside [0, {v_hi}]"
                )));
            }
            if spec.is_var() {
                if (b - (v_lo - a)).abs() > 1e-9 * (1.0 + v_lo.abs()) {
                    return Err(Error::Numerical(format!(
                        "insurer {i}: VaR bound {b} != {v_lo} - {a}"
                    )));
                }
            } else {
                if !(b >= 0.0 && b <= v_lo) {
                    return Err(Error::Numerical(format!(
                        "insurer {i}: bound {b} outside [0, {v_lo}]"
                    )));
                }
                if a + b < v_hi - 1e-9 * (1.0 + v_hi.abs()) {
                    return Err(Error::Numerical(format!(
                        "insurer {i}: a + b = {} below VaR floor {v_hi}",
                        a + b
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DistortionFunction;
    use crate::treaties::CededLossFunction;

    fn four_point_problem() -> NetworkProblem {
        let mx =
            ScenarioMatrix::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0]], 0).unwrap();
        NetworkProblem::new(
            mx,
            vec![RiskMeasureSpec::var(0.25).unwrap()],
            PremiumPrinciple::expected_value(0.5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn objective_with_no_cession_is_sum_of_gross_rvar() {
        let mx = ScenarioMatrix::from_columns(
            vec![vec![1.0, 5.0, 9.0, 13.0], vec![2.0, 4.0, 6.0, 8.0]],
            0,
        )
        .unwrap();
        let specs = vec![
            RiskMeasureSpec::new(0.25, 0.5).unwrap(),
            RiskMeasureSpec::var(0.25).unwrap(),
        ];
        let problem = NetworkProblem::new(
            mx,
            specs.clone(),
            PremiumPrinciple::expected_value(0.2).unwrap(),
        )
        .unwrap();
        let zero = vec![CededLossFunction::zero(), CededLossFunction::zero()];
        let got = objective(&problem, &zero).unwrap();
        let want = measures::rvar(&problem.scenarios.sorted_column(0), &specs[0]).unwrap()
            + measures::rvar(&problem.scenarios.sorted_column(1), &specs[1]).unwrap();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn objective_with_full_cession_is_loaded_mean_of_row_sums() {
        let mx = ScenarioMatrix::from_columns(
            vec![vec![1.0, 5.0, 9.0, 13.0], vec![2.0, 4.0, 6.0, 8.0]],
            0,
        )
        .unwrap();
        let problem = NetworkProblem::new(
            mx,
            vec![
                RiskMeasureSpec::var(0.25).unwrap(),
                RiskMeasureSpec::var(0.25).unwrap(),
            ],
            PremiumPrinciple::expected_value(0.2).unwrap(),
        )
        .unwrap();
        let full = vec![CededLossFunction::identity(), CededLossFunction::identity()];
        let got = objective(&problem, &full).unwrap();
        let mean: f64 =
            problem.scenarios.row_sums().iter().sum::<f64>() / problem.scenarios.m() as f64;
        assert!((got - 1.2 * mean).abs() < 1e-12);
    }

    #[test]
    fn objective_on_hand_computed_layer() {
        // Single insurer, sample {1,2,3,4}, VaR at alpha = 0.25 is x_(3) = 3,
        // layer (a, b) = (1, 2): ceded per scenario (0, 1, 2, 2), retained
        // (1, 1, 1, 2); VaR_{0.25}(retained) = 3rd order stat = 1; premium =
        // 1.5 * mean(ceded) = 1.5 * 1.25.
        let problem = four_point_problem();
        let layer = LayerTreaty::new(1.0, 2.0).unwrap();
        let got = objective(&problem, &[layer]).unwrap();
        assert!((got - (1.0 + 1.5 * 1.25)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn capital_requirement_gross_case() {
        // r_CoC = 0, zero treaties, zero incomes: capital = gross RVaR.
        let problem = four_point_problem().with_cost_of_capital(0.0).unwrap();
        let caps = capital_requirement(&problem, &[CededLossFunction::zero()]).unwrap();
        assert_eq!(caps, vec![3.0]); // VaR_{0.25} of {1,2,3,4}
    }

    #[test]
    fn capital_scales_with_cost_of_capital() {
        let base = four_point_problem().with_cost_of_capital(0.0).unwrap();
        let half = four_point_problem().with_cost_of_capital(0.5).unwrap();
        let layer = LayerTreaty::new(1.0, 2.0).unwrap();
        let c0 = capital_requirement(&base, &[layer]).unwrap();
        let c5 = capital_requirement(&half, &[layer]).unwrap();
        for (a, b) in c0.iter().zip(&c5) {
            assert!((2.0 * a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn total_capital_is_affine_in_objective() {
        // Sum of capital requirements = (objective - sum incomes)/(1 - r),
        // so both rankings agree on any treaty menu.
        let mx = ScenarioMatrix::from_columns(
            vec![vec![1.0, 3.0, 6.0, 10.0], vec![0.5, 2.0, 4.0, 7.0]],
            0,
        )
        .unwrap();
        let problem = NetworkProblem::new(
            mx,
            vec![
                RiskMeasureSpec::var(0.25).unwrap(),
                RiskMeasureSpec::new(0.25, 0.25).unwrap(),
            ],
            PremiumPrinciple::wang(DistortionFunction::sqrt(), 0.1).unwrap(),
        )
        .unwrap()
        .with_premium_incomes(vec![1.0, 2.0])
        .unwrap()
        .with_cost_of_capital(0.06)
        .unwrap();

        let menu: Vec<Vec<LayerTreaty>> = vec![
            vec![
                LayerTreaty::new(0.0, 6.0).unwrap(),
                LayerTreaty::new(0.0, 4.0).unwrap(),
            ],
            vec![
                LayerTreaty::new(2.0, 4.0).unwrap(),
                LayerTreaty::new(1.0, 3.0).unwrap(),
            ],
            vec![
                LayerTreaty::new(6.0, 0.0).unwrap(),
                LayerTreaty::new(4.0, 0.0).unwrap(),
            ],
        ];
        let mut best_by_objective = (f64::INFINITY, usize::MAX);
        let mut best_by_capital = (f64::INFINITY, usize::MAX);
        for (k, treaties) in menu.iter().enumerate() {
            let obj = objective(&problem, treaties).unwrap();
            let cap: f64 = capital_requirement(&problem, treaties).unwrap().iter().sum();
            let expect = (obj - 3.0) / (1.0 - 0.06);
            assert!(
                (cap - expect).abs() < 1e-9 * (1.0 + expect.abs()),
                "menu {k}: {cap} vs {expect}"
            );
            if obj < best_by_objective.0 {
                best_by_objective = (obj, k);
            }
            if cap < best_by_capital.0 {
                best_by_capital = (cap, k);
            }
        }
        assert_eq!(best_by_objective.1, best_by_capital.1);
    }

    #[test]
    fn problem_validation() {
        let mx = ScenarioMatrix::from_columns(vec![vec![1.0]], 0).unwrap();
        assert!(NetworkProblem::new(
            mx.clone(),
            vec![],
            PremiumPrinciple::expected_value(0.0).unwrap()
        )
        .is_err());
        let p = NetworkProblem::new(
            mx,
            vec![RiskMeasureSpec::var(0.5).unwrap()],
            PremiumPrinciple::expected_value(0.0).unwrap(),
        )
        .unwrap();
        assert!(p.clone().with_cost_of_capital(1.0).is_err());
        assert!(p.with_premium_incomes(vec![1.0, 2.0]).is_err());
    }
}
