//! Exact and empirical checkers for stochastic orders and dependence
//! concepts.
//!
//! Discrete laws are checked in exact rational arithmetic with zero
//! tolerance: all the step functions involved (survival, stop-loss
//! transforms, conditional survival) change only at support atoms, so
//! sweeping the merged support is exhaustive. Sample-based checks compare
//! empirical curves on the merged sample grid with an explicit tolerance.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenarios::{DiscreteJointDistribution, DiscreteMarginal, ScenarioMatrix};

/// Location at which a defining inequality fails (or, for the cut criterion,
/// the crossing point certifying success).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Threshold { t: f64 },
    GridPoint { point: Vec<f64> },
    Conditional {
        axis: usize,
        lower: f64,
        upper: f64,
        threshold: f64,
    },
}

/// Outcome of an order or dependence check. `margin` is the worst signed
/// slack of the defining inequality: non-negative slack everywhere means the
/// property holds; a failing check carries the witness of the worst
/// violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub margin: f64,
}

impl OrderVerdict {
    fn from_exact_slacks(slacks: impl IntoIterator<Item = (Witness, BigRational)>) -> Self {
        let mut worst: Option<(Witness, BigRational)> = None;
        for (w, s) in slacks {
            match &worst {
                Some((_, best)) if s >= *best => {}
                _ => worst = Some((w, s)),
            }
        }
        match worst {
            None => OrderVerdict {
                holds: true,
                witness: None,
                margin: 0.0,
            },
            Some((w, s)) => {
                let holds = !s.is_negative();
                OrderVerdict {
                    holds,
                    witness: if holds { None } else { Some(w) },
                    margin: s.to_f64().unwrap_or(f64::NEG_INFINITY),
                }
            }
        }
    }

    fn from_sample_slacks(
        slacks: impl IntoIterator<Item = (Witness, f64)>,
        tol: f64,
    ) -> Self {
        let mut worst: Option<(Witness, f64)> = None;
        for (w, s) in slacks {
            match &worst {
                Some((_, best)) if s >= *best => {}
                _ => worst = Some((w, s)),
            }
        }
        match worst {
            None => OrderVerdict {
                holds: true,
                witness: None,
                margin: 0.0,
            },
            Some((w, s)) => {
                let holds = s >= -tol;
                OrderVerdict {
                    holds,
                    witness: if holds { None } else { Some(w) },
                    margin: s,
                }
            }
        }
    }
}

fn merged_support(x: &DiscreteMarginal, y: &DiscreteMarginal) -> Vec<f64> {
    let mut grid: Vec<f64> = x.values().iter().chain(y.values()).copied().collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    grid
}

// ---------------------------------------------------------------------------
// Usual stochastic order
// ---------------------------------------------------------------------------

/// `X <=_st Y` on exact laws: survival dominance `S_X(t) <= S_Y(t)` swept
/// over the merged support, zero tolerance.
pub fn check_st(x: &DiscreteMarginal, y: &DiscreteMarginal) -> OrderVerdict {
    OrderVerdict::from_exact_slacks(merged_support(x, y).into_iter().map(|t| {
        (
            Witness::Threshold { t },
            y.survival(t) - x.survival(t),
        )
    }))
}

/// Empirical `X <=_st Y`: ECDF dominance `F_X(t) >= F_Y(t)` on the merged
/// sample grid within `tol`.
pub fn check_st_samples(xs: &[f64], ys: &[f64], tol: f64) -> OrderVerdict {
    let xs = sorted(xs);
    let ys = sorted(ys);
    let grid = merged_values(&xs, &ys);
    OrderVerdict::from_sample_slacks(
        grid.into_iter()
            .map(|t| (Witness::Threshold { t }, ecdf(&xs, t) - ecdf(&ys, t))),
        tol,
    )
}

// ---------------------------------------------------------------------------
// Increasing convex order
// ---------------------------------------------------------------------------

/// `X <=_icx Y` on exact laws: stop-loss dominance `E[(X-t)_+] <= E[(Y-t)_+]`
/// at every atom of both supports plus `t = 0`. The transforms are piecewise
/// linear with knots only at atoms, so the sweep is exhaustive.
pub fn check_icx(x: &DiscreteMarginal, y: &DiscreteMarginal) -> OrderVerdict {
    let mut grid = merged_support(x, y);
    if grid.first() != Some(&0.0) {
        grid.insert(0, 0.0);
    }
    OrderVerdict::from_exact_slacks(grid.into_iter().map(|t| {
        (
            Witness::Threshold { t },
            y.stop_loss(t) - x.stop_loss(t),
        )
    }))
}

/// Empirical `X <=_icx Y`: stop-loss transforms compared at every merged
/// sample point. Slack is measured relative to `1 + max(E[X], E[Y])`.
pub fn check_icx_samples(xs: &[f64], ys: &[f64], tol: f64) -> OrderVerdict {
    let xs = sorted(xs);
    let ys = sorted(ys);
    let slx = StopLossCurve::new(&xs);
    let sly = StopLossCurve::new(&ys);
    let scale = 1.0 + slx.at(0.0).max(sly.at(0.0));
    let mut grid = merged_values(&xs, &ys);
    grid.insert(0, 0.0);
    grid.dedup();
    OrderVerdict::from_sample_slacks(
        grid.into_iter()
            .map(|t| (Witness::Threshold { t }, sly.at(t) - slx.at(t))),
        tol * scale,
    )
}

// ---------------------------------------------------------------------------
// Cut criterion
// ---------------------------------------------------------------------------

/// Sufficient condition for `X <=_icx Y`: the distribution functions cross at
/// most once (F_X below after some t0, above before) and `E[X] <= E[Y]`.
/// A true verdict carries the crossing point t0 as its witness.
pub fn check_cut_criterion(x: &DiscreteMarginal, y: &DiscreteMarginal) -> OrderVerdict {
    let grid = merged_support(x, y);
    let diffs: Vec<BigRational> = grid
        .iter()
        .map(|&t| x.cdf(t) - y.cdf(t))
        .collect();
    let first_pos = diffs.iter().position(|d| d > &BigRational::zero());
    let last_neg = diffs.iter().rposition(|d| d.is_negative());

    // Single crossing: no negative difference may follow a positive one.
    if let (Some(fp), Some(ln)) = (first_pos, last_neg) {
        if ln > fp {
            return OrderVerdict {
                holds: false,
                witness: Some(Witness::Threshold { t: grid[ln] }),
                margin: (-diffs[ln].clone().abs()).to_f64().unwrap_or(f64::NEG_INFINITY),
            };
        }
    }
    let mean_slack = y.mean() - x.mean();
    if mean_slack.is_negative() {
        return OrderVerdict {
            holds: false,
            witness: Some(Witness::Threshold { t: 0.0 }),
            margin: mean_slack.to_f64().unwrap_or(f64::NEG_INFINITY),
        };
    }
    // Crossing point: first threshold where F_X pulls strictly above F_Y, or
    // past the support when it never does.
    let t0 = match first_pos {
        Some(fp) => grid[fp],
        None => grid.last().copied().unwrap_or(0.0),
    };
    OrderVerdict {
        holds: true,
        witness: Some(Witness::Threshold { t: t0 }),
        margin: mean_slack.to_f64().unwrap_or(f64::INFINITY),
    }
}


// ---------------------------------------------------------------------------
// Positive orthant dependence
// ---------------------------------------------------------------------------

/// Positive orthant dependence, exact: both
/// `P(X <= x) >= prod_i P(X_i <= x_i)` and `P(X > x) >= prod_i P(X_i > x_i)`
/// at every point of the full support grid (the orthant probabilities are
/// piecewise constant between support values).
pub fn check_pod(joint: &DiscreteJointDistribution) -> OrderVerdict {
    let n = joint.n();
    let marginals: Vec<DiscreteMarginal> = (0..n).map(|j| joint.marginal(j)).collect();
    let supports: Vec<&[f64]> = marginals.iter().map(|m| m.values()).collect();

    let mut slacks: Vec<(Witness, BigRational)> = Vec::new();
    let mut index = vec![0usize; n];
    loop {
        let point: Vec<f64> = index.iter().zip(&supports).map(|(&i, s)| s[i]).collect();

        let mut joint_lower = BigRational::zero();
        let mut joint_upper = BigRational::zero();
        for (atom, p) in joint.atoms().iter().zip(joint.probs()) {
            if atom.iter().zip(&point).all(|(a, x)| a <= x) {
                joint_lower += p;
            }
            if atom.iter().zip(&point).all(|(a, x)| a > x) {
                joint_upper += p;
            }
        }
        let mut prod_lower = BigRational::from_integer(1.into());
        let mut prod_upper = BigRational::from_integer(1.into());
        for (m, &x) in marginals.iter().zip(&point) {
            prod_lower *= m.cdf(x);
            prod_upper *= m.survival(x);
        }
        let lower_slack = joint_lower - prod_lower;
        let upper_slack = joint_upper - prod_upper;
        let slack = lower_slack.min(upper_slack);
        slacks.push((Witness::GridPoint { point }, slack));

        // Advance the multi-index.
        let mut j = 0;
        loop {
            if j == n {
                return OrderVerdict::from_exact_slacks(slacks);
            }
            index[j] += 1;
            if index[j] < supports[j].len() {
                break;
            }
            index[j] = 0;
            j += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Positive dependence through the stochastic ordering (bivariate)
// ---------------------------------------------------------------------------

/// PDS for `n = 2`, exact: along each axis, the conditional law of the other
/// coordinate must increase in the usual stochastic order as the conditioning
/// value increases. Checked on consecutive conditioning atoms (st-dominance
/// is transitive). Dimensions above 2 are refused: certifying PDS would
/// require checking all increasing functions of `n - 1` arguments, which has
/// no finite reduction in general.
pub fn check_pds_bivariate(joint: &DiscreteJointDistribution) -> Result<OrderVerdict> {
    if joint.n() != 2 {
        return Err(Error::Unsupported(format!(
            "PDS check is implemented exactly for n = 2 only (got n = {})",
            joint.n()
        )));
    }
    let mut slacks: Vec<(Witness, BigRational)> = Vec::new();
    for axis in 0..2 {
        let other = 1 - axis;
        let mut cond_values: Vec<f64> = joint.atoms().iter().map(|a| a[axis]).collect();
        cond_values.sort_unstable_by(f64::total_cmp);
        cond_values.dedup();

        let conditional = |v: f64| -> (DiscreteMarginal, BigRational) {
            let law = DiscreteMarginal::from_pairs(
                joint
                    .atoms()
                    .iter()
                    .zip(joint.probs())
                    .filter(|(a, _)| a[axis] == v)
                    .map(|(a, p)| (a[other], p.clone())),
            );
            let mass = law.total_mass();
            (law, mass)
        };

        for pair in cond_values.windows(2) {
            let (lower_law, lower_mass) = conditional(pair[0]);
            let (upper_law, upper_mass) = conditional(pair[1]);
            for t in merged_support(&lower_law, &upper_law) {
                // S(t | upper) - S(t | lower) >= 0 is required.
                let slack =
                    upper_law.survival(t) / &upper_mass - lower_law.survival(t) / &lower_mass;
                slacks.push((
                    Witness::Conditional {
                        axis,
                        lower: pair[0],
                        upper: pair[1],
                        threshold: t,
                    },
                    slack,
                ));
            }
        }
    }
    Ok(OrderVerdict::from_exact_slacks(slacks))
}

// ---------------------------------------------------------------------------
// Monte Carlo sum checks
// ---------------------------------------------------------------------------

/// DKW-motivated default tolerance for empirical curve comparisons;
/// heuristic, overridable.
pub fn default_sample_tol(m: usize) -> f64 {
    3.0 * ((m as f64).ln() / m as f64).sqrt()
}

/// Empirical check of `sum_i X_i <=_st sum_i Y_i` for two equally shaped
/// matrices sharing a copula.
pub fn mc_check_sum_st(
    x: &ScenarioMatrix,
    y: &ScenarioMatrix,
    tol: f64,
) -> Result<OrderVerdict> {
    check_shapes(x, y)?;
    Ok(check_st_samples(&x.row_sums(), &y.row_sums(), tol))
}

/// Empirical check of `sum_i X_i <=_icx sum_i Y_i`.
pub fn mc_check_sum_icx(
    x: &ScenarioMatrix,
    y: &ScenarioMatrix,
    tol: f64,
) -> Result<OrderVerdict> {
    check_shapes(x, y)?;
    Ok(check_icx_samples(&x.row_sums(), &y.row_sums(), tol))
}

fn check_shapes(x: &ScenarioMatrix, y: &ScenarioMatrix) -> Result<()> {
    if x.m() != y.m() || x.n() != y.n() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            x.m(),
            x.n(),
            y.m(),
            y.n()
        )));
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn merged_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = xs.iter().chain(ys).copied().collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn ecdf(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&v| v <= t) as f64 / sorted.len() as f64
}

/// Empirical stop-loss transform with O(log m) evaluation via suffix sums.
struct StopLossCurve<'a> {
    sorted: &'a [f64],
    suffix: Vec<f64>,
}

impl<'a> StopLossCurve<'a> {
    fn new(sorted: &'a [f64]) -> Self {
        let mut suffix = vec![0.0; sorted.len() + 1];
        for i in (0..sorted.len()).rev() {
            suffix[i] = suffix[i + 1] + sorted[i];
        }
        StopLossCurve { sorted, suffix }
    }

    fn at(&self, t: f64) -> f64 {
        let i = self.sorted.partition_point(|&v| v <= t);
        let count = (self.sorted.len() - i) as f64;
        (self.suffix[i] - t * count) / self.sorted.len() as f64
    }
}

// ---------------------------------------------------------------------------
// POD-but-not-PDS counterexample
// ---------------------------------------------------------------------------

/// The canonical bivariate law showing that positive orthant dependence does
/// not make marginal icx-dominance carry over to sums, with every verdict
/// evaluated in exact rational arithmetic.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleBundle {
    #[serde(skip)]
    pub law_y: DiscreteJointDistribution,
    #[serde(skip)]
    pub law_x: DiscreteJointDistribution,
    /// Y is positively orthant dependent.
    pub pod: OrderVerdict,
    /// Y is not PDS; the witness pins the conditional-survival reversal.
    pub pds: OrderVerdict,
    /// X_i <=_icx Y_i for both coordinates.
    pub icx_marginals: Vec<OrderVerdict>,
    /// Y_1 + Y_2 <=_icx X_1 + X_2: the order of the sums is reversed
    /// relative to the marginals.
    pub icx_sum_reversed: OrderVerdict,
    /// X_1 + X_2 <=_icx Y_1 + Y_2 also holds: the two sums coincide in law,
    /// so the strict marginal improvement evaporates at the sum level.
    pub icx_sum_forward: OrderVerdict,
    /// Strict orderings among X entries are inherited from Y entries
    /// (the increasing map only coarsens ranks), so both vectors share a
    /// copula.
    pub copula_preserved: bool,
}

/// The increasing map `0 -> 0, 1 -> 2, 3 -> 2, 4 -> 4` applied to the second
/// coordinate.
fn coarsening_map(y: f64) -> f64 {
    match y as u8 {
        0 => 0.0,
        1 | 3 => 2.0,
        4 => 4.0,
        _ => unreachable!("support is {{0,1,3,4}}"),
    }
}

/// Joint law of the bivariate POD-but-not-PDS vector (probabilities in
/// twelfths), together with its image under the coarsening map.
pub fn pod_not_pds_laws() -> (DiscreteJointDistribution, DiscreteJointDistribution) {
    let law_y = DiscreteJointDistribution::from_fractions(
        vec![
            vec![0.0, 0.0],
            vec![0.0, 3.0],
            vec![0.0, 4.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 4.0],
        ],
        &[(3, 12), (2, 12), (1, 12), (1, 12), (2, 12), (3, 12)],
    )
    .expect("counterexample law is valid");
    let law_x = law_y
        .map_coordinate(1, coarsening_map)
        .expect("image law is valid");
    (law_y, law_x)
}

pub fn pod_not_pds_counterexample() -> CounterexampleBundle {
    let (law_y, law_x) = pod_not_pds_laws();

    let pod = check_pod(&law_y);
    let pds = check_pds_bivariate(&law_y).expect("bivariate");
    let icx_marginals = (0..2)
        .map(|j| check_icx(&law_x.marginal(j), &law_y.marginal(j)))
        .collect();
    let icx_sum_reversed = check_icx(&law_y.sum_law(), &law_x.sum_law());
    let icx_sum_forward = check_icx(&law_x.sum_law(), &law_y.sum_law());

    // Concordance coarsening on the exact 12-row enumerations: a strict
    // ordering between two X rows must come from the same strict ordering of
    // the Y rows.
    let y_matrix = law_y
        .expand_to_scenarios(12)
        .expect("twelfths expand exactly");
    let x_matrix = y_matrix
        .map_columns(|j, v| if j == 1 { coarsening_map(v) } else { v })
        .expect("mapped matrix is valid");
    let mut copula_preserved = true;
    for j in 0..2 {
        let xc = x_matrix.column(j);
        let yc = y_matrix.column(j);
        for r in 0..x_matrix.m() {
            for s in 0..x_matrix.m() {
                if xc[r] < xc[s] && !(yc[r] < yc[s]) {
                    copula_preserved = false;
                }
            }
        }
    }

    CounterexampleBundle {
        law_y,
        law_x,
        pod,
        pds,
        icx_marginals,
        icx_sum_reversed,
        icx_sum_forward,
        copula_preserved,
    }
}
