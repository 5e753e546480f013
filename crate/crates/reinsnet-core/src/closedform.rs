//! Analytic special cases: premium separability, symmetric reduction, and
//! the Bernoulli-mixture comparison of socially versus individually optimal
//! ceding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::allocator::{self, AllocationSolution, NetworkProblem, SolverConfig, TraceEntry};
use crate::error::{Error, Result};
use crate::measures::{self, DistortionFunction, PremiumPrinciple};
use crate::scenarios::{BernoulliMixtureModel, DiscreteJointDistribution};
use crate::treaties::LayerTreaty;

// ---------------------------------------------------------------------------
// Mixed binomial probabilities
// ---------------------------------------------------------------------------

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    c
}

/// `P(N = k)` for `N` the number of claims in the mixture:
/// `C(n,k) * sum_z z^k (1-z)^(n-k) P(Z=z)`.
pub fn pnk(model: &BernoulliMixtureModel, k: usize) -> Result<f64> {
    if k > model.n {
        return Err(Error::invalid(format!(
            "claim count {k} out of range 0..={}",
            model.n
        )));
    }
    let n = model.n;
    let mix: f64 = model
        .z_support
        .iter()
        .zip(&model.z_probs)
        .map(|(&z, &p)| z.powi(k as i32) * (1.0 - z).powi((n - k) as i32) * p)
        .sum();
    Ok(binomial(n, k) * mix)
}

/// `P(N = k)` for a continuous mixing density on (0,1) via adaptive Simpson
/// quadrature at 1e-10 tolerance.
pub fn pnk_from_density(n: usize, k: usize, density: &dyn Fn(f64) -> f64) -> Result<f64> {
    if k > n {
        return Err(Error::invalid(format!("claim count {k} out of range 0..={n}")));
    }
    let c = binomial(n, k);
    let f = |z: f64| c * z.powi(k as i32) * (1.0 - z).powi((n - k) as i32) * density(z);
    Ok(adaptive_simpson(&f, 0.0, 1.0, 1e-10, 40))
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let whole = simpson(f, a, b);
    let mid = 0.5 * (a + b);
    let left = simpson(f, a, mid);
    let right = simpson(f, mid, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson(f, a, mid, tol / 2.0, depth - 1)
            + adaptive_simpson(f, mid, b, tol / 2.0, depth - 1)
    }
}

// ---------------------------------------------------------------------------
// Social vs individual ceding thresholds
// ---------------------------------------------------------------------------

/// Ternary outcome of comparing a ceding threshold against 1; the underlying
/// conditions are strict inequalities, so an exact hit reports indifference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CedeVerdict {
    Cede,
    Retain,
    Indifferent,
}

fn verdict(threshold: f64) -> CedeVerdict {
    if (threshold - 1.0).abs() <= 1e-12 {
        CedeVerdict::Indifferent
    } else if threshold < 1.0 {
        CedeVerdict::Cede
    } else {
        CedeVerdict::Retain
    }
}

/// Ceding analysis of the symmetric binary-risk market: full cession is
/// socially optimal when `social_threshold < 1`, and individually optimal
/// when `individual_threshold < 1` (the regime `alpha < E[Z]` is assumed so
/// the gross VaR equals 1).
#[derive(Debug, Clone, Serialize)]
pub struct CedeDecision {
    /// `(1+theta) * (1/n) * sum_{k=1}^n g(P(N >= k))`.
    pub social_threshold: f64,
    /// `(1+theta) * g(E[Z])`.
    pub individual_threshold: f64,
    pub social_cede: CedeVerdict,
    pub individual_cede: CedeVerdict,
    pub mean_systemic: f64,
    /// `(1/n) * sum_k P(N >= k) - E[Z]`; zero up to rounding by the
    /// tail-sum identity `E[N] = n * E[Z]`.
    pub identity_gap: f64,
}

pub fn ceding_analysis(
    model: &BernoulliMixtureModel,
    distortion: &DistortionFunction,
    theta: f64,
) -> Result<CedeDecision> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("loading theta must be >= 0, got {theta}")));
    }
    distortion.require_concave()?;
    let n = model.n;
    let pmf: Vec<f64> = (0..=n).map(|k| pnk(model, k)).collect::<Result<_>>()?;
    // Tail sums P(N >= k) for k = 1..n.
    let mut tail = vec![0.0; n + 1];
    for k in (1..=n).rev() {
        tail[k] = tail.get(k + 1).copied().unwrap_or(0.0) + pmf[k];
    }
    let mean_tail: f64 = (1..=n).map(|k| tail[k]).sum::<f64>() / n as f64;
    let social_threshold =
        (1.0 + theta) * (1..=n).map(|k| distortion.eval(tail[k])).sum::<f64>() / n as f64;
    let mean_systemic = model.mean_z();
    let individual_threshold = (1.0 + theta) * distortion.eval(mean_systemic);
    Ok(CedeDecision {
        social_threshold,
        individual_threshold,
        social_cede: verdict(social_threshold),
        individual_cede: verdict(individual_threshold),
        mean_systemic,
        identity_gap: mean_tail - mean_systemic,
    })
}

/// Exact joint law of the mixture for rational systemic support; expands
/// losslessly into scenario rows for exact-enumeration optimizer runs.
pub fn bernoulli_mixture_exact_joint(
    n: usize,
    z_support: &[(i64, i64)],
    z_probs: &[(i64, i64)],
) -> Result<DiscreteJointDistribution> {
    if n == 0 || n > 16 {
        return Err(Error::invalid(format!("insurer count {n} out of range 1..=16")));
    }
    if z_support.len() != z_probs.len() || z_support.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} support points vs {} probabilities",
            z_support.len(),
            z_probs.len()
        )));
    }
    let mut atoms = Vec::with_capacity(1 << n);
    let mut probs = Vec::with_capacity(1 << n);
    for pattern in 0u32..(1 << n) {
        let ones = pattern.count_ones() as usize;
        let mut p = BigRational::from_integer(0.into());
        for (&(zn, zd), &(pn, pd)) in z_support.iter().zip(z_probs) {
            if zd <= 0 || pd <= 0 || zn <= 0 || zn >= zd {
                return Err(Error::invalid(
                    "systemic support must be a positive fraction strictly below 1",
                ));
            }
            let z = BigRational::new(BigInt::from(zn), BigInt::from(zd));
            let pz = BigRational::new(BigInt::from(pn), BigInt::from(pd));
            let q = BigRational::one() - &z;
            let mut term = pz;
            for _ in 0..ones {
                term *= &z;
            }
            for _ in 0..(n - ones) {
                term *= &q;
            }
            p += term;
        }
        let atom: Vec<f64> = (0..n)
            .map(|j| if pattern >> j & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        atoms.push(atom);
        probs.push(p);
    }
    DiscreteJointDistribution::from_rationals(atoms, probs)
}

// ---------------------------------------------------------------------------
// Premium separability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    /// Premium of the pathwise total ceded loss.
    pub joint_premium: f64,
    /// Sum of the per-insurer premiums.
    pub sum_of_parts: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

/// Compare `pi(sum_i W_i)` against `sum_i pi(W_i)` on shared scenarios. The
/// gap is exactly zero for the expected-value principle, vanishes for Wang
/// on comonotone columns, and decays with Monte Carlo error for the
/// exponential principle on independent columns.
pub fn separability_check(
    principle: &PremiumPrinciple,
    ceded_columns: &[Vec<f64>],
) -> Result<SeparabilityReport> {
    if ceded_columns.is_empty() {
        return Err(Error::invalid("need at least one ceded column"));
    }
    let m = ceded_columns[0].len();
    if ceded_columns.iter().any(|c| c.len() != m) {
        return Err(Error::DimensionMismatch(
            "ceded columns must share one scenario count".into(),
        ));
    }
    let mut total = vec![0.0; m];
    let mut sum_of_parts = 0.0;
    for col in ceded_columns {
        for (acc, &x) in total.iter_mut().zip(col) {
            *acc += x;
        }
        sum_of_parts += measures::premium(principle, col)?;
    }
    let joint_premium = measures::premium(principle, &total)?;
    let abs_gap = (joint_premium - sum_of_parts).abs();
    Ok(SeparabilityReport {
        joint_premium,
        sum_of_parts,
        abs_gap,
        rel_gap: abs_gap / (1.0 + joint_premium.abs()),
    })
}

// ---------------------------------------------------------------------------
// Symmetric reduction
// ---------------------------------------------------------------------------

/// Symmetric restriction of a network problem: one shared layer treaty for
/// all insurers. Valid when the risk measures coincide, the premium
/// principle is positively homogeneous and subadditive (expected value, or
/// Wang with concave distortion), and the scenario columns are exchangeable
/// (declared by the caller; column marginals are pooled).
pub struct SymmetricProblem<'a> {
    problem: &'a NetworkProblem,
    pooled: Vec<f64>,
}

pub fn symmetric_reduction(problem: &NetworkProblem) -> Result<SymmetricProblem<'_>> {
    let first = problem.specs[0];
    if problem.specs.iter().any(|s| *s != first) {
        return Err(Error::invalid(
            "symmetric reduction requires identical risk measures across insurers",
        ));
    }
    match &problem.principle {
        PremiumPrinciple::ExpectedValue { .. } => {}
        PremiumPrinciple::Wang { distortion, .. } => distortion.require_concave()?,
        PremiumPrinciple::Exponential { .. } => {
            return Err(Error::invalid(
                "symmetric reduction requires a positively homogeneous premium principle \
                 (expected value or Wang)",
            ))
        }
    }
    let mut pooled: Vec<f64> = problem
        .scenarios
        .columns()
        .iter()
        .flat_map(|c| c.iter().copied())
        .collect();
    pooled.sort_unstable_by(f64::total_cmp);
    Ok(SymmetricProblem { problem, pooled })
}

impl<'a> SymmetricProblem<'a> {
    /// Search dimension: 1 for VaR insurers, 2 otherwise.
    pub fn dimension(&self) -> usize {
        if self.problem.specs[0].is_var() {
            1
        } else {
            2
        }
    }

    /// Grid-plus-golden search over the shared layer `(a, b)`; the treaty is
    /// replicated across all insurers and evaluated with the full network
    /// objective.
    pub fn solve(&self, config: &SolverConfig) -> Result<AllocationSolution> {
        let spec = self.problem.specs[0];
        let v_hi = measures::var(&self.pooled, spec.alpha + spec.beta)?;
        let v_lo = measures::var(&self.pooled, spec.alpha)?;
        let n = self.problem.n();

        let eval = |a: f64, b: f64| -> f64 {
            let layer = LayerTreaty {
                deductible: a,
                bound: b,
            };
            let treaties = vec![layer; n];
            allocator::objective(self.problem, &treaties).expect("valid layer objective")
        };

        let a_grid = allocator::candidate_grid(&self.pooled, v_hi, config.grid_points);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        if spec.is_var() {
            for &a in &a_grid {
                let val = eval(a, (v_lo - a).max(0.0));
                if val < best.0 {
                    best = (val, a, (v_lo - a).max(0.0));
                }
            }
            let (a, val) = allocator::golden_section(
                |a| eval(a, (v_lo - a).max(0.0)),
                (best.1 - v_hi / 50.0).max(0.0),
                (best.1 + v_hi / 50.0).min(v_hi),
                config.golden_iters,
            );
            if val < best.0 {
                best = (val, a, (v_lo - a).max(0.0));
            }
        } else {
            let b_grid = allocator::candidate_grid(&self.pooled, v_lo, config.grid_points);
            for &a in &a_grid {
                for &b in &b_grid {
                    let b = b.max(v_hi - a);
                    let val = eval(a, b);
                    if val < best.0 {
                        best = (val, a, b);
                    }
                }
            }
        }

        let deductibles = vec![best.1; n];
        let bounds = vec![best.2; n];
        let treaties: Vec<LayerTreaty> = deductibles
            .iter()
            .zip(&bounds)
            .map(|(&a, &b)| LayerTreaty {
                deductible: a,
                bound: b,
            })
            .collect();
        let per_insurer_capital = allocator::capital_requirement(self.problem, &treaties)?;
        Ok(AllocationSolution {
            deductibles,
            bounds,
            objective: best.0,
            per_insurer_capital,
            trace: vec![TraceEntry {
                sweep: 0,
                coordinate: "symmetric".into(),
                value: best.1,
                objective: best.0,
            }],
        })
    }
}
