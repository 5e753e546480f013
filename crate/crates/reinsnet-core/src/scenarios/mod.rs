//! Joint loss scenario generation and exact finite-support joint laws.
//!
//! A [`ScenarioMatrix`] holds `m` i.i.d. draws of the n-dimensional risk
//! vector, column `j` being the sample of risk `j`. Generation pushes copula
//! uniforms through marginal inverse CDFs, which preserves the copula, and is
//! driven by counter-based substreams so output is reproducible and identical
//! under any degree of row parallelism.

mod copula;
mod discrete;
mod io;
mod marginal;

pub use copula::{CopulaSpec, CorrelationMatrix};
pub use discrete::{DiscreteJointDistribution, DiscreteMarginal};
pub use io::{load_scenarios, save_scenarios};
pub use marginal::Marginal;

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{StreamRng, Substream, ROW_LANE};

/// Immutable matrix of joint loss scenarios, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMatrix {
    columns: Vec<Vec<f64>>,
    seed: u64,
}

impl ScenarioMatrix {
    /// Seed 0 marks a matrix ingested from a file rather than generated.
    pub fn from_columns(columns: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("scenario matrix needs at least one column"));
        }
        let m = columns[0].len();
        if m == 0 {
            return Err(Error::invalid("scenario matrix needs at least one row"));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "column {} has {} rows, expected {m}",
                    j + 1,
                    col.len()
                )));
            }
            for (r, &x) in col.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry at row {}, column {} is {x}; losses must be finite and >= 0",
                        r + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ScenarioMatrix { columns, seed })
    }

    pub fn m(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Column `j` sorted ascending.
    pub fn sorted_column(&self, j: usize) -> Vec<f64> {
        let mut c = self.columns[j].clone();
        c.sort_unstable_by(f64::total_cmp);
        c
    }

    /// Pathwise row sums (the aggregate loss sample).
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.m()];
        for col in &self.columns {
            for (s, &x) in sums.iter_mut().zip(col) {
                *s += x;
            }
        }
        sums
    }

    /// Apply a per-column map, keeping the seed. Errors if any output is
    /// negative or non-finite.
    pub fn map_columns<F: Fn(usize, f64) -> f64>(&self, f: F) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, col)| col.iter().map(|&x| f(j, x)).collect())
            .collect();
        ScenarioMatrix::from_columns(columns, self.seed)
    }

    /// Competition (min) ranks of each entry within its column; ties share a
    /// rank, so strictly increasing per-column transforms leave the matrix
    /// unchanged — it is the empirical copula up to tie structure.
    pub fn rank_matrix(&self) -> Vec<Vec<usize>> {
        self.columns
            .iter()
            .map(|col| {
                let mut idx: Vec<usize> = (0..col.len()).collect();
                idx.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
                let mut ranks = vec![0usize; col.len()];
                let mut r = 0;
                for (pos, &i) in idx.iter().enumerate() {
                    if pos > 0 && col[i] > col[idx[pos - 1]] {
                        r = pos;
                    }
                    ranks[i] = r + 1;
                }
                ranks
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Copula-driven sampling
// ---------------------------------------------------------------------------

/// Generate `m` joint scenarios with the given marginals and copula.
/// Deterministic in `seed`; row-parallel.
pub fn sample_scenarios(
    marginals: &[Marginal],
    copula: &CopulaSpec,
    m: usize,
    seed: u64,
) -> Result<ScenarioMatrix> {
    let n = marginals.len();
    if n == 0 {
        return Err(Error::invalid("need at least one marginal"));
    }
    if m == 0 {
        return Err(Error::invalid("need at least one scenario"));
    }
    for mg in marginals {
        mg.validate()?;
    }
    if let Some(dim) = copula.dimension() {
        if dim != n {
            return Err(Error::DimensionMismatch(format!(
                "copula dimension {dim} vs {n} marginals"
            )));
        }
    }
    // Validate the Gaussian factor once, outside the row loop.
    let chol = match copula {
        CopulaSpec::Gaussian { correlation } => Some(correlation.cholesky()?),
        _ => None,
    };
    let rng = StreamRng::new(seed);

    let rows: Vec<Vec<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|row| {
            let us = row_uniforms(&rng, row, n, copula, chol.as_deref());
            us.iter()
                .zip(marginals)
                .map(|(&u, mg)| mg.inverse_cdf(u))
                .collect()
        })
        .collect();

    let mut columns = vec![Vec::with_capacity(m); n];
    for r in rows {
        for (j, x) in r.into_iter().enumerate() {
            columns[j].push(x);
        }
    }
    ScenarioMatrix::from_columns(columns, seed)
}

/// Copula uniforms for one row. Column lanes feed per-column draws; the row
/// lane feeds draws shared across the row (comonotone uniform, Clayton
/// frailty), so appending a column never perturbs existing ones.
fn row_uniforms(
    rng: &StreamRng,
    row: u64,
    n: usize,
    copula: &CopulaSpec,
    chol: Option<&[f64]>,
) -> Vec<f64> {
    match copula {
        CopulaSpec::Independent => (0..n)
            .map(|j| rng.substream(row, j as u64).uniform())
            .collect(),
        CopulaSpec::Comonotone => {
            let u = rng.substream(row, ROW_LANE).uniform();
            vec![u; n]
        }
        CopulaSpec::Gaussian { .. } => {
            let l = chol.expect("factor precomputed");
            let normal = Normal::standard();
            let z: Vec<f64> = (0..n)
                .map(|j| normal.inverse_cdf(rng.substream(row, j as u64).uniform()))
                .collect();
            (0..n)
                .map(|i| {
                    let mut x = 0.0;
                    for (k, zk) in z.iter().enumerate().take(i + 1) {
                        x += l[i * n + k] * zk;
                    }
                    normal.cdf(x)
                })
                .collect()
        }
        CopulaSpec::Clayton { theta } => {
            if *theta == 0.0 {
                return (0..n)
                    .map(|j| rng.substream(row, j as u64).uniform())
                    .collect();
            }
            // Marshall-Olkin: V ~ Gamma(1/theta, 1), U_j = (1 + E_j/V)^(-1/theta).
            let mut shared = rng.substream(row, ROW_LANE);
            let v = sample_gamma(&mut shared, 1.0 / theta);
            (0..n)
                .map(|j| {
                    let e = -rng.substream(row, j as u64).uniform().ln();
                    (1.0 + e / v).powf(-1.0 / theta)
                })
                .collect()
        }
    }
}

fn sample_gamma(stream: &mut Substream, shape: f64) -> f64 {
    let gamma = Gamma::new(shape, 1.0).expect("valid gamma shape");
    let mut v = gamma.sample(stream);
    // Guard the measure-zero corner that would blow up E/V.
    while v <= 0.0 {
        v = gamma.sample(stream);
    }
    v
}

// ---------------------------------------------------------------------------
// Bernoulli mixture model
// ---------------------------------------------------------------------------

/// Binary risks that are conditionally i.i.d. Bernoulli(Z) given a common
/// systemic factor Z with finite support in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliMixtureModel {
    pub n: usize,
    pub z_support: Vec<f64>,
    pub z_probs: Vec<f64>,
}

impl BernoulliMixtureModel {
    pub fn new(n: usize, z_support: Vec<f64>, z_probs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("need at least one insurer"));
        }
        if z_support.is_empty() || z_support.len() != z_probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support points vs {} probabilities",
                z_support.len(),
                z_probs.len()
            )));
        }
        if z_support.iter().any(|z| !(*z > 0.0 && *z < 1.0)) {
            return Err(Error::invalid(
                "systemic factor support must lie strictly inside (0,1)",
            ));
        }
        if z_probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::invalid("factor probabilities must be positive"));
        }
        let total: f64 = z_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "factor probabilities sum to {total}, expected 1"
            )));
        }
        Ok(BernoulliMixtureModel {
            n,
            z_support,
            z_probs,
        })
    }

    pub fn mean_z(&self) -> f64 {
        self.z_support
            .iter()
            .zip(&self.z_probs)
            .map(|(z, p)| z * p)
            .sum()
    }

    fn draw_z(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (z, p) in self.z_support.iter().zip(&self.z_probs) {
            acc += p;
            if u <= acc {
                return *z;
            }
        }
        *self.z_support.last().expect("non-empty support")
    }
}

/// Draw `m` rows of the mixture: one shared factor per row, then `n`
/// conditionally independent indicators.
pub fn sample_bernoulli_mixture(
    model: &BernoulliMixtureModel,
    m: usize,
    seed: u64,
) -> Result<ScenarioMatrix> {
    if m == 0 {
        return Err(Error::invalid("need at least one scenario"));
    }
    let rng = StreamRng::new(seed);
    let n = model.n;
    let rows: Vec<Vec<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|row| {
            let z = model.draw_z(rng.substream(row, ROW_LANE).uniform());
            (0..n)
                .map(|j| {
                    let u = rng.substream(row, j as u64).uniform();
                    if u > 1.0 - z {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let mut columns = vec![Vec::with_capacity(m); n];
    for r in rows {
        for (j, x) in r.into_iter().enumerate() {
            columns[j].push(x);
        }
    }
    ScenarioMatrix::from_columns(columns, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
        let m = xs.len();
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        for i in 0..m {
            for j in 0..i {
                let s = (xs[i] - xs[j]) * (ys[i] - ys[j]);
                if s > 0.0 {
                    concordant += 1;
                } else if s < 0.0 {
                    discordant += 1;
                }
            }
        }
        (concordant - discordant) as f64 / (m * (m - 1) / 2) as f64
    }

    #[test]
    fn point_mass_marginal_fills_matrix() {
        let mx = sample_scenarios(
            &[Marginal::PointMass { value: 5.0 }],
            &CopulaSpec::Comonotone,
            4,
            1,
        )
        .unwrap();
        assert_eq!(mx.column(0), &[5.0, 5.0, 5.0, 5.0]);
    }

    #[test]
    fn comonotone_forces_rank_agreement() {
        let marginals = vec![
            Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
            Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
        ];
        let mx = sample_scenarios(&marginals, &CopulaSpec::Comonotone, 2_000, 3).unwrap();
        let tau = kendall_tau(mx.column(0), mx.column(1));
        assert!(tau >= 0.99, "tau = {tau}");
        // Within-row ranks are identical across columns.
        let ranks = mx.rank_matrix();
        assert_eq!(ranks[0], ranks[1]);
    }

    #[test]
    fn independent_uniforms_have_product_orthant_mass() {
        let marginals = vec![
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
        ];
        let mx = sample_scenarios(&marginals, &CopulaSpec::Independent, 100_000, 7).unwrap();
        let hits = mx
            .column(0)
            .iter()
            .zip(mx.column(1))
            .filter(|(&a, &b)| a <= 0.5 && b <= 0.5)
            .count();
        let p = hits as f64 / mx.m() as f64;
        assert!((p - 0.25).abs() <= 0.01, "P = {p}");
    }

    #[test]
    fn gaussian_copula_correlates_and_negative_rho_anticorrelates() {
        let marginals = vec![
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
        ];
        let pos = CopulaSpec::Gaussian {
            correlation: CorrelationMatrix::equicorrelated(2, 0.8).unwrap(),
        };
        let mx = sample_scenarios(&marginals, &pos, 20_000, 11).unwrap();
        assert!(kendall_tau(&mx.column(0)[..2000], &mx.column(1)[..2000]) > 0.4);

        let neg = CopulaSpec::Gaussian {
            correlation: CorrelationMatrix::equicorrelated(2, -0.8).unwrap(),
        };
        let mn = sample_scenarios(&marginals, &neg, 20_000, 11).unwrap();
        assert!(kendall_tau(&mn.column(0)[..2000], &mn.column(1)[..2000]) < -0.4);
    }

    #[test]
    fn clayton_produces_positive_dependence() {
        let marginals = vec![
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
        ];
        let mx = sample_scenarios(&marginals, &CopulaSpec::clayton(2.0).unwrap(), 20_000, 5)
            .unwrap();
        // Kendall's tau of Clayton(theta) is theta/(theta+2) = 0.5.
        let tau = kendall_tau(&mx.column(0)[..2000], &mx.column(1)[..2000]);
        assert!((tau - 0.5).abs() < 0.08, "tau = {tau}");
    }

    #[test]
    fn invalid_correlation_is_rejected_with_diagnostic() {
        let marginals = vec![
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
            Marginal::Uniform { lo: 0.0, hi: 1.0 },
        ];
        let bad = CopulaSpec::Gaussian {
            correlation: CorrelationMatrix::equicorrelated(3, -0.9).unwrap(),
        };
        assert!(matches!(
            sample_scenarios(&marginals, &bad, 10, 1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn copula_dimension_mismatch_is_rejected() {
        let bad = CopulaSpec::Gaussian {
            correlation: CorrelationMatrix::equicorrelated(3, 0.2).unwrap(),
        };
        let marginals = vec![Marginal::Uniform { lo: 0.0, hi: 1.0 }; 2];
        assert!(sample_scenarios(&marginals, &bad, 10, 1).is_err());
    }

    #[test]
    fn adding_a_column_preserves_existing_columns() {
        let base = vec![Marginal::LogNormal { mu: 0.0, sigma: 1.0 }; 2];
        let wider = vec![Marginal::LogNormal { mu: 0.0, sigma: 1.0 }; 3];
        let a = sample_scenarios(&base, &CopulaSpec::Independent, 500, 9).unwrap();
        let b = sample_scenarios(&wider, &CopulaSpec::Independent, 500, 9).unwrap();
        assert_eq!(a.column(0), b.column(0));
        assert_eq!(a.column(1), b.column(1));
    }

    #[test]
    fn mixture_column_mean_matches_systemic_mean() {
        let model = BernoulliMixtureModel::new(1, vec![0.2, 0.6], vec![0.5, 0.5]).unwrap();
        let mx = sample_bernoulli_mixture(&model, 100_000, 13).unwrap();
        let mean: f64 = mx.column(0).iter().sum::<f64>() / mx.m() as f64;
        let ez = model.mean_z();
        let stderr = (ez * (1.0 - ez) / mx.m() as f64).sqrt();
        assert!((mean - ez).abs() <= 3.0 * stderr, "mean {mean} vs E[Z] {ez}");
    }

    #[test]
    fn degenerate_mixture_is_binomial() {
        let model = BernoulliMixtureModel::new(2, vec![0.3], vec![1.0]).unwrap();
        let mx = sample_bernoulli_mixture(&model, 200_000, 17).unwrap();
        let mut counts = [0usize; 3];
        for r in 0..mx.m() {
            let k = (mx.column(0)[r] + mx.column(1)[r]) as usize;
            counts[k] += 1;
        }
        let pmf = [0.49, 0.42, 0.09]; // Binomial(2, 0.3)
        for k in 0..3 {
            let p = counts[k] as f64 / mx.m() as f64;
            assert!((p - pmf[k]).abs() < 0.005, "k={k}: {p} vs {}", pmf[k]);
        }
    }

    #[test]
    fn mixture_all_ones_probability_matches_mixed_binomial() {
        // P(N = 3) = 0.5*(0.2^3 + 0.8^3) = 0.26 for Z in {0.2, 0.8}.
        let model = BernoulliMixtureModel::new(3, vec![0.2, 0.8], vec![0.5, 0.5]).unwrap();
        let mx = sample_bernoulli_mixture(&model, 100_000, 19).unwrap();
        let hits = (0..mx.m())
            .filter(|&r| (0..3).all(|j| mx.column(j)[r] == 1.0))
            .count();
        let p = hits as f64 / mx.m() as f64;
        assert!((p - 0.26).abs() < 0.006, "P(N=3) = {p}");
    }

    #[test]
    fn output_is_independent_of_parallelism_degree() {
        let marginals = vec![
            Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
            Marginal::Pareto { shape: 2.0, scale: 1.0 },
        ];
        let copula = CopulaSpec::clayton(1.0).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sample_scenarios(&marginals, &copula, 2_000, 77).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| sample_scenarios(&marginals, &copula, 2_000, 77).unwrap());
        assert_eq!(single, many);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn generation_is_seed_deterministic(seed in 0u64..1000) {
            let marginals = vec![
                Marginal::Pareto { shape: 2.5, scale: 1.0 },
                Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
            ];
            let a = sample_scenarios(&marginals, &CopulaSpec::clayton(1.5).unwrap(), 200, seed).unwrap();
            let b = sample_scenarios(&marginals, &CopulaSpec::clayton(1.5).unwrap(), 200, seed).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn strictly_increasing_maps_preserve_ranks(seed in 0u64..1000) {
            let marginals = vec![
                Marginal::Uniform { lo: 0.0, hi: 2.0 },
                Marginal::LogNormal { mu: 0.0, sigma: 0.7 },
            ];
            let mx = sample_scenarios(&marginals, &CopulaSpec::Independent, 300, seed).unwrap();
            let mapped = mx
                .map_columns(|j, x| if j == 0 { x * x * x + 2.0 * x } else { 2.0 * x + 1.0 })
                .unwrap();
            prop_assert_eq!(mx.rank_matrix(), mapped.rank_matrix());
        }
    }
}
