//! Exact finite-support joint laws with rational probability arithmetic.
//!
//! Probabilities are kept as exact rationals (every finite f64 converts
//! exactly), so stochastic-order and dependence checks on discrete laws run
//! with zero tolerance. A law with exactly normalized probabilities expands
//! into an equal-weight scenario matrix whose empirical law coincides with it.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive};

use crate::error::{Error, Result};

use super::ScenarioMatrix;

/// Exact rational value of a finite f64.
pub(crate) fn rat(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite value converts exactly")
}

fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("rational fits in f64 range")
}

/// Exact joint law: distinct atoms with positive rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointDistribution {
    atoms: Vec<Vec<f64>>,
    probs: Vec<BigRational>,
}

impl DiscreteJointDistribution {
    /// Build from f64 probabilities (converted exactly). The probabilities
    /// must sum to 1 within 1e-12.
    pub fn new(atoms: Vec<Vec<f64>>, probs: &[f64]) -> Result<Self> {
        let rationals = probs.iter().map(|&p| rat(p)).collect();
        Self::from_rationals(atoms, rationals)
    }

    /// Build from numerator/denominator pairs for tolerance-free work.
    pub fn from_fractions(atoms: Vec<Vec<f64>>, fractions: &[(i64, i64)]) -> Result<Self> {
        let rationals = fractions
            .iter()
            .map(|&(num, den)| {
                if den == 0 {
                    return Err(Error::invalid("probability with zero denominator"));
                }
                Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rationals(atoms, rationals)
    }

    pub fn from_rationals(atoms: Vec<Vec<f64>>, probs: Vec<BigRational>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} atoms vs {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        let n = atoms[0].len();
        if n == 0 {
            return Err(Error::invalid("atoms must have at least one coordinate"));
        }
        let mut seen = BTreeSet::new();
        for atom in &atoms {
            if atom.len() != n {
                return Err(Error::DimensionMismatch(
                    "atoms must share one dimension".into(),
                ));
            }
            if atom.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::invalid("atom coordinates must be finite and >= 0"));
            }
            let key: Vec<u64> = atom.iter().map(|x| x.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::invalid(format!("duplicate atom {atom:?}")));
            }
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(Error::invalid("every atom probability must be > 0"));
        }
        let total: BigRational = probs.iter().sum();
        let gap = (&total - BigRational::one()).abs();
        if gap > BigRational::new(BigInt::one(), BigInt::from(1_000_000_000_000_i64)) {
            return Err(Error::invalid(format!(
                "probabilities sum to {}, expected 1 within 1e-12",
                rat_to_f64(&total)
            )));
        }
        Ok(DiscreteJointDistribution { atoms, probs })
    }

    pub fn n(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob_f64(&self, i: usize) -> f64 {
        rat_to_f64(&self.probs[i])
    }

    /// Marginal law of coordinate `j`.
    pub fn marginal(&self, j: usize) -> DiscreteMarginal {
        DiscreteMarginal::from_pairs(
            self.atoms
                .iter()
                .zip(&self.probs)
                .map(|(a, p)| (a[j], p.clone())),
        )
    }

    /// Law of the coordinate sum.
    pub fn sum_law(&self) -> DiscreteMarginal {
        DiscreteMarginal::from_pairs(
            self.atoms
                .iter()
                .zip(&self.probs)
                .map(|(a, p)| (a.iter().sum(), p.clone())),
        )
    }

    /// Pushforward under an increasing map applied to coordinate `j`; atoms
    /// that collide are merged.
    pub fn map_coordinate(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut merged: Vec<(Vec<f64>, BigRational)> = Vec::new();
        for (atom, p) in self.atoms.iter().zip(&self.probs) {
            let mut image = atom.clone();
            image[j] = f(atom[j]);
            match merged.iter_mut().find(|(a, _)| a == &image) {
                Some((_, q)) => *q += p,
                None => merged.push((image, p.clone())),
            }
        }
        let (atoms, probs) = merged.into_iter().unzip();
        Self::from_rationals(atoms, probs)
    }

    /// Expand into an equal-weight scenario matrix reproducing the law
    /// exactly. Requires exactly normalized probabilities and a common
    /// denominator of at most `max_rows`.
    pub fn expand_to_scenarios(&self, max_rows: usize) -> Result<ScenarioMatrix> {
        let total: BigRational = self.probs.iter().sum();
        if !total.is_one() {
            return Err(Error::invalid(
                "exact expansion requires probabilities summing to exactly 1",
            ));
        }
        let mut lcm = BigInt::one();
        for p in &self.probs {
            lcm = lcm.lcm(p.denom());
        }
        let rows = lcm
            .to_usize()
            .filter(|&r| r <= max_rows)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "exact expansion needs {lcm} rows, cap is {max_rows}"
                ))
            })?;
        let n = self.n();
        let mut columns = vec![Vec::with_capacity(rows); n];
        for (atom, p) in self.atoms.iter().zip(&self.probs) {
            let weight = (p * BigRational::from_integer(lcm.clone()))
                .to_integer()
                .to_usize()
                .expect("weight fits");
            for _ in 0..weight {
                for (j, &x) in atom.iter().enumerate() {
                    columns[j].push(x);
                }
            }
        }
        ScenarioMatrix::from_columns(columns, 0)
    }
}

/// Exact one-dimensional law: strictly increasing support values with
/// positive rational probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarginal {
    values: Vec<f64>,
    probs: Vec<BigRational>,
}

impl DiscreteMarginal {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, BigRational)>) -> Self {
        let mut items: Vec<(f64, BigRational)> = pairs.into_iter().collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::new();
        let mut probs: Vec<BigRational> = Vec::new();
        for (v, p) in items {
            if values.last() == Some(&v) {
                let last = probs.last_mut().expect("parallel arrays");
                *last += p;
            } else {
                values.push(v);
                probs.push(p);
            }
        }
        DiscreteMarginal { values, probs }
    }

    pub fn from_f64(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} values vs {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::invalid("probabilities must be positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(Self::from_pairs(
            values.iter().zip(probs).map(|(&v, &p)| (v, rat(p))),
        ))
    }

    pub fn point_mass(value: f64) -> Self {
        DiscreteMarginal {
            values: vec![value],
            probs: vec![BigRational::one()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn total_mass(&self) -> BigRational {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> BigRational {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(&v, p)| rat(v) * p)
            .sum()
    }

    /// `P(X > t)`, exact.
    pub fn survival(&self, t: f64) -> BigRational {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(&v, _)| v > t)
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// `P(X <= t)`, exact.
    pub fn cdf(&self, t: f64) -> BigRational {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(&v, _)| v <= t)
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// Stop-loss transform `E[(X - t)_+]`, exact.
    pub fn stop_loss(&self, t: f64) -> BigRational {
        let t_rat = rat(t);
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(&v, _)| v > t)
            .map(|(&v, p)| (rat(v) - &t_rat) * p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelfths_stay_exact() {
        let law = DiscreteJointDistribution::from_fractions(
            vec![vec![0.0, 0.0], vec![0.0, 3.0], vec![1.0, 4.0]],
            &[(3, 12), (4, 12), (5, 12)],
        )
        .unwrap();
        let total: BigRational = law.probs().iter().sum();
        assert!(total.is_one());
        let m = law.marginal(0);
        assert_eq!(m.values(), &[0.0, 1.0]);
        assert_eq!(
            m.probs()[0],
            BigRational::new(BigInt::from(7), BigInt::from(12))
        );
    }

    #[test]
    fn rejects_duplicates_and_bad_probs() {
        assert!(DiscreteJointDistribution::new(
            vec![vec![1.0], vec![1.0]],
            &[0.5, 0.5]
        )
        .is_err());
        assert!(DiscreteJointDistribution::new(vec![vec![1.0]], &[0.98]).is_err());
        assert!(
            DiscreteJointDistribution::new(vec![vec![1.0], vec![2.0]], &[1.2, -0.2]).is_err()
        );
    }

    #[test]
    fn marginal_stop_loss_is_exact() {
        let law = DiscreteMarginal::from_f64(&[0.0, 2.0, 4.0], &[0.25, 0.25, 0.5]).unwrap();
        // E[(X-1)_+] = 0.25*1 + 0.5*3 = 1.75 exactly (dyadic arithmetic).
        assert_eq!(law.stop_loss(1.0), rat(1.75));
        assert_eq!(law.survival(2.0), rat(0.5));
        assert_eq!(law.cdf(2.0), rat(0.5));
        assert_eq!(law.mean(), rat(2.5));
    }

    #[test]
    fn expansion_reproduces_the_law() {
        let law = DiscreteJointDistribution::from_fractions(
            vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![2.0, 5.0]],
            &[(1, 6), (2, 6), (3, 6)],
        )
        .unwrap();
        let mx = law.expand_to_scenarios(100).unwrap();
        assert_eq!(mx.m(), 6);
        assert_eq!(mx.n(), 2);
        let count = (0..6)
            .filter(|&r| mx.column(0)[r] == 2.0 && mx.column(1)[r] == 5.0)
            .count();
        assert_eq!(count, 3);
    }

    #[test]
    fn expansion_respects_row_cap() {
        let law =
            DiscreteJointDistribution::from_fractions(vec![vec![0.0], vec![1.0]], &[(1, 1000), (999, 1000)])
                .unwrap();
        assert!(law.expand_to_scenarios(100).is_err());
        assert!(law.expand_to_scenarios(1000).is_ok());
    }

    #[test]
    fn map_coordinate_merges_collisions() {
        let law = DiscreteJointDistribution::from_fractions(
            vec![vec![0.0, 1.0], vec![0.0, 3.0], vec![1.0, 4.0]],
            &[(1, 3), (1, 3), (1, 3)],
        )
        .unwrap();
        // 1 and 3 collapse to 2.
        let mapped = law
            .map_coordinate(1, |y| if y == 4.0 { 4.0 } else if y > 0.0 { 2.0 } else { 0.0 })
            .unwrap();
        assert_eq!(mapped.len(), 2);
        let m = mapped.marginal(1);
        assert_eq!(m.values(), &[2.0, 4.0]);
        assert_eq!(m.probs()[0], BigRational::new(BigInt::from(2), BigInt::from(3)));
    }
}
