//! Marginal loss distributions described by their inverse CDFs.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::measures;

/// Inverse-CDF descriptor for one non-negative loss marginal. The set covers
/// degenerate, binary, light- and heavy-tailed cases plus empirical tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    PointMass { value: f64 },
    Bernoulli { p: f64 },
    Uniform { lo: f64, hi: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Pareto { shape: f64, scale: f64 },
    Empirical { values: Vec<f64> },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        match self {
            Marginal::PointMass { value } => {
                if !(*value >= 0.0) || !value.is_finite() {
                    return Err(Error::invalid(format!(
                        "point mass must be finite and >= 0, got {value}"
                    )));
                }
            }
            Marginal::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(format!("Bernoulli p must be in [0,1], got {p}")));
                }
            }
            Marginal::Uniform { lo, hi } => {
                if !(*lo >= 0.0 && hi > lo) || !hi.is_finite() {
                    return Err(Error::invalid(format!(
                        "uniform requires 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Marginal::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid(format!(
                        "lognormal requires finite mu and sigma > 0, got ({mu}, {sigma})"
                    )));
                }
            }
            Marginal::Pareto { shape, scale } => {
                // shape > 1 keeps the mean finite, as the model requires.
                if !(*shape > 1.0) || !(*scale > 0.0) {
                    return Err(Error::invalid(format!(
                        "Pareto requires shape > 1 (finite mean) and scale > 0, got ({shape}, {scale})"
                    )));
                }
            }
            Marginal::Empirical { values } => {
                if values.is_empty() {
                    return Err(Error::invalid("empirical marginal needs at least one value"));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::invalid(
                        "empirical marginal values must be finite and >= 0",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Left-continuous generalized inverse `F^{-1}(u)` for `u` strictly
    /// inside `(0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match self {
            Marginal::PointMass { value } => *value,
            Marginal::Bernoulli { p } => {
                if u > 1.0 - p {
                    1.0
                } else {
                    0.0
                }
            }
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * u,
            Marginal::LogNormal { mu, sigma } => {
                let z = Normal::standard().inverse_cdf(u);
                (mu + sigma * z).exp()
            }
            Marginal::Pareto { shape, scale } => scale * (1.0 - u).powf(-1.0 / shape),
            Marginal::Empirical { values } => {
                let mut sorted = values.clone();
                sorted.sort_unstable_by(f64::total_cmp);
                measures::quantile(&sorted, u).expect("validated non-empty table")
            }
        }
    }

    /// Parse CLI specs: `point:5`, `bernoulli:0.3`, `uniform:0,1`,
    /// `lognormal:0,0.5`, `pareto:2.5,1`, `empirical:1,2,3`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::invalid(format!("marginal spec `{spec}`: {msg}"));
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected `<kind>:<params>`".into()))?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<_>>()?;
        let arity = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(bad(format!("expected {n} parameter(s), got {}", nums.len())))
            }
        };
        let m = match kind {
            "point" => {
                arity(1)?;
                Marginal::PointMass { value: nums[0] }
            }
            "bernoulli" => {
                arity(1)?;
                Marginal::Bernoulli { p: nums[0] }
            }
            "uniform" => {
                arity(2)?;
                Marginal::Uniform {
                    lo: nums[0],
                    hi: nums[1],
                }
            }
            "lognormal" => {
                arity(2)?;
                Marginal::LogNormal {
                    mu: nums[0],
                    sigma: nums[1],
                }
            }
            "pareto" => {
                arity(2)?;
                Marginal::Pareto {
                    shape: nums[0],
                    scale: nums[1],
                }
            }
            "empirical" => Marginal::Empirical { values: nums },
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_inverse_cdf_convention() {
        let m = Marginal::Bernoulli { p: 0.3 };
        assert_eq!(m.inverse_cdf(0.7), 0.0); // F(0) = 0.7 covers u = 0.7
        assert_eq!(m.inverse_cdf(0.70001), 1.0);
    }

    #[test]
    fn pareto_starts_at_scale() {
        let m = Marginal::Pareto {
            shape: 2.0,
            scale: 3.0,
        };
        assert!(m.inverse_cdf(1e-12) >= 3.0);
        assert!(m.inverse_cdf(0.99) > 3.0);
    }

    #[test]
    fn parse_round_trips_each_kind() {
        for spec in [
            "point:5",
            "bernoulli:0.3",
            "uniform:0,1",
            "lognormal:0,0.5",
            "pareto:2.5,1",
            "empirical:1,2,3",
        ] {
            let m = Marginal::parse(spec).unwrap();
            m.validate().unwrap();
        }
    }

    #[test]
    fn parse_rejects_bad_specs() {
        assert!(Marginal::parse("point:").is_err());
        assert!(Marginal::parse("normal:0,1").is_err());
        assert!(Marginal::parse("pareto:0.5,1").is_err()); // infinite mean
        assert!(Marginal::parse("uniform:1,0").is_err());
        assert!(Marginal::parse("bernoulli:1.5").is_err());
    }
}
