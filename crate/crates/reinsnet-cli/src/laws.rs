//! JSON input format for order and dependence checks.
//!
//! Probabilities are numbers or exact fraction strings like "3/12"; fractions
//! keep rational checks tolerance-free.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::Deserialize;

use reinsnet_core::error::{Error, Result};
use reinsnet_core::scenarios::{DiscreteJointDistribution, DiscreteMarginal};

#[derive(Deserialize)]
#[serde(untagged)]
enum Prob {
    Number(f64),
    Fraction(String),
}

impl Prob {
    fn to_rational(&self) -> Result<BigRational> {
        match self {
            Prob::Number(x) => BigRational::from_f64(*x)
                .ok_or_else(|| Error::invalid(format!("probability {x} is not finite"))),
            Prob::Fraction(s) => {
                let (num, den) = s
                    .split_once('/')
                    .ok_or_else(|| Error::invalid(format!("fraction `{s}`: expected a/b")))?;
                let num: i64 = num
                    .trim()
                    .parse()
                    .map_err(|e| Error::invalid(format!("fraction `{s}`: {e}")))?;
                let den: i64 = den
                    .trim()
                    .parse()
                    .map_err(|e| Error::invalid(format!("fraction `{s}`: {e}")))?;
                if den == 0 {
                    return Err(Error::invalid(format!("fraction `{s}`: zero denominator")));
                }
                Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
        }
    }
}

#[derive(Deserialize)]
struct MarginalLaw {
    values: Vec<f64>,
    probs: Vec<Prob>,
}

impl MarginalLaw {
    fn build(&self) -> Result<DiscreteMarginal> {
        if self.values.len() != self.probs.len() {
            return Err(Error::invalid(format!(
                "{} values vs {} probabilities",
                self.values.len(),
                self.probs.len()
            )));
        }
        let rationals: Vec<BigRational> = self
            .probs
            .iter()
            .map(|p| p.to_rational())
            .collect::<Result<_>>()?;
        Ok(DiscreteMarginal::from_pairs(
            self.values.iter().copied().zip(rationals),
        ))
    }
}

#[derive(Deserialize)]
struct JointLaw {
    atoms: Vec<Vec<f64>>,
    probs: Vec<Prob>,
}

/// Input file: `x`/`y` marginal laws for st/icx/cut, `joint` for pod/pds.
#[derive(Deserialize)]
pub struct LawsFile {
    x: Option<MarginalLaw>,
    y: Option<MarginalLaw>,
    joint: Option<JointLaw>,
}

impl LawsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    pub fn pair(&self) -> Result<(DiscreteMarginal, DiscreteMarginal)> {
        match (&self.x, &self.y) {
            (Some(x), Some(y)) => Ok((x.build()?, y.build()?)),
            _ => Err(Error::invalid(
                "this check needs both `x` and `y` marginal laws",
            )),
        }
    }

    pub fn joint(&self) -> Result<DiscreteJointDistribution> {
        let joint = self
            .joint
            .as_ref()
            .ok_or_else(|| Error::invalid("this check needs a `joint` law"))?;
        let rationals: Vec<BigRational> = joint
            .probs
            .iter()
            .map(|p| p.to_rational())
            .collect::<Result<_>>()?;
        DiscreteJointDistribution::from_rationals(joint.atoms.clone(), rationals)
    }
}
