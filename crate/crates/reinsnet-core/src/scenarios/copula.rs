//! Copula families for joint scenario generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlation matrix for the Gaussian copula; stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::invalid(format!(
                "correlation matrix needs {dim}x{dim} = {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        let m = CorrelationMatrix { dim, data };
        for i in 0..dim {
            if (m.get(i, i) - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "diagonal entry ({i},{i}) = {} must be 1",
                    m.get(i, i)
                )));
            }
            for j in 0..i {
                let a = m.get(i, j);
                if (a - m.get(j, i)).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
                if a.abs() > 1.0 + 1e-12 {
                    return Err(Error::invalid(format!(
                        "correlation ({i},{j}) = {a} outside [-1,1]"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Equicorrelated matrix with off-diagonal `rho`.
    pub fn equicorrelated(dim: usize, rho: f64) -> Result<Self> {
        let mut data = vec![rho; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn min_off_diagonal(&self) -> f64 {
        let mut min = 1.0_f64;
        for i in 0..self.dim {
            for j in 0..i {
                min = min.min(self.get(i, j));
            }
        }
        min
    }

    /// Lower-triangular Cholesky factor. Fails fast on non-PD input — no
    /// repair is attempted so that generated scenarios stay reproducible.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0_f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 1e-12 {
                        return Err(Error::NotPositiveDefinite(format!(
                            "pivot {sum:.3e} at row {i}; use the comonotone copula for \
                             perfect dependence"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(l)
    }
}

/// Dependence structure of the joint scenario generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CopulaSpec {
    Independent,
    /// Upper Frechet bound: one shared uniform per row.
    Comonotone,
    Gaussian { correlation: CorrelationMatrix },
    /// Clayton with dependence parameter `theta >= 0` (`0` degenerates to
    /// independence).
    Clayton { theta: f64 },
}

impl CopulaSpec {
    pub fn gaussian(correlation: CorrelationMatrix) -> Self {
        CopulaSpec::Gaussian { correlation }
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::invalid(format!(
                "Clayton parameter must be >= 0, got {theta}"
            )));
        }
        Ok(CopulaSpec::Clayton { theta })
    }

    /// Dimension pinned by the spec, if any.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            CopulaSpec::Gaussian { correlation } => Some(correlation.dim()),
            _ => None,
        }
    }

    /// Whether the family is one of those documented as positively dependent
    /// through the stochastic ordering (via conditional increasingness):
    /// independence, comonotonicity, Gaussian with non-negative correlations,
    /// Clayton with theta >= 0.
    pub fn is_documented_pds(&self) -> bool {
        match self {
            CopulaSpec::Independent | CopulaSpec::Comonotone => true,
            CopulaSpec::Gaussian { correlation } => correlation.min_off_diagonal() >= 0.0,
            CopulaSpec::Clayton { theta } => *theta >= 0.0,
        }
    }

    pub fn is_independent(&self) -> bool {
        matches!(self, CopulaSpec::Independent)
            || matches!(self, CopulaSpec::Clayton { theta } if *theta == 0.0)
    }

    /// Parse CLI specs: `independent`, `comonotone`, `gaussian:<rho>`
    /// (equicorrelated), `clayton:<theta>`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        match spec {
            "independent" => Ok(CopulaSpec::Independent),
            "comonotone" => Ok(CopulaSpec::Comonotone),
            _ => {
                let (kind, param) = spec.split_once(':').ok_or_else(|| {
                    Error::invalid(format!(
                        "copula spec `{spec}`: expected independent|comonotone|gaussian:<rho>|clayton:<theta>"
                    ))
                })?;
                let value: f64 = param.parse().map_err(|e| {
                    Error::invalid(format!("copula spec `{spec}`: bad number `{param}`: {e}"))
                })?;
                match kind {
                    "gaussian" => Ok(CopulaSpec::Gaussian {
                        correlation: CorrelationMatrix::equicorrelated(dim, value)?,
                    }),
                    "clayton" => CopulaSpec::clayton(value),
                    other => Err(Error::invalid(format!(
                        "copula spec `{spec}`: unknown kind `{other}`"
                    ))),
                }
            }
        }
    }
}
