//! Risk measures and premium principles evaluated exactly on empirical laws.
//!
//! Quantiles use the left-continuous generalized inverse
//! `F^{-1}(p) = inf{x : F(x) >= p}`, which on a sorted sample of size `m` is
//! the order statistic `x_(ceil(p*m))`. No interpolation is applied, so
//! equivariance under increasing transforms holds exactly. RVaR is the exact
//! integral of the empirical step quantile function, and the Wang premium is
//! the exact integral of the distorted empirical survival function.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RVaR parameter pair `(alpha, beta)`; `beta = 0` is VaR, `alpha = 0` is ES.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskMeasureSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl RiskMeasureSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let sum = alpha + beta;
        if !(sum <= 1.0) {
            return Err(Error::invalid(format!(
                "alpha + beta <= 1 is required, got alpha={alpha}, beta={beta}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::invalid(format!(
                "levels must lie in [0,1], got alpha={alpha}, beta={beta}"
            )));
        }
        if sum <= 0.0 {
            return Err(Error::invalid(
                "alpha + beta > 0 is required (otherwise the capital requirement is infinite)",
            ));
        }
        Ok(RiskMeasureSpec { alpha, beta })
    }

    pub fn var(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn expected_shortfall(beta: f64) -> Result<Self> {
        Self::new(0.0, beta)
    }

    pub fn is_var(&self) -> bool {
        self.beta == 0.0
    }
}

/// Snap `p * m` to the nearest integer when within `1e-9` before taking the
/// ceiling. Guards order-statistic selection against products like `0.7 * 10`
/// landing an ulp off an integer.
fn order_index(p: f64, m: usize) -> usize {
    let t = p * m as f64;
    let r = t.round();
    let k = if (t - r).abs() < 1e-9 { r } else { t.ceil() };
    (k as usize).clamp(1, m)
}

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    debug_assert!(
        sample.windows(2).all(|w| w[0] <= w[1]),
        "sample must be sorted ascending"
    );
    Ok(())
}

/// Empirical quantile of a sorted sample: order statistic `x_(ceil(p*m))` for
/// `p > 0`; the sample minimum for `p = 0` (essential infimum of a
/// non-negative loss rather than `-inf`).
pub fn quantile(sorted: &[f64], p: f64) -> Result<f64> {
    check_sorted(sorted)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("quantile level {p} outside [0,1]")));
    }
    if p == 0.0 {
        return Ok(sorted[0]);
    }
    Ok(sorted[order_index(p, sorted.len()) - 1])
}

/// Value-at-Risk at level `alpha`: the `(1 - alpha)`-quantile.
pub fn var(sorted: &[f64], alpha: f64) -> Result<f64> {
    quantile(sorted, 1.0 - alpha)
}

/// Exact integral of `s -> transform(VaR_s(X))` over `s in (alpha, alpha+beta]`
/// divided by `beta`, for an increasing `transform`. The empirical quantile is
/// a step function taking value `x_(k)` on `((k-1)/m, k/m]` (in `p = 1 - s`),
/// so the integral is a weighted sum of transformed order statistics.
pub fn rvar_transformed<F: Fn(f64) -> f64>(
    sorted: &[f64],
    spec: &RiskMeasureSpec,
    transform: F,
) -> Result<f64> {
    check_sorted(sorted)?;
    if spec.beta == 0.0 {
        return Ok(transform(var(sorted, spec.alpha)?));
    }
    let m = sorted.len();
    let lo = 1.0 - spec.alpha - spec.beta;
    let hi = 1.0 - spec.alpha;
    // Only order statistics with (k-1)/m < hi and k/m > lo carry weight.
    let k_first = order_index(lo.max(0.0), m).max(1);
    let k_last = order_index(hi, m);
    let mf = m as f64;
    let mut total = 0.0;
    for k in k_first..=k_last {
        let seg_lo = ((k - 1) as f64 / mf).max(lo);
        let seg_hi = (k as f64 / mf).min(hi);
        let w = seg_hi - seg_lo;
        if w > 0.0 {
            total += transform(sorted[k - 1]) * w;
        }
    }
    Ok(total / spec.beta)
}

/// Range-Value-at-Risk: `(1/beta) * integral_alpha^{alpha+beta} VaR_s ds`,
/// exact on the empirical law; equals `var` when `beta = 0`.
pub fn rvar(sorted: &[f64], spec: &RiskMeasureSpec) -> Result<f64> {
    rvar_transformed(sorted, spec, |x| x)
}

/// Expected Shortfall at level `beta > 0`, computed as the exact tail average
/// with a fractional top segment.
pub fn expected_shortfall(sorted: &[f64], beta: f64) -> Result<f64> {
    check_sorted(sorted)?;
    if !(0.0 < beta && beta <= 1.0) {
        return Err(Error::invalid(format!("ES level must be in (0,1], got {beta}")));
    }
    let m = sorted.len();
    let mf = m as f64;
    let t = beta * mf;
    let full = t.floor() as usize;
    let full = full.min(m);
    let mut acc = 0.0;
    for k in (m - full)..m {
        acc += sorted[k];
    }
    let frac = t - full as f64;
    if frac > 0.0 && full < m {
        acc += frac * sorted[m - full - 1];
    }
    Ok(acc / t)
}

// ---------------------------------------------------------------------------
// Distortion functions
// ---------------------------------------------------------------------------

type DistortionEval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Monotone map `[0,1] -> [0,1]` with `g(0) = 0`, `g(1) = 1`. Concavity is
/// declared by the caller and spot-verified on a grid on demand.
#[derive(Clone)]
pub struct DistortionFunction {
    name: String,
    eval: DistortionEval,
    concave_declared: bool,
}

impl fmt::Debug for DistortionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistortionFunction")
            .field("name", &self.name)
            .field("concave_declared", &self.concave_declared)
            .finish()
    }
}

const DISTORTION_GRID_STEP: f64 = 1e-3;

impl DistortionFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        concave_declared: bool,
    ) -> Result<Self> {
        let g = DistortionFunction {
            name: name.into(),
            eval: Arc::new(eval),
            concave_declared,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn identity() -> Self {
        Self::new("identity", |u| u, true).expect("identity distortion is valid")
    }

    pub fn sqrt() -> Self {
        Self::new("sqrt", f64::sqrt, true).expect("sqrt distortion is valid")
    }

    /// `g(u) = u^c`; concave for `c <= 1`.
    pub fn power(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("power exponent must be > 0, got {c}")));
        }
        Self::new(format!("pow{c}"), move |u| u.powf(c), c <= 1.0)
    }

    /// `g(u) = min(k*u, 1)`; concave for `k >= 1`.
    pub fn capped_linear(k: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::invalid(format!(
                "capped-linear slope must be >= 1, got {k}"
            )));
        }
        Self::new(format!("cap{k}"), move |u| (k * u).min(1.0), true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn concave_declared(&self) -> bool {
        self.concave_declared
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    /// Endpoint and monotonicity check on a 1e-3 grid.
    pub fn validate(&self) -> Result<()> {
        let g0 = self.eval(0.0);
        let g1 = self.eval(1.0);
        if g0.abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "distortion {}: g(0) = {g0}, expected 0",
                self.name
            )));
        }
        if (g1 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "distortion {}: g(1) = {g1}, expected 1",
                self.name
            )));
        }
        let mut prev = g0;
        let mut u = DISTORTION_GRID_STEP;
        while u < 1.0 + DISTORTION_GRID_STEP / 2.0 {
            let v = self.eval(u.min(1.0));
            if v < prev - 1e-12 {
                return Err(Error::invalid(format!(
                    "distortion {}: not increasing near u = {u}",
                    self.name
                )));
            }
            prev = v;
            u += DISTORTION_GRID_STEP;
        }
        Ok(())
    }

    /// Parse distortion names used in CLI principle specs: `identity` (or
    /// `id`), `sqrt`, `pow<c>` (e.g. `pow0.7`).
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "identity" | "id" => Ok(Self::identity()),
            "sqrt" => Ok(Self::sqrt()),
            _ => {
                if let Some(c) = name.strip_prefix("pow") {
                    let c: f64 = c.parse().map_err(|e| {
                        Error::invalid(format!("distortion `{name}`: bad exponent: {e}"))
                    })?;
                    Self::power(c)
                } else {
                    Err(Error::invalid(format!(
                        "unknown distortion `{name}` (expected identity|sqrt|pow<c>)"
                    )))
                }
            }
        }
    }

    /// Midpoint-concavity check on the same grid; errors when the declaration
    /// is missing or the spot check fails.
    pub fn require_concave(&self) -> Result<()> {
        if !self.concave_declared {
            return Err(Error::invalid(format!(
                "distortion {} is not declared concave",
                self.name
            )));
        }
        let mut u = 0.0;
        while u + 2.0 * DISTORTION_GRID_STEP <= 1.0 + 1e-12 {
            let a = self.eval(u);
            let b = self.eval((u + DISTORTION_GRID_STEP).min(1.0));
            let c = self.eval((u + 2.0 * DISTORTION_GRID_STEP).min(1.0));
            if b < (a + c) / 2.0 - 1e-10 {
                return Err(Error::invalid(format!(
                    "distortion {} fails midpoint concavity near u = {u}",
                    self.name
                )));
            }
            u += DISTORTION_GRID_STEP;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Premium principles
// ---------------------------------------------------------------------------

/// Reinsurer premium principle.
#[derive(Debug, Clone)]
pub enum PremiumPrinciple {
    /// `(1 + theta) * E[X]`.
    ExpectedValue { theta: f64 },
    /// `(1 + theta) * integral_0^inf g(S_X(x)) dx`.
    Wang {
        distortion: DistortionFunction,
        theta: f64,
    },
    /// `(1/gamma) * log E[exp(gamma X)]`.
    Exponential { gamma: f64 },
}

impl PremiumPrinciple {
    pub fn expected_value(theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::invalid(format!("loading theta must be >= 0, got {theta}")));
        }
        Ok(PremiumPrinciple::ExpectedValue { theta })
    }

    pub fn wang(distortion: DistortionFunction, theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::invalid(format!("loading theta must be >= 0, got {theta}")));
        }
        distortion.validate()?;
        Ok(PremiumPrinciple::Wang { distortion, theta })
    }

    pub fn exponential(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(format!(
                "risk sensitivity gamma must be > 0, got {gamma}"
            )));
        }
        Ok(PremiumPrinciple::Exponential { gamma })
    }

    pub fn describe(&self) -> String {
        match self {
            PremiumPrinciple::ExpectedValue { theta } => format!("ev:{theta}"),
            PremiumPrinciple::Wang { distortion, theta } => {
                format!("wang:{}:{theta}", distortion.name())
            }
            PremiumPrinciple::Exponential { gamma } => format!("exp:{gamma}"),
        }
    }

    /// Parse principle specs: `ev:<theta>`, `wang:<distortion>:<theta>`,
    /// `exp:<gamma>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::invalid(format!("premium spec `{spec}`: {msg}"));
        let mut parts = spec.split(':');
        match parts.next() {
            Some("ev") => {
                let theta: f64 = parts
                    .next()
                    .ok_or_else(|| bad("missing theta".into()))?
                    .parse()
                    .map_err(|e| bad(format!("bad theta: {e}")))?;
                Self::expected_value(theta)
            }
            Some("wang") => {
                let g = parts
                    .next()
                    .ok_or_else(|| bad("missing distortion name".into()))?;
                let theta: f64 = parts
                    .next()
                    .ok_or_else(|| bad("missing theta".into()))?
                    .parse()
                    .map_err(|e| bad(format!("bad theta: {e}")))?;
                Self::wang(DistortionFunction::parse(g)?, theta)
            }
            Some("exp") => {
                let gamma: f64 = parts
                    .next()
                    .ok_or_else(|| bad("missing gamma".into()))?
                    .parse()
                    .map_err(|e| bad(format!("bad gamma: {e}")))?;
                Self::exponential(gamma)
            }
            _ => Err(bad("expected ev:<theta>|wang:<g>:<theta>|exp:<gamma>".into())),
        }
    }

    /// Consistency with the usual stochastic order (assumption on the premium
    /// in the VaR-insurer case). All three families are monotone.
    pub fn is_st_consistent(&self) -> bool {
        true
    }

    /// Consistency with the increasing convex order (assumption in the RVaR
    /// case). Expected value and concave-distortion Wang principles qualify
    /// unconditionally; the exponential principle is accepted only for
    /// independent risks.
    pub fn is_icx_consistent(&self, independent_risks: bool) -> bool {
        match self {
            PremiumPrinciple::ExpectedValue { .. } => true,
            PremiumPrinciple::Wang { distortion, .. } => distortion.require_concave().is_ok(),
            PremiumPrinciple::Exponential { .. } => independent_risks,
        }
    }
}

/// Price a non-negative sample; sorts internally where the principle needs
/// order statistics.
pub fn premium(principle: &PremiumPrinciple, sample: &[f64]) -> Result<f64> {
    match principle {
        PremiumPrinciple::Wang { .. } => {
            let mut sorted = sample.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            premium_sorted(principle, &sorted)
        }
        _ => premium_sorted(principle, sample),
    }
}

/// Price a sample already sorted ascending (only the Wang principle actually
/// requires sortedness).
pub fn premium_sorted(principle: &PremiumPrinciple, sorted: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    match principle {
        PremiumPrinciple::ExpectedValue { theta } => {
            Ok((1.0 + theta) * sorted.iter().sum::<f64>() / sorted.len() as f64)
        }
        PremiumPrinciple::Wang { distortion, theta } => {
            // Exact integral of g over the empirical survival step function:
            // below x_(1) the survival is 1, between x_(j) and x_(j+1) it is
            // (m - j)/m.
            let m = sorted.len();
            let mf = m as f64;
            let mut total = 0.0;
            let mut prev = 0.0;
            for (j, &x) in sorted.iter().enumerate() {
                let width = x - prev;
                if width > 0.0 {
                    total += distortion.eval((m - j) as f64 / mf) * width;
                }
                prev = x;
            }
            Ok((1.0 + theta) * total)
        }
        PremiumPrinciple::Exponential { gamma } => {
            let max = sorted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if gamma * max > 700.0 {
                log::warn!(
                    "exponential premium: gamma * max(sample) = {} > 700; \
                     exp() saturates and the shifted log-mean-exp dominates",
                    gamma * max
                );
            }
            let mean_exp = sorted
                .iter()
                .map(|&x| (gamma * (x - max)).exp())
                .sum::<f64>()
                / sorted.len() as f64;
            let value = max + mean_exp.ln() / gamma;
            if !value.is_finite() {
                return Err(Error::Numerical(format!(
                    "exponential premium is not finite (gamma = {gamma}, max = {max})"
                )));
            }
            Ok(value)
        }
    }
}

/// Default premium allocation rule: `psi(W, Y) = E[W] * pi(Y) / E[Y]`, linear
/// in `W` with `psi(Y, Y) = pi(Y)`; `0/0` maps to `0`.
pub fn premium_allocation(
    principle: &PremiumPrinciple,
    ceded_i: &[f64],
    total_ceded: &[f64],
) -> Result<f64> {
    if ceded_i.len() != total_ceded.len() {
        return Err(Error::DimensionMismatch(format!(
            "ceded sample has {} scenarios, total has {}",
            ceded_i.len(),
            total_ceded.len()
        )));
    }
    if total_ceded.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    let m = total_ceded.len() as f64;
    let mean_w = ceded_i.iter().sum::<f64>() / m;
    let mean_y = total_ceded.iter().sum::<f64>() / m;
    if mean_y == 0.0 {
        // 0 <= W <= Y pathwise, so E[Y] = 0 forces E[W] = 0.
        assert!(
            mean_w.abs() <= 1e-12,
            "allocation rule: E[Y] = 0 but E[W] = {mean_w}"
        );
        return Ok(0.0);
    }
    Ok(mean_w / mean_y * premium(principle, total_ceded)?)
}
