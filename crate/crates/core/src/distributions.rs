//! Parametric score families: density, CDF, quantile, maximum likelihood
//! and Fisher information.
//!
//! Two families ship, `Normal(μ, σ)` and `Beta(α, β)`. Both are continuous with
//! a strictly increasing CDF on their support and a positive-definite
//! information matrix, which is what the IDCA likelihood theory needs from a
//! score law.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};
use statrs::function::gamma::digamma;

use crate::error::{FrocError, Result};
use crate::special::{
    kolmogorov_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf, trigamma,
};

/// Gradient-norm tolerance for the beta Newton iterations (per observation).
pub const BETA_FIT_TOLERANCE: f64 = 1e-9;
pub const BETA_FIT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    Beta,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Beta => "beta",
        }
    }

    pub fn param_names(self) -> [&'static str; 2] {
        match self {
            Family::Normal => ["mu", "sigma"],
            Family::Beta => ["alpha", "beta"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = FrocError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Family::Normal),
            "beta" => Ok(Family::Beta),
            other => Err(FrocError::InvalidArgument(format!(
                "unknown distribution family '{other}' (expected normal or beta)"
            ))),
        }
    }
}

/// A score law with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub enum ScoreDistribution {
    Normal { mean: f64, sd: f64 },
    Beta { alpha: f64, beta: f64 },
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    family: Family,
    params: Vec<f64>,
}

impl From<ScoreDistribution> for DistributionRepr {
    fn from(d: ScoreDistribution) -> Self {
        DistributionRepr {
            family: d.family(),
            params: d.params().to_vec(),
        }
    }
}

impl TryFrom<DistributionRepr> for ScoreDistribution {
    type Error = FrocError;

    fn try_from(r: DistributionRepr) -> Result<Self> {
        ScoreDistribution::from_params(r.family, &r.params)
    }
}

impl ScoreDistribution {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
            return Err(FrocError::InvalidArgument(format!(
                "normal requires finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        Ok(ScoreDistribution::Normal { mean, sd })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta <= 0.0 {
            return Err(FrocError::InvalidArgument(format!(
                "beta requires finite alpha > 0 and beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(ScoreDistribution::Beta { alpha, beta })
    }

    pub fn from_params(family: Family, params: &[f64]) -> Result<Self> {
        if params.len() != 2 {
            return Err(FrocError::InvalidArgument(format!(
                "{family} takes 2 parameters, got {}",
                params.len()
            )));
        }
        match family {
            Family::Normal => Self::normal(params[0], params[1]),
            Family::Beta => Self::beta(params[0], params[1]),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ScoreDistribution::Normal { .. } => Family::Normal,
            ScoreDistribution::Beta { .. } => Family::Beta,
        }
    }

    pub fn params(&self) -> [f64; 2] {
        match *self {
            ScoreDistribution::Normal { mean, sd } => [mean, sd],
            ScoreDistribution::Beta { alpha, beta } => [alpha, beta],
        }
    }

    /// Closed support `(inf, sup)`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            ScoreDistribution::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ScoreDistribution::Beta { .. } => (0.0, 1.0),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        match *self {
            ScoreDistribution::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                Ok(-0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
            }
            ScoreDistribution::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(FrocError::OutOfRange(format!(
                        "beta density evaluated at {x}, outside [0, 1]"
                    )));
                }
                let a_term = edge_term(alpha - 1.0, x);
                let b_term = edge_term(beta - 1.0, 1.0 - x);
                Ok(a_term + b_term - ln_beta(alpha, beta))
            }
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        match *self {
            ScoreDistribution::Normal { mean, sd } => Ok(std_normal_pdf((x - mean) / sd) / sd),
            ScoreDistribution::Beta { .. } => Ok(self.ln_pdf(x)?.exp()),
        }
    }

    /// Clamped to 0 and 1 outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ScoreDistribution::Normal { mean, sd } => {
                if x == f64::INFINITY {
                    1.0
                } else if x == f64::NEG_INFINITY {
                    0.0
                } else {
                    std_normal_cdf((x - mean) / sd)
                }
            }
            ScoreDistribution::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(alpha, beta, x)
                }
            }
        }
    }

    /// Survival function 1 − F(x), computed without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            ScoreDistribution::Normal { mean, sd } => {
                if x == f64::INFINITY {
                    0.0
                } else if x == f64::NEG_INFINITY {
                    1.0
                } else {
                    std_normal_sf((x - mean) / sd)
                }
            }
            ScoreDistribution::Beta { alpha, beta } => {
                if x <= 0.0 {
                    1.0
                } else if x >= 1.0 {
                    0.0
                } else {
                    beta_reg(beta, alpha, 1.0 - x)
                }
            }
        }
    }

    /// Inverse CDF. `u = 0` and `u = 1` map to the support infimum and supremum.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(FrocError::InvalidArgument(format!(
                "quantile level {u} outside [0, 1]"
            )));
        }
        match *self {
            ScoreDistribution::Normal { mean, sd } => Ok(mean + sd * std_normal_quantile(u)),
            ScoreDistribution::Beta { alpha, beta } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                if u == 1.0 {
                    return Ok(1.0);
                }
                Ok(beta_quantile(alpha, beta, u))
            }
        }
    }

    /// Expected information for one observation, in the order of [`params`](Self::params).
    pub fn fisher_information(&self) -> Matrix2<f64> {
        match *self {
            ScoreDistribution::Normal { sd, .. } => {
                let v = sd * sd;
                Matrix2::new(1.0 / v, 0.0, 0.0, 2.0 / v)
            }
            ScoreDistribution::Beta { alpha, beta } => {
                let tab = trigamma(alpha + beta);
                Matrix2::new(trigamma(alpha) - tab, -tab, -tab, trigamma(beta) - tab)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScoreDistribution::Normal { mean, sd } => rand_distr::Normal::new(mean, sd)
                .expect("validated")
                .sample(rng),
            ScoreDistribution::Beta { alpha, beta } => rand_distr::Beta::new(alpha, beta)
                .expect("validated")
                .sample(rng),
        }
    }

    pub fn loglik(&self, samples: &[f64]) -> Result<f64> {
        samples.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

impl fmt::Display for ScoreDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.params();
        write!(f, "{}({a}, {b})", self.family())
    }
}

/// `k·ln(y)` with the 0·ln 0 = 0 convention at the support edge.
fn edge_term(k: f64, y: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if y == 0.0 {
        if k > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        k * y.ln()
    }
}

/// Newton/bisection polish around the `statrs` inverse for the 1e-10 round trip.
fn beta_quantile(alpha: f64, beta: f64, u: f64) -> f64 {
    let d = ScoreDistribution::Beta { alpha, beta };
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut x = inv_beta_reg(alpha, beta, u);
    if !(x > 0.0 && x < 1.0) {
        x = 0.5;
    }
    for _ in 0..200 {
        let f = d.cdf(x) - u;
        if f.abs() <= 1e-15 {
            break;
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let dens = d.pdf(x).unwrap_or(0.0);
        let mut next = if dens > 0.0 && dens.is_finite() {
            x - f / dens
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-17 * x.max(1e-300) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// Outcome of a maximum-likelihood fit of one score family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub distribution: ScoreDistribution,
    pub loglik: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Euclidean norm of the mean (per-observation) score at the returned estimate.
    pub gradient_norm: f64,
}

impl FitResult {
    pub fn params(&self) -> [f64; 2] {
        self.distribution.params()
    }
}

/// Maximum-likelihood fit.
///
/// Normal uses the closed form (divide-by-n variance). Beta runs Newton
/// iterations on the digamma score equations from the method-of-moments
/// start; since the beta log-likelihood is concave in (α, β) the Newton
/// direction is always an ascent direction, and steps are halved until they
/// stay in the positive orthant and do not decrease the likelihood.
pub fn fit_mle(family: Family, samples: &[f64]) -> Result<FitResult> {
    let n = samples.len();
    if n < 2 {
        return Err(FrocError::InvalidData(format!(
            "{family} fit needs at least 2 samples, got {n}"
        )));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(FrocError::InvalidData(format!("non-finite sample {x}")));
    }
    let nf = n as f64;
    match family {
        Family::Normal => {
            let mean = samples.iter().sum::<f64>() / nf;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
            if var <= 0.0 {
                return Err(FrocError::InvalidData(
                    "normal fit of a constant sample (zero variance)".into(),
                ));
            }
            let distribution = ScoreDistribution::normal(mean, var.sqrt())?;
            Ok(FitResult {
                loglik: distribution.loglik(samples)?,
                distribution,
                n,
                converged: true,
                iterations: 0,
                gradient_norm: 0.0,
            })
        }
        Family::Beta => fit_beta(samples),
    }
}

fn fit_beta(samples: &[f64]) -> Result<FitResult> {
    if let Some(x) = samples.iter().find(|&&x| x <= 0.0 || x >= 1.0) {
        return Err(FrocError::InvalidData(format!(
            "beta sample {x} not strictly inside (0, 1); shrink boundary values before fitting"
        )));
    }
    let nf = samples.len() as f64;
    let mean_ln_x = samples.iter().map(|x| x.ln()).sum::<f64>() / nf;
    let mean_ln_1mx = samples.iter().map(|x| (1.0 - x).ln()).sum::<f64>() / nf;
    let ll = |a: f64, b: f64| (a - 1.0) * mean_ln_x + (b - 1.0) * mean_ln_1mx - ln_beta(a, b);
    let grad = |a: f64, b: f64| {
        let dab = digamma(a + b);
        [dab - digamma(a) + mean_ln_x, dab - digamma(b) + mean_ln_1mx]
    };

    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let common = if var > 0.0 {
        mean * (1.0 - mean) / var - 1.0
    } else {
        -1.0
    };
    let (mut a, mut b) = if common > 0.0 {
        (mean * common, (1.0 - mean) * common)
    } else {
        (1.0, 1.0)
    };

    let mut g = grad(a, b);
    let mut gnorm = g[0].hypot(g[1]);
    let mut iterations = 0;
    while gnorm > BETA_FIT_TOLERANCE && iterations < BETA_FIT_MAX_ITER {
        iterations += 1;
        let info = ScoreDistribution::Beta { alpha: a, beta: b }.fisher_information();
        let Some(inv) = info.try_inverse() else {
            break;
        };
        let step = inv * nalgebra::Vector2::new(g[0], g[1]);
        let current = ll(a, b);
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let (na, nb) = (a + scale * step[0], b + scale * step[1]);
            if na > 0.0 && nb > 0.0 && ll(na, nb) >= current - 1e-14 * current.abs() {
                a = na;
                b = nb;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            break;
        }
        g = grad(a, b);
        gnorm = g[0].hypot(g[1]);
    }
    let distribution = ScoreDistribution::beta(a, b)?;
    Ok(FitResult {
        loglik: distribution.loglik(samples)?,
        distribution,
        n: samples.len(),
        converged: gnorm <= BETA_FIT_TOLERANCE,
        iterations,
        gradient_norm: gnorm,
    })
}

/// Maps values in [0, 1] into the open interval with `x ← (x·(n−1) + 0.5)/n`.
pub fn shrink_unit_interval(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    (x * (nf - 1.0) + 0.5) / nf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov-Smirnov test against a fully specified law.
///
/// The p-value comes from the asymptotic Kolmogorov distribution of √n·D with
/// no adjustment for parameters estimated from the same sample, so it is
/// conservative when `d` was fitted to `samples`.
pub fn ks_statistic(d: &ScoreDistribution, samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(FrocError::InvalidData("KS test on an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = d.cdf(x);
            let above = (i as f64 + 1.0) / nf - f;
            let below = f - i as f64 / nf;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_sf(nf.sqrt() * statistic),
        n: sorted.len(),
    })
}
