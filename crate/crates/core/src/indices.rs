//! AFROC operating characteristics of a fitted IDCA model and delta-method
//! inference for them.
//!
//! Under the model the AFROC coordinates at threshold ζ are
//!
//! ```text
//! FPF(ζ) = 1 − exp(−λ·(1 − F(ζ)))        (Poisson-thinned FP count)
//! LLF(ζ) = p·(1 − G(ζ))
//! ```
//!
//! with G the TP score law and F the FP score law on negatives. The area
//! under the curve, including the straight closing segment to (1, 1), is
//!
//! ```text
//! AUC = p·e^{−λ}·(E[e^{λ F(Y)}] − 1) + (1 + p)·e^{−λ}/2,   Y ~ G
//! ```
//!
//! and the expectation is evaluated as ∫₀¹ exp(λ F(G⁻¹(u))) du by
//! Gauss-Legendre quadrature. Inverting FPF gives the LLF at a fixed FPF q:
//! `p·(1 − G(F⁻¹(1 + ln(1 − q)/λ)))`.
//!
//! Standard errors come from central finite-difference gradients pushed
//! through the estimator-unit covariance of [`IdcaFit`]; no further division
//! by a sample size happens here.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{FrocError, Result};
use crate::model::{IdcaFit, IdcaParams};
use crate::special::{gauss_legendre_201, gauss_legendre_402, std_normal_quantile};

/// Largest change allowed when the node count of the AUC rule is doubled.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Distance kept from the ends of the attainable FPF range for pointwise bands.
pub const BAND_EDGE: f64 = 1e-6;
/// Boundary points emitted for two-index ellipses.
pub const ELLIPSE_POINTS: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
}

impl IndexEstimate {
    pub fn length(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fpf: f64,
    pub llf: f64,
    pub band_low: Option<f64>,
    pub band_high: Option<f64>,
}

/// Largest FPF the model can reach, P(m > 0) = 1 − e^{−λ}.
pub fn max_fpf(params: &IdcaParams) -> f64 {
    -(-params.lambda).exp_m1()
}

pub fn fpf_at(params: &IdcaParams, zeta: f64) -> f64 {
    -(-params.lambda * params.theta2.sf(zeta)).exp_m1()
}

pub fn llf_at(params: &IdcaParams, zeta: f64) -> f64 {
    params.p * params.theta1.sf(zeta)
}

fn auc_expectation(params: &IdcaParams, rule: &crate::special::GaussLegendre) -> Result<f64> {
    let lambda = params.lambda;
    let mut acc = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let y = params.theta1.quantile(u)?;
        acc += w * (lambda * params.theta2.cdf(y)).exp();
    }
    Ok(acc)
}

/// Area under the AFROC curve.
pub fn afroc_auc(params: &IdcaParams) -> Result<f64> {
    let p = params.p;
    let lambda = params.lambda;
    if lambda == 0.0 {
        return Ok((1.0 + p) / 2.0);
    }
    let coarse = auc_expectation(params, gauss_legendre_201())?;
    let fine = auc_expectation(params, gauss_legendre_402())?;
    if (coarse - fine).abs() > QUADRATURE_TOLERANCE {
        return Err(FrocError::NoConvergence(format!(
            "AUC quadrature changed by {:.3e} when doubling nodes",
            (coarse - fine).abs()
        )));
    }
    let e = (-lambda).exp();
    let auc = p * e * (coarse - 1.0) + (1.0 + p) * e / 2.0;
    Ok(auc.clamp(0.0, 1.0))
}

/// LLF at a fixed FPF `q`, for `0 ≤ q ≤ 1 − e^{−λ}`.
pub fn llf_at_fpf(params: &IdcaParams, q: f64) -> Result<f64> {
    let max = max_fpf(params);
    if params.lambda == 0.0 {
        if q == 0.0 {
            return Ok(0.0);
        }
        return Err(FrocError::OutOfRange(format!(
            "FPF {q} not attainable: lambda = 0 so max FPF = 0"
        )));
    }
    if !(q >= 0.0) || q > max * (1.0 + 1e-12) {
        return Err(FrocError::OutOfRange(format!(
            "FPF {q} not attainable: max FPF = 1 - exp(-lambda) = {max:.6}"
        )));
    }
    if q >= max {
        return Ok(params.p);
    }
    let u = (1.0 + (-q).ln_1p() / params.lambda).clamp(0.0, 1.0);
    let zeta = params.theta2.quantile(u)?;
    Ok(params.p * params.theta1.sf(zeta))
}

/// Model AFROC curve on a uniform FPF grid over `[0, 1 − e^{−λ}]`.
pub fn afroc_curve(params: &IdcaParams, npoints: usize) -> Result<Vec<CurvePoint>> {
    if npoints < 2 {
        return Err(FrocError::InvalidArgument(format!(
            "curve needs at least 2 points, got {npoints}"
        )));
    }
    let max = max_fpf(params);
    if !(max > 0.0) {
        return Err(FrocError::OutOfRange(
            "lambda = 0: the curve collapses to FPF = 0".into(),
        ));
    }
    let last = npoints - 1;
    (0..npoints)
        .into_par_iter()
        .map(|k| {
            let fpf = if k == last {
                max
            } else {
                max * k as f64 / last as f64
            };
            Ok(CurvePoint {
                fpf,
                llf: llf_at_fpf(params, fpf)?,
                band_low: None,
                band_high: None,
            })
        })
        .collect()
}

/// A scalar function of the IDCA parameters.
pub trait AccuracyIndex: Sync {
    fn name(&self) -> String;
    fn evaluate(&self, params: &IdcaParams) -> Result<f64>;
}

/// Built-in indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Index {
    Auc,
    LlfAtFpf(f64),
    DetectionProbability,
    Lambda,
    Lambda2,
}

impl AccuracyIndex for Index {
    fn name(&self) -> String {
        match self {
            Index::Auc => "afroc_auc".into(),
            Index::LlfAtFpf(_) => "llf_at_fpf".into(),
            Index::DetectionProbability => "p".into(),
            Index::Lambda => "lambda".into(),
            Index::Lambda2 => "lambda2".into(),
        }
    }

    fn evaluate(&self, params: &IdcaParams) -> Result<f64> {
        match *self {
            Index::Auc => afroc_auc(params),
            Index::LlfAtFpf(q) => llf_at_fpf(params, q),
            Index::DetectionProbability => Ok(params.p),
            Index::Lambda => Ok(params.lambda),
            Index::Lambda2 => Ok(params.lambda2),
        }
    }
}

impl std::str::FromStr for Index {
    type Err = FrocError;

    /// `auc`, `p`, `lambda`, `lambda2`, or `llf@Q` for the LLF at FPF `Q`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "auc" | "afroc_auc" => Ok(Index::Auc),
            "p" => Ok(Index::DetectionProbability),
            "lambda" | "lambda1" => Ok(Index::Lambda),
            "lambda2" => Ok(Index::Lambda2),
            other => {
                if let Some(q) = other.strip_prefix("llf@") {
                    let q: f64 = q.parse().map_err(|_| {
                        FrocError::InvalidArgument(format!("bad FPF in index '{s}'"))
                    })?;
                    Ok(Index::LlfAtFpf(q))
                } else {
                    Err(FrocError::InvalidArgument(format!(
                        "unknown index '{s}' (expected auc, p, lambda, lambda2 or llf@Q)"
                    )))
                }
            }
        }
    }
}

/// Wraps a closure as an index.
pub struct CustomIndex<F> {
    pub name: String,
    pub f: F,
}

impl<F> AccuracyIndex for CustomIndex<F>
where
    F: Fn(&IdcaParams) -> Result<f64> + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn evaluate(&self, params: &IdcaParams) -> Result<f64> {
        (self.f)(params)
    }
}

/// Central-difference gradient over the covariance-ordered parameter vector.
///
/// Step `h = max(1e-5, 1e-5·|γ|)` per coordinate; falls back to a one-sided
/// difference when one side leaves the parameter domain (e.g. λ2 = 0).
pub fn index_gradient(f: &dyn AccuracyIndex, params: &IdcaParams) -> Result<DVector<f64>> {
    let base = params.to_vector();
    let mut grad = DVector::zeros(base.len());
    let mut f0: Option<f64> = None;
    for k in 0..base.len() {
        let h = (1e-5 * base[k].abs()).max(1e-5);
        let shifted = |delta: f64| {
            let mut v = base.clone();
            v[k] += delta;
            params.with_vector(&v)
        };
        let eval = |p: &IdcaParams| {
            f.evaluate(p).map_err(|e| {
                FrocError::NoConvergence(format!(
                    "{} failed at perturbed {}: {e}",
                    f.name(),
                    params.names()[k]
                ))
            })
        };
        let mut centre = || -> Result<f64> {
            if f0.is_none() {
                f0 = Some(f.evaluate(params)?);
            }
            Ok(f0.unwrap())
        };
        grad[k] = match (shifted(h), shifted(-h)) {
            (Ok(up), Ok(down)) => (eval(&up)? - eval(&down)?) / (2.0 * h),
            (Ok(up), Err(_)) => (eval(&up)? - centre()?) / h,
            (Err(_), Ok(down)) => (centre()? - eval(&down)?) / h,
            (Err(e), Err(_)) => return Err(e),
        };
    }
    Ok(grad)
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FrocError::InvalidArgument(format!(
            "alpha {alpha} must lie in (0, 1)"
        )));
    }
    Ok(std_normal_quantile(1.0 - alpha / 2.0))
}

fn quad_form(g: &DVector<f64>, cov: &DMatrix<f64>) -> f64 {
    (g.transpose() * cov * g)[(0, 0)]
}

/// Wald interval `value ± z·stderr` with `stderr² = ∇fᵀ Σ ∇f`.
pub fn ci_index(fit: &IdcaFit, f: &dyn AccuracyIndex, alpha: f64) -> Result<IndexEstimate> {
    let z = check_alpha(alpha)?;
    let value = f.evaluate(&fit.params)?;
    let grad = index_gradient(f, &fit.params)?;
    let var = quad_form(&grad, &fit.covariance);
    if !(var > 0.0) || !var.is_finite() {
        return Err(FrocError::Singular(format!(
            "nonpositive delta-method variance {var:e} for {}",
            f.name()
        )));
    }
    let se = var.sqrt();
    Ok(IndexEstimate {
        name: f.name(),
        value,
        stderr: se,
        ci_low: value - z * se,
        ci_high: value + z * se,
        alpha,
    })
}

/// Interval built on the logit scale and mapped back, so both ends stay in (0, 1).
/// `stderr` is still reported on the original scale.
pub fn ci_index_logit(fit: &IdcaFit, f: &dyn AccuracyIndex, alpha: f64) -> Result<IndexEstimate> {
    let z = check_alpha(alpha)?;
    let value = f.evaluate(&fit.params)?;
    if !(value > 0.0 && value < 1.0) {
        return Err(FrocError::OutOfRange(format!(
            "logit undefined for {} = {value}",
            f.name()
        )));
    }
    let grad = index_gradient(f, &fit.params)?;
    let var = quad_form(&grad, &fit.covariance);
    if !(var > 0.0) || !var.is_finite() {
        return Err(FrocError::Singular(format!(
            "nonpositive delta-method variance {var:e} for {}",
            f.name()
        )));
    }
    let se = var.sqrt();
    let eta = (value / (1.0 - value)).ln();
    let se_eta = se / (value * (1.0 - value));
    let expit = |x: f64| 1.0 / (1.0 + (-x).exp());
    Ok(IndexEstimate {
        name: f.name(),
        value,
        stderr: se,
        ci_low: expit(eta - z * se_eta),
        ci_high: expit(eta + z * se_eta),
        alpha,
    })
}

/// Pointwise LLF band over FPF values.
///
/// Grid values outside `[ε, 1 − e^{−λ̂} − ε]` are dropped: the straight
/// closing segment of the AFROC curve carries no band. Points where the
/// interval cannot be formed keep their estimate with an empty band.
pub fn ci_llf_pointwise(
    fit: &IdcaFit,
    q_grid: &[f64],
    alpha: f64,
    use_logit: bool,
) -> Result<Vec<CurvePoint>> {
    check_alpha(alpha)?;
    let max = max_fpf(&fit.params);
    let kept: Vec<f64> = q_grid
        .iter()
        .copied()
        .filter(|&q| q >= BAND_EDGE && q <= max - BAND_EDGE)
        .collect();
    kept.par_iter()
        .map(|&q| {
            let index = Index::LlfAtFpf(q);
            let llf = llf_at_fpf(&fit.params, q)?;
            let est = if use_logit {
                ci_index_logit(fit, &index, alpha)
            } else {
                ci_index(fit, &index, alpha)
            };
            Ok(match est {
                Ok(e) => CurvePoint {
                    fpf: q,
                    llf,
                    band_low: Some(e.ci_low),
                    band_high: Some(e.ci_high),
                },
                Err(_) => CurvePoint {
                    fpf: q,
                    llf,
                    band_low: None,
                    band_high: None,
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DfMode {
    /// Chi-square with M degrees of freedom (Wald region).
    #[serde(rename = "m")]
    M,
    /// Chi-square with M − 1 degrees of freedom.
    #[serde(rename = "m-1")]
    MMinus1,
}

impl std::str::FromStr for DfMode {
    type Err = FrocError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(DfMode::M),
            "m-1" | "m_minus_1" => Ok(DfMode::MMinus1),
            other => Err(FrocError::InvalidArgument(format!(
                "df mode '{other}' must be 'm' or 'm-1'"
            ))),
        }
    }
}

/// Joint confidence region `{h : (ĥ − h)ᵀ S⁻¹ (ĥ − h) ≤ threshold}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    pub names: Vec<String>,
    pub center: Vec<f64>,
    /// S = J Σ Jᵀ, row-major.
    pub shape: Vec<Vec<f64>>,
    pub threshold: f64,
    pub df: usize,
    pub alpha: f64,
    /// Boundary points for two-index regions, empty otherwise.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub boundary: Vec<[f64; 2]>,
}

impl EllipseSpec {
    fn shape_matrix(&self) -> DMatrix<f64> {
        let m = self.center.len();
        DMatrix::from_fn(m, m, |i, j| self.shape[i][j])
    }

    /// Mahalanobis distance² of `h` from the center.
    pub fn distance2(&self, h: &[f64]) -> Result<f64> {
        let d = DVector::from_iterator(
            self.center.len(),
            self.center.iter().zip(h).map(|(c, x)| c - x),
        );
        let chol = self
            .shape_matrix()
            .cholesky()
            .ok_or_else(|| FrocError::Singular("ellipse shape not positive definite".into()))?;
        let sol = chol.solve(&d);
        Ok(d.dot(&sol))
    }

    pub fn contains(&self, h: &[f64]) -> Result<bool> {
        Ok(self.distance2(h)? <= self.threshold)
    }

    /// Projection of the region onto coordinate `i`.
    pub fn projected_interval(&self, i: usize) -> (f64, f64) {
        let half = (self.threshold * self.shape[i][i]).sqrt();
        (self.center[i] - half, self.center[i] + half)
    }
}

pub fn confidence_ellipse(
    fit: &IdcaFit,
    indices: &[&dyn AccuracyIndex],
    alpha: f64,
    df_mode: DfMode,
) -> Result<EllipseSpec> {
    check_alpha(alpha)?;
    let m = indices.len();
    let dim = fit.params.dimension();
    if m < 2 || m > dim {
        return Err(FrocError::InvalidArgument(format!(
            "confidence sets need 2..={dim} indices, got {m}"
        )));
    }
    let mut jac = DMatrix::zeros(m, dim);
    let mut center = Vec::with_capacity(m);
    for (r, f) in indices.iter().enumerate() {
        center.push(f.evaluate(&fit.params)?);
        let g = index_gradient(*f, &fit.params)?;
        jac.set_row(r, &g.transpose());
    }
    let shape = &jac * &fit.covariance * jac.transpose();
    let chol = shape.clone().cholesky().ok_or_else(|| {
        FrocError::Singular("J Σ Jᵀ is singular; index gradients are dependent".into())
    })?;
    let df = match df_mode {
        DfMode::M => m,
        DfMode::MMinus1 => m - 1,
    };
    let threshold = ChiSquared::new(df as f64)
        .map_err(|e| FrocError::InvalidArgument(e.to_string()))?
        .inverse_cdf(1.0 - alpha);
    let boundary = if m == 2 {
        let l = chol.l();
        let r = threshold.sqrt();
        (0..ELLIPSE_POINTS)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / ELLIPSE_POINTS as f64;
                let (s, c) = t.sin_cos();
                let u = [r * c, r * s];
                [
                    center[0] + l[(0, 0)] * u[0],
                    center[1] + l[(1, 0)] * u[0] + l[(1, 1)] * u[1],
                ]
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(EllipseSpec {
        names: indices.iter().map(|f| f.name()).collect(),
        center,
        shape: (0..m)
            .map(|i| (0..m).map(|j| shape[(i, j)]).collect())
            .collect(),
        threshold,
        df,
        alpha,
        boundary,
    })
}
