//! Maximum-likelihood fit of the IDCA model and the plug-in covariance of
//! the estimator.
//!
//! The likelihood factors into a lesion part (Bernoulli detection times the
//! TP score density) and a negative-subject part (Poisson FP count times the
//! FP score densities), so every component is fitted on its own sample.
//!
//! The covariance is block diagonal and stored in estimator units, i.e. it
//! is already divided by the relevant counts:
//!
//! | block | variance |
//! |-------|----------|
//! | λ     | λ̂ / K2 |
//! | p     | p̂(1 − p̂) / T |
//! | λ2    | λ̂2 / K1 |
//! | θ2    | I_f(θ̂2)⁻¹ / Σm |
//! | θ1    | I_g(θ̂1)⁻¹ / ΣL |
//! | θ3    | I_f(θ̂3)⁻¹ / Σn |
//!
//! The λ2 and θ3 blocks mirror the λ and θ2 blocks for positive subjects;
//! they are built by analogy rather than from a separate limit theorem.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::data::{validate, FrocDataset};
use crate::distributions::{fit_mle, Family, FitResult, ScoreDistribution};
use crate::error::{FrocError, Result};

/// Note attached to serialized fits about how the λ2/θ3 blocks were built.
pub const STRUCTURAL_BLOCK_NOTE: &str =
    "lambda2 and theta3 covariance blocks are constructed by structural analogy with the lambda and theta2 blocks";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdcaParams {
    /// Per-lesion detection probability.
    pub p: f64,
    /// Poisson mean of the FP count on negative subjects.
    pub lambda: f64,
    /// Poisson mean of the FP count on positive subjects.
    pub lambda2: f64,
    /// TP score law.
    pub theta1: ScoreDistribution,
    /// FP score law on negatives.
    pub theta2: ScoreDistribution,
    /// FP score law on positives, when there were enough marks to fit it.
    pub theta3: Option<ScoreDistribution>,
}

impl IdcaParams {
    pub fn new(
        p: f64,
        lambda: f64,
        lambda2: f64,
        theta1: ScoreDistribution,
        theta2: ScoreDistribution,
        theta3: Option<ScoreDistribution>,
    ) -> Result<Self> {
        let params = IdcaParams {
            p,
            lambda,
            lambda2,
            theta1,
            theta2,
            theta3,
        };
        params.check()?;
        Ok(params)
    }

    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(FrocError::InvalidArgument(format!(
                "detection probability p = {} outside [0, 1]",
                self.p
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(FrocError::InvalidArgument(format!(
                "lambda = {} must be finite and nonnegative",
                self.lambda
            )));
        }
        if !(self.lambda2 >= 0.0) || !self.lambda2.is_finite() {
            return Err(FrocError::InvalidArgument(format!(
                "lambda2 = {} must be finite and nonnegative",
                self.lambda2
            )));
        }
        Ok(())
    }

    /// Parameter names in covariance order:
    /// λ, p, λ2, θ2 components, θ1 components, θ3 components (if present).
    pub fn names(&self) -> Vec<String> {
        let mut names = vec!["lambda".to_string(), "p".to_string(), "lambda2".to_string()];
        let mut push = |tag: &str, d: &ScoreDistribution| {
            for n in d.family().param_names() {
                names.push(format!("{tag}.{n}"));
            }
        };
        push("theta2", &self.theta2);
        push("theta1", &self.theta1);
        if let Some(t3) = &self.theta3 {
            push("theta3", t3);
        }
        names
    }

    pub fn dimension(&self) -> usize {
        if self.theta3.is_some() {
            9
        } else {
            7
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = vec![self.lambda, self.p, self.lambda2];
        v.extend(self.theta2.params());
        v.extend(self.theta1.params());
        if let Some(t3) = &self.theta3 {
            v.extend(t3.params());
        }
        v
    }

    /// Rebuilds parameters from a vector in [`names`](Self::names) order,
    /// keeping the current families.
    pub fn with_vector(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dimension() {
            return Err(FrocError::InvalidArgument(format!(
                "parameter vector has length {}, expected {}",
                v.len(),
                self.dimension()
            )));
        }
        let theta3 = match &self.theta3 {
            Some(t3) => Some(ScoreDistribution::from_params(t3.family(), &v[7..9])?),
            None => None,
        };
        IdcaParams::new(
            v[1],
            v[0],
            v[2],
            ScoreDistribution::from_params(self.theta1.family(), &v[5..7])?,
            ScoreDistribution::from_params(self.theta2.family(), &v[3..5])?,
            theta3,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub k1: usize,
    pub k2: usize,
    /// Total lesions T.
    pub lesions: usize,
    /// Detected lesions ΣL.
    pub detected: usize,
    /// FP marks on negatives Σm.
    pub fp_negatives: usize,
    /// FP marks on positives Σn.
    pub fp_positives: usize,
}

impl Counts {
    pub fn of(ds: &FrocDataset) -> Self {
        Counts {
            k1: ds.k1(),
            k2: ds.k2(),
            lesions: ds.total_lesions(),
            detected: ds.total_detected(),
            fp_negatives: ds.total_fp_negatives(),
            fp_positives: ds.total_fp_positives(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdcaFit {
    pub params: IdcaParams,
    /// Estimator-unit covariance in [`IdcaParams::names`] order.
    pub covariance: DMatrix<f64>,
    pub counts: Counts,
    pub loglik: f64,
    pub component_fits: ComponentFits,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentFits {
    pub theta1: FitResult,
    pub theta2: FitResult,
    pub theta3: Option<FitResult>,
}

impl IdcaFit {
    pub fn parameter_names(&self) -> Vec<String> {
        self.params.names()
    }

    pub fn variance(&self, name: &str) -> Option<f64> {
        let idx = self.parameter_names().iter().position(|n| n == name)?;
        Some(self.covariance[(idx, idx)])
    }

    pub fn to_document(&self) -> FitDocument {
        let n = self.covariance.nrows();
        FitDocument {
            parameter_order: self.parameter_names(),
            params: self.params.clone(),
            covariance: (0..n)
                .map(|i| (0..n).map(|j| self.covariance[(i, j)]).collect())
                .collect(),
            counts: self.counts,
            loglik: self.loglik,
            notes: vec![STRUCTURAL_BLOCK_NOTE.to_string()],
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }
}

/// JSON form of a fit: covariance rows follow `parameter_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub parameter_order: Vec<String>,
    pub params: IdcaParams,
    pub covariance: Vec<Vec<f64>>,
    pub counts: Counts,
    pub loglik: f64,
    pub notes: Vec<String>,
}

impl FitDocument {
    /// Checks the declared order and matrix shape, returning the parameters and
    /// covariance. Component MLE diagnostics are not part of the document.
    pub fn into_parts(self) -> Result<(IdcaParams, DMatrix<f64>, Counts, f64)> {
        let names = self.params.names();
        if names != self.parameter_order {
            return Err(FrocError::InvalidData(format!(
                "parameter_order {:?} does not match params {:?}",
                self.parameter_order, names
            )));
        }
        let n = names.len();
        if self.covariance.len() != n || self.covariance.iter().any(|r| r.len() != n) {
            return Err(FrocError::InvalidData(format!(
                "covariance must be {n}x{n}"
            )));
        }
        let cov = DMatrix::from_fn(n, n, |i, j| self.covariance[i][j]);
        Ok((self.params, cov, self.counts, self.loglik))
    }
}

/// Fits (p, λ, λ2, θ1, θ2, θ3) by maximum likelihood.
pub fn fit(ds: &FrocDataset, tp_family: Family, fp_family: Family) -> Result<IdcaFit> {
    let report = validate(ds);
    if !report.is_fit_ready() {
        return Err(FrocError::InvalidData(report.issues.join("; ")));
    }
    let counts = Counts::of(ds);
    let p = counts.detected as f64 / counts.lesions as f64;
    if counts.detected == 0 || counts.detected == counts.lesions {
        return Err(FrocError::Boundary(format!(
            "p = {p} ({} of {} lesions detected)",
            counts.detected, counts.lesions
        )));
    }
    let lambda = counts.fp_negatives as f64 / counts.k2 as f64;
    let lambda2 = counts.fp_positives as f64 / counts.k1 as f64;

    let component = |name: &str, family: Family, xs: &[f64]| -> Result<FitResult> {
        let r = fit_mle(family, xs)
            .map_err(|e| FrocError::InvalidData(format!("{name} unfittable: {e}")))?;
        if !r.converged {
            return Err(FrocError::NoConvergence(format!(
                "{name} {family} fit stopped after {} iterations (gradient norm {:.3e})",
                r.iterations, r.gradient_norm
            )));
        }
        Ok(r)
    };
    let theta1 = component("theta1 (TP scores)", tp_family, &ds.tp_scores())?;
    let theta2 = component(
        "theta2 (FP scores on negatives)",
        fp_family,
        &ds.fp_scores_negatives(),
    )?;
    let theta3 = if counts.fp_positives >= 2 {
        Some(component(
            "theta3 (FP scores on positives)",
            fp_family,
            &ds.fp_scores_positives(),
        )?)
    } else {
        None
    };

    let params = IdcaParams::new(
        p,
        lambda,
        lambda2,
        theta1.distribution,
        theta2.distribution,
        theta3.as_ref().map(|f| f.distribution),
    )?;
    let covariance = asymptotic_covariance(&params, &counts)?;
    let loglik = loglikelihood(&params, ds)?;
    Ok(IdcaFit {
        params,
        covariance,
        counts,
        loglik,
        component_fits: ComponentFits {
            theta1,
            theta2,
            theta3,
        },
    })
}

/// log L1 + log L2: lesion detections with TP scores, and negative-subject
/// FP counts with their scores. Positive-subject FP marks are not part of it.
pub fn loglikelihood(params: &IdcaParams, ds: &FrocDataset) -> Result<f64> {
    let p = params.p;
    let lambda = params.lambda;
    let mut ll = 0.0;
    for subject in &ds.positives {
        for y in subject.lesion_scores() {
            ll += match y {
                Some(y) => p.ln() + params.theta1.ln_pdf(y)?,
                None => (1.0 - p).ln(),
            };
        }
    }
    for subject in &ds.negatives {
        let m = subject.fp_scores.len();
        let count_term = if m == 0 {
            -lambda
        } else {
            m as f64 * lambda.ln() - lambda - ln_factorial(m as u64)
        };
        ll += count_term;
        for &x in &subject.fp_scores {
            ll += params.theta2.ln_pdf(x)?;
        }
    }
    Ok(ll)
}

/// Block-diagonal plug-in covariance in estimator units.
pub fn asymptotic_covariance(params: &IdcaParams, counts: &Counts) -> Result<DMatrix<f64>> {
    let dim = params.dimension();
    let mut cov = DMatrix::zeros(dim, dim);
    let need = |n: usize, what: &str| {
        if n == 0 {
            Err(FrocError::Singular(format!(
                "zero {what}; information is zero"
            )))
        } else {
            Ok(n as f64)
        }
    };
    let k2 = need(counts.k2, "negative subjects")?;
    let t = need(counts.lesions, "lesions")?;
    let k1 = need(counts.k1, "positive subjects")?;
    cov[(0, 0)] = params.lambda / k2;
    cov[(1, 1)] = params.p * (1.0 - params.p) / t;
    cov[(2, 2)] = params.lambda2 / k1;

    let mut put_block = |offset: usize, d: &ScoreDistribution, n: f64, what: &str| -> Result<()> {
        let inv = d.fisher_information().try_inverse().ok_or_else(|| {
            FrocError::Singular(format!(
                "Fisher information of {what} ({d}) is not invertible"
            ))
        })?;
        for i in 0..2 {
            for j in 0..2 {
                cov[(offset + i, offset + j)] = inv[(i, j)] / n;
            }
        }
        Ok(())
    };
    put_block(
        3,
        &params.theta2,
        need(counts.fp_negatives, "FP marks on negatives")?,
        "theta2",
    )?;
    put_block(
        5,
        &params.theta1,
        need(counts.detected, "detected lesions")?,
        "theta1",
    )?;
    if let Some(t3) = &params.theta3 {
        put_block(
            7,
            t3,
            need(counts.fp_positives, "FP marks on positives")?,
            "theta3",
        )?;
    }
    Ok(cov)
}
