//! Nonparametric AFROC: the empirical step curve, its trapezoidal area, and
//! a stratified subject-level bootstrap for the area.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::FrocDataset;
use crate::error::{FrocError, Result};
use crate::indices::IndexEstimate;
use crate::special::std_normal_quantile;

pub const MIN_BOOTSTRAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub fpf: f64,
    pub llf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalAfroc {
    /// One point per distinct observed threshold, thresholds descending.
    pub points: Vec<OperatingPoint>,
    pub auc: f64,
}

impl EmpiricalAfroc {
    /// Trapezoid area from (0, 0) through the points and on to (1, 1).
    pub fn trapezoid_area(&self) -> f64 {
        let mut area = 0.0;
        let (mut x0, mut y0) = (0.0, 0.0);
        for pt in &self.points {
            area += (pt.fpf - x0) * (pt.llf + y0) / 2.0;
            x0 = pt.fpf;
            y0 = pt.llf;
        }
        area + (1.0 - x0) * (1.0 + y0) / 2.0
    }
}

/// Per-lesion scores (None = missed) and per-negative maximum FP score.
struct Ratings {
    lesions: Vec<Vec<Option<f64>>>,
    maxima: Vec<Option<f64>>,
}

impl Ratings {
    fn of(ds: &FrocDataset) -> Self {
        Ratings {
            lesions: ds
                .positives
                .iter()
                .map(|p| p.lesion_scores().collect())
                .collect(),
            maxima: ds.negatives.iter().map(|n| n.max_score()).collect(),
        }
    }
}

/// Sum of the pairwise kernel ψ(a, b) over lesions × negatives, with missing
/// marks at −∞ and ties counted ½.
fn kernel_sum<'a>(
    lesions: impl Iterator<Item = &'a Option<f64>>,
    maxima: impl Iterator<Item = &'a Option<f64>>,
) -> (f64, usize, usize) {
    let mut finite: Vec<f64> = Vec::new();
    let mut silent = 0usize;
    for b in maxima {
        match b {
            Some(x) => finite.push(*x),
            None => silent += 1,
        }
    }
    finite.sort_by(f64::total_cmp);
    let k2 = finite.len() + silent;
    let mut total = 0.0;
    let mut t = 0usize;
    for a in lesions {
        t += 1;
        total += match a {
            None => 0.5 * silent as f64,
            Some(y) => {
                let below = finite.partition_point(|&b| b < *y);
                let upto = finite.partition_point(|&b| b <= *y);
                silent as f64 + below as f64 + 0.5 * (upto - below) as f64
            }
        };
    }
    (total, t, k2)
}

fn check_shape(ds: &FrocDataset) -> Result<()> {
    if ds.k2() == 0 || ds.total_lesions() == 0 {
        return Err(FrocError::InvalidData(
            "empirical AFROC needs at least one negative subject and one lesion".into(),
        ));
    }
    Ok(())
}

/// Trapezoidal AFROC area, written as a two-sample rank statistic.
pub fn empirical_auc(ds: &FrocDataset) -> Result<f64> {
    check_shape(ds)?;
    let r = Ratings::of(ds);
    let (sum, t, k2) = kernel_sum(r.lesions.iter().flatten(), r.maxima.iter());
    Ok(sum / (t as f64 * k2 as f64))
}

pub fn empirical_curve(ds: &FrocDataset) -> Result<EmpiricalAfroc> {
    check_shape(ds)?;
    let r = Ratings::of(ds);
    let mut tp: Vec<f64> = r.lesions.iter().flatten().flatten().copied().collect();
    let mut fp: Vec<f64> = r.maxima.iter().flatten().copied().collect();
    tp.sort_by(|a, b| b.total_cmp(a));
    fp.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = tp.iter().chain(&fp).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let t = ds.total_lesions() as f64;
    let k2 = ds.k2() as f64;
    let points = thresholds
        .iter()
        .map(|&z| OperatingPoint {
            threshold: z,
            fpf: fp.partition_point(|&x| x >= z) as f64 / k2,
            llf: tp.partition_point(|&x| x >= z) as f64 / t,
        })
        .collect();
    Ok(EmpiricalAfroc {
        points,
        auc: empirical_auc(ds)?,
    })
}

/// Seed for bootstrap replicate `r`: one ChaCha stream per replicate.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Normal-approximation bootstrap interval for the empirical AUC.
///
/// Positives and negatives are resampled separately (K1 and K2 stay fixed),
/// whole subjects at a time. Replicate `r` draws from stream `r` of a ChaCha
/// generator keyed by `seed`, so results do not depend on thread count.
pub fn bootstrap_ci(ds: &FrocDataset, b: usize, alpha: f64, seed: u64) -> Result<IndexEstimate> {
    if b < MIN_BOOTSTRAP {
        return Err(FrocError::InvalidArgument(format!(
            "bootstrap needs B >= {MIN_BOOTSTRAP}, got {b}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FrocError::InvalidArgument(format!(
            "alpha {alpha} must lie in (0, 1)"
        )));
    }
    check_shape(ds)?;
    let ratings = Ratings::of(ds);
    let k1 = ratings.lesions.len();
    let k2 = ratings.maxima.len();
    let replicates: Vec<f64> = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let pos: Vec<usize> = (0..k1).map(|_| rng.random_range(0..k1)).collect();
            let neg: Vec<usize> = (0..k2).map(|_| rng.random_range(0..k2)).collect();
            let (sum, t, k2) = kernel_sum(
                pos.iter().flat_map(|&i| ratings.lesions[i].iter()),
                neg.iter().map(|&j| &ratings.maxima[j]),
            );
            sum / (t as f64 * k2 as f64)
        })
        .collect();
    let mean = replicates.iter().sum::<f64>() / b as f64;
    let var = replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    let se = var.sqrt();
    let value = empirical_auc(ds)?;
    let z = std_normal_quantile(1.0 - alpha / 2.0);
    Ok(IndexEstimate {
        name: "empirical_auc".into(),
        value,
        stderr: se,
        ci_low: value - z * se,
        ci_high: value + z * se,
        alpha,
    })
}
