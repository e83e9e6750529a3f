//! Synthetic FROC studies and confidence-interval coverage experiments.
//!
//! Data follow the IDCA model with normal scores, optionally with a
//! per-subject random effect shifting every score on that subject. Each
//! replication owns a ChaCha stream keyed by the master seed, so results are
//! identical regardless of the rayon thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FrocDataset, NegativeSubject, PositiveSubject};
use crate::distributions::{Family, ScoreDistribution};
use crate::empirical::{bootstrap_ci, replicate_rng};
use crate::error::{FrocError, Result};
use crate::indices::{afroc_auc, ci_index, llf_at_fpf, Index, IndexEstimate};
use crate::model::{fit, IdcaParams};

/// Largest tolerated fraction of failed replications.
pub const MAX_FAILURE_RATE: f64 = 0.05;
/// Required Monte Carlo standard error of the truth oracle.
pub const ORACLE_SE_TARGET: f64 = 2e-4;
pub const DEFAULT_ORACLE_DRAWS: usize = 10_000_000;

const TAG_DATA: u64 = 0x6461_7461;
const TAG_BOOT: u64 = 0x626f_6f74;
const TAG_ORACLE: u64 = 0x6f72_636c;
const ORACLE_CHUNK: usize = 100_000;

/// splitmix64 finaliser, used to derive independent seeds from one master seed.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn default_lesions() -> usize {
    2
}
fn default_mu1() -> f64 {
    2.0
}
fn default_mu2() -> f64 {
    1.0
}
fn default_one() -> f64 {
    1.0
}
fn default_q() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    0.05
}
fn default_bootstrap() -> usize {
    500
}
fn default_oracle_draws() -> usize {
    DEFAULT_ORACLE_DRAWS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_pos: usize,
    pub n_neg: usize,
    #[serde(default = "default_lesions")]
    pub lesions_per_subject: usize,
    pub p0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub lambda2: f64,
    #[serde(default = "default_mu1")]
    pub mu1: f64,
    #[serde(default = "default_mu2")]
    pub mu2: f64,
    #[serde(default = "default_one")]
    pub sigma1: f64,
    #[serde(default = "default_one")]
    pub sigma2: f64,
    #[serde(default)]
    pub sigma01: f64,
    #[serde(default)]
    pub sigma02: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_reps: usize,
    #[serde(default = "default_oracle_draws")]
    pub oracle_draws: usize,
}

impl SimConfig {
    /// A scenario with the normal score laws N(2, 1) / N(1, 1) and two lesions per positive.
    pub fn scenario(lambda: f64, p0: f64, sigma0: f64, n: usize, replications: usize) -> Self {
        SimConfig {
            n_pos: n,
            n_neg: n,
            lesions_per_subject: 2,
            p0,
            lambda,
            lambda2: 0.0,
            mu1: 2.0,
            mu2: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            sigma01: sigma0,
            sigma02: sigma0,
            q: 0.1,
            replications,
            alpha: 0.05,
            master_seed: 1,
            bootstrap_reps: 500,
            oracle_draws: DEFAULT_ORACLE_DRAWS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FrocError::InvalidArgument(m));
        if self.n_pos == 0 || self.n_neg == 0 || self.lesions_per_subject == 0 {
            return bad("n_pos, n_neg and lesions_per_subject must be positive".into());
        }
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return bad(format!("p0 = {} outside (0, 1)", self.p0));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda = {} must be positive", self.lambda));
        }
        if !(self.lambda2 >= 0.0) || !self.lambda2.is_finite() {
            return bad(format!("lambda2 = {} must be nonnegative", self.lambda2));
        }
        if !(self.sigma1 > 0.0 && self.sigma2 > 0.0) {
            return bad("sigma1 and sigma2 must be positive".into());
        }
        if !(self.sigma01 >= 0.0 && self.sigma02 >= 0.0) {
            return bad("random-effect SDs must be nonnegative".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if !self.mu1.is_finite() || !self.mu2.is_finite() {
            return bad("score means must be finite".into());
        }
        Ok(())
    }

    pub fn correlated(&self) -> bool {
        self.sigma01 > 0.0 || self.sigma02 > 0.0
    }

    /// Model parameters implied by the configuration when there is no random effect.
    pub fn model_params(&self) -> Result<IdcaParams> {
        IdcaParams::new(
            self.p0,
            self.lambda,
            self.lambda2,
            ScoreDistribution::normal(self.mu1, self.sigma1)?,
            ScoreDistribution::normal(self.mu2, self.sigma2)?,
            None,
        )
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn poisson<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d: Poisson<f64> = Poisson::new(mean).expect("positive mean");
    d.sample(rng) as usize
}

/// Draws replication `rep` of the scenario.
pub fn generate_dataset(cfg: &SimConfig, rep: u64) -> Result<FrocDataset> {
    cfg.validate()?;
    let mut rng = replicate_rng(derive_seed(cfg.master_seed, TAG_DATA), rep);
    Ok(draw_dataset(cfg, &mut rng))
}

fn draw_dataset(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> FrocDataset {
    let mut positives = Vec::with_capacity(cfg.n_pos);
    for i in 0..cfg.n_pos {
        let tp_effect = cfg.sigma01 * normal(rng);
        let mut detected = Vec::with_capacity(cfg.lesions_per_subject);
        let mut tp = Vec::new();
        for _ in 0..cfg.lesions_per_subject {
            let hit = rng.random::<f64>() < cfg.p0;
            detected.push(hit);
            if hit {
                tp.push(cfg.mu1 + tp_effect + cfg.sigma1 * normal(rng));
            }
        }
        let n = poisson(rng, cfg.lambda2);
        let fp = if n > 0 {
            let fp_effect = cfg.sigma02 * normal(rng);
            (0..n)
                .map(|_| cfg.mu2 + fp_effect + cfg.sigma2 * normal(rng))
                .collect()
        } else {
            Vec::new()
        };
        positives.push(PositiveSubject {
            id: format!("p{i}"),
            lesion_count: cfg.lesions_per_subject,
            detected,
            tp_scores: tp,
            fp_scores: fp,
        });
    }
    let mut negatives = Vec::with_capacity(cfg.n_neg);
    for j in 0..cfg.n_neg {
        let effect = cfg.sigma02 * normal(rng);
        let m = poisson(rng, cfg.lambda);
        let fp = (0..m)
            .map(|_| cfg.mu2 + effect + cfg.sigma2 * normal(rng))
            .collect();
        negatives.push(NegativeSubject {
            id: format!("n{j}"),
            fp_scores: fp,
        });
    }
    FrocDataset::new(positives, negatives)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimIndex {
    Auc,
    LlfQ,
}

impl SimIndex {
    pub fn as_str(self) -> &'static str {
        match self {
            SimIndex::Auc => "auc",
            SimIndex::LlfQ => "llf_q",
        }
    }

    fn index(self, cfg: &SimConfig) -> Index {
        match self {
            SimIndex::Auc => Index::Auc,
            SimIndex::LlfQ => Index::LlfAtFpf(cfg.q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    Empirical,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrueValue {
    pub value: f64,
    /// Monte Carlo standard error; `None` when the value is exact.
    pub mc_se: Option<f64>,
    pub draws: usize,
}

/// Population value of an index under the scenario.
///
/// Without random effects this is the closed-form model value. With them the
/// scores within a subject are dependent, so the defining probabilities are
/// estimated by simulation: the AUC as the mean of the pairwise lesion versus
/// negative-subject kernel, and the LLF at FPF q by locating the empirical
/// threshold with FPF = q among simulated negatives and counting lesions above
/// it. Batches of `oracle_draws` are added until the standard error is below
/// [`ORACLE_SE_TARGET`] (at most eight batches).
pub fn true_index_value(cfg: &SimConfig, index: SimIndex) -> Result<TrueValue> {
    cfg.validate()?;
    if !cfg.correlated() {
        let params = cfg.model_params()?;
        let value = match index {
            SimIndex::Auc => afroc_auc(&params)?,
            SimIndex::LlfQ => llf_at_fpf(&params, cfg.q)?,
        };
        return Ok(TrueValue {
            value,
            mc_se: None,
            draws: 0,
        });
    }
    let draws = cfg.oracle_draws.max(ORACLE_CHUNK);
    let mut estimates = Vec::new();
    let mut variances = Vec::new();
    for batch in 0..8u64 {
        let (v, var) = match index {
            SimIndex::Auc => oracle_auc_batch(cfg, draws, batch),
            SimIndex::LlfQ => oracle_llf_batch(cfg, draws, batch)?,
        };
        estimates.push(v);
        variances.push(var);
        let k = estimates.len() as f64;
        let se = (variances.iter().sum::<f64>()).sqrt() / k;
        if se < ORACLE_SE_TARGET {
            break;
        }
    }
    let k = estimates.len() as f64;
    Ok(TrueValue {
        value: estimates.iter().sum::<f64>() / k,
        mc_se: Some(variances.iter().sum::<f64>().sqrt() / k),
        draws: draws * estimates.len(),
    })
}

fn oracle_rng(cfg: &SimConfig, batch: u64, chunk: u64, salt: u64) -> ChaCha8Rng {
    let seed = derive_seed(derive_seed(cfg.master_seed, TAG_ORACLE ^ salt), batch);
    replicate_rng(seed, chunk)
}

fn draw_lesion(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Option<f64> {
    let effect = cfg.sigma01 * normal(rng);
    let hit = rng.random::<f64>() < cfg.p0;
    let y = cfg.mu1 + effect + cfg.sigma1 * normal(rng);
    hit.then_some(y)
}

fn draw_negative_max(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> f64 {
    let effect = cfg.sigma02 * normal(rng);
    let m = poisson(rng, cfg.lambda);
    (0..m)
        .map(|_| cfg.mu2 + effect + cfg.sigma2 * normal(rng))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Returns (estimate, variance of the estimate).
fn oracle_auc_batch(cfg: &SimConfig, draws: usize, batch: u64) -> (f64, f64) {
    let chunks = draws.div_ceil(ORACLE_CHUNK);
    let sums: Vec<(f64, f64, usize)> = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = oracle_rng(cfg, batch, c, 1);
            let n = ORACLE_CHUNK.min(draws - c as usize * ORACLE_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let a = draw_lesion(cfg, &mut rng).unwrap_or(f64::NEG_INFINITY);
                let b = draw_negative_max(cfg, &mut rng);
                let k = if a > b {
                    1.0
                } else if a == b {
                    0.5
                } else {
                    0.0
                };
                s += k;
                s2 += k * k;
            }
            (s, s2, n)
        })
        .collect();
    let (s, s2, n) = sums.iter().fold((0.0, 0.0, 0usize), |acc, x| {
        (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2)
    });
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) / nf;
    (mean, var)
}

fn oracle_llf_batch(cfg: &SimConfig, draws: usize, batch: u64) -> Result<(f64, f64)> {
    let q = cfg.q;
    let max = -(-cfg.lambda).exp_m1();
    if !(q > 0.0 && q < max) {
        return Err(FrocError::OutOfRange(format!(
            "FPF {q} not attainable: max FPF = {max:.6}"
        )));
    }
    let chunks = draws.div_ceil(ORACLE_CHUNK);
    let mut maxima: Vec<f64> = (0..chunks as u64)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = oracle_rng(cfg, batch, c, 2);
            let n = ORACLE_CHUNK.min(draws - c as usize * ORACLE_CHUNK);
            (0..n)
                .map(move |_| draw_negative_max(cfg, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect();
    let nf = maxima.len() as f64;
    // q·N negatives must exceed the threshold
    let k = ((q * nf).round() as usize).clamp(1, maxima.len() - 1);
    maxima.sort_unstable_by(|a, b| b.total_cmp(a));
    let zeta = 0.5 * (maxima[k - 1] + maxima[k]);
    let delta = 0.1 * cfg.sigma2;
    let fpf_at = |z: f64| maxima.partition_point(|&x| x > z) as f64 / nf;

    let counts: Vec<[usize; 3]> = (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = oracle_rng(cfg, batch, c, 3);
            let n = ORACLE_CHUNK.min(draws - c as usize * ORACLE_CHUNK);
            let mut acc = [0usize; 3];
            for _ in 0..n {
                if let Some(y) = draw_lesion(cfg, &mut rng) {
                    acc[0] += (y > zeta) as usize;
                    acc[1] += (y > zeta - delta) as usize;
                    acc[2] += (y > zeta + delta) as usize;
                }
            }
            acc
        })
        .collect();
    let tot = counts
        .iter()
        .fold([0usize; 3], |a, c| [a[0] + c[0], a[1] + c[1], a[2] + c[2]]);
    let llf = tot[0] as f64 / nf;
    let slope =
        (tot[1] as f64 - tot[2] as f64) / nf / (fpf_at(zeta - delta) - fpf_at(zeta + delta));
    let var = llf * (1.0 - llf) / nf + slope * slope * q * (1.0 - q) / nf;
    Ok((llf, var))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCell {
    pub method: Method,
    pub index: SimIndex,
    pub coverage: f64,
    pub mean_ci_length: f64,
    pub replications_used: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageResult {
    pub config: SimConfig,
    pub truths: Vec<(SimIndex, TrueValue)>,
    pub cells: Vec<CoverageCell>,
}

impl CoverageResult {
    pub fn cell(&self, method: Method, index: SimIndex) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.index == index)
    }
}

/// Runs `cfg.replications` simulated studies and scores each interval against
/// the population value of its index.
///
/// The empirical method covers the AUC only. A replication whose fit or
/// interval fails is excluded from that cell and counted as a failure.
pub fn coverage_experiment(
    cfg: &SimConfig,
    methods: &[Method],
    indices: &[SimIndex],
) -> Result<CoverageResult> {
    cfg.validate()?;
    if cfg.replications < 100 {
        return Err(FrocError::InvalidArgument(format!(
            "coverage experiments need at least 100 replications, got {}",
            cfg.replications
        )));
    }
    let mut pairs: Vec<(Method, SimIndex)> = Vec::new();
    for &m in methods {
        for &i in indices {
            if m == Method::Empirical && i == SimIndex::LlfQ {
                continue;
            }
            if !pairs.contains(&(m, i)) {
                pairs.push((m, i));
            }
        }
    }
    if pairs.is_empty() {
        return Err(FrocError::InvalidArgument(
            "no (method, index) combination to evaluate; the empirical method covers auc only"
                .into(),
        ));
    }
    let mut truths = Vec::new();
    for &(_, i) in &pairs {
        if !truths.iter().any(|(j, _)| *j == i) {
            truths.push((i, true_index_value(cfg, i)?));
        }
    }
    let boot_seed = derive_seed(cfg.master_seed, TAG_BOOT);

    let outcomes: Vec<Vec<Option<IndexEstimate>>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let ds = match generate_dataset(cfg, rep) {
                Ok(ds) => ds,
                Err(_) => return vec![None; pairs.len()],
            };
            let fitted = pairs
                .iter()
                .any(|(m, _)| *m == Method::Proposed)
                .then(|| fit(&ds, Family::Normal, Family::Normal).ok())
                .flatten();
            pairs
                .iter()
                .map(|&(m, i)| match m {
                    Method::Proposed => fitted
                        .as_ref()
                        .and_then(|f| ci_index(f, &i.index(cfg), cfg.alpha).ok()),
                    Method::Empirical => bootstrap_ci(
                        &ds,
                        cfg.bootstrap_reps,
                        cfg.alpha,
                        derive_seed(boot_seed, rep),
                    )
                    .ok(),
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(pairs.len());
    for (c, &(method, index)) in pairs.iter().enumerate() {
        let truth = truths.iter().find(|(i, _)| *i == index).unwrap().1.value;
        let mut used = 0usize;
        let mut covered = 0usize;
        let mut length = 0.0;
        for rep in &outcomes {
            if let Some(est) = &rep[c] {
                used += 1;
                covered += est.contains(truth) as usize;
                length += est.length();
            }
        }
        let failures = cfg.replications - used;
        if failures as f64 > MAX_FAILURE_RATE * cfg.replications as f64 {
            return Err(FrocError::IllPosed(format!(
                "{} / {} replications failed for {} {} (n = {}, m = {})",
                failures,
                cfg.replications,
                method.as_str(),
                index.as_str(),
                cfg.n_pos,
                cfg.n_neg
            )));
        }
        cells.push(CoverageCell {
            method,
            index,
            coverage: covered as f64 / used as f64,
            mean_ci_length: length / used as f64,
            replications_used: used,
            failures,
        });
    }
    Ok(CoverageResult {
        config: cfg.clone(),
        truths,
        cells,
    })
}

/// A grid of scenarios, as read from a JSON configuration file.
///
/// `sigma0` sets both random-effect SDs; `sizes` sets n = m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioGrid {
    pub lambda: Vec<f64>,
    pub p0: Vec<f64>,
    pub sigma0: Vec<f64>,
    pub sizes: Vec<usize>,
    pub lesions_per_subject: usize,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub q: f64,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub bootstrap: usize,
    pub oracle_draws: usize,
    pub methods: Vec<Method>,
    pub indices: Vec<SimIndex>,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        ScenarioGrid {
            lambda: vec![1.0],
            p0: vec![0.8],
            sigma0: vec![0.0],
            sizes: vec![100],
            lesions_per_subject: 2,
            lambda2: 0.0,
            mu1: 2.0,
            mu2: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            q: 0.1,
            replications: 2000,
            alpha: 0.05,
            seed: 1,
            bootstrap: 500,
            oracle_draws: DEFAULT_ORACLE_DRAWS,
            methods: vec![Method::Proposed, Method::Empirical],
            indices: vec![SimIndex::Auc],
        }
    }
}

impl ScenarioGrid {
    /// Scenarios in row order: λ, then p0, then σ0, then size.
    pub fn scenarios(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &lambda in &self.lambda {
            for &p0 in &self.p0 {
                for &s0 in &self.sigma0 {
                    for &n in &self.sizes {
                        out.push(SimConfig {
                            n_pos: n,
                            n_neg: n,
                            lesions_per_subject: self.lesions_per_subject,
                            p0,
                            lambda,
                            lambda2: self.lambda2,
                            mu1: self.mu1,
                            mu2: self.mu2,
                            sigma1: self.sigma1,
                            sigma2: self.sigma2,
                            sigma01: s0,
                            sigma02: s0,
                            q: self.q,
                            replications: self.replications,
                            alpha: self.alpha,
                            master_seed: derive_seed(self.seed, out.len() as u64),
                            bootstrap_reps: self.bootstrap,
                            oracle_draws: self.oracle_draws,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub lambda: f64,
    pub p0: f64,
    pub sigma01: f64,
    pub n: usize,
    pub coverage: f64,
    pub length: f64,
    pub method: Method,
    pub index: SimIndex,
}

pub fn run_grid(grid: &ScenarioGrid) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for cfg in grid.scenarios() {
        let res = coverage_experiment(&cfg, &grid.methods, &grid.indices)?;
        for cell in res.cells {
            rows.push(GridRow {
                lambda: cfg.lambda,
                p0: cfg.p0,
                sigma01: cfg.sigma01,
                n: cfg.n_pos,
                coverage: cell.coverage,
                length: cell.mean_ci_length,
                method: cell.method,
                index: cell.index,
            });
        }
    }
    Ok(rows)
}

pub fn write_grid_csv<W: std::io::Write>(rows: &[GridRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let map = |e: csv::Error| FrocError::Io(std::io::Error::other(e));
    wtr.write_record([
        "lambda", "p0", "sigma01", "n", "coverage", "length", "method", "index",
    ])
    .map_err(map)?;
    for r in rows {
        wtr.write_record([
            r.lambda.to_string(),
            r.p0.to_string(),
            r.sigma01.to_string(),
            r.n.to_string(),
            format!("{:.4}", r.coverage),
            format!("{:.4}", r.length),
            r.method.as_str().to_string(),
            r.index.as_str().to_string(),
        ])
        .map_err(map)?;
    }
    wtr.flush()?;
    Ok(())
}
