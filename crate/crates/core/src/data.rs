//! FROC datasets: subjects, lesions and adjudicated TP/FP marks.
//!
//! Files come in pairs. The subjects table has header
//! `subject_id,status,n_lesions` with `status` in `{pos, neg}`; the marks
//! table has header `subject_id,kind,lesion_index,score` with `kind` in
//! `{tp, fp}` and an empty `lesion_index` on FP rows. When a lesion carries
//! several TP marks only the highest score is kept.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FrocError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveSubject {
    pub id: String,
    pub lesion_count: usize,
    pub detected: Vec<bool>,
    /// One score per detected lesion, in lesion order.
    pub tp_scores: Vec<f64>,
    pub fp_scores: Vec<f64>,
}

impl PositiveSubject {
    pub fn new(
        id: impl Into<String>,
        detected: Vec<bool>,
        tp_scores: Vec<f64>,
        fp_scores: Vec<f64>,
    ) -> Result<Self> {
        let id = id.into();
        if detected.is_empty() {
            return Err(FrocError::InvalidData(format!(
                "positive subject '{id}' must have at least one lesion"
            )));
        }
        let hits = detected.iter().filter(|&&d| d).count();
        if hits != tp_scores.len() {
            return Err(FrocError::InvalidData(format!(
                "positive subject '{id}': {hits} detected lesions but {} TP scores",
                tp_scores.len()
            )));
        }
        check_finite(&id, &tp_scores)?;
        check_finite(&id, &fp_scores)?;
        Ok(PositiveSubject {
            lesion_count: detected.len(),
            id,
            detected,
            tp_scores,
            fp_scores,
        })
    }

    pub fn detected_count(&self) -> usize {
        self.tp_scores.len()
    }

    /// Per-lesion score, `None` for missed lesions.
    pub fn lesion_scores(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        let mut tp = self.tp_scores.iter();
        self.detected
            .iter()
            .map(move |&d| if d { tp.next().copied() } else { None })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSubject {
    pub id: String,
    pub fp_scores: Vec<f64>,
}

impl NegativeSubject {
    pub fn new(id: impl Into<String>, fp_scores: Vec<f64>) -> Result<Self> {
        let id = id.into();
        check_finite(&id, &fp_scores)?;
        Ok(NegativeSubject { id, fp_scores })
    }

    pub fn max_score(&self) -> Option<f64> {
        self.fp_scores.iter().copied().reduce(f64::max)
    }
}

fn check_finite(id: &str, scores: &[f64]) -> Result<()> {
    match scores.iter().find(|s| !s.is_finite()) {
        Some(s) => Err(FrocError::InvalidData(format!(
            "subject '{id}' has non-finite score {s}"
        ))),
        None => Ok(()),
    }
}

/// Immutable once built; subject order follows the input files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrocDataset {
    pub positives: Vec<PositiveSubject>,
    pub negatives: Vec<NegativeSubject>,
}

impl FrocDataset {
    pub fn new(positives: Vec<PositiveSubject>, negatives: Vec<NegativeSubject>) -> Self {
        FrocDataset {
            positives,
            negatives,
        }
    }

    pub fn k1(&self) -> usize {
        self.positives.len()
    }

    pub fn k2(&self) -> usize {
        self.negatives.len()
    }

    pub fn total_lesions(&self) -> usize {
        self.positives.iter().map(|p| p.lesion_count).sum()
    }

    pub fn total_detected(&self) -> usize {
        self.positives.iter().map(|p| p.detected_count()).sum()
    }

    pub fn total_fp_negatives(&self) -> usize {
        self.negatives.iter().map(|n| n.fp_scores.len()).sum()
    }

    pub fn total_fp_positives(&self) -> usize {
        self.positives.iter().map(|p| p.fp_scores.len()).sum()
    }

    pub fn tp_scores(&self) -> Vec<f64> {
        self.positives
            .iter()
            .flat_map(|p| p.tp_scores.iter().copied())
            .collect()
    }

    pub fn fp_scores_negatives(&self) -> Vec<f64> {
        self.negatives
            .iter()
            .flat_map(|n| n.fp_scores.iter().copied())
            .collect()
    }

    pub fn fp_scores_positives(&self) -> Vec<f64> {
        self.positives
            .iter()
            .flat_map(|p| p.fp_scores.iter().copied())
            .collect()
    }

    fn all_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.positives
            .iter()
            .flat_map(|p| p.tp_scores.iter().chain(&p.fp_scores))
            .chain(self.negatives.iter().flat_map(|n| n.fp_scores.iter()))
            .copied()
    }

    pub fn score_count(&self) -> usize {
        self.total_detected() + self.total_fp_negatives() + self.total_fp_positives()
    }

    /// Applies `f` to every TP and FP score, keeping the structure.
    pub fn map_scores<F: Fn(f64) -> f64>(&self, f: F) -> FrocDataset {
        FrocDataset {
            positives: self
                .positives
                .iter()
                .map(|p| PositiveSubject {
                    tp_scores: p.tp_scores.iter().map(|&x| f(x)).collect(),
                    fp_scores: p.fp_scores.iter().map(|&x| f(x)).collect(),
                    ..p.clone()
                })
                .collect(),
            negatives: self
                .negatives
                .iter()
                .map(|n| NegativeSubject {
                    id: n.id.clone(),
                    fp_scores: n.fp_scores.iter().map(|&x| f(x)).collect(),
                })
                .collect(),
        }
    }

    pub fn from_paths(subjects: impl AsRef<Path>, marks: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::File::open(subjects.as_ref()).map_err(|e| {
            FrocError::InvalidData(format!(
                "cannot open subjects file {}: {e}",
                subjects.as_ref().display()
            ))
        })?;
        let m = std::fs::File::open(marks.as_ref()).map_err(|e| {
            FrocError::InvalidData(format!(
                "cannot open marks file {}: {e}",
                marks.as_ref().display()
            ))
        })?;
        parse_dataset(s, m)
    }
}

enum Pending {
    Positive {
        id: String,
        lesions: Vec<Option<f64>>,
        fp: Vec<f64>,
    },
    Negative {
        id: String,
        fp: Vec<f64>,
    },
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &str, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| csv_error(file, e))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(FrocError::Parse {
            file: file.into(),
            line: 1,
            message: format!(
                "expected header '{}', got '{}'",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn csv_error(file: &str, e: csv::Error) -> FrocError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    FrocError::Parse {
        file: file.into(),
        line,
        message: e.to_string(),
    }
}

/// Parses the subjects and marks tables into a dataset.
pub fn parse_dataset<S: Read, M: Read>(subjects: S, marks: M) -> Result<FrocDataset> {
    const SUBJECTS: &str = "subjects";
    const MARKS: &str = "marks";
    let perr = |file: &str, line: u64, message: String| FrocError::Parse {
        file: file.into(),
        line,
        message,
    };

    let mut rdr = reader(subjects);
    check_header(&mut rdr, SUBJECTS, &["subject_id", "status", "n_lesions"])?;
    let mut pending: Vec<Pending> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(SUBJECTS, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(perr(SUBJECTS, line, "empty subject_id".into()));
        }
        let n_lesions: usize = rec[2].parse().map_err(|_| {
            perr(
                SUBJECTS,
                line,
                format!("n_lesions '{}' is not a nonnegative integer", &rec[2]),
            )
        })?;
        let entry = match &rec[1] {
            "pos" => {
                if n_lesions == 0 {
                    return Err(perr(
                        SUBJECTS,
                        line,
                        format!("positive subject '{id}' must have n_lesions >= 1"),
                    ));
                }
                Pending::Positive {
                    id: id.clone(),
                    lesions: vec![None; n_lesions],
                    fp: Vec::new(),
                }
            }
            "neg" => {
                if n_lesions != 0 {
                    return Err(perr(
                        SUBJECTS,
                        line,
                        format!("negative subject '{id}' must have n_lesions = 0"),
                    ));
                }
                Pending::Negative {
                    id: id.clone(),
                    fp: Vec::new(),
                }
            }
            other => {
                return Err(perr(
                    SUBJECTS,
                    line,
                    format!("status '{other}' must be 'pos' or 'neg'"),
                ))
            }
        };
        if index.insert(id.clone(), pending.len()).is_some() {
            return Err(perr(SUBJECTS, line, format!("duplicate subject id '{id}'")));
        }
        pending.push(entry);
    }

    let mut rdr = reader(marks);
    check_header(
        &mut rdr,
        MARKS,
        &["subject_id", "kind", "lesion_index", "score"],
    )?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(MARKS, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let id = &rec[0];
        let slot = *index
            .get(id)
            .ok_or_else(|| perr(MARKS, line, format!("unknown subject id '{id}'")))?;
        let score: f64 = rec[3]
            .parse()
            .map_err(|_| perr(MARKS, line, format!("score '{}' is not numeric", &rec[3])))?;
        if !score.is_finite() {
            return Err(perr(
                MARKS,
                line,
                format!("score '{}' is not finite", &rec[3]),
            ));
        }
        match (&rec[1], &mut pending[slot]) {
            ("tp", Pending::Negative { .. }) => {
                return Err(perr(
                    MARKS,
                    line,
                    format!("TP mark on negative subject '{id}'"),
                ));
            }
            ("tp", Pending::Positive { lesions, .. }) => {
                let t = lesions.len();
                let li: usize = rec[2].parse().map_err(|_| {
                    perr(
                        MARKS,
                        line,
                        format!("lesion_index '{}' is not an integer", &rec[2]),
                    )
                })?;
                if li == 0 || li > t {
                    return Err(perr(
                        MARKS,
                        line,
                        format!("lesion_index {li} outside 1..{t} for subject '{id}'"),
                    ));
                }
                let cell = &mut lesions[li - 1];
                *cell = Some(cell.map_or(score, |s: f64| s.max(score)));
            }
            ("fp", target) => {
                if !rec[2].is_empty() {
                    return Err(perr(
                        MARKS,
                        line,
                        "lesion_index must be empty for fp rows".into(),
                    ));
                }
                match target {
                    Pending::Positive { fp, .. } | Pending::Negative { fp, .. } => fp.push(score),
                }
            }
            (other, _) => {
                return Err(perr(
                    MARKS,
                    line,
                    format!("kind '{other}' must be 'tp' or 'fp'"),
                ));
            }
        }
    }

    let mut ds = FrocDataset::default();
    for p in pending {
        match p {
            Pending::Positive { id, lesions, fp } => {
                let detected = lesions.iter().map(Option::is_some).collect();
                let tp = lesions.into_iter().flatten().collect();
                ds.positives
                    .push(PositiveSubject::new(id, detected, tp, fp)?);
            }
            Pending::Negative { id, fp } => ds.negatives.push(NegativeSubject::new(id, fp)?),
        }
    }
    Ok(ds)
}

/// Writes the subjects table. Positives come first, then negatives.
pub fn write_subjects<W: Write>(ds: &FrocDataset, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let map = |e: csv::Error| FrocError::Io(std::io::Error::other(e));
    wtr.write_record(["subject_id", "status", "n_lesions"])
        .map_err(map)?;
    for p in &ds.positives {
        wtr.write_record([p.id.as_str(), "pos", &p.lesion_count.to_string()])
            .map_err(map)?;
    }
    for n in &ds.negatives {
        wtr.write_record([n.id.as_str(), "neg", "0"]).map_err(map)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_marks<W: Write>(ds: &FrocDataset, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let map = |e: csv::Error| FrocError::Io(std::io::Error::other(e));
    wtr.write_record(["subject_id", "kind", "lesion_index", "score"])
        .map_err(map)?;
    for p in &ds.positives {
        for (s, score) in p.lesion_scores().enumerate() {
            if let Some(y) = score {
                wtr.write_record([p.id.as_str(), "tp", &(s + 1).to_string(), &y.to_string()])
                    .map_err(map)?;
            }
        }
        for x in &p.fp_scores {
            wtr.write_record([p.id.as_str(), "fp", "", &x.to_string()])
                .map_err(map)?;
        }
    }
    for n in &ds.negatives {
        for x in &n.fp_scores {
            wtr.write_record([n.id.as_str(), "fp", "", &x.to_string()])
                .map_err(map)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_fit_ready(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Lists every reason the dataset cannot be fitted.
pub fn validate(ds: &FrocDataset) -> ValidationReport {
    let mut issues = Vec::new();
    if ds.k1() == 0 {
        issues.push("no positive subjects".to_string());
    }
    if ds.k2() == 0 {
        issues.push("no negative subjects".to_string());
    }
    for p in &ds.positives {
        if p.lesion_count == 0 {
            issues.push(format!("positive subject '{}' has no lesions", p.id));
        }
    }
    let detected = ds.total_detected();
    if detected < 2 {
        issues.push(format!(
            "only {detected} TP scores; TP score distribution (θ1) unfittable"
        ));
    }
    let fp = ds.total_fp_negatives();
    if fp == 0 {
        issues.push("no FP scores on negatives; F_θ2 unfittable".to_string());
    } else if fp < 2 {
        issues.push(format!("only {fp} FP score on negatives; F_θ2 unfittable"));
    }
    if ds.all_scores().any(|s| !s.is_finite()) {
        issues.push("non-finite scores present".to_string());
    }
    ValidationReport { issues }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub k1: usize,
    pub k2: usize,
    pub total_lesions: usize,
    pub tp_marks: usize,
    pub fp_on_positives: usize,
    pub fp_on_negatives: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_lesions_per_positive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_fp_per_positive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_fp_per_negative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction_negatives_without_fp: Option<f64>,
}

pub fn summary_stats(ds: &FrocDataset) -> SummaryStats {
    let k1 = ds.k1();
    let k2 = ds.k2();
    let per = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let fp_on_positives = ds.total_fp_positives();
    let fp_on_negatives = ds.total_fp_negatives();
    let empty_negatives = ds
        .negatives
        .iter()
        .filter(|n| n.fp_scores.is_empty())
        .count();
    SummaryStats {
        k1,
        k2,
        total_lesions: ds.total_lesions(),
        tp_marks: ds.total_detected(),
        fp_on_positives,
        fp_on_negatives,
        mean_lesions_per_positive: per(ds.total_lesions(), k1),
        mean_fp_per_positive: per(fp_on_positives, k1),
        mean_fp_per_negative: per(fp_on_negatives, k2),
        fraction_negatives_without_fp: per(empty_negatives, k2),
    }
}

/// Strictly increasing score maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreMap {
    /// `a·x + b`, requires `a > 0`.
    Affine { a: f64, b: f64 },
    /// Min-max over every observed score onto [0, 1].
    MinMax,
    /// Natural log; every score must be positive.
    Log,
    /// `x ← (x·(n−1) + 0.5)/n` with `n` the total number of scores, pulling
    /// values in [0, 1] strictly inside the interval.
    ShrinkUnit,
}

pub fn rescale_scores(ds: &FrocDataset, map: ScoreMap) -> Result<FrocDataset> {
    match map {
        ScoreMap::Affine { a, b } => {
            if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
                return Err(FrocError::InvalidArgument(format!(
                    "affine map needs finite a > 0 to be strictly increasing, got a = {a}"
                )));
            }
            Ok(ds.map_scores(|x| a * x + b))
        }
        ScoreMap::MinMax => {
            let (lo, hi) = ds
                .all_scores()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
            if !(hi > lo) {
                return Err(FrocError::InvalidArgument(
                    "min-max rescaling needs at least two distinct scores".into(),
                ));
            }
            let span = hi - lo;
            Ok(ds.map_scores(|x| (x - lo) / span))
        }
        ScoreMap::Log => {
            if let Some(x) = ds.all_scores().find(|&x| x <= 0.0) {
                return Err(FrocError::InvalidArgument(format!(
                    "log map applied to nonpositive score {x}"
                )));
            }
            Ok(ds.map_scores(f64::ln))
        }
        ScoreMap::ShrinkUnit => {
            if let Some(x) = ds.all_scores().find(|x| !(0.0..=1.0).contains(x)) {
                return Err(FrocError::InvalidArgument(format!(
                    "shrink map needs scores in [0, 1], found {x}"
                )));
            }
            let n = ds.score_count().max(2);
            Ok(ds.map_scores(|x| crate::distributions::shrink_unit_interval(x, n)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(subjects: &str, marks: &str) -> Result<FrocDataset> {
        parse_dataset(subjects.as_bytes(), marks.as_bytes())
    }

    const SUBJ: &str = "subject_id,status,n_lesions\ns1,pos,1\ns2,neg,0\n";

    #[test]
    fn minimal_dataset() {
        let ds = parse(SUBJ, "subject_id,kind,lesion_index,score\ns1,tp,1,0.9\n").unwrap();
        assert_eq!(ds.k1(), 1);
        assert_eq!(ds.k2(), 1);
        assert_eq!(ds.positives[0].detected, vec![true]);
        assert_eq!(ds.positives[0].tp_scores, vec![0.9]);
        assert!(ds.negatives[0].fp_scores.is_empty());
        let s = summary_stats(&ds);
        assert_eq!((s.k1, s.k2, s.total_lesions, s.tp_marks), (1, 1, 1, 1));
    }

    #[test]
    fn tp_on_negative_rejected() {
        let err = parse(SUBJ, "subject_id,kind,lesion_index,score\ns2,tp,1,0.8\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("TP mark on negative subject"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn duplicate_tp_keeps_max() {
        let ds = parse(
            SUBJ,
            "subject_id,kind,lesion_index,score\ns1,tp,1,0.6\ns1,tp,1,0.8\n",
        )
        .unwrap();
        assert_eq!(ds.positives[0].tp_scores, vec![0.8]);
        let ds = parse(
            SUBJ,
            "subject_id,kind,lesion_index,score\ns1,tp,1,0.8\ns1,tp,1,0.6\n",
        )
        .unwrap();
        assert_eq!(ds.positives[0].tp_scores, vec![0.8]);
    }

    #[test]
    fn parse_errors_are_line_numbered() {
        let marks = "subject_id,kind,lesion_index,score\ns1,tp,1,0.9\nzz,fp,,0.1\n";
        let e = parse(SUBJ, marks).unwrap_err().to_string();
        assert!(
            e.contains("line 3") && e.contains("unknown subject id"),
            "{e}"
        );

        let e = parse(SUBJ, "subject_id,kind,lesion_index,score\ns1,tp,2,0.9\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("lesion_index 2 outside 1..1"), "{e}");

        let e = parse(SUBJ, "subject_id,kind,lesion_index,score\ns1,fp,,abc\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("not numeric"), "{e}");

        let e = parse(
            "subject_id,status,n_lesions\ns1,pos,1\ns1,neg,0\n",
            "subject_id,kind,lesion_index,score\n",
        )
        .unwrap_err()
        .to_string();
        assert!(
            e.contains("duplicate subject id") && e.contains("line 3"),
            "{e}"
        );

        let e = parse(
            "subject_id,status,n_lesions\ns2,neg,3\n",
            "subject_id,kind,lesion_index,score\n",
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("n_lesions = 0"), "{e}");

        let e = parse("id,status,n\n", "subject_id,kind,lesion_index,score\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("expected header"), "{e}");
    }

    #[test]
    fn crlf_accepted() {
        let ds = parse(
            "subject_id,status,n_lesions\r\ns1,pos,2\r\ns2,neg,0\r\n",
            "subject_id,kind,lesion_index,score\r\ns1,tp,2,0.5\r\ns2,fp,,0.25\r\ns1,fp,,0.1\r\n",
        )
        .unwrap();
        assert_eq!(ds.positives[0].detected, vec![false, true]);
        assert_eq!(ds.positives[0].fp_scores, vec![0.1]);
        assert_eq!(ds.negatives[0].fp_scores, vec![0.25]);
    }

    #[test]
    fn validation_entries() {
        let ds = parse(SUBJ, "subject_id,kind,lesion_index,score\ns1,tp,1,0.9\n").unwrap();
        let r = validate(&ds);
        assert!(r
            .issues
            .iter()
            .any(|i| i == "no FP scores on negatives; F_θ2 unfittable"));

        let no_neg = FrocDataset::new(ds.positives.clone(), vec![]);
        assert!(validate(&no_neg)
            .issues
            .iter()
            .any(|i| i == "no negative subjects"));

        let good = FrocDataset::new(
            vec![PositiveSubject::new("a", vec![true, true], vec![1.0, 2.0], vec![]).unwrap()],
            vec![NegativeSubject::new("b", vec![0.1, 0.2]).unwrap()],
        );
        assert!(validate(&good).is_fit_ready());
    }

    #[test]
    fn summary_without_negatives() {
        let ds = FrocDataset::new(
            vec![PositiveSubject::new("a", vec![true, false], vec![1.0], vec![0.5]).unwrap()],
            vec![],
        );
        let s = summary_stats(&ds);
        assert_eq!(s.k2, 0);
        assert!(s.mean_fp_per_negative.is_none());
        assert!(s.fraction_negatives_without_fp.is_none());
        let json = serde_json::to_value(&s).unwrap();
        assert!(json.get("mean_fp_per_negative").is_none());
    }

    #[test]
    fn lesions_per_positive_matches_reported_cohort() {
        // 120 positives carrying 201 lesions in total
        let positives = (0..120)
            .map(|i| {
                let t = if i < 81 { 2 } else { 1 };
                PositiveSubject::new(format!("p{i}"), vec![false; t], vec![], vec![]).unwrap()
            })
            .collect();
        let s = summary_stats(&FrocDataset::new(positives, vec![]));
        assert_eq!(s.total_lesions, 201);
        assert!((s.mean_lesions_per_positive.unwrap() - 1.675).abs() < 1e-12);
    }

    #[test]
    fn rescale_examples() {
        let ds = FrocDataset::new(
            vec![PositiveSubject::new("a", vec![true], vec![1.0], vec![0.8]).unwrap()],
            vec![NegativeSubject::new("b", vec![0.75, 0.9]).unwrap()],
        );
        assert_eq!(
            rescale_scores(&ds, ScoreMap::Affine { a: 1.0, b: 0.0 }).unwrap(),
            ds
        );
        let mm = rescale_scores(&ds, ScoreMap::MinMax).unwrap();
        assert_eq!(mm.positives[0].tp_scores, vec![1.0]);
        assert_eq!(mm.negatives[0].fp_scores[0], 0.0);
        assert!((mm.positives[0].fp_scores[0] - 0.2).abs() < 1e-12);
        assert!(rescale_scores(&ds, ScoreMap::Affine { a: -1.0, b: 0.0 }).is_err());
        let neg = ds.map_scores(|x| x - 0.8);
        assert!(rescale_scores(&neg, ScoreMap::Log).is_err());
        let shrunk = rescale_scores(&mm, ScoreMap::ShrinkUnit).unwrap();
        assert!(shrunk.all_scores().all(|x| x > 0.0 && x < 1.0));
        assert!(rescale_scores(&ds.map_scores(|x| x * 2.0), ScoreMap::ShrinkUnit).is_err());
    }

    #[test]
    fn invariant_violations_rejected_at_construction() {
        assert!(PositiveSubject::new("a", vec![true], vec![], vec![]).is_err());
        assert!(PositiveSubject::new("a", vec![], vec![], vec![]).is_err());
        assert!(NegativeSubject::new("b", vec![f64::NAN]).is_err());
    }
}
