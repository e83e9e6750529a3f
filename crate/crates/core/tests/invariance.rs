use froc_core::data::{
    parse_dataset, write_marks, write_subjects, FrocDataset, NegativeSubject, PositiveSubject,
};
use froc_core::distributions::{Family, ScoreDistribution};
use froc_core::empirical::{empirical_auc, empirical_curve};
use froc_core::indices::{afroc_curve, fpf_at, llf_at, llf_at_fpf, max_fpf, Index};
use froc_core::model::{fit, IdcaParams};
use froc_core::simulate::{generate_dataset, SimConfig};
use froc_core::AccuracyIndex;
use proptest::prelude::*;

/// Small studies on a coarse integer score grid, so ties are common.
fn small_study() -> impl Strategy<Value = FrocDataset> {
    let lesion = proptest::option::weighted(0.7, 0..6i32);
    let positive = (
        proptest::collection::vec(lesion, 1..4),
        proptest::collection::vec(0..6i32, 0..3),
    );
    let negative = proptest::collection::vec(0..6i32, 0..4);
    (
        proptest::collection::vec(positive, 1..7),
        proptest::collection::vec(negative, 1..7),
    )
        .prop_map(|(pos, neg)| {
            let positives = pos
                .into_iter()
                .enumerate()
                .map(|(i, (lesions, fp))| {
                    PositiveSubject::new(
                        format!("p{i}"),
                        lesions.iter().map(Option::is_some).collect(),
                        lesions.iter().flatten().map(|&y| y as f64).collect(),
                        fp.into_iter().map(f64::from).collect(),
                    )
                    .unwrap()
                })
                .collect();
            let negatives = neg
                .into_iter()
                .enumerate()
                .map(|(j, fp)| {
                    NegativeSubject::new(format!("n{j}"), fp.into_iter().map(f64::from).collect())
                        .unwrap()
                })
                .collect();
            FrocDataset::new(positives, negatives)
        })
}

/// Area under the empirical AFROC, built from scratch: operating points at
/// every observed threshold, joined to (0, 0) and (1, 1) by straight lines.
fn brute_force_area(ds: &FrocDataset) -> f64 {
    let lesions: Vec<Option<f64>> = ds
        .positives
        .iter()
        .flat_map(|p| p.lesion_scores().collect::<Vec<_>>())
        .collect();
    let maxima: Vec<Option<f64>> = ds
        .negatives
        .iter()
        .map(|n| n.fp_scores.iter().copied().reduce(f64::max))
        .collect();
    let mut cuts: Vec<f64> = lesions.iter().chain(&maxima).flatten().copied().collect();
    cuts.sort_by(|a, b| b.total_cmp(a));
    cuts.dedup();
    let mut pts = vec![(0.0, 0.0)];
    for z in cuts {
        let fpf = maxima.iter().filter(|m| m.is_some_and(|m| m >= z)).count() as f64
            / maxima.len() as f64;
        let llf = lesions.iter().filter(|y| y.is_some_and(|y| y >= z)).count() as f64
            / lesions.len() as f64;
        pts.push((fpf, llf));
    }
    pts.push((1.0, 1.0));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

fn model_params() -> impl Strategy<Value = IdcaParams> {
    (
        0.05..0.95f64,
        0.1..4.0f64,
        -2.0..3.0f64,
        0.3..2.5f64,
        -2.0..2.0f64,
        0.3..2.5f64,
    )
        .prop_map(|(p, lambda, m1, s1, m2, s2)| {
            IdcaParams::new(
                p,
                lambda,
                0.0,
                ScoreDistribution::normal(m1, s1).unwrap(),
                ScoreDistribution::normal(m2, s2).unwrap(),
                None,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn empirical_auc_is_the_trapezoid_area(ds in small_study()) {
        let auc = empirical_auc(&ds).unwrap();
        prop_assert!((auc - brute_force_area(&ds)).abs() < 1e-12);
        prop_assert!((empirical_curve(&ds).unwrap().trapezoid_area() - auc).abs() < 1e-12);
    }

    #[test]
    fn empirical_auc_depends_only_on_ranks(ds in small_study(), a in 0.01..50.0f64, b in -100.0..100.0f64) {
        let auc = empirical_auc(&ds).unwrap();
        for moved in [
            ds.map_scores(f64::exp),
            ds.map_scores(|x| (x - 2.5).powi(3)),
            ds.map_scores(|x| a * x + b),
        ] {
            prop_assert_eq!(empirical_auc(&moved).unwrap(), auc);
        }
    }

    #[test]
    fn dataset_survives_a_round_trip(ds in small_study()) {
        let mut subjects = Vec::new();
        let mut marks = Vec::new();
        write_subjects(&ds, &mut subjects).unwrap();
        write_marks(&ds, &mut marks).unwrap();
        let back = parse_dataset(subjects.as_slice(), marks.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn llf_consistent_across_parametrisations(params in model_params(), zeta in -4.0..5.0f64) {
        let q = fpf_at(&params, zeta);
        prop_assume!(q > 1e-6 && q < max_fpf(&params) - 1e-6);
        let via_q = llf_at_fpf(&params, q).unwrap();
        prop_assert!((via_q - llf_at(&params, zeta)).abs() < 1e-9);
    }

    #[test]
    fn model_curve_is_monotone(params in model_params()) {
        let curve = afroc_curve(&params, 101).unwrap();
        prop_assert!(curve.first().unwrap().fpf.abs() < 1e-12);
        // the curve stops at (1 − e^{−λ}, p); the closing segment is implied
        prop_assert!((curve.last().unwrap().fpf - max_fpf(&params)).abs() < 1e-15);
        prop_assert!((curve.last().unwrap().llf - params.p).abs() < 1e-9);
        for w in curve.windows(2) {
            prop_assert!(w[1].fpf >= w[0].fpf);
            prop_assert!(w[1].llf >= w[0].llf - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fitted_indices_are_affine_invariant(seed in 0u64..1000, a in 0.05..20.0f64, b in -50.0..50.0f64) {
        let mut cfg = SimConfig::scenario(1.0, 0.8, 0.0, 60, 1);
        cfg.master_seed = seed;
        let ds = generate_dataset(&cfg, 0).unwrap();
        let base = fit(&ds, Family::Normal, Family::Normal).unwrap();
        let moved = fit(&ds.map_scores(|x| a * x + b), Family::Normal, Family::Normal).unwrap();
        for index in [Index::Auc, Index::LlfAtFpf(0.1), Index::LlfAtFpf(0.4)] {
            let x = index.evaluate(&base.params).unwrap();
            let y = index.evaluate(&moved.params).unwrap();
            prop_assert!((x - y).abs() < 1e-8, "{:?}: {} vs {}", index, x, y);
        }
    }
}
