//! Property tests for the decision-layer invariants: threshold bands,
//! optimizer optimality, agreement tabulation, median robustness.

use std::collections::BTreeMap;

use proptest::prelude::*;

use voxscreen::classifier::{
    classify, evaluate, half_space_candidates, optimize_band, Deviation, FeatureKind,
    LabeledDeviation, Quality, ThresholdBand,
};
use voxscreen::features::median_f0;
use voxscreen::pitch::PitchTrack;
use voxscreen::{consensus_stats, flow_matrix, RaterVotes};

fn quality() -> impl Strategy<Value = Quality> {
    prop_oneof![Just(Quality::Good), Just(Quality::Bad)]
}

// Deviations on a dyadic lattice so translation arithmetic is exact.
fn lattice_value() -> impl Strategy<Value = f64> {
    (-400i32..400).prop_map(|i| i as f64 * 0.25)
}

fn labeled_deviations(max: usize) -> impl Strategy<Value = Vec<LabeledDeviation>> {
    prop::collection::vec(
        (lattice_value(), quality()).prop_map(|(d, label)| LabeledDeviation { d, label }),
        1..=max,
    )
}

fn exhaustive_best_accuracy(labeled: &[LabeledDeviation]) -> f64 {
    let neg: Vec<LabeledDeviation> = labeled.iter().copied().filter(|s| s.d < 0.0).collect();
    let pos: Vec<LabeledDeviation> = labeled.iter().copied().filter(|s| s.d > 0.0).collect();
    let mut best = 0usize;
    for t_neg in half_space_candidates(&neg) {
        for t_pos in half_space_candidates(&pos) {
            let band = ThresholdBand::new(FeatureKind::F0, t_neg.map(|m| -m), t_pos).unwrap();
            let correct = labeled
                .iter()
                .filter(|s| {
                    let dev = Deviation {
                        feature_kind: FeatureKind::F0,
                        d: s.d,
                    };
                    classify(dev, &band).unwrap() == s.label
                })
                .count();
            best = best.max(correct);
        }
    }
    best as f64 / labeled.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // 16-bit PCM survives an encode/decode round trip bit-exactly.
    #[test]
    fn wav_roundtrip_is_bit_exact(
        raw in prop::collection::vec(i16::MIN..=i16::MAX, 1..2000),
        rate in 4_000u32..96_000,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.wav");
        let samples: Vec<f64> = raw.iter().map(|&v| v as f64 / 32768.0).collect();
        let clip = voxscreen::AudioClip::from_samples(samples, rate).unwrap();
        voxscreen::encode_wav(&clip, &path).unwrap();
        let back = voxscreen::decode_wav(&path).unwrap();
        prop_assert_eq!(back.sample_rate_hz(), rate);
        prop_assert_eq!(back.samples(), clip.samples());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Widening either threshold may flip decisions Bad -> Good, never the
    // other way.
    #[test]
    fn band_monotonicity(
        ds in prop::collection::vec(-50.0f64..50.0, 1..40),
        t_neg in -20.0f64..-0.05,
        t_pos in 0.05f64..20.0,
        widen_neg in 0.0f64..30.0,
        widen_pos in 0.0f64..30.0,
        drop_neg in any::<bool>(),
        drop_pos in any::<bool>(),
    ) {
        let narrow = ThresholdBand::new(FeatureKind::F0, Some(t_neg), Some(t_pos)).unwrap();
        let wide = ThresholdBand::new(
            FeatureKind::F0,
            if drop_neg { None } else { Some(t_neg - widen_neg) },
            if drop_pos { None } else { Some(t_pos + widen_pos) },
        )
        .unwrap();
        for d in ds {
            let dev = Deviation { feature_kind: FeatureKind::F0, d };
            let before = classify(dev, &narrow).unwrap();
            let after = classify(dev, &wide).unwrap();
            if before == Quality::Good {
                prop_assert_eq!(after, Quality::Good);
            }
        }
    }

    // The half-space optimizer matches exhaustive search over all
    // candidate threshold pairs.
    #[test]
    fn optimizer_matches_exhaustive_search(labeled in labeled_deviations(25)) {
        let fit = optimize_band(&labeled, FeatureKind::F0).unwrap();
        let oracle = exhaustive_best_accuracy(&labeled);
        prop_assert!(
            (fit.train_accuracy - oracle).abs() < 1e-12,
            "optimizer {} vs exhaustive {}", fit.train_accuracy, oracle
        );
    }

    // Adding a constant to every X and Y leaves deviations, the fitted
    // band, and all decisions unchanged. Lattice inputs keep f64
    // subtraction exact.
    #[test]
    fn translation_equivariance(
        xs in prop::collection::vec(lattice_value(), 1..25),
        labels in prop::collection::vec(quality(), 25),
        deltas in prop::collection::vec(lattice_value(), 25),
        shift in (-2000i32..2000).prop_map(|i| i as f64 * 0.25),
    ) {
        let labeled: Vec<LabeledDeviation> = xs
            .iter()
            .zip(&deltas)
            .zip(&labels)
            .map(|((&x, &delta), &label)| {
                let y = x + delta;
                LabeledDeviation { d: y - x, label }
            })
            .collect();
        let translated: Vec<LabeledDeviation> = xs
            .iter()
            .zip(&deltas)
            .zip(&labels)
            .map(|((&x, &delta), &label)| {
                let y = x + delta;
                LabeledDeviation { d: (y + shift) - (x + shift), label }
            })
            .collect();

        for (a, b) in labeled.iter().zip(&translated) {
            prop_assert_eq!(a.d, b.d);
        }
        let fit_a = optimize_band(&labeled, FeatureKind::F0).unwrap();
        let fit_b = optimize_band(&translated, FeatureKind::F0).unwrap();
        prop_assert_eq!(fit_a.band, fit_b.band);
        prop_assert_eq!(fit_a.train_accuracy, fit_b.train_accuracy);
    }

    // Mirroring the geometry (d -> -d) swaps the roles of the two
    // thresholds.
    #[test]
    fn mirror_symmetry(labeled in labeled_deviations(25)) {
        let mirrored: Vec<LabeledDeviation> = labeled
            .iter()
            .map(|s| LabeledDeviation { d: -s.d, label: s.label })
            .collect();
        let fit = optimize_band(&labeled, FeatureKind::F0).unwrap();
        let fit_m = optimize_band(&mirrored, FeatureKind::F0).unwrap();
        prop_assert_eq!(fit.band.t_neg.map(|t| -t), fit_m.band.t_pos);
        prop_assert_eq!(fit.band.t_pos.map(|t| -t), fit_m.band.t_neg);
        prop_assert_eq!(fit.train_accuracy, fit_m.train_accuracy);
    }

    // Confusion counts always sum to N and the reported accuracy is
    // recomputable from them.
    #[test]
    fn confusion_totals_conserved(
        labeled in labeled_deviations(40),
        t_neg in -20.0f64..-0.05,
        t_pos in 0.05f64..20.0,
    ) {
        let band = ThresholdBand::new(FeatureKind::F0, Some(t_neg), Some(t_pos)).unwrap();
        let (cm, metrics) = evaluate(&labeled, &band).unwrap();
        prop_assert_eq!(cm.total() as usize, labeled.len());
        let recomputed = (cm.tp + cm.tn) as f64 / cm.total() as f64;
        prop_assert_eq!(metrics.accuracy, Some(recomputed));
    }

    // Corrupting fewer than half of the voiced frames cannot push the
    // median outside the range of the uncorrupted values.
    #[test]
    fn median_robust_to_minority_corruption(
        clean in prop::collection::vec(100.0f64..400.0, 3..40),
        corrupt in prop::collection::vec(75.0f64..600.0, 20),
        seed in any::<u64>(),
    ) {
        let n = clean.len();
        let k = ((n - 1) / 2).min(corrupt.len());
        let mut values = clean.clone();
        // Deterministic pseudo-shuffle of corruption positions.
        let mut pos: Vec<usize> = (0..n).collect();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            pos.swap(i, j);
        }
        for (slot, &c) in pos.iter().take(k).zip(&corrupt) {
            values[*slot] = c;
        }

        let track = PitchTrack::from_raw(
            (0..n).map(|i| i as f64 * 0.01).collect(),
            values,
            vec![0.9; n],
        );
        let median = median_f0(&track).unwrap();
        let lo = clean.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = clean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(median >= lo && median <= hi,
            "median {median} escaped [{lo}, {hi}] with {k}/{n} corrupted");
    }

    // Flow-matrix cells sum to N and the marginals match the standalone
    // per-classifier counts.
    #[test]
    fn flow_marginals_conserved(
        decisions in prop::collection::vec((quality(), quality()), 1..60),
    ) {
        let a: BTreeMap<String, Quality> = decisions
            .iter()
            .enumerate()
            .map(|(i, &(qa, _))| (format!("s{i:03}"), qa))
            .collect();
        let b: BTreeMap<String, Quality> = decisions
            .iter()
            .enumerate()
            .map(|(i, &(_, qb))| (format!("s{i:03}"), qb))
            .collect();
        let m = flow_matrix(&a, &b).unwrap();

        prop_assert_eq!(m.total() as usize, decisions.len());
        let a_good = a.values().filter(|&&q| q == Quality::Good).count() as u32;
        let b_good = b.values().filter(|&&q| q == Quality::Good).count() as u32;
        prop_assert_eq!(m.a_marginals(), (a_good, a.len() as u32 - a_good));
        prop_assert_eq!(m.b_marginals(), (b_good, b.len() as u32 - b_good));

        // Swapping the classifiers transposes the matrix.
        let t = flow_matrix(&b, &a).unwrap();
        prop_assert_eq!(t, m.transposed());
    }

    // Consensus tabulation ignores rater order and sample order.
    #[test]
    fn consensus_permutation_invariant(
        samples in prop::collection::vec(prop::collection::vec(quality(), 4), 1..30),
        seed in any::<u64>(),
    ) {
        let votes: Vec<RaterVotes> = samples
            .iter()
            .enumerate()
            .map(|(i, v)| RaterVotes { sample_id: format!("s{i:03}"), votes: v.clone() })
            .collect();

        let mut permuted = votes.clone();
        let mut state = seed | 1;
        for i in (1..permuted.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            permuted.swap(i, j);
        }
        for sample in permuted.iter_mut() {
            sample.votes.reverse();
        }

        let a = consensus_stats(&votes).unwrap();
        let b = consensus_stats(&permuted).unwrap();
        prop_assert_eq!(a.good, b.good);
        prop_assert_eq!(a.bad, b.bad);
        let mut ta = a.tied_sample_ids.clone();
        let mut tb = b.tied_sample_ids.clone();
        ta.sort();
        tb.sort();
        prop_assert_eq!(ta, tb);
    }
}
