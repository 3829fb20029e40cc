use causal_scope::metrics::{aggregate, score_mask, BoundaryScore, MeanStd};
use proptest::prelude::*;

#[test]
fn perfect_and_inverted_masks() {
    let truth = [true, false, true, false];
    let s = score_mask(&truth, &truth).unwrap();
    assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
    let inverted: Vec<bool> = truth.iter().map(|t| !t).collect();
    let s = score_mask(&inverted, &truth).unwrap();
    assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
}

#[test]
fn one_false_positive_over_six() {
    let mut truth = vec![false; 20];
    truth[..6].iter_mut().for_each(|t| *t = true);
    let mut pred = truth.clone();
    pred[10] = true;
    let s = score_mask(&pred, &truth).unwrap();
    assert!((s.precision - 6.0 / 7.0).abs() < 1e-12);
    assert_eq!(s.recall, 1.0);
    assert!((s.f1 - 12.0 / 13.0).abs() < 1e-12);
    assert_eq!((s.true_positives, s.false_positives, s.false_negatives), (6, 1, 0));
}

#[test]
fn empty_masks() {
    let s = score_mask(&[false, false], &[true, false]).unwrap();
    assert_eq!((s.precision, s.recall, s.f1), (1.0, 0.0, 0.0));
    let s = score_mask(&[false, false], &[false, false]).unwrap();
    assert_eq!((s.precision, s.recall), (1.0, 1.0));
    assert!(score_mask(&[true], &[true, false]).is_err());
}

fn score(precision: f64) -> BoundaryScore {
    BoundaryScore { precision, recall: 1.0, f1: 1.0, true_positives: 0, false_positives: 0, false_negatives: 0 }
}

#[test]
fn summaries() {
    let one = aggregate(&[score(0.7)]).unwrap();
    assert_eq!((one.precision.mean, one.precision.std), (0.7, 0.0));
    let same = MeanStd::of(&[0.4, 0.4]).unwrap();
    assert_eq!(same.std, 0.0);
    let two = aggregate(&[score(1.0), score(0.8)]).unwrap();
    assert!((two.precision.mean - 0.9).abs() < 1e-12);
    assert!((two.precision.std - 0.02f64.sqrt()).abs() < 1e-12);
    assert!((two.precision.std - 0.141).abs() < 1e-3);
    assert_eq!(two.n, 2);
    assert!(aggregate(&[]).is_err());
}

proptest! {
    #[test]
    fn scores_are_permutation_invariant(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..64),
        shift in 0usize..64,
    ) {
        let pred: Vec<bool> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let a = score_mask(&pred, &truth).unwrap();
        let k = shift % pairs.len();
        let mut rp = pred.clone();
        let mut rt = truth.clone();
        rp.rotate_left(k);
        rt.rotate_left(k);
        rp.reverse();
        rt.reverse();
        prop_assert_eq!(a, score_mask(&rp, &rt).unwrap());
        for v in [a.precision, a.recall, a.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        // Swapping roles exchanges precision and recall when both are defined.
        let swapped = score_mask(&truth, &pred).unwrap();
        if a.true_positives > 0 {
            prop_assert_eq!(a.precision, swapped.recall);
            prop_assert_eq!(a.recall, swapped.precision);
            prop_assert!((a.f1 - swapped.f1).abs() < 1e-15);
        }
    }
}
