mod oracle;

use causal_scope::env::{DistractorLevel, EnvConfig};
use causal_scope::probe::{collect_pair, PolicyKind};
use causal_scope::seed;
use causal_scope::stats::{
    bh_adjust, binomial, delta_of_column, discover, for_each_combination, permutation_test,
    permutation_test_with, summary_delta, welch_t, PermutationStrategy, SummaryTable, TestConfig, TestKind, P_FLOOR,
};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normals(rng: &mut seed::Rng, n: usize, mean: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + z
        })
        .collect()
}

#[test]
fn delta_hand_examples() {
    let col = [0.0, 1.0, 3.0, 6.0, 10.0];
    assert!((delta_of_column(&col, 1).unwrap() - 2.5).abs() < 1e-10);
    assert!((delta_of_column(&col, 2).unwrap() - 5.0).abs() < 1e-10);
    assert!((oracle::delta(&col, 1) - 2.5).abs() < 1e-10);
    assert!((oracle::delta(&col, 2) - 5.0).abs() < 1e-10);
    assert_eq!(delta_of_column(&[4.2; 9], 3).unwrap(), 0.0);
    assert!(delta_of_column(&col, 0).is_err());
    assert!(delta_of_column(&col, 5).is_err());
}

#[test]
fn summary_delta_reads_the_right_column() {
    // Two interleaved columns: [0, 1, 3, 6, 10] and its negation times 2.
    let col = [0.0, 1.0, 3.0, 6.0, 10.0];
    let obs: Vec<f64> = col.iter().flat_map(|&v| [v, -2.0 * v]).collect();
    assert!((summary_delta(&obs, 2, 0, 1).unwrap() - 2.5).abs() < 1e-10);
    assert!((summary_delta(&obs, 2, 1, 2).unwrap() - 10.0).abs() < 1e-10);
    assert!(summary_delta(&obs, 3, 0, 1).is_err());
    assert!(summary_delta(&obs, 2, 2, 1).is_err());
}

#[test]
fn welch_identical_and_degenerate_samples() {
    let w = welch_t(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!((w.t, w.p), (0.0, 1.0));
    let w = welch_t(&[0.0; 4], &[1.0; 4]).unwrap();
    assert_eq!(w.p, P_FLOOR);
    assert_eq!(w.t, f64::NEG_INFINITY);
    assert_eq!(w.df, 6.0);
    let w = welch_t(&[2.0; 3], &[2.0; 5]).unwrap();
    assert_eq!((w.t, w.p), (0.0, 1.0));
    assert!(welch_t(&[1.0], &[1.0, 2.0]).is_err());
    assert!(welch_t(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
}

#[test]
fn welch_matches_textbook_formula() {
    let mut rng = seed::rng(42);
    for rep in 0..200 {
        let n1 = 2 + rep % 40;
        let n2 = 2 + (rep * 7) % 33;
        let shift = (rep % 5) as f64 * 0.3;
        let xs = normals(&mut rng, n1, 0.0);
        let ys: Vec<f64> = normals(&mut rng, n2, shift).into_iter().map(|v| v * 1.7).collect();
        let got = welch_t(&xs, &ys).unwrap();
        let (t, df, p) = oracle::welch(&xs, &ys);
        assert!((got.t - t).abs() <= 1e-10 * t.abs().max(1.0), "t {} vs {t}", got.t);
        assert!((got.df - df).abs() <= 1e-10 * df, "df {} vs {df}", got.df);
        assert!((got.p - p).abs() < 1e-10, "p {} vs {p}", got.p);
    }
}

#[test]
fn welch_power_and_size() {
    let mut rng = seed::rng(7);
    let (mut power, mut size) = (0, 0);
    for _ in 0..1000 {
        let xs = normals(&mut rng, 30, 0.0);
        if welch_t(&xs, &normals(&mut rng, 30, 1.0)).unwrap().p < 0.05 {
            power += 1;
        }
        if welch_t(&xs, &normals(&mut rng, 30, 0.0)).unwrap().p < 0.05 {
            size += 1;
        }
    }
    assert!(power >= 950, "power {power}/1000");
    assert!((30..=70).contains(&size), "size {size}/1000");
}

#[test]
fn permutation_all_equal_is_one() {
    let mut rng = seed::rng(0);
    assert_eq!(permutation_test(&[3.0; 5], &[3.0; 4], 200, &mut rng).unwrap(), 1.0);
}

#[test]
fn permutation_tiny_sample_matches_enumeration() {
    let (xs, ys) = ([1.0, 2.0], [3.0, 4.0]);
    let exact = oracle::permutation_exact(&xs, &ys);
    assert!((exact - 1.0 / 3.0).abs() < 1e-12);
    let mut rng = seed::rng(1);
    let auto = permutation_test(&xs, &ys, 1000, &mut rng).unwrap();
    assert!((auto - exact).abs() < 1e-12);
    let enumerated = permutation_test_with(&xs, &ys, 5, &mut rng, PermutationStrategy::Exhaustive).unwrap();
    assert!((enumerated - exact).abs() < 1e-12);
    // Monte-Carlo converges to the same value as B grows.
    let mc = permutation_test_with(&xs, &ys, 200_000, &mut rng, PermutationStrategy::MonteCarlo).unwrap();
    assert!((mc - exact).abs() < 0.005, "{mc}");
}

#[test]
fn permutation_matches_exhaustive_oracle_on_small_samples() {
    let mut rng = seed::rng(3);
    for n1 in 2..=4 {
        for n2 in 2..=4 {
            for _ in 0..20 {
                let xs: Vec<f64> = (0..n1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let ys: Vec<f64> = (0..n2).map(|_| rng.random_range(-1.0..3.0)).collect();
                let b = 999;
                let p = permutation_test(&xs, &ys, b, &mut rng).unwrap();
                let exact = oracle::permutation_exact(&xs, &ys);
                assert!((p - exact).abs() <= 1.0 / (b as f64 + 1.0), "{xs:?} {ys:?}: {p} vs {exact}");
            }
        }
    }
}

#[test]
fn permutation_null_type_one_rate() {
    let mut rng = seed::rng(11);
    let mut rejections = 0;
    for _ in 0..2000 {
        let xs = normals(&mut rng, 12, 0.0);
        let ys = normals(&mut rng, 12, 0.0);
        if permutation_test(&xs, &ys, 199, &mut rng).unwrap() <= 0.05 {
            rejections += 1;
        }
    }
    assert!(rejections as f64 / 2000.0 <= 0.06, "{rejections}/2000");
}

#[test]
fn combinations_are_complete() {
    let mut count = 0;
    for_each_combination(6, 3, |idx| {
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        count += 1;
    });
    assert_eq!(count, 20);
    assert_eq!(binomial(6, 3), 20);
    assert_eq!(binomial(160, 80) > 1 << 100, true);
    assert_eq!(binomial(3, 4), 0);
}

#[test]
fn bh_hand_examples() {
    let single = bh_adjust(&[0.03], 0.05).unwrap();
    assert!((single.adjusted[0] - 0.03).abs() < 1e-15);
    assert_eq!(single.reject, vec![true]);

    let four = bh_adjust(&[0.01, 0.02, 0.03, 0.04], 0.05).unwrap();
    for a in &four.adjusted {
        assert!((a - 0.04).abs() < 1e-10);
    }
    assert_eq!(oracle::bh_adjusted(&[0.01, 0.02, 0.03, 0.04]), four.adjusted);
    assert!(bh_adjust(&[0.5, 1.5], 0.05).is_err());
    assert!(bh_adjust(&[], 0.05).unwrap().adjusted.is_empty());
}

#[test]
fn bh_all_null_fdr() {
    // With every hypothesis null, FDR is the chance of any rejection.
    let mut rng = seed::rng(5);
    let mut any = 0;
    for _ in 0..2000 {
        let p: Vec<f64> = (0..120).map(|_| rng.random::<f64>()).collect();
        if bh_adjust(&p, 0.05).unwrap().reject.iter().any(|&r| r) {
            any += 1;
        }
    }
    assert!(any as f64 / 2000.0 <= 0.06, "{any}/2000");
}

fn p_values() -> impl Strategy<Value = Vec<f64>> {
    // Coarse grid values force ties.
    prop::collection::vec(prop_oneof![0.0f64..=1.0, (0u32..=20).prop_map(|k| k as f64 / 20.0)], 1..60)
}

proptest! {
    #[test]
    fn bh_matches_brute_force(p in p_values(), alpha in 0.01f64..0.5) {
        let got = bh_adjust(&p, alpha).unwrap();
        let want = oracle::bh_adjusted(&p);
        for (g, w) in got.adjusted.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-12);
        }
        // Adjusted p-values never fall below raw ones, preserve order, and
        // reject exactly the step-up set.
        for i in 0..p.len() {
            prop_assert!(got.adjusted[i] >= p[i] - 1e-15);
            for j in 0..p.len() {
                if p[i] < p[j] {
                    prop_assert!(got.adjusted[i] <= got.adjusted[j]);
                }
            }
        }
        let rejected = got.reject.iter().filter(|&&r| r).count();
        let k = oracle::bh_rejections(&p, alpha);
        let mut sorted = p.clone();
        sorted.sort_by(f64::total_cmp);
        let m = p.len() as f64;
        let boundary = sorted.iter().enumerate().any(|(k, &v)| (v * m / (k + 1) as f64 - alpha).abs() < 1e-12);
        if !boundary {
            prop_assert_eq!(rejected, k);
        }
    }

    #[test]
    fn delta_matches_windows(col in prop::collection::vec(-1e3f64..1e3, 2..80), h in 1usize..20) {
        prop_assume!(h < col.len());
        let got = delta_of_column(&col, h).unwrap();
        prop_assert!(got >= 0.0);
        prop_assert!((got - oracle::delta(&col, h)).abs() <= 1e-10 * got.max(1.0));
    }

    #[test]
    fn welch_is_antisymmetric(xs in prop::collection::vec(-5f64..5.0, 2..20), ys in prop::collection::vec(-5f64..5.0, 2..20)) {
        let a = welch_t(&xs, &ys).unwrap();
        let b = welch_t(&ys, &xs).unwrap();
        prop_assert_eq!(a.t, -b.t);
        prop_assert!((a.p - b.p).abs() < 1e-12);
        prop_assert!(a.p >= P_FLOOR && a.p <= 1.0);
    }

    #[test]
    fn permutation_p_is_a_valid_probability(xs in prop::collection::vec(-5f64..5.0, 2..12), ys in prop::collection::vec(-5f64..5.0, 2..12), s in any::<u64>()) {
        let mut rng = seed::rng(s);
        let p = permutation_test(&xs, &ys, 99, &mut rng).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
    }
}

#[test]
fn discover_on_chain_needs_longer_horizons() {
    let cfg = EnvConfig::chain(3, 2);
    let (base, int) = collect_pair(&cfg, 80, 200, 2, PolicyKind::StructuredRandom).unwrap();
    let short = discover(&base, &int, &TestConfig::default().with_horizons(&[1])).unwrap();
    assert_eq!(short.mask, vec![true, false, false]);
    let long = discover(&base, &int, &TestConfig::default()).unwrap();
    assert_eq!(long.mask, vec![true, true, true]);
    assert_eq!(long.raw_p.len(), 3);
    assert_eq!(long.raw_p[0].len(), 3);
    assert_eq!(long.selected(), vec![0, 1, 2]);
}

#[test]
fn discover_permutation_mode_agrees_on_clear_signals() {
    let cfg = EnvConfig::point_mass(DistractorLevel::Easy, 3);
    let (base, int) = collect_pair(&cfg, 40, 100, 3, PolicyKind::StructuredRandom).unwrap();
    let welch = discover(&base, &int, &TestConfig::default()).unwrap();
    let perm_cfg = TestConfig { n_permutations: 499, ..TestConfig::default().with_kind(TestKind::Permutation) };
    let perm = discover(&base, &int, &perm_cfg).unwrap();
    let truth = base.ground_truth_mask();
    for i in 0..truth.len() {
        if truth[i] {
            assert!(welch.mask[i] && perm.mask[i], "causal dim {i} missed");
        }
    }
    assert_eq!(perm, discover(&base, &int, &perm_cfg).unwrap());
}

#[test]
fn discover_rejects_mismatched_inputs() {
    let (base, _) = collect_pair(&EnvConfig::chain(2, 0), 4, 20, 0, PolicyKind::StructuredRandom).unwrap();
    let (_, other) = collect_pair(&EnvConfig::chain(3, 0), 4, 20, 0, PolicyKind::StructuredRandom).unwrap();
    assert!(discover(&base, &other, &TestConfig::default()).is_err());
    let (_, short) = collect_pair(&EnvConfig::chain(2, 0), 4, 8, 0, PolicyKind::StructuredRandom).unwrap();
    assert!(discover(&base, &short, &TestConfig::default()).is_err());
    assert!(discover(&base, &base, &TestConfig::default().with_horizons(&[30])).is_err());
    assert!(discover(&base, &base, &TestConfig { alpha: 1.5, ..TestConfig::default() }).is_err());
}

#[test]
fn summary_table_layout() {
    let (base, _) = collect_pair(&EnvConfig::chain(2, 0), 3, 20, 0, PolicyKind::StructuredRandom).unwrap();
    let table = SummaryTable::build(&base, &[1, 5]).unwrap();
    assert_eq!(table.values.len(), 2 * 2 * 3);
    for i in 0..2 {
        for (hi, &h) in [1, 5].iter().enumerate() {
            let sample = table.sample(i, hi);
            for (k, traj) in base.trajectories.iter().enumerate() {
                assert_eq!(sample[k], oracle::delta(&traj.column(i), h));
            }
        }
    }
}
