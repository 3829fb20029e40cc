use causal_scope::env::{
    chain, mimic_sigma_ref, point_mass, CoreKind, DimLabel, DistractorLevel, EnvConfig, Environment,
    FamilyCounts,
};
use causal_scope::probe::{PolicyState, StructuredParams};
use causal_scope::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rollout(env: &mut Environment, episode: u64, actions: &[Vec<f64>]) -> Vec<Vec<f64>> {
    env.set_horizon(actions.len());
    let mut out = vec![env.reset(episode)];
    for a in actions {
        out.push(env.step(a).unwrap().0);
    }
    out
}

fn random_actions(seed: u64, steps: usize, d_a: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..steps).map(|_| (0..d_a).map(|_| rng.random_range(-1.5..1.5)).collect()).collect()
}

#[test]
fn medium_point_mass_layout() {
    let env = Environment::new(&EnvConfig::point_mass(DistractorLevel::Medium, 0)).unwrap();
    let spec = env.spec();
    assert_eq!(spec.d, 56);
    assert_eq!(spec.d_c, 6);
    assert_eq!(spec.d_d, 50);
    assert_eq!(spec.labels.iter().filter(|l| **l == DimLabel::Mimicking).count(), 28);
    assert_eq!(spec.labels.iter().filter(|l| **l == DimLabel::Autonomous).count(), 12);
    assert_eq!(spec.labels.iter().filter(|l| **l == DimLabel::RewardCorrelated).count(), 6);
    assert_eq!(spec.labels.iter().filter(|l| **l == DimLabel::Oscillator).count(), 4);
    assert_eq!(&spec.labels[..6], &[DimLabel::Causal; 6]);
}

#[test]
fn no_distractors_means_all_causal() {
    for cfg in [EnvConfig::point_mass(DistractorLevel::None, 1), EnvConfig::chain(4, 1)] {
        let env = Environment::new(&cfg).unwrap();
        assert_eq!(env.obs_dim(), cfg.causal_dims());
        assert!(env.spec().labels.iter().all(|l| *l == DimLabel::Causal));
        assert!(env.ground_truth_mask().iter().all(|&m| m));
    }
}

#[test]
fn confounded_mimic_layout_and_truth() {
    let env = Environment::new(&EnvConfig::confounded_mimic(0)).unwrap();
    assert_eq!(env.obs_dim(), 2);
    assert_eq!(env.spec().labels, vec![DimLabel::Causal, DimLabel::ConfoundedMimic]);
    assert_eq!(env.ground_truth_mask(), vec![true, false]);
    assert!(env.drive().is_some());

    let cfg = EnvConfig { confounded_channel: false, ..EnvConfig::confounded_mimic(0) };
    let env = Environment::new(&cfg).unwrap();
    assert_eq!(env.obs_dim(), 1);
    assert_eq!(env.ground_truth_mask(), vec![true]);
}

#[test]
fn partial_dims_are_truth_only_when_alpha_positive() {
    let base = EnvConfig::point_mass(DistractorLevel::Custom, 2).with_custom(FamilyCounts::new(2, 2, 0, 0));
    let env = Environment::new(&base.clone().with_partial(6, 0.0)).unwrap();
    let spec = env.spec();
    assert_eq!(spec.d, spec.d_c + spec.d_d + spec.partial_dims);
    let mask = env.ground_truth_mask();
    let partial = spec.indices_with(DimLabel::Partial);
    assert_eq!(partial.len(), 6);
    assert!(partial.iter().all(|&i| !mask[i]));

    let env = Environment::new(&base.with_partial(6, 0.3)).unwrap();
    let mask = env.ground_truth_mask();
    assert!(env.spec().indices_with(DimLabel::Partial).iter().all(|&i| mask[i]));
    assert_eq!(mask.iter().filter(|&&m| m).count(), 12);
}

#[test]
fn shuffled_layout_is_a_consistent_bijection() {
    let plain = EnvConfig::point_mass(DistractorLevel::Easy, 5).with_partial(2, 0.5);
    let shuffled = EnvConfig { shuffle_obs: true, ..plain.clone() };
    let mut a = Environment::new(&plain).unwrap();
    let mut b = Environment::new(&shuffled).unwrap();
    let perm = b.spec().permutation.clone();
    let mut seen = perm.clone();
    seen.sort_unstable();
    assert_eq!(seen, (0..b.obs_dim()).collect::<Vec<_>>());
    assert_ne!(perm, (0..b.obs_dim()).collect::<Vec<_>>());

    for internal in 0..perm.len() {
        assert_eq!(b.spec().labels[perm[internal]], a.spec().labels[internal]);
    }
    let actions = random_actions(1, 30, 2);
    let ra = rollout(&mut a, 9, &actions);
    let rb = rollout(&mut b, 9, &actions);
    for (oa, ob) in ra.iter().zip(&rb) {
        for internal in 0..perm.len() {
            assert_eq!(oa[internal].to_bits(), ob[perm[internal]].to_bits());
        }
    }
}

#[test]
fn zero_action_from_rest_keeps_point_mass_still() {
    let mut env = Environment::new(&EnvConfig::point_mass(DistractorLevel::None, 3)).unwrap();
    let o0 = env.reset(11);
    assert_eq!(&o0[2..4], &[0.0, 0.0]);
    let (o1, r) = env.step(&[0.0, 0.0]).unwrap();
    assert_eq!(&o1[..4], &o0[..4]);
    let dist = ((o0[0] - point_mass::TARGET[0]).powi(2) + (o0[1] - point_mass::TARGET[1]).powi(2)).sqrt();
    assert!((r + dist).abs() < 1e-12);
    assert!((o1[4] - (point_mass::TARGET[0] - o0[0])).abs() < 1e-12);
}

#[test]
fn actions_are_clipped_internally() {
    let cfg = EnvConfig::chain(2, 4);
    let mut a = Environment::new(&cfg).unwrap();
    let mut b = Environment::new(&cfg).unwrap();
    let ra = rollout(&mut a, 1, &[vec![7.0], vec![-3.0]]);
    let rb = rollout(&mut b, 1, &[vec![1.0], vec![-1.0]]);
    assert_eq!(ra, rb);
}

#[test]
fn step_errors() {
    let mut env = Environment::new(&EnvConfig::point_mass(DistractorLevel::None, 0)).unwrap();
    env.set_horizon(2);
    env.reset(0);
    assert!(matches!(env.step(&[0.0]), Err(Error::DimensionMismatch(_))));
    assert!(matches!(env.step(&[f64::NAN, 0.0]), Err(Error::InvalidInput(_))));
    env.step(&[0.0, 0.0]).unwrap();
    env.step(&[0.0, 0.0]).unwrap();
    assert!(matches!(env.step(&[0.0, 0.0]), Err(Error::EpisodeFinished { horizon: 2 })));
    env.reset(1);
    env.step(&[0.0, 0.0]).unwrap();
}

#[test]
fn construction_errors() {
    let bad = [
        EnvConfig { d_a: 0, ..EnvConfig::chain(3, 0) },
        EnvConfig::chain(3, 0).with_partial(1, 1.2),
        EnvConfig { distractor_level: DistractorLevel::Custom, ..EnvConfig::chain(3, 0) },
    ];
    for cfg in bad {
        assert!(matches!(Environment::new(&cfg), Err(Error::InvalidConfig(_))));
    }
}

#[test]
fn mimicking_distractors_match_reference_scale() {
    // Stationary std pooled over all mimicking dimensions of a 10,000-step
    // rollout; each dimension's own target is jittered around the reference.
    let cfg = EnvConfig::point_mass(DistractorLevel::Medium, 21);
    let mut env = Environment::new(&cfg).unwrap();
    let steps = 10_000;
    let mimics = env.spec().indices_with(DimLabel::Mimicking);
    let obs = rollout(&mut env, 3, &vec![vec![0.0, 0.0]; steps]);
    let mut pooled_var = 0.0;
    for &i in &mimics {
        let col: Vec<f64> = obs.iter().map(|o| o[i]).collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        pooled_var += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
    }
    let pooled_std = (pooled_var / mimics.len() as f64).sqrt();
    let reference = mimic_sigma_ref(6);
    assert!((pooled_std - reference).abs() / reference < 0.15, "pooled std {pooled_std}, reference {reference}");
}

#[test]
fn confounded_mimic_tracks_the_causal_state() {
    let cfg = EnvConfig::confounded_mimic(8);
    let mut env = Environment::new(&cfg).unwrap();
    let steps = 5_000;
    env.set_horizon(steps);
    let mut obs = env.reset(2);
    let mut policy = PolicyState::new(1, 2, &StructuredParams::default(), 77);
    let mut a = [0.0];
    let (mut s, mut m) = (Vec::new(), Vec::new());
    for t in 0..steps {
        policy.act_into(t, &obs, env.drive(), &mut a);
        obs = env.step(&a).unwrap().0;
        s.push(obs[0]);
        m.push(obs[1]);
    }
    let corr = pearson(&s, &m);
    assert!(corr >= 0.95, "corr {corr}");
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn chain_response_delay_equals_depth() {
    for k in [1, 3, 5] {
        let cfg = EnvConfig::chain(k, 6);
        let steps = k + 3;
        let mut impulse = vec![vec![0.0]; steps];
        impulse[0] = vec![1.0];
        let mut a = Environment::new(&cfg).unwrap();
        let mut b = Environment::new(&cfg).unwrap();
        let hit = rollout(&mut a, 4, &impulse);
        let quiet = rollout(&mut b, 4, &vec![vec![0.0]; steps]);
        for j in 1..=k {
            let first = (0..=steps).find(|&t| hit[t][j - 1] != quiet[t][j - 1]);
            assert_eq!(first, Some(j), "node {j} of chain_{k}");
            let expected = chain::LINK_WEIGHT.powi(j as i32 - 1) * 0.5;
            assert!((hit[j][j - 1] - quiet[j][j - 1] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn reset_restores_the_episode() {
    let cfg = EnvConfig::point_mass(DistractorLevel::Hard, 12).with_partial(3, 0.4);
    let mut env = Environment::new(&cfg).unwrap();
    let actions = random_actions(5, 40, 2);
    let first = rollout(&mut env, 17, &actions);
    let _ = rollout(&mut env, 18, &actions);
    let again = rollout(&mut env, 17, &actions);
    assert_eq!(first, again);
}

fn config_strategy() -> impl Strategy<Value = EnvConfig> {
    let core = prop_oneof![
        Just(CoreKind::PointMass2d),
        Just(CoreKind::ChainK),
        Just(CoreKind::ConfoundedMimic),
        Just(CoreKind::None),
    ];
    let level = prop_oneof![
        Just(DistractorLevel::None),
        Just(DistractorLevel::Easy),
        Just(DistractorLevel::Medium),
        Just(DistractorLevel::Hard),
    ];
    (core, level, any::<u64>(), 0usize..3, any::<bool>(), 1usize..5).prop_map(
        |(core, level, seed, partial, shuffle, k)| {
            let mut cfg = EnvConfig::new(core, level, seed);
            if core == CoreKind::ChainK {
                cfg.chain_len = k;
            }
            if core == CoreKind::None && level == DistractorLevel::None {
                cfg = cfg.with_custom(FamilyCounts::new(2, 2, 2, 2));
            }
            cfg.shuffle_obs = shuffle;
            cfg.with_partial(partial, 0.0)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // Every non-causal emitted value is identical under two different
    // action sequences.
    #[test]
    fn distractors_ignore_actions(cfg in config_strategy(), episode in any::<u64>(), sa in any::<u64>(), sb in any::<u64>()) {
        let mut env_a = Environment::new(&cfg).unwrap();
        let mut env_b = Environment::new(&cfg).unwrap();
        let d_a = cfg.d_a;
        let ra = rollout(&mut env_a, episode, &random_actions(sa, 60, d_a));
        let rb = rollout(&mut env_b, episode, &random_actions(sb, 60, d_a));
        let truth = env_a.ground_truth_mask();
        for (oa, ob) in ra.iter().zip(&rb) {
            for i in (0..truth.len()).filter(|&i| !truth[i]) {
                prop_assert_eq!(oa[i].to_bits(), ob[i].to_bits());
            }
        }
    }

    #[test]
    fn equal_configs_are_bitwise_deterministic(cfg in config_strategy(), episode in any::<u64>(), sa in any::<u64>()) {
        let actions = random_actions(sa, 40, cfg.d_a);
        let mut env_a = Environment::new(&cfg).unwrap();
        let mut env_b = Environment::new(&cfg.clone()).unwrap();
        let ra = rollout(&mut env_a, episode, &actions);
        let rb = rollout(&mut env_b, episode, &actions);
        for (oa, ob) in ra.iter().zip(&rb) {
            let ba: Vec<u64> = oa.iter().map(|v| v.to_bits()).collect();
            let bb: Vec<u64> = ob.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(ba, bb);
        }
    }
}
