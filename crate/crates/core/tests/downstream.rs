use causal_scope::downstream::{cem_train, evaluate_policy, scaling_sweep, CEMConfig, LinearPolicy, MaskMethod, SweepSettings};
use causal_scope::env::{DimLabel, DistractorLevel, EnvConfig, Environment};
use causal_scope::seed;
use causal_scope::Error;

fn truth(cfg: &EnvConfig) -> Vec<bool> {
    Environment::new(cfg).unwrap().ground_truth_mask()
}

#[test]
fn linear_policy_reads_only_masked_inputs() {
    let policy = LinearPolicy::from_flat(vec![true, false, true], 2, &[1.0, 2.0, -1.0, 0.5, 0.1, 0.0]).unwrap();
    assert_eq!(policy.d_in(), 2);
    assert_eq!(policy.n_params(), 6);
    let a = policy.act(&[0.2, 100.0, 0.3]);
    assert!((a[0] - (0.2 + 0.6 + 0.1)).abs() < 1e-12);
    assert!((a[1] - (-0.2 + 0.15)).abs() < 1e-12);
    assert_eq!(policy.act(&[5.0, 0.0, 5.0]), vec![1.0, -1.0]);
    assert_eq!(policy.flatten(), vec![1.0, 2.0, -1.0, 0.5, 0.1, 0.0]);
    assert!(matches!(LinearPolicy::from_flat(vec![true], 1, &[1.0]), Err(Error::DimensionMismatch(_))));
    assert!(matches!(LinearPolicy::from_flat(vec![true], 1, &[1.0, f64::INFINITY]), Err(Error::Numerical(_))));
}

#[test]
fn zero_iterations_return_the_initial_policy() {
    let cfg = EnvConfig::point_mass(DistractorLevel::Easy, 1);
    let mask = truth(&cfg);
    let cem = CEMConfig { iterations: 0, seed: 4, ..CEMConfig::default() };
    let out = cem_train(&cfg, &mask, &cem).unwrap();
    assert!(out.policy.flatten().iter().all(|&v| v == 0.0));
    assert!(out.history.is_empty());
    let eval_seeds: Vec<u64> = (0..cem.eval_episodes).map(|e| seed::derive(4, &[seed::tag::EVAL, e as u64])).collect();
    let mut env = Environment::new(&cfg).unwrap();
    let expected = evaluate_policy(&mut env, &LinearPolicy::zeros(mask, 2), &eval_seeds, cem.horizon).unwrap();
    assert_eq!(out.mean_return, expected);
}

#[test]
fn cem_is_deterministic_and_flags_empty_masks() {
    let cfg = EnvConfig::point_mass(DistractorLevel::None, 2);
    let cem = CEMConfig { iterations: 3, population: 16, elites: 4, ..CEMConfig::default() };
    let a = cem_train(&cfg, &truth(&cfg), &cem).unwrap();
    let b = cem_train(&cfg, &truth(&cfg), &cem).unwrap();
    assert_eq!(a, b);
    assert!(!a.empty_mask);
    let empty = cem_train(&cfg, &[false; 6], &cem).unwrap();
    assert!(empty.empty_mask);
    assert_eq!(empty.policy.n_params(), 2);
    assert!(cem_train(&cfg, &[true; 5], &cem).is_err());
    assert!(cem_train(&cfg, &truth(&cfg), &CEMConfig { elites: 16, population: 16, ..cem }).is_err());
}

#[test]
fn cem_improves_on_its_starting_point() {
    let cfg = EnvConfig::point_mass(DistractorLevel::None, 3);
    let trained = cem_train(&cfg, &truth(&cfg), &CEMConfig::default().with_seed(3)).unwrap();
    let untrained = cem_train(&cfg, &truth(&cfg), &CEMConfig { iterations: 0, ..CEMConfig::default().with_seed(3) }).unwrap();
    assert!(trained.mean_return > untrained.mean_return);
    assert!(trained.history.windows(2).filter(|w| w[1] >= w[0]).count() >= trained.history.len() / 2);
}

#[test]
fn oracle_return_ignores_distractors_and_full_state_does_not() {
    let cem = CEMConfig::default().with_seed(0);
    let none = EnvConfig::point_mass(DistractorLevel::None, 0);
    let hard = EnvConfig::point_mass(DistractorLevel::Hard, 0);
    let oracle_none = cem_train(&none, &truth(&none), &cem).unwrap().mean_return;
    let oracle_hard = cem_train(&hard, &truth(&hard), &cem).unwrap().mean_return;
    assert!((oracle_hard - oracle_none).abs() <= 0.10 * oracle_none.abs(), "{oracle_none} vs {oracle_hard}");

    let full_none = cem_train(&none, &vec![true; 6], &cem).unwrap().mean_return;
    let d = Environment::new(&hard).unwrap().obs_dim();
    let full_hard = cem_train(&hard, &vec![true; d], &cem).unwrap().mean_return;
    // Returns are negative distances; a 30% drop means 30% more cost.
    assert!(full_hard <= full_none - 0.30 * full_none.abs(), "{full_none} vs {full_hard}");
}

#[test]
fn adding_distractors_to_the_oracle_mask_does_not_help() {
    let mut oracle_total = 0.0;
    let mut padded_total = 0.0;
    for s in 0..5 {
        let cfg = EnvConfig::point_mass(DistractorLevel::Easy, s);
        let env = Environment::new(&cfg).unwrap();
        let oracle = env.ground_truth_mask();
        let mut padded = oracle.clone();
        for (i, l) in env.spec().labels.iter().enumerate() {
            if *l == DimLabel::Autonomous {
                padded[i] = true;
            }
        }
        let cem = CEMConfig::default().with_seed(s);
        oracle_total += cem_train(&cfg, &oracle, &cem).unwrap().mean_return;
        padded_total += cem_train(&cfg, &padded, &cem).unwrap().mean_return;
    }
    assert!(padded_total <= oracle_total + 0.05 * oracle_total.abs(), "{oracle_total} vs {padded_total}");
}

#[test]
fn one_iteration_fails_everyone() {
    let cfg = EnvConfig::point_mass(DistractorLevel::Medium, 1);
    let d = Environment::new(&cfg).unwrap().obs_dim();
    let trained = cem_train(&cfg, &truth(&cfg), &CEMConfig::default().with_seed(1)).unwrap().mean_return;
    let capped = CEMConfig { iterations: 1, ..CEMConfig::default().with_seed(1) };
    for mask in [truth(&cfg), vec![true; d]] {
        let r = cem_train(&cfg, &mask, &capped).unwrap().mean_return;
        assert!(r < trained, "{r} vs {trained}");
    }
}

#[test]
fn single_cell_sweep_has_one_row() {
    let settings = SweepSettings {
        cem: CEMConfig { iterations: 2, population: 8, elites: 2, eval_episodes: 2, ..CEMConfig::default() },
        ..SweepSettings::default()
    };
    let base = EnvConfig::point_mass(DistractorLevel::None, 0);
    let report = scaling_sweep(&base, &[DistractorLevel::Easy], &[MaskMethod::Oracle], &[7], &settings).unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert_eq!((row.level, row.method, row.seed, row.n_distractors), (DistractorLevel::Easy, MaskMethod::Oracle, 7, 6));
    assert_eq!(row.score.f1, 1.0);
    assert_eq!(row.n_selected, 6);
    assert_eq!(report.return_of(DistractorLevel::Easy, MaskMethod::Oracle, 7), Some(row.mean_return));

    let mut csv = Vec::new();
    report.write_csv(&mut csv, Some("abc")).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# manifest_hash=abc\n"));
    assert_eq!(text.lines().count(), 3);
    assert_eq!(report.chart().to_svg(), report.chart().to_svg());
}
