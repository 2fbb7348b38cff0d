use qrl_core::dqn::{
    compute_targets, frozen_lake_mae, gradient_step, train_model, AdamHyper, AdamState,
    DecaySchedule, DqnConfig, LearningRates, LossMode, ModelConfig, PqcModel, QFunction,
    TableModel,
};
use qrl_core::envs::{fl_optimal_q, EnvKind, FrozenLake, Observation, Transition};
use qrl_core::qmodel::{AnsatzConfig, EncoderConfig, ObservableSet, OutputScaling, PqcConfig, Readout};
use qrl_core::replay::EpsilonSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frozen_lake_pqc(layers: usize) -> PqcConfig {
    PqcConfig {
        ansatz: AnsatzConfig::new(4, layers, false),
        encoder: EncoderConfig::Basis,
        readout: ObservableSet::from_readout(Readout::PerQubitZ, 4, OutputScaling::FixedUnit),
    }
}

fn config(model: ModelConfig, epsilon: EpsilonSchedule, episodes: usize) -> DqnConfig {
    DqnConfig {
        env: EnvKind::FrozenLake,
        model,
        gamma: 0.8,
        batch_size: 11,
        update_model_every: 5,
        update_target_every: 10,
        learning_rates: LearningRates {
            theta: 0.001,
            input_weights: 0.0,
            output_weights: 0.0,
        },
        max_episodes: episodes,
        epsilon,
        epsilon_decay: DecaySchedule::PerEpisode,
        memory_capacity: 10_000,
        loss: LossMode::Squared,
        cap_is_terminal: true,
        adam: AdamHyper::default(),
        track_mae: false,
        seed: 0,
    }
}

fn random_transitions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Transition> {
    (0..n)
        .map(|_| {
            let s = [0, 1, 2, 4, 6, 8, 9, 10, 13, 14][rng.gen_range(0..10)];
            let next = rng.gen_range(0..16);
            Transition {
                state: Observation::Discrete(s),
                action: rng.gen_range(0..4),
                reward: f64::from(next == 15),
                next_state: Observation::Discrete(next),
                done: rng.gen_bool(0.3),
                truncated: false,
            }
        })
        .collect()
}

#[test]
fn targets_ignore_online_updates_between_syncs() {
    let cfg = frozen_lake_pqc(3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut online = PqcModel::new(cfg.clone(), cfg.init_params(&mut rng)).unwrap();
    let target = online.clone();
    let transitions = random_transitions(&mut rng, 11);
    let batch: Vec<&Transition> = transitions.iter().collect();
    let dqn = config(ModelConfig::Pqc(cfg), EpsilonSchedule::constant(0.0), 1);
    let before = compute_targets(&batch, &target, 0.8, true).unwrap();
    let mut adam = AdamState::new(&online.group_sizes(), AdamHyper::default());
    for _ in 0..5 {
        gradient_step(&mut online, &target, &batch, &dqn, &mut adam, &[0.05, 0.0, 0.0]).unwrap();
    }
    assert_ne!(online.params, target.params);
    assert_eq!(compute_targets(&batch, &target, 0.8, true).unwrap(), before);
}

#[test]
fn update_touches_only_parameters_with_gradient() {
    let mut model = TableModel::new(16, 4, 0.5);
    let target = model.clone();
    let t = Transition {
        state: Observation::Discrete(14),
        action: 2,
        reward: 1.0,
        next_state: Observation::Discrete(15),
        done: true,
        truncated: false,
    };
    let dqn = config(
        ModelConfig::Pqc(frozen_lake_pqc(1)),
        EpsilonSchedule::constant(0.0),
        1,
    );
    let mut adam = AdamState::new(&model.group_sizes(), AdamHyper::default());
    gradient_step(&mut model, &target, &[&t], &dqn, &mut adam, &[0.1]).unwrap();
    for (i, (&a, &b)) in model.table.iter().zip(&target.table).enumerate() {
        if i == 14 * 4 + 2 {
            assert!(a > b, "entry moves toward the reward");
        } else {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn greedy_table_agent_is_deterministic() {
    let cfg = config(
        ModelConfig::Pqc(frozen_lake_pqc(1)),
        EpsilonSchedule::constant(0.0),
        50,
    );
    let mut model = TableModel::new(16, 4, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for v in model.table.iter_mut() {
        *v = rng.gen_range(0.0..1.0);
    }
    let a = train_model(&cfg, model.clone(), FrozenLake::new(), &[0.01]).unwrap();
    let b = train_model(&cfg, model, FrozenLake::new(), &[0.01]).unwrap();
    assert_eq!(a, b);
    assert!(!a.episodes.is_empty());
}

#[test]
fn frozen_batch_loss_decreases() {
    let cfg = frozen_lake_pqc(5);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut model = PqcModel::new(cfg.clone(), cfg.init_params(&mut rng)).unwrap();
    let target = model.clone();
    let transitions = random_transitions(&mut rng, 11);
    let batch: Vec<&Transition> = transitions.iter().collect();
    let dqn = config(ModelConfig::Pqc(cfg), EpsilonSchedule::constant(0.0), 1);
    let mut adam = AdamState::new(&model.group_sizes(), AdamHyper::default());
    let losses: Vec<f64> = (0..50)
        .map(|_| gradient_step(&mut model, &target, &batch, &dqn, &mut adam, &[0.01, 0.0, 0.0]).unwrap())
        .collect();
    let first: f64 = losses[..5].iter().sum();
    let last: f64 = losses[45..].iter().sum();
    assert!(last < first, "loss went from {first} to {last}");
}

#[test]
fn untrained_identity_model_mae_has_closed_form() {
    let cfg = frozen_lake_pqc(5);
    let mut params = cfg.init_params(&mut ChaCha8Rng::seed_from_u64(0));
    params.theta.iter_mut().for_each(|t| *t = 0.0);
    let model = PqcModel::new(cfg, params).unwrap();
    // θ = 0 leaves every basis state unchanged, so Q(s, a) = 1 - bit_a(s)
    let optimal = fl_optimal_q(0.8);
    let mut expected = 0.0;
    for (s, row) in optimal.iter().enumerate() {
        for (a, q_star) in row.iter().enumerate() {
            let bit = (s >> (3 - a)) & 1;
            expected += ((1 - bit) as f64 - q_star).abs();
        }
    }
    expected /= 64.0;
    let mae = frozen_lake_mae(&model, 0.8).unwrap();
    assert!((mae - expected).abs() < 1e-12, "{mae} vs {expected}");

    // state 0 is |0000⟩, the all-ones Q-vector
    assert_eq!(model.q_values(&Observation::Discrete(0)).unwrap(), vec![1.0; 4]);
}
