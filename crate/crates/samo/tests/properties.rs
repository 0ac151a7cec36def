//! Property tests for the numeric and environment invariants.

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use samo::cascade::shaped_reward;
use samo::envs::{CorridorEnv, Environment, GoalCorridorEnv, TwoZoneEnv};
use samo::nn::{Activation, DenseNet};
use samo::policy::{Action, GaussianHead};
use samo::sac::{alpha_step, ALPHA_FLOOR};
use samo::termination::geometric_labels;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Sampled squashed actions recover their log probability through the
    /// inverse-tanh path within 1e-9 (away from hard saturation, where
    /// the density itself is floored).
    #[test]
    fn squashed_log_prob_round_trip(
        seed in 0u64..1000,
        mu_scale in -2.0f64..2.0,
        noise in -3.0f64..3.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = GaussianHead::new(3, 1, &[8], &mut rng);
        let state = [0.1 * mu_scale, -0.3, 0.7];
        let (action, lp) = head.sample_with_noise(&state, &[noise]).unwrap();
        prop_assume!(action[0].abs() < 0.9999);
        let lp2 = head.log_prob(&state, &action).unwrap();
        prop_assert!((lp - lp2).abs() < 1e-9, "{lp} vs {lp2}");
    }

    /// Categorical probabilities are positive and sum to one within 1e-9.
    #[test]
    fn categorical_probs_form_distribution(seed in 0u64..1000, n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = samo::policy::CategoricalHead::new(4, n, &[8], &mut rng);
        let state = [0.5, -0.5, 0.25, 0.0];
        let probs = head.probs(&state).unwrap();
        prop_assert!(probs.iter().all(|&p| p > 0.0));
        let sum: f64 = probs.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
    }

    /// The temperature stays in (ALPHA_FLOOR, 1] under arbitrary update
    /// sequences.
    #[test]
    fn alpha_clamped_under_arbitrary_updates(grads in proptest::collection::vec(-50.0f64..50.0, 1..200)) {
        let mut log_alpha = 0.0f64;
        for g in grads {
            log_alpha = alpha_step(log_alpha, g, -1.0, 3e-4);
            let alpha = log_alpha.exp();
            prop_assert!(alpha >= ALPHA_FLOOR && alpha <= 1.0, "alpha {alpha}");
        }
    }

    /// Geometric labels are nondecreasing in t and end at exactly 1 for
    /// failed episodes.
    #[test]
    fn geometric_labels_monotone(t_len in 1usize..200, gamma in 0.01f64..1.0) {
        let ys = geometric_labels(t_len, gamma, true);
        prop_assert_eq!(*ys.last().unwrap(), 1.0);
        for w in ys.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let zeros = geometric_labels(t_len, gamma, false);
        prop_assert!(zeros.iter().all(|&y| y == 0.0));
    }

    /// Shaping keeps the reward in the stay-alive alphabet.
    #[test]
    fn shaped_reward_alphabet(raw in prop_oneof![Just(-1.0f64), Just(0.0f64)], beta in any::<bool>(), new in any::<bool>()) {
        let r = shaped_reward(raw, beta, new);
        prop_assert!(r == -1.0 || r == 0.0 || r == 1.0);
    }

    /// Stay-alive corridor: rewards in {-1, 0}, rays in [0, 1], episodes
    /// capped, observation width constant.
    #[test]
    fn corridor_contract(seed in 0u64..200) {
        let mut env = CorridorEnv::stay_alive(120).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs0 = env.reset(seed);
        let width = obs0.len();
        let mut steps = 0;
        loop {
            use rand::Rng;
            let a = rng.gen_range(-1.0..1.0);
            let step = env.step(&Action::Continuous(vec![a])).unwrap();
            steps += 1;
            prop_assert!(step.reward == 0.0 || step.reward == -1.0);
            prop_assert_eq!(step.obs.len(), width);
            prop_assert!(step.obs.iter().all(|&v| (0.0..=1.0).contains(&v)));
            if step.done {
                break;
            }
        }
        prop_assert!(steps <= 120);
    }

    /// Goal corridor rewards stay in {-1, -0.5, 0, 1}.
    #[test]
    fn goal_reward_alphabet(seed in 0u64..200) {
        let mut env = GoalCorridorEnv::new(80);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
        env.reset(seed);
        loop {
            use rand::Rng;
            let a = rng.gen_range(-1.0..1.0);
            let step = env.step(&Action::Continuous(vec![a])).unwrap();
            prop_assert!([-1.0, -0.5, 0.0, 1.0].contains(&step.reward), "reward {}", step.reward);
            if step.done {
                break;
            }
        }
    }

    /// Two-zone rewards stay in {-1, 0} and episodes respect the cap.
    #[test]
    fn two_zone_contract(seed in 0u64..200) {
        let mut env = TwoZoneEnv::new(60);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        env.reset(seed);
        let mut steps = 0;
        loop {
            use rand::Rng;
            let a = rng.gen_range(0..2usize);
            let step = env.step(&Action::Discrete(a)).unwrap();
            steps += 1;
            prop_assert!(step.reward == 0.0 || step.reward == -1.0);
            if step.done {
                break;
            }
        }
        prop_assert!(steps <= 60);
    }

    /// Forward passes are pure: two evaluations agree bit for bit.
    #[test]
    fn forward_is_pure(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = DenseNet::new(&[4, 8, 3], Activation::Tanh, &mut rng);
        let input = [0.3, -0.1, 0.9, 0.0];
        let a = net.forward(&input).unwrap();
        let b = net.forward(&input).unwrap();
        prop_assert_eq!(a, b);
    }
}
