use proptest::prelude::*;

use lupus::engine::{run_game, EventKind, GameConfig, Winner, WolfStrategy};
use lupus::exact::{v_random, w_plus, w_selfkill, Probability};
use lupus::mc::{count_successes, win_rate, Estimate};
use lupus::pbe::{transition_table, InformationSet, Node};
use lupus::rng::RngStream;

fn probability() -> impl Strategy<Value = Probability> {
    (0u64..1000, 1u64..1000).prop_map(|(a, b)| Probability::ratio(a.min(b), b))
}

fn node() -> impl Strategy<Value = Node> {
    (0u32..=12, 0u32..=6)
        .prop_flat_map(|(big_n, big_m)| (Just(big_n), Just(big_m), 0..=big_n, 0..=big_m))
        .prop_filter("someone besides the prophet is alive", |(a, b, _, _)| a + b > 0)
        .prop_map(|(a, b, c, d)| Node::new(a, b, c, d))
}

proptest! {
    #[test]
    fn recursions_stay_in_unit_interval(n in 1u32..60, m in 0u32..30) {
        prop_assume!(m <= n);
        let w = w_plus(n, m).unwrap();
        let v = v_random(n, m).unwrap();
        prop_assert!(w <= Probability::one() && v <= Probability::one());
        prop_assert!(v <= w);
        if m >= 1 {
            prop_assert!(w_plus(n, m - 1).unwrap() <= w);
        }
    }

    #[test]
    fn two_more_players_help_the_citizens(n in 3u32..60, m in 1u32..20) {
        prop_assume!(2 * m < n);
        prop_assert!(w_plus(n + 2, m).unwrap() < w_plus(n, m).unwrap());
    }

    #[test]
    fn self_kill_never_helps(n in 7u32..40, m in 3u32..15) {
        prop_assume!(2 * m < n);
        prop_assert!(w_selfkill(n, m).unwrap() < w_plus(n, m).unwrap());
    }

    #[test]
    fn probability_text_round_trips(p in probability()) {
        let parsed: Probability = p.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &p);
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Probability>(&json).unwrap(), p);
    }

    #[test]
    fn step_tables_sum_to_one(node in node()) {
        let table = transition_table(node).unwrap();
        let total: Probability = table.iter().map(|t| t.probability.clone()).sum();
        prop_assert!(total.is_one());
        for t in &table {
            prop_assert!(!t.probability.is_zero());
            if let Some(next) = t.successor {
                prop_assert!(next.players() < node.players());
            }
        }
    }

    #[test]
    fn normalization_is_order_free(
        weights in prop::collection::vec(1u64..50, 1..5),
        big_n in 2u32..8,
    ) {
        // nodes sharing N+M, spread over (N, M) splits
        let players = big_n + 2;
        let nodes: Vec<(Probability, Node)> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let wolves = 1 + (i as u32) % 2;
                (Probability::ratio(w, 1), Node::new(players - wolves, wolves, 0, 0))
            })
            .collect();
        let forward = InformationSet::normalized(nodes.clone()).unwrap();
        let backward = InformationSet::normalized(nodes.into_iter().rev()).unwrap();
        let total: Probability = forward.entries().iter().map(|e| e.weight.clone()).sum();
        prop_assert!(total.is_one());
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn games_end_consistently(
        villagers in 1u32..10,
        wolves in 1u32..4,
        prophet in any::<bool>(),
        random in any::<bool>(),
        reveal in prop::option::of(1u32..6),
        seed in any::<u64>(),
    ) {
        let strategy = if random { WolfStrategy::Random } else { WolfStrategy::RandomPlus };
        let config = GameConfig::new(villagers, wolves, prophet)
            .with_strategy(strategy)
            .with_reveal_round(reveal.filter(|_| prophet));
        let a = run_game(config.clone(), &mut RngStream::new(seed, 3)).unwrap();
        let b = run_game(config.clone(), &mut RngStream::new(seed, 3)).unwrap();
        prop_assert_eq!(&a, &b);
        let last = a.events.last().unwrap();
        let ended = matches!(last.kind, EventKind::GameOver { winner } if winner == a.winner);
        prop_assert!(ended);
        let dead = a
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Kill { .. } | EventKind::Vote { .. }))
            .count();
        prop_assert!(dead as u32 <= config.players());
        if a.winner == Winner::CitizenGroup {
            let wolves_out = a
                .events
                .iter()
                .filter_map(|e| e.target.filter(|_| matches!(e.kind, EventKind::Vote { .. })))
                .filter(|t| a.seating[*t as usize - 1].role.is_werewolf())
                .count();
            prop_assert_eq!(wolves_out as u32, wolves);
        }
    }

    #[test]
    fn split_runs_pool_to_the_full_run(seed in any::<u64>(), split in 1u64..199) {
        let config = GameConfig::new(4, 2, false);
        let trial = |rng: &mut RngStream| Ok(run_game(config.clone(), rng)?.winner == Winner::WerewolfGroup);
        let left = count_successes(seed, 0..split, trial).unwrap();
        let right = count_successes(seed, split..200, trial).unwrap();
        let full = win_rate(&config, Winner::WerewolfGroup, 200, seed).unwrap();
        let pooled = Estimate::from_counts(left, split).pooled(&Estimate::from_counts(right, 200 - split));
        prop_assert_eq!(pooled, full);
    }
}
