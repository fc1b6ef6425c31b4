use proptest::prelude::*;
use swarm_core::comm::*;

fn budget() -> LinkBudget {
    LinkBudget { agent_position_bits: 64, adversary_position_bits: 64, instruction_bits: 1, sequence_bits: 3 }
}

fn log_strategy() -> impl Strategy<Value = CommLog> {
    prop::collection::vec((any::<bool>(), prop::collection::vec(0usize..=7, 8)), 1..60).prop_map(|rows| CommLog {
        n_agents: 8,
        steps: rows
            .into_iter()
            .enumerate()
            .map(|(t, (b, degrees))| CommStep { t, boundary_crossed: b, degrees })
            .collect(),
    })
}

fn schedule() -> impl Strategy<Value = InvocationSchedule> {
    prop_oneof![
        Just(InvocationSchedule::EveryStep),
        (1usize..10).prop_map(InvocationSchedule::EveryK),
        Just(InvocationSchedule::OnBoundary),
    ]
}

proptest! {
    #[test]
    fn ledger_totals_are_step_cost_sums(log in log_strategy(), sched in schedule()) {
        for arch in [Architecture::Centralized, Architecture::LeaderFollower, Architecture::Decentralized] {
            let ledger = episode_report(&log, &budget(), sched, arch).unwrap();
            let mut expected = 0u64;
            let mut calls = 0;
            for s in &log.steps {
                if sched.invoked(s.t, s.boundary_crossed) {
                    expected += arch.step_cost(&s.degrees, &budget()).total();
                    calls += 1;
                }
            }
            prop_assert_eq!(ledger.total(), expected);
            prop_assert_eq!(ledger.up_total() + ledger.down_total(), expected);
            prop_assert_eq!(ledger.invocations, calls);
            prop_assert_eq!(ledger.up_bits.len(), log.steps.len());
        }
    }

    #[test]
    fn decentralized_is_cheapest(log in log_strategy(), sched in schedule()) {
        let total = |a| episode_report(&log, &budget(), sched, a).unwrap().total();
        let (ce, lf, de) = (total(Architecture::Centralized), total(Architecture::LeaderFollower), total(Architecture::Decentralized));
        prop_assert!(de < lf && lf < ce);
        prop_assert!(de as f64 <= 0.384 * ce as f64);
    }

    #[test]
    fn text_form_round_trips(log in log_strategy()) {
        prop_assert_eq!(CommLog::parse(&log.to_text()).unwrap(), log);
    }
}

#[test]
fn per_step_costs() {
    assert_eq!(centralized_step_cost(8, &budget()), StepCost { up: 576, down: 8 });
    assert_eq!(leader_follower_step_cost(8, &budget()), StepCost { up: 448, down: 7 });
    assert_eq!(decentralized_step_cost(&[7; 8], &budget()).total(), 224);
    assert_eq!(decentralized_step_cost(&[0; 8], &budget()).total(), 0);
}

#[test]
fn schedules_parse_and_print() {
    for s in ["every-step", "every-k:5", "on-boundary"] {
        assert_eq!(s.parse::<InvocationSchedule>().unwrap().to_string(), s);
    }
    assert!("every-k:0".parse::<InvocationSchedule>().is_err());
    assert!("sometimes".parse::<InvocationSchedule>().is_err());
}

#[test]
fn malformed_log_reports_its_line() {
    let err = CommLog::parse("# comm n_agents=2\n0 0 1 1\n1 0 x 1\n").unwrap_err();
    assert!(err.to_string().contains('3'), "{err}");
}
