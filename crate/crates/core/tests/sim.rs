use gradcode::report::sweep_csv;
use gradcode::schedule::build;
use gradcode::sim::{sweep_tolerance, trace_from_slowdowns, SimConfig};
use gradcode::{Delivery, MdsPoints, Scheme, StragglerParams};
use proptest::prelude::*;

const P: StragglerParams = StragglerParams { mu: 10.0, alpha: 0.01 };

fn small(trials: usize) -> SimConfig {
    SimConfig {
        trials,
        ..SimConfig::reference(Scheme::Cpgc)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lower_threshold_never_later(
        xs in prop::collection::vec(0.0f64..0.5, 20),
        scheme in 0usize..3,
    ) {
        let scheme = Scheme::ALL[scheme];
        let s = build(scheme, 20, 20, 3, MdsPoints::Linear).unwrap();
        let trace = trace_from_slowdowns(&s, scheme.delivery(), &P, &xs).unwrap();
        let mut prev = f64::INFINITY;
        for m in (1..=20).rev() {
            let o = trace.outcome(m);
            prop_assert!(o.completion_time <= prev);
            prop_assert!(o.recovered >= m);
            let per_message = match scheme.delivery() {
                Delivery::MultiMessage => 1.0,
                Delivery::Bundled => 3.0,
            };
            prop_assert_eq!(o.volume, o.load as f64 * per_message / 20.0);
            prev = o.completion_time;
        }
    }
}

#[test]
fn ties_at_the_finish_are_delivered() {
    let s = build(Scheme::UcMmc, 4, 4, 2, MdsPoints::Linear).unwrap();
    let trace = trace_from_slowdowns(&s, Delivery::MultiMessage, &P, &[0.0; 4]).unwrap();
    let o = trace.outcome(1);
    assert_eq!(o.completion_time, 0.01);
    assert_eq!(o.load, 4);
    assert_eq!(trace.delivered(&s, o.load).count(), 4);
}

#[test]
fn volume_accounting_at_zero_tolerance() {
    let rows = sweep_tolerance(&small(2000), &Scheme::ALL, &[0.0]).unwrap();
    for r in &rows {
        for o in &r.outcomes {
            match r.scheme {
                Scheme::Mcc => assert_eq!(o.volume, 21.0 / 20.0),
                _ => assert!(o.volume >= 1.0),
            }
            assert_eq!(o.recovered, 20);
        }
    }
}

#[test]
fn mcc_ignores_tolerance() {
    let rows = sweep_tolerance(&small(1000), &[Scheme::Mcc], &[0.0, 0.05, 0.1, 0.15]).unwrap();
    for r in &rows[1..] {
        assert_eq!(r.threshold, 20);
        assert_eq!(r.aggregate, rows[0].aggregate);
        assert_eq!(r.outcomes, rows[0].outcomes);
    }
}

#[test]
fn tolerance_helps_coded_partial_schemes() {
    let rows = sweep_tolerance(&small(2000), &[Scheme::UcMmc, Scheme::Cpgc], &[0.0, 0.05, 0.1]).unwrap();
    for pair in rows.chunks(3) {
        assert!(pair[0].aggregate.time.mean > pair[1].aggregate.time.mean);
        assert!(pair[1].aggregate.time.mean > pair[2].aggregate.time.mean);
        assert!(pair[0].aggregate.volume.mean > pair[2].aggregate.volume.mean);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let grid = [0.0, 0.05, 0.1];
    let one = SimConfig { threads: Some(1), ..small(3000) };
    let four = SimConfig { threads: Some(4), ..small(3000) };
    let a = sweep_csv(&sweep_tolerance(&one, &Scheme::ALL, &grid).unwrap()).unwrap();
    let b = sweep_csv(&sweep_tolerance(&four, &Scheme::ALL, &grid).unwrap()).unwrap();
    let c = sweep_csv(&sweep_tolerance(&small(3000), &Scheme::ALL, &grid).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = SimConfig { master_seed: 1, ..small(3000) };
    assert_ne!(a, sweep_csv(&sweep_tolerance(&other, &Scheme::ALL, &grid).unwrap()).unwrap());
}

#[test]
fn empty_grid_and_zero_trials_fail() {
    assert!(sweep_tolerance(&small(10), &Scheme::ALL, &[]).is_err());
    assert!(sweep_tolerance(&small(0), &Scheme::ALL, &[0.0]).is_err());
    assert!(sweep_tolerance(&small(10), &Scheme::ALL, &[1.5]).is_err());
}
