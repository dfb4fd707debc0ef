#![allow(dead_code)]

use gradcode::decoder::{peel_recoverable, received_codewords, recoverable_blocks, IncrementalDecoder, ScoreVector};
use gradcode::schedule::build;
use gradcode::{Codeword, MdsPoints, ScheduleMatrix, Scheme};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// A schedule with `K ≤ 6`, `r ≤ 3` and a score vector for it.
#[derive(Clone, Debug)]
pub struct Case {
    pub schedule: ScheduleMatrix,
    pub scores: Vec<usize>,
}

pub fn schedule_case() -> impl Strategy<Value = Case> {
    (0usize..3, 2usize..=6, 1usize..=6, 1usize..=3, prop::collection::vec(0usize..=3, 6)).prop_map(
        |(scheme, m, k, r, raw)| {
            let scheme = Scheme::ALL[scheme];
            let (m, k, r) = match scheme {
                Scheme::Cpgc => {
                    let m = (m / 2).max(1) * 2;
                    (m, m, r.min(m))
                }
                Scheme::UcMmc => (m, k, r.min(m)),
                Scheme::Mcc => (m, k.max(m.div_ceil(r)), r),
            };
            let schedule = build(scheme, m, k, r, MdsPoints::Linear).expect("buildable by construction");
            let scores = raw[..k].iter().map(|&c| c.min(r)).collect();
            Case { schedule, scores }
        },
    )
}

pub fn codeword() -> impl Strategy<Value = Codeword> {
    prop::collection::btree_map(0usize..6, prop_oneof![-3i64..=-1, 1i64..=3], 1..=3)
        .prop_map(|m| Codeword::new(m.into_iter().collect()).expect("distinct nonzero terms"))
}

pub fn codeword_list() -> impl Strategy<Value = Vec<Codeword>> {
    prop::collection::vec(codeword(), 0..10)
}

pub fn received(case: &Case) -> Vec<Codeword> {
    let s = &case.schedule;
    let sv = ScoreVector::new(case.scores.clone(), s.load()).unwrap();
    received_codewords(s, &sv, s.delivery()).unwrap()
}

/// Adding a codeword, or one more finished task, never loses a block.
pub fn monotone(case: &Case, pick: usize, worker: usize) -> Result<(), TestCaseError> {
    let s = &case.schedule;
    let base = received(case);
    let before = recoverable_blocks(&base, s.num_blocks());

    let mut more = base.clone();
    more.push(s.cells()[pick % s.cells().len()].clone());
    let after = recoverable_blocks(&more, s.num_blocks());
    prop_assert!(before.recoverable.is_subset(&after.recoverable));

    let j = worker % s.workers();
    let mut bumped = case.clone();
    bumped.scores[j] = (bumped.scores[j] + 1).min(s.load());
    let after = recoverable_blocks(&received(&bumped), s.num_blocks());
    prop_assert!(before.recoverable.is_subset(&after.recoverable));
    prop_assert!(before.rank <= after.rank);
    Ok(())
}

pub fn monotone_lists(words: &[Codeword], extra: &Codeword) -> Result<(), TestCaseError> {
    let before = recoverable_blocks(words, 6);
    let mut more = words.to_vec();
    more.push(extra.clone());
    let after = recoverable_blocks(&more, 6);
    prop_assert!(before.recoverable.is_subset(&after.recoverable));
    prop_assert!(before.rank <= after.rank);
    Ok(())
}

/// Any reordering of the received list gives the same report.
pub fn order_free(words: &[Codeword], shuffled: &[Codeword], blocks: usize, width: usize) -> Result<(), TestCaseError> {
    prop_assert_eq!(recoverable_blocks(words, blocks), recoverable_blocks(shuffled, blocks));
    let mut inc = IncrementalDecoder::new(blocks, width);
    for w in shuffled {
        inc.insert(w);
    }
    prop_assert_eq!(inc.report(), recoverable_blocks(words, blocks));
    Ok(())
}

/// Peeling never recovers a block that elimination misses.
pub fn peel_within_rref(words: &[Codeword], blocks: usize) -> Result<(), TestCaseError> {
    let rref = recoverable_blocks(words, blocks).recoverable;
    prop_assert!(peel_recoverable(words, blocks).is_subset(&rref));
    Ok(())
}

/// An odd cycle of pair codewords is solved by elimination and stalls peeling.
pub fn odd_cycle_separates(order: &[usize], len: usize, noise: &[Codeword]) -> Result<(), TestCaseError> {
    let cycle: Vec<usize> = order[..len].to_vec();
    let mut words: Vec<Codeword> = (0..len)
        .map(|i| Codeword::pair(cycle[i], cycle[(i + 1) % len]).unwrap())
        .collect();
    let rref = recoverable_blocks(&words, 6);
    prop_assert!(cycle.iter().all(|b| rref.recoverable.contains(b)));
    prop_assert!(peel_recoverable(&words, 6).is_empty());
    words.extend(noise.iter().filter(|w| w.degree() >= 2).cloned());
    let rref = recoverable_blocks(&words, 6);
    prop_assert!(cycle.iter().all(|b| rref.recoverable.contains(b)));
    Ok(())
}

pub fn odd_cycle() -> impl Strategy<Value = (Vec<usize>, usize, Vec<Codeword>)> {
    (
        Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        prop_oneof![Just(3usize), Just(5usize)],
        codeword_list(),
    )
}
