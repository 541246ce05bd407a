//! Property tests over arbitrary inputs: the invariants that must hold for
//! every stream, not just the generated families.

use proptest::prelude::*;

use onlinecolor::bipartite::{lst89, randomized_lst};
use onlinecolor::gen::{gen_grade_instance, gen_random_k_colorable, planted_partition};
use onlinecolor::general::{color_locally_l, AlgoParams, RunOutcome};
use onlinecolor::ledger::{validate_coloring, ColoringLedger};
use onlinecolor::oracle::{chromatic_number, is_l_color_set, SmallGraph};
use onlinecolor::stream::ArrivalStream;

/// An arbitrary valid arrival stream on up to `max_n` vertices.
fn arb_stream(max_n: usize) -> impl Strategy<Value = ArrivalStream> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let events: Vec<BoxedStrategy<Vec<usize>>> = (0..n)
                .map(|v| {
                    if v == 0 {
                        Just(Vec::new()).boxed()
                    } else {
                        proptest::collection::vec(0..v, 0..=v.min(6)).boxed()
                    }
                })
                .collect();
            events
        })
        .prop_map(|mut events| {
            for e in &mut events {
                e.sort_unstable();
                e.dedup();
            }
            ArrivalStream::from_events(events).expect("constrained to be valid")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stream_text_and_json_round_trip(s in arb_stream(24)) {
        prop_assert_eq!(&ArrivalStream::from_text(&s.to_text()).unwrap(), &s);
        prop_assert_eq!(&ArrivalStream::from_json(&s.to_json()).unwrap(), &s);
    }

    #[test]
    fn component_algorithms_stay_proper_on_any_stream(s in arb_stream(40), seed in 0u64..1000) {
        for run in [lst89(&s), randomized_lst(&s, seed)] {
            let mut ledger = ColoringLedger::new();
            for (v, &c) in run.colors.iter().enumerate() {
                ledger.assign(v, c);
            }
            prop_assert!(validate_coloring(&s, &ledger).is_ok());
            prop_assert!(run.max_color() <= 2 * run.max_level());
        }
    }

    #[test]
    fn locally_l_output_is_proper_or_certified(s in arb_stream(20), ell in 1u32..=3) {
        let params = AlgoParams::default();
        match color_locally_l(&s, ell, &params) {
            Ok(RunOutcome::Complete { ledger }) => {
                prop_assert!(validate_coloring(&s, &ledger).is_ok());
            }
            Ok(RunOutcome::Aborted { at, certificate, ledger }) => {
                // the colored prefix is proper
                let mut prefix = ArrivalStream::new();
                for v in 0..=at {
                    prefix.push(s.neighbors(v).to_vec()).unwrap();
                }
                prop_assert!(validate_coloring(&prefix, &ledger).is_ok());
                if let Some(cert) = certificate {
                    if cert.witness.len() <= params.oracle_cap {
                        prop_assert!(cert.verify(&s, params.oracle_cap).unwrap());
                    }
                }
            }
            Err(e) => return Err(TestCaseError::fail(format!("engine error: {e}"))),
        }
    }

    #[test]
    fn planted_generator_respects_its_partition(
        n in 1usize..60, k in 1u32..5, density in 0.0f64..1.0, seed in 0u64..500
    ) {
        let s = gen_random_k_colorable(n, k, density, seed).unwrap();
        let plant = planted_partition(n, k, seed);
        // the plant is a proper coloring by construction: assert directly
        for (u, v) in s.edges() {
            prop_assert_ne!(plant[u], plant[v]);
        }
        // and the stream invariants hold
        for v in 0..s.len() {
            for &u in s.neighbors(v) {
                prop_assert!(u < v);
            }
        }
    }

    #[test]
    fn grade_instances_are_two_colorable(h in 0u32..=3, seed in 0u64..200) {
        let s = gen_grade_instance(h, seed);
        if s.len() <= 12 {
            let edges: Vec<(usize, usize)> = s.edges().collect();
            let g = SmallGraph::new(s.len(), &edges).unwrap();
            prop_assert!(chromatic_number(&g, 12).unwrap() <= 2);
        } else {
            prop_assert!(onlinecolor::oracle::is_bipartite(
                s.len(),
                &s.edges().collect::<Vec<_>>()
            ));
        }
    }

    #[test]
    fn l_color_sets_are_monotone_in_l(
        edges in proptest::collection::vec((0usize..7, 0usize..7), 0..14),
        subset in proptest::collection::vec(0usize..7, 0..7),
        k in 1u32..=4
    ) {
        let g = SmallGraph::new(7, &edges).unwrap();
        let mut subset = subset;
        subset.sort_unstable();
        subset.dedup();
        let mut prev = false;
        for l in 0..=k {
            let now = is_l_color_set(&g, &subset, k, l, 12).unwrap();
            prop_assert!(now || !prev, "l-color-set property must be monotone in l");
            prev = now;
        }
        // at l = k the question reduces to k-colorability of the whole graph
        let chi = chromatic_number(&g, 12).unwrap();
        prop_assert_eq!(prev, chi <= k);
    }
}
